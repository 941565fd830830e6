import json
import math

import numpy as np

from mzk.config import parse_assertion
from mzk.report import PLOT_COLUMNS, ExperimentReport, emit_plot_data, to_jsonable, write_report


def test_to_jsonable():
    out = to_jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": math.nan, "d": np.bool_(True),
                       "e": (1, -math.inf), 3: 1j})
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": "nan", "d": True, "e": [1, "-inf"], "3": [0.0, 1.0]}
    json.dumps(out)


def test_header_only_for_empty_figure(tmp_path):
    rep = ExperimentReport("x", plot_data={"fig": []})
    (path,) = emit_plot_data(rep, tmp_path)
    assert open(path).read() == ",".join(PLOT_COLUMNS) + "\n"
    assert emit_plot_data(ExperimentReport("y"), tmp_path / "none") == []


def test_plot_data_is_byte_identical(tmp_path):
    rep = ExperimentReport("illposed", plot_data={
        "divergence": [(4, 0.0, 0.5, 0.0), (4, 0.1, 0.51, 0.0499167)],
        "other": [(1, 2, None, None)]})
    a = [open(p, "rb").read() for p in emit_plot_data(rep, tmp_path / "a")]
    b = [open(p, "rb").read() for p in emit_plot_data(rep, tmp_path / "b")]
    assert a == b
    lines = a[0].decode().splitlines()
    assert lines[1] == "illposed,4,0.0,0.5,0.0"
    assert open(tmp_path / "a" / "other.csv").read().splitlines()[1] == "illposed,1,2,,"


def test_evaluate_and_serialize(tmp_path):
    rep = ExperimentReport("t", metrics={"err": 1e-9, "flag": False}, wall_seconds=1.0)
    fails = rep.evaluate([parse_assertion("err <= 1e-8"), parse_assertion("flag == true"),
                          parse_assertion("missing < 1")])
    assert rep.status == "failed"
    assert [f["metric"] for f in fails] == ["flag", "missing"]
    assert fails[1]["reason"] == "metric not reported"
    d = json.loads(open(write_report(rep, tmp_path)).read())
    assert d["status"] == "failed" and d["wall_seconds"] == 1.0
    rep.payload = {"runs": {"4": {"wall_seconds": 3.0, "x": 1}}}
    assert "wall_seconds" not in rep.deterministic_json()
    assert rep.evaluate([]) == [] and rep.status == "passed"
