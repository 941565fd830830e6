"""Experiment reports and their on-disk layout.

A run directory holds ``report.json``, long-format plot data under
``series/`` and optional binary snapshots under ``snapshots/``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field as dc_field
from importlib import metadata

import numpy as np

PLOT_COLUMNS = ("experiment", "m_or_N_or_j", "t_or_sample", "value", "envelope")


def code_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # running from a source tree
        from . import __version__
        return __version__


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@dataclass
class ExperimentReport:
    """Provenance plus results of one run.

    ``metrics`` is a flat name -> scalar map that assertions refer to;
    ``plot_data`` maps a figure name to rows
    ``(key, t_or_sample, value, envelope)``.
    """

    experiment: str
    config: dict = dc_field(default_factory=dict)
    seed: int = 0
    version: str = dc_field(default_factory=code_version)
    wall_seconds: float = 0.0
    payload: dict = dc_field(default_factory=dict)
    metrics: dict = dc_field(default_factory=dict)
    plot_data: dict = dc_field(default_factory=dict)
    assertions: list = dc_field(default_factory=list)
    status: str = "pending"

    def evaluate(self, assertions):
        """Check assertions against ``metrics``; returns the failures."""
        self.assertions = []
        failures = []
        for a in assertions:
            ok, got = a.check(self.metrics)
            rec = {"assertion": str(a), "metric": a.metric, "observed": to_jsonable(got),
                   "passed": ok}
            if got is None:
                rec["reason"] = "metric not reported"
            self.assertions.append(rec)
            if not ok:
                failures.append(rec)
        self.status = "passed" if not failures else "failed"
        return failures

    def to_dict(self, include_timing=True):
        d = {
            "experiment": self.experiment, "version": self.version, "seed": self.seed,
            "config": self.config, "status": self.status, "metrics": self.metrics,
            "assertions": self.assertions, "payload": self.payload,
        }
        if include_timing:
            d["wall_seconds"] = self.wall_seconds
        return to_jsonable(d)

    def to_json(self, include_timing=True):
        return json.dumps(self.to_dict(include_timing), indent=1, sort_keys=True)

    def deterministic_json(self):
        """JSON without wall-clock fields, for reproducibility comparisons."""
        return json.dumps(_strip_timing(self.to_dict(False)), sort_keys=True)


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "wall_seconds"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float) or isinstance(v, np.floating):
        return repr(float(v))
    return str(v)


def plot_csv_text(experiment, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for key, x, value, env in rows:
        w.writerow([experiment, _fmt(key), _fmt(x), _fmt(value), _fmt(env)])
    return buf.getvalue()


def emit_plot_data(report: ExperimentReport, directory):
    """Write one long-format CSV per figure; returns the written paths in order."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in sorted(report.plot_data):
        path = os.path.join(directory, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(plot_csv_text(report.experiment, report.plot_data[name]))
        paths.append(path)
    return paths


def write_report(report: ExperimentReport, directory):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "report.json")
    with open(path, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    return path
