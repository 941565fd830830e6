import logging

import pytest

from mzk.config import DEFAULTS, apply_overrides, parse_assertion, parse_config
from mzk.errors import ConfigurationError

MINIMAL = "schema_version: 1\ngrid: {K: 8}\n"


def errors_of(text, sub="simulate", **kw):
    with pytest.raises(ConfigurationError) as exc:
        parse_config(text, sub, **kw)
    return exc.value.errors


def test_minimal_simulate_fills_defaults():
    cfg = parse_config(MINIMAL, "simulate")
    assert cfg.subcommand == "simulate" and cfg.seed == 0
    assert cfg["equation"] == DEFAULTS["equation"]
    assert cfg["solver"]["t_end"] == 1.0
    echo = cfg.echo()
    assert echo["schema_version"] == 1 and echo["grid"] == {"K": 8}
    assert echo["assert"] == []


def test_low_regularity_needs_override(caplog):
    errs = errors_of(MINIMAL + "equation: {s: 1.0}\n")
    assert any("s > 5/3" in e for e in errs)
    with caplog.at_level(logging.WARNING):
        cfg = parse_config(MINIMAL + "equation: {s: 1.0}\nallow_low_regularity: true\n", "simulate")
    assert cfg["equation"]["s"] == 1.0
    assert "5/3" in caplog.text
    # inequality harnesses are not subject to the threshold
    parse_config("schema_version: 1\nequation: {s: 1.5}\n", "ineq-product")


def test_bandwidth_errors():
    errs = errors_of("schema_version: 1\ngrid: {K: 10}\nillposed: {m_list: [4, 8, 16]}\n", "illposed")
    assert any("max(m_list)=16" in e for e in errs)
    errs = errors_of("schema_version: 1\ngrid: {K: 4}\nsolver: {N: 6}\n")
    assert any("exceeds grid bandwidth" in e for e in errs)
    errs = errors_of("schema_version: 1\ngrid: {K: 40}\n", "ineq-strichartz")
    assert any("2^j=64" in e for e in errs)
    errs = errors_of("schema_version: 1\nenergy: {N: 7}\n", "energy-identity")
    assert any("N <= 6" in e for e in errs)


def test_all_errors_are_collected():
    text = "schema_version: 1\nbogus: 1\nsolver: {dt: -1, colour: red}\nequation: {lam: x}\n"
    errs = errors_of(text)
    joined = "\n".join(errs)
    assert "unknown key 'bogus'" in joined
    assert "unknown key solver.'colour'" in joined
    assert "solver.dt" in joined and "equation.lam" in joined
    assert len(errs) >= 4


def test_schema_version_and_subcommand():
    assert any("schema_version" in e for e in errors_of("grid: {K: 8}\n"))
    assert any("unsupported" in e for e in errors_of("schema_version: 2\ngrid: {K: 8}\n"))
    assert any("subcommand" in e for e in errors_of(MINIMAL + "subcommand: illposed\n"))
    assert any("is not one of" in e for e in errors_of(MINIMAL, sub="nope"))
    assert any("mapping" in e for e in errors_of("- 1\n- 2\n"))
    assert any("YAML" in e for e in errors_of("a: [\n"))


def test_overrides_and_seed():
    cfg = parse_config(MINIMAL + "seed: 3\n", "simulate",
                       overrides=["solver.t_end=0.25", "equation.lam=1e-3"], seed=99)
    assert cfg["solver"]["t_end"] == 0.25
    assert cfg["equation"]["lam"] == 1e-3
    assert cfg.seed == 99 and cfg.echo()["seed"] == 99
    with pytest.raises(ConfigurationError):
        apply_overrides({}, ["novalue"])
    assert any("seed" in e for e in errors_of(MINIMAL + "seed: -1\n"))
    assert any("seed" in e for e in errors_of(MINIMAL, seed=2 ** 64))


def test_exponent_floats_without_dot():
    cfg = parse_config(MINIMAL + "solver: {tol: 1e-10}\n", "simulate")
    assert cfg["solver"]["tol"] == 1e-10


def test_assertions():
    a = parse_assertion("final_rel_error <= 1e-8")
    assert (a.metric, a.op, a.value) == ("final_rel_error", "<=", 1e-8)
    assert a.check({"final_rel_error": 1e-9}) == (True, 1e-9)
    assert a.check({"final_rel_error": 1e-7})[0] is False
    assert a.check({}) == (False, None)
    assert parse_assertion("ok == true").check({"ok": True})[0]
    with pytest.raises(ValueError):
        parse_assertion("no operator here")
    errs = errors_of(MINIMAL + "assert: ['x ~ 3']\n")
    assert any("assert" in e for e in errs)
