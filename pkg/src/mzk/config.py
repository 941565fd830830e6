"""Run configuration: a versioned YAML document.

Every section has defaults; unknown keys and constraint violations are all
collected before raising, so one pass reports every problem.  Example::

    schema_version: 1
    seed: 7
    equation: {lam: 1.0, s: 2.0}
    solver: {dt: 0.005, t_end: 1.0, record_every: 5}
    illposed: {m_list: [4, 8, 16, 32], r: 1.0}
    assert:
      - "initial_distance_error <= 1e-12"
      - "fit_v1_l2_exponent <= -3.2"
"""
from __future__ import annotations

import copy
import logging
import re
from dataclasses import dataclass, field as dc_field

import yaml

from .errors import ConfigurationError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SUBCOMMANDS = (
    "simulate", "exact-wave-test", "illposed", "galerkin-convergence", "energy-identity",
    "ineq-kato-ponce", "ineq-product", "ineq-strichartz", "ineq-transference",
)

#: experiments whose meaning relies on the well-posedness range of s
WELLPOSED_SUBCOMMANDS = {"simulate", "exact-wave-test", "illposed", "galerkin-convergence"}
S_THRESHOLD = 5.0 / 3.0

DEFAULTS = {
    "equation": {"lam": 6.0, "s": 2.0},
    "grid": {"K": None},
    "solver": {"N": None, "dt": None, "tol": None, "t_end": 1.0, "record_every": None},
    "initial": {"kind": "smooth", "decay": 1.0, "scale": 1.0, "m": 4, "j": 0, "r": 1.0},
    "exact_wave": {"m": 4, "r": 1.0},
    "illposed": {"m_list": [4, 8, 16, 32], "r": 1.0,
                 "check_times": [0.25, 0.5, 1.0], "fit_time": 0.5},
    "convergence": {"N_list": [8, 12, 16, 24, 32], "decay": 1.0, "scale": 1.0},
    "energy": {"N": 3, "count": 20, "delta": 1e-5, "norm": 0.5},
    "ensemble": {"count": 200, "beta": 2.0, "K_list": [8, 16, 32]},
    "strichartz": {"j_list": [2, 3, 4, 5, 6], "count": 100, "beta": 0.0, "n_t": 65, "oversample": 4},
    "transference": {"alpha": 1.0, "lattice_radius": 6, "n_samples": 64, "s_list": [2.0, 0.0]},
    "output": {"dir": None, "snapshots": True},
}
TOP_LEVEL = {"schema_version", "subcommand", "seed", "allow_low_regularity", "assert"} | set(DEFAULTS)

_ASSERT_RE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*(<=|>=|==|!=|<|>)\s*(\S+)\s*$")

_NUMBER = (int, float)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-5`` (no dot) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                  |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                  |\.[0-9_]+(?:[eE][-+][0-9]+)?
                  |[-+]?\.(?:inf|Inf|INF)
                  |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _yaml_load(text):
    return yaml.load(text, Loader=_Loader)


@dataclass
class Assertion:
    metric: str
    op: str
    value: object

    def check(self, metrics):
        if self.metric not in metrics:
            return False, None
        got = metrics[self.metric]
        ops = {"<=": lambda a, b: a <= b, ">=": lambda a, b: a >= b, "<": lambda a, b: a < b,
               ">": lambda a, b: a > b, "==": lambda a, b: a == b, "!=": lambda a, b: a != b}
        try:
            ok = bool(ops[self.op](got, self.value))
        except TypeError:
            ok = False
        return ok, got

    def __str__(self):
        return f"{self.metric} {self.op} {self.value!r}"


@dataclass
class RunConfig:
    """Validated configuration with defaults filled in."""

    subcommand: str
    seed: int = 0
    allow_low_regularity: bool = False
    sections: dict = dc_field(default_factory=dict)
    assertions: list = dc_field(default_factory=list)

    def __getitem__(self, name):
        return self.sections[name]

    def echo(self):
        out = {"schema_version": SCHEMA_VERSION, "subcommand": self.subcommand,
               "seed": self.seed, "allow_low_regularity": self.allow_low_regularity}
        out.update(copy.deepcopy(self.sections))
        out["assert"] = [str(a) for a in self.assertions]
        return out


def parse_assertion(text):
    m = _ASSERT_RE.match(str(text))
    if not m:
        raise ValueError(f"cannot parse assertion {text!r}; expected '<metric> <op> <value>'")
    value = _yaml_load(m.group(3))
    return Assertion(m.group(1), m.group(2), value)


def _set_path(doc, path, value):
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"override {path!r} descends into a non-mapping")
    node[keys[-1]] = value


def apply_overrides(doc, overrides):
    """``overrides`` is a sequence of ``key.path=value`` strings; values are YAML scalars."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        _set_path(doc, key.strip(), _yaml_load(raw))
    return doc


def load_document(text):
    try:
        doc = _yaml_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a mapping at the top level")
    return doc


def parse_config(text, subcommand=None, overrides=(), seed=None):
    """Parse and validate; raises :class:`ConfigurationError` listing every problem."""
    doc = apply_overrides(load_document(text), overrides)
    if seed is not None:
        doc["seed"] = seed
    return validate(doc, subcommand)


def _num(errors, where, v, positive=False, nonneg=False, integer=False, allow_none=False):
    if v is None and allow_none:
        return
    if isinstance(v, bool) or not isinstance(v, _NUMBER):
        errors.append(f"{where}: expected a number, got {v!r}")
        return
    if integer and int(v) != v:
        errors.append(f"{where}: expected an integer, got {v!r}")
    if positive and not v > 0:
        errors.append(f"{where}: must be > 0, got {v!r}")
    if nonneg and not v >= 0:
        errors.append(f"{where}: must be >= 0, got {v!r}")


def _num_list(errors, where, v, **kw):
    if not isinstance(v, list) or not v:
        errors.append(f"{where}: expected a non-empty list")
        return
    for i, x in enumerate(v):
        _num(errors, f"{where}[{i}]", x, **kw)


def validate(doc, subcommand=None):
    errors = []
    version = doc.get("schema_version")
    if version is None:
        errors.append("schema_version: missing (current version is 1)")
    elif version != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {version!r}")
    for key in doc:
        if key not in TOP_LEVEL:
            errors.append(f"unknown key {key!r}")
    sub = doc.get("subcommand")
    if subcommand is not None:
        if sub is not None and sub != subcommand:
            errors.append(f"subcommand: config is for {sub!r} but {subcommand!r} was requested")
        sub = subcommand
    if sub not in SUBCOMMANDS:
        errors.append(f"subcommand: {sub!r} is not one of {', '.join(SUBCOMMANDS)}")

    sections = {}
    for name, defaults in DEFAULTS.items():
        given = doc.get(name) or {}
        if not isinstance(given, dict):
            errors.append(f"{name}: expected a mapping")
            given = {}
        for key in given:
            if key not in defaults:
                errors.append(f"unknown key {name}.{key!r}")
        merged = copy.deepcopy(defaults)
        merged.update({k: v for k, v in given.items() if k in defaults})
        sections[name] = merged

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        errors.append(f"seed: expected an unsigned 64-bit integer, got {seed!r}")
        seed = 0
    allow_low = doc.get("allow_low_regularity", False)
    if not isinstance(allow_low, bool):
        errors.append("allow_low_regularity: expected true or false")
        allow_low = False

    assertions = []
    raw_asserts = doc.get("assert") or []
    if not isinstance(raw_asserts, list):
        errors.append("assert: expected a list of '<metric> <op> <value>' strings")
        raw_asserts = []
    for a in raw_asserts:
        try:
            assertions.append(parse_assertion(a))
        except ValueError as exc:
            errors.append(f"assert: {exc}")

    _check_sections(errors, sections, sub, allow_low)
    if errors:
        raise ConfigurationError("invalid configuration:\n  " + "\n  ".join(errors), errors=errors)
    return RunConfig(subcommand=sub, seed=int(seed), allow_low_regularity=allow_low,
                     sections=sections, assertions=assertions)


def _check_sections(errors, sec, sub, allow_low):
    eq, grid, solver = sec["equation"], sec["grid"], sec["solver"]
    n_before = len(errors)
    _num(errors, "equation.lam", eq["lam"])
    _num(errors, "equation.s", eq["s"], nonneg=True)
    _num(errors, "grid.K", grid["K"], positive=True, integer=True, allow_none=True)
    _num(errors, "solver.N", solver["N"], nonneg=True, allow_none=True)
    _num(errors, "solver.dt", solver["dt"], positive=True, allow_none=True)
    _num(errors, "solver.tol", solver["tol"], positive=True, allow_none=True)
    _num(errors, "solver.t_end", solver["t_end"], nonneg=True)
    _num(errors, "solver.record_every", solver["record_every"], positive=True, integer=True, allow_none=True)
    if len(errors) > n_before:
        return
    s = eq["s"]
    K = grid["K"]
    if sub in WELLPOSED_SUBCOMMANDS and not s > S_THRESHOLD:
        if allow_low:
            log.warning("s=%g is not above 5/3; continuing because allow_low_regularity is set", s)
        else:
            errors.append(f"equation.s: s={s} violates s > 5/3 (set allow_low_regularity to override)")

    if sub == "simulate":
        ini = sec["initial"]
        if ini["kind"] not in ("smooth", "family", "zero"):
            errors.append(f"initial.kind: {ini['kind']!r} is not one of smooth, family, zero")
        if K is None:
            errors.append("grid.K: simulate needs an explicit bandwidth")
        elif solver["N"] is not None and solver["N"] > K:
            errors.append(f"solver.N: cutoff {solver['N']} exceeds grid bandwidth K={K}")
        if ini["kind"] == "family" and K is not None and 2 * ini["m"] > K:
            errors.append(f"grid.K: K={K} is below 2m={2 * ini['m']} needed by the family")
    elif sub == "exact-wave-test":
        ew = sec["exact_wave"]
        _num(errors, "exact_wave.m", ew["m"], positive=True, integer=True)
        _num(errors, "exact_wave.r", ew["r"], positive=True)
        if K is not None and len(errors) == n_before and K < ew["m"]:
            errors.append(f"grid.K: bandwidth K={K} is below the carrier frequency m={ew['m']}")
    elif sub == "illposed":
        ip = sec["illposed"]
        _num_list(errors, "illposed.m_list", ip["m_list"], positive=True, integer=True)
        _num_list(errors, "illposed.check_times", ip["check_times"], nonneg=True)
        _num(errors, "illposed.r", ip["r"], positive=True)
        if len(errors) == n_before:
            if K is not None and K < max(ip["m_list"]):
                errors.append(f"grid.K: bandwidth K={K} is below max(m_list)={max(ip['m_list'])}")
            if len(ip["m_list"]) < 3:
                log.warning("fewer than 3 carrier frequencies: no exponent fit will be reported")
    elif sub == "galerkin-convergence":
        cv = sec["convergence"]
        _num_list(errors, "convergence.N_list", cv["N_list"], positive=True)
        if len(errors) == n_before:
            if K is None:
                errors.append("grid.K: galerkin-convergence needs an explicit bandwidth")
            elif max(cv["N_list"]) > K:
                errors.append(f"convergence.N_list: cutoff {max(cv['N_list'])} exceeds grid bandwidth K={K}")
        if solver["tol"] is not None:
            errors.append("solver.tol: galerkin-convergence needs fixed steps")
    elif sub == "energy-identity":
        en = sec["energy"]
        _num(errors, "energy.N", en["N"], positive=True)
        _num(errors, "energy.count", en["count"], positive=True, integer=True)
        _num(errors, "energy.delta", en["delta"], positive=True)
        _num(errors, "energy.norm", en["norm"], positive=True)
        if len(errors) == n_before and en["N"] > 6:
            errors.append(f"energy.N: N={en['N']} exceeds the oracle guard N <= 6")
    elif sub in ("ineq-kato-ponce", "ineq-product"):
        ens = sec["ensemble"]
        _num_list(errors, "ensemble.K_list", ens["K_list"], positive=True, integer=True)
        _num(errors, "ensemble.count", ens["count"], positive=True, integer=True)
        _num(errors, "ensemble.beta", ens["beta"], nonneg=True)
    elif sub == "ineq-strichartz":
        st = sec["strichartz"]
        _num_list(errors, "strichartz.j_list", st["j_list"], positive=True, integer=True)
        _num(errors, "strichartz.count", st["count"], positive=True, integer=True)
        _num(errors, "strichartz.n_t", st["n_t"], positive=True, integer=True)
        if len(errors) == n_before:
            if K is None:
                errors.append("grid.K: ineq-strichartz needs an explicit bandwidth")
            elif K < 2 ** max(st["j_list"]):
                errors.append(f"grid.K: bandwidth K={K} is below 2^j={2 ** max(st['j_list'])} for the top shell")
            if st["n_t"] < 65 or st["n_t"] % 2 == 0:
                errors.append("strichartz.n_t: Simpson quadrature needs an odd node count >= 65")
    elif sub == "ineq-transference":
        tr = sec["transference"]
        _num(errors, "transference.alpha", tr["alpha"], positive=True)
        _num(errors, "transference.lattice_radius", tr["lattice_radius"], nonneg=True, integer=True)
        _num(errors, "transference.n_samples", tr["n_samples"], positive=True, integer=True)
        _num_list(errors, "transference.s_list", tr["s_list"], nonneg=True)
