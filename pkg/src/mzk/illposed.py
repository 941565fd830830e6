"""Two-mode approximate solutions and the uniform-continuity failure experiment.

The families are

    u_{m,j}(t, x) = A exp(i Phi) + c_j,   Phi = m x1 - x2 + theta t,

with ``A = r m^-s``, ``c_0 = 0``, ``c_1 = m^{-1/2}`` and phase speed
``theta = m (m^2 + 1 + lam (A^2 + c_j^2))``.  With ``j = 0`` this is an exact
solution; with ``j = 1`` it leaves the residual
``R = -2 i lam m A^2 c cos(Phi) exp(i Phi)``, i.e. the two modes
``(2m, -2)`` and ``(0, 0)`` each with coefficient ``-i lam m A^2 c``
(the latter times ``exp(2 i theta t)`` for the doubled carrier).
"""
from __future__ import annotations

import logging
import math
import time as _time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dynamics import EquationParams, full_rhs, nonlinearity, propagate_linear
from .errors import ConfigurationError, DataError
from .spectral import SpectralField, TorusGrid, hs_norm
from .timestepping import SolverConfig, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApproxFamilyParams:
    m: int
    j: int
    r: float = 1.0
    s: float = 2.0
    lam: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConfigurationError(f"carrier frequency m must be a positive integer, got {self.m}")
        if self.j not in (0, 1):
            raise ConfigurationError(f"family index j must be 0 or 1, got {self.j}")
        if not self.r > 0:
            raise ConfigurationError("amplitude scale r must be positive")

    @property
    def amplitude(self):
        return self.r * self.m ** (-self.s)

    @property
    def offset(self):
        return self.m ** -0.5 if self.j == 1 else 0.0

    @property
    def phase_speed(self):
        m = self.m
        return m * (m * m + 1 + self.lam * (self.amplitude ** 2 + self.offset ** 2))

    @property
    def carrier(self):
        return (self.m, -1)


def _check_grid(p, grid, modes):
    if any(max(abs(a), abs(b)) > grid.K for a, b in modes):
        raise ConfigurationError(f"grid bandwidth K={grid.K} too small for m={p.m}")


def family_field(p: ApproxFamilyParams, t, grid: TorusGrid) -> SpectralField:
    _check_grid(p, grid, [p.carrier])
    return SpectralField.from_modes(grid, {
        p.carrier: p.amplitude * np.exp(1j * p.phase_speed * t),
        (0, 0): p.offset,
    })


def family_time_derivative(p, t, grid):
    """Analytic ``d/dt`` of :func:`family_field`."""
    _check_grid(p, grid, [p.carrier])
    theta = p.phase_speed
    return SpectralField.from_modes(grid, {p.carrier: 1j * theta * p.amplitude * np.exp(1j * theta * t)})


def family_residual(p: ApproxFamilyParams, t, grid: TorusGrid) -> SpectralField:
    """Closed-form residual ``(d_t + d_{x1} Lap) u - lam |u|^2 d_{x1} u``."""
    _check_grid(p, grid, [(2 * p.m, -2)])
    if p.j == 0:
        return SpectralField.zeros(grid)
    coef = -1j * p.lam * p.m * p.amplitude ** 2 * p.offset
    return SpectralField.from_modes(grid, {
        (2 * p.m, -2): coef * np.exp(2j * p.phase_speed * t),
        (0, 0): coef,
    })


def residual_linf_closed_form(p):
    """``sup |R_{m,j}|`` = ``2 lam m A^2 c`` (reached where ``cos Phi = +-1``)."""
    return 2 * abs(p.lam) * p.m * p.amplitude ** 2 * p.offset


def operator_residual(p, t, grid, fd_step=None):
    """Residual obtained by applying the discrete operator to the family.

    With ``fd_step=None`` the time derivative is analytic.  Otherwise it is a
    centred difference of ``W(-t) u(t)`` (the interaction-picture variable,
    which varies slowly), mapped back by ``W(t)``; the dispersive part then
    cancels identically and the nonlinearity is evaluated pseudospectrally.
    """
    params = EquationParams(p.lam)
    u = family_field(p, t, grid)
    if fd_step is None:
        return family_time_derivative(p, t, grid) - full_rhs(u, params)
    h = fd_step
    vp = propagate_linear(-(t + h), family_field(p, t + h, grid))
    vm = propagate_linear(-(t - h), family_field(p, t - h, grid))
    dv = (vp - vm) * (1.0 / (2 * h))
    return propagate_linear(t, dv) - nonlinearity(u, params)


def exponent_regression(series):
    """Least-squares slope of ``log value`` against ``log m``.

    Returns ``(slope, stderr)``.
    """
    xs = np.array([float(m) for m, _ in series])
    ys = np.array([float(v) for _, v in series])
    if xs.size < 3:
        raise DataError("exponent regression needs at least 3 points")
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise DataError("exponent regression needs positive abscissae and values")
    res = stats.linregress(np.log(xs), np.log(ys))
    return float(res.slope), float(res.stderr)


def default_bandwidth(m):
    return 3 * m + 8


def run_divergence_experiment(m_list, r=1.0, s=2.0, lam=1.0, t_end=1.0, cfg=None,
                              check_times=(0.25, 0.5, 1.0), fit_time=0.5, K=None):
    """Solve from both families' initial data for each ``m`` and compare.

    ``cfg`` supplies the time-stepping policy (``N`` and ``t_end`` are
    overridden per ``m``); by default fixed steps of ``1/400``.  Returns a
    JSON-ready dict.
    """
    if cfg is None:
        cfg = SolverConfig(N=0, t_end=t_end, lam=lam, dt=1.0 / 400)
    out = {"experiment": "illposed", "lam": lam, "r": r, "s": s, "t_end": t_end,
           "check_times": list(check_times), "fit_time": fit_time, "runs": {}}
    for m in sorted(m_list):
        t0 = _time.perf_counter()
        Km = default_bandwidth(m) if K is None else K
        grid = TorusGrid(Km)
        c = SolverConfig(N=Km, t_end=t_end, lam=lam, dt=cfg.dt, tol=cfg.tol,
                         record_every=cfg.record_every, s=s)
        fams = [ApproxFamilyParams(m, j, r, s, lam) for j in (0, 1)]
        trajs = [solve(family_field(p, 0.0, grid), c) for p in fams]
        times = np.array(trajs[0].times)
        if not np.array_equal(times, trajs[1].times):
            raise RuntimeError("families were recorded at different times")
        D, err_l2, err_hs = [], [[], []], [[], []]
        for i, t in enumerate(times):
            u0t, u1t = trajs[0].fields[i], trajs[1].fields[i]
            D.append(hs_norm(s, u1t - u0t))
            for j, (p, u) in enumerate(zip(fams, (u0t, u1t))):
                v = u - family_field(p, t, grid)
                err_l2[j].append(hs_norm(0, v))
                err_hs[j].append(hs_norm(s, v))
        D = np.array(D)
        envelope = 0.5 * r * np.abs(np.sin(times))
        checks = {}
        for tc in check_times:
            i = int(np.argmin(np.abs(times - tc)))
            if abs(times[i] - tc) > 1e-9:
                raise ConfigurationError(f"check time {tc} is not on the recording grid")
            bound = 0.5 * r * abs(math.sin(tc)) - m ** -0.5 - 5 * m ** (-7 / 16)
            checks[repr(tc)] = {"D": float(D[i]), "lower_bound": bound, "ok": bool(D[i] >= bound)}
        i_fit = int(np.argmin(np.abs(times - fit_time)))
        out["runs"][str(m)] = {
            "m": m, "K": Km,
            "t": times.tolist(),
            "D": D.tolist(),
            "envelope": envelope.tolist(),
            "initial_distance": float(D[0]),
            "predicted_initial_distance": m ** -0.5,
            "err_l2_j0": err_l2[0], "err_l2_j1": err_l2[1],
            "err_hs_j0": err_hs[0], "err_hs_j1": err_hs[1],
            "v1_l2_at_fit_time": err_l2[1][i_fit],
            "v1_hs_at_fit_time": err_hs[1][i_fit],
            "checks": checks,
            "steps": len(trajs[0].step_sizes),
            "wall_seconds": _time.perf_counter() - t0,
        }
        log.info("illposed m=%d done in %.1fs", m, out["runs"][str(m)]["wall_seconds"])
    ms = sorted(m_list)
    if len(ms) >= 3:
        runs = out["runs"]
        out["fit_v1_l2"] = exponent_regression([(m, runs[str(m)]["v1_l2_at_fit_time"]) for m in ms])
        out["fit_v1_hs"] = exponent_regression([(m, runs[str(m)]["v1_hs_at_fit_time"]) for m in ms])
        out["predicted_v1_l2_exponent"] = 0.5 - 2 * s
        out["predicted_v1_hs_exponent"] = (0.5 - s) / (s + 1)
    return out
