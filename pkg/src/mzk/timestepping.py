"""Integrating-factor Runge-Kutta time stepping of the Galerkin system.

The linear dispersive part is diagonal and unitary, so it is integrated
exactly; classical RK4 is applied to the interaction-picture variable
``v = W(-t) u``.  Expressed back in ``u`` this is the Lawson scheme
implemented in :func:`if_rk4_step`.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import galerkin_system
from .errors import BlowUpError, ConfigurationError, StiffnessError
from .spectral import SpectralField, hs_norm, linf_norm

log = logging.getLogger(__name__)

ORACLE_MAX_N = 6


@dataclass
class SolverConfig:
    """Time-integration settings.

    ``tol=None`` selects fixed steps of size ``dt`` (or the heuristic step
    when ``dt`` is also ``None``); a positive ``tol`` enables step-doubling
    control of the relative local error with ``dt`` as the first trial step.
    """

    N: int
    t_end: float
    lam: float = 6.0
    dt: Optional[float] = None
    tol: Optional[float] = None
    record_every: int = 1
    s: float = 2.0
    dt_min: float = 1e-12
    safety: float = 0.9
    grow_max: float = 2.0
    shrink_min: float = 0.2

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.tol is not None and not self.tol > 0:
            raise ConfigurationError(f"step tolerance must be positive, got {self.tol}")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be non-negative")

    @property
    def adaptive(self):
        return self.tol is not None


@dataclass
class Trajectory:
    """Snapshots ``(t, u(t))`` of one run plus per-step diagnostics."""

    times: list = dc_field(default_factory=list)
    fields: list = dc_field(default_factory=list)
    step_times: list = dc_field(default_factory=list)
    step_sizes: list = dc_field(default_factory=list)
    rejected: list = dc_field(default_factory=list)
    config: Optional[SolverConfig] = None

    def append(self, t, field):
        if self.times and not t > self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(float(t))
        self.fields.append(field)

    @property
    def final(self):
        return self.fields[-1]

    def __len__(self):
        return len(self.times)

    def norm_series(self, s):
        return np.array([hs_norm(s, f) for f in self.fields])

    def to_csv(self, path, s=None):
        """Write ``t, l2_norm, hs_norm, dt, rejected_steps`` per snapshot."""
        s = self.config.s if (s is None and self.config is not None) else (s or 0.0)
        dts = dict(zip(self.step_times, self.step_sizes))
        rej = dict(zip(self.step_times, self.rejected))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "l2_norm", "hs_norm", "dt", "rejected_steps"])
            for t, f in zip(self.times, self.fields):
                w.writerow([repr(t), repr(hs_norm(0, f)), repr(hs_norm(s, f)),
                            repr(dts.get(t, 0.0)), rej.get(t, 0)])


def _lawson_rk4(coeffs, dt, system):
    if dt == 0:
        return coeffs.copy()
    E = np.exp(0.5j * dt * system.omega)
    F = system.nonlinear
    a = F(coeffs)
    Eu = E * coeffs
    b = F(Eu + 0.5 * dt * E * a)
    c = F(Eu + 0.5 * dt * b)
    d = F(E * (Eu + dt * c))
    return E * (Eu + dt / 6.0 * (E * a + 2.0 * (b + c))) + dt / 6.0 * d


def if_rk4_step(state, dt, N, params):
    """One integrating-factor RK4 step of the Galerkin system with cutoff ``N``."""
    system = galerkin_system(state.grid, N, float(params.lam))
    out = _lawson_rk4(state.coeffs, dt, system)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite state after step of size {dt}")
    return SpectralField(state.grid, out)


def default_dt(u0, N, lam):
    """``0.5 / (1 + |lam| max|u0|^2 N)``."""
    return 0.5 / (1.0 + abs(lam) * linf_norm(u0) ** 2 * N)


def _rel_diff(a, b):
    nb = np.linalg.norm(b)
    d = np.linalg.norm(a - b)
    if nb == 0:
        return 0.0 if d == 0 else math.inf
    return d / nb


def solve(u0: SpectralField, cfg: SolverConfig) -> Trajectory:
    """Integrate the Galerkin system from ``u0`` over ``[0, cfg.t_end]``."""
    grid = u0.grid
    if cfg.N > grid.K:
        raise ConfigurationError(f"cutoff N={cfg.N} exceeds grid bandwidth K={grid.K}")
    system = galerkin_system(grid, cfg.N, float(cfg.lam))
    traj = Trajectory(config=cfg)
    traj.append(0.0, u0)
    if cfg.t_end == 0:
        return traj
    u = u0.coeffs.copy()
    t = 0.0
    n_acc = 0
    if not cfg.adaptive:
        dt0 = cfg.dt if cfg.dt is not None else default_dt(u0, cfg.N, cfg.lam)
        nsteps = max(1, int(math.ceil(cfg.t_end / dt0 - 1e-9)))
        h = cfg.t_end / nsteps
        for n in range(1, nsteps + 1):
            u = _lawson_rk4(u, h, system)
            t = cfg.t_end if n == nsteps else n * h
            if not np.all(np.isfinite(u)):
                raise BlowUpError(f"blow-up at t={t:.6g}", time=t)
            traj.step_times.append(t)
            traj.step_sizes.append(h)
            traj.rejected.append(0)
            if n % cfg.record_every == 0 or n == nsteps:
                traj.append(t, SpectralField(grid, u))
        return traj

    h = cfg.dt if cfg.dt is not None else min(cfg.t_end, default_dt(u0, cfg.N, cfg.lam))
    rejected = 0
    while t < cfg.t_end:
        last = t + h >= cfg.t_end * (1 - 1e-14)
        h_try = cfg.t_end - t if last else h
        big = _lawson_rk4(u, h_try, system)
        half = _lawson_rk4(_lawson_rk4(u, 0.5 * h_try, system), 0.5 * h_try, system)
        if not (np.all(np.isfinite(big)) and np.all(np.isfinite(half))):
            raise BlowUpError(f"blow-up at t={t:.6g}", time=t)
        err = _rel_diff(big, half) / 15.0
        if err <= cfg.tol:
            u = half
            t = cfg.t_end if last else t + h_try
            n_acc += 1
            traj.step_times.append(t)
            traj.step_sizes.append(h_try)
            traj.rejected.append(rejected)
            rejected = 0
            if n_acc % cfg.record_every == 0 or t >= cfg.t_end:
                traj.append(t, SpectralField(grid, u))
        else:
            rejected += 1
        fac = cfg.grow_max if err == 0 else cfg.safety * (cfg.tol / err) ** 0.2
        h = h_try * min(cfg.grow_max, max(cfg.shrink_min, fac))
        if h < cfg.dt_min:
            raise StiffnessError(f"step size {h:.3g} below dt_min at t={t:.6g}", time=t, dt=h)
    log.debug("solve: %d accepted steps", n_acc)
    return traj


def ode_oracle(u0: SpectralField, cfg: SolverConfig, rtol=1e-12, atol=1e-14) -> Trajectory:
    """Reference solution of the Galerkin ODE by adaptive 8th-order Runge-Kutta.

    Integrates ``du/dt = i omega u + N(u)`` directly (no integrating factor)
    with ``scipy.integrate.solve_ivp(method="DOP853")``.  Limited to
    ``N <= 6``.
    """
    if cfg.N > ORACLE_MAX_N:
        raise ConfigurationError(f"ode_oracle is limited to N <= {ORACLE_MAX_N}, got {cfg.N}")
    grid = u0.grid
    if cfg.N > grid.K:
        raise ConfigurationError(f"cutoff N={cfg.N} exceeds grid bandwidth K={grid.K}")
    system = galerkin_system(grid, cfg.N, float(cfg.lam))

    def f(_t, y):
        return system.rhs(y.reshape(grid.shape)).ravel()

    traj = Trajectory(config=cfg)
    traj.append(0.0, u0)
    if cfg.t_end == 0:
        return traj
    n_out = max(1, int(round(cfg.t_end / cfg.dt))) if cfg.dt else 1
    t_eval = np.linspace(0.0, cfg.t_end, n_out + 1)
    sol = solve_ivp(f, (0.0, cfg.t_end), u0.coeffs.ravel(), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        raise BlowUpError(f"oracle integration failed: {sol.message}",
                          time=float(sol.t[-1]) if sol.t.size else 0.0)
    for t, y in zip(sol.t[1:], sol.y.T[1:]):
        traj.append(t, SpectralField(grid, y.reshape(grid.shape)))
    return traj

