"""Trajectory-level checks of the truncated system.

Conservation monitors, the exact derivative identity for the truncated
energy ``||J^s Pi_N u||^2``, the ``L^1_t L^inf_x`` gradient functional, the
a priori doubling bound, and self-convergence of the Galerkin family.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy import integrate

from .dynamics import grid_dispersion
from .errors import ConfigurationError, DataError
from .illposed import exponent_regression
from .inequalities import sample_generator
from .spectral import (
    SpectralField, TorusGrid, bessel_weight, cubic_convolution_oracle, grad_linf_norm,
    hs_norm, low_mask, project_high, project_low,
)
from .timestepping import ORACLE_MAX_N, SolverConfig, Trajectory, default_dt, solve

log = logging.getLogger(__name__)


def smooth_random_field(K, seed, decay=1.0, scale=1.0, index=0):
    """``scale * exp(-decay |k|) * exp(i phase)`` with seeded uniform phases."""
    grid = TorusGrid(K)
    rng = sample_generator(seed, index)
    phase = rng.uniform(0.0, 2 * np.pi, size=grid.shape)
    return SpectralField(grid, scale * np.exp(-decay * grid.kabs) * np.exp(1j * phase))


# --- conservation ---------------------------------------------------------

@dataclass
class ConservationLog:
    """Norm series of one trajectory split at the cutoff ``N``."""

    N: float
    s: float
    times: np.ndarray
    l2: np.ndarray
    hs_low: np.ndarray
    hs_tail: np.ndarray

    @classmethod
    def from_trajectory(cls, traj: Trajectory, N=None, s=None):
        cfg = traj.config
        N = cfg.N if N is None else N
        s = cfg.s if s is None else s
        return cls(
            N=N, s=s,
            times=np.asarray(traj.times),
            l2=np.array([hs_norm(0, f) for f in traj.fields]),
            hs_low=np.array([hs_norm(s, project_low(N, f)) for f in traj.fields]),
            hs_tail=np.array([hs_norm(s, project_high(N, f)) for f in traj.fields]),
        )

    @property
    def relative_drifts(self):
        """``||u(t_i)|| / ||u(0)|| - 1`` per snapshot."""
        if self.l2[0] == 0:
            return np.zeros_like(self.l2)
        return self.l2 / self.l2[0] - 1.0

    @property
    def drift_rate(self):
        """Largest relative L2 drift divided by the elapsed time."""
        T = self.times[-1] - self.times[0]
        if T <= 0:
            return 0.0
        return float(np.abs(self.relative_drifts).max() / T)

    @property
    def tail_variation(self):
        """``max_t | ||J^s Pi_{>N} u(t)|| - ||J^s Pi_{>N} u(0)|| |``."""
        return float(np.abs(self.hs_tail - self.hs_tail[0]).max())

    def to_dict(self):
        return {
            "N": self.N, "s": self.s,
            "t": self.times.tolist(), "l2": self.l2.tolist(),
            "hs_low": self.hs_low.tolist(), "hs_tail": self.hs_tail.tolist(),
            "drift_rate": self.drift_rate, "tail_variation": self.tail_variation,
        }


# --- energy identity ------------------------------------------------------

def _low_band(u, N):
    Kn = int(math.floor(N))
    if Kn > u.grid.K:
        raise ConfigurationError(f"cutoff N={N} exceeds grid bandwidth K={u.grid.K}")
    return project_low(N, u).embed(Kn)


def energy_derivative_sum(u, N, s, lam):
    """Closed spectral sum for ``d/dt ||J^s Pi_N u||^2``.

    ``2 lam Re(i sum_{|l|<=N} <l>^{2s} sum_{l=k1-k2+k3} k3_1 u(k1) conj(u(k2)) u(k3) conj(u(l)))``
    with all four modes inside the ball; the inner sum is evaluated by the
    brute-force convolution oracle.
    """
    if N > ORACLE_MAX_N:
        raise ConfigurationError(f"energy identity is limited to N <= {ORACLE_MAX_N}, got {N}")
    w = _low_band(u, N)
    conv = cubic_convolution_oracle(w, 1.0).coeffs / 1j  # sum k3_1 u u* u, no i or lam
    mask = low_mask(w.grid, N)
    terms = bessel_weight(w.grid, 2 * s) * conv * np.conj(w.coeffs)
    return float(2 * lam * np.real(1j * np.sum(np.where(mask, terms, 0))))


def _oracle_rhs(grid, N, lam):
    omega = grid_dispersion(grid)
    mask = low_mask(grid, N)

    def f(c):
        nl = cubic_convolution_oracle(SpectralField(grid, c), lam).coeffs
        return 1j * omega * c + np.where(mask, nl, 0)
    return f


def _rk4_increment(f, c, h, substeps):
    """``u(h) - u(0)`` by classical RK4, accumulated as an increment."""
    inc = np.zeros_like(c)
    dt = h / substeps
    for _ in range(substeps):
        y = c + inc
        a = f(y)
        b = f(y + 0.5 * dt * a)
        cc = f(y + 0.5 * dt * b)
        d = f(y + dt * cc)
        inc = inc + dt / 6.0 * (a + 2 * (b + cc) + d)
    return inc


def energy_identity_check(u, N, s, lam, delta=1e-5, substeps=1):
    """Compare a centred difference of ``||J^s Pi_N u||^2`` with the spectral sum.

    The truncated flow is stepped by ``+-delta`` with RK4 on the oracle vector
    field.  The energy difference is formed as
    ``sum w Re((du+ - du-) conj(2u + du+ + du-))`` from the increments, which
    avoids cancelling two nearly equal energies.  Returns
    ``(lhs, rhs, |lhs - rhs|)``.
    """
    if N > ORACLE_MAX_N:
        raise ConfigurationError(f"energy identity is limited to N <= {ORACLE_MAX_N}, got {N}")
    if not delta > 0:
        raise ConfigurationError("finite-difference step must be positive")
    w = _low_band(u, N)
    f = _oracle_rhs(w.grid, N, lam)
    c = w.coeffs
    up = _rk4_increment(f, c, delta, substeps)
    um = _rk4_increment(f, c, -delta, substeps)
    weight = bessel_weight(w.grid, 2 * s)
    dE = np.sum(weight * np.real((up - um) * np.conj(2 * c + up + um)))
    lhs = float(dE / (2 * delta))
    rhs = energy_derivative_sum(u, N, s, lam)
    return lhs, rhs, abs(lhs - rhs)


# --- gradient functional and a priori bound -------------------------------

def grad_l1linf_diagnostic(traj: Trajectory, N=None, s=None, C=1.0, oversample=4):
    """``int_0^T ||grad Pi_N u||_inf dt`` and its ratio to the bounding functional.

    The functional is ``C T^(1/2) (S + T S^3)`` with
    ``S = sup_t ||J^s Pi_N u(t)||``.  Returns ``(value, ratio)``; the ratio is
    ``nan`` when the functional vanishes.
    """
    if len(traj) < 2:
        raise DataError("gradient diagnostic needs at least 2 snapshots")
    cfg = traj.config
    N = cfg.N if N is None else N
    s = cfg.s if s is None else s
    times = np.asarray(traj.times)
    low = [project_low(N, f) for f in traj.fields]
    g = np.array([grad_linf_norm(f, oversample) for f in low])
    value = float(integrate.trapezoid(g, times))
    T = times[-1] - times[0]
    S = max(hs_norm(s, f) for f in low)
    bound = C * math.sqrt(T) * (S + T * S ** 3)
    ratio = value / bound if bound > 0 else math.nan
    return value, ratio


def apriori_monitor(traj: Trajectory, s=None, budget=None, N=None):
    """First snapshot time at which ``||J^s Pi_N u||`` exceeds ``budget``.

    The default budget is twice the initial value.  Returns ``None`` if the
    bound holds throughout.
    """
    cfg = traj.config
    N = cfg.N if N is None else N
    s = cfg.s if s is None else s
    series = np.array([hs_norm(s, project_low(N, f)) for f in traj.fields])
    if budget is None:
        budget = 2.0 * series[0]
    bad = np.flatnonzero(series > budget)
    return None if bad.size == 0 else float(traj.times[bad[0]])


# --- Galerkin self-convergence --------------------------------------------

@dataclass
class ConvergenceReport:
    N_list: list
    reference_N: float
    sup_errors: dict = dc_field(default_factory=dict)
    times: list = dc_field(default_factory=list)
    error_series: dict = dc_field(default_factory=dict)
    fitted_exponent: Optional[float] = None
    fit_stderr: Optional[float] = None
    insufficient_data: bool = False

    @property
    def strictly_decreasing(self):
        vals = [self.sup_errors[n] for n in sorted(self.sup_errors)]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def to_dict(self):
        return {
            "experiment": "galerkin_convergence",
            "N_list": list(self.N_list), "reference_N": self.reference_N,
            "sup_errors": {repr(k): v for k, v in sorted(self.sup_errors.items())},
            "t": list(self.times),
            "error_series": {repr(k): v for k, v in sorted(self.error_series.items())},
            "fitted_exponent": self.fitted_exponent, "fit_stderr": self.fit_stderr,
            "strictly_decreasing": self.strictly_decreasing,
            "insufficient_data": self.insufficient_data,
        }


def galerkin_convergence(u0: SpectralField, N_list, s, cfg: SolverConfig):
    """Solve for each cutoff and compare with the largest one in L2.

    Every run uses the same step policy from ``cfg`` (whose ``N`` is ignored);
    fixed steps keep the recording times aligned across runs.
    """
    Ns = sorted(set(N_list))
    if not Ns:
        raise ConfigurationError("N_list is empty")
    if Ns[-1] > u0.grid.K:
        raise ConfigurationError(f"largest cutoff {Ns[-1]} exceeds grid bandwidth {u0.grid.K}")
    rep = ConvergenceReport(N_list=Ns, reference_N=Ns[-1])
    if len(Ns) < 2:
        rep.insufficient_data = True
        return rep
    if cfg.adaptive:
        raise ConfigurationError("convergence study needs fixed steps so recording times align")
    dt = cfg.dt if cfg.dt is not None else default_dt(u0, Ns[-1], cfg.lam)
    trajs = {}
    for n in Ns:
        c = SolverConfig(N=n, t_end=cfg.t_end, lam=cfg.lam, dt=dt,
                         record_every=cfg.record_every, s=s)
        trajs[n] = solve(u0, c)
        log.info("galerkin N=%s: %d steps", n, len(trajs[n].step_sizes))
    ref = trajs[Ns[-1]]
    rep.times = list(ref.times)
    for n in Ns[:-1]:
        errs = [hs_norm(0, a - b) for a, b in zip(trajs[n].fields, ref.fields)]
        rep.error_series[n] = errs
        rep.sup_errors[n] = float(max(errs))
    pts = [(n, e) for n, e in rep.sup_errors.items() if e > 0]
    if len(pts) >= 3:
        rep.fitted_exponent, rep.fit_stderr = exponent_regression(pts)
    else:
        rep.insufficient_data = True
    return rep

