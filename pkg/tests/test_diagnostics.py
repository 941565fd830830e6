import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mzk.diagnostics import (
    ConservationLog, apriori_monitor, energy_derivative_sum, energy_identity_check,
    galerkin_convergence, grad_l1linf_diagnostic, smooth_random_field,
)
from mzk.errors import ConfigurationError, DataError
from mzk.inequalities import RandomFieldSpec, random_band_limited
from mzk.spectral import SpectralField, TorusGrid, hs_norm
from mzk.timestepping import SolverConfig, Trajectory, solve


def normalized(seed, K=3, norm=0.5, index=0):
    f = random_band_limited(RandomFieldSpec(seed, K, 0.0, index + 1))[index]
    return f * (norm / hs_norm(0, f))


def test_smooth_random_field_spectrum():
    f = smooth_random_field(6, 3, decay=1.0, scale=2.0)
    np.testing.assert_allclose(np.abs(f.coeffs), 2.0 * np.exp(-f.grid.kabs), rtol=1e-14)
    np.testing.assert_array_equal(f.coeffs, smooth_random_field(6, 3, 1.0, 2.0).coeffs)


# --- energy identity ------------------------------------------------------

def test_energy_identity_linear_flow_is_zero():
    lhs, rhs, d = energy_identity_check(normalized(1), 3, 2.0, 0.0)
    assert rhs == 0.0
    assert abs(lhs) <= 1e-12


def test_energy_identity_single_mode_rhs_vanishes():
    u = SpectralField.from_modes(TorusGrid(3), {(2, 1): 0.3 + 0.1j})
    assert abs(energy_derivative_sum(u, 3, 2.0, 6.0)) <= 1e-15


@pytest.mark.parametrize("index", [0, 1, 2])
def test_energy_identity_random_data(index):
    u = normalized(42, index=index)
    lhs, rhs, d = energy_identity_check(u, 3, 2.0, 6.0, delta=1e-5)
    _, _, d2 = energy_identity_check(u, 3, 2.0, 6.0, delta=5e-6)
    assert d <= 1e-7
    assert abs(rhs) > 1e3 * d
    assert math.log2(d / d2) == pytest.approx(2.0, abs=0.2)


def test_energy_identity_frozen_value():
    v = SpectralField.from_modes(TorusGrid(2), {(1, 0): 0.1, (0, 1): 0.2j, (1, -1): 0.05 + 0.02j,
                                                (2, 0): 0.03, (-1, 1): 0.04})
    rhs = energy_derivative_sum(v, 2, 1.0, 6.0)
    assert rhs == pytest.approx(-0.001152, rel=1e-12)
    lhs, _, d = energy_identity_check(v, 2, 1.0, 6.0, delta=1e-5)
    assert d <= 1e-11


def test_energy_identity_guards():
    u = normalized(1, K=8)
    with pytest.raises(ConfigurationError):
        energy_identity_check(u, 7, 2.0, 6.0)
    with pytest.raises(ConfigurationError):
        energy_identity_check(normalized(1), 3, 2.0, 6.0, delta=0.0)
    with pytest.raises(ConfigurationError):
        energy_derivative_sum(normalized(1, K=2), 3, 2.0, 6.0)


# --- conservation log -----------------------------------------------------

def test_conservation_log():
    u0 = smooth_random_field(8, 1, scale=0.3)
    tr = solve(u0, SolverConfig(N=5, t_end=0.2, lam=6.0, tol=1e-11))
    log = ConservationLog.from_trajectory(tr)
    assert log.drift_rate <= 1e-9
    assert log.tail_variation <= 1e-14
    assert log.relative_drifts[0] == 0.0
    d = log.to_dict()
    assert len(d["t"]) == len(tr) and d["N"] == 5


# --- gradient functional --------------------------------------------------

def test_grad_functional_linear_single_mode():
    a, k = 0.7, (3, 4)
    u0 = SpectralField.from_modes(TorusGrid(6), {k: a})
    tr = solve(u0, SolverConfig(N=6, t_end=0.5, lam=0.0, dt=0.05))
    value, ratio = grad_l1linf_diagnostic(tr)
    assert value == pytest.approx(0.5 * 5 * a, rel=1e-12)
    S = a * 26.0
    assert ratio == pytest.approx(value / (math.sqrt(0.5) * (S + 0.5 * S ** 3)), rel=1e-12)


def test_grad_functional_zero_and_guards():
    z = SpectralField.zeros(TorusGrid(3))
    tr = solve(z, SolverConfig(N=3, t_end=0.1, lam=6.0, dt=0.05))
    value, ratio = grad_l1linf_diagnostic(tr)
    assert value == 0.0 and math.isnan(ratio)
    short = Trajectory(config=tr.config)
    short.append(0.0, z)
    with pytest.raises(DataError):
        grad_l1linf_diagnostic(short)


# --- a priori monitor -----------------------------------------------------

def test_apriori_monitor():
    u0 = smooth_random_field(6, 2, scale=0.05)
    lin = solve(u0, SolverConfig(N=6, t_end=1.0, lam=0.0, dt=0.1))
    assert apriori_monitor(lin) is None
    small = solve(u0 * (0.1 / hs_norm(2, u0)), SolverConfig(N=6, t_end=1.0, lam=6.0, dt=0.01, s=2.0))
    assert apriori_monitor(small) is None
    assert apriori_monitor(lin, budget=0.5 * hs_norm(2, u0)) == 0.0
    zero = solve(SpectralField.zeros(TorusGrid(2)), SolverConfig(N=2, t_end=0.1, dt=0.05))
    assert apriori_monitor(zero) is None


# --- Galerkin convergence --------------------------------------------------

def test_convergence_single_cutoff_is_flagged():
    u0 = smooth_random_field(6, 1, scale=0.2)
    rep = galerkin_convergence(u0, [4], 2.0, SolverConfig(N=0, t_end=0.1, lam=6.0, dt=0.01))
    assert rep.insufficient_data and rep.sup_errors == {}


def test_convergence_closure_case():
    # a single mode is an invariant subspace: every cutoff gives the same solution
    u0 = SpectralField.from_modes(TorusGrid(8), {(1, 1): 0.8})
    rep = galerkin_convergence(u0, [2, 4, 8], 2.0, SolverConfig(N=0, t_end=0.5, lam=6.0, dt=0.01))
    assert max(rep.sup_errors.values()) <= 1e-9
    assert rep.insufficient_data  # zero differences cannot be fitted


def test_convergence_decays():
    u0 = smooth_random_field(10, 3, scale=0.3)
    rep = galerkin_convergence(u0, [2, 3, 4, 6, 10], 2.0,
                               SolverConfig(N=0, t_end=0.2, lam=6.0, dt=2e-3, record_every=10))
    assert rep.strictly_decreasing
    assert rep.fitted_exponent < -2
    d = rep.to_dict()
    assert d["reference_N"] == 10 and len(d["t"]) == len(rep.error_series[2])


def test_convergence_guards():
    u0 = smooth_random_field(4, 1)
    with pytest.raises(ConfigurationError):
        galerkin_convergence(u0, [2, 6], 2.0, SolverConfig(N=0, t_end=0.1, dt=0.01))
    with pytest.raises(ConfigurationError):
        galerkin_convergence(u0, [2, 4], 2.0, SolverConfig(N=0, t_end=0.1, tol=1e-8))
    with pytest.raises(ConfigurationError):
        galerkin_convergence(u0, [], 2.0, SolverConfig(N=0, t_end=0.1, dt=0.01))
