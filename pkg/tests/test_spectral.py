import numpy as np
import pytest
from hypothesis import given, strategies as st

from mzk.errors import ConfigurationError, OracleLimitError
from mzk.spectral import (
    ORACLE_MAX_K, SpectralField, TorusGrid, analyze, apply_sobolev_weight, bessel_weight,
    cubic_convolution_oracle, derivative, dyadic_shell, grad_linf_norm, hs_norm, inner,
    l2_norm, linf_norm, low_mask, oversampled_size, product, project_high, project_low,
    shell_mask, synthesize, to_physical,
)

from conftest import random_field


def direct_synthesis(field, M):
    x1, x2 = field.grid.nodes(M)
    out = np.zeros((M, M), dtype=complex)
    for i1, k1 in enumerate(field.grid.wavenumbers):
        for i2, k2 in enumerate(field.grid.wavenumbers):
            out += field.coeffs[i1, i2] * np.exp(1j * (k1 * x1 + k2 * x2))
    return out


def test_grid_layout():
    g = TorusGrid(2)
    assert g.M == 5 and g.shape == (5, 5)
    assert g.index_of((0, 0)) == (2, 2)
    assert g.index_of((-2, 1)) == (0, 3)
    assert g.wavenumber_of((4, 0)) == (2, -2)
    assert g.k1[0, 4] == -2 and g.k2[0, 4] == 2
    with pytest.raises(ConfigurationError):
        g.index_of((3, 0))
    with pytest.raises(ConfigurationError):
        TorusGrid(-1)
    with pytest.raises(ConfigurationError):
        TorusGrid(1.5)


def test_field_is_immutable_copy():
    g = TorusGrid(1)
    raw = np.zeros(g.shape, complex)
    f = SpectralField(g, raw)
    raw[0, 0] = 1
    assert f.coeffs[0, 0] == 0
    with pytest.raises(ValueError):
        f.coeffs[0, 0] = 1
    with pytest.raises(ConfigurationError):
        SpectralField(g, np.zeros((2, 2)))
    with pytest.raises(FloatingPointError):
        SpectralField(g, np.full(g.shape, np.nan))


def test_synthesis_matches_direct_sum(rng):
    f = random_field(TorusGrid(3), rng)
    for M in (7, 12, 16):
        np.testing.assert_allclose(synthesize(f, M), direct_synthesis(f, M), atol=1e-12)


def test_single_mode_values():
    g = TorusGrid(3)
    f = SpectralField.from_modes(g, {(1, 2): 3.0})
    x1, x2 = g.nodes()
    np.testing.assert_allclose(synthesize(f), 3 * np.exp(1j * (x1 + 2 * x2)), atol=1e-13)
    # <(1,2)>^2 = 6
    assert hs_norm(2, f) == pytest.approx(18.0, rel=1e-15)
    assert hs_norm(0, f) == l2_norm(f) == pytest.approx(3.0)
    assert linf_norm(f) == pytest.approx(3.0, rel=1e-14)
    assert grad_linf_norm(f) == pytest.approx(3 * np.sqrt(5), rel=1e-13)


def test_derivative_and_weights():
    g = TorusGrid(2)
    f = SpectralField.from_modes(g, {(2, -1): 1.0, (0, 1): 2j})
    assert derivative(f, 0).mode((2, -1)) == 2j
    assert derivative(f, 1).mode((0, 1)) == -2
    assert bessel_weight(g, 2)[g.index_of((2, -1))] == 6.0
    assert apply_sobolev_weight(0, f) is f


def test_conj_reverses_modes(rng):
    f = random_field(TorusGrid(3), rng)
    np.testing.assert_allclose(synthesize(f.conj()), np.conj(synthesize(f)), atol=1e-13)


@given(st.integers(0, 6), st.integers(0, 2 ** 32 - 1))
def test_round_trip_and_parseval(K, seed):
    rng = np.random.default_rng(seed)
    g = TorusGrid(K)
    f = random_field(g, rng)
    u = synthesize(f)
    back = analyze(u, g)
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-13 * (1 + np.abs(f.coeffs).max()))
    assert np.mean(np.abs(u) ** 2) == pytest.approx(l2_norm(f) ** 2, rel=1e-12)


@given(st.integers(1, 6), st.floats(0, 8), st.integers(0, 2 ** 32 - 1))
def test_projections_partition(K, N, seed):
    f = random_field(TorusGrid(K), np.random.default_rng(seed))
    lo, hi = project_low(N, f), project_high(N, f)
    np.testing.assert_array_equal((lo + hi).coeffs, f.coeffs)
    assert abs(inner(lo, hi)) == 0
    np.testing.assert_array_equal(project_low(N, lo).coeffs, lo.coeffs)


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 32 - 1))
def test_bessel_potential_composes(s, t, seed):
    f = random_field(TorusGrid(4), np.random.default_rng(seed))
    a = apply_sobolev_weight(s, apply_sobolev_weight(t, f))
    b = apply_sobolev_weight(s + t, f)
    np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-12)


def test_mask_counts():
    g = TorusGrid(4)
    assert low_mask(g, 1).sum() == 5
    assert low_mask(g, np.sqrt(2)).sum() == 9
    assert shell_mask(g, 0).sum() == 1
    assert shell_mask(g, 1).sum() == 8
    assert shell_mask(g, 2).sum() == 36
    total = sum(shell_mask(g, j).sum() for j in range(0, 4))
    assert total == g.M ** 2
    with pytest.raises(ConfigurationError):
        shell_mask(g, -1)
    f = SpectralField.from_modes(g, {(2, 0): 1, (1, 1): 1, (3, 3): 1})
    assert dyadic_shell(2, f).mode((2, 0)) == 1 and dyadic_shell(2, f).mode((1, 1)) == 0


def test_product_exact():
    g = TorusGrid(1)
    a = SpectralField.from_modes(g, {(1, 0): 1.0})
    b = SpectralField.from_modes(g, {(1, 1): 2.0, (-1, 0): 1.0})
    p = product(a, b)
    assert p.grid.K == 2
    assert p.mode((2, 1)) == pytest.approx(2.0)
    assert p.mode((0, 0)) == pytest.approx(1.0)
    assert l2_norm(p) == pytest.approx(np.sqrt(5))


def test_cubic_oracle_two_mode_closed_form():
    # u = e^{i x1} + 1: |u|^2 = 2 + e^{i x1} + e^{-i x1}, d1 u = i e^{i x1}
    g = TorusGrid(3)
    u = SpectralField.from_modes(g, {(1, 0): 1.0, (0, 0): 1.0})
    out = cubic_convolution_oracle(u, 6.0)
    expected = SpectralField.from_modes(g, {(1, 0): 12j, (2, 0): 6j, (0, 0): 6j})
    np.testing.assert_allclose(out.coeffs, expected.coeffs, atol=1e-14)


def test_cubic_oracle_single_mode():
    g = TorusGrid(2)
    u = SpectralField.from_modes(g, {(2, 1): 0.5})
    out = cubic_convolution_oracle(u, 6.0)
    assert out.mode((2, 1)) == pytest.approx(1.5j)
    assert np.count_nonzero(out.coeffs) == 1


def test_cubic_oracle_limits():
    assert np.all(cubic_convolution_oracle(SpectralField.zeros(TorusGrid(2)), 1.0).coeffs == 0)
    with pytest.raises(OracleLimitError):
        cubic_convolution_oracle(SpectralField.zeros(TorusGrid(ORACLE_MAX_K + 1)), 1.0)


def test_physical_size_guard():
    with pytest.raises(ConfigurationError):
        to_physical(np.zeros((5, 5), complex), 4)
    with pytest.raises(ConfigurationError):
        analyze(np.zeros((4, 4)), TorusGrid(2))
    assert oversampled_size(TorusGrid(2)) >= 20
