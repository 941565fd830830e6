"""Randomized stress tests of the harmonic-analysis estimates on the torus.

Covered: the Strichartz estimate for a single dyadic shell, the product
estimate ``||J^s(fg)|| <= C ||J^s f|| ||J^s g||``, the Kato-Ponce commutator
estimate, the transference identity between ``J^s`` on the plane and on the
torus, and the periodization bound.

Random fields use NumPy's ``PCG64`` generator.  Sample ``i`` of an ensemble
with seed ``seed`` is drawn from ``Generator(PCG64(SeedSequence([seed, i])))``,
so a larger ensemble with the same seed extends a smaller one.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy import integrate, special

from .dynamics import grid_dispersion
from .errors import AccuracyError, ConfigurationError, DataError
from .spectral import (
    SpectralField, TorusGrid, apply_sobolev_weight, bessel_weight, dyadic_shell,
    grad_linf_norm, hs_norm, linf_norm, oversampled_size, product, shell_mask,
    to_physical,
)


class DegenerateSample(DataError):
    """Right-hand side of an estimate vanished; the sample carries no information."""


@dataclass(frozen=True)
class RandomFieldSpec:
    """Coefficients ``<k>^-beta * U[1/2, 1] * exp(i U[0, 2 pi))`` on ``[-K, K]^2``."""

    seed: int
    K: int
    beta: float = 0.0
    count: int = 1

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigurationError("decay exponent beta must be >= 0")
        if self.count < 0:
            raise ConfigurationError("ensemble size must be >= 0")


def sample_generator(seed, i):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(i)])))


def random_band_limited(spec: RandomFieldSpec):
    """Deterministic ensemble of ``spec.count`` random fields."""
    grid = TorusGrid(spec.K)
    decay = bessel_weight(grid, -spec.beta)
    out = []
    for i in range(spec.count):
        rng = sample_generator(spec.seed, i)
        amp = rng.uniform(0.5, 1.0, size=grid.shape)
        phase = rng.uniform(0.0, 2 * np.pi, size=grid.shape)
        out.append(SpectralField(grid, decay * amp * np.exp(1j * phase)))
    return out


@dataclass
class RatioReport:
    """Per-sample ``lhs``, ``rhs`` and ``lhs / rhs`` plus ensemble statistics."""

    name: str
    params: dict
    lhs: list = dc_field(default_factory=list)
    rhs: list = dc_field(default_factory=list)
    ratio: list = dc_field(default_factory=list)
    n_degenerate: int = 0

    def add(self, lhs, rhs):
        if not rhs > 0:
            self.n_degenerate += 1
            return
        self.lhs.append(float(lhs))
        self.rhs.append(float(rhs))
        self.ratio.append(float(lhs) / float(rhs))

    @property
    def max(self):
        return max(self.ratio) if self.ratio else math.nan

    @property
    def mean(self):
        return math.fsum(self.ratio) / len(self.ratio) if self.ratio else math.nan

    @property
    def std(self):
        if not self.ratio:
            return math.nan
        mu = self.mean
        return math.sqrt(math.fsum((r - mu) ** 2 for r in self.ratio) / len(self.ratio))

    def summary(self):
        return {"name": self.name, "params": self.params, "n": len(self.ratio),
                "n_degenerate": self.n_degenerate, "max": self.max,
                "mean": self.mean, "std": self.std}

    def to_dict(self):
        d = asdict(self)
        d.update(self.summary())
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "lhs", "rhs", "ratio"])
            for i, row in enumerate(zip(self.lhs, self.rhs, self.ratio)):
                w.writerow([i, *map(repr, row)])


# --- bilinear estimates ---------------------------------------------------

def kato_ponce_terms(f, g, s, oversample=4):
    """``(lhs, rhs)`` of the Kato-Ponce commutator estimate with unit constant.

    lhs = ||J^s(fg) - f J^s g||,
    rhs = ||J^s f|| ||g||_inf + (||f||_inf + ||grad f||_inf) ||J^(s-1) g||.

    The mean of ``f`` commutes with ``J^s`` and is removed before the
    products are formed, so a constant ``f`` gives exactly zero.
    """
    if s < 1:
        raise ConfigurationError(f"Kato-Ponce harness requires s >= 1, got {s}")
    fm = f.coeffs.copy()
    fm[f.grid.K, f.grid.K] = 0
    f0 = SpectralField(f.grid, fm)
    comm = apply_sobolev_weight(s, product(f0, g)) - product(f0, apply_sobolev_weight(s, g))
    lhs = hs_norm(0, comm)
    rhs = (hs_norm(s, f) * linf_norm(g, oversample)
           + (linf_norm(f, oversample) + grad_linf_norm(f, oversample)) * hs_norm(s - 1, g))
    return lhs, rhs


def kato_ponce_ratio(f, g, s, oversample=4):
    lhs, rhs = kato_ponce_terms(f, g, s, oversample)
    if not rhs > 0:
        raise DegenerateSample("Kato-Ponce right-hand side vanishes")
    return lhs / rhs


def product_terms(f, g, s):
    """``(||J^s(fg)||, ||J^s f|| ||J^s g||)``."""
    return hs_norm(s, product(f, g)), hs_norm(s, f) * hs_norm(s, g)


def product_ratio(f, g, s):
    if not s > 1:
        raise ConfigurationError(f"product estimate requires s > 1, got {s}")
    lhs, rhs = product_terms(f, g, s)
    if not rhs > 0:
        raise DegenerateSample("product estimate right-hand side vanishes")
    return lhs / rhs


def _pairs(spec):
    fields = random_band_limited(RandomFieldSpec(spec.seed, spec.K, spec.beta, 2 * spec.count))
    return zip(fields[0::2], fields[1::2])


def kato_ponce_ensemble(spec: RandomFieldSpec, s=2.0, oversample=4):
    rep = RatioReport("kato_ponce", {**asdict(spec), "s": s, "oversample": oversample})
    for f, g in _pairs(spec):
        rep.add(*kato_ponce_terms(f, g, s, oversample))
    return rep


def product_ensemble(spec: RandomFieldSpec, s=2.0, conjugate=False):
    """Ensemble of product ratios; ``conjugate=True`` uses ``g = conj(f)``."""
    if not s > 1:
        raise ConfigurationError(f"product estimate requires s > 1, got {s}")
    rep = RatioReport("product", {**asdict(spec), "s": s, "conjugate": conjugate})
    if conjugate:
        for f in random_band_limited(spec):
            rep.add(*product_terms(f, f.conj(), s))
    else:
        for f, g in _pairs(spec):
            rep.add(*product_terms(f, g, s))
    return rep


# --- Strichartz -------------------------------------------------------------

def strichartz_terms(u0, j, n_t=65, oversample=4, chunk=8):
    """``(lhs, rhs)`` for one datum and shell ``j`` on ``I = [0, 2^(-2j)]``.

    lhs = (int_I ||W(t) Q^j u0||_inf^2 dt)^(1/2) by composite Simpson,
    rhs = 2^(-j/3) ||Q^j u0||.
    """
    if n_t < 65 or n_t % 2 == 0:
        raise ConfigurationError("Strichartz quadrature needs an odd number (>= 65) of time nodes")
    grid = u0.grid
    if not shell_mask(grid, j).any():
        raise ConfigurationError(f"shell j={j} is empty on a grid of bandwidth K={grid.K}")
    w = dyadic_shell(j, u0)
    Ks = min(grid.K, 2 ** j - 1) if j > 0 else 0
    sub = TorusGrid(Ks)
    w = w.embed(Ks)
    rhs = 2.0 ** (-j / 3) * hs_norm(0, w)
    if rhs == 0:
        return 0.0, 0.0
    omega = grid_dispersion(sub)
    M = oversampled_size(sub, oversample)
    times = np.linspace(0.0, 2.0 ** (-2 * j), n_t)
    sup2 = np.empty(n_t)
    for a in range(0, n_t, chunk):
        ts = times[a:a + chunk]
        stack = w.coeffs[None] * np.exp(1j * ts[:, None, None] * omega[None])
        phys = to_physical(stack, M)
        sup2[a:a + chunk] = (np.abs(phys) ** 2).reshape(len(ts), -1).max(axis=1)
    lhs = math.sqrt(integrate.simpson(sup2, x=times))
    return lhs, rhs


def strichartz_ratio(j, spec: RandomFieldSpec, n_t=65, oversample=4):
    """Ensemble report of the shell-``j`` Strichartz ratio."""
    rep = RatioReport("strichartz", {**asdict(spec), "j": j, "n_t": n_t,
                                     "oversample": oversample, "interval": 2.0 ** (-2 * j)})
    for u0 in random_band_limited(spec):
        rep.add(*strichartz_terms(u0, j, n_t, oversample))
    return rep


# --- transference ---------------------------------------------------------

@dataclass(frozen=True)
class QuadSpec:
    """Quadrature budget for the radial inverse Fourier transform on the plane.

    ``rho_max=None`` picks the truncation from ``tail_tol``; ``nodes_per_radian``
    scales the Gauss-Legendre node count with the oscillation ``rho_max * r``.
    """

    tail_tol: float = 1e-12
    rho_max: Optional[float] = None
    nodes_per_radian: float = 0.6
    min_nodes: int = 64
    max_nodes: int = 8192


def gaussian_coefficients(alpha, k_sq):
    """Torus Fourier coefficients of the periodized ``exp(-alpha |x|^2)``.

    ``(2 pi)^-2 int exp(-alpha |x|^2 - i k.x) dx = exp(-|k|^2 / (4 alpha)) / (4 pi alpha)``.
    """
    return np.exp(-k_sq / (4 * alpha)) / (4 * np.pi * alpha)


def _radial_integrand_abs(rho, s, alpha):
    return (1 + rho * rho) ** (s / 2) * (np.pi / alpha) * np.exp(-rho * rho / (4 * alpha)) * rho / (2 * np.pi)


def _rho_tail(rho_max, s, alpha):
    val, _ = integrate.quad(_radial_integrand_abs, rho_max, np.inf, args=(s, alpha))
    return val


def _choose_rho_max(s, alpha, tol):
    rho = 2 * math.sqrt(alpha)
    while _rho_tail(rho, s, alpha) > tol:
        rho *= 1.1
        if rho > 1e4:
            raise AccuracyError("could not bound the Fourier tail", achieved=_rho_tail(rho, s, alpha))
    return rho


def bessel_potential_gaussian_radial(r, s, alpha, quad: QuadSpec = QuadSpec()):
    """``(J^s exp(-alpha |.|^2))(x)`` on the plane at radii ``r = |x|``.

    Hankel-transform quadrature of
    ``(2 pi)^-1 int_0^rho_max <rho>^s (pi/alpha) exp(-rho^2/(4 alpha)) J_0(rho r) rho d rho``
    with Gauss-Legendre nodes sized to the oscillation of ``J_0``.
    """
    r = np.asarray(r, dtype=float)
    if quad.rho_max is None:
        rho_max = _choose_rho_max(s, alpha, quad.tail_tol)
    else:
        rho_max = quad.rho_max
        tail = _rho_tail(rho_max, s, alpha)
        if tail > quad.tail_tol:
            raise AccuracyError(f"rho_max={rho_max} leaves a Fourier tail of {tail:.3g}", achieved=tail)
    flat = r.ravel()
    order = np.argsort(flat)
    out = np.empty_like(flat)
    chunk = 4096
    for a in range(0, flat.size, chunk):
        idx = order[a:a + chunk]
        rc = flat[idx]
        n = int(math.ceil(quad.nodes_per_radian * rho_max * rc.max())) + quad.min_nodes
        if n > quad.max_nodes:
            raise AccuracyError(f"quadrature needs {n} nodes, budget is {quad.max_nodes}",
                                achieved=math.inf)
        x, wts = special.roots_legendre(n)
        rho = 0.5 * rho_max * (x + 1)
        wts = 0.5 * rho_max * wts * _radial_integrand_abs(rho, s, alpha)
        out[idx] = special.j0(np.outer(rc, rho)) @ wts
    return out.reshape(r.shape)


@dataclass
class TransferenceResult:
    s: float
    alpha: float
    lattice_radius: int
    max_discrepancy: float
    torus_side: np.ndarray = dc_field(repr=False)
    line_side: np.ndarray = dc_field(repr=False)
    n_shifts: int = 0


def _lattice(R):
    n = np.arange(-R, R + 1)
    n1, n2 = np.meshgrid(n, n, indexing="ij")
    keep = n1 ** 2 + n2 ** 2 <= R * R
    return n1[keep], n2[keep]


def _sample_nodes(n_samples):
    z = 2 * np.pi * np.arange(n_samples) / n_samples
    return np.meshgrid(z, z, indexing="ij")


def torus_side(s, alpha, n_samples=64, tail_tol=1e-16):
    """``J^s_T (p_Sigma phi)`` from the analytic Fourier coefficients, summed directly."""
    kmax = int(math.ceil(math.sqrt(4 * alpha * math.log(1 / tail_tol)))) + 2
    k = np.arange(-kmax, kmax + 1)
    ksq = k[:, None] ** 2 + k[None, :] ** 2
    coef = (1 + ksq) ** (s / 2) * gaussian_coefficients(alpha, ksq)
    z = 2 * np.pi * np.arange(n_samples) / n_samples
    E = np.exp(1j * np.outer(z, k))
    vals = E @ coef @ E.T
    return vals.real


def line_side(s, alpha, lattice_radius, n_samples=64, quad: QuadSpec = QuadSpec()):
    """``p_Sigma (J^s_R phi)`` by quadrature on the plane and lattice summation."""
    z1, z2 = _sample_nodes(n_samples)
    n1, n2 = _lattice(lattice_radius)
    r = np.hypot(z1[..., None] + 2 * np.pi * n1, z2[..., None] + 2 * np.pi * n2)
    vals = bessel_potential_gaussian_radial(r, s, alpha, quad)
    return vals.sum(axis=-1), n1.size


def _omitted_tail_bound(alpha, s, R):
    # points of the cell sit within 2 pi sqrt(2) of the origin
    r_min = max(2 * np.pi * (R - math.sqrt(2)), 0.0)
    return math.exp(-alpha * r_min ** 2) * (1 + r_min ** 2) ** (s / 2 + 1)


def transference_check(s, alpha=1.0, lattice_radius=6, quad: QuadSpec = QuadSpec(), n_samples=64):
    """Compare both sides of ``p_Sigma(J^s_R phi) = J^s_T(p_Sigma phi)`` for a Gaussian."""
    if not alpha > 0:
        raise ConfigurationError("Gaussian width alpha must be positive")
    tail = _omitted_tail_bound(alpha, s, lattice_radius)
    if tail > quad.tail_tol:
        raise AccuracyError(f"lattice radius {lattice_radius} leaves a tail of about {tail:.3g}",
                            achieved=tail)
    T = torus_side(s, alpha, n_samples)
    L, n_shifts = line_side(s, alpha, lattice_radius, n_samples, quad)
    return TransferenceResult(s, alpha, lattice_radius, float(np.abs(T - L).max()), T, L, n_shifts)


def periodization_l2_check(alpha=1.0, lattice_radius=6, n_samples=64, quad: QuadSpec = QuadSpec()):
    """``(||p_Sigma phi||_{L^2(T^2)}, ||phi||_{L^2(R^2)})`` with matching normalized measures.

    The torus norm is the grid mean of the lattice-summed samples, the plane
    norm is the closed form ``(8 pi alpha)^(-1/2)`` for measure ``(2 pi)^-2 dx``.
    """
    P, _ = line_side(0.0, alpha, lattice_radius, n_samples, quad)
    torus = math.sqrt(float(np.mean(np.abs(P) ** 2)))
    plane = 1 / math.sqrt(8 * np.pi * alpha)
    return torus, plane
