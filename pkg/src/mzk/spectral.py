"""Fourier representation of functions on the 2-torus.

Conventions
-----------
A field is stored by its Fourier coefficients ``u_hat(k)`` for all integer
wavenumbers ``k = (k1, k2)`` with ``|k1|, |k2| <= K`` so that

    u(x) = sum_k u_hat(k) exp(i k.x),   x in [0, 2 pi)^2.

Norms use the normalized measure ``(2 pi)^-2 dx``; with that choice
``||u||_{L^2}^2 = sum |u_hat(k)|^2`` and
``||u||_{H^s}^2 = sum <k>^{2s} |u_hat(k)|^2`` with ``<k> = (1 + |k|^2)^{1/2}``.

Storage order is fixed: ``coeffs[i1, i2]`` holds the mode
``k = (i1 - K, i2 - K)``, i.e. row-major with ``k1`` running slowest from
``-K`` to ``K``.  Physical samples ``samples[a1, a2]`` live at
``x = (2 pi a1 / M, 2 pi a2 / M)`` with ``M = 2K + 1`` unless an oversampled
size is requested explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, OracleLimitError

#: Largest bandwidth accepted by :func:`cubic_convolution_oracle`.
ORACLE_MAX_K = 8


@dataclass(frozen=True)
class TorusGrid:
    """Square band of Fourier modes ``[-K, K]^2`` and its physical grid."""

    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 0:
            raise ConfigurationError(f"bandwidth K must be a non-negative integer, got {self.K!r}")
        object.__setattr__(self, "K", int(self.K))

    @property
    def M(self) -> int:
        """Physical points per axis (always odd, ``2K + 1``)."""
        return 2 * self.K + 1

    @property
    def shape(self):
        return (self.M, self.M)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """1-D array ``[-K, ..., K]``."""
        return np.arange(-self.K, self.K + 1)

    @cached_property
    def k1(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[:, None], self.shape)

    @cached_property
    def k2(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[None, :], self.shape)

    @cached_property
    def ksq(self) -> np.ndarray:
        """``|k|^2`` as an integer array."""
        return self.k1 ** 2 + self.k2 ** 2

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    def index_of(self, k):
        """Storage index ``(i1, i2)`` of wavenumber ``k``."""
        k1, k2 = int(k[0]), int(k[1])
        if max(abs(k1), abs(k2)) > self.K:
            raise ConfigurationError(f"mode {(k1, k2)} is outside the band K={self.K}")
        return (k1 + self.K, k2 + self.K)

    def wavenumber_of(self, index):
        """Inverse of :meth:`index_of`."""
        i1, i2 = int(index[0]), int(index[1])
        if not (0 <= i1 < self.M and 0 <= i2 < self.M):
            raise ConfigurationError(f"index {(i1, i2)} outside storage of size {self.M}")
        return (i1 - self.K, i2 - self.K)

    def nodes(self, M=None):
        """Physical sample coordinates ``(x1, x2)`` on an ``M x M`` grid."""
        M = self.M if M is None else int(M)
        x = 2 * np.pi * np.arange(M) / M
        return np.meshgrid(x, x, indexing="ij")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable set of Fourier coefficients on a :class:`TorusGrid`."""

    grid: TorusGrid
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.shape != self.grid.shape:
            raise ConfigurationError(
                f"coefficient array has shape {c.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(c)):
            raise FloatingPointError("non-finite Fourier coefficient")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid, modes):
        """Build a field from a ``{(k1, k2): value}`` mapping."""
        c = np.zeros(grid.shape, dtype=np.complex128)
        for k, v in modes.items():
            c[grid.index_of(k)] += v
        return cls(grid, c)

    def mode(self, k) -> complex:
        return complex(self.coeffs[self.grid.index_of(k)])

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def conj(self):
        """Coefficients of the pointwise complex conjugate ``conj(u(x))``."""
        return SpectralField(self.grid, np.conj(self.coeffs[::-1, ::-1]))

    def embed(self, K):
        """Zero-pad (or truncate) onto the square band of size ``K``."""
        return SpectralField(TorusGrid(K), _embed(self.coeffs, self.grid.K, K))


def _embed(coeffs, K_from, K_to):
    if K_to == K_from:
        return coeffs
    out = np.zeros((2 * K_to + 1,) * 2, dtype=np.complex128)
    Kc = min(K_from, K_to)
    out[K_to - Kc:K_to + Kc + 1, K_to - Kc:K_to + Kc + 1] = \
        coeffs[K_from - Kc:K_from + Kc + 1, K_from - Kc:K_from + Kc + 1]
    return out


@lru_cache(maxsize=64)
def _fft_index(K, M):
    return np.arange(-K, K + 1) % M


def to_physical(coeffs, M):
    """Evaluate a centred coefficient array on an ``M x M`` grid (``M >= 2K+1``).

    Leading axes are treated as a batch.  The transform is pruned: the first
    1-D pass only touches the ``2K+1`` occupied rows.
    """
    K = (coeffs.shape[-1] - 1) // 2
    if M < 2 * K + 1:
        raise ConfigurationError(f"physical grid M={M} cannot hold band K={K}")
    idx = _fft_index(K, M)
    lead = coeffs.shape[:-2]
    rows = np.zeros(lead + (2 * K + 1, M), dtype=np.complex128)
    rows[..., idx] = coeffs
    rows = sfft.ifft(rows, axis=-1, norm="forward", overwrite_x=True, workers=-1)
    full = np.zeros(lead + (M, M), dtype=np.complex128)
    full[..., idx, :] = rows
    return sfft.ifft(full, axis=-2, norm="forward", overwrite_x=True, workers=-1)


def to_spectral(samples, K):
    """Band-``K`` coefficients of physical samples (truncating higher modes)."""
    M = samples.shape[-1]
    if M < 2 * K + 1:
        raise ConfigurationError(f"physical grid M={M} cannot hold band K={K}")
    idx = _fft_index(K, M)
    cols = sfft.fft(samples, axis=-2, norm="forward", workers=-1)[..., idx, :]
    return sfft.fft(cols, axis=-1, norm="forward", overwrite_x=True, workers=-1)[..., idx]


def synthesize(field: SpectralField, M=None) -> np.ndarray:
    """Physical samples ``sum_k u_hat(k) exp(i k.x_a)`` on a uniform grid.

    ``M`` defaults to the grid's own ``2K + 1``; larger values oversample.
    """
    return to_physical(field.coeffs, field.grid.M if M is None else int(M))


def analyze(samples, grid: TorusGrid) -> SpectralField:
    """Inverse of :func:`synthesize` for samples on the grid's native nodes."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ConfigurationError(
            f"sample array has shape {samples.shape}, grid expects {grid.shape}")
    return SpectralField(grid, to_spectral(samples, grid.K))


def bessel_weight(grid, s):
    """``<k>^s = (1 + |k|^2)^(s/2)`` on the grid."""
    return (1.0 + grid.ksq) ** (0.5 * s)


def apply_sobolev_weight(s, field):
    """The Bessel potential ``J^s``."""
    if s == 0:
        return field
    return SpectralField(field.grid, field.coeffs * bessel_weight(field.grid, s))


def hs_norm(s, field) -> float:
    """``||J^s u||_{L^2}`` under the normalized measure."""
    p = np.abs(field.coeffs) ** 2
    if s != 0:
        p = p * (1.0 + field.grid.ksq) ** s
    return float(np.sqrt(p.sum()))


def l2_norm(field) -> float:
    return hs_norm(0, field)


def inner(f, g) -> complex:
    """Spectral inner product ``sum_k f_hat(k) conj(g_hat(k))``."""
    return complex(np.vdot(g.coeffs, f.coeffs))


def low_mask(grid, N):
    return grid.ksq <= N * N


def project_low(N, field):
    """Sharp projection onto the Euclidean ball ``|k| <= N``."""
    if N < 0:
        raise ConfigurationError(f"cutoff N must be non-negative, got {N}")
    return SpectralField(field.grid, np.where(low_mask(field.grid, N), field.coeffs, 0))


def project_high(N, field):
    """Complement of :func:`project_low`."""
    if N < 0:
        raise ConfigurationError(f"cutoff N must be non-negative, got {N}")
    return SpectralField(field.grid, np.where(low_mask(field.grid, N), 0, field.coeffs))


def shell_mask(grid, j):
    if j < 0:
        raise ConfigurationError(f"shell index must be >= 0, got {j}")
    if j == 0:
        return grid.ksq < 1
    lo, hi = 4 ** (j - 1), 4 ** j
    # integer |k|^2 comparisons avoid rounding at the shell edges
    return (grid.ksq >= lo) & (grid.ksq < hi)


def dyadic_shell(j, field):
    """Littlewood-Paley block: modes with ``2^(j-1) <= |k| < 2^j`` (``|k| < 1`` for j=0)."""
    return SpectralField(field.grid, np.where(shell_mask(field.grid, j), field.coeffs, 0))


def derivative(field, axis):
    """Spectral partial derivative along ``x1`` (axis 0) or ``x2`` (axis 1)."""
    k = field.grid.k1 if axis == 0 else field.grid.k2
    return SpectralField(field.grid, 1j * k * field.coeffs)


def oversampled_size(grid, oversample=4):
    return sfft.next_fast_len(oversample * grid.M)


def linf_norm(field, oversample=4) -> float:
    """Maximum of ``|u|`` over an oversampled physical grid."""
    return float(np.abs(synthesize(field, oversampled_size(field.grid, oversample))).max())


def grad_linf_norm(field, oversample=4) -> float:
    """Maximum of ``(|d1 u|^2 + |d2 u|^2)^(1/2)`` over an oversampled grid."""
    M = oversampled_size(field.grid, oversample)
    g = field.grid
    d = to_physical(np.stack([1j * g.k1 * field.coeffs, 1j * g.k2 * field.coeffs]), M)
    return float(np.sqrt(np.abs(d[0]) ** 2 + np.abs(d[1]) ** 2).max())


def product(f, g):
    """Exact pointwise product; the result lives on the band ``Kf + Kg``."""
    K = f.grid.K + g.grid.K
    M = 2 * K + 1
    pf = to_physical(_embed(f.coeffs, f.grid.K, K), M)
    pg = to_physical(_embed(g.coeffs, g.grid.K, K), M)
    return SpectralField(TorusGrid(K), to_spectral(pf * pg, K))


def cubic_convolution_oracle(field, lam):
    """Brute-force spectral form of ``lam |u|^2 d_{x1} u``.

    Output at ``l`` is ``lam * i * sum k3_1 u(k1) conj(u(k2)) u(k3)`` over all
    representable triples with ``l = k1 - k2 + k3``; modes outside the band
    are dropped.  Cost is ``O(K^6)`` so only ``K <= 8`` is accepted.
    """
    grid = field.grid
    K = grid.K
    if K > ORACLE_MAX_K:
        raise OracleLimitError(f"convolution oracle limited to K <= {ORACLE_MAX_K}, got K={K}")
    out = np.zeros(grid.shape, dtype=np.complex128)
    if lam == 0:
        return SpectralField(grid, out)
    u = field.coeffs.ravel()
    k1 = grid.k1.ravel()
    k2 = grid.k2.ravel()
    nz = np.flatnonzero(u)
    if nz.size == 0:
        return SpectralField(grid, out)
    # pairs (b, c): conj(u_b) * k_{c,1} u_c landing at  -k_b + k_c
    b, c = np.meshgrid(nz, nz, indexing="ij")
    b, c = b.ravel(), c.ravel()
    pair_val = np.conj(u[b]) * k1[c] * u[c]
    pair_d1 = k1[c] - k1[b]
    pair_d2 = k2[c] - k2[b]
    flat = out.ravel()
    for a in nz:
        l1 = k1[a] + pair_d1
        l2 = k2[a] + pair_d2
        keep = (np.abs(l1) <= K) & (np.abs(l2) <= K)
        np.add.at(flat, (l1[keep] + K) * grid.M + (l2[keep] + K), u[a] * pair_val[keep])
    return SpectralField(grid, 1j * lam * out)
