"""The mZK vector field on the torus.

    d_t u + d_{x1} Laplacian u = lam |u|^2 d_{x1} u

In Fourier variables the linear part is the diagonal rotation
``d_t u_hat(k) = i omega(k) u_hat(k)`` with ``omega(k) = k1^3 + k1 k2^2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, ResourceError
from .spectral import SpectralField, to_physical, to_spectral

#: Upper bound on the bytes held by padded-grid scratch buffers.
PAD_MEMORY_LIMIT = 2 ** 31


@dataclass(frozen=True)
class EquationParams:
    """Nonlinearity coefficient; 6 reproduces the equation as usually written."""

    lam: float = 6.0

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ConfigurationError(f"lambda must be finite, got {self.lam}")


def dispersion(k):
    """``omega(k) = k1^3 + k1 k2^2``; accepts scalars or arrays."""
    k1, k2 = k
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    w = k1 * (k1 * k1 + k2 * k2)
    return float(w) if w.ndim == 0 else w


def grid_dispersion(grid):
    return dispersion((grid.k1, grid.k2))


def propagate_linear(t, field):
    """Exact linear flow ``W(t)``: multiply each mode by ``exp(i omega(k) t)``."""
    if t == 0:
        return field
    return SpectralField(field.grid, field.coeffs * np.exp(1j * t * grid_dispersion(field.grid)))


def pad_size(K):
    """Padded grid size for alias-free cubic products of band-``K`` data."""
    return sfft.next_fast_len(4 * K + 1)


class GalerkinSystem:
    """Array-level vector field of the frequency-truncated system.

    Modes with ``|k| <= N`` feel ``lam Pi_N(|Pi_N u|^2 d_{x1} Pi_N u)``; all
    other modes evolve linearly.  ``N=None`` gives the untruncated square-band
    nonlinearity used by :func:`nonlinearity`.
    """

    def __init__(self, grid, N, lam):
        self.grid = grid
        self.K = grid.K
        self.lam = float(lam)
        if N is not None:
            if N < 0 or N > grid.K:
                raise ConfigurationError(f"Galerkin cutoff N={N} must lie in [0, K={grid.K}]")
            self.N = N
            # square band that covers the ball |k| <= N
            self.Kn = int(np.floor(N))
        else:
            self.N = None
            self.Kn = grid.K
        self.Mp = pad_size(self.Kn)
        if 6 * 16 * self.Mp ** 2 > PAD_MEMORY_LIMIT:
            raise ResourceError(f"padded grid {self.Mp}^2 exceeds the scratch memory guard")
        self.omega = grid_dispersion(grid)
        kn = np.arange(-self.Kn, self.Kn + 1)
        self._ik1 = 1j * np.broadcast_to(kn[:, None], (kn.size, kn.size))
        if self.N is None:
            self._ball = None
        else:
            self._ball = (kn[:, None] ** 2 + kn[None, :] ** 2) <= self.N * self.N
        self._sl = slice(self.K - self.Kn, self.K + self.Kn + 1)

    def nonlinear(self, coeffs):
        """Projected nonlinear term as a full-band coefficient array."""
        out = np.zeros_like(coeffs)
        if self.lam == 0:
            return out
        w = coeffs[self._sl, self._sl]
        if self._ball is not None:
            w = np.where(self._ball, w, 0)
        phys = to_physical(np.stack([w, self._ik1 * w]), self.Mp)
        u, ux = phys[0], phys[1]
        prod = self.lam * (u.real ** 2 + u.imag ** 2) * ux
        nl = to_spectral(prod, self.Kn)
        if self._ball is not None:
            nl = np.where(self._ball, nl, 0)
        out[self._sl, self._sl] = nl
        return out

    def rhs(self, coeffs):
        return 1j * self.omega * coeffs + self.nonlinear(coeffs)


@lru_cache(maxsize=32)
def galerkin_system(grid, N, lam):
    return GalerkinSystem(grid, N, lam)


def nonlinearity(field, params: EquationParams):
    """``lam |u|^2 d_{x1} u`` truncated to the input band, computed alias-free."""
    sys = galerkin_system(field.grid, None, float(params.lam))
    return SpectralField(field.grid, sys.nonlinear(field.coeffs))


def galerkin_rhs(N, field, params: EquationParams):
    """Right-hand side ``i omega u + lam Pi_N(|Pi_N u|^2 d_{x1} Pi_N u)``."""
    sys = galerkin_system(field.grid, N, float(params.lam))
    return SpectralField(field.grid, sys.rhs(field.coeffs))


def full_rhs(field, params: EquationParams):
    """Galerkin right-hand side with the cutoff at the grid bandwidth."""
    return galerkin_rhs(field.grid.K, field, params)

