"""Littlewood-Paley partitions of unity and sharp frequency bands.

``eta`` is 1 on ``[0, 1]``, 0 on ``[2, inf)`` and smooth in between,
glued from ``g(t) = exp(-1/t)``. The annular profile ``eta(r) - eta(2r)``
telescopes, so its dyadic dilates sum to 1 on ``r > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandExceedsNyquist
from .grid import Grid, GridFunction, fourier_transform

__all__ = [
    "RadialBump",
    "eta",
    "annular_profile",
    "phi_hat",
    "theta_hat",
    "theta_hat_shifted",
    "gamma_lowpass",
    "band_edges",
    "band_mask",
    "band_restrict",
    "band_multiplicity",
    "max_band_multiplicity",
]


def _glue(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def eta(r) -> np.ndarray:
    """Smooth plateau: 1 for ``r <= 1``, 0 for ``r >= 2``."""
    r = np.asarray(r, dtype=float)
    a = _glue(2.0 - r)
    b = _glue(r - 1.0)
    out = np.where(r <= 1.0, 1.0, 0.0)
    mid = (r > 1.0) & (r < 2.0)
    if np.any(mid):
        out = out.astype(float)
        out[mid] = a[mid] / (a[mid] + b[mid])
    return out


def annular_profile(r) -> np.ndarray:
    """``eta(r) - eta(2r)``: supported in ``[1/2, 2]``, equal to 1 at ``r = 1``."""
    r = np.asarray(r, dtype=float)
    return eta(r) - eta(2.0 * r)


@dataclass(frozen=True)
class RadialBump:
    dim: int = 2
    inner: float = 0.5
    outer: float = 2.0

    def profile(self, r) -> np.ndarray:
        return annular_profile(r)


def _radius(xi) -> np.ndarray:
    """``|xi|`` for a scalar or for points stacked along the last axis ``(..., dim)``."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        return np.abs(xi)
    return np.sqrt(np.sum(xi * xi, axis=-1))


def phi_hat(bump: RadialBump, j: int, xi) -> np.ndarray:
    """``profile(|xi| / 2^j)``; the division is an exact power-of-two scaling."""
    return bump.profile(np.ldexp(_radius(xi), -int(j)))


def theta_hat(bump: RadialBump, xi) -> np.ndarray:
    """Low-pass ``eta(|xi|)``, equal to ``1 - sum_{j >= 1} phi_hat(j, xi)``."""
    return eta(_radius(xi))


def theta_hat_shifted(bump: RadialBump, mu0: int, xi) -> np.ndarray:
    """``eta(|xi| / 2^(mu0-1))``; completes ``sum_{mu >= mu0} phi_hat(mu, .)`` to 1."""
    return eta(np.ldexp(_radius(xi), -(int(mu0) - 1)))


def gamma_lowpass(k: int, grid: Grid) -> GridFunction:
    """Frequency-side ``eta(|xi| / 2^k)`` on the dual of ``grid``."""
    if 2.0 ** (k + 1) > grid.nyquist:
        raise BandExceedsNyquist(f"2^(k+1) = {2.0 ** (k + 1)} exceeds Nyquist {grid.nyquist}")
    dual = grid.dual()
    return GridFunction(dual, eta(np.ldexp(dual.radius(), -int(k))))


def band_edges(lam: int, gamma: int, mu: int, c0: float, n: int) -> tuple[float, float]:
    """``(C0 sqrt(n) 2^(gamma - lam), 2^(gamma + mu + 3))``."""
    lo = c0 * math.sqrt(n) * 2.0 ** (gamma - lam)
    hi = 2.0 ** (gamma + mu + 3)
    return lo, hi


def band_mask(radius: np.ndarray, lam: int, gamma: int, mu: int, c0: float, n: int) -> np.ndarray:
    lo, hi = band_edges(lam, gamma, mu, c0, n)
    return (radius >= lo) & (radius <= hi)


def band_restrict(f: GridFunction, lam: int, gamma: int, mu: int, c0: float) -> GridFunction:
    """Sharp cutoff of ``f`` to the band ``C0 sqrt(n) 2^(gamma-lam) <= |xi| <= 2^(gamma+mu+3)``."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    n = f.grid.dim
    _, hi = band_edges(lam, gamma, mu, c0, n)
    if hi > f.grid.nyquist:
        raise BandExceedsNyquist(f"upper band edge {hi} exceeds Nyquist {f.grid.nyquist}")
    fh = fourier_transform(f, "forward")
    mask = band_mask(fh.grid.radius(), lam, gamma, mu, c0, n)
    return fourier_transform(GridFunction(fh.grid, np.where(mask, fh.values, 0.0)), "inverse")


def band_multiplicity(
    radius: np.ndarray, lam: int, mu: int, c0: float, n: int, gammas=range(-30, 31)
) -> np.ndarray:
    """Number of ``gamma`` whose band contains each radius (direct enumeration)."""
    radius = np.asarray(radius, dtype=float)
    count = np.zeros(radius.shape, dtype=np.int64)
    for g in gammas:
        count += band_mask(radius, lam, g, mu, c0, n)
    return count


def max_band_multiplicity(lam: int, mu: int, c0: float, n: int) -> int:
    """``lam + mu + 4 + ceil(log2(1 / (C0 sqrt n)))``, the largest per-frequency count."""
    return lam + mu + 4 + math.ceil(math.log2(1.0 / (c0 * math.sqrt(n))))
