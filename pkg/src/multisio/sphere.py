"""Rough densities on the unit sphere ``S^{mn-1}`` (``mn`` in {2, 4}).

Nodes on ``S^1`` are uniform angles with equal weights (trapezoidal rule,
exact for trigonometric polynomials below the resolution). On ``S^3`` a
product rule in hyperspherical angles ``(psi, chi, phi)`` is used:
Gauss-Chebyshev (second kind) in ``cos psi``, Gauss-Legendre in
``cos chi`` and uniform ``phi``. Both node sets are invariant under the
antipodal map, so odd densities have discrete mean zero by symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import SingularityTooStrong, UnsupportedDimension

__all__ = [
    "SphereFunction",
    "Harmonic",
    "OddSignSmooth",
    "PowerSingularity",
    "RandomPoly",
    "Zero",
    "Constant",
    "make_sphere",
    "project_mean_zero",
    "sphere_lq_norm",
    "level_set_piece",
    "level_set_decomposition",
    "omega_at",
]


@dataclass(frozen=True)
class Harmonic:
    """Chebyshev zonal density ``T_k(y_1)``; ``cos(k theta)`` on ``S^1``."""

    k: int = 1


@dataclass(frozen=True)
class OddSignSmooth:
    """``tanh(y_1 / width)``: a smoothed odd sign function."""

    width: float = 0.1


@dataclass(frozen=True)
class PowerSingularity:
    """``|<y, e>|^-beta sgn<y, e>`` with ``e = (-sin theta0, cos theta0, 0, ...)``.

    On ``S^1`` this is ``|sin(theta - theta0)|^-beta sgn(sin(theta - theta0))``,
    which lies in ``L^q`` exactly when ``beta * q < 1``.
    """

    beta: float = 0.5
    theta0: float = 0.0

    def admissible(self, q: float) -> bool:
        return self.beta * q < 1.0


@dataclass(frozen=True)
class RandomPoly:
    """Seeded random trigonometric (``S^1``) or algebraic (``S^3``) polynomial."""

    seed: int = 0
    degree: int = 3


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Constant:
    c: float = 1.0


OmegaSpec = Union[Harmonic, OddSignSmooth, PowerSingularity, RandomPoly, Zero, Constant]


@dataclass(frozen=True)
class SphereFunction:
    """Samples of a density on ``S^{sphere_dim}`` with quadrature weights.

    ``axes`` holds the angular coordinate of each tensor axis (``theta`` on
    ``S^1``; ``psi, chi, phi`` on ``S^3``) and ``values`` is shaped like the
    tensor grid; ``nodes`` is the matching ``(..., mn)`` array of unit vectors.
    """

    sphere_dim: int
    axes: tuple = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    label: str = "omega"

    @property
    def mn(self) -> int:
        return self.sphere_dim + 1

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def with_values(self, values, label: str | None = None) -> "SphereFunction":
        values = np.asarray(values, dtype=float).reshape(self.values.shape)
        return replace(self, values=values, label=label if label is not None else self.label)

    def __mul__(self, c: float) -> "SphereFunction":
        return self.with_values(self.values * c, f"{c!r}*{self.label}")

    __rmul__ = __mul__

    def __add__(self, other) -> "SphereFunction":
        if isinstance(other, SphereFunction):
            return self.with_values(self.values + other.values, f"{self.label}+{other.label}")
        return self.with_values(self.values + other, f"{self.label}+{other!r}")

    def integral(self) -> float:
        return float(np.sum(self.weights * self.values))

    def integral_mean(self) -> float:
        return self.integral() / self.measure


def _s1_grid(resolution: int):
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    # exact zeros on the axes keep sign structure deterministic
    nodes[np.abs(nodes) < 1e-15] = 0.0
    weights = np.full(resolution, 2.0 * np.pi / resolution)
    return (theta,), nodes, weights


def _s3_grid(resolution: int):
    n_psi = n_chi = resolution // 2
    i = np.arange(1, n_psi + 1)
    psi = i * np.pi / (n_psi + 1)
    w_psi = np.pi / (n_psi + 1) * np.sin(psi) ** 2
    t, w_chi = np.polynomial.legendre.leggauss(n_chi)
    chi = np.arccos(t)[::-1]
    w_chi = w_chi[::-1]
    phi = 2.0 * np.pi * np.arange(resolution) / resolution
    w_phi = np.full(resolution, 2.0 * np.pi / resolution)
    P, C, F = np.meshgrid(psi, chi, phi, indexing="ij")
    nodes = np.stack(
        [
            np.cos(P),
            np.sin(P) * np.cos(C),
            np.sin(P) * np.sin(C) * np.cos(F),
            np.sin(P) * np.sin(C) * np.sin(F),
        ],
        axis=-1,
    )
    weights = w_psi[:, None, None] * w_chi[None, :, None] * w_phi[None, None, :]
    return (psi, chi, phi), nodes, weights


def _evaluate_spec(spec: OmegaSpec, nodes: np.ndarray) -> np.ndarray:
    y1 = nodes[..., 0]
    if isinstance(spec, Harmonic):
        return np.polynomial.chebyshev.chebval(y1, [0] * spec.k + [1])
    if isinstance(spec, OddSignSmooth):
        return np.tanh(y1 / spec.width)
    if isinstance(spec, PowerSingularity):
        if spec.beta >= 1.0:
            raise SingularityTooStrong(f"beta must be < 1, got {spec.beta}")
        s = -np.sin(spec.theta0) * nodes[..., 0] + np.cos(spec.theta0) * nodes[..., 1]
        out = np.zeros_like(s)
        # nodes on the singular set get 0 (measure zero; keeps quadrature finite)
        nz = np.abs(s) > 1e-12
        out[nz] = np.abs(s[nz]) ** (-spec.beta) * np.sign(s[nz])
        return out
    if isinstance(spec, RandomPoly):
        rng = np.random.default_rng(spec.seed)
        if nodes.shape[-1] == 2:
            theta = np.arctan2(nodes[..., 1], nodes[..., 0])
            out = np.zeros(nodes.shape[:-1])
            for k in range(spec.degree + 1):
                a, b = rng.standard_normal(2)
                out += a * np.cos(k * theta) + b * np.sin(k * theta)
            return out
        out = np.zeros(nodes.shape[:-1])
        dim = nodes.shape[-1]
        for total in range(spec.degree + 1):
            for powers in _compositions(total, dim):
                term = rng.standard_normal()
                mono = np.ones(nodes.shape[:-1])
                for d, p in enumerate(powers):
                    if p:
                        mono = mono * nodes[..., d] ** p
                out += term * mono
        return out
    if isinstance(spec, Zero):
        return np.zeros(nodes.shape[:-1])
    if isinstance(spec, Constant):
        return np.full(nodes.shape[:-1], float(spec.c))
    raise TypeError(f"unknown density spec {spec!r}")


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def make_sphere(mn: int, resolution: int, spec: OmegaSpec) -> SphereFunction:
    """Sample a builtin density on ``S^{mn-1}`` (``mn`` in {2, 4})."""
    if mn not in (2, 4):
        raise UnsupportedDimension(f"only mn in {{2, 4}} is supported, got {mn}")
    if resolution < 64 or resolution % 2:
        raise ValueError(f"resolution must be even and >= 64, got {resolution}")
    if mn == 2:
        axes, nodes, weights = _s1_grid(resolution)
    else:
        axes, nodes, weights = _s3_grid(resolution)
    values = _evaluate_spec(spec, nodes)
    return SphereFunction(mn - 1, axes, nodes, weights, values, label=repr(spec))


def project_mean_zero(omega: SphereFunction) -> SphereFunction:
    """Subtract the weighted mean. A density already mean-zero to rounding is returned as is."""
    mean = omega.integral_mean()
    scale = float(np.sum(omega.weights * np.abs(omega.values))) / omega.measure
    if abs(mean) <= 1e-15 * scale or scale == 0.0:
        return omega.with_values(omega.values.copy())
    return omega.with_values(omega.values - mean)


def sphere_lq_norm(omega: SphereFunction, q: float) -> float:
    a = np.abs(omega.values)
    if np.isinf(q):
        return float(a.max())
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    return float(np.sum(omega.weights * a ** q) ** (1.0 / q))


def level_set_piece(omega: SphereFunction, l: int) -> SphereFunction:
    """``Omega_0 = Omega 1{|Omega| <= 2}``, ``Omega_l = Omega 1{2^l < |Omega| <= 2^(l+1)}``."""
    if l < 0:
        raise ValueError("level index must be >= 0")
    a = np.abs(omega.values)
    if l == 0:
        mask = a <= 2.0
    else:
        mask = (a > 2.0 ** l) & (a <= 2.0 ** (l + 1))
    return omega.with_values(np.where(mask, omega.values, 0.0), f"{omega.label}[l={l}]")


def level_set_decomposition(omega: SphereFunction) -> list[SphereFunction]:
    """All nonzero-range pieces ``Omega_0 .. Omega_lmax`` with ``2^(lmax+1) >= max |Omega|``."""
    peak = float(np.abs(omega.values).max()) if omega.values.size else 0.0
    lmax = 0
    while 2.0 ** (lmax + 1) < peak:
        lmax += 1
    return [level_set_piece(omega, l) for l in range(lmax + 1)]


# ---------------------------------------------------------------------------
# Interpolation at arbitrary directions
# ---------------------------------------------------------------------------


def _interp_periodic(axis: np.ndarray, values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Linear interpolation on a uniform periodic axis starting at 0 with period 2*pi."""
    n = axis.size
    u = np.mod(t, 2.0 * np.pi) * (n / (2.0 * np.pi))
    i0 = np.floor(u).astype(np.int64) % n
    frac = u - np.floor(u)
    i1 = (i0 + 1) % n
    return values[i0] * (1.0 - frac) + values[i1] * frac


def _interp_axis(axis: np.ndarray, t: np.ndarray):
    """Bracketing indices and weights on a sorted non-periodic axis (clamped at the ends)."""
    t = np.clip(t, axis[0], axis[-1])
    i1 = np.clip(np.searchsorted(axis, t, side="right"), 1, axis.size - 1)
    i0 = i1 - 1
    frac = (t - axis[i0]) / (axis[i1] - axis[i0])
    return i0, i1, frac


def omega_at(omega: SphereFunction, y: np.ndarray) -> np.ndarray:
    """Interpolate the density at the directions of the nonzero vectors ``y[..., :]``.

    Periodic-linear in angle on ``S^1``; trilinear in ``(psi, chi, phi)`` on
    ``S^3``. Depends only on ``y / |y|``, so the homogeneous kernel built
    from it is exactly homogeneous. Zero vectors map to 0.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != omega.mn:
        raise ValueError(f"points have {y.shape[-1]} coordinates, sphere lives in R^{omega.mn}")
    if omega.mn == 2:
        theta = np.arctan2(y[..., 1], y[..., 0])
        out = _interp_periodic(omega.axes[0], omega.values, theta)
    else:
        psi_ax, chi_ax, phi_ax = omega.axes
        rho1 = np.sqrt(y[..., 1] ** 2 + y[..., 2] ** 2 + y[..., 3] ** 2)
        psi = np.arctan2(rho1, y[..., 0])
        rho2 = np.sqrt(y[..., 2] ** 2 + y[..., 3] ** 2)
        chi = np.arctan2(rho2, y[..., 1])
        phi = np.mod(np.arctan2(y[..., 3], y[..., 2]), 2.0 * np.pi)
        a0, a1, fa = _interp_axis(psi_ax, psi)
        b0, b1, fb = _interp_axis(chi_ax, chi)
        n = phi_ax.size
        u = phi * (n / (2.0 * np.pi))
        c0 = np.floor(u).astype(np.int64) % n
        fc = u - np.floor(u)
        c1 = (c0 + 1) % n
        V = omega.values
        out = np.zeros(psi.shape)
        for ia, wa in ((a0, 1 - fa), (a1, fa)):
            for ib, wb in ((b0, 1 - fb), (b1, fb)):
                for ic, wc in ((c0, 1 - fc), (c1, fc)):
                    out = out + wa * wb * wc * V[ia, ib, ic]
    zero = np.all(y == 0.0, axis=-1)
    if np.any(zero):
        out = np.where(zero, 0.0, out)
    return out
