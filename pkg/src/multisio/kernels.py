"""The homogeneous kernel ``K(y) = Omega(y/|y|) / |y|^mn`` and its pieces on a grid.

Every piece lives on an ``mn``-dimensional :class:`Grid` whose side matches
the input grid of the operators. The origin node is always 0.

Large scales are cut off smoothly: the plain and truncated kernels carry the
factor ``eta(|y| / R)`` with ``R = 2^(-gamma_lo)`` the coarsest resolvable
dyadic scale. That factor equals ``sum_{gamma >= gamma_lo} profile(2^gamma |y|)``,
so the truncations agree node for node with finite sums of dyadic pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    BandExceedsNyquist,
    EpsilonBelowResolution,
    GridMismatch,
    OriginEvaluation,
    ScaleOutOfRange,
)
from .freq import RadialBump, annular_profile, eta
from .grid import Grid, GridFunction, fourier_transform
from .sphere import SphereFunction, omega_at, sphere_lq_norm

__all__ = [
    "KernelPiece",
    "kernel_eval",
    "kernel_values",
    "resolvable_window",
    "outer_radius",
    "truncated_kernel",
    "smooth_truncated_kernel",
    "dyadic_piece",
    "smoothed_piece",
    "summed_piece",
    "partial_dyadic_sum",
    "symbol_envelope_check",
    "envelope_q",
]

_TOL = 1e-12


class KernelPiece:
    """A kernel on an ``mn``-dimensional grid, held in space and/or frequency form.

    ``kind`` is one of ``truncated``, ``smooth_truncated``, ``dyadic``,
    ``smoothed``, ``summed``, ``partial``; ``params`` records ``eps``,
    ``rho``, ``gamma``, ``mu`` as applicable.
    """

    def __init__(self, grid: Grid, kind: str, params: dict, omega_ref: str,
                 data: GridFunction | None = None, symbol: GridFunction | None = None):
        if data is None and symbol is None:
            raise ValueError("need space values or a symbol")
        self.grid = grid
        self.kind = kind
        self.params = dict(params)
        self.omega_ref = omega_ref
        self._data = data
        self._symbol = symbol

    def __repr__(self) -> str:
        return f"KernelPiece({self.kind}, {self.params}, omega={self.omega_ref}, grid={self.grid})"

    @property
    def data(self) -> GridFunction:
        if self._data is None:
            self._data = fourier_transform(self._symbol, "inverse")
        return self._data

    @property
    def symbol(self) -> GridFunction:
        if self._symbol is None:
            self._symbol = fourier_transform(self._data, "forward")
        return self._symbol


def _check_grid(omega: SphereFunction, grid: Grid) -> None:
    if grid.dim != omega.mn:
        raise GridMismatch(f"kernel grid has dim {grid.dim}, density lives on S^{omega.mn - 1}")


def kernel_eval(omega: SphereFunction, y) -> np.ndarray:
    """``Omega(y') / |y|^mn`` at one point or an array of points ``(..., mn)``."""
    y = np.asarray(y, dtype=float)
    r = np.sqrt(np.sum(y * y, axis=-1))
    if np.any(r == 0.0):
        raise OriginEvaluation("the kernel is singular at the origin")
    return omega_at(omega, y) / r ** omega.mn


def _box(grid: Grid, radius: float | None) -> tuple[slice, np.ndarray]:
    """Index window (same on each axis) covering ``|y_d| <= radius`` and its coordinates."""
    ax = grid.axis()
    if radius is None:
        return slice(None), ax
    lo = int(np.searchsorted(ax, -radius, side="left"))
    hi = int(np.searchsorted(ax, radius, side="right"))
    return slice(lo, hi), ax[lo:hi]


def _radial_field(omega: SphereFunction, grid: Grid, radial, radius: float | None) -> np.ndarray:
    """``Omega(y') * radial(|y|)`` on the nodes (0 at the origin and outside ``radius``).

    ``radial`` already includes any power of ``|y|``. Evaluated row by row
    over the first axis to bound memory.
    """
    _check_grid(omega, grid)
    sl, ax = _box(grid, radius)
    out = np.zeros(grid.shape)
    d = grid.dim
    sub = out[(sl,) * d]
    rest = list(np.meshgrid(*([ax] * (d - 1)), indexing="ij"))
    for i, a in enumerate(ax):
        pts = np.stack([np.full(rest[0].shape, a)] + rest, axis=-1)
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        w = radial(r)
        nz = (w != 0.0) & (r > 0.0)
        row = np.zeros(r.shape)
        if np.any(nz):
            row[nz] = omega_at(omega, pts[nz]) * w[nz]
        sub[i] = row
    return out


def kernel_values(omega: SphereFunction, grid: Grid, radial=None, radius=None) -> np.ndarray:
    """Node values of ``K(y) * radial(|y|)`` (``radial`` defaults to 1)."""
    mn = omega.mn
    if radial is None:
        return _radial_field(omega, grid, lambda r: np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0) ** mn, 0.0), radius)

    def f(r):
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, radial(r) / safe ** mn, 0.0)

    return _radial_field(omega, grid, f, radius)


def resolvable_window(grid: Grid) -> tuple[int, int]:
    """``(gamma_lo, gamma_hi)``: ``2^(-gamma_hi-1) >= 2h`` and ``2^(-gamma_lo+1) <= T/2``."""
    h = grid.spacing
    g_hi = math.floor(-1.0 - math.log2(2.0 * h) + _TOL)
    g_lo = math.ceil(1.0 - math.log2(grid.extent / 2.0) - _TOL)
    return g_lo, g_hi


def outer_radius(grid: Grid) -> float:
    """Radius where the smooth large-scale cutoff starts to fall (``<= T/4``)."""
    g_lo, _ = resolvable_window(grid)
    return 2.0 ** (-g_lo)


def _outer(grid: Grid):
    R = outer_radius(grid)
    return lambda r: eta(r / R), 2.0 * R


def _check_eps(eps: float, grid: Grid) -> None:
    if eps < 2.0 * grid.spacing * (1.0 - _TOL):
        raise EpsilonBelowResolution(f"eps = {eps} is below two cells (2h = {2 * grid.spacing})")


def truncated_kernel(omega: SphereFunction, eps: float, grid: Grid) -> KernelPiece:
    """``K 1{|y| >= eps}`` times the smooth large-scale cutoff."""
    _check_eps(eps, grid)
    outer, reach = _outer(grid)
    vals = kernel_values(omega, grid, lambda r: np.where(r >= eps, outer(r), 0.0), reach)
    return KernelPiece(grid, "truncated", {"eps": eps}, omega.label, data=GridFunction(grid, vals))


def smooth_truncated_kernel(omega: SphereFunction, rho: int, grid: Grid) -> KernelPiece:
    """``K (1 - eta(|y| / 2^rho))`` times the smooth large-scale cutoff."""
    _check_eps(2.0 ** rho, grid)
    outer, reach = _outer(grid)
    vals = kernel_values(
        omega, grid, lambda r: (1.0 - eta(np.ldexp(r, -int(rho)))) * outer(r), reach
    )
    return KernelPiece(
        grid, "smooth_truncated", {"rho": int(rho)}, omega.label, data=GridFunction(grid, vals)
    )


def _check_gamma(gamma: int, grid: Grid) -> None:
    g_lo, g_hi = resolvable_window(grid)
    if not g_lo <= gamma <= g_hi:
        raise ScaleOutOfRange(f"gamma = {gamma} outside the resolvable window [{g_lo}, {g_hi}]")


def dyadic_piece(omega: SphereFunction, gamma: int, grid: Grid) -> KernelPiece:
    """``profile(2^gamma |y|) K(y)``, supported in ``2^(-gamma-1) <= |y| <= 2^(-gamma+1)``."""
    _check_gamma(gamma, grid)
    reach = 2.0 ** (1 - gamma)
    vals = kernel_values(omega, grid, lambda r: annular_profile(np.ldexp(r, int(gamma))), reach)
    return KernelPiece(grid, "dyadic", {"gamma": int(gamma)}, omega.label, data=GridFunction(grid, vals))


def partial_dyadic_sum(omega: SphereFunction, tau: int, grid: Grid) -> KernelPiece:
    """``sum_{gamma_lo <= gamma < tau} K^gamma`` in closed form:
    ``K (eta(2^gamma_lo |y|) - eta(2^tau |y|))`` (telescoping)."""
    g_lo, g_hi = resolvable_window(grid)
    if not g_lo <= tau <= g_hi + 1:
        raise ScaleOutOfRange(f"tau = {tau} outside [{g_lo}, {g_hi + 1}]")
    reach = 2.0 ** (1 - g_lo)
    vals = kernel_values(
        omega, grid,
        lambda r: eta(np.ldexp(r, int(g_lo))) - eta(np.ldexp(r, int(tau))),
        reach,
    )
    return KernelPiece(grid, "partial", {"tau": int(tau)}, omega.label, data=GridFunction(grid, vals))


def smoothed_piece(piece: KernelPiece, mu: int, bump: RadialBump | None = None) -> KernelPiece:
    """Frequency-side ``profile(2^-(mu+gamma) |xi|) * FT(K^gamma)(xi)``."""
    if piece.kind != "dyadic":
        raise ValueError("smoothed_piece expects a dyadic piece")
    gamma = piece.params["gamma"]
    if 2.0 ** (mu + gamma + 1) > piece.grid.nyquist * (1.0 + _TOL):
        raise BandExceedsNyquist(
            f"2^(mu+gamma+1) = {2.0 ** (mu + gamma + 1)} exceeds Nyquist {piece.grid.nyquist}"
        )
    sym = piece.symbol
    weight = annular_profile(np.ldexp(sym.grid.radius(), -(int(mu) + int(gamma))))
    return KernelPiece(
        piece.grid, "smoothed", {"gamma": gamma, "mu": int(mu)}, piece.omega_ref,
        symbol=GridFunction(sym.grid, weight * sym.values),
    )


def summed_piece(omega: SphereFunction, mu: int, gammas, grid: Grid) -> KernelPiece:
    """``K_mu = sum_gamma K^gamma_mu``, summed as symbols over ``gammas``."""
    gammas = list(gammas)
    dual = grid.dual()
    total = np.zeros(grid.shape, dtype=complex)
    for g in gammas:
        total += smoothed_piece(dyadic_piece(omega, g, grid), mu).symbol.values
    return KernelPiece(
        grid, "summed", {"mu": int(mu), "gammas": (min(gammas), max(gammas)) if gammas else None},
        omega.label, symbol=GridFunction(dual, total),
    )


def envelope_q(mu: int, mn: int, delta: float) -> float:
    """``Q(mu) = 2^((mn - delta) mu)`` for ``mu >= 0`` and ``2^(mu (1 - delta))`` below."""
    if mu >= 0:
        return 2.0 ** ((mn - delta) * mu)
    return 2.0 ** (mu * (1.0 - delta))


@dataclass
class EnvelopeReport:
    q: float
    delta: float
    ratios: dict = field(default_factory=dict)  # mu -> R(mu)
    sups: dict = field(default_factory=dict)  # mu -> sup |symbol|
    omega_norm: float = 0.0

    @property
    def spread(self) -> float:
        """max/min of ``R`` over negative ``mu`` (1 when degenerate)."""
        neg = [v for m, v in self.ratios.items() if m < 0]
        if not neg or min(neg) == 0.0:
            return 1.0
        return max(neg) / min(neg)

    @property
    def passed(self) -> bool:
        return self.spread <= 4.0


def symbol_envelope_check(pieces: dict, omega: SphereFunction, q: float, delta: float) -> EnvelopeReport:
    """``R(mu) = sup |FT(K_mu)| / (||Omega||_q Q(mu))`` for each ``mu -> K_mu`` in ``pieces``."""
    norm = sphere_lq_norm(omega, q)
    rep = EnvelopeReport(q=q, delta=delta, omega_norm=norm)
    for mu, piece in sorted(pieces.items()):
        sup = float(np.abs(piece.symbol.values).max())
        rep.sups[mu] = sup
        rep.ratios[mu] = 0.0 if norm == 0.0 else sup / (norm * envelope_q(mu, omega.mn, delta))
    return rep
