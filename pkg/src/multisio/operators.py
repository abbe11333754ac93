"""m-linear operators acting on tuples of grid functions on ``R^n``.

Two independent routes evaluate a truncated singular integral:

* a lattice sum over the nodes of the ``mn``-dimensional kernel grid with
  periodic indexing of ``f_j(x - y_j)``, and
* a multiplier route: transform every ``f_j``, multiply the tensor product by
  a symbol on the ``mn``-dimensional frequency grid, collapse along
  ``xi_1 + ... + xi_m = eta`` and transform back.

A third route, polar quadrature (Gauss-Legendre in the radius on dyadic
shells, the sphere nodes in angle, Fourier interpolation for off-grid
shifts) resolves truncation radii below the grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    BandExceedsNyquist,
    EpsilonBelowResolution,
    GridMismatch,
    MissingCoefficients,
    RadiusOutOfRange,
    ScaleOutOfRange,
    UnsupportedDimension,
)
from .freq import annular_profile, eta
from .grid import Grid, GridFunction
from .kernels import (
    dyadic_piece,
    outer_radius,
    partial_dyadic_sum,
    resolvable_window,
    smoothed_piece,
    truncated_kernel,
)
from .sphere import SphereFunction, omega_at
from .wavelets import WaveletCoefficients, WaveletPair, build_wavelet_pair

__all__ = [
    "OperatorOutput",
    "MultiplierSymbol",
    "kernel_grid",
    "lattice_sum",
    "apply_truncated_sio_quadrature",
    "apply_annulus_sio_polar",
    "apply_truncated_sio_polar",
    "apply_multiplier",
    "truncated_symbols",
    "maximal_truncated",
    "sharp_partial_symbols",
    "sharp_maximal",
    "maximal_averages",
    "hardy_littlewood",
    "ball_volume",
    "lacunary_multiplier",
    "lacunary_maximal",
    "localized_piece",
    "localized_bank",
    "wavelet_paraproduct",
]

_TOL = 1e-12


@dataclass(frozen=True)
class OperatorOutput:
    value: GridFunction
    provenance: dict = field(default_factory=dict)


def _inputs(fs: Sequence[GridFunction]) -> tuple[Grid, int, int]:
    fs = list(fs)
    if len(fs) < 1:
        raise ValueError("need at least one input function")
    g = fs[0].grid
    for f in fs[1:]:
        if f.grid != g:
            raise GridMismatch(f"input grids differ: {f.grid} vs {g}")
    m, n = len(fs), g.dim
    if m * n > 4:
        raise UnsupportedDimension(f"m*n = {m * n} exceeds 4")
    return g, m, n


def kernel_grid(grid: Grid, m: int) -> Grid:
    """The ``mn``-dimensional grid with the same spacing and side as ``grid``."""
    return Grid(grid.dim * m, grid.N, grid.extent)


def _check_omega(omega: SphereFunction, m: int, n: int) -> None:
    if omega.mn != m * n:
        raise GridMismatch(f"density lives on S^{omega.mn - 1}, operator needs S^{m * n - 1}")


# ---------------------------------------------------------------------------
# Lattice route
# ---------------------------------------------------------------------------


def lattice_sum(kvals: np.ndarray, fs: Sequence[GridFunction], chunk: int = 2048) -> np.ndarray:
    """``h^mn sum_y k(y) prod_j f_j(x - y_j)`` over the nonzero kernel nodes, periodic in x."""
    grid, m, n = _inputs(fs)
    N = grid.N
    idx = np.nonzero(kvals)
    weights = kvals[idx] * grid.cell_volume ** m
    offsets = np.stack(idx, axis=-1) - N // 2  # (nodes, mn) lattice offsets
    xs = np.indices(grid.shape).reshape(n, -1)  # (n, N^n)
    flat_f = [f.values.reshape(-1) for f in fs]
    out = np.zeros(N ** n, dtype=complex)
    for start in range(0, weights.size, chunk):
        w = weights[start : start + chunk]
        off = offsets[start : start + chunk]
        prod = np.ones((w.size, N ** n), dtype=complex)
        for j in range(m):
            flat = np.zeros((w.size, N ** n), dtype=np.int64)
            for d in range(n):
                coord = (xs[d][None, :] - off[:, j * n + d][:, None]) % N
                flat = flat * N + coord
            prod *= flat_f[j][flat]
        out += w @ prod
    return out.reshape(grid.shape)


def apply_truncated_sio_quadrature(
    omega: SphereFunction, eps: float, fs: Sequence[GridFunction]
) -> OperatorOutput:
    """Lattice Riemann sum of the truncated operator over nodes with ``|y| >= eps``."""
    grid, m, n = _inputs(fs)
    _check_omega(omega, m, n)
    piece = truncated_kernel(omega, eps, kernel_grid(grid, m))
    vals = lattice_sum(piece.data.values.real, fs)
    return OperatorOutput(GridFunction(grid, vals), {"route": "lattice", "eps": eps, "omega": omega.label})


# ---------------------------------------------------------------------------
# Polar quadrature route
# ---------------------------------------------------------------------------


def _shifted_bank(f: GridFunction, shifts: np.ndarray) -> np.ndarray:
    """``f(x - s)`` for every row ``s`` of ``shifts`` (shape ``(S, n)``), by Fourier interpolation."""
    g = f.grid
    axes = tuple(range(1, g.dim + 1))
    fh = np.fft.fftn(f.values)
    freqs = np.fft.fftfreq(g.N, d=g.spacing)
    phase = np.zeros((shifts.shape[0],) + g.shape)
    for d in range(g.dim):
        shape = [1] * g.dim
        shape[d] = g.N
        phase = phase + shifts[:, d].reshape((-1,) + (1,) * g.dim) * freqs.reshape(shape)[None]
    # values sit at x = -T/2 + i h; the shift theorem is indifferent to that offset
    bank = np.fft.ifftn(fh[None] * np.exp(-2j * np.pi * phase), axes=axes)
    return bank


def apply_annulus_sio_polar(
    omega: SphereFunction,
    r_lo: float,
    r_hi: float,
    fs: Sequence[GridFunction],
    radial_weight=None,
    nodes_per_shell: int = 16,
    chunk: int = 1024,
) -> np.ndarray:
    """``int_{r_lo <= |y| < r_hi} K(y) w(|y|) prod f_j(x - y_j) dy`` by polar quadrature.

    The radial interval is split into dyadic shells, each integrated with
    Gauss-Legendre in ``r``; angles use the sphere nodes and weights.
    """
    grid, m, n = _inputs(fs)
    _check_omega(omega, m, n)
    if not 0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    mn = m * n
    edges = [r_lo]
    while edges[-1] * 2.0 < r_hi * (1 - _TOL):
        edges.append(edges[-1] * 2.0)
    edges.append(r_hi)
    t, wt = np.polynomial.legendre.leggauss(nodes_per_shell)
    radii, rw = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        radii.append(0.5 * (b - a) * t + 0.5 * (b + a))
        rw.append(0.5 * (b - a) * wt)
    radii = np.concatenate(radii)
    rw = np.concatenate(rw)
    if radial_weight is not None:
        rw = rw * radial_weight(radii)
    dirs = omega.nodes.reshape(-1, mn)
    ang_w = (omega.weights * omega.values).reshape(-1)
    keep = ang_w != 0.0
    dirs, ang_w = dirs[keep], ang_w[keep]
    # K(r theta) r^(mn-1) = Omega(theta) / r
    radial = rw / radii
    R, A = np.meshgrid(np.arange(radii.size), np.arange(ang_w.size), indexing="ij")
    R, A = R.ravel(), A.ravel()
    weights = radial[R] * ang_w[A]
    out = np.zeros(grid.shape, dtype=complex)
    for s in range(0, weights.size, chunk):
        rr = radii[R[s : s + chunk]]
        dd = dirs[A[s : s + chunk]]
        prod = None
        for j in range(m):
            shifts = rr[:, None] * dd[:, j * n : (j + 1) * n]
            bank = _shifted_bank(fs[j], shifts)
            prod = bank if prod is None else prod * bank
        out += np.tensordot(weights[s : s + chunk], prod, axes=(0, 0))
    return out


def apply_truncated_sio_polar(
    omega: SphereFunction, eps: float, fs: Sequence[GridFunction], nodes_per_shell: int = 16
) -> OperatorOutput:
    """Truncated operator with the same smooth large-scale cutoff as the lattice route."""
    grid, m, _ = _inputs(fs)
    R = outer_radius(kernel_grid(grid, m))
    vals = apply_annulus_sio_polar(
        omega, eps, 2.0 * R, fs, radial_weight=lambda r: eta(r / R), nodes_per_shell=nodes_per_shell
    )
    return OperatorOutput(GridFunction(grid, vals), {"route": "polar", "eps": eps, "omega": omega.label})


# ---------------------------------------------------------------------------
# Multiplier route
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _antidiagonal_index(m: int, n: int, N: int) -> np.ndarray:
    """Flat index of ``(sum_j i_j) mod N`` (per axis) over the ``mn``-dim FFT-ordered grid."""
    flat = np.zeros((N,) * (m * n), dtype=np.int64)
    for d in range(n):
        s = np.zeros((N,) * (m * n), dtype=np.int64)
        for j in range(m):
            shape = [1] * (m * n)
            shape[j * n + d] = N
            s = s + np.arange(N).reshape(shape)
        flat = flat * N + s % N
    flat = flat.reshape(-1)
    flat.setflags(write=False)
    return flat


def apply_multiplier(symbol: GridFunction, fs: Sequence[GridFunction]) -> OperatorOutput:
    """``int sigma(xi) prod f_j^(xi_j) e^{2 pi i x.(xi_1+...+xi_m)} dxi`` on the grid.

    ``symbol`` is sampled on the dual of the ``mn``-dimensional kernel grid.
    """
    grid, m, n = _inputs(fs)
    sg = symbol.grid
    dual = grid.dual()
    if sg.dim != m * n or sg.N != grid.N or not math.isclose(sg.extent, dual.extent, rel_tol=1e-12):
        raise GridMismatch(f"symbol grid {sg} does not match the inputs' frequency grid")
    N = grid.N
    axes = tuple(range(n))
    S = np.fft.ifftshift(symbol.values)
    prod = S
    for j, f in enumerate(fs):
        fh = np.fft.fftn(np.fft.ifftshift(f.values, axes=axes), axes=axes) * grid.cell_volume
        shape = [1] * (m * n)
        for d in range(n):
            shape[j * n + d] = N
        prod = prod * fh.reshape(shape)
    idx = _antidiagonal_index(m, n, N)
    pr = prod.reshape(-1)
    C = np.bincount(idx, weights=pr.real, minlength=N ** n) + 1j * np.bincount(
        idx, weights=pr.imag, minlength=N ** n
    )
    C = C.reshape((N,) * n) * dual.cell_volume ** (m - 1)
    vals = np.fft.fftshift(np.fft.ifftn(C, axes=axes), axes=axes) * (N ** n) * dual.cell_volume
    return OperatorOutput(GridFunction(grid, vals), {"route": "multiplier"})


def truncated_symbols(omega: SphereFunction, eps_set, grid: Grid, m: int) -> dict:
    """``eps -> FT(K^(eps))`` on the frequency side of the ``mn`` kernel grid."""
    kg = kernel_grid(grid, m)
    return {float(e): truncated_kernel(omega, float(e), kg).symbol for e in sorted(eps_set)}


def _sup_abs(outputs) -> np.ndarray:
    best = None
    for v in outputs:
        a = np.abs(v)
        best = a if best is None else np.maximum(best, a)
    return best


def maximal_truncated(
    omega: SphereFunction, fs: Sequence[GridFunction], eps_set, symbols: dict | None = None
) -> OperatorOutput:
    """``max_{eps in eps_set} |L^(eps)(f)|`` via the multiplier route."""
    grid, m, n = _inputs(fs)
    _check_omega(omega, m, n)
    eps_set = sorted(float(e) for e in eps_set)
    if not eps_set:
        raise ValueError("eps_set must be nonempty")
    if symbols is None:
        symbols = truncated_symbols(omega, eps_set, grid, m)
    vals = _sup_abs(apply_multiplier(symbols[e], fs).value.values for e in eps_set)
    return OperatorOutput(GridFunction(grid, vals), {"eps_set": eps_set, "omega": omega.label})


def sharp_partial_symbols(omega: SphereFunction, tau_set, grid: Grid, m: int, mu: int | None = None) -> dict:
    """``tau -> FT(sum_{gamma_lo <= gamma < tau} K^gamma)`` (or of the ``K^gamma_mu``)."""
    kg = kernel_grid(grid, m)
    g_lo, g_hi = resolvable_window(kg)
    out = {}
    for tau in sorted(int(t) for t in tau_set):
        if not g_lo <= tau <= g_hi + 1:
            raise ScaleOutOfRange(f"tau = {tau} outside [{g_lo}, {g_hi + 1}]")
        if mu is None:
            out[tau] = partial_dyadic_sum(omega, tau, kg).symbol
        else:
            total = np.zeros(kg.shape, dtype=complex)
            for g in range(g_lo, tau):
                total += smoothed_piece(dyadic_piece(omega, g, kg), mu).symbol.values
            out[tau] = GridFunction(kg.dual(), total)
    return out


def sharp_maximal(
    omega: SphereFunction, fs: Sequence[GridFunction], tau_set, mu: int | None = None,
    symbols: dict | None = None,
) -> OperatorOutput:
    """``max_tau |sum_{gamma < tau} int K^gamma(y) prod f_j(x - y_j) dy|``."""
    grid, m, n = _inputs(fs)
    _check_omega(omega, m, n)
    if symbols is None:
        symbols = sharp_partial_symbols(omega, tau_set, grid, m, mu)
    taus = sorted(int(t) for t in tau_set)
    vals = _sup_abs(apply_multiplier(symbols[t], fs).value.values for t in taus)
    return OperatorOutput(GridFunction(grid, vals), {"tau_set": taus, "mu": mu, "omega": omega.label})


# ---------------------------------------------------------------------------
# Maximal averages
# ---------------------------------------------------------------------------


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _radius_grid(dim: int, N: int, h: float) -> np.ndarray:
    ax = (np.arange(N) - N // 2) * h
    r2 = np.zeros((N,) * dim)
    for d in range(dim):
        shape = [1] * dim
        shape[d] = N
        r2 = r2 + (ax ** 2).reshape(shape)
    return np.sqrt(r2)


def _check_radii(R_set, lo: float, hi: float) -> list[float]:
    R_set = sorted(float(r) for r in R_set)
    if not R_set:
        raise ValueError("R_set must be nonempty")
    for R in R_set:
        if R < lo * (1 - _TOL) or R >= hi:
            raise RadiusOutOfRange(f"radius {R} outside [{lo}, {hi})")
    return R_set


def maximal_averages(omega: SphereFunction, fs: Sequence[GridFunction], R_set) -> OperatorOutput:
    """``max_R R^-mn h^mn sum_{0 < |y| <= R} |Omega(y')| prod |f_j(x - y_j)|``."""
    grid, m, n = _inputs(fs)
    _check_omega(omega, m, n)
    R_set = _check_radii(R_set, 2.0 * grid.spacing, grid.extent / 2.0)
    kg = kernel_grid(grid, m)
    r = _radius_grid(m * n, grid.N, grid.spacing)
    coords = np.stack(np.meshgrid(*([kg.axis()] * (m * n)), indexing="ij"), axis=-1)
    absf = [GridFunction(grid, np.abs(f.values)) for f in fs]
    total = np.zeros(grid.shape)
    best = np.zeros(grid.shape)
    prev = 0.0
    for R in R_set:
        shell = (r > prev) & (r <= R)
        w = np.zeros(kg.shape)
        if np.any(shell):
            w[shell] = np.abs(omega_at(omega, coords[shell]))
            total = total + lattice_sum(w, absf).real
        best = np.maximum(best, total / R ** (m * n))
        prev = R
    return OperatorOutput(GridFunction(grid, best), {"R_set": R_set, "omega": omega.label})


def hardy_littlewood(f: GridFunction, R_set) -> GridFunction:
    """Centered ball averages ``(v_n R^n)^-1 h^n sum_{|y| <= R} |f(x - y)|``, max over ``R_set``.

    Normalized by the continuum ball volume, so that
    ``h^n sum_{|y| <= R} |f(x - y)| <= v_n R^n M f(x)`` holds exactly.
    """
    g = f.grid
    n = g.dim
    R_set = _check_radii(R_set, 0.5 * g.spacing, g.extent / 2.0)
    r = _radius_grid(n, g.N, g.spacing)
    absf = [GridFunction(g, np.abs(f.values))]
    total = np.zeros(g.shape)
    best = np.zeros(g.shape)
    prev = -1.0
    for R in R_set:
        shell = (r > prev) & (r <= R * (1 + _TOL))
        w = shell.astype(float)
        if np.any(shell):
            total = total + lattice_sum(w, absf).real
        best = np.maximum(best, total / (ball_volume(n) * R ** n))
        prev = R * (1 + _TOL)
    return GridFunction(g, best)


# ---------------------------------------------------------------------------
# Lacunary multipliers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierSymbol:
    """``bessel_decay`` ``(1 + |xi|^2)^(-a/2)``, ``constant`` ``c``, or ``sampled`` values."""

    kind: str
    a: float = 0.0
    c: float = 1.0
    sampled: GridFunction | None = field(default=None, repr=False)

    @classmethod
    def bessel_decay(cls, a: float) -> "MultiplierSymbol":
        return cls("bessel_decay", a=float(a))

    @classmethod
    def constant(cls, c: float) -> "MultiplierSymbol":
        return cls("constant", a=0.0, c=float(c))

    @classmethod
    def from_samples(cls, values: GridFunction, a: float = 0.0) -> "MultiplierSymbol":
        return cls("sampled", a=float(a), sampled=values)

    @property
    def decay_a(self) -> float:
        return self.a

    def __mul__(self, s: float) -> "MultiplierSymbol":
        if self.kind == "constant":
            return MultiplierSymbol.constant(self.c * s)
        if self.kind == "bessel_decay":
            return MultiplierSymbol("bessel_decay", a=self.a, c=self.c * s)
        return MultiplierSymbol.from_samples(self.sampled * s, self.a)

    __rmul__ = __mul__

    def value_at_origin(self) -> float:
        if self.kind == "sampled":
            return complex(self.sampled.at([0.0] * self.sampled.grid.dim))
        return self.c

    def limit_at_infinity(self) -> float | None:
        if self.kind == "constant":
            return self.c
        if self.kind == "bessel_decay":
            return 0.0 if self.a > 0 else self.c
        return None

    def on_grid(self, dual: Grid, nu: int = 0) -> GridFunction:
        """``sigma(2^nu xi)`` on a frequency grid."""
        if self.kind == "constant":
            return GridFunction(dual, np.full(dual.shape, self.c))
        if self.kind == "bessel_decay":
            r = np.ldexp(dual.radius(), int(nu))
            return GridFunction(dual, self.c * (1.0 + r * r) ** (-self.a / 2.0))
        if nu != 0:
            raise ValueError("sampled symbols support nu = 0 only")
        if self.sampled.grid != dual:
            raise GridMismatch("sampled symbol lives on a different grid")
        return self.sampled


def lacunary_multiplier(sigma: MultiplierSymbol, nu: int, fs: Sequence[GridFunction]) -> OperatorOutput:
    grid, m, _ = _inputs(fs)
    sym = sigma.on_grid(kernel_grid(grid, m).dual(), nu)
    out = apply_multiplier(sym, fs)
    return OperatorOutput(out.value, {"nu": int(nu), "sigma": sigma.kind})


def lacunary_maximal(sigma: MultiplierSymbol, fs: Sequence[GridFunction], nu_set) -> OperatorOutput:
    grid, _, _ = _inputs(fs)
    nus = sorted(int(v) for v in nu_set)
    if not nus:
        raise ValueError("nu_set must be nonempty")
    vals = _sup_abs(lacunary_multiplier(sigma, v, fs).value.values for v in nus)
    return OperatorOutput(GridFunction(grid, vals), {"nu_set": nus, "sigma": sigma.kind})


# ---------------------------------------------------------------------------
# Wavelet-localized pieces
# ---------------------------------------------------------------------------


def _wavelet_reach(pair: WaveletPair, lam: int, gamma: int, k: int) -> float:
    return 2.0 ** (gamma - lam) * max(abs(k + pair.left), abs(k + pair.right))


def localized_piece(
    f: GridFunction, lam: int, gamma: int, G, k, pair: WaveletPair | None = None
) -> GridFunction:
    """``(Psi^lam_{G,k}(xi / 2^gamma) f^(xi))^vee``."""
    pair = pair or build_wavelet_pair(3)
    g = f.grid
    G, k = tuple(G), tuple(int(v) for v in k)
    if len(G) != g.dim or len(k) != g.dim:
        raise ValueError("G and k need one entry per axis")
    for kd in k:
        if _wavelet_reach(pair, lam, gamma, kd) > g.nyquist * (1 + _TOL):
            raise BandExceedsNyquist("dilated wavelet support leaves the Nyquist band")
    dual = g.dual()
    mult = np.ones(dual.shape)
    s = 2.0 ** (lam - gamma)
    for d, (gd, kd) in enumerate(zip(G, k)):
        shape = [1] * g.dim
        shape[d] = g.N
        mult = mult * (2.0 ** (lam / 2.0) * pair.evaluate(gd, s * dual.axis() - kd)).reshape(shape)
    from .grid import fourier_transform

    fh = fourier_transform(f, "forward")
    return fourier_transform(GridFunction(dual, mult * fh.values), "inverse")


def localized_bank(
    f: GridFunction, lam: int, gamma: int, kind: str, ks, pair: WaveletPair
) -> np.ndarray:
    """Rows ``L^{lam,gamma}_{kind,k} f`` for every ``k`` in ``ks`` (1D inputs)."""
    g = f.grid
    if g.dim != 1:
        raise UnsupportedDimension("localized_bank handles n = 1")
    ks = np.asarray(ks, dtype=np.int64)
    for kd in (ks.min(), ks.max()):
        if _wavelet_reach(pair, lam, gamma, int(kd)) > g.nyquist * (1 + _TOL):
            raise BandExceedsNyquist("dilated wavelet support leaves the Nyquist band")
    dual = g.dual()
    fh = np.fft.fftn(np.fft.ifftshift(f.values)) * g.spacing
    xi = np.fft.ifftshift(dual.axis())
    s = 2.0 ** (lam - gamma)
    mult = 2.0 ** (lam / 2.0) * pair.evaluate(kind, s * xi[None, :] - ks[:, None])
    bank = np.fft.ifft(mult * fh[None, :], axis=1) * g.N * dual.spacing
    return np.fft.fftshift(bank, axes=1)


def paraproduct_index_mask(block, m: int, n: int, l: int, c0: float) -> np.ndarray:
    """Mask of retained ``k`` in the ordered set with exactly ``l`` blocks ``>= 2 C0 sqrt(n)``."""
    grids = np.meshgrid(*block.ks, indexing="ij")
    norms = []
    for j in range(m):
        norms.append(np.sqrt(sum(grids[j * n + d].astype(float) ** 2 for d in range(n))))
    ordered = np.ones(block.values.shape, dtype=bool)
    for j in range(m - 1):
        ordered &= norms[j] >= norms[j + 1]
    thresh = 2.0 * c0 * math.sqrt(n)
    count = sum((nj >= thresh).astype(int) for nj in norms)
    return block.keep & ordered & (count == l)


def wavelet_paraproduct(
    coeffs: WaveletCoefficients,
    lam: int,
    G,
    l: int,
    gamma: int,
    fs: Sequence[GridFunction],
    pair: WaveletPair | None = None,
    c0: float | None = None,
    band: float | None = None,
) -> GridFunction:
    """``sum_{k in U_l} b_{G,k} prod_j L^{lam,gamma}_{G_j,k_j} f_j``.

    With ``band`` given the inputs are taken to be band-limited to
    ``|xi| <= band``; translates whose dilated wavelet misses that ball
    contribute exactly zero and are skipped.
    """
    grid, m, n = _inputs(fs)
    pair = pair or build_wavelet_pair(coeffs.order)
    c0 = pair.support_radius if c0 is None else c0
    G = tuple(G)
    key = (lam, G)
    if key not in coeffs.blocks:
        raise MissingCoefficients(f"no coefficients stored for level {lam}, type {''.join(G)}")
    block = coeffs.blocks[key]
    mask = paraproduct_index_mask(block, m, n, l, c0)
    if band is not None:
        scale = 2.0 ** (gamma - lam)
        for axis, ks in enumerate(block.ks):
            lo = scale * (ks + pair.left)
            hi = scale * (ks + pair.right)
            hits = (hi > -band) & (lo < band)
            shape = [1] * mask.ndim
            shape[axis] = ks.size
            mask = mask & hits.reshape(shape)
    out = np.zeros(grid.shape, dtype=complex)
    if not np.any(mask):
        return GridFunction(grid, out)
    if m == 2 and n == 1:
        rows = np.nonzero(mask.any(axis=1))[0]
        cols = np.nonzero(mask.any(axis=0))[0]
        B = np.where(mask, block.values, 0.0)[np.ix_(rows, cols)]
        U = localized_bank(fs[0], lam, gamma, G[0], block.ks[0][rows], pair)
        V = localized_bank(fs[1], lam, gamma, G[1], block.ks[1][cols], pair)
        out = np.einsum("kx,kx->x", U, B @ V)
        return GridFunction(grid, out)
    cache = {}
    for pos in zip(*np.nonzero(mask)):
        term = np.full(grid.shape, complex(block.values[pos]))
        for j in range(m):
            kj = tuple(int(block.ks[j * n + d][pos[j * n + d]]) for d in range(n))
            Gj = G[j * n : (j + 1) * n]
            ck = (j, Gj, kj)
            if ck not in cache:
                cache[ck] = localized_piece(fs[j], lam, gamma, Gj, kj, pair).values
            term = term * cache[ck]
        out += term
    return GridFunction(grid, out)
