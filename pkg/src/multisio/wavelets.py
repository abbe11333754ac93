"""Compactly supported orthonormal wavelets and tensor-product expansions.

The 1D pair (father ``F``, mother ``M``) is the Daubechies family with
``L + 1`` vanishing moments, realized from its scaling filter and refined
by the cascade algorithm onto a dyadic mesh. Both functions are shifted by
an integer so that their supports sit in ``[-(L), L + 1]``; integer shifts
only relabel translates, so the multiresolution structure is untouched.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateFit,
    MissingCoefficients,
    OrderOutOfRange,
    ResolutionTooCoarse,
)
from .grid import GridFunction

__all__ = [
    "WaveletPair",
    "TensorIndex",
    "WaveletCoefficients",
    "daubechies_filter",
    "build_wavelet_pair",
    "tensor_eval",
    "decompose",
    "coefficient_norms",
    "index_sets",
    "decay_fit",
    "vanishing_moments",
    "gram_deviation",
]


def daubechies_filter(n_moments: int) -> np.ndarray:
    """Minimum-phase Daubechies scaling filter with ``n_moments`` vanishing moments.

    Normalized so that ``sum(h) == sqrt(2)``. Built by spectral factorization
    of the Daubechies polynomial ``P(y) = sum_k C(N-1+k, k) y^k``.
    """
    N = int(n_moments)
    if N < 1:
        raise OrderOutOfRange(f"need at least one vanishing moment, got {N}")
    if N == 1:
        return np.array([1.0, 1.0]) / math.sqrt(2.0)
    # P(y) in increasing powers; numpy.roots wants decreasing.
    coeffs = [math.comb(N - 1 + k, k) for k in range(N)]
    y_roots = np.roots(coeffs[::-1])
    z_roots = []
    for y in y_roots:
        # y = (2 - z - 1/z) / 4  <=>  z^2 - (2 - 4y) z + 1 = 0
        b = 2.0 - 4.0 * y
        disc = np.sqrt(b * b - 4.0 + 0j)
        z1, z2 = (b + disc) / 2.0, (b - disc) / 2.0
        z_roots.append(z1 if abs(z1) < 1.0 else z2)
    poly = np.array([1.0 + 0j])
    for _ in range(N):
        poly = np.convolve(poly, [1.0, 1.0])
    for z in z_roots:
        poly = np.convolve(poly, [1.0, -z])
    h = np.real(poly)[::-1]
    h = h * (math.sqrt(2.0) / h.sum())
    # Minimum-phase convention: large taps first.
    if abs(h[0]) < abs(h[-1]):
        h = h[::-1]
    return h


def _cascade(h: np.ndarray, levels: int) -> np.ndarray:
    """Values of the scaling function on the mesh ``i / 2**levels`` of its support."""
    n_taps = len(h)
    support = n_taps - 1
    # Integer values: eigenvector of M[i, j] = sqrt(2) h[2i - j] for eigenvalue 1.
    size = support + 1
    M = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            k = 2 * i - j
            if 0 <= k < n_taps:
                M[i, j] = math.sqrt(2.0) * h[k]
    w, v = np.linalg.eig(M)
    idx = int(np.argmin(np.abs(w - 1.0)))
    phi = np.real(v[:, idx])
    phi = phi / phi.sum()
    phi[0] = phi[-1] = 0.0
    sqrt2h = math.sqrt(2.0) * h
    for level in range(1, levels + 1):
        step = 2 ** level
        new = np.zeros(support * step + 1)
        new[::2] = phi
        # odd mesh points: phi(x) = sqrt2 sum_k h_k phi(2x - k), 2x on the old mesh
        prev_step = step // 2
        odd = np.arange(1, support * step, 2)
        acc = np.zeros(odd.size)
        for k, hk in enumerate(sqrt2h):
            src = odd - k * prev_step
            ok = (src >= 0) & (src < phi.size)
            acc[ok] += hk * phi[src[ok]]
        new[1::2] = acc
        phi = new
    return phi


@dataclass(frozen=True, eq=False)
class WaveletPair:
    """Father/mother wavelets sampled on the dyadic mesh ``2**-levels``.

    ``father[i]`` and ``mother[i]`` are the values at ``left + i * 2**-levels``.
    """

    order: int
    levels: int
    left: int
    father: np.ndarray = field(repr=False)
    mother: np.ndarray = field(repr=False)
    filter: np.ndarray = field(repr=False)

    @property
    def mesh(self) -> float:
        return 2.0 ** -self.levels

    @property
    def right(self) -> int:
        return self.left + len(self.filter) - 1

    @property
    def support_radius(self) -> float:
        """Smallest C with both supports inside ``{|x| <= C}``."""
        return float(max(-self.left, self.right))

    @property
    def nodes(self) -> np.ndarray:
        return self.left + np.arange(self.father.size) * self.mesh

    def evaluate(self, kind: str, x) -> np.ndarray:
        """Evaluate ``psi_F`` (kind ``"F"``) or ``psi_M`` (``"M"``) at arbitrary points.

        Values between mesh nodes are linearly interpolated; outside the
        support the result is exactly 0.
        """
        table = self.father if kind == "F" else self.mother
        x = np.asarray(x, dtype=float)
        t = (x - self.left) * (2.0 ** self.levels)
        out = np.zeros(x.shape)
        inside = (t >= 0) & (t <= table.size - 1)
        ti = t[inside]
        i0 = np.minimum(np.floor(ti).astype(np.int64), table.size - 2)
        frac = ti - i0
        out[inside] = table[i0] * (1.0 - frac) + table[i0 + 1] * frac
        return out

    def sample_level(self, kind: str, level: int, shift: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Exact samples of ``2**(level/2) psi(2**level x - shift)`` on the mesh.

        The mesh is ``2**-(self.levels)``; returns ``(x, values)``. Exact
        because ``2**level x - shift`` lands on the cascade mesh.
        """
        if level < 0 or level > self.levels:
            raise ValueError("level outside the cascade range")
        table = self.father if kind == "F" else self.mother
        stride = 2 ** level
        # x_i = (left + shift) / 2**level + i * 2**-levels ; values need table at i*... with
        # t = 2**level x - shift - left in units of 2**-levels -> index i * stride.
        n = (table.size - 1) // stride + 1
        vals = table[: (n - 1) * stride + 1 : stride]
        x = (self.left + shift) / stride + np.arange(vals.size) * (self.mesh)
        return x, vals * 2.0 ** (level / 2.0)


@lru_cache(maxsize=16)
def _pair_cached(L: int, levels: int) -> WaveletPair:
    h = daubechies_filter(L + 1)
    phi = _cascade(h, levels)
    n_taps = len(h)
    support = n_taps - 1
    step = 2 ** levels
    g = np.array([(-1) ** k * h[n_taps - 1 - k] for k in range(n_taps)])
    # psi(x) = sqrt2 sum_k g_k phi(2x - k) on the same support [0, support].
    psi = np.zeros_like(phi)
    xi = np.arange(phi.size)  # units of 2**-levels
    for k, gk in enumerate(g):
        # phi(2x - k): index in phi table = 2*i - k*step
        src = 2 * xi - k * step
        ok = (src >= 0) & (src < phi.size)
        psi[ok] += math.sqrt(2.0) * gk * phi[src[ok]]
    left = -((support - 1) // 2)
    phi.setflags(write=False)
    psi.setflags(write=False)
    h.setflags(write=False)
    return WaveletPair(order=L, levels=levels, left=left, father=phi, mother=psi, filter=h)


def build_wavelet_pair(L: int, levels: int = 14) -> WaveletPair:
    """Daubechies pair with ``L + 1`` vanishing moments (``int x^a psi_M = 0`` for ``a <= L``)."""
    if not isinstance(L, (int, np.integer)) or not 1 <= L <= 10:
        raise OrderOutOfRange(f"L must be an integer in [1, 10], got {L!r}")
    if levels < 12:
        raise ValueError("cascade needs at least 12 dyadic levels")
    return _pair_cached(int(L), int(levels))


# ---------------------------------------------------------------------------
# Tensor products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorIndex:
    """``(lam, G, k)`` labelling ``Psi^lam_{G,k}(xi) = prod_i 2^(lam/2) psi_{G_i}(2^lam xi_i - k_i)``."""

    lam: int
    G: tuple
    k: tuple

    def __post_init__(self):
        G = tuple(self.G) if not isinstance(self.G, str) else tuple(self.G)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if len(G) != len(self.k):
            raise ValueError("G and k must have the same length")
        if any(g not in ("F", "M") for g in G):
            raise ValueError(f"G entries must be 'F' or 'M', got {G}")
        if self.lam >= 1 and all(g == "F" for g in G):
            raise ValueError("for lam >= 1 the all-father type is excluded")


def tensor_types(lam: int, dim: int) -> list[tuple]:
    """``I`` for ``lam == 0``; ``I`` minus the all-father type for ``lam >= 1``."""
    types = list(itertools.product("FM", repeat=dim))
    if lam >= 1:
        types = [G for G in types if any(g == "M" for g in G)]
    return types


def tensor_eval(pair: WaveletPair, idx: TensorIndex, xi) -> np.ndarray:
    """Evaluate ``Psi^lam_{G,k}`` at points ``xi`` of shape ``(..., dim)``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != len(idx.G):
        raise ValueError("point dimension does not match the index")
    out = np.ones(xi.shape[:-1])
    scale = 2.0 ** idx.lam
    for d, (g, k) in enumerate(zip(idx.G, idx.k)):
        out = out * (np.sqrt(scale) * pair.evaluate(g, scale * xi[..., d] - k))
    return out


# ---------------------------------------------------------------------------
# Coefficient extraction
# ---------------------------------------------------------------------------


def _k_range(pair: WaveletPair, lam: int, lo: float, hi: float) -> np.ndarray:
    """Translates ``k`` whose level-``lam`` support meets ``[lo, hi]``."""
    s = 2.0 ** lam
    k_min = math.ceil(s * lo - pair.right)
    k_max = math.floor(s * hi - pair.left)
    return np.arange(k_min, k_max + 1)


@lru_cache(maxsize=64)
def _hat_pattern(pair: WaveletPair, kind: str, lam: int, spacing: float, frac: float):
    """Integrals of ``2^(lam/2) psi(2^lam xi - k)`` against the hat functions of a grid.

    ``frac`` is the offset (in cells) of the support's left end past a grid
    node; returns weights for nodes ``0, 1, ...`` counted from that node.
    """
    table = pair.father if kind == "F" else pair.mother
    cell = spacing * 2.0 ** lam  # one grid cell in units of the unscaled variable
    sub = min(pair.levels, max(8, math.ceil(math.log2(64.0 / cell))))
    stride = 2 ** (pair.levels - sub)
    vals = table[::stride]
    t = np.arange(vals.size) * 2.0 ** -sub
    u = frac + t / cell
    j = np.floor(u).astype(np.int64)
    a = u - j
    size = int(j.max()) + 2
    w = np.bincount(j, vals * (1.0 - a), minlength=size) + np.bincount(j + 1, vals * a, minlength=size)
    return w * (2.0 ** -sub) * 2.0 ** (-lam / 2.0)


def level_matrix(pair: WaveletPair, kind: str, lam: int, axis: np.ndarray, rule: str = "hat"):
    """Sparse ``(K, N)`` matrix whose rows give the coefficients against grid samples.

    ``rule="hat"`` integrates each wavelet exactly against the piecewise-linear
    interpolant of the samples; ``rule="point"`` is the plain Riemann sum
    ``spacing * Psi(xi_i)``. Returns ``(ks, matrix)``.
    """
    spacing = float(axis[1] - axis[0])
    n = axis.size
    ks = _k_range(pair, lam, axis[0], axis[-1])
    rows, cols, data = [], [], []
    s = 2.0 ** lam
    if rule == "hat":
        start = (ks + pair.left) / s
        u = (start - axis[0]) / spacing
        i0 = np.floor(u).astype(np.int64)
        fr = np.round(u - i0, 12)
        for r, (base, f) in enumerate(zip(i0, fr)):
            w = _hat_pattern(pair, kind, lam, spacing, float(f))
            idx = base + np.arange(w.size)
            ok = (idx >= 0) & (idx < n) & (w != 0.0)
            rows.append(np.full(int(ok.sum()), r))
            cols.append(idx[ok])
            data.append(w[ok])
    elif rule == "point":
        for r, k in enumerate(ks):
            lo = max(0, int(math.floor(((k + pair.left) / s - axis[0]) / spacing)))
            hi = min(n, int(math.ceil(((k + pair.right) / s - axis[0]) / spacing)) + 1)
            idx = np.arange(lo, hi)
            v = np.sqrt(s) * pair.evaluate(kind, s * axis[idx] - k) * spacing
            ok = v != 0.0
            rows.append(np.full(int(ok.sum()), r))
            cols.append(idx[ok])
            data.append(v[ok])
    else:
        raise ValueError(f"rule must be 'hat' or 'point', got {rule!r}")
    mat = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ks.size, n),
    )
    return ks, mat


def sample_matrix(pair: WaveletPair, kind: str, lam: int, axis: np.ndarray):
    """Sparse ``(K, N)`` matrix of point values ``2^(lam/2) psi(2^lam xi_i - k)``."""
    spacing = float(axis[1] - axis[0])
    ks, mat = level_matrix(pair, kind, lam, axis, rule="point")
    return ks, mat / spacing


def _mode_product(x: np.ndarray, mat, axis: int) -> np.ndarray:
    x = np.moveaxis(x, axis, 0)
    shape = x.shape
    y = mat @ x.reshape(shape[0], -1)
    y = np.asarray(y).reshape((mat.shape[0],) + shape[1:])
    return np.moveaxis(y, 0, axis)


def _pl_norm_sq(values: np.ndarray, spacing: float) -> float:
    """Squared ``L^2`` norm of the multilinear interpolant of grid samples.

    The 1D hat mass matrix is ``spacing * tridiag(1/6, 2/3, 1/6)``; its tensor
    power is applied through shifted inner products.
    """
    d = values.ndim
    coef = {-1: 1.0 / 6.0, 0: 2.0 / 3.0, 1: 1.0 / 6.0}
    total = 0.0
    for shift in itertools.product((-1, 0, 1), repeat=d):
        c = math.prod(coef[s] for s in shift)
        a_sl, b_sl = [], []
        for s in shift:
            if s == 0:
                a_sl.append(slice(None))
                b_sl.append(slice(None))
            elif s == 1:
                a_sl.append(slice(None, -1))
                b_sl.append(slice(1, None))
            else:
                a_sl.append(slice(1, None))
                b_sl.append(slice(None, -1))
        total += c * float(np.real(np.vdot(values[tuple(a_sl)], values[tuple(b_sl)])))
    return total * spacing ** d


@dataclass
class CoefficientBlock:
    """Dense coefficients of one ``(lam, G)`` pair on the box of translates ``k``."""

    lam: int
    G: tuple
    ks: tuple  # one integer array of translates per axis
    values: np.ndarray = field(repr=False)
    keep: np.ndarray = field(repr=False)  # support-filter mask

    def retained(self) -> np.ndarray:
        return self.values[self.keep]

    def entries(self):
        """Yield ``(TensorIndex, b)`` for retained nonzero coefficients."""
        for pos in zip(*np.nonzero(self.keep & (self.values != 0))):
            k = tuple(int(self.ks[d][p]) for d, p in enumerate(pos))
            yield TensorIndex(self.lam, self.G, k), complex(self.values[pos])


@dataclass
class WaveletCoefficients:
    """Coefficients of a frequency-side source in the tensor wavelet basis.

    ``blocks`` maps ``(lam, G)`` to :class:`CoefficientBlock` (dropped when
    the decomposition is run with ``keep_blocks=False``). ``norms`` caches
    ``norms[lam][p] = max over G of the l^p norm over k``.
    """

    source: str
    mu: int | None
    lam_max: int
    order: int
    rule: str
    blocks: dict = field(default_factory=dict, repr=False)
    norms: dict = field(default_factory=dict)
    energy: list = field(default_factory=list)  # retained sum |b|^2 per level
    source_norm_sq: float = 0.0  # Riemann-sum ||source||^2
    interp_norm_sq: float = 0.0  # ||interpolant||^2
    max_discarded: float = 0.0
    n_discarded: int = 0

    def captured(self, lam_max: int | None = None) -> float:
        top = self.lam_max if lam_max is None else lam_max
        return float(sum(self.energy[: top + 1]))

    def bessel_ratio(self) -> float:
        """``sum |b|^2 / ||source||^2`` (Riemann norm); at most 1 for an orthonormal system."""
        if self.source_norm_sq == 0.0:
            return 0.0
        return self.captured() / self.source_norm_sq

    def reconstruction_errors(self) -> list[float]:
        """Relative ``L^2`` error of the truncated expansion for each ``lam_max``.

        Uses Pythagoras for the orthonormal system: the squared residual of
        the interpolated source is ``||H||^2 - sum |b|^2``.
        """
        if self.interp_norm_sq == 0.0:
            return [0.0] * (self.lam_max + 1)
        out = []
        acc = 0.0
        for e in self.energy:
            acc += e
            out.append(math.sqrt(max(0.0, self.interp_norm_sq - acc) / self.interp_norm_sq))
        return out

    def entries(self):
        for key in sorted(self.blocks, key=lambda t: (t[0], t[1])):
            yield from self.blocks[key].entries()

    def to_csv(self, path) -> None:
        """Dump retained coefficients: ``lam,G,k,b_re,b_im`` with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            fh.write("lam,G,k,b_re,b_im\n")
            for idx, b in self.entries():
                k = ";".join(str(v) for v in idx.k)
                fh.write(f"{idx.lam},{''.join(idx.G)},{k},{b.real:.17g},{b.imag:.17g}\n")


def _lp(values: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    return float(np.sum(a ** p) ** (1.0 / p))


def decompose(
    source: GridFunction,
    pair: WaveletPair,
    lam_max: int,
    mu: int | None = None,
    *,
    rule: str = "hat",
    norm_orders=(np.inf, 2.0),
    keep_blocks: bool = True,
    support_filter: bool = True,
    label: str = "source",
) -> WaveletCoefficients:
    """Expand a frequency-side source in the tensor wavelet basis up to level ``lam_max``.

    With ``mu`` given and ``support_filter`` on, coefficients with
    ``|k|`` outside ``[2^(lam+mu-2), 2^(lam+mu+2)]`` are dropped and the
    largest dropped magnitude is recorded.
    """
    if not 0 <= lam_max <= 5:
        raise ValueError(f"lam_max must be in [0, 5], got {lam_max}")
    grid = source.grid
    spacing = grid.spacing
    width = (pair.right - pair.left) * 2.0 ** -lam_max
    if width / spacing < 8.0:
        raise ResolutionTooCoarse(
            f"{width / spacing:.2f} nodes per wavelet support at level {lam_max}; need >= 8"
        )
    axis = grid.axis()
    values = source.values
    out = WaveletCoefficients(
        source=label, mu=mu, lam_max=lam_max, order=pair.order, rule=rule
    )
    out.source_norm_sq = float(np.real(np.vdot(values, values))) * grid.cell_volume
    out.interp_norm_sq = _pl_norm_sq(values, spacing)
    for lam in range(lam_max + 1):
        mats = {g: level_matrix(pair, g, lam, axis, rule) for g in "FM"}
        level_norms = {p: 0.0 for p in norm_orders}
        level_energy = 0.0
        for G in tensor_types(lam, grid.dim):
            block = values
            for d, g in enumerate(G):
                block = _mode_product(block, mats[g][1], d)
            ks = tuple(mats[g][0] for g in G)
            if mu is not None and support_filter:
                kk = np.sqrt(sum(np.asarray(k, float).reshape(
                    [-1 if i == d else 1 for i in range(grid.dim)]) ** 2
                    for d, k in enumerate(ks)))
                lo, hi = 2.0 ** (lam + mu - 2), 2.0 ** (lam + mu + 2)
                keep = np.broadcast_to((kk >= lo) & (kk <= hi), block.shape)
                dropped = np.abs(block[~keep])
                if dropped.size:
                    out.max_discarded = max(out.max_discarded, float(dropped.max()))
                    out.n_discarded += int(np.count_nonzero(dropped))
            else:
                keep = np.ones(block.shape, dtype=bool)
            kept = block[keep]
            level_energy += float(np.real(np.vdot(kept, kept)))
            for p in norm_orders:
                level_norms[p] = max(level_norms[p], _lp(kept, p))
            if keep_blocks:
                out.blocks[(lam, G)] = CoefficientBlock(lam, G, ks, block, np.array(keep))
            del block
        out.energy.append(level_energy)
        out.norms[lam] = level_norms
    return out


def synthesize(coeffs: WaveletCoefficients, pair: WaveletPair, grid) -> GridFunction:
    """Evaluate ``sum b Psi`` at the nodes of ``grid`` (retained coefficients only)."""
    if not coeffs.blocks:
        raise ValueError("coefficients were computed without keeping blocks")
    axis = grid.axis()
    out = np.zeros(grid.shape, dtype=complex)
    cache = {}
    for (lam, G), blk in coeffs.blocks.items():
        for g in set(G):
            if (lam, g) not in cache:
                cache[(lam, g)] = sample_matrix(pair, g, lam, axis)
        part = np.where(blk.keep, blk.values, 0.0)
        for d, g in enumerate(G):
            ks, mat = cache[(lam, g)]
            if not np.array_equal(ks, blk.ks[d]):
                raise ValueError("synthesis grid differs from the decomposition grid")
            part = _mode_product(part, mat.T.tocsr(), d)
        out += part
    return GridFunction(grid, out)


def coefficient_norms(coeffs: WaveletCoefficients, lam: int, q: float) -> tuple[float, float]:
    """``(l^inf, l^q)`` norms over ``k`` at level ``lam`` (max over ``G``)."""
    if lam in coeffs.norms and np.inf in coeffs.norms[lam] and q in coeffs.norms[lam]:
        return coeffs.norms[lam][np.inf], coeffs.norms[lam][q]
    blocks = [b for (l, _), b in coeffs.blocks.items() if l == lam]
    if not blocks:
        if lam in coeffs.norms or lam > coeffs.lam_max:
            raise MissingCoefficients(f"no stored coefficients at level {lam} for order {q}")
        return 0.0, 0.0
    sup = max(_lp(b.retained(), np.inf) for b in blocks)
    lq = max(_lp(b.retained(), q) for b in blocks)
    return sup, lq


def entry_norms(values, q: float) -> tuple[float, float]:
    """``(l^inf, l^q)`` of an explicit finite set of coefficients."""
    v = np.asarray(list(values), dtype=complex)
    return _lp(v, np.inf), _lp(v, q)


# ---------------------------------------------------------------------------
# Index sets and decay fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexPartition:
    """``U`` (ordered lattice points in the dyadic shell) split by the count ``l``
    of leading blocks with ``|k_j| >= 2 C0 sqrt(n)``; ``parts[0]`` holds any
    points with no large block (empty once the shell is wide enough)."""

    scale: int
    m: int
    n: int
    c0: float
    universe: frozenset
    parts: dict

    def level_of(self, k) -> int | None:
        k = tuple(int(v) for v in k)
        for l, s in self.parts.items():
            if k in s:
                return l
        return None


def _block_norms(k: tuple, m: int, n: int) -> list[float]:
    return [math.sqrt(sum(v * v for v in k[j * n : (j + 1) * n])) for j in range(m)]


def index_sets(lam: int, mu: int, c0: float, m: int, n: int) -> IndexPartition:
    """Enumerate ``U^(lam+mu)`` and its split into ``U_l``, ``l = 1..m``."""
    scale = lam + mu
    lo, hi = 2.0 ** (scale - 2), 2.0 ** (scale + 2)
    bound = int(math.floor(hi))
    thresh = 2.0 * c0 * math.sqrt(n)
    universe = set()
    parts = {l: set() for l in range(m + 1)}
    rng = range(-bound, bound + 1)
    for k in itertools.product(rng, repeat=m * n):
        r = math.sqrt(sum(v * v for v in k))
        if r < lo or r > hi:
            continue
        bn = _block_norms(k, m, n)
        if any(bn[j] < bn[j + 1] for j in range(m - 1)):
            continue
        universe.add(k)
        l = sum(1 for b in bn if b >= thresh)
        parts[l].add(k)
    return IndexPartition(
        scale, m, n, c0, frozenset(universe), {l: frozenset(s) for l, s in parts.items()}
    )


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    points: int


def decay_fit(norm_table: dict, axis: str = "lam") -> DecayFit:
    """Least-squares slope of ``log2(norm)`` against the table keys.

    ``norm_table`` maps a scalar key (or ``(lam, mu)`` pairs, with ``axis``
    selecting the component) to a positive norm.
    """
    xs, ys = [], []
    for key, val in sorted(norm_table.items()):
        x = key if np.isscalar(key) else key[0 if axis == "lam" else 1]
        if not val > 0:
            raise DegenerateFit(f"norm at {key} is {val}; cannot take log2")
        xs.append(float(x))
        ys.append(math.log2(val))
    if len(xs) < 3:
        raise DegenerateFit(f"need at least 3 points, got {len(xs)}")
    (slope, intercept), res, *_ = np.polyfit(xs, ys, 1, full=True)
    residual = float(math.sqrt(res[0] / len(xs))) if len(res) else 0.0
    return DecayFit(float(slope), float(intercept), residual, len(xs))


# ---------------------------------------------------------------------------
# Orthonormality diagnostics
# ---------------------------------------------------------------------------


def vanishing_moments(pair: WaveletPair, max_power: int | None = None) -> np.ndarray:
    """``|int x^a psi_M(x) dx|`` for ``a = 0..max_power`` (default ``L``), by the mesh sum."""
    top = pair.order if max_power is None else int(max_power)
    x = pair.nodes
    return np.array([abs(float(np.sum(x ** a * pair.mother)) * pair.mesh) for a in range(top + 1)])


def _level_table(pair: WaveletPair, kind: str, lam: int) -> np.ndarray:
    """Mesh values of ``2^(lam/2) psi(2^lam x)`` starting at ``x = left / 2^lam``."""
    return pair.sample_level(kind, lam)[1]


def _cross_products(pair: WaveletPair, k1: str, lam1: int, k2: str, lam2: int) -> dict:
    """``d -> <2^(lam1/2) psi_k1(2^lam1 x), 2^(lam2/2) psi_k2(2^lam2 x - d)>`` for ``lam1 <= lam2``.

    By translation the inner product of the ``(lam1, k1)`` and ``(lam2, k2)``
    translates depends only on ``d = k2 - 2^(lam2 - lam1) k1``; offsets with
    disjoint supports are omitted.
    """
    a = _level_table(pair, k1, lam1)
    b = _level_table(pair, k2, lam2)
    step = 2 ** (pair.levels - lam2)  # mesh nodes per unit shift at level lam2
    # both tables start at left / 2^lam on the mesh; express starts in mesh units
    start_a = pair.left * 2 ** (pair.levels - lam1)
    start_b0 = pair.left * step
    out = {}
    width = (pair.right - pair.left)
    d_lo = math.floor((pair.left - pair.right) * 2 ** (lam2 - lam1)) - width
    d_hi = -d_lo
    for d in range(d_lo, d_hi + 1):
        off = start_b0 + d * step - start_a
        lo = max(0, off)
        hi = min(a.size, off + b.size)
        if hi <= lo:
            continue
        out[d] = float(np.dot(a[lo:hi], b[lo - off : hi - off])) * pair.mesh
    return out


def gram_deviation(pair: WaveletPair, lam_max: int, dim: int = 2) -> float:
    """Largest entrywise ``|<Psi, Psi'> - delta|`` over the tensor basis up to level ``lam_max``.

    Tensor inner products factor into one-dimensional ones, each a function
    of a single relative offset, so the maximum over all translates reduces
    to products of the 1D tables.
    """
    levels = [(lam, G) for lam in range(lam_max + 1) for G in tensor_types(lam, dim)]
    cache = {}

    def table(k1, l1, k2, l2):
        key = (k1, l1, k2, l2)
        if key not in cache:
            cache[key] = _cross_products(pair, k1, l1, k2, l2)
        return cache[key]

    worst = 0.0
    for i, (l1, G1) in enumerate(levels):
        for l2, G2 in levels[i:]:
            tabs = [table(a, l1, b, l2) for a, b in zip(G1, G2)]
            same = (l1, G1) == (l2, G2)
            # the identity entry sits at all-zero offsets of identical elements
            vecs = [np.array([t[d] for d in sorted(t)]) for t in tabs]
            zero = [sorted(t).index(0) if 0 in t else None for t in tabs]
            prod = vecs[0]
            for v in vecs[1:]:
                prod = np.multiply.outer(prod, v)
            dev = np.abs(prod)
            if same and all(z is not None for z in zero):
                dev[tuple(zero)] = abs(prod[tuple(zero)] - 1.0)
            worst = max(worst, float(dev.max()))
    return worst
