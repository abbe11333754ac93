import math

import numpy as np
import pytest
from scipy import integrate

from multisio import (
    BandExceedsNyquist,
    Gaussian,
    GridFunction,
    GridMismatch,
    Harmonic,
    Indicator,
    MissingCoefficients,
    MultiplierSymbol,
    RadiusOutOfRange,
    Zero,
    apply_multiplier,
    apply_truncated_sio_polar,
    apply_truncated_sio_quadrature,
    fourier_transform,
    hardy_littlewood,
    lacunary_maximal,
    lacunary_multiplier,
    localized_piece,
    lp_norm,
    make_grid,
    make_sphere,
    maximal_averages,
    maximal_truncated,
    random_band_limited,
    sample,
    sharp_maximal,
    wavelet_paraproduct,
)
from multisio.freq import eta
from multisio.kernels import outer_radius, resolvable_window
from multisio.operators import (
    ball_volume,
    kernel_grid,
    lattice_sum,
    truncated_symbols,
)
from multisio.wavelets import build_wavelet_pair, decompose

# dblquad value of the truncated operator at x = 0.5 (Gaussians of width 1 centred at 0 and 0.5,
# Omega = cos, eps = 1/4, smooth outer cutoff at R = 4)
POLAR_ORACLE_X05 = 1.7132662588155847


@pytest.fixture(scope="module")
def setup256():
    g = make_grid(1, 256, 16.0)
    fs = [sample(Gaussian(0.0, 1.0), g), sample(Gaussian(0.5, 1.0), g)]
    om = make_sphere(2, 256, Harmonic(1))
    return g, fs, om


def _dblquad(x, R):
    f1 = lambda y: np.exp(-np.pi * (x - y) ** 2)
    f2 = lambda y: np.exp(-np.pi * (x - y - 0.5) ** 2)

    def integrand(th, r):
        return np.cos(th) / r * eta(r / R) * f1(r * np.cos(th)) * f2(r * np.sin(th))

    return integrate.dblquad(integrand, 0.25, 2 * R, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-12)[0]


def test_polar_route_matches_adaptive_quadrature(setup256):
    g, fs, om = setup256
    R = outer_radius(kernel_grid(g, 2))
    out = apply_truncated_sio_polar(om, 0.25, fs).value
    for x in (0.5, -1.0):
        assert out.at(x).real == pytest.approx(_dblquad(x, R), abs=1e-10)
    assert out.at(0.5).real == pytest.approx(POLAR_ORACLE_X05, abs=1e-10)


def test_multiplier_route_equals_lattice_route(setup256):
    g, fs, om = setup256
    lat = apply_truncated_sio_quadrature(om, 0.25, fs).value
    sym = truncated_symbols(om, [0.25], g, 2)[0.25]
    mul = apply_multiplier(sym, fs).value
    assert lp_norm(mul - lat, 2) / lp_norm(lat, 2) <= 1e-12


def test_lattice_sum_direct():
    g = make_grid(1, 16, 4.0)
    rng = np.random.default_rng(0)
    fs = [GridFunction(g, rng.standard_normal(16)) for _ in range(2)]
    k = np.zeros((16, 16))
    k[9, 6] = 2.0  # offset (1, -2)
    k[8, 11] = -1.0  # offset (0, 3)
    out = lattice_sum(k, fs)
    h2 = g.spacing ** 2
    f1, f2 = fs[0].values, fs[1].values
    i = np.arange(16)
    expected = h2 * (2.0 * f1[(i - 1) % 16] * f2[(i + 2) % 16] - f1[i] * f2[(i - 3) % 16])
    assert np.allclose(out, expected, atol=1e-14)


def test_multiplier_factorized_symbol(pair_inputs, grid1):
    dual = kernel_grid(grid1, 2).dual()
    xi1 = dual.coords()[0]
    sym = GridFunction(dual, np.broadcast_to(np.exp(-np.pi * xi1 ** 2), dual.shape))
    out = apply_multiplier(sym, pair_inputs).value
    f1h = fourier_transform(pair_inputs[0])
    filtered = fourier_transform(GridFunction(f1h.grid, f1h.values * np.exp(-np.pi * f1h.grid.axis() ** 2)),
                                 "inverse")
    assert np.allclose(out.values, filtered.values * pair_inputs[1].values, atol=1e-12)


def test_multiplier_grid_check(pair_inputs):
    wrong = GridFunction(make_grid(2, 64, 1.0), np.ones((64, 64)))
    with pytest.raises(GridMismatch):
        apply_multiplier(wrong, pair_inputs)


def test_maximal_dominates_each_truncation(harmonic1, pair_inputs):
    eps = [0.25, 0.5, 1.0]
    mx = maximal_truncated(harmonic1, pair_inputs, eps).value.values.real
    for e in eps:
        single = np.abs(apply_truncated_sio_quadrature(harmonic1, e, pair_inputs).value.values)
        assert np.all(mx >= single - 1e-13)


def test_sharp_maximal_singleton(harmonic1, pair_inputs, grid1):
    lo, hi = resolvable_window(kernel_grid(grid1, 2))
    a = sharp_maximal(harmonic1, pair_inputs, [hi]).value.values.real
    b = sharp_maximal(harmonic1, pair_inputs, [lo + 1, hi]).value.values.real
    assert np.all(b >= a)
    smooth = sharp_maximal(harmonic1, pair_inputs, [hi], mu=0).value.values
    assert np.all(np.isfinite(smooth))


def test_maximal_averages_radius_range(harmonic1, pair_inputs, grid1):
    with pytest.raises(RadiusOutOfRange):
        maximal_averages(harmonic1, pair_inputs, [grid1.spacing])
    out = maximal_averages(harmonic1, pair_inputs, [0.5, 1.0]).value.values.real
    assert np.all(out >= 0)


def test_hardy_littlewood_indicator():
    g = make_grid(1, 64, 32.0)
    f = sample(Indicator((0.0, 1.0)), g)
    # the ball of radius 1 around 1.5 covers [0.5, 1): measure 1/2 over length 2
    assert hardy_littlewood(f, [1.0]).at(1.5).real == pytest.approx(0.25, abs=1e-12)
    assert ball_volume(1) == pytest.approx(2.0) and ball_volume(2) == pytest.approx(math.pi)


def test_hardy_littlewood_dominates(grid1):
    f = random_band_limited(4, 2.0, grid1)
    out = hardy_littlewood(f, [grid1.spacing / 2, 0.5, 1.0]).values.real
    assert np.all(out >= np.abs(f.values) - 1e-12)


def test_symbol_kinds(grid1):
    dual = kernel_grid(grid1, 2).dual()
    s = MultiplierSymbol.bessel_decay(1.0)
    assert s.value_at_origin() == 1.0 and s.limit_at_infinity() == 0.0
    v = s.on_grid(dual, 2).values.real
    assert v[dual.origin_index] == 1.0
    c = MultiplierSymbol.constant(2.0)
    assert c.limit_at_infinity() == 2.0 and (c * 3.0).c == 6.0
    samp = MultiplierSymbol.from_samples(s.on_grid(dual))
    assert samp.value_at_origin() == 1.0
    with pytest.raises(ValueError):
        samp.on_grid(dual, 1)


def test_lacunary_limits(pair_inputs):
    s = MultiplierSymbol.bessel_decay(1.0)
    prod = pair_inputs[0] * pair_inputs[1]
    e = [lp_norm(lacunary_multiplier(s, nu, pair_inputs).value - prod, 2) for nu in (-6, -8, -10)]
    assert e[0] > e[1] > e[2]
    mx = lacunary_maximal(s, pair_inputs, [-2, 0, 2]).value.values.real
    for nu in (-2, 0, 2):
        assert np.all(mx >= np.abs(lacunary_multiplier(s, nu, pair_inputs).value.values) - 1e-14)


def test_localized_piece_frequency_support():
    g = make_grid(1, 256, 16.0)
    f = random_band_limited(2, 7.5, g)
    pair = build_wavelet_pair(3)
    out = localized_piece(f, 1, 1, ("M",), (3,), pair)
    fh = fourier_transform(out)
    xi = fh.grid.axis()
    lo, hi = 2.0 ** 0 * (3 + pair.left), 2.0 ** 0 * (3 + pair.right)
    assert np.all(np.abs(fh.values[(xi < lo) | (xi > hi)]) < 1e-13)
    with pytest.raises(BandExceedsNyquist):
        localized_piece(f, 0, 2, ("M",), (4,), pair)


def test_paraproduct_matrix_path_matches_loop():
    pair = build_wavelet_pair(3)
    sg = make_grid(2, 256, 16.0)
    r2 = sum(c ** 2 for c in sg.coords())
    # a ring at |xi| ~ 12 puts weight on translates with one large block
    src = GridFunction(sg, np.exp(-np.pi * (np.sqrt(r2) - 12.0) ** 2 / 4.0) * sg.coords()[0])
    coeffs = decompose(src, pair, 0, mu=None)
    g = make_grid(1, 256, 64.0)
    fs = [random_band_limited(j, 0.5, g) for j in range(2)]
    G = ("M", "F")
    fast = wavelet_paraproduct(coeffs, 0, G, 1, -4, fs, pair).values
    # explicit sum over the same index set
    from multisio.operators import paraproduct_index_mask

    blk = coeffs.blocks[(0, G)]
    mask = paraproduct_index_mask(blk, 2, 1, 1, pair.support_radius)
    slow = np.zeros(g.shape, dtype=complex)
    for i, j in zip(*np.nonzero(mask)):
        k1, k2 = int(blk.ks[0][i]), int(blk.ks[1][j])
        slow += blk.values[i, j] * localized_piece(fs[0], 0, -4, ("M",), (k1,), pair).values * \
            localized_piece(fs[1], 0, -4, ("F",), (k2,), pair).values
    assert np.max(np.abs(slow)) > 1e-6
    assert np.allclose(fast, slow, atol=1e-12 * np.max(np.abs(slow)))
    pruned = wavelet_paraproduct(coeffs, 0, G, 1, -4, fs, pair, band=0.5).values
    assert np.allclose(pruned, fast, atol=1e-12 * np.max(np.abs(slow)))
    with pytest.raises(MissingCoefficients):
        wavelet_paraproduct(coeffs, 1, ("M", "M"), 1, 0, fs, pair)


def test_zero_density_gives_zero(pair_inputs):
    om = make_sphere(2, 64, Zero())
    assert np.all(maximal_truncated(om, pair_inputs, [0.5]).value.values == 0)
