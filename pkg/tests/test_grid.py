import numpy as np
import pytest

from multisio import (
    BandExceedsNyquist,
    Bump,
    BumpTooWide,
    Gaussian,
    GridFunction,
    GridMismatch,
    Indicator,
    ModulatedGaussian,
    NonPositiveExtent,
    OddN,
    fourier_transform,
    lp_norm,
    make_grid,
    random_band_limited,
    refine,
    sample,
    weak_lq_quasinorm,
)


def test_make_grid_validates():
    with pytest.raises(OddN):
        make_grid(1, 63, 8.0)
    with pytest.raises(NonPositiveExtent):
        make_grid(1, 64, 0.0)
    with pytest.raises(ValueError):
        make_grid(1, 4, 8.0)


def test_grid_geometry():
    g = make_grid(2, 64, 8.0)
    assert g.spacing == 0.125
    assert g.shape == (64, 64)
    assert g.nyquist == 4.0
    assert g.axis()[0] == -4.0 and g.axis()[32] == 0.0
    d = g.dual()
    assert d.spacing == pytest.approx(1 / 8.0)
    assert d.dual() == g


def test_gaussian_is_self_dual():
    # N = T^2 makes the dual grid coincide with the space grid
    g = make_grid(1, 256, 16.0)
    f = sample(Gaussian(0.0, 1.0), g)
    fh = fourier_transform(f)
    assert np.max(np.abs(fh.values - f.values)) < 1e-12


def test_modulated_gaussian_shifts_spectrum():
    g = make_grid(1, 128, 16.0)
    fh = fourier_transform(sample(ModulatedGaussian(0.0, 1.0, 1.0), g))
    assert fh.at(1.0) == pytest.approx(1.0, abs=1e-12)


def test_fourier_roundtrip_2d():
    g = make_grid(2, 32, 4.0)
    f = sample(Gaussian((0.1, -0.3), 0.6), g)
    back = fourier_transform(fourier_transform(f), "inverse")
    assert np.allclose(back.values, f.values, atol=1e-13)
    with pytest.raises(ValueError):
        fourier_transform(f, "sideways")


def test_plancherel(grid1):
    f = random_band_limited(3, 2.0, grid1)
    assert lp_norm(fourier_transform(f), 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)


def test_bump_and_indicator():
    g = make_grid(1, 64, 8.0)
    b = sample(Bump(0.0, 1.0), g)
    assert b.at(0.0) == 1.0
    assert b.at(1.0) == 0.0
    with pytest.raises(BumpTooWide):
        sample(Bump(0.0, 4.0), g)
    ind = sample(Indicator((0.0, 1.0)), g)
    assert np.sum(ind.values.real) == 8


def test_lp_norm_values():
    g = make_grid(1, 64, 8.0)
    one = GridFunction(g, np.ones(g.shape))
    assert lp_norm(one, 2) == pytest.approx(np.sqrt(8.0), rel=1e-14)
    assert lp_norm(one, np.inf) == 1.0
    assert lp_norm(one, 0.5) == pytest.approx(64.0, rel=1e-14)
    with pytest.raises(ValueError):
        lp_norm(one, 0.0)


def test_weak_norm_of_indicator():
    g = make_grid(1, 64, 8.0)
    ind = sample(Indicator((0.0, 1.0)), g)
    # t |{|f| > t}|^(1/q) peaks just below t = 1 at the full measure 1
    assert weak_lq_quasinorm(ind, 2.0) == pytest.approx(1.0, rel=1e-14)
    assert weak_lq_quasinorm(ind * 0.0, 2.0) == 0.0


def test_weak_norm_below_strong_norm(grid1):
    f = random_band_limited(7, 2.0, grid1)
    for q in (1.0, 1.5, 2.0, 3.0):
        assert weak_lq_quasinorm(f, q) <= lp_norm(f, q) * (1 + 1e-12)


def test_random_band_limited():
    g = make_grid(1, 128, 16.0)
    f = random_band_limited(5, 1.0, g)
    assert lp_norm(f, 2) == pytest.approx(1.0, rel=1e-12)
    fh = fourier_transform(f)
    assert np.all(np.abs(fh.values[np.abs(fh.grid.axis()) > 1.0]) < 1e-12)
    assert np.array_equal(f.values, random_band_limited(5, 1.0, g).values)
    with pytest.raises(BandExceedsNyquist):
        random_band_limited(5, 5.0, g)


def test_refine_interpolates_band_limited():
    g = make_grid(1, 64, 8.0)
    f = random_band_limited(11, 2.0, g)
    f2 = refine(f, 2)
    assert f2.grid.N == 128 and f2.grid.extent == 8.0
    assert np.allclose(f2.values[::2], f.values, atol=1e-13)
    assert lp_norm(f2, 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)


def test_grid_function_arithmetic_checks_grid():
    a = GridFunction(make_grid(1, 64, 8.0), np.ones(64))
    b = GridFunction(make_grid(1, 64, 4.0), np.ones(64))
    with pytest.raises(GridMismatch):
        a + b
    with pytest.raises(GridMismatch):
        GridFunction(make_grid(1, 64, 8.0), np.ones(10))
    assert np.all((a * 2.0 - a).values == 1.0)
    assert np.all(a.roll([3]).values == 1.0)
