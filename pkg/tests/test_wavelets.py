import math

import numpy as np
import pytest

from multisio import DegenerateFit, GridFunction, OrderOutOfRange, ResolutionTooCoarse, make_grid
from multisio.wavelets import (
    TensorIndex,
    build_wavelet_pair,
    coefficient_norms,
    daubechies_filter,
    decay_fit,
    decompose,
    gram_deviation,
    index_sets,
    synthesize,
    tensor_eval,
    tensor_types,
    vanishing_moments,
)


def test_four_tap_filter_closed_form():
    s3 = math.sqrt(3.0)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2.0))
    assert np.allclose(daubechies_filter(2), expected, atol=1e-14)


@pytest.mark.parametrize("moments", [1, 2, 4, 6])
def test_filter_orthogonality(moments):
    h = daubechies_filter(moments)
    assert h.sum() == pytest.approx(math.sqrt(2.0), abs=1e-13)
    for shift in range(0, len(h) // 2):
        dot = float(np.dot(h[2 * shift :], h[: len(h) - 2 * shift]))
        assert dot == pytest.approx(1.0 if shift == 0 else 0.0, abs=1e-12)


@pytest.mark.parametrize("L", [2, 3, 5])
def test_moments_and_norms(L):
    pair = build_wavelet_pair(L)
    assert np.all(vanishing_moments(pair) <= 1e-8)
    for v in (pair.father, pair.mother):
        assert float(np.sum(v ** 2)) * pair.mesh == pytest.approx(1.0, abs=1e-8)
    assert float(np.sum(pair.father)) * pair.mesh == pytest.approx(1.0, abs=1e-10)


def test_support_radius():
    pair = build_wavelet_pair(3)
    assert pair.support_radius == 4.0
    assert pair.left == -3 and pair.right == 4
    assert np.all(pair.evaluate("M", np.array([-3.5, 4.5])) == 0.0)


def test_gram_is_identity():
    assert gram_deviation(build_wavelet_pair(3), 3, 2) <= 1e-6


def test_order_validation():
    with pytest.raises(OrderOutOfRange):
        build_wavelet_pair(0)
    with pytest.raises(OrderOutOfRange):
        build_wavelet_pair(2.5)


def test_tensor_types_and_index():
    assert len(tensor_types(0, 2)) == 4
    assert ("F", "F") not in tensor_types(1, 2)
    with pytest.raises(ValueError):
        TensorIndex(1, ("F", "F"), (0, 0))
    with pytest.raises(ValueError):
        TensorIndex(0, ("F",), (0, 0))


def test_tensor_eval_factorizes():
    pair = build_wavelet_pair(3)
    idx = TensorIndex(1, ("F", "M"), (2, -1))
    pts = np.array([[0.3, -0.7], [1.1, 0.2]])
    expected = 2.0 * pair.evaluate("F", 2 * pts[:, 0] - 2) * pair.evaluate("M", 2 * pts[:, 1] + 1)
    assert np.allclose(tensor_eval(pair, idx, pts), expected, atol=1e-15)


@pytest.fixture(scope="module")
def smooth_source():
    g = make_grid(2, 256, 32.0)
    r2 = sum(c ** 2 for c in g.coords())
    return GridFunction(g, np.exp(-np.pi * r2 / 9.0))


def test_decompose_reconstructs(smooth_source):
    pair = build_wavelet_pair(3)
    coeffs = decompose(smooth_source, pair, 2)
    assert coeffs.bessel_ratio() <= 1.0 + 1e-12
    errs = coeffs.reconstruction_errors()
    assert all(b <= a + 1e-15 for a, b in zip(errs, errs[1:]))
    back = synthesize(coeffs, pair, smooth_source.grid)
    rel = np.linalg.norm(back.values - smooth_source.values) / np.linalg.norm(smooth_source.values)
    assert rel < 5e-3 and errs[-1] < 5e-3


def test_coefficient_norms(smooth_source):
    pair = build_wavelet_pair(3)
    coeffs = decompose(smooth_source, pair, 1, norm_orders=(np.inf, 2.0))
    sup, l2 = coefficient_norms(coeffs, 0, 2.0)
    assert 0 < sup <= l2
    sup3, l3 = coefficient_norms(coeffs, 1, 3.0)
    assert sup3 <= l3


def test_decompose_resolution_guard():
    g = make_grid(2, 16, 4.0)
    with pytest.raises(ResolutionTooCoarse):
        decompose(GridFunction(g, np.ones(g.shape)), build_wavelet_pair(3), 3)


def test_index_sets_partition():
    part = index_sets(0, 3, 1.0, 2, 1)
    union = frozenset().union(*part.parts.values())
    assert union == part.universe
    # brute force: ordered pairs |k1| >= |k2| with 2 <= |k| <= 32
    brute = {(a, b) for a in range(-32, 33) for b in range(-32, 33)
             if 2 <= math.hypot(a, b) <= 32 and abs(a) >= abs(b)}
    assert part.universe == brute
    assert part.level_of((10, 0)) == 1 and part.level_of((10, 9)) == 2


def test_decay_fit():
    fit = decay_fit({lam: 2.0 ** (-1.5 * lam) for lam in range(5)})
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    fit2 = decay_fit({(0, mu): 3.0 * 2.0 ** -mu for mu in range(4, 8)}, axis="mu")
    assert fit2.slope == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(DegenerateFit):
        decay_fit({0: 1.0, 1: 0.0, 2: 1.0})
    with pytest.raises(DegenerateFit):
        decay_fit({0: 1.0, 1: 0.5})
