import math

import numpy as np
import pytest

from multisio import (
    Constant,
    Harmonic,
    OddSignSmooth,
    PowerSingularity,
    RandomPoly,
    SingularityTooStrong,
    UnsupportedDimension,
    Zero,
    level_set_decomposition,
    level_set_piece,
    make_sphere,
    project_mean_zero,
    sphere_lq_norm,
)
from multisio.sphere import omega_at


def test_measures():
    assert make_sphere(2, 64, Zero()).measure == pytest.approx(2 * math.pi, rel=1e-14)
    assert make_sphere(4, 64, Zero()).measure == pytest.approx(2 * math.pi ** 2, rel=1e-12)


def test_s3_second_moment():
    om = make_sphere(4, 64, Zero())
    y1 = om.nodes[..., 0]
    # int y_1^2 over S^3 is |S^3| / 4
    assert float(np.sum(om.weights * y1 ** 2)) == pytest.approx(math.pi ** 2 / 2, rel=1e-12)


def test_harmonic_norms():
    om = make_sphere(2, 128, Harmonic(1))
    assert sphere_lq_norm(om, 2) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert sphere_lq_norm(om, np.inf) == pytest.approx(1.0)
    assert abs(om.integral()) < 1e-14


@pytest.mark.parametrize("spec", [Harmonic(1), Harmonic(3), OddSignSmooth(0.1), PowerSingularity(0.5)])
@pytest.mark.parametrize("mn", [2, 4])
def test_odd_densities_have_mean_zero(spec, mn):
    om = make_sphere(mn, 64, spec)
    scale = float(np.sum(om.weights * np.abs(om.values)))
    assert abs(om.integral()) <= 1e-13 * scale


def test_projection():
    om = make_sphere(2, 64, RandomPoly(2, 3))
    p = project_mean_zero(om)
    assert abs(p.integral()) < 1e-13
    assert np.array_equal(project_mean_zero(p).values, p.values)
    c = project_mean_zero(make_sphere(2, 64, Constant(2.0)))
    assert np.all(c.values == 0.0)


def test_power_singularity():
    with pytest.raises(SingularityTooStrong):
        make_sphere(2, 64, PowerSingularity(1.0))
    spec = PowerSingularity(0.5)
    assert spec.admissible(1.5) and not spec.admissible(2.0)


def test_unsupported_dimension():
    with pytest.raises(UnsupportedDimension):
        make_sphere(3, 64, Zero())
    with pytest.raises(ValueError):
        make_sphere(2, 10, Zero())


def test_level_sets():
    om = make_sphere(2, 64, Harmonic(1)) * 9.0
    pieces = level_set_decomposition(om)
    # peak 9 needs levels 0..3 (2^4 >= 9)
    assert len(pieces) == 4
    assert np.array_equal(sum(p.values for p in pieces), om.values)
    p2 = level_set_piece(om, 2)
    nz = np.abs(p2.values[p2.values != 0])
    assert np.all((nz > 4) & (nz <= 8))
    with pytest.raises(ValueError):
        level_set_piece(om, -1)


def test_omega_at_interpolates_nodes():
    for mn in (2, 4):
        om = make_sphere(mn, 64, Harmonic(2))
        pts = om.nodes.reshape(-1, mn)[::37]
        vals = om.values.reshape(-1)[::37]
        assert np.allclose(omega_at(om, 2.5 * pts), vals, atol=1e-12)


def test_omega_at_smooth_accuracy():
    om = make_sphere(2, 256, Harmonic(1))
    t = np.linspace(0.1, 6.0, 50)
    y = np.stack([np.cos(t), np.sin(t)], axis=-1)
    assert np.max(np.abs(omega_at(om, y) - np.cos(t))) < 1e-3
