"""Fast exact checks of elementary identities, one row per check."""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, dump_config, load_config
from .errors import ConfigError, OriginEvaluation
from .freq import RadialBump, phi_hat, theta_hat_shifted
from .grid import (
    Gaussian,
    GridFunction,
    Indicator,
    fourier_transform,
    lp_norm,
    make_grid,
    random_band_limited,
    sample,
)
from .kernels import kernel_eval
from .operators import (
    MultiplierSymbol,
    apply_multiplier,
    apply_truncated_sio_quadrature,
    hardy_littlewood,
    kernel_grid,
    lacunary_maximal,
    lacunary_multiplier,
    localized_piece,
    maximal_averages,
    maximal_truncated,
    sharp_maximal,
)
from .report import Report
from .sphere import Harmonic, Zero, level_set_decomposition, make_sphere, project_mean_zero
from .wavelets import build_wavelet_pair

__all__ = ["CHECKS", "run_selftest"]


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a))


def _pair_inputs(N: int = 64, T: float = 8.0):
    g = make_grid(1, N, T)
    return g, [sample(Gaussian(0.0, 1.0), g), sample(Gaussian(0.5, 1.5), g)]


def check_fourier_roundtrip():
    g = make_grid(2, 32, 4.0)
    f = sample(Gaussian((0.1, -0.2), 0.7), g)
    back = fourier_transform(fourier_transform(f), "inverse")
    d = _rel(back.values, f.values)
    return d <= 1e-13, d


def check_partition_of_unity():
    bump = RadialBump(2)
    xi = np.geomspace(2.0 ** -6, 2.0 ** 12, 400)[:, None]  # 400 one-coordinate points
    total = theta_hat_shifted(bump, 1, xi) + sum(phi_hat(bump, j, xi) for j in range(1, 16))
    d = float(np.max(np.abs(total - 1.0)))
    return d <= 1e-14, d


def check_wavelet_norms():
    pair = build_wavelet_pair(3)
    d = max(abs(float(np.sum(v ** 2)) * pair.mesh - 1.0) for v in (pair.father, pair.mother))
    return d <= 1e-8, d


def check_mean_zero_projection():
    om = make_sphere(2, 64, Harmonic(2))
    once = project_mean_zero(om)
    twice = project_mean_zero(once)
    d = float(np.max(np.abs(once.values - twice.values)))
    return d == 0.0 and abs(once.integral()) <= 1e-14, d


def check_level_sets_sum():
    om = make_sphere(2, 64, Harmonic(1)) * 9.0
    total = sum(p.values for p in level_set_decomposition(om))
    d = float(np.max(np.abs(total - om.values)))
    return d == 0.0, d


def check_origin_raises():
    om = make_sphere(2, 64, Harmonic(1))
    try:
        kernel_eval(om, [0.0, 0.0])
    except OriginEvaluation:
        return True, 0.0
    return False, 1.0


def check_zero_omega():
    g, fs = _pair_inputs()
    om = make_sphere(2, 64, Zero())
    v = apply_truncated_sio_quadrature(om, 0.25, fs).value.values
    d = float(np.max(np.abs(v)))
    return d == 0.0, d


def check_unit_symbol():
    g, fs = _pair_inputs()
    dual = kernel_grid(g, 2).dual()
    out = apply_multiplier(GridFunction(dual, np.ones(dual.shape)), fs).value.values
    d = _rel(out, fs[0].values * fs[1].values)
    return d <= 1e-10, d


def check_zero_input():
    g, fs = _pair_inputs()
    dual = kernel_grid(g, 2).dual()
    out = apply_multiplier(GridFunction(dual, np.ones(dual.shape)), [fs[0], fs[1] * 0.0]).value.values
    d = float(np.max(np.abs(out)))
    return d == 0.0, d


def check_singleton_eps():
    g, fs = _pair_inputs()
    om = make_sphere(2, 64, Harmonic(1))
    a = maximal_truncated(om, fs, [0.5]).value.values
    b = np.abs(apply_truncated_sio_quadrature(om, 0.5, fs).value.values)
    d = _rel(a.real, b)
    return d <= 1e-10, d


def check_eps_monotone():
    g, fs = _pair_inputs()
    om = make_sphere(2, 64, Harmonic(1))
    a = maximal_truncated(om, fs, [0.5, 1.0]).value.values.real
    b = maximal_truncated(om, fs, [0.25, 0.5, 1.0]).value.values.real
    d = float(np.max(a - b))
    return d <= 0.0, d


def check_sharp_empty():
    g, fs = _pair_inputs()
    om = make_sphere(2, 64, Harmonic(1))
    from .kernels import resolvable_window

    lo, _ = resolvable_window(kernel_grid(g, 2))
    d = float(np.max(np.abs(sharp_maximal(om, fs, [lo]).value.values)))
    return d == 0.0, d


def check_constant_sigma():
    g, fs = _pair_inputs()
    out = lacunary_multiplier(MultiplierSymbol.constant(1.0), 5, fs).value.values
    d = _rel(out, fs[0].values * fs[1].values)
    return d <= 1e-10, d


def check_constant_sigma_maximal():
    g, fs = _pair_inputs()
    out = lacunary_maximal(MultiplierSymbol.constant(1.0), fs, [-2, 0, 3]).value.values.real
    d = _rel(out, np.abs(fs[0].values * fs[1].values))
    return d <= 1e-10, d


def check_hl_constant():
    g = make_grid(1, 64, 8.0)
    f = GridFunction(g, np.full(g.shape, 2.5))
    # h/2 covers only the centre cell, whose measure h matches the ball length 2(h/2)
    out = hardy_littlewood(f, [g.spacing / 2]).values.real
    d = float(np.max(np.abs(out - 2.5)))
    return d <= 1e-12, d


def check_hl_indicator():
    g = make_grid(1, 64, 32.0)
    f = sample(Indicator(((0.0, 1.0),)), g)
    out = hardy_littlewood(f, [1.0])
    d = abs(out.at(1.5).real - 0.25)
    return d <= 1e-12, d


def check_maximal_averages_zero():
    g, fs = _pair_inputs()
    om = make_sphere(2, 64, Zero())
    d = float(np.max(np.abs(maximal_averages(om, fs, [0.5, 1.0]).value.values)))
    return d == 0.0, d


def check_localized_disjoint():
    g = make_grid(1, 256, 16.0)
    f = random_band_limited(3, 0.9, g)  # transform vanishes off |xi| <= 0.9; the wavelet lives on [1, 8]
    out = localized_piece(f, 0, 0, ("M",), (4,), build_wavelet_pair(3))
    d = float(np.max(np.abs(out.values)))
    return d <= 1e-12, d


def check_missing_config():
    with tempfile.TemporaryDirectory() as tmp:
        try:
            load_config(Path(tmp) / "absent.cfg")
        except ConfigError as exc:
            return "absent.cfg" in str(exc), 0.0
    return False, 1.0


def check_lp_norm_constant():
    g = make_grid(1, 64, 8.0)
    d = abs(lp_norm(GridFunction(g, np.ones(g.shape)), 2) - np.sqrt(8.0))
    return d <= 1e-13, d


CHECKS = {
    "fourier_roundtrip": check_fourier_roundtrip,
    "partition_of_unity": check_partition_of_unity,
    "wavelet_unit_norms": check_wavelet_norms,
    "mean_zero_idempotent": check_mean_zero_projection,
    "level_sets_sum": check_level_sets_sum,
    "origin_raises": check_origin_raises,
    "zero_density": check_zero_omega,
    "unit_symbol_product": check_unit_symbol,
    "zero_input": check_zero_input,
    "singleton_eps": check_singleton_eps,
    "eps_set_monotone": check_eps_monotone,
    "sharp_empty_sum": check_sharp_empty,
    "constant_sigma": check_constant_sigma,
    "constant_sigma_maximal": check_constant_sigma_maximal,
    "hl_constant": check_hl_constant,
    "hl_indicator": check_hl_indicator,
    "maximal_averages_zero": check_maximal_averages_zero,
    "localized_disjoint_support": check_localized_disjoint,
    "missing_config": check_missing_config,
    "lp_norm_constant": check_lp_norm_constant,
}


def run_selftest(cfg: ExperimentConfig | None = None) -> Report:
    cfg = cfg or ExperimentConfig()
    rep = Report("selftest", dump_config(cfg))
    tab = rep.table("selftest", [("check", ""), ("passed", ""), ("value", "1")])
    for name, fn in CHECKS.items():
        ok, val = fn()
        tab.add(name, int(bool(ok)), float(val))
    rep.rule("all_checks", "min_ge", "selftest", y="passed", threshold=1)
    return rep.finish()
