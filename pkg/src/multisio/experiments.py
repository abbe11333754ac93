"""Experiment campaigns. Each ``run_*`` returns a :class:`~multisio.report.Report`.

All randomness flows from ``SeedSequence([seed, trial, j])``, so results do
not depend on the order (or the thread) in which trials execute.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .config import ExperimentConfig, dump_config, omega_spec
from .errors import ConfigError
from .freq import annular_profile, band_mask, max_band_multiplicity, band_restrict
from .grid import (
    Bump,
    Gaussian,
    Grid,
    GridFunction,
    fourier_transform,
    lp_norm,
    make_grid,
    random_band_limited,
    refine,
    sample,
)
from .kernels import (
    dyadic_piece,
    kernel_values,
    partial_dyadic_sum,
    resolvable_window,
    smoothed_piece,
    truncated_kernel,
)
from .operators import (
    MultiplierSymbol,
    apply_annulus_sio_polar,
    apply_multiplier,
    ball_volume,
    hardy_littlewood,
    kernel_grid,
    lacunary_maximal,
    lacunary_multiplier,
    lattice_sum,
    localized_piece,
    maximal_averages,
    maximal_truncated,
    truncated_symbols,
    wavelet_paraproduct,
    paraproduct_index_mask,
)
from .report import Report
from .sphere import level_set_piece, make_sphere, project_mean_zero, sphere_lq_norm
from .wavelets import build_wavelet_pair, decompose, tensor_types

__all__ = [
    "run_converge_truncation",
    "run_converge_lacunary",
    "run_norm_scan",
    "run_decay_study",
    "run_inequality_probe",
    "run_experiment",
    "trial_seed",
]


def trial_seed(master: int, *counters: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), *(int(c) for c in counters)])


def _omega(cfg: ExperimentConfig, mean_zero: bool = True):
    om = make_sphere(cfg.m * cfg.n, cfg.omega_resolution, omega_spec(cfg))
    return project_mean_zero(om) if mean_zero else om


def _smooth_inputs(cfg: ExperimentConfig, grid: Grid) -> list[GridFunction]:
    w = cfg.input_width
    fs = []
    for j in range(cfg.m):
        # first input centred, the others offset by multiples of w/4
        center = 0.0 if cfg.inputs == "bump" and j == 0 else j * w / 4.0
        if cfg.inputs == "bump":
            fs.append(sample(Bump(center=center, radius=w), grid))
        else:
            fs.append(sample(Gaussian(center=center, width=w), grid))
    return fs


def _random_inputs(cfg: ExperimentConfig, grid: Grid, trial: int) -> list[GridFunction]:
    return [random_band_limited(trial_seed(cfg.seed, trial, j), cfg.band, grid) for j in range(cfg.m)]


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(b), 1e-300)


def _map(threads: int, fn, items):
    items = list(items)
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _new_report(cfg: ExperimentConfig) -> Report:
    return Report(cfg.experiment, dump_config(cfg))


# ---------------------------------------------------------------------------
# Truncation convergence
# ---------------------------------------------------------------------------


def run_converge_truncation(cfg: ExperimentConfig, threads: int = 1) -> Report:
    """``D(rho) = ||L^(2^-rho) - L^(2^-rho-1)||_inf``; the difference is an annulus integral.

    Annuli below the lattice spacing are reached with polar quadrature.
    """
    rep = _new_report(cfg)
    om = _omega(cfg)
    rhos = list(range(cfg.rho_min, cfg.rho_max + 1))
    tab = rep.table("truncation", [("rho", ""), ("eps", "1"), ("D_N", "sup-norm"), ("D_2N", "sup-norm"),
                                   ("rel_change", "1")])

    def diffs(N: int) -> list[float]:
        grid = make_grid(cfg.n, N, cfg.T)
        fs = _smooth_inputs(cfg, grid)

        def one(rho):
            v = apply_annulus_sio_polar(om, 2.0 ** -(rho + 1), 2.0 ** -rho, fs)
            return float(np.max(np.abs(v)))

        return _map(threads, one, rhos)

    d1, d2 = diffs(cfg.N), diffs(2 * cfg.N)
    for rho, a, b in zip(rhos, d1, d2):
        tab.add(rho, 2.0 ** -rho, a, b, _rel(b, a))
    rep.rule("order", "slope_le", "truncation", y="D_N", x="rho", threshold=-0.8)
    rep.rule("resolution_stable", "max_le", "truncation", y="rel_change", threshold=0.05)
    return rep.finish()


# ---------------------------------------------------------------------------
# Lacunary convergence
# ---------------------------------------------------------------------------


def _sigma(cfg: ExperimentConfig, scale: float = 1.0) -> MultiplierSymbol:
    if cfg.sigma == "bessel_decay":
        return MultiplierSymbol("bessel_decay", a=cfg.sigma_a, c=scale)
    return MultiplierSymbol.constant(cfg.sigma_c * scale)


def _zero_cell(sigma: MultiplierSymbol, fs) -> GridFunction:
    """Contribution of the zero-frequency cell, where ``sigma(2^nu 0) = sigma(0)`` for every nu."""
    grid = fs[0].grid
    dual = kernel_grid(grid, len(fs)).dual()
    vals = np.zeros(dual.shape, dtype=complex)
    vals[dual.origin_index] = sigma.value_at_origin()
    return apply_multiplier(GridFunction(dual, vals), fs).value


def run_converge_lacunary(cfg: ExperimentConfig, threads: int = 1) -> Report:
    rep = _new_report(cfg)
    grid = make_grid(cfg.n, cfg.N, cfg.T)
    fs = _smooth_inputs(cfg, grid)
    sigma = _sigma(cfg)
    prod = fs[0]
    for f in fs[1:]:
        prod = prod * f
    target = prod * sigma.value_at_origin()
    scale = lp_norm(prod, 2)

    def err(nu):
        return lp_norm(lacunary_multiplier(sigma, nu, fs).value - target, 2) / scale

    fit = rep.table("lacunary_fit", [("nu", ""), ("E_rel", "1")])
    nus = list(range(cfg.nu_fit_min, cfg.nu_fit_max + 1))
    for nu, e in zip(nus, _map(threads, err, nus)):
        fit.add(nu, e)
    far = rep.table("lacunary_far", [("nu", ""), ("E_rel", "1")])
    far.add(cfg.nu_far, err(cfg.nu_far))
    rep.rule("order", "slope_ge", "lacunary_fit", y="E_rel", x="nu", threshold=0.8)
    rep.rule("far_value", "max_le", "lacunary_far", y="E_rel", threshold=1e-3)

    limit = sigma.limit_at_infinity()
    if limit == 0.0:
        z = _zero_cell(sigma, fs)
        tail = rep.table("lacunary_tail", [("nu", ""), ("S_rel", "1"), ("zero_cell_rel", "1"),
                                           ("corrected_rel", "1")])
        tnus = list(range(cfg.tail_start, cfg.tail_max + 1))

        def tail_row(nu):
            s = lacunary_multiplier(sigma, nu, fs).value
            return lp_norm(s, 2) / scale, lp_norm(z, 2) / scale, lp_norm(s - z, 2) / scale

        for nu, row in zip(tnus, _map(threads, tail_row, tnus)):
            tail.add(nu, *row)
        rep.rule("tail_monotone", "nonincreasing", "lacunary_tail", y="corrected_rel")
        rep.rule("tail_rate", "slope_le", "lacunary_tail", y="corrected_rel", x="nu", threshold=-0.5)
    rep.measurements["limit_at_infinity"] = limit
    return rep.finish()


# ---------------------------------------------------------------------------
# Norm scans
# ---------------------------------------------------------------------------


def run_norm_scan(cfg: ExperimentConfig, threads: int = 1) -> Report:
    """Ratios ``||op(f)||_{L^(2/m)} / prod ||f_j||_2`` over seeded band-limited inputs.

    For the singular integral the ratio is further divided by ``||Omega||_{L^q}``.
    """
    rep = _new_report(cfg)
    m = cfg.m
    p = 2.0 / m
    grid = make_grid(cfg.n, cfg.N, cfg.T)
    grid2 = make_grid(cfg.n, 2 * cfg.N, cfg.T)
    sio = cfg.experiment == "norm_scan_sio"
    if sio:
        om = _omega(cfg)
        om3 = om.with_values(3.0 * om.values, f"3*{om.label}")
        qnorm = sphere_lq_norm(om, cfg.q)
        base = sorted(set(float(e) for e in cfg.eps_set))
        big = sorted(set(base) | {float(cfg.eps_extra)})
        sym = truncated_symbols(om, big, grid, m)
        sym3 = truncated_symbols(om3, base, grid, m)
        sym2 = truncated_symbols(om, base, grid2, m)

        def op(fs, which):
            if which == "base":
                return maximal_truncated(om, fs, base, sym)
            if which == "big":
                return maximal_truncated(om, fs, big, sym)
            if which == "triple":
                return maximal_truncated(om3, fs, base, sym3)
            return maximal_truncated(om, fs, base, sym2)

        rep.measurements["omega_lq_norm"] = qnorm
        rep.measurements["eps_base"] = base
        rep.measurements["eps_enlarged"] = big
    else:
        qnorm = 1.0
        sigma, sigma3 = _sigma(cfg), _sigma(cfg, 3.0)
        base = list(range(cfg.nu_min, cfg.nu_max + 1))
        big = sorted(set(base) | {cfg.nu_extra})

        def op(fs, which):
            if which == "base" or which == "fine":
                return lacunary_maximal(sigma, fs, base)
            if which == "big":
                return lacunary_maximal(sigma, fs, big)
            return lacunary_maximal(sigma3, fs, base)

        rep.measurements["nu_base"] = base
        rep.measurements["nu_enlarged"] = big

    def trial(i):
        fs = _random_inputs(cfg, grid, i)
        fs2 = [refine(f, 2) for f in fs]
        den = float(np.prod([lp_norm(f, 2) for f in fs])) * qnorm
        den2 = float(np.prod([lp_norm(f, 2) for f in fs2])) * qnorm
        r = lp_norm(op(fs, "base").value, p) / den
        r2 = lp_norm(op(fs2, "fine").value, p) / den2
        rb = lp_norm(op(fs, "big").value, p) / den
        r3 = lp_norm(op(fs, "triple").value, p) / den
        dev = abs(r3 - 3.0 * r) / (3.0 * r) if r > 0 else abs(r3)
        return r, r2, rb, r3, dev

    scan = rep.table("scan", [("trial", ""), ("ratio", "1"), ("ratio_2N", "1"), ("ratio_enlarged", "1"),
                              ("ratio_3x", "1"), ("homogeneity_dev", "1")])
    rows = _map(threads, trial, range(cfg.trials))
    for i, row in enumerate(rows):
        scan.add(i, *row)
    arr = np.array(rows)
    summ = rep.table("summary", [("stat", ""), ("base", "1"), ("refined_2N", "1"), ("enlarged", "1"),
                                 ("rel_change_N", "1"), ("rel_change_set", "1")])
    for name, fn in (("max", np.max), ("median", np.median)):
        b, f2, e = float(fn(arr[:, 0])), float(fn(arr[:, 1])), float(fn(arr[:, 2]))
        summ.add(name, b, f2, e, _rel(f2, b), _rel(e, b))
    rep.rule("max_finite", "finite", "scan", y="ratio")
    rep.rule("stable_under_refinement", "max_le", "summary", y="rel_change_N", threshold=0.15,
             where={"stat": "max"})
    rep.rule("stable_under_larger_set", "max_le", "summary", y="rel_change_set", threshold=0.15,
             where={"stat": "max"})
    rep.rule("homogeneity", "max_le", "scan", y="homogeneity_dev", threshold=1e-12)
    return rep.finish()


# ---------------------------------------------------------------------------
# Coefficient decay
# ---------------------------------------------------------------------------


def _decay_grid(cfg: ExperimentConfig, mu: int) -> tuple[int, float, int]:
    """Points, space extent and top level for a source living in ``|xi| <= 2^(mu+1)``."""
    extent = 2.0 ** (mu + 2)  # frequency-side extent
    T = min(20.0, cfg.max_points / extent)
    N = int(round(extent * T))
    if N % 2 or N < 8:
        raise ConfigError(f"cannot fit mu = {mu} into {cfg.max_points} points per axis")
    wavelet_width = 2 * cfg.order + 1
    top = int(math.floor(math.log2(wavelet_width * T / 8.0)))
    return N, T, min(cfg.lam_max, top)


def run_decay_study(cfg: ExperimentConfig, threads: int = 1) -> Report:
    """Coefficient norms of ``K^0_mu`` (kernel) and ``sigma_mu`` (multiplier) per ``(lam, mu)``."""
    if cfg.m * cfg.n != 2:
        raise ConfigError("the decay study runs at m*n = 2")
    rep = _new_report(cfg)
    pair = build_wavelet_pair(cfg.order)
    om = _omega(cfg)
    q, mn = cfg.decay_q, cfg.m * cfg.n
    qp = q / (q - 1.0)
    sq = cfg.sigma_q
    sigma = _sigma(cfg)
    tab = rep.table("decay", [("source", ""), ("mu", ""), ("lam", ""), ("linf", "1"), ("lp", "1"),
                              ("p", ""), ("energy", "1")])
    fid = rep.table("fidelity", [("source", ""), ("mu", ""), ("lam_max", ""), ("recon_error", "1"),
                                 ("bessel_ratio", "1"), ("max_discarded", "1")])
    for mu in range(cfg.mu_min, cfg.mu_max + 1):
        N, T, top = _decay_grid(cfg, mu)
        g = make_grid(mn, N, T)
        src = smoothed_piece(dyadic_piece(om, 0, g), mu).symbol
        c = decompose(src, pair, top, mu, norm_orders=(np.inf, qp), keep_blocks=False, label=f"K0_{mu}")
        del src
        for lam in range(top + 1):
            tab.add("kernel", mu, lam, c.norms[lam][np.inf], c.norms[lam][qp], qp, c.energy[lam])
        for lm, e in enumerate(c.reconstruction_errors()):
            fid.add("kernel", mu, lm, e, c.bessel_ratio(), c.max_discarded)
        fg = Grid(mn, N, 2.0 ** (mu + 2))
        vals = annular_profile(np.ldexp(fg.radius(), -mu)) * sigma.on_grid(fg).values
        c = decompose(GridFunction(fg, vals), pair, top, mu, norm_orders=(np.inf, sq), keep_blocks=False,
                      label=f"sigma_{mu}")
        del vals
        for lam in range(top + 1):
            tab.add("sigma", mu, lam, c.norms[lam][np.inf], c.norms[lam][sq], sq, c.energy[lam])
        for lm, e in enumerate(c.reconstruction_errors()):
            fid.add("sigma", mu, lm, e, c.bessel_ratio(), c.max_discarded)
        rep.measurements[f"grid_mu{mu}"] = {"N": N, "T": T, "lam_max": top}

    lam_target = -mn * (1.0 / q - 0.5) + 0.15
    for mu in range(cfg.mu_min, cfg.mu_max + 1):
        if len(tab.column("lam", {"source": "kernel", "mu": mu})) >= 3:
            rep.rule(f"lam_slope_mu{mu}", "slope_le", "decay", y="lp", x="lam",
                     threshold=lam_target, where={"source": "kernel", "mu": mu})
    rep.rule("mu_slope_linf", "slope_le", "decay", y="linf", x="mu", threshold=-0.25,
             where={"source": "kernel", "lam": 0})
    if cfg.sigma == "bessel_decay":
        rep.rule("sigma_mu_slope", "slope_le", "decay", y="lp", x="mu",
                 threshold=-(cfg.sigma_a - mn / sq) + 0.15, where={"source": "sigma", "lam": 0})
    rep.rule("bessel", "max_le", "fidelity", y="bessel_ratio", threshold=1.0)
    ref_mu = min(max(6, cfg.mu_min), cfg.mu_max)
    rep.rule("recon_monotone", "nonincreasing", "fidelity", y="recon_error",
             where={"source": "kernel", "mu": ref_mu})
    rep.rule("recon_small", "max_le", "fidelity", y="recon_error", threshold=0.05,
             where={"source": "kernel", "mu": ref_mu, "lam_max": min(4, _decay_grid(cfg, ref_mu)[2])})
    rep.measurements["targets"] = {
        "lam_slope": lam_target, "mu_slope_linf": -0.25,
        "sigma_mu_slope": -(cfg.sigma_a - mn / sq) + 0.15, "q": q, "q_prime": qp, "sigma_q": sq,
    }
    return rep.finish()


# ---------------------------------------------------------------------------
# Inequality and identity probes
# ---------------------------------------------------------------------------


def _probe_localization(cfg, rep, pair):
    """Exact support identity for localized pieces, plus the multiplier bound."""
    grid = make_grid(1, 4096, 32.0)
    f = random_band_limited(trial_seed(cfg.seed, 0, 0), grid.nyquist, grid)
    mu = cfg.mu_min
    c0 = pair.support_radius
    tab = rep.table("localization", [("lam", ""), ("gamma", ""), ("G", ""), ("k", ""), ("rel_dev", "1"),
                                     ("multiplier_excess", "1")])
    rng = np.random.default_rng(trial_seed(cfg.seed, 1))
    fnorm = lp_norm(f, 2)
    for lam in range(0, 4):
        for gamma in range(-4, 8):
            if 2.0 ** (gamma + mu + 3) > grid.nyquist:
                continue
            if (2 * pair.order + 1) * 2.0 ** (gamma - lam) * grid.extent < 16:
                continue
            restricted = band_restrict(f, lam, gamma, mu, c0)
            top = 2 ** (lam + mu + 2)
            lo = int(math.ceil(2 * c0))
            ks = sorted({lo, top, -lo, -top, *rng.integers(lo, top + 1, 4).tolist()})
            for G in "FM":
                for k in ks:
                    a = localized_piece(f, lam, gamma, (G,), (k,), pair)
                    b = localized_piece(restricted, lam, gamma, (G,), (k,), pair)
                    na = lp_norm(a, 2)
                    dev = lp_norm(a - b, 2) / na if na > 0 else lp_norm(b, 2)
                    sup = 2.0 ** (lam / 2.0) * float(np.max(np.abs(pair.mother if G == "M" else pair.father)))
                    tab.add(lam, gamma, G, k, dev, na - sup * fnorm)
    rep.rule("support_identity", "max_le", "localization", y="rel_dev", threshold=1e-12)
    rep.rule("multiplier_bound", "max_le", "localization", y="multiplier_excess", threshold=1e-12)


def _probe_overlap(cfg, rep, pair):
    grid = make_grid(1, 4096, 32.0)
    f = random_band_limited(trial_seed(cfg.seed, 0, 1), grid.nyquist, grid)
    fh = fourier_transform(f, "forward")
    r = fh.grid.radius()
    power = np.abs(fh.values) ** 2 * fh.grid.cell_volume
    total = float(power.sum())
    c0 = pair.support_radius
    tab = rep.table("overlap", [("lam", ""), ("mu", ""), ("sum_band_energy", "L2^2"), ("bound", "L2^2"),
                                ("nmax_formula", ""), ("nmax_observed", ""), ("excess", "L2^2")])
    for lam in range(0, 4):
        for mu in range(cfg.mu_min, cfg.mu_min + 3):
            acc = 0.0
            count = np.zeros(r.shape, dtype=np.int64)
            for gamma in range(-40, 40):
                mask = band_mask(r, lam, gamma, mu, c0, 1)
                count += mask
                acc += float(power[mask].sum())
            nmax = max_band_multiplicity(lam, mu, c0, 1)
            bound = nmax * total
            tab.add(lam, mu, acc, bound, nmax, int(count.max()), acc - bound * (1 + 1e-12))
    rep.rule("overlap_bound", "max_le", "overlap", y="excess", threshold=0.0)


def _probe_domination(cfg, rep, om):
    """``|L^(eps)| <= 2^mn M_Omega(R = 2^(rho+1)) + |sum_{gamma < -rho} K^gamma * f|`` at every node."""
    m, n = cfg.m, cfg.n
    grid = make_grid(n, cfg.N, cfg.T)
    kg = kernel_grid(grid, m)
    fs = _random_inputs(cfg, grid, 7)
    g_lo, g_hi = resolvable_window(kg)
    R_out = 2.0 ** -g_lo
    tab = rep.table("domination", [("rho", ""), ("eps", "1"), ("max_lhs", "1"), ("max_excess", "1"),
                                   ("support_violations", ""), ("violations", "")])
    rho = int(math.ceil(math.log2(2 * grid.spacing)))
    while 2.0 ** (rho + 1) <= R_out and -rho <= g_hi + 1:
        if -rho >= g_lo:
            partial = partial_dyadic_sum(om, -rho, kg).data.values.real
            P = np.abs(lattice_sum(partial, fs))
            M = maximal_averages(om, fs, [2.0 ** (rho + 1)]).value.values.real
            for eps in (2.0 ** rho, 1.5 * 2.0 ** rho):
                kv = truncated_kernel(om, eps, kg).data.values.real
                L = np.abs(lattice_sum(kv, fs))
                rhs = 2.0 ** (m * n) * M + P
                slack = 1e-12 * float(rhs.max()) + 1e-12 * rhs
                excess = L - rhs - slack
                diff = kv - partial
                rad = kg.radius()
                full = kernel_values(om, kg)
                outside = (rad < 2.0 ** rho) | (rad > 2.0 ** (rho + 1))
                sv = int(np.count_nonzero(np.abs(diff[outside]) > 1e-12 * np.abs(full[outside]).max()))
                sv += int(np.count_nonzero(np.abs(diff) > np.abs(full) * (1 + 1e-12) + 1e-300))
                tab.add(rho, eps, float(L.max()), float(excess.max()), sv, int(np.count_nonzero(excess > 0)))
        rho += 1
    rep.rule("domination", "max_le", "domination", y="violations", threshold=0)
    rep.rule("annulus_support", "max_le", "domination", y="support_violations", threshold=0)


def _probe_levels(cfg, rep, om_raw):
    """Level-set pieces of the unit-``L^q`` density: ``L^1`` chain and the pointwise maximal bound."""
    m, n = cfg.m, cfg.n
    q = cfg.q
    qp = q / (q - 1.0)
    om = om_raw * (1.0 / sphere_lq_norm(om_raw, q))
    chain = rep.table("level_chain", [("l", ""), ("l1_norm", "1"), ("support", "1"), ("bound", "1"),
                                      ("excess", "1")])
    peak = float(np.abs(om.values).max())
    lmax = max(1, int(math.ceil(math.log2(peak))))
    pieces = {}
    for l in range(0, lmax + 1):
        piece = level_set_piece(om, l)
        pieces[l] = piece
        if l == 0:
            continue
        a = np.abs(piece.values)
        l1 = float(np.sum(piece.weights * a))
        supp = float(np.sum(piece.weights * (a > 0)))
        bound = 2.0 ** (-l * q / qp)
        chain.add(l, l1, supp, bound, l1 - bound * (1 + 1e-12))
    rep.rule("level_chain", "max_le", "level_chain", y="excess", threshold=0.0)

    grid = make_grid(n, cfg.N, cfg.T)
    fs = _random_inputs(cfg, grid, 11)
    R_set = [2.0 * grid.spacing * 2.0 ** i for i in range(6) if 2.0 * grid.spacing * 2.0 ** i < cfg.T / 4]
    hl = [hardy_littlewood(f, R_set).values.real for f in fs]
    prod = np.prod(hl, axis=0)
    tab = rep.table("maximal_bound", [("l", ""), ("max_lhs", "1"), ("max_ratio", "1"), ("violations", "")])
    for l, piece in pieces.items():
        lhs = maximal_averages(piece, fs, R_set).value.values.real
        rhs = 2.0 ** (l + 1) * ball_volume(n) ** m * prod
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, 0.0)
        viol = int(np.count_nonzero(lhs > rhs * (1 + 1e-12)))
        tab.add(l, float(lhs.max()), float(ratio.max()), viol)
    rep.rule("maximal_pointwise", "max_le", "maximal_bound", y="violations", threshold=0)


def _probe_paraproduct(cfg, rep, pair, om):
    """Ratio of the paraproduct square function / sum to its predicted size, over ``(lam, mu)``."""
    m, n = cfg.m, cfg.n
    if m != 2 or n != 1:
        return
    c0 = pair.support_radius
    qb = cfg.coeff_q
    grid = make_grid(1, cfg.para_points, cfg.para_extent)
    tab = rep.table("paraproduct", [("lam", ""), ("mu", ""), ("G", ""), ("l", ""), ("trial", ""),
                                    ("lhs", "1"), ("A", "1"), ("B", "1"), ("theta", ""), ("rhs", "1"),
                                    ("ratio", "1"), ("gamma_min", ""), ("gamma_max", "")])
    summ = rep.table("paraproduct_summary", [("lam", ""), ("mu", ""), ("l", ""), ("max_ratio", "1")])
    inputs = [[random_band_limited(trial_seed(cfg.seed, 100 + t, j), cfg.para_band, grid) for j in range(m)]
              for t in range(cfg.para_trials)]
    for mu in range(cfg.para_mu_min, cfg.para_mu_max + 1):
        N, T, top = _decay_grid(cfg, mu)
        top = min(top, cfg.para_lam_max)
        g = make_grid(2, N, T)
        src = smoothed_piece(dyadic_piece(om, 0, g), mu).symbol
        coeffs = decompose(src, pair, top, mu, norm_orders=(np.inf,), keep_blocks=True)
        del src
        for lam in range(top + 1):
            best = {1: 0.0, 2: 0.0}
            for G in tensor_types(lam, 2):
                block = coeffs.blocks[(lam, G)]
                for l in (1, 2):
                    sel = block.values[paraproduct_index_mask(block, m, n, l, c0)]
                    if sel.size == 0 or not np.any(sel):
                        continue
                    A = float(np.max(np.abs(sel)))
                    B = float(np.sum(np.abs(sel) ** qb) ** (1.0 / qb))
                    theta = cfg.theta if cfg.theta is not None else (l - 1) * qb / (2 * l)
                    # nonzero terms need a translate of size >= 2^(lam+mu-2)/sqrt(m) touching the band
                    kmin = 2.0 ** (lam + mu - 2) / math.sqrt(m) - c0
                    g_max = int(math.floor(math.log2(cfg.para_band * 2.0 ** lam / kmin))) if kmin > 0 else lam
                    g_min = lam + int(math.ceil(math.log2(16.0 / ((2 * pair.order + 1) * grid.extent))))
                    for t, fs in enumerate(inputs):
                        acc = np.zeros(grid.shape)
                        for gamma in range(g_min, g_max + 1):
                            T_g = wavelet_paraproduct(coeffs, lam, G, l, gamma, fs, pair, c0, band=cfg.para_band)
                            a = np.abs(T_g.values)
                            acc += a * a if l == 1 else a
                        tot = np.sqrt(acc) if l == 1 else acc
                        lhs = lp_norm(GridFunction(grid, tot), 2.0 / m)
                        fprod = float(np.prod([lp_norm(f, 2) for f in fs]))
                        if l == 1:
                            rhs = A * mu ** 0.5 * 2.0 ** (lam * m * n / 2.0) * (lam + 1) ** 0.5 * fprod
                        else:
                            rhs = (A ** (1 - theta) * B ** theta * mu ** (l / 2.0)
                                   * 2.0 ** (lam * m * n / 2.0) * (lam + 1) ** (l / 2.0) * fprod)
                        ratio = lhs / rhs
                        best[l] = max(best[l], ratio)
                        tab.add(lam, mu, "".join(G), l, t, lhs, A, B, theta, rhs, ratio, g_min, g_max)
            for l in (1, 2):
                summ.add(lam, mu, l, best[l])
        del coeffs
    # ratios relative to the smallest case (lam = 0, mu = mu_min), the first summary row
    rep.rule("paraproduct_l2_bounded", "max_le_factor_first", "paraproduct_summary", y="max_ratio",
             threshold=4.0, where={"l": 2})
    rep.rule("paraproduct_l1_bounded", "max_le_factor_first", "paraproduct_summary", y="max_ratio",
             threshold=4.0, where={"l": 1})


def run_inequality_probe(cfg: ExperimentConfig, threads: int = 1) -> Report:
    rep = _new_report(cfg)
    pair = build_wavelet_pair(cfg.order)
    om_raw = _omega(cfg, mean_zero=False)
    om = project_mean_zero(om_raw)
    _probe_localization(cfg, rep, pair)
    _probe_overlap(cfg, rep, pair)
    _probe_domination(cfg, rep, om)
    _probe_levels(cfg, rep, om_raw)
    if cfg.paraproduct:
        # the paraproduct coefficients use the smooth reference density
        harm = replace(cfg, omega="harmonic", omega_k=1)
        _probe_paraproduct(cfg, rep, pair, _omega(harm))
    return rep.finish()


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> Report:
    name = cfg.experiment
    if name == "converge_truncation":
        return run_converge_truncation(cfg, threads)
    if name == "converge_lacunary":
        return run_converge_lacunary(cfg, threads)
    if name in ("norm_scan_sio", "norm_scan_lacunary"):
        return run_norm_scan(cfg, threads)
    if name == "decay_study":
        return run_decay_study(cfg, threads)
    if name == "inequality_probe":
        return run_inequality_probe(cfg, threads)
    if name == "selftest":
        from .selftest import run_selftest

        return run_selftest(cfg)
    raise ConfigError(f"unknown experiment {name!r}")
