"""Experiment configuration: INI files with [grid] [omega] [sigma] [wavelet] [experiment]."""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .sphere import (
    Constant,
    Harmonic,
    OddSignSmooth,
    PowerSingularity,
    RandomPoly,
    Zero,
)

__all__ = ["EXPERIMENTS", "ExperimentConfig", "default_config", "load_config", "omega_spec", "dump_config"]

EXPERIMENTS = (
    "converge_truncation",
    "converge_lacunary",
    "norm_scan_sio",
    "norm_scan_lacunary",
    "decay_study",
    "inequality_probe",
    "selftest",
)

OMEGA_KINDS = ("harmonic", "odd_sign_smooth", "power_singularity", "random_poly", "zero", "constant")
SIGMA_KINDS = ("bessel_decay", "constant")
INPUT_KINDS = ("gaussian", "bump", "random_band_limited")


def _floats(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(eval_fraction(v)) for v in str(text).split(",") if v.strip())


def eval_fraction(text: str) -> float:
    """Parse ``0.25``, ``1/4`` or ``2^-3``."""
    s = text.strip()
    try:
        if "/" in s:
            a, b = s.split("/")
            return float(a) / float(b)
        if "^" in s:
            a, b = s.split("^")
            return float(a) ** float(b)
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


@dataclass
class ExperimentConfig:
    experiment: str = "selftest"
    # [grid]
    m: int = 2
    n: int = 1
    N: int = 256
    T: float = 16.0
    # [omega]
    omega: str = "harmonic"
    omega_k: int = 1
    omega_width: float = 0.2
    omega_beta: float = 0.5
    omega_theta0: float = 0.0
    omega_seed: int = 0
    omega_degree: int = 3
    omega_c: float = 1.0
    omega_resolution: int = 256
    q: float = 2.0
    # [sigma]
    sigma: str = "bessel_decay"
    sigma_a: float = 1.0
    sigma_c: float = 1.0
    # [wavelet]
    order: int = 3
    lam_max: int = 4
    mu_min: int = 4
    mu_max: int = 8
    max_points: int = 5120
    # [experiment]
    inputs: str = "bump"
    input_width: float = 2.0
    band: float = 2.0
    rho_min: int = 2
    rho_max: int = 7
    eps_set: tuple = (0.25, 0.5, 1.0, 2.0)
    eps_extra: float = 0.125
    nu_min: int = -8
    nu_max: int = 8
    nu_extra: int = 9
    nu_fit_min: int = -9
    nu_fit_max: int = -3
    nu_far: int = -12
    tail_start: int = 6
    tail_max: int = 12
    trials: int = 100
    seed: int = 0
    decay_q: float = 1.5
    sigma_q: float = 3.0
    coeff_q: float = 3.0
    theta: float | None = None
    paraproduct: bool = True
    para_lam_max: int = 3
    para_mu_min: int = 4
    para_mu_max: int = 6
    para_trials: int = 2
    para_points: int = 1024
    para_extent: float = 1024.0
    para_band: float = 0.25

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.m * self.n not in (2, 4):
            raise ConfigError(f"m*n must be 2 or 4, got {self.m * self.n}")
        if self.m < 2:
            raise ConfigError("m must be >= 2")
        if self.N % 2 or self.N < 8:
            raise ConfigError(f"N must be even and >= 8, got {self.N}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if self.omega not in OMEGA_KINDS:
            raise ConfigError(f"unknown omega kind {self.omega!r}")
        if self.sigma not in SIGMA_KINDS:
            raise ConfigError(f"unknown sigma kind {self.sigma!r}")
        if self.inputs not in INPUT_KINDS:
            raise ConfigError(f"unknown inputs {self.inputs!r}")
        if not self.q > 2.0 * self.m / (self.m + 1):
            raise ConfigError(f"q = {self.q} must exceed 2m/(m+1) = {2 * self.m / (self.m + 1):.4g}")
        if self.sigma == "bessel_decay" and not self.sigma_a > (self.m - 1) * self.n / 2.0:
            raise ConfigError(f"a = {self.sigma_a} must exceed (m-1)n/2 = {(self.m - 1) * self.n / 2}")
        if not self.eps_set:
            raise ConfigError("eps_set must be nonempty")
        if self.rho_min > self.rho_max or self.nu_min > self.nu_max or self.mu_min > self.mu_max:
            raise ConfigError("empty parameter range")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.experiment.startswith("norm_scan") and self.trials < 20:
            raise ConfigError("norm scans need trials >= 20")
        if not 0 <= self.lam_max <= 5:
            raise ConfigError("lam_max must be in [0, 5]")
        return self


# INI section -> {key: (attribute, parser)}
_SCHEMA = {
    "grid": {"m": ("m", int), "n": ("n", int), "N": ("N", int), "T": ("T", eval_fraction)},
    "omega": {
        "kind": ("omega", str),
        "k": ("omega_k", int),
        "width": ("omega_width", eval_fraction),
        "beta": ("omega_beta", eval_fraction),
        "theta0": ("omega_theta0", eval_fraction),
        "seed": ("omega_seed", int),
        "degree": ("omega_degree", int),
        "c": ("omega_c", eval_fraction),
        "resolution": ("omega_resolution", int),
        "q": ("q", eval_fraction),
    },
    "sigma": {"kind": ("sigma", str), "a": ("sigma_a", eval_fraction), "c": ("sigma_c", eval_fraction)},
    "wavelet": {
        "order": ("order", int),
        "lam_max": ("lam_max", int),
        "mu_min": ("mu_min", int),
        "mu_max": ("mu_max", int),
        "max_points": ("max_points", int),
    },
    "experiment": {
        "name": ("experiment", str),
        "inputs": ("inputs", str),
        "input_width": ("input_width", eval_fraction),
        "band": ("band", eval_fraction),
        "rho_min": ("rho_min", int),
        "rho_max": ("rho_max", int),
        "eps_set": ("eps_set", _floats),
        "eps_extra": ("eps_extra", eval_fraction),
        "nu_min": ("nu_min", int),
        "nu_max": ("nu_max", int),
        "nu_extra": ("nu_extra", int),
        "nu_fit_min": ("nu_fit_min", int),
        "nu_fit_max": ("nu_fit_max", int),
        "nu_far": ("nu_far", int),
        "tail_start": ("tail_start", int),
        "tail_max": ("tail_max", int),
        "trials": ("trials", int),
        "seed": ("seed", int),
        "decay_q": ("decay_q", eval_fraction),
        "sigma_q": ("sigma_q", eval_fraction),
        "coeff_q": ("coeff_q", eval_fraction),
        "theta": ("theta", eval_fraction),
        "paraproduct": ("paraproduct", lambda s: _bool(s)),
        "para_lam_max": ("para_lam_max", int),
        "para_mu_min": ("para_mu_min", int),
        "para_mu_max": ("para_mu_max", int),
        "para_trials": ("para_trials", int),
        "para_points": ("para_points", int),
        "para_extent": ("para_extent", eval_fraction),
        "para_band": ("para_band", eval_fraction),
    },
}


def _bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# Per-experiment defaults layered over the dataclass defaults.
_DEFAULTS = {
    "converge_truncation": dict(N=512, T=16.0, inputs="bump", input_width=2.0, rho_min=2, rho_max=7),
    "converge_lacunary": dict(N=256, T=16.0, inputs="gaussian", input_width=1.0),
    "norm_scan_sio": dict(
        N=256, T=16.0, omega="power_singularity", omega_beta=0.5, q=1.5, inputs="random_band_limited",
        band=0.25, trials=100,
    ),
    "norm_scan_lacunary": dict(N=256, T=16.0, inputs="random_band_limited", band=2.0, trials=100),
    "decay_study": dict(lam_max=4, mu_min=4, mu_max=8),
    "inequality_probe": dict(N=256, T=16.0, omega="power_singularity", omega_beta=0.5, q=1.5,
                             inputs="random_band_limited", band=2.0),
    "selftest": dict(),
}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    values = dict(_DEFAULTS[experiment])
    values.update(overrides)
    return ExperimentConfig(experiment=experiment, **values).validate()


def load_config(path, experiment: str | None = None, default: str | None = None) -> ExperimentConfig:
    """Read an INI file; keys not in the schema are errors.

    The experiment is ``experiment`` if given, else ``[experiment] name``,
    else ``default``.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(p, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{p}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{p}: unknown key {key!r} in [{section}]")
            attr, conv = _SCHEMA[section][key]
            try:
                values[attr] = conv(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{p}: bad value for {section}.{key}: {raw!r}") from exc
    name = values.pop("experiment", None)
    name = experiment or name or default
    if name is None:
        raise ConfigError(f"{p}: no experiment name given")
    return default_config(name, **values)


def omega_spec(cfg: ExperimentConfig):
    kind = cfg.omega
    if kind == "harmonic":
        return Harmonic(cfg.omega_k)
    if kind == "odd_sign_smooth":
        return OddSignSmooth(cfg.omega_width)
    if kind == "power_singularity":
        return PowerSingularity(cfg.omega_beta, cfg.omega_theta0)
    if kind == "random_poly":
        return RandomPoly(cfg.omega_seed, cfg.omega_degree)
    if kind == "zero":
        return Zero()
    return Constant(cfg.omega_c)


def dump_config(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["eps_set"] = list(cfg.eps_set)
    for k, v in out.items():
        if isinstance(v, float) and not math.isfinite(v):
            out[k] = repr(v)
    return out
