"""scikit-learn style wrappers: parameters in ``__init__``, state in trailing-underscore attributes.

The inputs of the operators are tuples of grid functions rather than
feature matrices, so only the parameter handling and the
``fit``/``transform`` protocol are borrowed.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .grid import GridFunction
from .operators import (
    MultiplierSymbol,
    apply_multiplier,
    apply_truncated_sio_polar,
    apply_truncated_sio_quadrature,
    lacunary_maximal,
    maximal_truncated,
    truncated_symbols,
)
from .validation import check_inputs, check_scale_set, check_sphere_function
from .wavelets import build_wavelet_pair, decompose, synthesize

__all__ = ["WaveletDecomposer", "TruncatedSIO", "MaximalTruncatedSIO", "LacunaryMaximal"]


class WaveletDecomposer(TransformerMixin, BaseEstimator):
    """Tensor wavelet coefficients of a frequency-side source.

    ``fit`` records the source grid; ``transform`` returns the
    :class:`~multisio.wavelets.WaveletCoefficients`; ``inverse_transform``
    synthesizes them back on the fitted grid.
    """

    def __init__(self, order: int = 3, lam_max: int = 2, mu: int | None = None, rule: str = "hat"):
        self.order = order
        self.lam_max = lam_max
        self.mu = mu
        self.rule = rule

    def fit(self, X: GridFunction, y=None):
        (X,) = check_inputs([X])
        self.grid_ = X.grid
        self.pair_ = build_wavelet_pair(self.order)
        return self

    def transform(self, X: GridFunction):
        check_is_fitted(self, "grid_")
        (X,) = check_inputs([X], grid=self.grid_)
        return decompose(X, self.pair_, self.lam_max, self.mu, rule=self.rule)

    def inverse_transform(self, coeffs) -> GridFunction:
        check_is_fitted(self, "grid_")
        return synthesize(coeffs, self.pair_, self.grid_)


class TruncatedSIO(TransformerMixin, BaseEstimator):
    """``L^(eps)`` by the ``multiplier``, ``lattice`` or ``polar`` route."""

    def __init__(self, omega=None, eps: float = 0.25, route: str = "multiplier"):
        self.omega = omega
        self.eps = eps
        self.route = route

    def fit(self, X, y=None):
        fs = check_inputs(X)
        check_sphere_function(self.omega)
        if self.route not in ("multiplier", "lattice", "polar"):
            raise ValueError(f"unknown route {self.route!r}")
        self.grid_ = fs[0].grid
        self.m_ = len(fs)
        if self.route == "multiplier":
            self.symbol_ = truncated_symbols(self.omega, [self.eps], self.grid_, self.m_)[float(self.eps)]
        return self

    def transform(self, X) -> GridFunction:
        check_is_fitted(self, "grid_")
        fs = check_inputs(X, m=self.m_, grid=self.grid_)
        if self.route == "multiplier":
            return apply_multiplier(self.symbol_, fs).value
        if self.route == "lattice":
            return apply_truncated_sio_quadrature(self.omega, self.eps, fs).value
        return apply_truncated_sio_polar(self.omega, self.eps, fs).value


class MaximalTruncatedSIO(TransformerMixin, BaseEstimator):
    """``max_{eps in eps_set} |L^(eps)|`` with symbols cached at ``fit``."""

    def __init__(self, omega=None, eps_set=(0.25, 0.5, 1.0, 2.0)):
        self.omega = omega
        self.eps_set = eps_set

    def fit(self, X, y=None):
        fs = check_inputs(X)
        check_sphere_function(self.omega)
        self.eps_ = check_scale_set(self.eps_set, "eps_set")
        self.grid_ = fs[0].grid
        self.m_ = len(fs)
        self.symbols_ = truncated_symbols(self.omega, self.eps_, self.grid_, self.m_)
        return self

    def transform(self, X) -> GridFunction:
        check_is_fitted(self, "symbols_")
        fs = check_inputs(X, m=self.m_, grid=self.grid_)
        return maximal_truncated(self.omega, fs, self.eps_, self.symbols_).value


class LacunaryMaximal(TransformerMixin, BaseEstimator):
    """``max_{nu in nu_set} |S^nu_sigma|`` for ``sigma = (1 + |xi|^2)^(-a/2)``."""

    def __init__(self, a: float = 1.0, nu_set=tuple(range(-8, 9))):
        self.a = a
        self.nu_set = nu_set

    def fit(self, X, y=None):
        fs = check_inputs(X)
        self.sigma_ = MultiplierSymbol.bessel_decay(self.a)
        self.nus_ = sorted({int(v) for v in np.atleast_1d(self.nu_set)})
        if not self.nus_:
            raise ValueError("nu_set must be nonempty")
        self.grid_ = fs[0].grid
        self.m_ = len(fs)
        return self

    def transform(self, X) -> GridFunction:
        check_is_fitted(self, "sigma_")
        fs = check_inputs(X, m=self.m_, grid=self.grid_)
        return lacunary_maximal(self.sigma_, fs, self.nus_).value
