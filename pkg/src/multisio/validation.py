"""Input validation shared by the estimator wrappers."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import GridMismatch
from .grid import Grid, GridFunction
from .sphere import SphereFunction

__all__ = ["check_inputs", "check_scale_set", "check_sphere_function", "as_grid_function"]


def as_grid_function(x, grid: Grid | None = None) -> GridFunction:
    """Accept a GridFunction, or an array paired with ``grid``."""
    if isinstance(x, GridFunction):
        if grid is not None and x.grid != grid:
            raise GridMismatch(f"expected grid {grid}, got {x.grid}")
        return x
    if grid is None:
        raise TypeError("a bare array needs a grid")
    return GridFunction(grid, np.asarray(x))


def check_inputs(fs: Sequence, m: int | None = None, grid: Grid | None = None) -> list[GridFunction]:
    """A list of GridFunctions on one grid, ``m`` of them when ``m`` is given."""
    if isinstance(fs, GridFunction):
        fs = [fs]
    fs = [as_grid_function(f, grid) for f in fs]
    if not fs:
        raise ValueError("need at least one input function")
    if m is not None and len(fs) != m:
        raise ValueError(f"expected {m} input functions, got {len(fs)}")
    g = fs[0].grid
    for f in fs[1:]:
        if f.grid != g:
            raise GridMismatch(f"input grids differ: {f.grid} vs {g}")
    for f in fs:
        if not np.all(np.isfinite(f.values)):
            raise ValueError("input contains non-finite values")
    return fs


def check_scale_set(values, name: str = "scale set") -> list[float]:
    """Sorted distinct finite positive numbers."""
    out = sorted({float(v) for v in np.atleast_1d(values)})
    if not out:
        raise ValueError(f"{name} must be nonempty")
    for v in out:
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} entries must be finite and positive, got {v}")
    return out


def check_sphere_function(omega) -> SphereFunction:
    if not isinstance(omega, SphereFunction):
        raise TypeError(f"expected a SphereFunction, got {type(omega).__name__}")
    if not np.all(np.isfinite(omega.values)):
        raise ValueError("density contains non-finite values")
    return omega
