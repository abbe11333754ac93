"""Multilinear rough singular integrals, maximal operators and lacunary multipliers on grids."""

from .errors import (
    BandExceedsNyquist,
    BumpTooWide,
    ConfigError,
    DegenerateFit,
    EpsilonBelowResolution,
    GridMismatch,
    MissingCoefficients,
    MultisioError,
    NonPositiveExtent,
    OddN,
    OrderOutOfRange,
    OriginEvaluation,
    RadiusOutOfRange,
    ResolutionTooCoarse,
    ScaleOutOfRange,
    SingularityTooStrong,
    UnsupportedDimension,
)
from .grid import (
    Bump,
    Explicit,
    Gaussian,
    Grid,
    GridFunction,
    Indicator,
    ModulatedGaussian,
    RandomBandLimited,
    fourier_transform,
    lp_norm,
    make_grid,
    random_band_limited,
    refine,
    sample,
    weak_lq_quasinorm,
)
from .sphere import (
    Constant,
    Harmonic,
    OddSignSmooth,
    PowerSingularity,
    RandomPoly,
    SphereFunction,
    Zero,
    level_set_decomposition,
    level_set_piece,
    make_sphere,
    project_mean_zero,
    sphere_lq_norm,
)
from .operators import (
    MultiplierSymbol,
    OperatorOutput,
    apply_multiplier,
    apply_truncated_sio_polar,
    apply_truncated_sio_quadrature,
    hardy_littlewood,
    lacunary_maximal,
    lacunary_multiplier,
    localized_piece,
    maximal_averages,
    maximal_truncated,
    sharp_maximal,
    wavelet_paraproduct,
)
from .wavelets import build_wavelet_pair, decompose, synthesize

__version__ = "0.1.0"
