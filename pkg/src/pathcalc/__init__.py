"""Path-based calculus on compact plane sets."""

__version__ = "0.1.0"

from .approx import (  # noqa: E402
    PolynomialApproximator,
    ResidueCorrectedRationalApproximator,
    antiderivative,
    approx_pipeline,
    clopen_cover,
    dilation_approx,
    idempotent_correct,
    poly_fit,
    radial_check,
    rational_antiderivative,
    rational_fit_with_residue_correction,
)
from .corpus import build_many_components, build_square_vertical, build_standard, build_zigzag, get_entry  # noqa: E402
from .fderiv import bisect_subpaths, estimate_fderivative, separation_witness, verify_fderivative  # noqa: E402
from .functions import Exp, Polynomial, RationalFn, RePart, parse_fn  # noqa: E402
from .geometry import Path, PathFamily, PlaneSet, components, concat, discretize, parse_path, parse_shape, subpath  # noqa: E402
from .integrate import ftc_defect, path_integral, winding_number  # noqa: E402
from .regularity import geodesic_distance, pointwise_constant, uniform_constant  # noqa: E402
from .spaces import DerivativeStack, MSequence, dn_norm, dxm_norm, fnorm, is_algebra_sequence, is_nonanalytic  # noqa: E402
