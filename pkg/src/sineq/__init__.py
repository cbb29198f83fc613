"""Numerical toolkit for the S-inequality of product measures on ideals."""

__version__ = "0.1.0"

from .core_fns import inv_T, partial_moment_S, phi_stack, reg_gamma_p, tail_T  # noqa: E402
from .ideals import BoxUnionIdeal, LqBallIdeal, StepIdeal2D, dilate, measure  # noqa: E402
from .measures import MeasureSpec  # noqa: E402
from .s_inequality import MonotoneStep, s_bound, verify_ideal  # noqa: E402

__all__ = [
    "BoxUnionIdeal",
    "LqBallIdeal",
    "MeasureSpec",
    "MonotoneStep",
    "StepIdeal2D",
    "dilate",
    "inv_T",
    "measure",
    "partial_moment_S",
    "phi_stack",
    "reg_gamma_p",
    "s_bound",
    "tail_T",
    "verify_ideal",
]
