"""
VGT verifier - finite-field traces and determinant certificates for the family E_a.

This package counts points on the fibers of the elliptic fibration E_a over
F_p and F_{p^2}, assembles the Frobenius trace of the transcendental part,
cross-checks the closed-form special-fiber contributions and emits replayable
certificates that the determinant of its two-dimensional piece is trivial.
"""

__version__ = "0.1.0"

from .detsieve import check_hypotheses, verify_condition_star_star
from .ff import FieldSpec
from .fibration import SurfaceParam
from .reporter import ReportGenerator
from .trace import frobenius_trace, verify_prop45
from .utils import setup_logger

__all__ = [
    "FieldSpec",
    "SurfaceParam",
    "ReportGenerator",
    "check_hypotheses",
    "frobenius_trace",
    "setup_logger",
    "verify_condition_star_star",
    "verify_prop45",
]
