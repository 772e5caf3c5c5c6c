"""Multivariate Fox H-function evaluation by truncated Mellin-Barnes quadrature."""

from .contours import find_contours
from .evaluate import evaluate, hfox
from .identities import IdentityCheck, self_test_identities
from .spec import ContourConfig, EvalResult, FoxHSpec, GammaTerm

__all__ = [
    "ContourConfig",
    "EvalResult",
    "FoxHSpec",
    "GammaTerm",
    "IdentityCheck",
    "evaluate",
    "find_contours",
    "hfox",
    "self_test_identities",
]
