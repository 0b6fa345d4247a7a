"""Relative subdifferentials of extended-real piecewise functions.

Exact 1-D engine, sampling oracle, calculus-rule checkers and optimality
and mean-value analyses. The compiled kernels are optional; see
:data:`relsub.kernels.BACKEND`.
"""

__version__ = "0.1.0"

from .errors import (DomainError, DSLSyntaxError, EstimationFailure, EvaluationError,  # noqa: E402
                     InconclusiveLimit, IsolatedEpigraphPoint, ProblemError, RelsubError,
                     SearchFailure, SplitRequired, ValidationError)
from .extreal import INF, NEG_INF  # noqa: E402
from .funcdsl import make_function, make_set  # noqa: E402
from .intervals import Interval, IntervalSet, hausdorff, parse_intervalset  # noqa: E402
from .piecewise import PiecewiseFunc, add_functions  # noqa: E402
from .sets import Box, FiniteUnion, Interval1D, PolytopeH, Segment, interval_set  # noqa: E402
from .subdiff import SubdiffSet, segment_subdiff, subdiff  # noqa: E402

__all__ = [
    "__version__", "INF", "NEG_INF",
    "RelsubError", "DomainError", "DSLSyntaxError", "EvaluationError", "ValidationError",
    "SplitRequired", "IsolatedEpigraphPoint", "EstimationFailure", "InconclusiveLimit",
    "ProblemError", "SearchFailure",
    "Interval", "IntervalSet", "parse_intervalset", "hausdorff",
    "Interval1D", "Segment", "Box", "PolytopeH", "FiniteUnion", "interval_set",
    "PiecewiseFunc", "add_functions", "make_function", "make_set",
    "SubdiffSet", "subdiff", "segment_subdiff",
]
