"""Positive and completely positive maps on finite-dimensional state spaces: representation and extremality."""

__version__ = "0.1.0"

from .channels import (  # noqa: F401
    ChoiMatrix,
    KrausChannel,
    SuperOpMatrix,
    apply,
    choi_of,
    kraus,
    kraus_from_choi,
    normalize,
    superop_matrix,
    tp_unital_report,
    trace_invariants,
)
from .errors import InputError, ModeError, NotBallPositive, NotCompletelyPositive  # noqa: F401
