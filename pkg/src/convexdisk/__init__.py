"""convexdisk: probability that random points in a disk are in convex position.

Exact trig-polynomial engine, numeric two-index recursion, segment geometry
with closed-form baselines, and a seeded Monte-Carlo harness, tied together
by the ``convexdisk`` CLI.
"""

from .errors import (
    ConvexDiskError,
    DomainError,
    SingularityError,
    TermBudgetExceeded,
    ToleranceNotMet,
)
from .trigring import (
    COS,
    SIN,
    PiPoly,
    PowerSeries,
    SingularForm,
    TrigPoly,
    add,
    convolve,
    differentiate,
    eval_num,
    integrate0,
    integrate_singular,
    mul,
    reflect,
    taylor,
)

__all__ = [
    "ConvexDiskError",
    "DomainError",
    "SingularityError",
    "TermBudgetExceeded",
    "ToleranceNotMet",
    "PiPoly",
    "PowerSeries",
    "SingularForm",
    "TrigPoly",
    "SIN",
    "COS",
    "add",
    "mul",
    "convolve",
    "differentiate",
    "eval_num",
    "integrate0",
    "integrate_singular",
    "reflect",
    "taylor",
]

__version__ = "0.1.0"
