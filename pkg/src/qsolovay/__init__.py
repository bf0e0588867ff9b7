"""Exact-arithmetic toolkit for Solovay and quasi-Solovay reducibility on left-c.e. reals."""
from .errors import (
    BudgetExceeded,
    InsufficientDepth,
    InsufficientPrecision,
    NotDyadicError,
    UndecidedComparison,
)
from .rational import Q, RationalInterval, qstr
from .reals import LeftCEReal, fixture, power_gap
from .reduction import QSWitness, check_witness

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "InsufficientDepth",
    "InsufficientPrecision",
    "LeftCEReal",
    "NotDyadicError",
    "Q",
    "QSWitness",
    "RationalInterval",
    "UndecidedComparison",
    "check_witness",
    "fixture",
    "power_gap",
    "qstr",
]
