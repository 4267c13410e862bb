"""Nested-sum and iterated-integral algebra with an exact numeric oracle."""

from .expr import (
    INF,
    BinomLetter,
    Const,
    Delta1mx,
    GeomPow,
    HCyclo,
    HKernel,
    HReal,
    HWord,
    InfArg,
    Letter,
    LG,
    NestSumError,
    NumArg,
    OnePlusDist,
    PlusDist,
    RatF,
    SumExpr,
    SumWord,
    SymArg,
    UnsupportedError,
    ValidationError,
    binom_letter,
    canonicalize,
    cyclo,
    harm,
    hword,
    make_sum,
    sletter,
    substitute_arg,
)
from .render import render_definition
from .stuffle import expand_products, merge_letters, quasi_shuffle

__all__ = [name for name in dir() if not name.startswith("_")]
