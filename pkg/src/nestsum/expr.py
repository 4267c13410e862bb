"""Core expression model: letters, words, and formal Q-linear combinations.

A :class:`SumExpr` is a finite Q-linear combination of *terms*; a term is a
product of hashable factors (nested-sum words, integral words, named
constants, rational functions of the argument, geometric powers, and the
distribution markers used by the Mellin layer).  Construction always
canonicalizes: like terms are merged, zero coefficients dropped, and factors
kept in a fixed deterministic order, so equality is plain structural
equality.

Sum letters use one uniform codec: a letter (a, b, c, x) stands for the
summand x^i * sign(c)^i / (a*i + b)^|c|.  Harmonic letters are the special
case a=1, b=0, x=1 and geometrically weighted letters fold the sign of the
weight into the sign of c, so every stored weight is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

from .polyq import Poly, RatFunc


class NestSumError(Exception):
    """Base class for all library errors."""


class ValidationError(NestSumError):
    """An invariant of the data model was violated."""


class UnsupportedError(NestSumError):
    """The operation is outside the supported class of inputs."""


# ---------------------------------------------------------------------------
# arguments

@dataclass(frozen=True)
class SymArg:
    name: str

    def key(self):
        return (0, self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class NumArg:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def key(self):
        return (1, self.value)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class InfArg:
    def key(self):
        return (2, 0)

    def __str__(self):
        return "Infinity"


Arg = Union[SymArg, NumArg, InfArg]
INF = InfArg()
N = SymArg("n")
X = SymArg("x")


# ---------------------------------------------------------------------------
# sum letters

@dataclass(frozen=True)
class Letter:
    """Summand x^i sign(c)^i / (a i + b)^|c|; x > 0 after normalization."""

    c: int
    a: int = 1
    b: int = 0
    x: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        if self.c == 0:
            raise ValidationError(f"letter degree must be nonzero: {self._show()}")
        if self.a < 1:
            raise ValidationError(f"letter modulus must be >= 1: {self._show()}")
        if not 0 <= self.b < self.a:
            raise ValidationError(
                f"letter offset must satisfy 0 <= b < a: {self._show()}"
            )
        if self.x <= 0:
            raise ValidationError(
                f"letter weight must be positive after sign folding: {self._show()}"
            )

    def _show(self):
        return f"(a={self.a}, b={self.b}, c={self.c}, x={self.x})"

    @property
    def weight(self) -> int:
        return abs(self.c)

    @property
    def sign(self) -> int:
        return 1 if self.c > 0 else -1

    def is_harmonic(self) -> bool:
        return self.a == 1 and self.b == 0 and self.x == 1

    def is_ssum(self) -> bool:
        return self.a == 1 and self.b == 0

    def key(self):
        return (self.a, self.b, abs(self.c), 0 if self.c < 0 else 1, self.x)


def harm(c: int) -> Letter:
    """Harmonic letter of signed degree c."""
    return Letter(c)


def sletter(c: int, x) -> Letter:
    """Weighted letter: summand x^i sign(c)^i / i^|c|, any nonzero rational x."""
    x = Fraction(x)
    if x == 0:
        raise ValidationError(f"letter weight must be nonzero: degree {c}")
    if c == 0:
        raise ValidationError("letter degree must be nonzero")
    if x < 0:
        return Letter(-c, 1, 0, -x)
    return Letter(c, 1, 0, x)


def cyclo(a: int, b: int, c: int, x=1) -> Letter:
    """Cyclotomic-style letter with modulus a, offset b, signed degree c."""
    x = Fraction(x)
    if x == 0:
        raise ValidationError(f"letter weight must be nonzero: ({a},{b},{c})")
    if x < 0:
        return Letter(-c, a, b, -x)
    return Letter(c, a, b, x)


@dataclass(frozen=True)
class BinomLetter:
    """Cyclotomic letter payload times factorial ratios prod (f i)!/prod (g i)!."""

    c: int
    a: int = 1
    b: int = 0
    x: Fraction = Fraction(1)
    fs: tuple[int, ...] = ()
    gs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "fs", tuple(int(f) for f in self.fs))
        object.__setattr__(self, "gs", tuple(int(g) for g in self.gs))
        if self.c == 0:
            raise ValidationError("binomial letter degree must be nonzero")
        if self.a < 1 or not 0 <= self.b < self.a:
            raise ValidationError(
                f"binomial letter modulus/offset invalid: ({self.a},{self.b})"
            )
        if self.x <= 0:
            raise ValidationError("binomial letter weight must be positive")
        if any(f < 0 for f in self.fs) or any(g < 0 for g in self.gs):
            raise ValidationError("factorial multipliers must be nonnegative")

    @property
    def weight(self) -> int:
        return abs(self.c)

    @property
    def sign(self) -> int:
        return 1 if self.c > 0 else -1

    def key(self):
        return (self.a, self.b, abs(self.c), 0 if self.c < 0 else 1, self.x,
                self.fs, self.gs)


def binom_letter(a: int, b: int, c: int, x, fs, gs) -> BinomLetter:
    x = Fraction(x)
    if x == 0:
        raise ValidationError("binomial letter weight must be nonzero")
    if x < 0:
        return BinomLetter(-c, a, b, -x, tuple(fs), tuple(gs))
    return BinomLetter(c, a, b, x, tuple(fs), tuple(gs))


# ---------------------------------------------------------------------------
# sum words

@dataclass(frozen=True)
class SumWord:
    letters: tuple
    arg: Arg

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise ValidationError("sum word needs at least one letter")
        kinds = {type(l) for l in letters}
        if len(kinds) != 1 or kinds - {Letter, BinomLetter}:
            raise ValidationError("sum word letters must be of one kind")
        if isinstance(self.arg, NumArg):
            v = self.arg.value
            if v.denominator != 1 or v < 0:
                raise ValidationError(
                    f"finite sum argument must be a nonnegative integer, got {v}"
                )

    @property
    def depth(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(l.weight for l in self.letters)

    def is_binomial(self) -> bool:
        return isinstance(self.letters[0], BinomLetter)

    def kind(self) -> str:
        if self.is_binomial():
            return "binomial"
        if all(l.is_harmonic() for l in self.letters):
            return "harmonic"
        if all(l.is_ssum() for l in self.letters):
            return "ssum"
        return "cyclotomic"

    def with_arg(self, arg: Arg) -> "SumWord":
        return SumWord(self.letters, arg)

    def key(self):
        return (
            0 if not self.is_binomial() else 1,
            self.weight,
            self.depth,
            tuple(l.key() for l in self.letters),
            self.arg.key(),
        )


def make_sum(letters: Iterable, arg: Arg) -> SumWord:
    """Validated sum word from raw letters (Letter/BinomLetter instances)."""
    return SumWord(tuple(letters), arg)


# ---------------------------------------------------------------------------
# integral letters and words

@dataclass(frozen=True)
class HReal:
    """Kernel 1/t for a = 0, else 1/(|a| - sign(a) t)."""

    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))

    def key(self):
        return (0, self.a)


@dataclass(frozen=True)
class HCyclo:
    """Kernel t^k / Phi_l(t) with Phi_l the l-th cyclotomic polynomial."""

    l: int
    k: int

    def __post_init__(self):
        if self.l < 1:
            raise ValidationError("cyclotomic kernel index must be >= 1")
        if not 0 <= self.k < cyclotomic_degree(self.l):
            raise ValidationError(
                f"kernel power must satisfy 0 <= k < deg Phi_l: ({self.l},{self.k})"
            )

    def key(self):
        return (1, Fraction(self.l), Fraction(self.k))


@dataclass(frozen=True)
class HKernel:
    """Opaque kernel placeholder; only representation and rendering."""

    kid: str

    def key(self):
        return (2, self.kid)


HLetterT = Union[HReal, HCyclo, HKernel]


@dataclass(frozen=True)
class HWord:
    letters: tuple
    arg: Arg

    def __post_init__(self):
        letters = tuple(
            HReal(l) if isinstance(l, (int, Fraction)) else l for l in self.letters
        )
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise ValidationError("integral word needs at least one letter")
        for l in letters:
            if not isinstance(l, (HReal, HCyclo, HKernel)):
                raise ValidationError(f"bad integral letter {l!r}")

    @property
    def depth(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return len(self.letters)

    def with_arg(self, arg: Arg) -> "HWord":
        return HWord(self.letters, arg)

    def key(self):
        return (
            2,
            self.weight,
            self.depth,
            tuple(l.key() for l in self.letters),
            self.arg.key(),
        )


def hword(letters: Iterable, arg: Arg = X) -> HWord:
    return HWord(tuple(letters), arg)


def cyclotomic_poly(l: int) -> Poly:
    """The l-th cyclotomic polynomial over Q."""
    if l < 1:
        raise ValidationError("cyclotomic index must be >= 1")
    num = Poly([-1] + [0] * (l - 1) + [1])  # x^l - 1
    for d in range(1, l):
        if l % d == 0:
            num = num.divmod(cyclotomic_poly(d))[0]
    return num


def cyclotomic_degree(l: int) -> int:
    return cyclotomic_poly(l).degree


# ---------------------------------------------------------------------------
# scalar-like factors

@dataclass(frozen=True)
class Const:
    """Named transcendental constant (z2, z3, ..., ln2, gamma)."""

    name: str

    def __post_init__(self):
        if not self.name:
            raise ValidationError("constant needs a name")

    def key(self):
        return (self.name,)


@dataclass(frozen=True)
class RatF:
    """Rational function of the designated variable."""

    var: str
    f: RatFunc

    def key(self):
        return (self.var, self.f.num.coeffs, self.f.den.coeffs)


@dataclass(frozen=True)
class GeomPow:
    """base^var with base a nonzero rational, base != 1."""

    var: str
    base: Fraction

    def __post_init__(self):
        object.__setattr__(self, "base", Fraction(self.base))
        if self.base == 0:
            raise ValidationError("geometric base must be nonzero")

    def key(self):
        return (self.var, self.base)


@dataclass(frozen=True)
class LG:
    """LG[n] = log(n) + gamma."""

    var: str

    def key(self):
        return (self.var,)


@dataclass(frozen=True)
class Delta1mx:
    """Dirac delta(1 - x) on [0, 1]."""

    var: str = "x"

    def key(self):
        return (self.var,)


@dataclass(frozen=True)
class PlusDist:
    """word(x)/(1-x) with the plus prescription: pairs with (x^n - 1)."""

    word: HWord | None
    var: str = "x"

    def key(self):
        return (self.word.key() if self.word else (), self.var)


@dataclass(frozen=True)
class OnePlusDist:
    """word(x)/(1+x), an ordinary integrable weight."""

    word: HWord | None
    var: str = "x"

    def key(self):
        return (self.word.key() if self.word else (), self.var)


_KIND_RANK = {
    Const: 0,
    GeomPow: 1,
    LG: 2,
    RatF: 3,
    SumWord: 4,
    HWord: 5,
    Delta1mx: 6,
    PlusDist: 7,
    OnePlusDist: 8,
}

Factor = Union[
    Const, GeomPow, LG, RatF, SumWord, HWord, Delta1mx, PlusDist, OnePlusDist
]


def factor_key(f: Factor):
    return (_KIND_RANK[type(f)],) + tuple(f.key())


# ---------------------------------------------------------------------------
# terms and expressions

def _merge_term(factors: Iterable[tuple[Factor, int]]) -> tuple[tuple, Fraction]:
    """Canonical term from (factor, power) pairs.

    Rational-function factors of one variable multiply together, geometric
    bases of one variable multiply together; a scalar that falls out (for
    example (1/2)^n * 2^n) is returned as an extra coefficient.
    """
    coeff = Fraction(1)
    ratf: dict[str, RatFunc] = {}
    geom: dict[str, Fraction] = {}
    other: dict[Factor, int] = {}
    for f, p in factors:
        if p == 0:
            continue
        if isinstance(f, RatF):
            cur = ratf.get(f.var, RatFunc.const(1))
            g = f.f
            if p < 0:
                g = g.inverse()
                p = -p
            for _ in range(p):
                cur = cur * g
            ratf[f.var] = cur
        elif isinstance(f, GeomPow):
            geom[f.var] = geom.get(f.var, Fraction(1)) * f.base**p
        else:
            other[f] = other.get(f, 0) + p
    out: list[tuple[Factor, int]] = []
    for var in ratf:
        f = ratf[var]
        if f.is_zero():
            return (), Fraction(0)
        content = f.num.content()
        if content != 1:
            coeff *= content
            f = RatFunc(f.num * (1 / content), f.den)
        c = f.as_const()
        if c is not None:
            coeff *= c
        elif not f.is_one():
            out.append((RatF(var, f), 1))
    for var, base in geom.items():
        if base == 1:
            continue
        out.append((GeomPow(var, base), 1))
    for f, p in other.items():
        if p != 0:
            out.append((f, p))
    out.sort(key=lambda fp: factor_key(fp[0]))
    return tuple(out), coeff


class SumExpr:
    """Canonical finite Q-linear combination of factor products."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None, _canonical=False):
        if terms is None:
            terms = {}
        if _canonical:
            object.__setattr__(self, "terms", terms)
            return
        merged: dict[tuple, Fraction] = {}
        for term, coeff in terms.items():
            coeff = Fraction(coeff)
            if not coeff:
                continue
            tt, extra = _merge_term(term)
            coeff *= extra
            if not coeff:
                continue
            merged[tt] = merged.get(tt, Fraction(0)) + coeff
        object.__setattr__(
            self, "terms", {t: c for t, c in merged.items() if c != 0}
        )

    def __setattr__(self, *a):
        raise AttributeError("SumExpr is immutable")

    # constructors ---------------------------------------------------------
    @staticmethod
    def zero() -> "SumExpr":
        return SumExpr({}, _canonical=True)

    @staticmethod
    def number(c) -> "SumExpr":
        c = Fraction(c)
        if c == 0:
            return SumExpr.zero()
        return SumExpr({(): c}, _canonical=True)

    @staticmethod
    def from_factor(f: Factor, coeff=Fraction(1)) -> "SumExpr":
        return SumExpr({((f, 1),): Fraction(coeff)})

    @staticmethod
    def word(w: SumWord | HWord, coeff=Fraction(1)) -> "SumExpr":
        return SumExpr.from_factor(w, coeff)

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def as_number(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    def items(self):
        return sorted(self.terms.items(), key=lambda tc: _term_key(tc[0]))

    def factors_of_type(self, cls):
        for term in self.terms:
            for f, _ in term:
                if isinstance(f, cls):
                    yield f

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: "SumExpr") -> "SumExpr":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, Fraction(0)) + c
        return SumExpr({t: c for t, c in out.items() if c != 0}, _canonical=True)

    def __neg__(self):
        return SumExpr({t: -c for t, c in self.terms.items()}, _canonical=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SumExpr":
        c = Fraction(c)
        if c == 0:
            return SumExpr.zero()
        return SumExpr({t: c * v for t, v in self.terms.items()}, _canonical=True)

    def __mul__(self, other) -> "SumExpr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: dict[tuple, Fraction] = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                tt, extra = _merge_term(list(t1) + list(t2))
                c = c1 * c2 * extra
                if c:
                    out[tt] = out.get(tt, Fraction(0)) + c
        return SumExpr({t: c for t, c in out.items() if c != 0}, _canonical=True)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "SumExpr":
        if k < 0:
            raise ValidationError("negative expression power")
        result = SumExpr.number(1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        return isinstance(other, SumExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def map_terms(self, fn) -> "SumExpr":
        """Sum of fn(term, coeff) over terms; fn returns a SumExpr."""
        out = SumExpr.zero()
        for t, c in self.terms.items():
            out = out + fn(t, c)
        return out

    def __repr__(self):
        from .grammar import format_expr

        return f"SumExpr[{format_expr(self)}]"


def _term_key(term: tuple):
    return tuple((factor_key(f), p) for f, p in term)


def canonicalize(expr: SumExpr) -> SumExpr:
    """Re-merge like terms and drop vanishing sums at argument 0.

    Construction already canonicalizes, so this is idempotent; the extra
    rule applied here is the empty-sum convention S[...](0) = 0.
    """
    out: dict[tuple, Fraction] = {}
    for term, coeff in expr.terms.items():
        if any(
            isinstance(f, SumWord)
            and isinstance(f.arg, NumArg)
            and f.arg.value == 0
            and p > 0
            for f, p in term
        ):
            continue
        out[term] = out.get(term, Fraction(0)) + coeff
    return SumExpr(out)


def expr_weight(expr: SumExpr) -> int:
    """Maximum total word weight over terms (constants count zero)."""
    best = 0
    for term in expr.terms:
        w = sum(
            f.weight * p for f, p in term if isinstance(f, (SumWord, HWord))
        )
        best = max(best, w)
    return best


def substitute_arg(expr: SumExpr, var: str, new: Arg) -> SumExpr:
    """Replace the designated symbolic argument by ``new`` in every factor.

    Rational functions and geometric powers only support integer shifts of
    the variable (new = SymArg) or numeric evaluation (new = NumArg).
    """
    def sub_term(term, coeff):
        out_factors = []
        c = Fraction(coeff)
        for f, p in term:
            if isinstance(f, (SumWord, HWord)) and f.arg == SymArg(var):
                out_factors.append((f.with_arg(new), p))
            elif isinstance(f, RatF) and f.var == var:
                if isinstance(new, NumArg):
                    c *= f.f.eval(new.value) ** p
                elif isinstance(new, SymArg):
                    out_factors.append((RatF(new.name, f.f), p))
                else:
                    raise UnsupportedError("cannot substitute infinity into a rational function")
            elif isinstance(f, GeomPow) and f.var == var:
                if isinstance(new, NumArg):
                    if new.value.denominator != 1:
                        raise UnsupportedError("geometric power needs an integer argument")
                    c *= f.base ** int(new.value)
                elif isinstance(new, SymArg):
                    out_factors.append((GeomPow(new.name, f.base), p))
                else:
                    raise UnsupportedError("cannot substitute infinity into a geometric power")
            elif isinstance(f, LG) and f.var == var:
                if isinstance(new, SymArg):
                    out_factors.append((LG(new.name), p))
                else:
                    raise UnsupportedError("LG substitution needs a symbol")
            else:
                out_factors.append((f, p))
        return SumExpr({tuple(out_factors): c})

    return expr.map_terms(sub_term)
