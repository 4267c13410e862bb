"""Exact univariate polynomial and rational-function arithmetic over Q.

Everything here works with ``fractions.Fraction`` coefficients; nothing is
ever rounded.  Polynomials are immutable tuples of coefficients in ascending
order with no trailing zeros.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence


def _trim(coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
    n = len(coeffs)
    while n > 0 and coeffs[n - 1] == 0:
        n -= 1
    return tuple(Fraction(c) for c in coeffs[:n])


class Poly:
    """Dense univariate polynomial over Q, coefficients ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Fraction | int] = ()):
        object.__setattr__(self, "coeffs", _trim([Fraction(c) for c in coeffs]))

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    @staticmethod
    def const(c) -> "Poly":
        return Poly([Fraction(c)])

    @staticmethod
    def x(shift=0) -> "Poly":
        """The polynomial x + shift."""
        return Poly([Fraction(shift), Fraction(1)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __hash__(self):
        return hash(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly([c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of Poly")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.coeffs[-1]
        quot = [Fraction(0)] * max(0, len(rem) - d)
        for i in range(len(rem) - 1, d - 1, -1):
            if rem[i] == 0:
                continue
            q = rem[i] / lead
            quot[i - d] = q
            for j, c in enumerate(other.coeffs):
                rem[i - d + j] -= q * c
        return Poly(quot), Poly(rem)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a * (1 / a.coeffs[-1])  # monic

    def derivative(self) -> "Poly":
        return Poly([c * i for i, c in enumerate(self.coeffs)][1:])

    def eval(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_shift(self, delta) -> "Poly":
        """p(x + delta) by Horner in (x + delta)."""
        shift = Poly([Fraction(delta), Fraction(1)])
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * shift + Poly.const(c)
        return acc

    def content(self) -> Fraction:
        """Signed content: gcd of coefficients, carrying the leading sign."""
        if self.is_zero():
            return Fraction(1)
        num = math.gcd(*[c.numerator for c in self.coeffs])
        den = math.lcm(*[c.denominator for c in self.coeffs])
        c = Fraction(num, den)
        return -c if self.coeffs[-1] < 0 else c

    def integer_roots(self) -> list[int]:
        """Integer roots with multiplicity, via the rational root theorem."""
        p = self
        roots = []
        while not p.is_zero() and p.coeffs[0] == 0:
            roots.append(0)
            p = Poly(p.coeffs[1:])
        if p.degree < 1:
            return roots
        # clear denominators
        den = math.lcm(*[c.denominator for c in p.coeffs])
        ic = [int(c * den) for c in p.coeffs]
        a0, an = abs(ic[0]), abs(ic[-1])
        cands = set()
        for d in range(1, int(math.isqrt(a0)) + 1):
            if a0 % d == 0:
                cands.update((d, -d, a0 // d, -(a0 // d)))
        for r in sorted(cands, key=abs):
            while p.eval(Fraction(r)) == 0:
                roots.append(r)
                p = p.divmod(Poly([-r, 1]))[0]
        return roots

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"


def poly_series_inverse(p: Poly, order: int) -> list[Fraction]:
    """Coefficients of 1/p(t) as a power series up to t^order (p(0) != 0)."""
    if not p.coeffs or p.coeffs[0] == 0:
        raise ZeroDivisionError("series inverse needs nonzero constant term")
    c0 = p.coeffs[0]
    out = [Fraction(1) / c0]
    for k in range(1, order + 1):
        s = Fraction(0)
        for j in range(1, min(k, p.degree) + 1):
            s += p.coeffs[j] * out[k - j]
        out.append(-s / c0)
    return out


class RatFunc:
    """Reduced rational function num/den over Q; den monic, gcd(num, den) = 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = Poly.const(1)):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den)
        if not g.is_zero() and g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead = den.coeffs[-1]
        if lead != 1:
            num = num * (1 / lead)
            den = den * (1 / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("RatFunc is immutable")

    @staticmethod
    def const(c) -> "RatFunc":
        return RatFunc(Poly.const(c))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == Poly.const(1) and self.den == Poly.const(1)

    def as_const(self) -> Fraction | None:
        if self.den == Poly.const(1) and self.num.degree <= 0:
            return self.num.coeffs[0] if self.num.coeffs else Fraction(0)
        return None

    def __hash__(self):
        return hash((self.num, self.den))

    def __eq__(self, other):
        return (
            isinstance(other, RatFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.num * other, self.den)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def eval(self, x):
        d = self.den.eval(x)
        if isinstance(x, (int, Fraction)) and d == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return self.num.eval(x) / d

    def compose_shift(self, delta) -> "RatFunc":
        return RatFunc(self.num.compose_shift(delta), self.den.compose_shift(delta))

    def __repr__(self):
        return f"RatFunc({self.num!r}, {self.den!r})"


def partial_fractions_linear(
    num: Poly, factors: Sequence[tuple[Fraction, Fraction, int]]
) -> tuple[Poly, list[tuple[int, int, Fraction]]]:
    """Decompose num / prod (a_j x + b_j)^{k_j} over Q.

    ``factors`` lists (a_j, b_j, k_j) with pairwise distinct roots -b_j/a_j.
    Returns (polynomial part, terms) with terms (j, m, coeff) meaning
    coeff / (a_j x + b_j)^m, 1 <= m <= k_j.
    """
    den = Poly.const(1)
    for a, b, k in factors:
        den = den * (Poly([Fraction(b), Fraction(a)]) ** k)
    polypart, rem = num.divmod(den)
    terms: list[tuple[int, int, Fraction]] = []
    for j, (a, b, k) in enumerate(factors):
        # substitute x = (t - b)/a so the j-th factor becomes t; expand the
        # remaining function in t and read off the principal part.
        root = Fraction(-b, a)
        g_num = rem.compose_shift(root)  # polynomial in t' where x = root + t'
        # the factor (a x + b) becomes a*t'; other factors evaluated at x=root+t'
        other = Poly.const(1)
        for i, (a2, b2, k2) in enumerate(factors):
            if i == j:
                continue
            other = other * (Poly([a2 * root + b2, Fraction(a2)]) ** k2)
        inv = poly_series_inverse(other, k - 1)
        # series of g_num * inv up to t'^{k-1}
        series = [Fraction(0)] * k
        for i_, c in enumerate(g_num.coeffs[:k]):
            if c:
                for j_, d in enumerate(inv):
                    if i_ + j_ < k:
                        series[i_ + j_] += c * d
        for m_idx in range(k):
            c = series[m_idx]
            if c:
                # x = root + t' makes the j-th factor a*t'; the residue picks
                # up a^{-k} from the factor and a^{k-m} from t'^{-(k-m_idx)}
                m = k - m_idx
                terms.append((j, m, c / Fraction(a) ** m_idx))
    return polypart, terms


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2)."""
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(n):
        total += Fraction(math.comb(n + 1, k)) * bernoulli(k)
    return -total / (n + 1)


@lru_cache(maxsize=None)
def even_zeta_ratio(m: int) -> Fraction:
    """Rational r with zeta(2m) = r * zeta(2)^m."""
    if m < 1:
        raise ValueError("need m >= 1")
    return (
        Fraction((-1) ** (m + 1))
        * Fraction(24) ** m
        * bernoulli(2 * m)
        / (2 * math.factorial(2 * m))
    )
