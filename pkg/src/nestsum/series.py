"""Power series of integral words and the inverse direction.

An integral word over real kernel letters with a nonzero last letter has an
exact power series whose coefficients are nested sums of the summation
index: prepending a kernel letter to a series multiplies by a geometric
kernel expansion and integrates, which deepens the coefficient sum by one
letter and leaves a single correction entry from the inclusive upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import (
    HReal,
    HWord,
    Letter,
    NumArg,
    SumExpr,
    SumWord,
    SymArg,
    UnsupportedError,
    ValidationError,
    sletter,
)

IOTA = SymArg("ι")


@dataclass(frozen=True)
class SeriesEntry:
    """prefactor * S_word(i) * (sign*x)^i * q^i / i^k summed over i >= 1."""

    prefactor: Fraction
    word: SumWord | None  # argument IOTA; None means coefficient 1
    sign: int  # +1 or -1
    q: Fraction  # positive geometric weight
    k: int  # index power, >= 1

    def shape(self):
        return (self.word.letters if self.word else None, self.sign, self.q, self.k)


@dataclass(frozen=True)
class PowerSeriesSum:
    """Sum of series entries; convergent for |x * q| < 1 in every entry."""

    entries: tuple[SeriesEntry, ...]
    var: str = "x"

    def coefficient(self, i: int) -> Fraction:
        """Exact coefficient of x^i (sign and q folded in)."""
        from .oracle import eval_sum_exact

        total = Fraction(0)
        for e in self.entries:
            v = eval_sum_exact(e.word, i) if e.word is not None else Fraction(1)
            total += e.prefactor * v * Fraction(e.sign) ** i * e.q**i / Fraction(i) ** e.k
        return total


def _merge_entries(entries) -> tuple[SeriesEntry, ...]:
    acc: dict = {}
    for e in entries:
        acc[e.shape()] = acc.get(e.shape(), Fraction(0)) + e.prefactor
    out = []
    for (letters, sign, q, k), pref in sorted(
        acc.items(),
        key=lambda it: (
            len(it[0][0]) if it[0][0] else 0,
            it[0][3],
            tuple(l.key() for l in it[0][0]) if it[0][0] else (),
            it[0][1],
            it[0][2],
        ),
    ):
        if pref == 0:
            continue
        word = SumWord(letters, IOTA) if letters else None
        out.append(SeriesEntry(pref, word, sign, q, k))
    return tuple(out)


def hpl_to_series(w: HWord) -> PowerSeriesSum:
    """Exact full power series about 0 of a real-letter integral word.

    The last letter must be nonzero (extract trailing zeros first); leading
    and internal zero letters are fine.
    """
    letters = list(w.letters)
    for l in letters:
        if not isinstance(l, HReal):
            raise UnsupportedError(f"series expansion supports real kernels only: {l!r}")
    if letters[-1].a == 0:
        raise ValidationError("series expansion needs a nonzero last letter")
    var = w.arg.name if isinstance(w.arg, SymArg) else "x"

    entries: list[SeriesEntry] = []

    def prepend_nonzero(a: Fraction):
        nonlocal entries
        sgn = 1 if a > 0 else -1
        mag = abs(a)
        out: list[SeriesEntry] = []
        for e in entries:
            y = Fraction(e.sign) * sgn * e.q * mag  # signed letter weight
            new_letter = sletter(e.k, y)
            t_letters = (new_letter,) + (e.word.letters if e.word else ())
            out.append(
                SeriesEntry(
                    e.prefactor * sgn,
                    SumWord(t_letters, IOTA),
                    sgn,
                    Fraction(1, 1) / mag,
                    1,
                )
            )
            out.append(SeriesEntry(-e.prefactor * sgn, e.word, e.sign, e.q, e.k + 1))
        entries = out

    last = letters[-1]
    sgn = 1 if last.a > 0 else -1
    entries = [SeriesEntry(Fraction(sgn), None, sgn, Fraction(1) / abs(last.a), 1)]
    for l in reversed(letters[:-1]):
        if l.a == 0:
            entries = [
                SeriesEntry(e.prefactor, e.word, e.sign, e.q, e.k + 1) for e in entries
            ]
        else:
            prepend_nonzero(l.a)
    return PowerSeriesSum(_merge_entries(entries), var)


def series_to_hpl(ps: PowerSeriesSum) -> SumExpr:
    """Invert :func:`hpl_to_series` on its coefficient grammar.

    Entries are peeled greedily from the deepest coefficient word; each
    candidate word is re-expanded and subtracted, so the result is exact or
    the input is rejected.
    """
    var = SymArg(ps.var)
    remaining: dict = {}
    for e in ps.entries:
        remaining[e.shape()] = remaining.get(e.shape(), Fraction(0)) + e.prefactor
    remaining = {s: c for s, c in remaining.items() if c != 0}
    result = SumExpr.zero()
    for _ in range(200):
        if not remaining:
            return result
        shape = max(
            remaining,
            key=lambda s: (len(s[0]) if s[0] else 0, s[3]),
        )
        letters, sign, q, k = shape
        word_letters: list[HReal] = [HReal(0)] * (k - 1)
        a = Fraction(sign) / q
        word_letters.append(HReal(a))
        expected = Fraction(1 if a > 0 else -1)
        prev_a = a
        for l in letters or ():
            y = Fraction(l.sign) * l.x
            zeros = abs(l.c) - 1
            mag = abs(prev_a) / abs(y)
            sgn2 = (1 if y > 0 else -1) * (1 if prev_a > 0 else -1)
            a2 = Fraction(sgn2) * mag
            word_letters.extend([HReal(0)] * zeros)
            word_letters.append(HReal(a2))
            expected *= sgn2
            prev_a = a2
        coeff = remaining[shape] / expected
        cand = HWord(tuple(word_letters), var)
        result = result + SumExpr.word(cand, coeff)
        for e in hpl_to_series(cand).entries:
            s = e.shape()
            remaining[s] = remaining.get(s, Fraction(0)) - coeff * e.prefactor
            if remaining[s] == 0:
                del remaining[s]
        bad = [s for s, c in remaining.items() if c == 0]
        for s in bad:
            del remaining[s]
    raise UnsupportedError("series does not match the invertible coefficient grammar")
