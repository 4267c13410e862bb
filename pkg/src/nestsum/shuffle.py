"""Shuffle product on integral words and the word normalizations built on it.

The shuffle of two iterated integrals over the same argument is the sum over
all order-preserving interleavings; it is kernel-agnostic.  Two inversions of
shuffle identities are provided: extraction of trailing zero letters (used by
power series, which need a nonzero last letter) and extraction of leading
designated letters (used for regularized values at the endpoint).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .expr import (
    HReal,
    HWord,
    Letter,
    SumExpr,
    SumWord,
    ValidationError,
)

ShuffleExpansion = SumExpr


def shuffle(u: HWord, v: HWord) -> SumExpr:
    """Sum over interleavings of u and v preserving both internal orders."""
    if u.arg != v.arg:
        raise ValidationError("shuffle needs equal arguments")
    out: dict[tuple, Fraction] = {}

    def go(lu: tuple, lv: tuple, prefix: tuple):
        if not lu or not lv:
            w = prefix + lu + lv
            out[w] = out.get(w, Fraction(0)) + 1
            return
        go(lu[1:], lv, prefix + (lu[0],))
        go(lu, lv[1:], prefix + (lv[0],))

    go(u.letters, v.letters, ())
    return SumExpr({((HWord(ls, u.arg), 1),): c for ls, c in out.items()})


def _is_zero_letter(l) -> bool:
    return isinstance(l, HReal) and l.a == 0


def extract_trailing_zeros(w: HWord) -> SumExpr:
    """Rewrite w as sum of H[0]^k times words with a nonzero last letter.

    Inverts the shuffle identities H[0] * H[u]; a word of d zeros becomes
    H[0]^d / d!.  The result equals w pointwise, with the log(x) singularity
    carried entirely by the explicit H[0] powers.
    """
    zero = HWord((HReal(0),), w.arg)

    def go(word: HWord) -> SumExpr:
        letters = word.letters
        if not _is_zero_letter(letters[-1]):
            return SumExpr.word(word)
        if all(_is_zero_letter(l) for l in letters):
            d = len(letters)
            return SumExpr(
                {((zero, d),): Fraction(1, _factorial(d))}
            )
        u = HWord(letters[:-1], w.arg)
        sh = shuffle(zero, u)
        m = sh.terms.get(((word, 1),), Fraction(0))
        assert m > 0
        rest = SumExpr.zero()
        for term, c in sh.terms.items():
            ((w2, _),) = term
            if w2 == word:
                continue
            rest = rest + go(w2).scale(c)
        lead = SumExpr.from_factor(zero) * go(u)
        return (lead - rest).scale(Fraction(1, m))

    return go(w)


def extract_leading(w: HWord, letter) -> SumExpr:
    """Rewrite w as a polynomial in H[letter] with coefficients that are
    words not starting with that letter (shuffle regularization)."""
    unit = HWord((letter,), w.arg)

    def go(word: HWord) -> SumExpr:
        letters = word.letters
        if letters[0] != letter:
            return SumExpr.word(word)
        if all(l == letter for l in letters):
            d = len(letters)
            return SumExpr({((unit, d),): Fraction(1, _factorial(d))})
        u = HWord(letters[1:], w.arg)
        sh = shuffle(unit, u)
        m = sh.terms.get(((word, 1),), Fraction(0))
        assert m > 0
        rest = SumExpr.zero()
        for term, c in sh.terms.items():
            ((w2, _),) = term
            if w2 == word:
                continue
            rest = rest + go(w2).scale(c)
        lead = SumExpr.from_factor(unit) * go(u)
        return (lead - rest).scale(Fraction(1, m))

    return go(w)


def extract_leading_ones_sum(w: SumWord) -> SumExpr:
    """Stuffle analogue of :func:`extract_leading` for nested sums.

    Every sum word is a polynomial in the depth-one word S[1] with
    coefficients that are words whose head is not the bare harmonic letter
    1; applied at infinity this is the regularized representation with
    S[1, Infinity] as the formal transcendental.
    """
    from .stuffle import quasi_shuffle

    one = Letter(1)
    unit = SumWord((one,), w.arg)

    def go(word: SumWord) -> SumExpr:
        letters = word.letters
        if letters[0] != one or len(letters) == 1:
            return SumExpr.word(word)
        u = SumWord(letters[1:], w.arg)
        qs = quasi_shuffle(unit, u)
        m = qs.terms.get(((word, 1),), Fraction(0))
        assert m > 0
        rest = SumExpr.zero()
        for term, c in qs.terms.items():
            ((w2, _),) = term
            if w2 == word:
                continue
            rest = rest + go(w2).scale(c)
        lead = SumExpr.from_factor(unit) * go(u)
        return (lead - rest).scale(Fraction(1, m))

    return go(w)


def expand_hlog_products(expr: SumExpr) -> SumExpr:
    """Fixpoint of pairwise shuffles on integral-word factors per argument."""
    out = SumExpr.zero()
    for term, coeff in expr.terms.items():
        words: list[HWord] = []
        rest = []
        for f, p in term:
            if isinstance(f, HWord):
                words.extend([f] * p)
            else:
                rest.append((f, p))
        by_arg: dict = {}
        for w in words:
            by_arg.setdefault(w.arg, []).append(w)
        piece = SumExpr({tuple(rest): coeff})
        for arg, group in by_arg.items():
            acc = SumExpr.word(group[0])
            for w in group[1:]:
                nxt = SumExpr.zero()
                for t2, c2 in acc.terms.items():
                    ((wf, _),) = t2
                    nxt = nxt + shuffle(wf, w).scale(c2)
                acc = nxt
            piece = piece * acc
        out = out + piece
    return out


@lru_cache(maxsize=None)
def _factorial(d: int) -> int:
    import math

    return math.factorial(d)
