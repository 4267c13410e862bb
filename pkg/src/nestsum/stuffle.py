"""Quasi-shuffle (stuffle) product of nested sum words.

The product of two sums over the same argument expands by the recursion

    S_{a,u} S_{b,v} = S_{a, u*S_{b,v}} + S_{b, S_{a,u}*v} - S_{a^b, u*v}

where a^b merges the two letters; the minus sign compensates the diagonal,
which both inclusive inner sums count.  Merging two letters with the same
support adds degree magnitudes (signs multiply) and multiplies weights;
letters with distinct linear forms are split by exact partial fractions, so
the letter alphabet stays closed.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    BinomLetter,
    Letter,
    SumExpr,
    SumWord,
    UnsupportedError,
    ValidationError,
    cyclo,
)
from .polyq import Poly, partial_fractions_linear

MergeResult = list[tuple[Letter, Fraction]]


def merge_letters(p: Letter, q: Letter) -> MergeResult:
    """Single-letter combination of two summands over the same index."""
    if isinstance(p, BinomLetter) or isinstance(q, BinomLetter):
        raise UnsupportedError("binomial letters cannot be merged")
    sign = p.sign * q.sign
    x = p.x * q.x
    if (p.a, p.b) == (q.a, q.b):
        return [(cyclo(p.a, p.b, sign * (p.weight + q.weight), x), Fraction(1))]
    if p.a * q.b == q.a * p.b:
        # proportional linear forms: rewrite q's form as a multiple of p's
        lam = Fraction(q.a, p.a)
        coeff = lam ** (-q.weight)
        return [(cyclo(p.a, p.b, sign * (p.weight + q.weight), x), coeff)]
    poly_part, terms = partial_fractions_linear(
        Poly.const(1),
        [
            (Fraction(p.a), Fraction(p.b), p.weight),
            (Fraction(q.a), Fraction(q.b), q.weight),
        ],
    )
    assert poly_part.is_zero()
    forms = [(p.a, p.b), (q.a, q.b)]
    out: MergeResult = []
    for j, m, c in terms:
        a, b = forms[j]
        out.append((cyclo(a, b, sign * m, x), c))
    return out


def quasi_shuffle(u: SumWord, v: SumWord, _check=True) -> SumExpr:
    """Expansion of S_u * S_v into a combination of single words."""
    if _check:
        if u.arg != v.arg:
            raise ValidationError("quasi-shuffle needs equal arguments")
        if u.is_binomial() or v.is_binomial():
            raise UnsupportedError("binomial words are outside the stuffle engine")
    arg = u.arg
    out: dict[tuple, Fraction] = {}

    def emit(letters: tuple, coeff: Fraction):
        out[letters] = out.get(letters, Fraction(0)) + coeff

    def go(lu: tuple, lv: tuple, prefix: tuple, coeff: Fraction):
        if not lu:
            emit(prefix + lv, coeff)
            return
        if not lv:
            emit(prefix + lu, coeff)
            return
        go(lu[1:], lv, prefix + (lu[0],), coeff)
        go(lu, lv[1:], prefix + (lv[0],), coeff)
        for letter, c in merge_letters(lu[0], lv[0]):
            go(lu[1:], lv[1:], prefix + (letter,), -coeff * c)

    go(u.letters, v.letters, (), Fraction(1))
    expr = SumExpr(
        {((SumWord(ls, arg), 1),): c for ls, c in out.items() if c != 0}
    )
    return expr


def expand_products(expr: SumExpr) -> SumExpr:
    """Fixpoint of pairwise quasi-shuffles: no term keeps a product of sum
    words with a common argument.  Words of other kinds are left alone."""
    out = SumExpr.zero()
    for term, coeff in expr.terms.items():
        words: list[SumWord] = []
        rest = []
        for f, p in term:
            if isinstance(f, SumWord) and not f.is_binomial():
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
                    (wf, _), = t2
                    nxt = nxt + quasi_shuffle(wf, w).scale(c2)
                acc = nxt
            piece = piece * acc
        out = out + piece
    return out
