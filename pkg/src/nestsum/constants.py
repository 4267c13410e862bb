"""Reduction of sums at infinity and integral words at one to a constant basis.

Three ingredients combine here.  The dictionary maps an integral word at
argument one to nested sums at infinity through its exact power series.  Both
product structures are regularized: sums with a leading bare 1-letter become
polynomials in the formal symbol T = S[1, Infinity] by stuffle extraction,
and integral words with a leading 1-letter become polynomials in H[1](1) by
shuffle extraction.  The two regularized values of one word differ by the
correction operator rho with exp-generating function
exp(sum_{n>=2} (-1)^n zeta(n) u^n / n); equating them word by word, together
with plain product relations on the convergent side, yields the linear
relation table that drives the reduction.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .expr import (
    Const,
    HReal,
    HWord,
    INF,
    Letter,
    NumArg,
    SumExpr,
    SumWord,
    UnsupportedError,
    sletter,
)
from .polyq import even_zeta_ratio
from .relations import _apply_rules, _eliminate, word_key
from .series import hpl_to_series
from .shuffle import extract_leading, extract_leading_ones_sum, extract_trailing_zeros, shuffle
from .stuffle import quasi_shuffle

MAX_WEIGHT = 5

_ONE = Letter(1)
_T_WORD = SumWord((_ONE,), INF)
_H_ONE = HReal(1)


def _t_power(k: int) -> SumExpr:
    if k == 0:
        return SumExpr.number(1)
    return SumExpr({(((_T_WORD), k),): Fraction(1)})


def hpl_at_one(word: HWord) -> SumExpr:
    """Formal dictionary value of an integral word at x = 1 as sums at infinity.

    Trailing zeros contribute log(1) = 0, so only the pure part survives.
    The result may contain divergent sums when the word starts with 1; those
    are meaningful only inside the regularized pipeline.
    """
    split = extract_trailing_zeros(HWord(word.letters, NumArg(1)))
    total = SumExpr.zero()
    for term, coeff in split.terms.items():
        inner = None
        pure = True
        for f, p in term:
            if isinstance(f, HWord) and f.depth == 1 and getattr(f.letters[0], "a", 1) == 0:
                pure = False  # a power of log(1) = 0
                break
            inner = f
        if not pure:
            continue
        if inner is None:
            total = total + SumExpr.number(coeff)
            continue
        for e in hpl_to_series(HWord(inner.letters, NumArg(1))).entries:
            head = sletter(e.k, Fraction(e.sign) * e.q)
            letters = (head,) + (e.word.letters if e.word else ())
            total = total + SumExpr.word(SumWord(letters, INF), coeff * e.prefactor)
    return total


def is_convergent_word(letters: tuple) -> bool:
    head = letters[0]
    if head.x > 1:
        return False
    if head.x < 1:
        return True
    return abs(head.c) >= 2 or head.c < 0


def sum_reg(word: SumWord) -> SumExpr:
    """Stuffle-regularized value: polynomial in T with convergent words."""
    return extract_leading_ones_sum(SumWord(word.letters, INF))


def hpl_reg(word: HWord) -> SumExpr:
    """Shuffle-regularized value at one, with H[1](1) identified with T and
    the convergent coefficient words mapped through the dictionary."""
    reg = extract_leading(HWord(word.letters, NumArg(1)), _H_ONE)
    total = SumExpr.zero()
    for term, coeff in reg.terms.items():
        piece = SumExpr.number(coeff)
        for f, p in term:
            if isinstance(f, HWord) and f.letters == (_H_ONE,):
                piece = piece * _t_power(p)
            elif isinstance(f, HWord):
                val = hpl_at_one(f)
                piece = piece * val**p
            else:
                raise UnsupportedError(f"unexpected factor {f!r} in regularization")
        total = total + piece
    return total


# ---------------------------------------------------------------------------
# the comparison operator

@lru_cache(maxsize=1)
def _rho_coefficients() -> dict[int, SumExpr]:
    """u-coefficients of exp(sum_{n>=2} (-1)^n S[n,inf] u^n / n), n <= MAX."""
    g: dict[int, SumExpr] = {}
    for n in range(2, MAX_WEIGHT + 1):
        zn = SumExpr.word(SumWord((Letter(n),), INF))
        g[n] = zn.scale(Fraction((-1) ** n, n))
    coeffs = {0: SumExpr.number(1)}
    power = {0: SumExpr.number(1)}  # g^m truncated
    fact = 1
    for m in range(1, MAX_WEIGHT + 1):
        nxt: dict[int, SumExpr] = {}
        for d1, c1 in power.items():
            for d2, c2 in g.items():
                d = d1 + d2
                if d <= MAX_WEIGHT:
                    nxt[d] = nxt.get(d, SumExpr.zero()) + c1 * c2
        power = nxt
        fact *= m
        for d, c in power.items():
            coeffs[d] = coeffs.get(d, SumExpr.zero()) + c.scale(Fraction(1, fact))
    return coeffs


def rho(expr: SumExpr) -> SumExpr:
    """Apply the regularization comparison to a polynomial in T."""
    a = _rho_coefficients()
    out = SumExpr.zero()
    for term, coeff in expr.terms.items():
        p = 0
        rest = []
        for f, q in term:
            if f == _T_WORD:
                p = q
            else:
                rest.append((f, q))
        piece = SumExpr({tuple(rest): coeff})
        acc = SumExpr.zero()
        for j in range(0, p + 1):
            if j in a:
                perm = 1
                for i_ in range(j):
                    perm *= p - i_
                acc = acc + a[j].scale(perm) * _t_power(p - j)
        if p == 0:
            acc = SumExpr.number(1)
        out = out + piece * acc
    return out


# ---------------------------------------------------------------------------
# relation harvest and solve

def _h_words(weight: int):
    letters = [HReal(0), HReal(1), HReal(-1)]
    words: list[tuple] = [()]
    for _ in range(weight):
        words = [w + (l,) for w in words for l in letters]
    return [w for w in words]


def _sum_words(weight: int):
    out: list[tuple] = []

    def go(prefix: tuple, rem: int):
        if rem == 0:
            out.append(prefix)
            return
        for d in range(1, rem + 1):
            for s in (1, -1):
                go(prefix + (Letter(s * d),), rem - d)

    go((), weight)
    return out


def _split_by_t(expr: SumExpr) -> dict[int, SumExpr]:
    out: dict[int, SumExpr] = {}
    for term, coeff in expr.terms.items():
        p = 0
        rest = []
        for f, q in term:
            if f == _T_WORD:
                p = q
            else:
                rest.append((f, q))
        out[p] = out.get(p, SumExpr.zero()) + SumExpr({tuple(rest): coeff})
    return out


@lru_cache(maxsize=1)
def constant_rules() -> dict[tuple, SumExpr]:
    """Reduction rules for convergent harmonic sums at infinity, weight <= 5."""
    rules: dict[tuple, SumExpr] = {}
    pending: dict[int, list[tuple[dict, SumExpr]]] = {w: [] for w in range(1, MAX_WEIGHT + 1)}

    def harvest(relation: SumExpr):
        """relation == 0; split by T powers and file rows by atom weight."""
        for _, piece in _split_by_t(relation).items():
            lhs: dict[tuple, Fraction] = {}
            rhs = SumExpr.zero()
            top = 0
            for term, coeff in piece.terms.items():
                words = [
                    (f, p)
                    for f, p in term
                    if isinstance(f, SumWord) and isinstance(f.arg, type(INF))
                ]
                tw = sum(
                    sum(l.weight for l in f.letters) * p for f, p in words
                )
                top = max(top, tw)
            if top == 0:
                if not piece.is_zero():
                    raise UnsupportedError("inconsistent constant relation")
                continue
            for term, coeff in piece.terms.items():
                single = None
                if len(term) == 1:
                    f, p = term[0]
                    if (
                        isinstance(f, SumWord)
                        and p == 1
                        and sum(l.weight for l in f.letters) == top
                    ):
                        single = f
                if single is not None:
                    lhs[single.letters] = lhs.get(single.letters, Fraction(0)) + coeff
                else:
                    rhs = rhs - SumExpr({term: coeff})
            if lhs:
                pending[top].append((lhs, rhs))

    # class (iii): regularization comparison for words with a leading 1
    for w in range(2, MAX_WEIGHT + 1):
        for letters in _h_words(w):
            if letters[0] != _H_ONE:
                continue
            word = HWord(letters, NumArg(1))
            lhs = hpl_reg(word)
            raw = hpl_at_one(word)
            reg_total = SumExpr.zero()
            for term, coeff in raw.terms.items():
                piece = SumExpr.number(coeff)
                for f, p in term:
                    if isinstance(f, SumWord) and not is_convergent_word(f.letters):
                        piece = piece * sum_reg(f) ** p
                    else:
                        piece = piece * SumExpr({((f, p),): Fraction(1)})
                reg_total = reg_total + piece
            harvest(lhs - rho(reg_total))
    # class (ii): shuffle products of convergent integral words
    for w in range(2, MAX_WEIGHT + 1):
        for w1 in range(1, w // 2 + 1):
            w2 = w - w1
            us = [l for l in _h_words(w1) if l[0] != _H_ONE]
            vs = [l for l in _h_words(w2) if l[0] != _H_ONE]
            for i, u in enumerate(us):
                for v in vs[i:] if w1 == w2 else vs:
                    sh = shuffle(HWord(u, NumArg(1)), HWord(v, NumArg(1)))
                    rel = hpl_at_one(HWord(u, NumArg(1))) * hpl_at_one(
                        HWord(v, NumArg(1))
                    )
                    for term, coeff in sh.terms.items():
                        ((f, _),) = term
                        rel = rel - hpl_at_one(f).scale(coeff)
                    harvest(rel)
    # class (i): stuffle products of convergent sums
    for w in range(2, MAX_WEIGHT + 1):
        for w1 in range(1, w // 2 + 1):
            w2 = w - w1
            us = [l for l in _sum_words(w1) if is_convergent_word(l)]
            vs = [l for l in _sum_words(w2) if is_convergent_word(l)]
            for i, u in enumerate(us):
                for v in vs[i:] if w1 == w2 else vs:
                    qs = quasi_shuffle(SumWord(u, INF), SumWord(v, INF))
                    rel = SumExpr.word(SumWord(u, INF)) * SumExpr.word(
                        SumWord(v, INF)
                    ) - qs
                    harvest(rel)

    for w in range(1, MAX_WEIGHT + 1):
        rows = []
        for lhs, rhs in pending[w]:
            rows.append((lhs, _apply_rules(rhs, rules)))
        atoms = sorted(
            {wd for lhs, _ in rows for wd in lhs}, key=word_key
        )
        keep = {
            wd
            for wd in atoms
            if len(wd) == 1 and (wd[0].c >= 2 or wd[0] == Letter(-1))
        }
        stratum = _eliminate(
            rows, keep, atoms, allow_keep_pivot=True,
            mk=lambda letters: SumWord(letters, INF),
        )
        # fully reduce right sides against everything known so far
        for wd, e in stratum.items():
            rules[wd] = _apply_rules(e, rules)
        for wd in list(rules):
            rules[wd] = _apply_rules(rules[wd], rules)
    return rules


# ---------------------------------------------------------------------------
# public reduction

def _name_constants(expr: SumExpr) -> SumExpr:
    """Depth-one sums at infinity become named constants: z_k and ln2."""
    def fn(term, coeff):
        out = []
        piece = SumExpr.number(coeff)
        for f, p in term:
            if (
                isinstance(f, SumWord)
                and isinstance(f.arg, type(INF))
                and f.kind() == "harmonic"
                and f.depth == 1
                and f.letters[0].c >= 2
            ):
                out.append((Const(f"z{f.letters[0].c}"), p))
            elif (
                isinstance(f, SumWord)
                and isinstance(f.arg, type(INF))
                and f.letters == (Letter(-1),)
            ):
                out.append((Const("ln2"), p))
                piece = piece.scale(Fraction(-1) ** p)
            else:
                out.append((f, p))
        return piece * SumExpr({tuple(out): Fraction(1)})

    return expr.map_terms(fn)


def _reduce_even_zetas(expr: SumExpr) -> SumExpr:
    def fn(term, coeff):
        piece = SumExpr.number(coeff)
        rest = []
        for f, p in term:
            if isinstance(f, Const) and f.name.startswith("z") and f.name[1:].isdigit():
                k = int(f.name[1:])
                if k >= 4 and k % 2 == 0:
                    r = even_zeta_ratio(k // 2)
                    piece = piece * SumExpr.from_factor(Const("z2")) ** (
                        (k // 2) * p
                    )
                    piece = piece.scale(r**p)
                    continue
            rest.append((f, p))
        return piece * SumExpr({tuple(rest): Fraction(1)})

    return expr.map_terms(fn)


def reduce_constants(expr: SumExpr) -> SumExpr:
    """Rewrite sums at infinity and integral words at one over the constant
    basis; S[1, Infinity] stays as the formal regulator symbol."""
    rules = constant_rules()

    def fn(term, coeff):
        piece = SumExpr.number(coeff)
        for f, p in term:
            if isinstance(f, HWord) and f.arg == NumArg(1):
                val = hpl_at_one(f)
                val = _expand_divergent(val, rules)
                piece = piece * val**p
            elif (
                isinstance(f, SumWord)
                and isinstance(f.arg, type(INF))
                and not f.is_binomial()
            ):
                val = _expand_divergent(SumExpr.word(f), rules)
                piece = piece * val**p
            else:
                piece = piece * SumExpr({((f, p),): Fraction(1)})
        return piece

    out = expr.map_terms(fn)
    out = _apply_rules(out, rules)
    return _reduce_even_zetas(_name_constants(out))


def _expand_divergent(expr: SumExpr, rules) -> SumExpr:
    def fn(term, coeff):
        piece = SumExpr.number(coeff)
        for f, p in term:
            if (
                isinstance(f, SumWord)
                and isinstance(f.arg, type(INF))
                and not f.is_binomial()
                and f.depth >= 2
                and not is_convergent_word(f.letters)
                and f.kind() in ("harmonic", "ssum")
                and f.letters[0] == _ONE
            ):
                piece = piece * sum_reg(f) ** p
            else:
                piece = piece * SumExpr({((f, p),): Fraction(1)})
        return piece

    return expr.map_terms(fn)
