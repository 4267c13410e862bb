"""Unfold words into their explicit nested sum / iterated integral text."""

from __future__ import annotations

from fractions import Fraction

from .expr import (
    BinomLetter,
    HCyclo,
    HKernel,
    HReal,
    HWord,
    Letter,
    SumWord,
    UnsupportedError,
    cyclotomic_poly,
)

_SUP = {"0": "⁰", "1": "¹", "2": "²", "3": "³", "4": "⁴",
        "5": "⁵", "6": "⁶", "7": "⁷", "8": "⁸", "9": "⁹"}


def _sup(k: int) -> str:
    if k == 1:
        return ""
    return "".join(_SUP[d] for d in str(k))


def _weight_pow(x: Fraction, var: str) -> str:
    if x.numerator == 1 and x.denominator > 1:
        return f"{x.denominator}^-{var}"
    if x.denominator == 1:
        return f"{x.numerator}^{var}"
    return f"({x})^{var}"


def _sum_factor(letter, var: str) -> str:
    num = []
    den = []
    if letter.x != 1:
        num.append(_weight_pow(letter.x, var))
    if letter.c < 0:
        num.append(f"(-1)^{var}")
    k = abs(letter.c)
    if isinstance(letter, BinomLetter):
        for f in sorted(letter.fs, reverse=True):
            num.append(f"({f}{var})!" if f != 1 else f"{var}!")
        mult: dict[int, int] = {}
        for g in letter.gs:
            mult[g] = mult.get(g, 0) + 1
        for g in sorted(mult, reverse=True):
            base = f"({g}{var})!" if g != 1 else f"({var}!)"
            den.append(base + _sup(mult[g]) if mult[g] > 1 else base)
    if letter.b == 0:
        scale = letter.a**k
        body = f"{var}{_sup(k)}"
        den.append(f"{scale}{body}" if scale != 1 else body)
    else:
        den.append(f"({letter.b}+{letter.a}{var}){_sup(k)}")
    num_text = " ".join(num) if num else "1"
    return f"{num_text}/({' '.join(den)})" if len(den) > 1 else f"{num_text}/{den[0]}"


def _kernel_text(letter, var: str) -> str:
    if isinstance(letter, HReal):
        a = letter.a
        if a == 0:
            return f"1/{var}"
        if a > 0:
            return f"1/({a}-{var})"
        return f"1/({var}+{-a})"
    if isinstance(letter, HCyclo):
        phi = cyclotomic_poly(letter.l)
        parts = []
        for p in range(phi.degree, -1, -1):
            c = phi.coeffs[p]
            if c == 0:
                continue
            if p == 0:
                parts.append(f"{c}")
            else:
                body = var if p == 1 else f"{var}{_sup(p)}"
                parts.append(body if c == 1 else f"{c}{body}")
        poly = "+".join(parts).replace("+-", "-")
        top = "1" if letter.k == 0 else f"{var}{_sup(letter.k)}"
        return f"{top}/({poly})"
    if isinstance(letter, HKernel):
        return f"K[{letter.kid}]({var})"
    raise UnsupportedError(f"cannot render kernel {letter!r}")


def render_definition(term) -> str:
    """Explicit nested definition of a sum or integral word, outermost first."""
    if isinstance(term, SumWord):
        parts = []
        bound = str(term.arg)
        for j, letter in enumerate(term.letters, start=1):
            var = f"τ{j}"
            text = _sum_factor(letter, var)
            if j < term.depth:
                text = f"({text})"
            parts.append(f"Σ_{{{var}=1}}^{{{bound}}} {text}")
            bound = var
        return " ".join(parts)
    if isinstance(term, HWord):
        parts = []
        bound = str(term.arg)
        for j, letter in enumerate(term.letters, start=1):
            var = f"τ{j}"
            parts.append(f"∫_0^{bound} {_kernel_text(letter, var)}")
            bound = var
        tail = " ".join(f"dτ{j}" for j in range(term.depth, 0, -1))
        return " ".join(parts) + " " + tail
    raise UnsupportedError(f"cannot render {term!r}")
