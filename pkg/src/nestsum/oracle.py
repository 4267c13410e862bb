"""Independent verification engine.

Exact rational evaluation of nested sums at finite arguments, floating
evaluation of iterated integrals via their power series, and accelerated
numeric values of convergent sums at infinity.  This module deliberately
avoids the symbolic machinery it is used to check: sums are evaluated by
literal recursion on the definition.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .expr import (
    Const,
    GeomPow,
    HWord,
    InfArg,
    LG,
    NumArg,
    RatF,
    SumExpr,
    SumWord,
    SymArg,
    UnsupportedError,
    ValidationError,
)

EULER_GAMMA = 0.57721566490153286061

_N_GUARD = 10**4


class EvalLimitError(UnsupportedError):
    pass


class DivergentSumError(UnsupportedError):
    pass


def _letter_term(letter, i: int) -> Fraction:
    t = letter.x**i / Fraction(letter.a * i + letter.b) ** abs(letter.c)
    if letter.c < 0 and i % 2 == 1:
        t = -t
    for f in getattr(letter, "fs", ()):
        t *= math.factorial(f * i)
    for g in getattr(letter, "gs", ()):
        t /= math.factorial(g * i)
    return t


def eval_sum_prefix(word: SumWord, n: int) -> list[Fraction]:
    """Values of the word at 0..n by the prefix recursion, cost O(n*depth)."""
    if n > _N_GUARD:
        raise EvalLimitError(f"argument {n} exceeds the evaluation guard {_N_GUARD}")
    inner = [Fraction(1)] * (n + 1)
    for letter in reversed(word.letters):
        acc = Fraction(0)
        out = [Fraction(0)] * (n + 1)
        for i in range(1, n + 1):
            acc += _letter_term(letter, i) * inner[i]
            out[i] = acc
        inner = out
    return inner


def eval_sum_exact(word: SumWord, n: int) -> Fraction:
    """Exact value of a sum word at a nonnegative integer argument."""
    if n < 0:
        raise ValidationError("sum argument must be nonnegative")
    return eval_sum_prefix(word, n)[n]


def naive_sum_eval(word: SumWord, n: int) -> Fraction:
    """O(n^depth) nested-loop reference used to cross-check the recursion."""

    def go(letters, bound):
        if not letters:
            return Fraction(1)
        total = Fraction(0)
        for i in range(1, bound + 1):
            total += _letter_term(letters[0], i) * go(letters[1:], i)
        return total

    return go(word.letters, n)


def eval_expr_exact(expr: SumExpr, var: str, n: int) -> Fraction:
    """Evaluate an expression of sum words / rational factors at integer n."""
    total = Fraction(0)
    for term, coeff in expr.terms.items():
        val = Fraction(coeff)
        for f, p in term:
            if isinstance(f, SumWord):
                if isinstance(f.arg, SymArg) and f.arg.name == var:
                    v = eval_sum_exact(f, n)
                elif isinstance(f.arg, NumArg):
                    v = eval_sum_exact(f, int(f.arg.value))
                else:
                    raise UnsupportedError(f"cannot evaluate {f} exactly")
                val *= v**p
            elif isinstance(f, RatF) and f.var == var:
                val *= f.f.eval(Fraction(n)) ** p
            elif isinstance(f, GeomPow) and f.var == var:
                val *= f.base ** (n * p)
            else:
                raise UnsupportedError(f"factor {f!r} is not exactly evaluable")
        total += val
    return total


# ---------------------------------------------------------------------------
# iterated integrals via power series

def eval_hpl(word: HWord, x, tol: float = 1e-12) -> tuple[float, float]:
    """Value of an integral word at rational x, |x| <= 0.7, with error bound.

    Trailing zeros are extracted first so each component has an honest
    power series; the explicit log(x)^k factors are evaluated exactly in
    floating point.  Returns (value, bound).
    """
    from .series import hpl_to_series
    from .shuffle import extract_trailing_zeros

    xf = float(x)
    if abs(xf) > 0.7:
        raise UnsupportedError(f"series evaluation needs |x| <= 0.7, got {x}")
    for l in word.letters:
        if not hasattr(l, "a"):
            raise UnsupportedError("only real-index letters are supported")
        if l.a != 0 and abs(l.a) < 1:
            raise UnsupportedError(
                f"series evaluation needs |index| >= 1 or 0, got {l.a}"
            )
    if xf <= 0.0:
        if xf == 0.0:
            return 0.0, 0.0
        raise UnsupportedError("evaluation point must be positive")
    total = 0.0
    bound = 0.0
    logx = math.log(xf)
    split = extract_trailing_zeros(word)
    for term, coeff in split.terms.items():
        zeros = 0
        inner = None
        for f, p in term:
            if isinstance(f, HWord) and f.depth == 1 and getattr(f.letters[0], "a", 1) == 0:
                zeros += p
            elif isinstance(f, HWord):
                inner = f
            else:
                raise UnsupportedError(f"unexpected factor {f!r}")
        factor = float(coeff) * logx**zeros
        if inner is None:
            total += factor
            continue
        v, b = _series_value(inner, xf, tol)
        total += factor * v
        bound += abs(factor) * b
    return total, bound


def _series_value(word: HWord, x: float, tol: float) -> tuple[float, float]:
    from .series import hpl_to_series

    ps = hpl_to_series(word)
    total = 0.0
    bound = 0.0
    for entry in ps.entries:
        r = abs(x) * float(entry.q)
        coeff_vals = _entry_coeff_prefix(entry, 400)
        acc = 0.0
        term = 0.0
        for i in range(1, 400):
            term = coeff_vals[i] * (float(entry.sign) * x) ** i * float(entry.q) ** i / i**entry.k
            acc += term
            if i > 8 and abs(term) < tol * 1e-3 and r**i < tol * 1e-3:
                break
        tail = abs(term) * r / max(1e-12, 1.0 - r) * 2.0
        total += float(entry.prefactor) * acc
        bound += abs(float(entry.prefactor)) * tail
    return total, bound


def _entry_coeff_prefix(entry, n: int) -> list[float]:
    if entry.word is None:
        return [1.0] * (n + 1)
    return [float(v) for v in eval_sum_prefix(entry.word, n)]


# ---------------------------------------------------------------------------
# values at infinity

def _word_prefix_float(word: SumWord, n: int) -> list[list[float]]:
    """Float prefix values for every suffix of the word, index 0 = full word."""
    suffixes = []
    inner = [1.0] * (n + 1)
    for letter in reversed(word.letters):
        out = [0.0] * (n + 1)
        acc = 0.0
        for i in range(1, n + 1):
            t = float(letter.x) ** i / float(letter.a * i + letter.b) ** abs(letter.c)
            if letter.c < 0 and i % 2 == 1:
                t = -t
            acc += t * inner[i]
            out[i] = acc
        suffixes.append(out)
        inner = out
    suffixes.reverse()
    return suffixes


def is_convergent_at_inf(word: SumWord) -> bool:
    """Head test: degree >= 2, alternating head, or weight < 1 converge."""
    if word.is_binomial():
        raise UnsupportedError("binomial words are not supported at infinity")
    head = word.letters[0]
    if head.x > 1:
        return False
    if head.x < 1:
        return True
    if abs(head.c) >= 2 or head.c < 0:
        return True
    return False


def eval_constant(word: SumWord, tol: float = 1e-8) -> float:
    """Accelerated numeric value of a convergent sum at infinity.

    Direct summation to N plus a tail estimate: geometric extrapolation for
    geometric decay, an Euler transform for alternating tails, and a
    log-power fit of the inner sum against the integral of the smooth
    majorant for plain power decay.
    """
    if not is_convergent_at_inf(word):
        raise DivergentSumError(f"sum diverges at infinity: {word.letters}")
    n = 10000
    pref = _word_prefix_float(word, n + 8)
    value = pref[0][n]
    tail = _tail_estimate(word, pref, n)
    return value + tail


def _tail_estimate(word: SumWord, pref: list[list[float]], n: int) -> float:
    head = word.letters[0]
    k = abs(head.c)
    xr = float(head.x)
    rest_vals = pref[1] if len(pref) > 1 else None

    def rest_at(i: int) -> float:
        return rest_vals[i] if rest_vals is not None else 1.0

    def summand(i: int) -> float:
        t = xr**i / float(head.a * i + head.b) ** k * rest_at(i)
        if head.c < 0 and i % 2 == 1:
            t = -t
        return t

    if xr < 1.0:
        # geometric decay: extend the sum with the inner value frozen at its
        # last computed point (the geometric factor dominates the drift)
        total = 0.0
        frozen = rest_at(n + 8)
        for i in range(n + 1, n + 4000):
            t = xr**i / float(head.a * i + head.b) ** k * frozen
            if head.c < 0 and i % 2 == 1:
                t = -t
            total += t
            if abs(t) < 1e-17 * max(1.0, abs(pref[0][n])):
                break
        return total
    if head.c < 0:
        # alternating: Euler transform of the absolute summand
        g = [abs(summand(n + 1 + j)) for j in range(8)]
        total = 0.0
        sign = -1.0 if (n + 1) % 2 == 1 else 1.0
        coeff = 0.5
        for _ in range(8):
            total += coeff * g[0]
            g = [(g[j] - g[j + 1]) for j in range(len(g) - 1)]
            coeff *= 0.5
        return sign * total
    # plain power decay: fit the inner sum on a log basis and integrate
    basis = [lambda t: 1.0, math.log, lambda t: math.log(t) ** 2,
             lambda t: 1.0 / t, lambda t: math.log(t) / t]
    pts = [n - 24, n - 18, n - 12, n - 6, n]
    mat = [[b(float(p)) for b in basis] for p in pts]
    rhs = [rest_at(p) for p in pts]
    coeffs = _solve_dense(mat, rhs)
    total = 0.0
    for (j, b) in enumerate(basis):
        c = coeffs[j]
        if c == 0.0:
            continue
        total += c * _power_log_tail(k, b, head.a, head.b, n)
    return total


def _power_log_tail(k: int, basis_fn, a: int, b: int, n: int) -> float:
    """Sum_{i>n} basis(i) / (a i + b)^k by Euler-Maclaurin in floats."""
    def g(t: float) -> float:
        return basis_fn(t) / (a * t + b) ** k

    h = 1e-3 * n
    g1 = (g(n + h) - g(n - h)) / (2 * h)
    # integral via substitution u = 1/t with adaptive Simpson on [0, 1/n]
    integral = _simpson(lambda u: g(1.0 / u) / u**2 if u > 0 else 0.0, 0.0, 1.0 / n, 400)
    return integral - g(float(n)) / 2.0 - g1 / 12.0


def _simpson(f, a: float, b: float, m: int) -> float:
    h = (b - a) / m
    total = f(a) + f(b)
    for j in range(1, m):
        total += f(a + j * h) * (4 if j % 2 == 1 else 2)
    return total * h / 3.0


def _solve_dense(mat, rhs):
    m = [row[:] + [r] for row, r in zip(mat, rhs)]
    size = len(m)
    for col in range(size):
        piv = max(range(col, size), key=lambda r: abs(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        if abs(m[col][col]) < 1e-300:
            m[col][col] = 1e-300
        for r in range(size):
            if r != col:
                f = m[r][col] / m[col][col]
                for c in range(col, size + 1):
                    m[r][c] -= f * m[col][c]
    return [m[i][size] / m[i][i] for i in range(size)]


_ZETA_CACHE: dict[int, float] = {}


def zeta_float(k: int) -> float:
    """zeta(k) for k >= 2 by direct summation plus Euler-Maclaurin tail."""
    if k in _ZETA_CACHE:
        return _ZETA_CACHE[k]
    n = 2000
    s = sum(1.0 / i**k for i in range(1, n + 1))
    s += 1.0 / ((k - 1) * n ** (k - 1)) - 0.5 / n**k + k / (12.0 * n ** (k + 1))
    _ZETA_CACHE[k] = s
    return s


def constant_value(name: str) -> float:
    if name.startswith("z") and name[1:].isdigit():
        return zeta_float(int(name[1:]))
    if name == "ln2":
        return math.log(2.0)
    if name == "gamma":
        return EULER_GAMMA
    raise KeyError(f"unknown constant {name}")


def eval_expr_float(
    expr: SumExpr,
    env: dict[str, float] | None = None,
    regulator: float | None = None,
    hook=None,
) -> float:
    """Float value of an expression.

    ``env`` supplies values for symbolic variables; ``regulator`` is the
    value substituted for the formal divergent sum S[1, Infinity]; ``hook``
    may resolve factors this function does not know how to evaluate.
    """
    env = env or {}
    total = 0.0
    for term, coeff in expr.terms.items():
        val = float(coeff)
        for f, p in term:
            val *= _factor_float(f, env, regulator, hook) ** p
        total += val
    return total


def _factor_float(f, env, regulator, hook) -> float:
    if isinstance(f, Const):
        return constant_value(f.name)
    if isinstance(f, SumWord):
        if isinstance(f.arg, InfArg):
            if (
                regulator is not None
                and f.kind() == "harmonic"
                and f.depth == 1
                and f.letters[0].c == 1
            ):
                return regulator
            return eval_constant(f)
        if isinstance(f.arg, NumArg):
            return float(eval_sum_exact(f, int(f.arg.value)))
        if isinstance(f.arg, SymArg) and f.arg.name in env:
            return float(eval_sum_exact(f, int(env[f.arg.name])))
        raise UnsupportedError(f"cannot evaluate {f}")
    if isinstance(f, RatF):
        if f.var in env:
            return float(f.f.eval(Fraction(env[f.var]).limit_denominator(10**9)))
        raise UnsupportedError(f"no value for variable {f.var}")
    if isinstance(f, GeomPow):
        if f.var in env:
            return float(f.base) ** env[f.var]
        raise UnsupportedError(f"no value for variable {f.var}")
    if isinstance(f, LG):
        if f.var in env:
            return math.log(env[f.var]) + EULER_GAMMA
        raise UnsupportedError(f"no value for variable {f.var}")
    if isinstance(f, HWord):
        if isinstance(f.arg, NumArg):
            if all(getattr(l, "a", None) == 0 for l in f.letters):
                return math.log(float(f.arg.value)) ** len(f.letters)
            if float(f.arg.value) <= 0.7:
                return eval_hpl(f, f.arg.value)[0]
        if hook is not None:
            v = hook(f)
            if v is not None:
                return v
        raise UnsupportedError(f"cannot evaluate {f}")
    if hook is not None:
        v = hook(f)
        if v is not None:
            return v
    raise UnsupportedError(f"cannot evaluate factor {f!r}")
