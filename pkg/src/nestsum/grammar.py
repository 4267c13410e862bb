"""Surface syntax: tokenizer, parser, and canonical printer.

The grammar mirrors the bracketed notation used throughout:

    S[1,2,n]  S[1,2,{2,1/3},n]  S[{{3,2,1},{2,0,-2}},n]  CS[...]  BS[...]
    H[1,0,x]  H[{3,1},{5,1},x]  z2..z9  LG[n]  Delta1mx  Infinity
    rationals, + - * / ^ ( ), geometric powers 2^n and (-1)^n,
    weighted words H[1,0,x]/(1-x) and H[...]/(1+x)

Parsing and printing are inverse on canonical forms; diagnostics carry the
offending position and the expected token set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

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
    LG,
    Letter,
    NestSumError,
    NumArg,
    OnePlusDist,
    PlusDist,
    RatF,
    SumExpr,
    SumWord,
    SymArg,
    binom_letter,
    cyclo,
    factor_key,
    sletter,
)
from .polyq import Poly, RatFunc


class ParseError(NestSumError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line = line
        self.col = col
        self.expected = sorted(expected)
        loc = f"{line}:{col}"
        exp = f" (expected {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{message} at {loc}{exp}")


@dataclass
class Token:
    kind: str  # NUM, NAME, OP, END
    text: str
    line: int
    col: int


_OPS = set("+-*/^()[]{},=")


def tokenize(text: str) -> list[Token]:
    out = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(Token("NUM", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(Token("NAME", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _OPS:
            out.append(Token("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    out.append(Token("END", "", line, col))
    return out


class Parser:
    def __init__(self, text: str, var_hint: str | None = None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.var_hint = var_hint

    # -- token plumbing ------------------------------------------------
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise ParseError(
                f"unexpected {t.text or 'end of input'!r}", t.line, t.col, {want}
            )
        return self.next()

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    # -- expression grammar ---------------------------------------------
    def parse_expr(self) -> SumExpr:
        value = self.parse_term()
        while True:
            if self.accept("OP", "+"):
                value = value + self.parse_term()
            elif self.accept("OP", "-"):
                value = value - self.parse_term()
            else:
                return value

    def parse_term(self) -> SumExpr:
        value = self.parse_power()
        while True:
            if self.accept("OP", "*"):
                value = value * self.parse_power()
            elif self.accept("OP", "/"):
                t = self.peek()
                value = self._divide(value, self.parse_power(), t)
            else:
                return value

    def parse_power(self) -> SumExpr:
        base = self.parse_atom()
        if self.accept("OP", "^"):
            t = self.peek()
            if t.kind == "NAME":
                var = self.next().text
                c = base.as_number()
                if c is None:
                    raise ParseError(
                        "geometric power needs a rational base", t.line, t.col
                    )
                return SumExpr.from_factor(GeomPow(var, c))
            k = self._parse_int_exponent()
            return base**k if k >= 0 else self._divide(
                SumExpr.number(1), base ** (-k), t
            )
        return base

    def _parse_int_exponent(self) -> int:
        t = self.peek()
        if t.kind == "NUM":
            return int(self.next().text)
        if t.kind == "OP" and t.text == "(":
            self.next()
            sign = -1 if self.accept("OP", "-") else 1
            num = self.expect("NUM")
            close = self.peek()
            if close.kind == "NAME":
                # (base)^-style geometric handled one level up; reject here
                raise ParseError("bad exponent", close.line, close.col)
            self.expect("OP", ")")
            return sign * int(num.text)
        raise ParseError("bad exponent", t.line, t.col, {"integer"})

    def _divide(self, num: SumExpr, den: SumExpr, tok: Token) -> SumExpr:
        c = den.as_number()
        if c is not None:
            if c == 0:
                raise ParseError("division by zero", tok.line, tok.col)
            return num.scale(Fraction(1) / c)
        dist = _match_one_pm_x(den)
        if dist is not None and dist[1] == "x" and not _uses_var(num, "x"):
            sign, var = dist
            return num.map_terms(lambda t, co: _attach_dist(t, co, sign, var, tok))
        inv = _as_ratfunc(den)
        if inv is not None:
            var, f = inv
            num_rf = _as_ratfunc(num)
            if num_rf is not None and (num_rf[0] == var or num_rf[1].as_const() is not None):
                g = num_rf[1] * f.inverse()
                cg = g.as_const()
                if cg is not None:
                    return SumExpr.number(cg)
                return SumExpr.from_factor(RatF(var, g))
            return num * SumExpr.from_factor(RatF(var, f.inverse()))
        raise ParseError(
            "can only divide by rationals, rational functions, (1-x), or (1+x)",
            tok.line,
            tok.col,
        )

    def parse_atom(self) -> SumExpr:
        t = self.peek()
        if t.kind == "OP" and t.text == "-":
            self.next()
            return -self.parse_power()
        if t.kind == "OP" and t.text == "(":
            self.next()
            e = self.parse_expr()
            self.expect("OP", ")")
            return e
        if t.kind == "NUM":
            self.next()
            return SumExpr.number(int(t.text))
        if t.kind == "NAME":
            name = self.next().text
            if name in ("S", "CS"):
                return self._parse_sum_word()
            if name == "BS":
                return self._parse_binom_word()
            if name == "H":
                return self._parse_h_word()
            if name == "LG":
                self.expect("OP", "[")
                var = self.expect("NAME").text
                self.expect("OP", "]")
                return SumExpr.from_factor(LG(var))
            if name == "Delta1mx":
                return SumExpr.from_factor(Delta1mx("x"))
            if len(name) > 1 and name[0] == "z" and name[1:].isdigit():
                return SumExpr.from_factor(Const(name))
            if name == "ln2":
                return SumExpr.from_factor(Const("ln2"))
            if name in ("Infinity", "inf"):
                raise ParseError("Infinity is only valid as a sum argument", t.line, t.col)
            # bare variable
            return SumExpr.from_factor(RatF(name, RatFunc(Poly.x())))
        raise ParseError(
            f"unexpected {t.text or 'end of input'!r}",
            t.line,
            t.col,
            {"expression"},
        )

    # -- bracketed forms --------------------------------------------------
    def _parse_arg(self):
        t = self.peek()
        if t.kind == "NAME" and t.text in ("Infinity", "inf"):
            self.next()
            return INF
        if t.kind == "NAME":
            return SymArg(self.next().text)
        v = self._parse_rational(allow_negative=True)
        return NumArg(v)

    def _parse_rational(self, allow_negative=False) -> Fraction:
        sign = 1
        if allow_negative and self.accept("OP", "-"):
            sign = -1
        t = self.expect("NUM")
        val = Fraction(int(t.text))
        if self.accept("OP", "/"):
            d = self.expect("NUM")
            val /= int(d.text)
        return sign * val

    def _parse_brace_list(self) -> list:
        """{elem, ...} where elem is a rational or a nested brace list."""
        self.expect("OP", "{")
        items: list = []
        if not self.accept("OP", "}"):
            while True:
                if self.peek().text == "{":
                    items.append(self._parse_brace_list())
                else:
                    items.append(self._parse_rational(allow_negative=True))
                if self.accept("OP", "}"):
                    break
                self.expect("OP", ",")
        return items

    def _parse_sum_word(self) -> SumExpr:
        open_tok = self.expect("OP", "[")
        degrees: list[Fraction] = []
        cyclo_triples: list[list[Fraction]] | None = None
        weights: list[Fraction] | None = None
        arg = None
        while True:
            t = self.peek()
            if t.text == "{":
                lst = self._parse_brace_list()
                if lst and isinstance(lst[0], list):
                    if cyclo_triples is not None or degrees:
                        raise ParseError("misplaced index list", t.line, t.col)
                    cyclo_triples = lst
                else:
                    if weights is not None:
                        raise ParseError("duplicate weight list", t.line, t.col)
                    weights = lst
            elif t.kind == "NAME" or t.kind == "NUM" or t.text == "-":
                if t.kind == "NAME":
                    arg = self._parse_arg()
                else:
                    degrees.append(self._parse_rational(allow_negative=True))
            else:
                raise ParseError(
                    f"unexpected {t.text!r} in sum word", t.line, t.col
                )
            if self.accept("OP", "]"):
                break
            self.expect("OP", ",")
        if arg is None:
            # a trailing numeric element is the argument
            if degrees:
                arg = NumArg(degrees.pop())
            else:
                raise ParseError(
                    "sum word needs an argument", open_tok.line, open_tok.col
                )
        try:
            letters = _build_sum_letters(degrees, cyclo_triples, weights)
            word = SumWord(tuple(letters), arg)
        except NestSumError as e:
            raise ParseError(str(e), open_tok.line, open_tok.col) from e
        return SumExpr.word(word)

    def _parse_binom_word(self) -> SumExpr:
        open_tok = self.expect("OP", "[")
        triples = self._parse_brace_list()
        self.expect("OP", ",")
        weights = self._parse_brace_list()
        self.expect("OP", ",")
        fact = self._parse_brace_list()
        self.expect("OP", ",")
        arg = self._parse_arg()
        self.expect("OP", "]")
        try:
            letters = []
            for (a, b, c), x, fg in zip(triples, weights, fact, strict=True):
                fs, gs = fg
                letters.append(
                    binom_letter(int(a), int(b), int(c), x,
                                 [int(f) for f in fs], [int(g) for g in gs])
                )
            word = SumWord(tuple(letters), arg)
        except (ValueError, NestSumError) as e:
            raise ParseError(str(e), open_tok.line, open_tok.col) from e
        return SumExpr.word(word)

    def _parse_h_word(self) -> SumExpr:
        open_tok = self.expect("OP", "[")
        letters: list = []
        arg = None
        while True:
            t = self.peek()
            if t.text == "{":
                pair = self._parse_brace_list()
                if len(pair) != 2:
                    raise ParseError("kernel pair needs {l,k}", t.line, t.col)
                letters.append(HCyclo(int(pair[0]), int(pair[1])))
            elif t.kind == "NAME":
                arg = self._parse_arg()
            else:
                letters.append(HReal(self._parse_rational(allow_negative=True)))
            if self.accept("OP", "]"):
                break
            self.expect("OP", ",")
        if arg is None:
            if letters and isinstance(letters[-1], HReal):
                arg = NumArg(letters.pop().a)
            else:
                raise ParseError(
                    "integral word needs an argument", open_tok.line, open_tok.col
                )
        try:
            word = HWord(tuple(letters), arg)
        except NestSumError as e:
            raise ParseError(str(e), open_tok.line, open_tok.col) from e
        return SumExpr.word(word)


def _build_sum_letters(degrees, cyclo_triples, weights) -> list[Letter]:
    if cyclo_triples is not None:
        n = len(cyclo_triples)
        ws = weights if weights is not None else [Fraction(1)] * n
        if len(ws) != n:
            raise ValueError("weight list length mismatch")
        return [
            cyclo(int(a), int(b), int(c), w)
            for (a, b, c), w in zip(cyclo_triples, ws)
        ]
    if not degrees:
        raise ValueError("sum word needs letters")
    for d in degrees:
        if Fraction(d).denominator != 1:
            raise ValueError(f"harmonic degree must be an integer, got {d}")
    n = len(degrees)
    ws = weights if weights is not None else [Fraction(1)] * n
    if len(ws) != n:
        raise ValueError("weight list length mismatch")
    return [sletter(int(d), w) for d, w in zip(degrees, ws)]


def _uses_var(e: SumExpr, var: str) -> bool:
    for term in e.terms:
        for f, _ in term:
            if isinstance(f, (RatF, GeomPow, LG)) and f.var == var:
                return True
    return False


def _match_one_pm_x(e: SumExpr):
    """Recognize 1 - var or 1 + var; returns (sign, var) with sign = -1 for 1-x."""
    if len(e.terms) != 2:
        return None
    const = e.terms.get(())
    if const != 1:
        return None
    for term, c in e.terms.items():
        if term == ():
            continue
        if len(term) != 1:
            return None
        f, p = term[0]
        if not isinstance(f, RatF) or p != 1 or f.f != RatFunc(Poly.x()):
            return None
        if c == -1:
            return (-1, f.var)
        if c == 1:
            return (1, f.var)
    return None


def _attach_dist(term, coeff, sign, var, tok) -> SumExpr:
    words = [f for f, p in term if isinstance(f, HWord)]
    rest = [(f, p) for f, p in term if not isinstance(f, HWord)]
    if len(words) > 1 or any(
        p != 1 for f, p in term if isinstance(f, HWord)
    ):
        raise ParseError("weighted denominator needs a single integral word",
                         tok.line, tok.col)
    word = words[0] if words else None
    dist = PlusDist(word, var) if sign == -1 else OnePlusDist(word, var)
    return SumExpr({tuple(rest) + ((dist, 1),): coeff})


def _as_ratfunc(e: SumExpr):
    """Expression made only of rationals and RatF factors of one variable."""
    total: RatFunc | None = None
    var = None
    for term, c in e.terms.items():
        piece = RatFunc.const(c)
        for f, p in term:
            if not isinstance(f, RatF):
                return None
            if var is None:
                var = f.var
            elif var != f.var:
                return None
            g = f.f
            if p < 0:
                g, p = g.inverse(), -p
            for _ in range(p):
                piece = piece * g
        total = piece if total is None else total + piece
    if total is None or var is None:
        return None
    return var, total


def parse(text: str) -> SumExpr:
    """Parse a full expression; raises ParseError with position info."""
    p = Parser(text)
    e = p.parse_expr()
    t = p.peek()
    if t.kind != "END":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return e


def parse_raw_sum(text: str):
    """Parse Sum[summand, {i, 1, n}]; returns (index, upper, summand expr)."""
    p = Parser(text)
    t = p.expect("NAME")
    if t.text != "Sum":
        raise ParseError("expected Sum[...]", t.line, t.col, {"Sum"})
    p.expect("OP", "[")
    summand = p.parse_expr()
    p.expect("OP", ",")
    p.expect("OP", "{")
    idx = p.expect("NAME").text
    p.expect("OP", ",")
    one = p.expect("NUM")
    if one.text != "1":
        raise ParseError("lower bound must be 1", one.line, one.col)
    p.expect("OP", ",")
    upper = p._parse_arg()
    p.expect("OP", "}")
    p.expect("OP", "]")
    end = p.peek()
    if end.kind != "END":
        raise ParseError(f"trailing input {end.text!r}", end.line, end.col)
    return idx, upper, summand


# ---------------------------------------------------------------------------
# printer

def _frac_str(c: Fraction) -> str:
    return str(c)


def _poly_str(p: Poly, var: str) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        if k == 0:
            body = _frac_str(abs(c))
        else:
            v = var if k == 1 else f"{var}^{k}"
            body = v if abs(c) == 1 else f"{_frac_str(abs(c))}*{v}"
        parts.append(("-" if c < 0 else "+", body))
    sign0, body0 = parts[0]
    text = ("-" if sign0 == "-" else "") + body0
    for sign, body in parts[1:]:
        text += sign + body
    return text


def _letter_weight_needed(letters) -> bool:
    return any(l.x != 1 for l in letters)


def format_factor(f) -> str:
    if isinstance(f, SumWord):
        arg = str(f.arg)
        if f.is_binomial():
            trip = ",".join(
                "{%d,%d,%d}" % (l.a, l.b, l.c) for l in f.letters
            )
            ws = ",".join(_frac_str(l.x) for l in f.letters)
            fact = ",".join(
                "{{%s},{%s}}"
                % (",".join(map(str, l.fs)), ",".join(map(str, l.gs)))
                for l in f.letters
            )
            return f"BS[{{{trip}}},{{{ws}}},{{{fact}}},{arg}]"
        if f.kind() in ("harmonic", "ssum"):
            degs = ",".join(str(l.c) for l in f.letters)
            if _letter_weight_needed(f.letters):
                ws = ",".join(_frac_str(l.x) for l in f.letters)
                return f"S[{degs},{{{ws}}},{arg}]"
            return f"S[{degs},{arg}]"
        trip = ",".join("{%d,%d,%d}" % (l.a, l.b, l.c) for l in f.letters)
        if _letter_weight_needed(f.letters):
            ws = ",".join(_frac_str(l.x) for l in f.letters)
            return f"S[{{{trip}}},{{{ws}}},{arg}]"
        return f"S[{{{trip}}},{arg}]"
    if isinstance(f, HWord):
        parts = []
        for l in f.letters:
            if isinstance(l, HReal):
                parts.append(_frac_str(l.a))
            elif isinstance(l, HCyclo):
                parts.append("{%d,%d}" % (l.l, l.k))
            else:
                parts.append(f"K[{l.kid}]")
        return f"H[{','.join(parts)},{f.arg}]"
    if isinstance(f, Const):
        return f.name
    if isinstance(f, GeomPow):
        if f.base < 0 or f.base.denominator != 1:
            return f"({f.base})^{f.var}"
        return f"{f.base}^{f.var}"
    if isinstance(f, LG):
        return f"LG[{f.var}]"
    if isinstance(f, RatF):
        num = _poly_str(f.f.num, f.var)
        den = _poly_str(f.f.den, f.var)
        num_text = num if _is_atomic_poly(f.f.num) else f"({num})"
        if f.f.den == Poly.const(1):
            return num_text
        den_text = den if _is_atomic_poly(f.f.den) else f"({den})"
        return f"{num_text}/{den_text}"
    if isinstance(f, Delta1mx):
        return "Delta1mx"
    if isinstance(f, PlusDist):
        inner = format_factor(f.word) if f.word else "1"
        return f"{inner}/(1-{f.var})"
    if isinstance(f, OnePlusDist):
        inner = format_factor(f.word) if f.word else "1"
        return f"{inner}/(1+{f.var})"
    raise NestSumError(f"cannot print factor {f!r}")


def _is_atomic_poly(p: Poly) -> bool:
    nonzero = [c for c in p.coeffs if c != 0]
    if len(nonzero) != 1:
        return False
    return nonzero[0] > 0


def format_expr(expr: SumExpr) -> str:
    if expr.is_zero():
        return "0"
    chunks = []
    for term, coeff in expr.items():
        factors = []
        for f, p in term:
            text = format_factor(f)
            if p != 1:
                if "/" in text or "+" in text or "^" in text:
                    text = f"({text})"
                text = f"{text}^{p}"
            factors.append(text)
        body = "*".join(factors)
        mag = abs(coeff)
        if not factors:
            piece = _frac_str(mag)
        elif mag == 1:
            piece = body
        else:
            piece = f"{_frac_str(mag)}*{body}"
        chunks.append((coeff < 0, piece))
    neg, piece = chunks[0]
    out = ("-" if neg else "") + piece
    for neg, piece in chunks[1:]:
        out += (" - " if neg else " + ") + piece
    return out
