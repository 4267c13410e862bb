"""Algebraic relation bases at fixed weight, reduction, and table files.

Products of lower-weight words expand (by stuffle for sums, shuffle for
integral words) into linear relations among same-weight words; solving them
by exact elimination with Lyndon words as the preferred survivors expresses
every non-Lyndon word through the basis plus products of lower-weight basis
words.  Tables are generated weight by weight so every rule's right side is
already fully reduced.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .expr import (
    HReal,
    HWord,
    Letter,
    NestSumError,
    NumArg,
    SumExpr,
    SumWord,
    SymArg,
    UnsupportedError,
    substitute_arg,
)
from .shuffle import shuffle
from .stuffle import merge_letters, quasi_shuffle

PROVENANCE = "nestsum-basis-generator/1 algebraic"


class TableError(NestSumError):
    pass


class TableFormatError(TableError):
    pass


class TableVersionError(TableError):
    pass


class LookupMissError(TableError):
    pass


@dataclass(frozen=True)
class AlphabetSpec:
    kind: str  # harmonic | ssum | cyclotomic | hlog
    weight: int
    letters: tuple = ()  # ssum: weight list; cyclotomic: (a,b) pairs; hlog: indices

    def __post_init__(self):
        if self.kind not in ("harmonic", "ssum", "cyclotomic", "hlog"):
            raise UnsupportedError(f"unsupported alphabet kind {self.kind!r}")
        if self.weight < 1:
            raise NestSumError("weight must be >= 1")
        object.__setattr__(self, "letters", tuple(self.letters))


@dataclass
class RelationTable:
    spec: AlphabetSpec
    basis: dict[int, tuple]  # weight -> tuple of letter tuples
    rules: dict[tuple, SumExpr]  # letter tuple -> expr at the generic argument
    provenance: str = PROVENANCE
    var: str = "n"

    def is_basis(self, letters: tuple) -> bool:
        w = sum(_letter_weight(l) for l in letters)
        return letters in self.basis.get(w, ())

    def rule_for(self, letters: tuple) -> SumExpr | None:
        return self.rules.get(letters)


def _letter_weight(letter) -> int:
    if isinstance(letter, Letter):
        return letter.weight
    return 1  # integral letters all carry weight one


def _letter_key(letter):
    return letter.key()


def word_key(letters: tuple):
    return (
        sum(_letter_weight(l) for l in letters),
        len(letters),
        tuple(_letter_key(l) for l in letters),
    )


def is_lyndon(letters: tuple) -> bool:
    """Strictly smaller than every proper rotation of itself."""
    seq = tuple(_letter_key(l) for l in letters)
    n = len(seq)
    for r in range(1, n):
        if seq >= seq[r:] + seq[:r]:
            return False
    return True


def duval_factorization(letters: tuple) -> list[tuple]:
    """Chen-Fox-Lyndon factorization into non-increasing Lyndon factors."""
    seq = list(letters)
    keys = [_letter_key(l) for l in seq]
    out = []
    i = 0
    n = len(seq)
    while i < n:
        j, k = i + 1, i
        while j < n and keys[k] <= keys[j]:
            k = i if keys[k] < keys[j] else k + 1
            j += 1
        while i <= k:
            out.append(tuple(seq[i : i + j - k]))
            i += j - k
    return out


# ---------------------------------------------------------------------------
# alphabet closures and word enumeration

def closure_letters(base: Iterable[Letter], max_weight: int) -> tuple[Letter, ...]:
    """Merge-closure of a letter set, truncated at the given total weight."""
    seen = {l for l in base}
    frontier = list(seen)
    while frontier:
        nxt = []
        for p in list(seen):
            for q in frontier:
                if p.weight + q.weight > max_weight:
                    continue
                for letter, _ in merge_letters(p, q):
                    if letter.weight <= max_weight and letter not in seen:
                        seen.add(letter)
                        nxt.append(letter)
        frontier = nxt
    return tuple(sorted(seen, key=_letter_key))


def alphabet_letters(spec: AlphabetSpec) -> tuple:
    if spec.kind == "harmonic":
        base = [Letter(s * d) for d in range(1, spec.weight + 1) for s in (1, -1)]
        return tuple(sorted(base, key=_letter_key))
    if spec.kind == "ssum":
        weights = [Fraction(x) for x in spec.letters]
        if not weights:
            raise NestSumError("ssum alphabet needs a weight list")
        from .expr import sletter

        base = [
            sletter(s * d, x)
            for d in range(1, spec.weight + 1)
            for s in (1, -1)
            for x in weights
        ]
        return closure_letters(base, spec.weight)
    if spec.kind == "cyclotomic":
        pairs = spec.letters
        if not pairs:
            raise NestSumError("cyclotomic alphabet needs (a,b) pairs")
        from .expr import cyclo as _cyclo

        base = [
            _cyclo(a, b, s * d)
            for (a, b) in pairs
            for d in range(1, spec.weight + 1)
            for s in (1, -1)
        ]
        return closure_letters(base, spec.weight)
    # hlog
    if not spec.letters:
        raise NestSumError("hlog alphabet needs an index list")
    return tuple(sorted((HReal(Fraction(a)) for a in spec.letters), key=_letter_key))


def enumerate_words(letters: tuple, weight: int) -> list[tuple]:
    out: list[tuple] = []

    def go(prefix: tuple, remaining: int):
        if remaining == 0:
            out.append(prefix)
            return
        for l in letters:
            w = _letter_weight(l)
            if w <= remaining:
                go(prefix + (l,), remaining - w)

    go((), weight)
    out.sort(key=word_key)
    return out


# ---------------------------------------------------------------------------
# elimination

def _eliminate(
    rows: list[tuple[dict, SumExpr]],
    lyndon: set,
    order: list[tuple],
    allow_keep_pivot: bool = False,
    mk=None,
) -> dict[tuple, SumExpr]:
    """Reduced row echelon with non-preferred columns pivoted first.

    Each row is (word -> coefficient, right side); solving yields, for every
    pivoted word, word = combination of surviving words plus the accumulated
    right sides.  ``lyndon`` is the survivor-preference set; with
    ``allow_keep_pivot`` a relation purely among preferred words may still
    eliminate one of them (needed when preferred constants are dependent).
    """
    columns = [w for w in order if w not in lyndon] + [w for w in order if w in lyndon]
    col_index = {w: i for i, w in enumerate(columns)}
    work = [
        ({col_index[w]: c for w, c in lhs.items() if c != 0}, rhs) for lhs, rhs in rows
    ]
    pivots: dict[int, tuple[dict, SumExpr]] = {}
    for lhs, rhs in work:
        lhs = dict(lhs)
        for col in sorted(lhs):
            if col in pivots:
                plhs, prhs = pivots[col]
                factor = lhs[col]
                for c2, v2 in plhs.items():
                    lhs[c2] = lhs.get(c2, Fraction(0)) - factor * v2
                    if lhs[c2] == 0:
                        del lhs[c2]
                rhs = rhs - prhs.scale(factor)
        lead = min((c for c in lhs if lhs[c] != 0), default=None)
        if lead is None:
            if not rhs.is_zero():
                raise NestSumError("inconsistent relation system")
            continue
        inv = Fraction(1) / lhs[lead]
        lhs = {c: v * inv for c, v in lhs.items()}
        rhs = rhs.scale(inv)
        for col, (plhs, prhs) in list(pivots.items()):
            if lead in plhs:
                factor = plhs[lead]
                for c2, v2 in lhs.items():
                    plhs[c2] = plhs.get(c2, Fraction(0)) - factor * v2
                    if plhs[c2] == 0:
                        del plhs[c2]
                pivots[col] = (plhs, prhs - rhs.scale(factor))
        pivots[lead] = (lhs, rhs)
    rules: dict[tuple, SumExpr] = {}
    for col, (lhs, rhs) in pivots.items():
        word = columns[col]
        if word in lyndon and not allow_keep_pivot:
            raise NestSumError(
                "relation system pivoted on a Lyndon word; rank mismatch"
            )
        expr = rhs
        maker = mk if mk is not None else _mk
        for c2, v2 in lhs.items():
            if c2 == col:
                continue
            expr = expr - SumExpr.word(maker(columns[c2]), v2)
        rules[word] = expr
    return rules


_WORD_ARG = SymArg("n")
_H_ARG = SymArg("x")


def _mk(letters: tuple):
    if letters and isinstance(letters[0], Letter):
        return SumWord(letters, _WORD_ARG)
    return HWord(letters, _H_ARG)


def _product(letters_u: tuple, letters_v: tuple) -> SumExpr:
    if isinstance(letters_u[0], Letter):
        return quasi_shuffle(_mk(letters_u), _mk(letters_v))
    return shuffle(_mk(letters_u), _mk(letters_v))


def _apply_rules(expr: SumExpr, rules: dict[tuple, SumExpr]) -> SumExpr:
    for _ in range(64):
        changed = False
        out = SumExpr.zero()
        for term, coeff in expr.terms.items():
            hit = None
            for f, p in term:
                if isinstance(f, (SumWord, HWord)) and f.letters in rules:
                    hit = (f, p)
                    break
            if hit is None:
                out = out + SumExpr({term: coeff})
                continue
            changed = True
            f, p = hit
            rest = tuple((g, q) for g, q in term if g is not f)
            rule = substitute_arg(rules[f.letters], _var_of(f), f.arg)
            out = out + SumExpr({rest: coeff}) * rule**p
        expr = out
        if not changed:
            return expr
    raise NestSumError("rule application did not reach a fixpoint")


def _var_of(f) -> str:
    return "n" if isinstance(f, SumWord) else "x"


def compute_basis(spec: AlphabetSpec) -> RelationTable:
    """Basis and rules for all weights up to spec.weight over the alphabet."""
    letters = alphabet_letters(spec)
    basis: dict[int, tuple] = {}
    rules: dict[tuple, SumExpr] = {}
    for w in range(1, spec.weight + 1):
        words = enumerate_words(letters, w)
        stratum = _solve_stratum(words, w, rules)
        rules.update(stratum)
        survivors = tuple(wd for wd in words if wd not in stratum)
        uncovered = [wd for wd in survivors if not is_lyndon(wd)]
        if uncovered:
            raise NestSumError(
                f"relation span at weight {w} missed {len(uncovered)} words"
            )
        basis[w] = survivors
    var = "x" if spec.kind == "hlog" else "n"
    return RelationTable(spec, basis, rules, PROVENANCE, var)


def _solve_stratum(
    words: list[tuple], w: int, known_rules: dict[tuple, SumExpr]
) -> dict[tuple, SumExpr]:
    """Rules for one weight stratum given all lower-weight rules."""
    if not words:
        return {}
    seen_words = set(words)
    rows: list[tuple[dict, SumExpr]] = []
    lower: dict[int, list[tuple]] = {}
    letters = sorted({l for wd in words for l in wd}, key=_letter_key)
    for wl in range(1, w):
        lower[wl] = enumerate_words(tuple(letters), wl)
    for w1 in range(1, w // 2 + 1):
        w2 = w - w1
        for i, u in enumerate(lower.get(w1, [])):
            vs = lower.get(w2, [])
            for v in vs[i:] if w1 == w2 else vs:
                qs = _product(u, v)
                lhs: dict[tuple, Fraction] = {}
                rhs = (
                    _apply_rules(SumExpr.word(_mk(u)), known_rules)
                    * _apply_rules(SumExpr.word(_mk(v)), known_rules)
                )
                for term, coeff in qs.terms.items():
                    ((word_f, _),) = term
                    lw = sum(_letter_weight(l) for l in word_f.letters)
                    if lw == w:
                        lhs[word_f.letters] = (
                            lhs.get(word_f.letters, Fraction(0)) + coeff
                        )
                        seen_words.add(word_f.letters)
                    else:
                        rhs = rhs - _apply_rules(
                            SumExpr.word(word_f), known_rules
                        ).scale(coeff)
                rows.append((lhs, rhs))
    order = sorted(seen_words, key=word_key)
    lyndon = {wd for wd in order if is_lyndon(wd)}
    return _eliminate(rows, lyndon, order)


def compute_sum_basis(spec: AlphabetSpec, argument=None) -> RelationTable:
    """Stuffle basis for harmonic / weighted / cyclotomic sum alphabets."""
    if spec.kind == "hlog":
        raise UnsupportedError("use compute_hlog_basis for integral words")
    table = compute_basis(spec)
    if argument is not None:
        table = _instantiate(table, argument)
    return table


def compute_hlog_basis(spec: AlphabetSpec, argument=None) -> RelationTable:
    """Shuffle basis for integral-word alphabets of real indices."""
    if spec.kind != "hlog":
        raise UnsupportedError("compute_hlog_basis needs an hlog alphabet")
    table = compute_basis(spec)
    if argument is not None:
        table = _instantiate(table, argument)
    return table


def _instantiate(table: RelationTable, argument) -> RelationTable:
    rules = {
        k: substitute_arg(e, table.var, argument) for k, e in table.rules.items()
    }
    return RelationTable(table.spec, table.basis, rules, table.provenance, table.var)


# ---------------------------------------------------------------------------
# reduction

_DYNAMIC_CACHE: dict[tuple, dict[tuple, SumExpr]] = {}


def _dynamic_rules_for(letters_tuple: tuple) -> dict[tuple, SumExpr]:
    """Rules for the merge-closure stratum generated by one word's letters."""
    w = sum(_letter_weight(l) for l in letters_tuple)
    if isinstance(letters_tuple[0], Letter):
        letters = closure_letters(set(letters_tuple), w)
    else:
        letters = tuple(sorted(set(letters_tuple), key=_letter_key))
    key = (letters, w)
    if key in _DYNAMIC_CACHE:
        return _DYNAMIC_CACHE[key]
    rules: dict[tuple, SumExpr] = {}
    for wl in range(1, w + 1):
        words = enumerate_words(letters, wl)
        rules.update(_solve_stratum(words, wl, rules))
    _DYNAMIC_CACHE[key] = rules
    return rules


def reduce_to_basis(
    expr: SumExpr, table: RelationTable | None = None, dynamic: bool = False
) -> SumExpr:
    """Rewrite every reducible word through the relation rules.

    With a table, missing words raise a lookup error unless ``dynamic`` also
    permits computing their relations from scratch.
    """
    from .grammar import format_factor

    for _ in range(256):
        target = None
        for term in expr.terms:
            for f, p in term:
                if not isinstance(f, (SumWord, HWord)):
                    continue
                if isinstance(f, SumWord) and f.is_binomial():
                    continue
                if f.depth < 2:
                    continue
                rule = table.rule_for(f.letters) if table is not None else None
                if rule is None and table is not None and table.is_basis(f.letters):
                    continue
                if rule is None and not dynamic and table is not None:
                    raise LookupMissError(
                        f"no rule covers {format_factor(f)} in the supplied table"
                    )
                if rule is None:
                    rules = _dynamic_rules_for(f.letters)
                    rule = rules.get(f.letters)
                    if rule is None:
                        continue  # dynamic basis word
                if rule is not None:
                    target = (f, rule)
                    break
            if target:
                break
        if target is None:
            return expr
        f, rule = target
        rule = substitute_arg(rule, _var_of(f), f.arg)
        out = SumExpr.zero()
        for term, coeff in expr.terms.items():
            powers = [(g, q) for g, q in term if g == f]
            if not powers:
                out = out + SumExpr({term: coeff})
                continue
            p = powers[0][1]
            rest = tuple((g, q) for g, q in term if g != f)
            out = out + SumExpr({rest: coeff}) * rule**p
        expr = out
    raise NestSumError("basis reduction did not terminate")


# ---------------------------------------------------------------------------
# persistence

_MAGIC = "NESTSUM-TABLE"
_VERSION = "v1"


def _spec_line(spec: AlphabetSpec) -> str:
    parts = [f"kind={spec.kind}", f"weight={spec.weight}"]
    if spec.kind == "ssum":
        parts.append("weights=" + ",".join(str(Fraction(x)) for x in spec.letters))
    elif spec.kind == "cyclotomic":
        parts.append(
            "letters=" + ";".join(f"{a},{b}" for a, b in spec.letters)
        )
    elif spec.kind == "hlog":
        parts.append("alphabet=" + ",".join(str(Fraction(a)) for a in spec.letters))
    return "spec: " + " ".join(parts)


def _parse_spec_line(line: str) -> AlphabetSpec:
    if not line.startswith("spec: "):
        raise TableFormatError("missing spec line")
    fields = dict(
        kv.split("=", 1) for kv in line[len("spec: ") :].split() if "=" in kv
    )
    kind = fields.get("kind", "")
    weight = int(fields.get("weight", "0"))
    if kind == "ssum":
        letters = tuple(Fraction(x) for x in fields["weights"].split(","))
    elif kind == "cyclotomic":
        letters = tuple(
            tuple(int(v) for v in pair.split(","))
            for pair in fields["letters"].split(";")
        )
    elif kind == "hlog":
        letters = tuple(Fraction(a) for a in fields["alphabet"].split(","))
    else:
        letters = ()
    return AlphabetSpec(kind, weight, letters)


def store_table(table: RelationTable, path) -> None:
    from .grammar import format_expr, format_factor

    buf = io.StringIO()
    buf.write(f"{_MAGIC} {_VERSION}\n")
    buf.write(_spec_line(table.spec) + "\n")
    buf.write(f"provenance: {table.provenance}\n")
    for w in sorted(table.basis):
        for letters in table.basis[w]:
            buf.write("BASIS " + format_factor(_mk(letters)) + "\n")
    for letters in sorted(table.rules, key=word_key):
        rule = table.rules[letters]
        buf.write(
            "RULE "
            + format_factor(_mk(letters))
            + " := "
            + format_expr(rule)
            + "\n"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def load_table(path) -> RelationTable:
    from .grammar import parse

    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith(_MAGIC):
        raise TableFormatError(f"{path}: not a relation table file")
    version = lines[0][len(_MAGIC) :].strip()
    if version != _VERSION:
        raise TableVersionError(
            f"{path}: table version {version!r} is not supported (expected {_VERSION})"
        )
    spec = _parse_spec_line(lines[1] if len(lines) > 1 else "")
    provenance = PROVENANCE
    basis: dict[int, list] = {}
    rules: dict[tuple, SumExpr] = {}
    for line in lines[2:]:
        if not line:
            continue
        if line.startswith("provenance: "):
            provenance = line[len("provenance: ") :]
        elif line.startswith("BASIS "):
            word = _single_word(parse(line[len("BASIS ") :]))
            w = sum(_letter_weight(l) for l in word.letters)
            basis.setdefault(w, []).append(word.letters)
        elif line.startswith("RULE "):
            lhs_text, rhs_text = line[len("RULE ") :].split(" := ", 1)
            word = _single_word(parse(lhs_text))
            rules[word.letters] = parse(rhs_text)
        else:
            raise TableFormatError(f"unrecognized table line: {line!r}")
    var = "x" if spec.kind == "hlog" else "n"
    return RelationTable(
        spec, {w: tuple(v) for w, v in basis.items()}, rules, provenance, var
    )


def _single_word(expr: SumExpr):
    terms = list(expr.terms.items())
    if len(terms) != 1 or terms[0][1] != 1 or len(terms[0][0]) != 1:
        raise TableFormatError("table entries must be single words")
    f, p = terms[0][0][0]
    if p != 1 or not isinstance(f, (SumWord, HWord)):
        raise TableFormatError("table entries must be single words")
    return f


# ---------------------------------------------------------------------------
# shipped tables

def table_dir() -> str:
    env = os.environ.get("NESTSUM_TABLE_DIR")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "tables")


_SHIPPED: dict[str, RelationTable] = {}


def shipped_table(name: str) -> RelationTable:
    if name not in _SHIPPED:
        path = os.path.join(table_dir(), name + ".nstab")
        _SHIPPED[name] = load_table(path)
    return _SHIPPED[name]


def default_table_for(expr: SumExpr) -> RelationTable | None:
    """The shipped harmonic table when every reducible word fits it."""
    try:
        return shipped_table("harmonic-w4")
    except (OSError, TableError):
        return None
