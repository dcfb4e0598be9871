"""A small line-oriented language for describing systems.

A file is either a single catalog line::

    catalog chacon horizon=12

or a custom block of ``key = value`` lines::

    name = "chacon-again"
    horizon = 6
    C[n+1] = {0, h, 2h+1}
    C[2] = {0, 4, 9}          # literal index overrides the rule at that level

Offsets are integer-linear expressions evaluated at the previous level: ``h``
(rank one over Z), ``h1..hd`` (rank one over Z^d, box sides) or ``h1..hk``
(rank k, tower heights).  Rank-k placements are triples ``(src, offset, tgt)``.
The grammar is in the README.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import CFError
from .groups import GroupSet

SHAPES = ("interval", "box", "sumset")
HEADER_KEYS = ("name", "dim", "rank", "horizon", "shape")
RULE_KEYS = ("C", "top", "margin")


class DSLError(CFError, ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class DSLSyntaxError(DSLError):
    pass


class DSLSemanticError(DSLError):
    def __init__(self, line: int, col: int, message: str, condition: str | None = None,
                 level: int | None = None):
        super().__init__(line, col, message)
        self.condition = condition
        self.level = level


# -- tokens ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # INT IDENT STRING PUNCT EOL
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<INT>\d+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<STRING>"[^"\n]*")
  | (?P<PUNCT>[=\{\}\(\)\[\],+\-*])
""", re.VERBOSE)


def tokenize_line(text: str, line: int) -> list[Token]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise DSLSyntaxError(line, pos + 1, "unterminated string")
            raise DSLSyntaxError(line, pos + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos + 1))
        pos = m.end()
    out.append(Token("EOL", "", line, len(text) + 1))
    return out


# -- syntax tree -----------------------------------------------------------

@dataclass(frozen=True)
class Linear:
    """const + sum coef * symbol, with integer coefficients."""
    terms: tuple[tuple[str, int], ...]
    const: int
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @staticmethod
    def make(coefs: dict[str, int], const: int, line: int = 0, col: int = 0) -> "Linear":
        return Linear(tuple(sorted((s, c) for s, c in coefs.items() if c)), const, line, col)

    @property
    def is_const(self) -> bool:
        return not self.terms

    def evaluate(self, env: dict[str, int]) -> int:
        return self.const + sum(c * env[s] for s, c in self.terms)

    def symbols(self) -> list[str]:
        return [s for s, _ in self.terms]

    def __str__(self) -> str:
        parts = []
        for s, c in self.terms:
            mag = abs(c)
            body = s if mag == 1 else f"{mag}{s}"
            parts.append(("-" if c < 0 else "+", body))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


@dataclass(frozen=True)
class Tuple:
    items: tuple[Linear, ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.items) + ")"


Item = Union[Linear, Tuple]


@dataclass(frozen=True)
class Rule:
    key: str
    index: Union[str, int]  # "n+1" or a literal level
    value: Union[tuple[Item, ...], Item]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def index_text(self) -> str:
        return str(self.index)

    def __str__(self) -> str:
        if isinstance(self.value, tuple):
            body = "{" + ", ".join(str(x) for x in self.value) + "}"
        else:
            body = str(self.value)
        return f"{self.key}[{self.index}] = {body}"


@dataclass(frozen=True)
class SystemDescription:
    catalog: str | None = None
    params: tuple[tuple[str, int], ...] = ()
    name: str | None = None
    dim: int = 1
    rank: int = 1
    horizon: int | None = None
    shape: str | None = None
    rules: tuple[Rule, ...] = ()
    header_pos: tuple[tuple[str, int, int], ...] = field(default=(), compare=False)

    def rule(self, key: str, level: int) -> Rule | None:
        lit = [r for r in self.rules if r.key == key and r.index == level]
        if lit:
            return lit[0]
        gen = [r for r in self.rules if r.key == key and r.index == "n+1"]
        return gen[0] if gen else None

    def effective_shape(self) -> str:
        if self.shape:
            return self.shape
        return "interval" if self.dim == 1 else "box"

    def to_json(self) -> dict:
        if self.catalog:
            return {"catalog": self.catalog, "params": dict(self.params)}
        return {"name": self.name, "dim": self.dim, "rank": self.rank, "horizon": self.horizon,
                "shape": self.effective_shape(), "rules": [str(r) for r in self.rules]}


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        where = "end of line" if t.kind == "EOL" else repr(t.text)
        raise DSLSyntaxError(t.line, t.col, f"{msg}, found {where}")

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.error(f"expected {text or kind}")
        return self.advance()

    def at(self, text: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == text

    # expr := term { ("+"|"-") term }
    def expr(self) -> Item:
        start = self.tok
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.term()
            left = self._combine(left, right, 1 if op.text == "+" else -1, op)
        if isinstance(left, Linear):
            return Linear(left.terms, left.const, start.line, start.col)
        return left

    # term := ["-"] atom { ["*"] atom }
    def term(self) -> Item:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        val = self.atom()
        while self.at("*") or self.tok.kind in ("INT", "IDENT") or self.at("("):
            op = self.tok
            if self.at("*"):
                self.advance()
            rhs = self.atom()
            val = self._multiply(val, rhs, op)
        if neg:
            val = self._combine(Linear.make({}, 0), val, -1, self.tok)
        return val

    def atom(self) -> Item:
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return Linear.make({}, int(t.text), t.line, t.col)
        if t.kind == "IDENT":
            if not re.fullmatch(r"h\d*", t.text):
                self.error("expected an offset symbol h or h1..hk")
            self.advance()
            return Linear.make({t.text: 1}, 0, t.line, t.col)
        if self.at("("):
            self.advance()
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect("PUNCT", ")")
            if len(items) == 1:
                return items[0]
            for x in items:
                if isinstance(x, Tuple):
                    raise DSLSyntaxError(x.line, x.col, "nested tuples are not allowed")
            return Tuple(tuple(items), t.line, t.col)
        self.error("expected a number, symbol or '('")

    def _combine(self, a: Item, b: Item, sign: int, op: Token) -> Linear:
        if isinstance(a, Tuple) or isinstance(b, Tuple):
            raise DSLSyntaxError(op.line, op.col, "arithmetic on a tuple")
        coefs = dict(a.terms)
        for s, c in b.terms:
            coefs[s] = coefs.get(s, 0) + sign * c
        return Linear.make(coefs, a.const + sign * b.const, a.line, a.col)

    def _multiply(self, a: Item, b: Item, op: Token) -> Linear:
        if isinstance(a, Tuple) or isinstance(b, Tuple):
            raise DSLSyntaxError(op.line, op.col, "arithmetic on a tuple")
        if not a.is_const and not b.is_const:
            raise DSLSyntaxError(op.line, op.col, "offset expressions must be linear in the heights")
        k, v = (a.const, b) if a.is_const else (b.const, a)
        return Linear.make({s: k * c for s, c in v.terms}, k * v.const, a.line, a.col)

    def item_set(self) -> tuple[Item, ...]:
        self.expect("PUNCT", "{")
        items: list[Item] = []
        if not self.at("}"):
            items.append(self.expr())
            while self.at(","):
                self.advance()
                items.append(self.expr())
        self.expect("PUNCT", "}")
        return tuple(items)

    def index(self) -> Union[str, int]:
        self.expect("PUNCT", "[")
        t = self.tok
        if t.kind == "INT":
            self.advance()
            idx: Union[str, int] = int(t.text)
            if idx < 1:
                raise DSLSyntaxError(t.line, t.col, "levels are numbered from 1")
        elif t.kind == "IDENT" and t.text == "n":
            self.advance()
            self.expect("PUNCT", "+")
            one = self.expect("INT")
            if one.text != "1":
                raise DSLSyntaxError(one.line, one.col, "rules are written for index n+1")
            idx = "n+1"
        else:
            self.error("expected n+1 or a level number")
        self.expect("PUNCT", "]")
        return idx


def parse_system(text: str) -> SystemDescription:
    """Parse DSL text into a description; errors carry line and column."""
    lines = [tokenize_line(raw, no) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [toks for toks in lines if toks[0].kind != "EOL"]
    if not lines:
        raise DSLSyntaxError(1, 1, "empty description")
    first = lines[0][0]
    if first.kind == "IDENT" and first.text == "catalog":
        if len(lines) > 1:
            t = lines[1][0]
            raise DSLSyntaxError(t.line, t.col, "a catalog description is a single line")
        return _parse_catalog(lines[0])
    header: dict[str, object] = {}
    pos: dict[str, tuple[int, int]] = {}
    rules: list[Rule] = []
    for toks in lines:
        p = _Parser(toks)
        key = p.tok
        if key.kind != "IDENT":
            p.error("expected a key")
        if key.text == "catalog":
            raise DSLSyntaxError(key.line, key.col, "catalog must be the only line of a description")
        if key.text in HEADER_KEYS:
            p.advance()
            if key.text in header:
                raise DSLSyntaxError(key.line, key.col, f"duplicate key {key.text!r}")
            p.expect("PUNCT", "=")
            v = p.tok
            if key.text == "name":
                if v.kind == "STRING":
                    header["name"] = v.text[1:-1]
                elif v.kind == "IDENT":
                    header["name"] = v.text
                else:
                    p.error("expected a name")
            elif key.text == "shape":
                if v.kind != "IDENT" or v.text not in SHAPES:
                    p.error(f"expected one of {', '.join(SHAPES)}")
                header["shape"] = v.text
            else:
                if v.kind != "INT":
                    p.error("expected a positive integer")
                n = int(v.text)
                if n < 1:
                    raise DSLSyntaxError(v.line, v.col, f"{key.text} must be at least 1")
                header[key.text] = n
            p.advance()
            pos[key.text] = (key.line, key.col)
        elif key.text in RULE_KEYS:
            p.advance()
            idx = p.index()
            p.expect("PUNCT", "=")
            if key.text == "C":
                value: Union[tuple[Item, ...], Item] = p.item_set()
            else:
                value = p.expr()
            for r in rules:
                if r.key == key.text and r.index == idx:
                    raise DSLSyntaxError(key.line, key.col, f"duplicate rule {key.text}[{idx}]")
            rules.append(Rule(key.text, idx, value, key.line, key.col))
        else:
            p.error("expected a key (name, dim, rank, horizon, shape, C, top, margin)")
        if p.tok.kind != "EOL":
            p.error("expected end of line")
    if "horizon" not in header:
        raise DSLSemanticError(1, 1, "missing key 'horizon'")
    return SystemDescription(None, (), header.get("name"), header.get("dim", 1), header.get("rank", 1),
                             header["horizon"], header.get("shape"), tuple(rules),
                             tuple((k, *v) for k, v in pos.items()))


def _parse_catalog(toks: list[Token]) -> SystemDescription:
    p = _Parser(toks)
    p.advance()
    name = p.expect("IDENT")
    params: list[tuple[str, int]] = []
    seen = set()
    while p.tok.kind != "EOL":
        k = p.expect("IDENT")
        p.expect("PUNCT", "=")
        v = p.expect("INT")
        if k.text in seen:
            raise DSLSyntaxError(k.line, k.col, f"duplicate parameter {k.text!r}")
        seen.add(k.text)
        params.append((k.text, int(v.text)))
    return SystemDescription(name.text, tuple(params), header_pos=(("catalog", name.line, name.col),))


def print_system(desc: SystemDescription) -> str:
    """Canonical text form; parse(print(d)) == d."""
    if desc.catalog:
        return " ".join(["catalog", desc.catalog] + [f"{k}={v}" for k, v in desc.params]) + "\n"
    out = []
    if desc.name is not None:
        out.append(f'name = "{desc.name}"')
    if desc.dim != 1:
        out.append(f"dim = {desc.dim}")
    if desc.rank != 1:
        out.append(f"rank = {desc.rank}")
    out.append(f"horizon = {desc.horizon}")
    if desc.shape is not None:
        out.append(f"shape = {desc.shape}")
    key_order = {k: i for i, k in enumerate(RULE_KEYS)}
    rules = sorted(desc.rules, key=lambda r: (key_order[r.key], r.index != "n+1",
                                             r.index if isinstance(r.index, int) else 0))
    out.extend(str(r) for r in rules)
    return "\n".join(out) + "\n"


# -- semantics -----------------------------------------------------------------

def _symbols_for(desc: SystemDescription, coord: int | None) -> set[str]:
    if desc.rank > 1:
        return {f"h{j}" for j in range(1, desc.rank + 1)}
    if desc.dim == 1:
        return {"h"}
    syms = {f"h{i}" for i in range(1, desc.dim + 1)}
    if coord is not None:
        syms.add("h")
    return syms


def _eval(desc, expr: Linear, env: dict[str, int], coord: int | None = None) -> int:
    allowed = _symbols_for(desc, coord)
    for s in expr.symbols():
        if s not in allowed:
            raise DSLSemanticError(expr.line, expr.col,
                                   f"unknown symbol {s!r}; use {', '.join(sorted(allowed))}")
    if coord is not None and desc.dim > 1:
        env = dict(env, h=env[f"h{coord + 1}"])
    return expr.evaluate(env)


def _rule_or_fail(desc: SystemDescription, key: str, level: int) -> Rule:
    r = desc.rule(key, level)
    if r is None:
        raise DSLSemanticError(*_pos(desc, "horizon"), f"no rule gives C[{level}]; add C[n+1] or C[{level}]")
    return r


def build(desc: SystemDescription):
    """Turn a description into a validated system, or raise a semantic error."""
    if desc.catalog:
        return _build_catalog(desc)
    if desc.rank > 1 and desc.dim != 1:
        raise DSLSemanticError(*_pos(desc, "rank"), "rank above 1 is supported over Z only (dim = 1)")
    shape = desc.effective_shape()
    if shape == "interval" and desc.dim != 1:
        raise DSLSemanticError(*_pos(desc, "shape"), "shape interval needs dim = 1")
    if shape == "sumset" and desc.rank != 1:
        raise DSLSemanticError(*_pos(desc, "shape"), "shape sumset needs rank = 1")
    for r in desc.rules:
        if isinstance(r.index, int) and r.index > desc.horizon:
            raise DSLSemanticError(r.line, r.col, f"level {r.index} is beyond horizon {desc.horizon}")
        if r.key == "margin" and shape != "box":
            raise DSLSemanticError(r.line, r.col, "margin applies to shape box only")
        if r.key == "top" and shape != "interval":
            raise DSLSemanticError(r.line, r.col, "top applies to shape interval only")
    if desc.rank == 1:
        sys, rule_of = _build_rank_one(desc, shape)
        from .rank_one import validate
        report = validate(sys)
    else:
        sys, rule_of = _build_rank_k(desc)
        from .finite_rank import validate_rank_k
        report = validate_rank_k(sys)
    fails = [r for r in report.results if not r.ok and not r.condition.startswith("advisory")]
    if fails:
        first = min(fails, key=lambda r: r.level)
        line, col = rule_of.get(first.level, (1, 1))
        raise DSLSemanticError(line, col, f"condition ({first.condition}) fails at level {first.level}: "
                               f"{first.detail}", first.condition, first.level)
    return sys


def _pos(desc: SystemDescription, key: str) -> tuple[int, int]:
    for k, line, col in desc.header_pos:
        if k == key:
            return line, col
    return 1, 1


def _build_catalog(desc: SystemDescription):
    from . import catalog
    line, col = _pos(desc, "catalog")
    if desc.catalog not in catalog.names():
        raise DSLSemanticError(line, col, f"unknown catalog system {desc.catalog!r}; "
                               f"known: {', '.join(catalog.names())}")
    try:
        return catalog.get(desc.catalog, **dict(desc.params))
    except TypeError:
        raise DSLSemanticError(line, col, f"bad parameters for {desc.catalog}: "
                               f"{', '.join(k for k, _ in desc.params)}") from None


def _overlap_error(rule: Rule, level: int, item) -> DSLSemanticError:
    return DSLSemanticError(rule.line, rule.col, f"condition (III) fails at level {level}: "
                            f"offset {item} is listed twice", "III", level)


def _build_rank_one(desc: SystemDescription, shape: str):
    from .rank_one import RankOneSystem
    d = desc.dim
    F = GroupSet([(0,) * d], dim=d)
    Fs, Cs, rule_of = [F], [], {}
    for level in range(1, desc.horizon + 1):
        rule = _rule_or_fail(desc, "C", level)
        rule_of[level] = (rule.line, rule.col)
        lo, hi = F.bbox()
        sides = [b - a for a, b in zip(lo, hi)]
        env = {"h": sides[0]} if d == 1 else {f"h{i + 1}": s for i, s in enumerate(sides)}
        offsets = []
        for item in rule.value:
            if d == 1:
                if isinstance(item, Tuple):
                    raise DSLSemanticError(item.line, item.col, "expected an integer offset, got a tuple")
                offsets.append((_eval(desc, item, env),))
            else:
                if not isinstance(item, Tuple) or len(item.items) != d:
                    raise DSLSemanticError(item.line, item.col, f"expected a {d}-tuple offset")
                offsets.append(tuple(_eval(desc, x, env, coord=i) for i, x in enumerate(item.items)))
        seen = set()
        for o, item in zip(offsets, rule.value):
            if o in seen:
                raise _overlap_error(rule, level, o[0] if d == 1 else o)
            seen.add(o)
        C = GroupSet(offsets, dim=d)
        if shape == "sumset":
            F_next = F.translate(offsets[0])
            for o in offsets[1:]:
                F_next = F_next.union(F.translate(o))
        elif shape == "interval":
            top = desc.rule("top", level)
            extra = _eval(desc, top.value, env) if top else 0
            if extra < 0:
                raise DSLSemanticError(top.line, top.col, "top spacer count must be nonnegative")
            end = max(o[0] for o in offsets) + sides[0] + extra
            F_next = GroupSet.interval(0, max(end, 1))
        else:
            mrule = desc.rule("margin", level)
            m = _eval(desc, mrule.value, env) if mrule else 0
            if m < 0:
                raise DSLSemanticError(mrule.line, mrule.col, "margin must be nonnegative")
            blo = tuple(min(lo[i] + o[i] for o in offsets) - m for i in range(d))
            bhi = tuple(max(hi[i] + o[i] for o in offsets) + m for i in range(d))
            F_next = GroupSet.box(blo, bhi)
        Cs.append(C)
        Fs.append(F_next)
        F = F_next
    name = desc.name or "custom"
    return RankOneSystem(tuple(Fs), tuple(Cs), name), rule_of


def _build_rank_k(desc: SystemDescription):
    from .finite_rank import Edge, RankKSystem
    k = desc.rank
    heights = [1] * k
    Fs = [{i: GroupSet.interval(0, 1) for i in range(1, k + 1)}]
    Cs, rule_of = [], {}
    for level in range(1, desc.horizon + 1):
        rule = _rule_or_fail(desc, "C", level)
        rule_of[level] = (rule.line, rule.col)
        env = {f"h{j}": heights[j - 1] for j in range(1, k + 1)}
        edges = []
        for item in rule.value:
            if not isinstance(item, Tuple) or len(item.items) != 3:
                raise DSLSemanticError(item.line, item.col, "expected a placement (src, offset, tgt)")
            src, off, tgt = item.items
            ends = []
            for t in (src, tgt):
                if not t.is_const or not 1 <= t.const <= k:
                    raise DSLSemanticError(t.line, t.col, f"tower index must be a constant in 1..{k}")
                ends.append(t.const)
            edges.append(Edge(ends[0], (_eval(desc, off, env),), ends[1]))
        if len(set(edges)) != len(edges):
            dup = next(e for i, e in enumerate(edges) if e in edges[:i])
            raise _overlap_error(rule, level, f"({dup.src}, {dup.g[0]}, {dup.tgt})")
        top = desc.rule("top", level)
        extras = [0] * k
        if top is not None:
            if not isinstance(top.value, Tuple) or len(top.value.items) != k:
                raise DSLSemanticError(top.line, top.col, f"top needs one spacer count per tower ({k}-tuple)")
            extras = [_eval(desc, x, env) for x in top.value.items]
            if min(extras) < 0:
                raise DSLSemanticError(top.line, top.col, "top spacer count must be nonnegative")
        new_h = []
        for j in range(1, k + 1):
            into = [e for e in edges if e.tgt == j]
            end = max((e.g[0] + heights[e.src - 1] for e in into), default=1)
            new_h.append(end + extras[j - 1])
        heights = new_h
        Fs.append({j: GroupSet.interval(0, heights[j - 1]) for j in range(1, k + 1)})
        Cs.append(tuple(edges))
    return RankKSystem(k, tuple(Fs), tuple(Cs), desc.name or "custom"), rule_of


def load(text: str):
    """parse_system followed by build."""
    return build(parse_system(text))
