"""Regular expressions over symbol tokens.

Concrete syntax (juxtaposition is concatenation, tokens are whitespace
separated where they would otherwise run together)::

    a b          concatenation          a | b        union
    a*  a+  a?   closure / plus / opt   a^3          exactly three times
    .            any single symbol      [^a b]       any symbol except a, b
    ( ... )      grouping               ()           the empty string
    a^{n}        counted repetition, n ranging over a configured interval
    a^{n:2..5}   counted repetition with an explicit interval

Identifiers resolve to a declared group name when one exists, otherwise to
a literal symbol.
"""

from __future__ import annotations

import re
from collections.abc import Collection, Mapping
from dataclasses import dataclass

from . import fst as F
from .errors import BadCountRange, SpecSyntaxError, UnknownGroup, UnknownSymbol


class RegexAst:
    __slots__ = ()


@dataclass(frozen=True)
class Literal(RegexAst):
    symbol: str


@dataclass(frozen=True)
class Epsilon(RegexAst):
    pass


@dataclass(frozen=True)
class AnySymbol(RegexAst):
    pass


@dataclass(frozen=True)
class NotSymbols(RegexAst):
    symbols: tuple[str, ...]


@dataclass(frozen=True)
class Concat(RegexAst):
    items: tuple[RegexAst, ...]


@dataclass(frozen=True)
class Union(RegexAst):
    items: tuple[RegexAst, ...]


@dataclass(frozen=True)
class Star(RegexAst):
    child: RegexAst


@dataclass(frozen=True)
class Plus(RegexAst):
    child: RegexAst


@dataclass(frozen=True)
class Optional(RegexAst):
    child: RegexAst


@dataclass(frozen=True)
class Repeat(RegexAst):
    child: RegexAst
    count: int


@dataclass(frozen=True)
class NamedRef(RegexAst):
    name: str


@dataclass(frozen=True)
class Counted(RegexAst):
    """``child^{n}``; ``high`` of None means "up to the configured maximum"."""

    child: RegexAst
    low: int = 2
    high: int | None = None


DEFAULT_MIN_COUNT = 2

# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<counted>\^\{[^}]*\})
  | (?P<power>\^\d+)
  | (?P<op>[()|*+?.\]]|\[\^?)
  | (?P<ident>[^\s()|*+?.\[\]^{}"]+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)
_COUNTED_BODY = re.compile(r"\^\{\s*n\s*(?::\s*(\d+)\s*\.\.\s*(\d+)\s*)?\}$")


class _Parser:
    def __init__(self, text, alphabet, groups, allow_counted, line, col0):
        self.text = text
        self.alphabet = alphabet
        self.groups = groups
        self.allow_counted = allow_counted
        self.line = line
        self.col0 = col0
        self.tokens: list[tuple[str, str, int]] = []
        for m in _TOKEN.finditer(text):
            kind = m.lastgroup
            if kind == "ws":
                continue
            if kind == "bad":
                self.error(f"unexpected character {m.group()!r}", m.start())
            self.tokens.append((kind, m.group(), m.start()))
        self.pos = 0
        self.n_counted = 0

    def error(self, msg, offset=None, cls=SpecSyntaxError):
        if offset is None:
            offset = self.tokens[self.pos][2] if self.pos < len(self.tokens) else len(self.text)
        raise cls(msg, self.line, self.col0 + offset)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> RegexAst:
        if not self.tokens:
            self.error("empty regular expression")
        node = self.union()
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def union(self):
        items = [self.concat()]
        while (tok := self.peek()) and tok[1] == "|":
            self.take()
            items.append(self.concat())
        return items[0] if len(items) == 1 else Union(tuple(items))

    def concat(self):
        items = []
        while (tok := self.peek()) and tok[1] not in ("|", ")"):
            items.append(self.postfix())
        if not items:
            self.error("empty alternative; write () for the empty string")
        return items[0] if len(items) == 1 else Concat(tuple(items))

    def postfix(self):
        node = self.atom()
        while tok := self.peek():
            kind, val, off = tok
            if val == "*":
                node = Star(node)
            elif val == "+":
                node = Plus(node)
            elif val == "?":
                node = Optional(node)
            elif kind == "power":
                node = Repeat(node, int(val[1:]))
            elif kind == "counted":
                node = self.counted(node, val, off)
            else:
                break
            self.take()
        return node

    def counted(self, node, val, off):
        if not self.allow_counted:
            self.error("counted repetition ^{n} is only allowed in abstraction rules", off)
        m = _COUNTED_BODY.match(val)
        if not m:
            self.error(f"malformed counted repetition {val!r}", off)
        self.n_counted += 1
        if self.n_counted > 1:
            self.error("at most one counted repetition per pattern", off)
        if m.group(1) is None:
            return Counted(node, DEFAULT_MIN_COUNT, None)
        low, high = int(m.group(1)), int(m.group(2))
        if low < 1 or high < low:
            self.error(f"bad count range {low}..{high}", off, BadCountRange)
        return Counted(node, low, high)

    def atom(self):
        kind, val, off = self.take()
        if kind == "ident":
            return self.resolve(val, off)
        if val == ".":
            return AnySymbol()
        if val == "(":
            if (tok := self.peek()) and tok[1] == ")":
                self.take()
                return Epsilon()
            node = self.union()
            tok = self.take()
            if tok is None or tok[1] != ")":
                self.error("expected ')'", off)
            return node
        if val == "[^":
            names = []
            while (tok := self.peek()) and tok[0] == "ident":
                self.take()
                if self.alphabet is not None and tok[1] not in self.alphabet:
                    self.error(f"unknown symbol {tok[1]!r}", tok[2], UnknownSymbol)
                names.append(tok[1])
            tok = self.take()
            if tok is None or tok[1] != "]" or not names:
                self.error("malformed [^...] class", off)
            return NotSymbols(tuple(names))
        self.error(f"unexpected {val!r}", off)

    def resolve(self, name, off):
        if name in self.groups:
            return NamedRef(name)
        if self.alphabet is not None and name not in self.alphabet:
            self.error(f"{name!r} is neither a symbol nor a declared group", off, UnknownGroup)
        return Literal(name)


def parse_regex(text: str, alphabet: Collection[str] | None = None,
                groups: Collection[str] = (), *, allow_counted: bool = False,
                line: int | None = None, column: int = 1) -> RegexAst:
    """Parse ``text`` into an AST.

    When ``alphabet`` is given, identifiers that are neither symbols nor
    ``groups`` raise :class:`UnknownGroup`. ``line``/``column`` locate the
    text inside a larger file for diagnostics.
    """
    return _Parser(text, alphabet, frozenset(groups), allow_counted, line, column).parse()


# ---------------------------------------------------------------------------
# Printing

_ATOMIC = (Literal, NamedRef, AnySymbol, NotSymbols, Epsilon)
_POSTFIX = (Star, Plus, Optional, Repeat, Counted)


def to_text(node: RegexAst) -> str:
    """Canonical concrete syntax; ``parse_regex(to_text(x)) == x``."""
    if isinstance(node, (Literal,)):
        return node.symbol
    if isinstance(node, NamedRef):
        return node.name
    if isinstance(node, AnySymbol):
        return "."
    if isinstance(node, Epsilon):
        return "()"
    if isinstance(node, NotSymbols):
        return "[^" + " ".join(node.symbols) + "]"
    if isinstance(node, Union):
        return " | ".join(_wrap(c, (Union,)) for c in node.items)
    if isinstance(node, Concat):
        return " ".join(_wrap(c, (Union, Concat)) for c in node.items)
    if isinstance(node, Star):
        return _wrap_postfix(node.child) + "*"
    if isinstance(node, Plus):
        return _wrap_postfix(node.child) + "+"
    if isinstance(node, Optional):
        return _wrap_postfix(node.child) + "?"
    if isinstance(node, Repeat):
        return _wrap_postfix(node.child) + f"^{node.count}"
    if isinstance(node, Counted):
        if node.high is None and node.low == DEFAULT_MIN_COUNT:
            return _wrap_postfix(node.child) + "^{n}"
        high = node.high if node.high is not None else node.low
        return _wrap_postfix(node.child) + f"^{{n:{node.low}..{high}}}"
    raise TypeError(f"not a regex node: {node!r}")


def _wrap(node, paren_types):
    s = to_text(node)
    return f"({s})" if isinstance(node, paren_types) else s


def _wrap_postfix(node):
    s = to_text(node)
    return s if isinstance(node, _ATOMIC + _POSTFIX) else f"({s})"


# ---------------------------------------------------------------------------
# Structural helpers


def walk(node: RegexAst):
    yield node
    for child in children(node):
        yield from walk(child)


def children(node: RegexAst) -> tuple[RegexAst, ...]:
    if isinstance(node, (Concat, Union)):
        return node.items
    if isinstance(node, _POSTFIX):
        return (node.child,)
    return ()


def find_counted(node: RegexAst) -> Counted | None:
    for n in walk(node):
        if isinstance(n, Counted):
            return n
    return None


def instantiate(node: RegexAst, n: int) -> RegexAst:
    """Replace the counted repetition in ``node`` by an exact ``n``-fold repeat."""
    if isinstance(node, Counted):
        return Repeat(instantiate(node.child, n), n)
    if isinstance(node, Concat):
        return Concat(tuple(instantiate(c, n) for c in node.items))
    if isinstance(node, Union):
        return Union(tuple(instantiate(c, n) for c in node.items))
    if isinstance(node, Repeat):
        return Repeat(instantiate(node.child, n), node.count)
    if isinstance(node, (Star, Plus, Optional)):
        return type(node)(instantiate(node.child, n))
    return node


def as_match_pattern(node: RegexAst) -> RegexAst:
    """Read an outermost ``e*`` as ``e+``: a rewrite pattern must not match the empty string."""
    return Plus(node.child) if isinstance(node, Star) else node


def references(node: RegexAst) -> set[str]:
    return {n.name for n in walk(node) if isinstance(n, NamedRef)}


# ---------------------------------------------------------------------------
# Compilation


def compile_regex(node: RegexAst, alphabet: F.Alphabet | Collection[str],
                  groups: Mapping[str, RegexAst] | None = None) -> F.Fst:
    """Compile to a deterministic, minimal acceptor over ``alphabet``."""
    symbols = tuple(alphabet)
    symset = frozenset(symbols)
    groups = groups or {}
    cache: dict[str, F.Fst] = {}
    active: set[str] = set()

    def build(n: RegexAst) -> F.Fst:
        if isinstance(n, Literal):
            if n.symbol not in symset:
                raise UnknownSymbol(f"symbol {n.symbol!r} is not in the alphabet")
            return F.string_acceptor((n.symbol,))
        if isinstance(n, Epsilon):
            return F.epsilon()
        if isinstance(n, AnySymbol):
            return F.symbols_acceptor(symbols)
        if isinstance(n, NotSymbols):
            for s in n.symbols:
                if s not in symset:
                    raise UnknownSymbol(f"symbol {s!r} is not in the alphabet")
            excluded = set(n.symbols)
            return F.symbols_acceptor(s for s in symbols if s not in excluded)
        if isinstance(n, Concat):
            return F.determinize(F.concat(*(build(c) for c in n.items)))
        if isinstance(n, Union):
            return F.determinize(F.union(*(build(c) for c in n.items)))
        if isinstance(n, Star):
            return F.determinize(F.star(build(n.child)))
        if isinstance(n, Plus):
            return F.determinize(F.plus(build(n.child)))
        if isinstance(n, Optional):
            return F.determinize(F.optional(build(n.child)))
        if isinstance(n, Repeat):
            return F.determinize(F.power(build(n.child), n.count))
        if isinstance(n, NamedRef):
            if n.name not in groups:
                raise UnknownGroup(f"group {n.name!r} is not declared")
            if n.name in active:
                raise UnknownGroup(f"group {n.name!r} is defined in terms of itself")
            if n.name not in cache:
                active.add(n.name)
                cache[n.name] = build(groups[n.name])
                active.discard(n.name)
            return cache[n.name]
        if isinstance(n, Counted):
            raise ValueError("counted repetition must be instantiated before compiling")
        raise TypeError(f"not a regex node: {n!r}")

    return F.determinize(build(node))
