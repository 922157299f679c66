"""Reading, writing and checking explanation specs.

A spec file is UTF-8 text made of ``[section]`` blocks in any order; ``#``
starts a comment that runs to the end of the line (outside double quotes).
See ``data/login.spec`` for a complete example and the README for the
grammar of each section.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from . import fst as F
from .errors import (BadCountRange, CnlError, DuplicateSymbol, EmptyMatchPattern,
                     InvalidSymbol, MissingLexiconEntry, SpecSyntaxError, UnknownGroup,
                     UnknownSymbol)
from .regex import (Counted, RegexAst, as_match_pattern, compile_regex, find_counted, instantiate,
                    parse_regex, references, to_text)
from .rewrite import ContextRule

DEFAULT_VIOLATION_PHRASE = ", which should not have been allowed"
SECTIONS = ("alphabet", "subject", "lexicon", "groups", "abstract", "context",
            "violation", "monitor")
_REGEX_META = set('()*+?^[]{}"')


@dataclass(frozen=True)
class Clause:
    subject: str
    predicate: str
    suffix: str = ""

    def text(self) -> str:
        """Sentence body without the final full stop, first letter capitalized."""
        body = f"{self.subject} {self.predicate}" if self.subject else self.predicate
        return capitalize(body + join_suffix(self.suffix))

    def render(self) -> str:
        return self.text() + "."


def capitalize(text: str) -> str:
    return text[:1].upper() + text[1:]


def join_suffix(suffix: str) -> str:
    if suffix and (suffix[0].isalnum()):
        return " " + suffix
    return suffix


@dataclass(frozen=True)
class AbstractionRule:
    pattern: RegexAst
    template: str

    @property
    def counted(self) -> Counted | None:
        return find_counted(self.pattern)


@dataclass(frozen=True)
class MonitorAutomaton:
    states: tuple[str, ...]
    initial: str
    error_states: tuple[str, ...]
    transitions: tuple[tuple[str, str, str], ...]

    @property
    def delta(self) -> dict[tuple[str, str], str]:
        d: dict[tuple[str, str], str] = {}
        for s, a, t in self.transitions:
            d.setdefault((s, a), t)
        return d

    def nondeterministic_pairs(self) -> list[tuple[str, str]]:
        seen: dict[tuple[str, str], str] = {}
        dups = []
        for s, a, t in self.transitions:
            if (s, a) in seen and (s, a) not in dups:
                dups.append((s, a))
            seen.setdefault((s, a), t)
        return dups


@dataclass(frozen=True)
class Spec:
    alphabet: F.Alphabet
    subject: str
    lexicon: dict[str, Clause]
    groups: tuple[tuple[str, RegexAst], ...] = ()
    abstraction_rules: tuple[AbstractionRule, ...] = ()
    context_rules: tuple[ContextRule, ...] = ()
    violation_phrase: str = DEFAULT_VIOLATION_PHRASE
    monitor: MonitorAutomaton | None = None
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def group_map(self) -> dict[str, RegexAst]:
        return dict(self.groups)

    def where(self, *key) -> tuple[int, int]:
        return self.locations.get(key, (1, 1))


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


# ---------------------------------------------------------------------------
# Parsing


def _strip_comment(line: str) -> str:
    in_quote = False
    escaped = False
    for k, ch in enumerate(line):
        if escaped:
            escaped = False
        elif ch == "\\" and in_quote:
            escaped = True
        elif ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:k]
    return line


def _unquote(text: str, line: int, col: int) -> str:
    text = text.strip()
    if len(text) < 2 or text[0] != '"' or text[-1] != '"':
        raise SpecSyntaxError("expected a double-quoted string", line, col)
    out = []
    body = text[1:-1]
    k = 0
    while k < len(body):
        ch = body[k]
        if ch == "\\" and k + 1 < len(body):
            out.append(body[k + 1])
            k += 2
            continue
        if ch == '"':
            raise SpecSyntaxError("unescaped quote inside string", line, col + k + 1)
        out.append(ch)
        k += 1
    return "".join(out)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _Line:
    __slots__ = ("no", "text", "col")

    def __init__(self, no, raw):
        self.no = no
        stripped = raw.rstrip()
        lead = len(stripped) - len(stripped.lstrip())
        self.text = stripped.strip()
        self.col = lead + 1


_HEADER = re.compile(r"^\[([A-Za-z_]+)\]$")


def parse_spec(text: str) -> Spec:
    """Parse spec source text; raises a :class:`SpecError` subclass with a location."""
    sections: dict[str, tuple[int, list[_Line]]] = {}
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        ln = _Line(no, _strip_comment(raw))
        if not ln.text:
            continue
        m = _HEADER.match(ln.text)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise SpecSyntaxError(f"unknown section [{name}]", no, ln.col)
            if name in sections:
                raise SpecSyntaxError(f"duplicate section [{name}]", no, ln.col)
            sections[name] = (no, [])
            current = name
            continue
        if current is None:
            raise SpecSyntaxError("content before the first [section] header", no, ln.col)
        sections[current][1].append(ln)

    if "alphabet" not in sections:
        raise SpecSyntaxError("missing [alphabet] section", 1, 1)
    locations: dict = {}
    alphabet = _parse_alphabet(sections["alphabet"][1], locations)
    subject = " ".join(ln.text for ln in sections.get("subject", (0, []))[1])
    lexicon = _parse_lexicon(sections.get("lexicon"), alphabet, subject, locations)
    groups = _parse_groups(sections.get("groups", (0, []))[1], alphabet, locations)
    group_names = [g for g, _ in groups]
    abstraction = _parse_abstract(sections.get("abstract", (0, []))[1], alphabet, group_names, locations)
    context = _parse_context(sections.get("context", (0, []))[1], alphabet, group_names, locations)
    if "violation" in sections:
        violation = " ".join(ln.text for ln in sections["violation"][1])
    else:
        violation = DEFAULT_VIOLATION_PHRASE
    monitor = None
    if "monitor" in sections:
        monitor = _parse_monitor(sections["monitor"], alphabet, locations)
    return Spec(alphabet, subject, lexicon, tuple(groups), tuple(abstraction), tuple(context),
                violation, monitor, locations)


def _parse_alphabet(lines, locations) -> F.Alphabet:
    symbols: list[str] = []
    for ln in lines:
        for m in re.finditer(r"\S+", ln.text):
            name, col = m.group(), ln.col + m.start()
            try:
                F.check_symbol(name)
            except InvalidSymbol as exc:
                raise SpecSyntaxError(exc.message, ln.no, col) from None
            if set(name) & _REGEX_META or name == "_":
                raise SpecSyntaxError(f"symbol {name!r} contains a regex operator character", ln.no, col)
            if name in symbols:
                raise DuplicateSymbol(f"symbol {name!r} declared twice", ln.no, col)
            symbols.append(name)
            locations[("symbol", name)] = (ln.no, col)
    return F.Alphabet(symbols)


def _split_assignment(ln: _Line) -> tuple[str, str, int]:
    if "=" not in ln.text:
        raise SpecSyntaxError("expected 'name = value'", ln.no, ln.col)
    left, right = ln.text.split("=", 1)
    value_col = ln.col + len(left) + 1 + (len(right) - len(right.lstrip()))
    return left.strip(), right.strip(), value_col


def _parse_lexicon(section, alphabet, subject, locations) -> dict[str, Clause]:
    header_line = section[0] if section else 1
    lexicon: dict[str, Clause] = {}
    for ln in section[1] if section else ():
        name, predicate, _ = _split_assignment(ln)
        if name not in alphabet:
            raise UnknownSymbol(f"lexicon entry for undeclared symbol {name!r}", ln.no, ln.col)
        if name in lexicon:
            raise DuplicateSymbol(f"second lexicon entry for {name!r}", ln.no, ln.col)
        if not predicate:
            raise SpecSyntaxError(f"empty predicate for {name!r}", ln.no, ln.col)
        lexicon[name] = Clause(subject, predicate)
        locations[("lexicon", name)] = (ln.no, ln.col)
    for sym in alphabet:
        if sym not in lexicon:
            line, col = locations.get(("symbol", sym), (header_line, 1))
            raise MissingLexiconEntry(sym, line, col)
    return {sym: lexicon[sym] for sym in alphabet}


def _parse_groups(lines, alphabet, locations):
    groups: list[tuple[str, RegexAst]] = []
    for ln in lines:
        name, body, col = _split_assignment(ln)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", name):
            raise SpecSyntaxError(f"bad group name {name!r}", ln.no, ln.col)
        if name in alphabet:
            raise SpecSyntaxError(f"group name {name!r} clashes with a symbol", ln.no, ln.col)
        if any(g == name for g, _ in groups):
            raise SpecSyntaxError(f"group {name!r} defined twice", ln.no, ln.col)
        ast = parse_regex(body, alphabet, [g for g, _ in groups], line=ln.no, column=col)
        groups.append((name, ast))
        locations[("group", name)] = (ln.no, ln.col)
    return groups


def _split_template(ln: _Line) -> tuple[str, int, str, int]:
    k = ln.text.find("=>")
    if k < 0:
        raise SpecSyntaxError("expected 'pattern => \"text\"'", ln.no, ln.col)
    left = ln.text[:k]
    right = ln.text[k + 2:]
    right_col = ln.col + k + 2 + (len(right) - len(right.lstrip()))
    return left.rstrip(), ln.col, _unquote(right, ln.no, right_col), right_col


def _parse_abstract(lines, alphabet, group_names, locations):
    rules = []
    for k, ln in enumerate(lines):
        pattern_text, col, template, tcol = _split_template(ln)
        ast = parse_regex(pattern_text, alphabet, group_names, allow_counted=True,
                          line=ln.no, column=col)
        counted = find_counted(ast)
        if (counted is None) == ("{n}" in template):
            raise SpecSyntaxError("a template uses {n} exactly when its pattern has a ^{n} repetition",
                                  ln.no, tcol)
        rules.append(AbstractionRule(ast, template))
        locations[("abstract", k)] = (ln.no, ln.col)
    return rules


_UNDERSCORE = re.compile(r"(?<!\S)_(?!\S)")


def _parse_context(lines, alphabet, group_names, locations):
    rules = []
    for k, ln in enumerate(lines):
        lhs, col, rendering, _ = _split_template(ln)
        if "/" not in lhs:
            raise SpecSyntaxError("expected 'action / pre _ post => \"text\"'", ln.no, col)
        action, ctx = lhs.split("/", 1)
        action = action.strip()
        ctx_col = col + len(lhs) - len(ctx)
        if action not in alphabet:
            raise UnknownSymbol(f"context rule for undeclared symbol {action!r}", ln.no, col)
        parts = list(_UNDERSCORE.finditer(ctx))
        if len(parts) != 1:
            raise SpecSyntaxError("context must contain exactly one '_' marking the action", ln.no, ctx_col)
        cut = parts[0].start()
        pre_text, post_text = ctx[:cut], ctx[cut + 1:]
        pre = post = None
        if pre_text.strip():
            pre = parse_regex(pre_text, alphabet, group_names, line=ln.no, column=ctx_col)
        if post_text.strip():
            post = parse_regex(post_text, alphabet, group_names, line=ln.no, column=ctx_col + cut + 1)
        rules.append(ContextRule(action, pre, post, rendering))
        locations[("context", k)] = (ln.no, ln.col)
    return rules


def _parse_monitor(section, alphabet, locations) -> MonitorAutomaton:
    header, lines = section
    states: list[str] = []
    initial = None
    errors: list[str] = []
    transitions = []

    def note(s):
        if s not in states:
            states.append(s)

    for ln in lines:
        words = ln.text.split()
        if words[0] == "initial" and len(words) == 2:
            if initial is not None:
                raise SpecSyntaxError("initial state declared twice", ln.no, ln.col)
            initial = words[1]
            note(initial)
        elif words[0] == "error" and len(words) >= 2:
            for w in words[1:]:
                if w not in errors:
                    errors.append(w)
                note(w)
        elif len(words) == 3:
            src, sym, dst = words
            if sym not in alphabet:
                raise UnknownSymbol(f"monitor transition on undeclared symbol {sym!r}", ln.no, ln.col)
            note(src)
            note(dst)
            locations[("transition", len(transitions))] = (ln.no, ln.col)
            transitions.append((src, sym, dst))
        else:
            raise SpecSyntaxError("expected 'initial S', 'error S...' or 'SRC SYMBOL DST'", ln.no, ln.col)
    if initial is None:
        raise SpecSyntaxError("monitor has no 'initial' line", header, 1)
    locations[("monitor",)] = (header, 1)
    return MonitorAutomaton(tuple(states), initial, tuple(errors), tuple(transitions))


def load_spec(path) -> Spec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def default_spec_text() -> str:
    return resources.files("cnltrace").joinpath("data/login.spec").read_text(encoding="utf-8")


def default_spec() -> Spec:
    """The login example shipped with the package."""
    return parse_spec(default_spec_text())


# ---------------------------------------------------------------------------
# Writing


def serialize_spec(spec: Spec) -> str:
    """Canonical text form; ``parse_spec(serialize_spec(s)) == s``."""
    out = ["[alphabet]", " ".join(spec.alphabet)]
    if spec.subject:
        out += ["[subject]", spec.subject]
    out.append("[lexicon]")
    out += [f"{sym} = {spec.lexicon[sym].predicate}" for sym in spec.alphabet]
    if spec.groups:
        out.append("[groups]")
        out += [f"{name} = {to_text(ast)}" for name, ast in spec.groups]
    if spec.abstraction_rules:
        out.append("[abstract]")
        out += [f"{to_text(r.pattern)} => {_quote(r.template)}" for r in spec.abstraction_rules]
    if spec.context_rules:
        out.append("[context]")
        for r in spec.context_rules:
            pre = to_text(r.pre) + " " if r.pre is not None else ""
            post = " " + to_text(r.post) if r.post is not None else ""
            out.append(f"{r.action} / {pre}_{post} => {_quote(r.rendering)}")
    out += ["[violation]", spec.violation_phrase]
    if spec.monitor is not None:
        m = spec.monitor
        out += ["[monitor]", f"initial {m.initial}"]
        if m.error_states:
            out.append("error " + " ".join(m.error_states))
        out += [f"{s} {a} {t}" for s, a, t in m.transitions]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Validation


def validate_spec(spec: Spec, max_count: int = 16) -> list[Diagnostic]:
    """Check every spec invariant; an empty list means the spec is usable."""
    diags: list[Diagnostic] = []

    def add(code, message, *key):
        line, col = spec.where(*key)
        diags.append(Diagnostic(code, message, line, col))

    for sym in spec.alphabet:
        if sym not in spec.lexicon:
            add(MissingLexiconEntry.code, f"no lexicon entry for symbol {sym!r}", "symbol", sym)
    for sym in spec.lexicon:
        if sym not in spec.alphabet:
            add(UnknownSymbol.code, f"lexicon entry for undeclared symbol {sym!r}", "lexicon", sym)

    groups = spec.group_map
    seen_groups: set[str] = set()
    for name, ast in spec.groups:
        for ref in sorted(references(ast)):
            if ref not in seen_groups:
                add(UnknownGroup.code, f"group {name!r} refers to undeclared or later group {ref!r}",
                    "group", name)
        seen_groups.add(name)
        acc = _try_compile(ast, spec, groups, add, ("group", name))
        if acc is not None and acc.initial in acc.finals:
            add(EmptyMatchPattern.code, f"group {name!r} matches the empty string", "group", name)

    for k, rule in enumerate(spec.abstraction_rules):
        counted = rule.counted
        if (counted is None) == ("{n}" in rule.template):
            add("SyntaxError", "template placeholder {n} and ^{n} repetition must go together",
                "abstract", k)
        pattern = rule.pattern
        if counted is not None:
            if counted.low < 1 or (counted.high is not None and counted.high < counted.low):
                add(BadCountRange.code, f"bad count range {counted.low}..{counted.high}", "abstract", k)
                continue
            pattern = instantiate(pattern, counted.low)
        acc = _try_compile(as_match_pattern(pattern), spec, groups, add, ("abstract", k))
        if acc is not None and acc.initial in acc.finals:
            add(EmptyMatchPattern.code, f"abstraction rule {k + 1} matches the empty string", "abstract", k)

    last_rule: dict[str, tuple[int, ContextRule]] = {}
    for k, rule in enumerate(spec.context_rules):
        if rule.action not in spec.alphabet:
            add(UnknownSymbol.code, f"context rule for undeclared symbol {rule.action!r}", "context", k)
        for side in (rule.pre, rule.post):
            if side is not None:
                _try_compile(side, spec, groups, add, ("context", k))
        last_rule[rule.action] = (k, rule)
    for action, (k, rule) in last_rule.items():
        if not rule.is_otherwise:
            add("NoRuleForAction", f"context rules for {action!r} must end with '{action} / _'",
                "context", k)

    m = spec.monitor
    if m is not None:
        if m.initial not in m.states:
            add("MonitorStateError", f"initial state {m.initial!r} is not a state", "monitor")
        for e in m.error_states:
            if e not in m.states:
                add("MonitorStateError", f"error state {e!r} is not a state", "monitor")
        for k, (s, a, t) in enumerate(m.transitions):
            if a not in spec.alphabet:
                add(UnknownSymbol.code, f"monitor transition on undeclared symbol {a!r}", "transition", k)
        for s, a in m.nondeterministic_pairs():
            k = next(k for k, tr in enumerate(m.transitions) if tr[:2] == (s, a))
            add("NondeterministicMonitor", f"more than one transition from {s!r} on {a!r}",
                "transition", k)
    return diags


def _try_compile(ast, spec, groups, add, key):
    try:
        return compile_regex(ast, spec.alphabet, groups)
    except CnlError as exc:
        add(exc.code, exc.message, *key)
    return None
