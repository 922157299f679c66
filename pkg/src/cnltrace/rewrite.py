"""Obligatory leftmost-longest rewriting compiled to transducers, plus
context-conditioned choice of renderings.

The replacement transducer is assembled from three pieces composed in order:

``annotate``
    nondeterministically cuts the input into segments, prefixing each with a
    marker: ``<copy>`` before a single copied symbol, ``<rule:k>`` before a
    span matched by rule ``k``;
``filter``
    an acceptor over annotated strings that rejects every cut which is not
    the leftmost-longest one (a copied position where a match starts, a
    match that could have been longer, or a tie lost to an earlier rule);
``realize``
    erases the markers and maps each segment to its output.

``annotate`` composed with ``filter`` is kept as the *segmenter*: applying
it to an input yields the unique annotated string from which span
boundaries and the rule used for each span can be read off.
"""

from __future__ import annotations

from collections.abc import Collection, Mapping, Sequence
from dataclasses import dataclass

from . import fst as F
from .errors import EmptyMatchPattern, NoRuleForAction
from .regex import AnySymbol, Concat, RegexAst, Star, compile_regex, to_text

COPY = "<copy>"


def rule_marker(k: int) -> str:
    return f"<rule:{k}>"


@dataclass(frozen=True)
class ReplaceRule:
    pattern: RegexAst
    replacement: tuple[str, ...]


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    rule: int | None  # None for a copied symbol


class Rewriter:
    """A compiled set of leftmost-longest rules over an alphabet."""

    def __init__(self, patterns: Sequence[F.Fst], realizations: Sequence[F.Fst],
                 alphabet: Collection[str]):
        self.alphabet = tuple(alphabet)
        self.n_rules = len(patterns)
        for k, p in enumerate(patterns):
            if p.initial in p.finals:
                raise EmptyMatchPattern(f"pattern of rule {k} matches the empty string")
        self.segmenter = _segmenter(patterns, self.alphabet)
        self.realizer = _realizer(realizations, self.alphabet)
        self.fst = F.compose(self.segmenter, self.realizer)

    def segments(self, seq: Sequence[str]) -> list[Segment]:
        """Leftmost-longest segmentation of ``seq`` (copied symbols are unit segments)."""
        annotated = F.apply_one(self.segmenter, seq)
        segs: list[Segment] = []
        pos = 0
        for sym in annotated:
            if sym == COPY or sym.startswith("<rule:"):
                rule = None if sym == COPY else int(sym[6:-1])
                segs.append(Segment(pos, pos, rule))
            else:
                pos += 1
                last = segs[-1]
                segs[-1] = Segment(last.start, pos, last.rule)
        return segs

    def apply(self, seq: Sequence[str]) -> tuple[str, ...]:
        return F.apply_one(self.fst, seq)


def _segmenter(patterns: Sequence[F.Fst], alphabet: tuple[str, ...]) -> F.Fst:
    markers = [COPY] + [rule_marker(k) for k in range(len(patterns))]
    gamma = list(alphabet) + markers

    # Each span belongs to the first rule whose pattern contains it, so the
    # patterns are made disjoint before annotation and ties cannot arise.
    disjoint = []
    earlier = None
    for p in patterns:
        disjoint.append(p if earlier is None else F.difference(p, earlier, alphabet))
        earlier = p if earlier is None else F.determinize(F.union(earlier, p))

    branches = [F.concat(F.string_map((), (COPY,)), F.symbols_acceptor(alphabet))]
    branches += [F.concat(F.string_map((), (rule_marker(k),)), p) for k, p in enumerate(disjoint)
                 if not F.is_empty(p)]
    annotate = F.star(F.union(*branches))
    if not patterns:
        return annotate

    any_g = F.universal(gamma)
    sigma = F.symbols_acceptor(alphabet)
    marker_acc = F.symbols_acceptor(markers)
    matches_ignoring_markers = F.determinize(F.with_loops(earlier, markers))

    # A copied position at which some rule could have matched.
    bad_copy = F.containing(F.concat(F.string_acceptor((COPY,)), matches_ignoring_markers), gamma)
    # A match that ends at a segment boundary although a longer one exists.
    longer = F.intersect(
        matches_ignoring_markers,
        F.determinize(F.concat(F.plus(sigma), marker_acc, any_g, sigma, any_g)),
    )
    bad_short = F.containing(F.concat(F.symbols_acceptor(markers[1:]), longer), gamma)

    result = annotate
    for bad in (bad_copy, bad_short):
        result = F.compose(result, F.complement(bad, gamma))
    return result


def _realizer(realizations: Sequence[F.Fst], alphabet: tuple[str, ...]) -> F.Fst:
    branches = [F.concat(F.string_map((COPY,), ()), F.symbols_acceptor(alphabet))]
    branches += [F.concat(F.string_map((rule_marker(k),), ()), r) for k, r in enumerate(realizations)]
    return F.star(F.union(*branches))


def compile_replace(rules: Sequence[ReplaceRule], alphabet: Collection[str],
                    groups: Mapping[str, RegexAst] | None = None) -> Rewriter:
    patterns = [_compile_pattern(r.pattern, alphabet, groups) for r in rules]
    realizations = [F.cross(p, r.replacement) for p, r in zip(patterns, rules)]
    return Rewriter(patterns, realizations, alphabet)


def replace_leftmost_longest(rules: Sequence[ReplaceRule], alphabet: Collection[str],
                             groups: Mapping[str, RegexAst] | None = None) -> F.Fst:
    """Functional transducer rewriting leftmost-longest matches; ties go to the earliest rule."""
    return compile_replace(rules, alphabet, groups).fst


def compile_mark_after(patterns: Sequence[F.Fst], marker: str, alphabet: Collection[str]) -> Rewriter:
    """Rewriter that copies every match and inserts ``marker`` after it.

    Takes compiled acceptors so callers can pass patterns transformed at the
    automaton level (e.g. interleaved with separators).
    """
    return Rewriter(patterns, [F.insert_after(p, (marker,)) for p in patterns], alphabet)


def mark_after(pattern: RegexAst, marker: str, alphabet: Collection[str],
               groups: Mapping[str, RegexAst] | None = None) -> F.Fst:
    return compile_mark_after([_compile_pattern(pattern, alphabet, groups)], marker, alphabet).fst


def _compile_pattern(pattern, alphabet, groups) -> F.Fst:
    acc = compile_regex(pattern, alphabet, groups)
    if acc.initial in acc.finals:
        raise EmptyMatchPattern(f"pattern {to_text(pattern)!r} matches the empty string")
    return acc


# ---------------------------------------------------------------------------
# Context rules


@dataclass(frozen=True)
class ContextRule:
    """Render ``action`` as ``rendering`` when ``pre`` matches the trace just
    before it and ``post`` the trace just after it. ``None`` means unconstrained."""

    action: str
    pre: RegexAst | None
    post: RegexAst | None
    rendering: str

    @property
    def is_otherwise(self) -> bool:
        return self.pre is None and self.post is None


class ContextDecider:
    """Callable ``(trace, index) -> rendering or None`` built from context rules.

    Returns None for actions without any context rule.
    """

    def __init__(self, table: dict[str, list[tuple[F.Fst | None, F.Fst | None, str]]]):
        self._table = table

    def __call__(self, trace: Sequence[str], index: int) -> str | None:
        rules = self._table.get(trace[index])
        if rules is None:
            return None
        before, after = trace[:index], trace[index + 1:]
        for pre, post, rendering in rules:
            if pre is not None and not F.accepts(pre, before):
                continue
            if post is not None and not F.accepts(post, after):
                continue
            return rendering
        raise AssertionError("unreachable: every rule list ends with an otherwise rule")


def compile_context_rules(rules: Sequence[ContextRule], alphabet: Collection[str],
                          groups: Mapping[str, RegexAst] | None = None) -> ContextDecider:
    """Compile rules into a per-position decision procedure.

    ``pre`` is tested as ``.* pre`` against everything before the action
    (a match ending right before it), ``post`` as ``post .*`` against
    everything after (a match starting right after it).
    """
    table: dict[str, list] = {}
    for rule in rules:
        pre = None if rule.pre is None else compile_regex(Concat((Star(AnySymbol()), rule.pre)), alphabet, groups)
        post = None if rule.post is None else compile_regex(Concat((rule.post, Star(AnySymbol()))), alphabet, groups)
        table.setdefault(rule.action, []).append((pre, post, rule.rendering))
    by_action: dict[str, list[ContextRule]] = {}
    for rule in rules:
        by_action.setdefault(rule.action, []).append(rule)
    for action, lst in by_action.items():
        if not lst[-1].is_otherwise:
            raise NoRuleForAction(f"context rules for {action!r} do not end with an otherwise rule")
    return ContextDecider(table)
