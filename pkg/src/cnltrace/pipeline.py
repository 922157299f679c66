"""Turning traces into explanations at levels 0 to 4.

Levels 0 and 1 are computed entirely by composed transducers:
separation, paragraph grouping, violation marking and the dictionary.
From level 2 on, the same transducers supply the paragraph and summary
segmentation, and the clause-level realisation (aggregation, summaries,
contextual choice of predicate) is done on the segmented structure.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

from . import fst as F
from .errors import SpecInvalid, UnknownAction
from .monitor import VIOLATION, Verdict, monitor_transducer, run_monitor
from .regex import as_match_pattern, compile_regex, instantiate
from .rewrite import ReplaceRule, Rewriter, compile_context_rules, compile_mark_after, compile_replace
from .specdsl import Clause, Spec, capitalize, join_suffix, validate_spec

LEVELS = (0, 1, 2, 3, 4)
DEFAULT_MAX_COUNT = 16


@dataclass(frozen=True)
class Explanation:
    """Rendered clauses grouped into paragraphs.

    ``spans[k]`` is the half-open trace interval explained by paragraph ``k``.
    """

    paragraphs: tuple[tuple[str, ...], ...]
    level: int
    violation_index: int | None = None
    spans: tuple[tuple[int, int], ...] = ()

    @property
    def sentences(self) -> list[str]:
        return [s for p in self.paragraphs for s in p]


def check_trace(trace, alphabet: F.Alphabet) -> tuple[str, ...]:
    """Coerce ``trace`` to a tuple of symbols, rejecting anything outside ``alphabet``.

    A string is split into characters when every symbol is one character
    long, and on whitespace otherwise.
    """
    if isinstance(trace, str):
        if all(len(s) == 1 for s in alphabet):
            actions = tuple(ch for ch in trace if not ch.isspace())
        else:
            actions = tuple(trace.split())
    else:
        actions = tuple(trace)
    for k, a in enumerate(actions):
        if a not in alphabet:
            raise UnknownAction(a, k)
    return actions


# ---------------------------------------------------------------------------
# Transducer stages


def stage_separate(alphabet) -> F.Fst:
    """Insert the sentence separator after every action."""
    return F.star(F.union(*(F.string_map((a,), (a, F.SENT)) for a in alphabet)))


def _group_rewriter(spec: Spec, separated: bool) -> Rewriter | None:
    if not spec.groups:
        return None
    groups = spec.group_map
    symbols = list(spec.alphabet)
    patterns = [compile_regex(ast, symbols, groups) for _, ast in spec.groups]
    if separated:
        patterns = [F.determinize(F.follow_each(p, F.SENT)) for p in patterns]
        symbols.append(F.SENT)
    return compile_mark_after(patterns, F.PARA, symbols)


def stage_group(spec: Spec, separated: bool = True) -> F.Fst:
    """Insert a paragraph marker after each leftmost-longest group match.

    With ``separated`` the transducer reads the output of
    :func:`stage_separate`, and each match extends over the separator that
    follows its last action.
    """
    rw = _group_rewriter(spec, separated)
    if rw is not None:
        return rw.fst
    symbols = list(spec.alphabet) + ([F.SENT] if separated else [])
    return F.universal(symbols)


def stage_close_paragraphs(symbols) -> F.Fst:
    """Append a paragraph marker to a non-empty stream that does not end with one."""
    symbols = [s for s in symbols if s != F.PARA]
    trans = [(0, F.PARA, F.PARA, 0), (1, F.PARA, F.PARA, 0), (1, F.EPS, F.PARA, 2)]
    trans += [(q, s, s, 1) for q in (0, 1) for s in symbols]
    return F.Fst(3, 0, (0, 2), trans)


def words(text: str) -> list[str]:
    """Tokenize realisation text; commas become :data:`fst.COMMA` markers."""
    out = []
    for w in text.split():
        lead = []
        while w.startswith(","):
            lead.append(F.COMMA)
            w = w[1:]
        trail = []
        while w.endswith(","):
            trail.append(F.COMMA)
            w = w[:-1]
        out += lead + ([w] if w else []) + trail
    return out


def _clause_words(clause: Clause) -> list[str]:
    return words(clause.subject) + [F.SUBJ] + words(clause.predicate)


def stage_dictionary(spec: Spec) -> F.Fst:
    """Map each action, with an optional preceding violation marker, to its words."""
    branches = []
    phrase = words(spec.violation_phrase)
    for a in spec.alphabet:
        ws = _clause_words(spec.lexicon[a])
        branches.append(F.string_map((a,), ws))
        branches.append(F.string_map((VIOLATION, a), ws + phrase))
    branches += [F.string_acceptor((F.SENT,)), F.string_acceptor((F.PARA,))]
    return F.star(F.union(*branches))


def render_words(tokens: Sequence[str]) -> str:
    text = ""
    for t in tokens:
        if t == F.SUBJ:
            continue
        if t == F.COMMA:
            text += ","
        else:
            text = f"{text} {t}" if text else t
    return text


def tokens_to_paragraphs(tokens: Sequence[str]) -> list[list[str]]:
    """Split dictionary output into paragraphs of rendered sentences."""
    paragraphs: list[list[str]] = []
    current: list[str] = []
    sentence: list[str] = []
    for t in tokens:
        if t == F.SENT:
            current.append(capitalize(render_words(sentence)) + ".")
            sentence = []
        elif t == F.PARA:
            paragraphs.append(current)
            current = []
        else:
            sentence.append(t)
    if sentence:
        current.append(capitalize(render_words(sentence)) + ".")
    if current:
        paragraphs.append(current)
    return paragraphs


# ---------------------------------------------------------------------------
# Clause-level stages


def stage_lexicalize(spec: Spec, trace: Sequence[str], violation_index: int | None = None,
                     decider=None) -> list[Clause]:
    """One clause per action; ``decider`` (from context rules) may override the predicate."""
    clauses = []
    for k, a in enumerate(trace):
        base = spec.lexicon[a]
        predicate = base.predicate
        if decider is not None:
            predicate = decider(trace, k) or predicate
        suffix = spec.violation_phrase if k == violation_index else ""
        clauses.append(Clause(base.subject, predicate, suffix))
    return clauses


def stage_aggregate(clauses: Sequence[Clause], finally_: bool = False) -> str:
    """Fold a paragraph of clauses into one sentence.

    Full stops become commas, the subject is kept only once, two identical
    consecutive predicates become one followed by "twice", the last
    predicate is introduced by "and", and ``finally_`` adds "Finally, ".
    """
    if not clauses:
        raise ValueError("cannot aggregate an empty paragraph")
    preds = [c.predicate + join_suffix(c.suffix) for c in clauses]
    merged = []
    k = 0
    while k < len(preds):
        if k + 1 < len(preds) and preds[k] == preds[k + 1]:
            merged.append(preds[k] + " twice")
            k += 2
        else:
            merged.append(preds[k])
            k += 1
    body = merged[0] if len(merged) == 1 else ", ".join(merged[:-1]) + " and " + merged[-1]
    subject = clauses[0].subject
    sentence = f"{subject} {body}" if subject else body
    if finally_:
        return f"Finally, {sentence}."
    return capitalize(sentence) + "."


@dataclass(frozen=True)
class AbstractionStage:
    rewriter: Rewriter
    expansions: tuple[tuple[int, int | None], ...]  # (author rule index, n) per compiled rule
    templates: tuple[str, ...]

    @property
    def fst(self) -> F.Fst:
        return self.rewriter.fst

    def summary(self, compiled_rule: int) -> str:
        k, n = self.expansions[compiled_rule]
        text = self.templates[k]
        if n is not None:
            text = text.replace("{n}", str(n))
        text = capitalize(text.strip())
        return text if text.endswith((".", "!", "?")) else text + "."


def summary_symbol(rule: int, n: int | None) -> str:
    return f"<abs:{rule}>" if n is None else f"<abs:{rule}:{n}>"


def stage_abstract(spec: Spec, max_count: int = DEFAULT_MAX_COUNT) -> AbstractionStage | None:
    """Compile abstraction rules, expanding ``^{n}`` for every allowed count.

    Larger counts come first so that equal-length ties favour them; the
    summary pseudo-symbol of each compiled rule encodes the rule and count.
    """
    rules = []
    expansions = []
    for k, rule in enumerate(spec.abstraction_rules):
        counted = rule.counted
        if counted is None:
            rules.append(ReplaceRule(as_match_pattern(rule.pattern), (summary_symbol(k, None),)))
            expansions.append((k, None))
            continue
        high = max_count if counted.high is None else min(counted.high, max_count)
        for n in range(high, counted.low - 1, -1):
            rules.append(ReplaceRule(as_match_pattern(instantiate(rule.pattern, n)), (summary_symbol(k, n),)))
            expansions.append((k, n))
    if not rules:
        return None
    rw = compile_replace(rules, spec.alphabet, spec.group_map)
    return AbstractionStage(rw, tuple(expansions), tuple(r.template for r in spec.abstraction_rules))


# ---------------------------------------------------------------------------
# Assembly


class ExplanationPipeline:
    """All stages compiled once for a spec; :meth:`explain` is then pure."""

    def __init__(self, spec: Spec, max_count: int = DEFAULT_MAX_COUNT):
        diags = validate_spec(spec, max_count)
        if diags:
            raise SpecInvalid(diags)
        if max_count < 0:
            raise ValueError("max_count must be >= 0")
        self.spec = spec
        self.max_count = max_count
        self.decider = compile_context_rules(spec.context_rules, spec.alphabet, spec.group_map)

    # Stages are compiled on first use, so a caller that needs only one
    # level does not pay for the others.

    @cached_property
    def separate(self) -> F.Fst:
        return stage_separate(list(self.spec.alphabet))

    @cached_property
    def grouping(self) -> Rewriter | None:
        return _group_rewriter(self.spec, separated=True)

    @cached_property
    def raw_grouping(self) -> Rewriter | None:
        return _group_rewriter(self.spec, separated=False)

    @cached_property
    def dictionary(self) -> F.Fst:
        return stage_dictionary(self.spec)

    @cached_property
    def abstraction(self) -> AbstractionStage | None:
        return stage_abstract(self.spec, self.max_count)

    def _monitor(self, transparent) -> list[F.Fst]:
        if self.spec.monitor is None:
            return []
        return [monitor_transducer(self.spec.monitor, list(self.spec.alphabet), transparent)]

    @cached_property
    def cnl0(self) -> F.Fst:
        return F.compose_all(self.separate, *self._monitor((F.SENT,)), self.dictionary)

    @cached_property
    def cnl1(self) -> F.Fst:
        group = self.grouping.fst if self.grouping is not None else F.universal(list(self.spec.alphabet) + [F.SENT])
        close = stage_close_paragraphs(list(self.spec.alphabet) + [F.SENT])
        return F.compose_all(self.separate, group, close, *self._monitor((F.SENT, F.PARA)), self.dictionary)

    def verdict(self, trace: Sequence[str]) -> Verdict | None:
        if self.spec.monitor is None:
            return None
        return run_monitor(self.spec.monitor, trace)

    def explain(self, trace, level: int = 3) -> Explanation:
        if level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}")
        trace = check_trace(trace, self.spec.alphabet)
        verdict = self.verdict(trace)
        vi = verdict.index if verdict is not None and verdict.is_violation else None
        if not trace:
            return Explanation((), level, None, ())
        if level <= 1:
            tokens = F.apply_one(self.cnl0 if level == 0 else self.cnl1, trace)
            paragraphs = tokens_to_paragraphs(tokens)
            spans = []
            start = 0
            for p in paragraphs:
                spans.append((start, start + len(p)))
                start += len(p)
            return Explanation(tuple(tuple(p) for p in paragraphs), level, vi, tuple(spans))
        return self._aggregated(trace, level, vi)

    def segment(self, trace: Sequence[str]) -> list[tuple[int, int]]:
        """Paragraph spans produced by grouping alone (level 1 structure)."""
        return _group_spans(self.raw_grouping, trace, 0)

    def _aggregated(self, trace, level, vi) -> Explanation:
        n = len(trace)
        regions = [(0, n)] if vi is None else [(0, vi), (vi + 1, n)]
        items: list[tuple[int, int, int | None]] = []  # (start, end, compiled abstraction rule)
        for a, b in regions:
            if b <= a:
                pass
            elif level >= 3 and self.abstraction is not None:
                items += self._abstracted(trace, a, b)
            else:
                items += [(s, e, None) for s, e in _group_spans(self.raw_grouping, trace[a:b], a)]
            if vi is not None and a == 0:
                items.append((vi, vi + 1, None))
        decider = self.decider if level == 4 else None
        clauses = stage_lexicalize(self.spec, trace, vi, decider)
        paragraphs = []
        for k, (s, e, rule) in enumerate(items):
            if rule is not None:
                paragraphs.append((self.abstraction.summary(rule),))
                continue
            last = k == len(items) - 1
            finally_ = last and vi is not None and s <= vi < e and len(items) > 1
            paragraphs.append((stage_aggregate(clauses[s:e], finally_),))
        return Explanation(tuple(paragraphs), level, vi, tuple((s, e) for s, e, _ in items))

    def _abstracted(self, trace, a, b):
        items = []
        pending = None
        for seg in self.abstraction.rewriter.segments(trace[a:b]):
            s, e = seg.start + a, seg.end + a
            if seg.rule is None:
                pending = (pending[0], e) if pending else (s, e)
                continue
            if pending:
                items += [(x, y, None) for x, y in _group_spans(self.raw_grouping, trace[pending[0]:pending[1]], pending[0])]
                pending = None
            items.append((s, e, seg.rule))
        if pending:
            items += [(x, y, None) for x, y in _group_spans(self.raw_grouping, trace[pending[0]:pending[1]], pending[0])]
        return items


def _group_spans(rw: Rewriter | None, trace: Sequence[str], offset: int) -> list[tuple[int, int]]:
    if not trace:
        return []
    if rw is None:
        return [(offset, offset + len(trace))]
    spans = []
    start = 0
    for seg in rw.segments(trace):
        if seg.rule is not None:
            spans.append((offset + start, offset + seg.end))
            start = seg.end
    if start < len(trace):
        spans.append((offset + start, offset + len(trace)))
    return spans


def explain(spec: Spec, trace, level: int = 3, max_count: int = DEFAULT_MAX_COUNT) -> Explanation:
    """Compile ``spec`` and explain one trace; reuse :class:`ExplanationPipeline` for many."""
    return ExplanationPipeline(spec, max_count).explain(trace, level)
