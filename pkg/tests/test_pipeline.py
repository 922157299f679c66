from dataclasses import replace
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cnltrace import fst as F
from cnltrace.errors import SpecInvalid, UnknownAction
from cnltrace.pipeline import (
    Explanation,
    ExplanationPipeline,
    check_trace,
    explain,
    stage_abstract,
    stage_aggregate,
    stage_group,
    stage_lexicalize,
    stage_separate,
)
from cnltrace.specdsl import Clause, parse_spec
from conftest import CONTEXT_SPEC, GOLDEN, REFERENCE_TRACE
from oracles import greedy_rewrite

MARKS = {F.SENT: ".", F.PARA: "|"}
traces = st.text(alphabet="blgxrw", max_size=20)


def show(seq):
    return "".join(MARKS.get(s, s) for s in seq)


def clauses(spec, trace):
    return stage_lexicalize(spec, tuple(trace))


# -- separation and grouping -------------------------------------------------


def test_separate_reference_trace(spec):
    out = F.apply_one(stage_separate(spec.alphabet), list(REFERENCE_TRACE))
    assert show(out) == "l.g.r.x.l.b.l.g.w.w.x.l.g.r.w.x.l.g.x.l.b.l.b.l.b.l."


def test_separate_edge_cases(spec):
    t = stage_separate(spec.alphabet)
    assert F.apply_one(t, []) == ()
    assert F.apply_one(t, ["b"]) == ("b", F.SENT)


def test_group_reference_trace(spec):
    out = F.apply_one(stage_group(spec, separated=False), list(REFERENCE_TRACE))
    assert show(out) == "lgrx|lb|lgwwx|lgrwx|lgx|lb|lb|lb|l"


def test_group_separated_form(spec):
    t = F.compose(stage_separate(spec.alphabet), stage_group(spec))
    assert show(F.apply_one(t, list(REFERENCE_TRACE))) == (
        "l.g.r.x.|l.b.|l.g.w.w.x.|l.g.r.w.x.|l.g.x.|l.b.|l.b.|l.b.|l.")


def test_no_group_match_gives_one_paragraph(small_pipeline):
    e = small_pipeline.explain("rrwg", level=1)
    assert e.spans == ((0, 4),)


def test_spec_without_groups_is_identity():
    spec = parse_spec("[alphabet]\na b\n[lexicon]\na = x\nb = y\n")
    t = stage_group(spec, separated=False)
    assert F.apply_one(t, ["a", "b"]) == ("a", "b")


def _oracle_spans(spec, trace):
    patterns = [ast for _, ast in spec.groups]
    spans, start = [], 0
    for s, e, rule in greedy_rewrite(patterns, trace, spec.group_map):
        if rule is not None:
            spans.append((start, e))
            start = e
    if start < len(trace):
        spans.append((start, len(trace)))
    return spans


def test_grouping_matches_oracle_exhaustively(spec, small_pipeline):
    for n in range(8):
        for trace in product("lbgx", repeat=n):
            assert small_pipeline.segment(trace) == _oracle_spans(spec, trace)


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="lbgx", min_size=8, max_size=10))
def test_grouping_matches_oracle_long(spec, small_pipeline, trace):
    assert small_pipeline.segment(tuple(trace)) == _oracle_spans(spec, tuple(trace))


# -- lexicalisation and aggregation ----------------------------------------


def test_lexicalize_plain(spec):
    assert clauses(spec, "l")[0].render() == "The user requested to log in."


def test_lexicalize_violation(spec):
    cl = stage_lexicalize(spec, tuple(REFERENCE_TRACE), violation_index=25)
    assert cl[25].render() == "The user requested to log in, which should not have been allowed."
    assert all(c.suffix == "" for c in cl[:25])


def test_lexicalize_contextual():
    spec = parse_spec(CONTEXT_SPEC)
    pipe = ExplanationPipeline(spec)
    cl = stage_lexicalize(spec, tuple("lxx"), decider=pipe.decider)
    assert [c.predicate for c in cl] == ["logs in", "logged out", "attempted to log out"]


def test_aggregate_three_clauses(spec):
    assert stage_aggregate(clauses(spec, "lgx")) == (
        "The user requested to log in, gave a good password and logged out.")


def test_aggregate_twice(spec):
    assert stage_aggregate(clauses(spec, "lgwwx")) == (
        "The user requested to log in, gave a good password, wrote to a file twice and logged out.")


def test_aggregate_single_clause_unchanged(spec):
    assert stage_aggregate(clauses(spec, "r")) == "The user read from a file."


def test_aggregate_finally(spec):
    cl = stage_lexicalize(spec, ("l",), violation_index=0)
    assert stage_aggregate(cl, finally_=True) == (
        "Finally, the user requested to log in, which should not have been allowed.")


def test_aggregate_without_subject():
    cl = [Clause("", "did a"), Clause("", "did b")]
    assert stage_aggregate(cl) == "Did a and did b."


def test_aggregate_rejects_empty():
    with pytest.raises(ValueError):
        stage_aggregate([])


# -- abstraction -------------------------------------------------------------


def test_abstract_expansion_order(spec):
    stage = stage_abstract(spec, max_count=4)
    counts = [n for k, n in stage.expansions]
    assert counts == [None, None, 4, 3, 2, 4, 3, 2]
    assert stage.summary(6) == "The user unsuccessfully attempted to log in 3 times."


def test_abstract_without_rules_is_none():
    assert stage_abstract(parse_spec("[alphabet]\na\n[lexicon]\na = x\n")) is None


def test_abstract_reference_trace(small_pipeline):
    e = small_pipeline.explain(REFERENCE_TRACE, level=3)
    assert e.spans == ((0, 19), (19, 25), (25, 26))
    assert e.sentences == [
        "The user successfully logged in a number of times, with one off bad logins in between.",
        "The user unsuccessfully attempted to log in 3 times.",
        "Finally, the user requested to log in, which should not have been allowed.",
    ]


def test_abstract_lblblb(small_pipeline):
    assert small_pipeline.explain("lblblb", level=3).sentences == [
        "The user unsuccessfully attempted to log in 3 times."]


def test_abstract_no_match_equals_level2(small_pipeline):
    for t in ["rwx", "lgx", "x", "gx"]:
        a = small_pipeline.explain(t, level=3)
        b = small_pipeline.explain(t, level=2)
        assert a.paragraphs == b.paragraphs and a.spans == b.spans


def test_counted_rule_bounded_by_max_count(spec):
    pipe = ExplanationPipeline(spec, max_count=2)
    e = pipe.explain("lblblb", level=3)
    assert e.sentences == ["The user unsuccessfully attempted to log in 2 times.",
                           "The user requested to log in and gave a bad password."]


# -- whole explanations ------------------------------------------------------


def test_level0_matches_golden(pipeline):
    e = pipeline.explain(REFERENCE_TRACE, level=0)
    expected = (GOLDEN / "cnl0.txt").read_text(encoding="utf-8").strip()
    assert " ".join(e.sentences) == expected
    assert len(e.paragraphs) == 1 and len(e.sentences) == 26
    assert e.violation_index == 25


def test_level1_paragraph_sizes(pipeline):
    e = pipeline.explain(REFERENCE_TRACE, level=1)
    assert [len(p) for p in e.paragraphs] == [4, 2, 5, 5, 3, 2, 2, 2, 1]


def test_level2_reference_trace(pipeline):
    e = pipeline.explain(REFERENCE_TRACE, level=2)
    assert len(e.paragraphs) == 9
    assert e.sentences[2] == (
        "The user requested to log in, gave a good password, wrote to a file twice and logged out.")
    assert e.sentences[-1] == "Finally, the user requested to log in, which should not have been allowed."


@pytest.mark.parametrize("level", range(5))
def test_empty_trace(pipeline, level):
    assert pipeline.explain("", level) == Explanation((), level, None, ())


def test_unknown_action():
    with pytest.raises(UnknownAction) as exc:
        explain(parse_spec("[alphabet]\nl g\n[lexicon]\nl = x\ng = y\n"), "lgq")
    assert exc.value.symbol == "q" and exc.value.position == 2


def test_check_trace_tokenizes():
    assert check_trace("l g", ("l", "g")) == ("l", "g")
    assert check_trace("login pass", ("login", "pass")) == ("login", "pass")
    assert check_trace(["l"], ("l",)) == ("l",)


def test_invalid_spec_rejected():
    spec = parse_spec("[alphabet]\na\n[lexicon]\na = x\n[groups]\ng = a*\n")
    with pytest.raises(SpecInvalid) as exc:
        ExplanationPipeline(spec)
    assert exc.value.diagnostics[0].code == "EmptyMatchPattern"


def test_bad_level(pipeline):
    with pytest.raises(ValueError):
        pipeline.explain("l", level=5)


def test_no_monitor_means_no_violation(spec):
    e = explain(replace(spec, monitor=None), "lblblbl", level=2, max_count=3)
    assert e.violation_index is None
    assert not any("allowed" in s for s in e.sentences)


def test_level4_uses_context(spec):
    pipe = ExplanationPipeline(parse_spec(CONTEXT_SPEC))
    assert pipe.explain("lxx", level=4).sentences == [
        "The user logs in, logged out and attempted to log out."]
    assert pipe.explain("lxx", level=2).sentences == [
        "The user requested to log in and logged out twice."]


def test_level4_structure_equals_level3(small_pipeline):
    for t in [REFERENCE_TRACE, "lgxx", "lblbx"]:
        assert small_pipeline.explain(t, 4).spans == small_pipeline.explain(t, 3).spans


# -- properties ----------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(traces)
def test_content_conservation(small_pipeline, spec, trace):
    for level in (0, 1):
        e = small_pipeline.explain(trace, level)
        sents = e.sentences
        assert len(sents) == len(trace)
        for k, (a, s) in enumerate(zip(trace, sents)):
            expected = spec.lexicon[a]
            if k == e.violation_index:
                expected = replace(expected, suffix=spec.violation_phrase)
            assert s == expected.render()


@settings(max_examples=150, deadline=None)
@given(traces)
def test_spans_partition_trace(small_pipeline, trace):
    for level in (1, 2, 3):
        spans = small_pipeline.explain(trace, level).spans
        assert sum(e - s for s, e in spans) == len(trace)
        assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
        if spans:
            assert spans[0][0] == 0 and spans[-1][1] == len(trace)


@settings(max_examples=150, deadline=None)
@given(traces)
def test_level2_one_sentence_one_subject(small_pipeline, trace):
    e = small_pipeline.explain(trace, 2)
    for p in e.paragraphs:
        assert len(p) == 1
        assert p[0].lower().count("the user") == 1


def test_max_count_zero_without_fixed_rules_equals_level2(spec):
    counted_only = replace(spec, abstraction_rules=tuple(
        r for r in spec.abstraction_rules if r.counted is not None))
    pipe = ExplanationPipeline(counted_only, max_count=0)
    for t in [REFERENCE_TRACE, "lblblb", "lgxlgx", "", "w"]:
        assert pipe.explain(t, 3) == replace(pipe.explain(t, 2), level=3)


@settings(max_examples=10, deadline=None)
@given(traces, st.integers(0, 4))
def test_deterministic(spec, small_pipeline, trace, level):
    assert small_pipeline.explain(trace, level) == ExplanationPipeline(spec, 3).explain(trace, level)
