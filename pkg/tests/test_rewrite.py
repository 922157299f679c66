import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cnltrace import fst as F
from cnltrace.errors import EmptyMatchPattern, NoRuleForAction
from cnltrace.regex import Concat, Optional, Plus, Repeat, Star, Union, parse_regex
from cnltrace.rewrite import (
    ContextRule,
    ReplaceRule,
    compile_context_rules,
    compile_replace,
    mark_after,
    replace_leftmost_longest,
)
from oracles import all_strings, greedy_replace, greedy_rewrite, regex_matches
from test_regex import leaves

AB = ("a", "b")
SIGMA = ("b", "l", "g", "x", "r", "w")
BAR = F.PARA


def star_free(alphabet):
    def extend(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Concat(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Union(tuple(xs))),
            children.map(Optional),
            st.tuples(children, st.integers(1, 2)).map(lambda p: Repeat(*p)),
        )

    return st.recursive(leaves(alphabet), extend, max_leaves=4)


def star_height_one(alphabet):
    base = star_free(alphabet)
    atom = st.one_of(base, base.map(Star), base.map(Plus))

    def extend(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Concat(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Union(tuple(xs))),
        )

    return st.recursive(atom, extend, max_leaves=3)


def nonempty_patterns(alphabet):
    return star_height_one(alphabet).filter(lambda p: not regex_matches(p, ()))


def show(seq):
    return "".join("|" if s == BAR else s for s in seq)


def test_mark_after_longest_first():
    t = mark_after(parse_regex("a a | a"), BAR, AB)
    assert show(F.apply_one(t, list("aaa"))) == "aa|a|"


def test_mark_after_no_match_is_identity():
    t = mark_after(parse_regex("a b"), BAR, AB)
    for s in all_strings(AB, 5):
        if "ab" not in "".join(s):
            assert F.apply_one(t, s) == s


def test_mark_after_correct_group():
    t = mark_after(parse_regex("l g (r|w)* x"), BAR, SIGMA)
    out = show(F.apply_one(t, list("lgrxlblgwwxlgrwxlgxlblblbl")))
    assert out == "lgrx|lblgwwx|lgrwx|lgx|lblblbl"


def test_mark_after_rejects_empty_match():
    with pytest.raises(EmptyMatchPattern):
        mark_after(parse_regex("a*"), BAR, AB)


def test_replace_ties_go_to_first_rule():
    rules = [ReplaceRule(parse_regex("a b"), ("X",)), ReplaceRule(parse_regex("a ."), ("Y",))]
    t = replace_leftmost_longest(rules, AB)
    assert F.apply_one(t, list("ab")) == ("X",)
    assert F.apply_one(t, list("aa")) == ("Y",)
    swapped = replace_leftmost_longest(rules[::-1], AB)
    assert F.apply_one(swapped, list("ab")) == ("Y",)


def test_replace_prefers_longer_match():
    rules = [ReplaceRule(parse_regex("a"), ("X",)), ReplaceRule(parse_regex("a a"), ("Y",))]
    t = replace_leftmost_longest(rules, AB)
    assert F.apply_one(t, list("aaa")) == ("Y", "X")


def test_empty_rule_list_is_identity():
    t = replace_leftmost_longest([], AB)
    for s in all_strings(AB, 4):
        assert F.apply_down(t, s) == {s}


def test_replace_rejects_empty_match():
    with pytest.raises(EmptyMatchPattern):
        replace_leftmost_longest([ReplaceRule(parse_regex("a?"), ("X",))], AB)


def test_segments_partition_input():
    rw = compile_replace([ReplaceRule(parse_regex("l b"), ("F",)), ReplaceRule(parse_regex("l g x"), ("S",))], SIGMA)
    trace = list("rlgxlbblbw")
    segs = rw.segments(trace)
    assert [(s.start, s.end, s.rule) for s in segs] == greedy_rewrite(
        [parse_regex("l b"), parse_regex("l g x")], trace)
    assert segs[0].start == 0 and segs[-1].end == len(trace)
    assert all(a.end == b.start for a, b in zip(segs, segs[1:]))


@settings(max_examples=120, deadline=None)
@given(st.lists(nonempty_patterns(AB), min_size=1, max_size=3))
def test_replace_matches_greedy_oracle(patterns):
    reps = [(f"R{k}",) for k in range(len(patterns))]
    rw = compile_replace([ReplaceRule(p, r) for p, r in zip(patterns, reps)], AB)
    for s in all_strings(AB, 8):
        assert F.apply_down(rw.fst, s) == {greedy_replace(patterns, reps, s)}


@settings(max_examples=100, deadline=None)
@given(st.lists(nonempty_patterns(AB), min_size=1, max_size=3))
def test_segments_match_greedy_oracle(patterns):
    rw = compile_replace([ReplaceRule(p, ("R",)) for p in patterns], AB)
    for s in all_strings(AB, 6):
        assert [(x.start, x.end, x.rule) for x in rw.segments(s)] == greedy_rewrite(patterns, s)


@settings(max_examples=100, deadline=None)
@given(nonempty_patterns(AB))
def test_mark_after_is_functional(pattern):
    t = mark_after(pattern, BAR, AB)
    for s in all_strings(AB, 6):
        outs = F.apply_down(t, s)
        assert len(outs) == 1
        assert tuple(x for x in next(iter(outs)) if x != BAR) == s


def _logout_rules():
    return [
        ContextRule("x", parse_regex("l [^x]*"), None, "user logs out"),
        ContextRule("x", None, None, "user attempts to log out"),
    ]


def _login_rules():
    return [
        ContextRule("l", parse_regex("l b [^l]*"), parse_regex("b"), "user attempts to log in again"),
        ContextRule("l", None, parse_regex("b"), "user attempts to log in"),
        ContextRule("l", parse_regex("l [^b] [^l]*"), None, "user logs in again"),
        ContextRule("l", None, None, "user logs in"),
    ]


def test_context_logout_table():
    decide = compile_context_rules(_logout_rules(), SIGMA)
    trace = tuple("lxx")
    assert decide(trace, 1) == "user logs out"
    assert decide(trace, 2) == "user attempts to log out"
    assert decide(trace, 0) is None


def test_context_login_table():
    decide = compile_context_rules(_login_rules(), SIGMA)
    trace = tuple("lblb")
    assert decide(trace, 0) == "user attempts to log in"
    assert decide(trace, 2) == "user attempts to log in again"
    assert decide(tuple("lgxl"), 3) == "user logs in again"
    assert decide(tuple("l"), 0) == "user logs in"


def test_context_single_otherwise_rule():
    decide = compile_context_rules([ContextRule("r", None, None, "user reads")], SIGMA)
    assert decide(("r",), 0) == "user reads"


def test_context_requires_otherwise_rule():
    with pytest.raises(NoRuleForAction):
        compile_context_rules(_logout_rules()[:1], SIGMA)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(SIGMA), max_size=10))
def test_context_selection_is_total(trace):
    decide = compile_context_rules(_logout_rules() + _login_rules(), SIGMA)
    trace = tuple(trace)
    for i, a in enumerate(trace):
        out = decide(trace, i)
        assert (out is None) == (a not in ("x", "l"))
