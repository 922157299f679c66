"""Controlled-English explanations of execution traces, built from
finite-state transducers."""

from .errors import (
    BadCountRange,
    CnlError,
    DuplicateSymbol,
    EmptyMatchPattern,
    InfiniteOutput,
    InvalidSymbol,
    MissingLexiconEntry,
    NoRuleForAction,
    SpecError,
    SpecInvalid,
    SpecSyntaxError,
    UnknownAction,
    UnknownGroup,
    UnknownSymbol,
)
from .fst import Alphabet, Fst
from .monitor import Verdict, monitor_transducer, run_monitor
from .pipeline import (
    Explanation,
    ExplanationPipeline,
    explain,
    stage_abstract,
    stage_aggregate,
    stage_group,
    stage_lexicalize,
    stage_separate,
)
from .regex import compile_regex, parse_regex
from .render import render
from .rewrite import (
    ContextRule,
    ReplaceRule,
    compile_context_rules,
    mark_after,
    replace_leftmost_longest,
)
from .specdsl import (
    AbstractionRule,
    Clause,
    Diagnostic,
    MonitorAutomaton,
    Spec,
    default_spec,
    load_spec,
    parse_spec,
    serialize_spec,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")] + ["TraceExplainer"]


def __getattr__(name):
    # scikit-learn is slow to import; load the estimator only when asked for.
    if name == "TraceExplainer":
        from .estimator import TraceExplainer

        return TraceExplainer
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
