"""scikit-learn transformer wrapping a compiled explanation pipeline."""

from __future__ import annotations

import os

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .pipeline import DEFAULT_MAX_COUNT, LEVELS, Explanation, ExplanationPipeline
from .render import FORMATS, render
from .specdsl import Spec, default_spec, load_spec


class TraceExplainer(TransformerMixin, BaseEstimator):
    """Explain traces in controlled English.

    Parameters
    ----------
    spec : Spec, path or None
        Specification to compile. ``None`` uses the bundled login example.
    level : int
        Explanation level, 0 to 4.
    max_count : int
        Largest repetition count expanded for ``^{n}`` abstraction patterns.
    output_format : {"plain", "html", "latex"}
        Format of the strings returned by :meth:`transform`.

    ``fit`` ignores its data and compiles the specification into
    ``pipeline_``. ``transform`` maps an iterable of traces to a list of
    rendered strings.
    """

    def __init__(self, spec=None, level=3, max_count=DEFAULT_MAX_COUNT, output_format="plain"):
        self.spec = spec
        self.level = level
        self.max_count = max_count
        self.output_format = output_format

    def _resolve_spec(self) -> Spec:
        if self.spec is None:
            return default_spec()
        if isinstance(self.spec, Spec):
            return self.spec
        if isinstance(self.spec, (str, os.PathLike)):
            return load_spec(self.spec)
        raise TypeError(f"spec must be a Spec, a path or None, not {type(self.spec).__name__}")

    def _check_params(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {self.level!r}")
        if not isinstance(self.max_count, int) or isinstance(self.max_count, bool) or self.max_count < 0:
            raise ValueError(f"max_count must be a non-negative int, got {self.max_count!r}")
        if self.output_format not in FORMATS:
            raise ValueError(f"output_format must be one of {FORMATS}, got {self.output_format!r}")

    def fit(self, X=None, y=None):
        self._check_params()
        spec = self._resolve_spec()
        self.pipeline_ = ExplanationPipeline(spec, self.max_count)
        self.alphabet_ = tuple(spec.alphabet)
        return self

    def explain(self, trace) -> Explanation:
        check_is_fitted(self, "pipeline_")
        return self.pipeline_.explain(trace, self.level)

    def transform(self, X) -> list[str]:
        check_is_fitted(self, "pipeline_")
        if isinstance(X, str):
            raise TypeError("transform expects a collection of traces; wrap a single trace in a list")
        return [render(self.pipeline_.explain(t, self.level), self.output_format) for t in X]
