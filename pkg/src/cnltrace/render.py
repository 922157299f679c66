"""Formatting explanations as plain text, HTML or LaTeX.

Paragraph numbering cannot be produced by a finite-state device for an
unbounded number of paragraphs, so it is added here, after the transducers
have done their work.

Templates (``P`` = sentences of one paragraph joined by single spaces)::

    plain, level 0    P
    plain, level >=1  "1. P\\n2. P"
    html,  level 0    "<p>P</p>"
    html,  level >=1  "<ol>\\n<li>P</li>\\n<li>P</li>\\n</ol>"
    latex, level 0    P
    latex, level >=1  "\\begin{enumerate}\\n\\item P\\n\\end{enumerate}"

No trailing newline is emitted; text is escaped for HTML and LaTeX.
"""

from __future__ import annotations

import html

from .pipeline import Explanation

FORMATS = ("plain", "html", "latex")

_LATEX_ESCAPES = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}


def escape_latex(text: str) -> str:
    return "".join(_LATEX_ESCAPES.get(ch, ch) for ch in text)


def render(explanation: Explanation, fmt: str = "plain") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    paras = [" ".join(p) for p in explanation.paragraphs]
    if explanation.level == 0:
        text = " ".join(paras)
        if fmt == "html":
            return f"<p>{html.escape(text, quote=False)}</p>" if text else ""
        return escape_latex(text) if fmt == "latex" else text
    if not paras:
        return ""
    if fmt == "plain":
        return "\n".join(f"{k}. {p}" for k, p in enumerate(paras, 1))
    if fmt == "html":
        items = "".join(f"<li>{html.escape(p, quote=False)}</li>\n" for p in paras)
        return f"<ol>\n{items}</ol>"
    items = "".join(f"\\item {escape_latex(p)}\n" for p in paras)
    return f"\\begin{{enumerate}}\n{items}\\end{{enumerate}}"
