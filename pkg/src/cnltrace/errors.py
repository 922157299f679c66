"""Exception types shared across the package.

Every error can optionally carry a 1-based ``line``/``column`` pointing into
the source text it came from (spec files, regex strings, traces).
"""

from __future__ import annotations


class CnlError(ValueError):
    code = "Error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.code}: {self.message}"
        return f"{self.line}:{self.column or 1}: {self.code}: {self.message}"


class InvalidSymbol(CnlError):
    code = "InvalidSymbol"


class UnknownSymbol(CnlError):
    code = "UnknownSymbol"


class UnknownGroup(CnlError):
    code = "UnknownGroup"


class InfiniteOutput(CnlError):
    """An epsilon-input cycle emits output, so one input has infinitely many images."""

    code = "InfiniteOutput"


class EmptyMatchPattern(CnlError):
    code = "EmptyMatchPattern"


class NoRuleForAction(CnlError):
    code = "NoRuleForAction"


class UnknownAction(CnlError):
    code = "UnknownAction"

    def __init__(self, symbol: str, position: int):
        super().__init__(f"action {symbol!r} at position {position} is not in the alphabet",
                         line=None)
        self.symbol = symbol
        self.position = position


class SpecError(CnlError):
    code = "SpecError"


class SpecSyntaxError(SpecError):
    code = "SyntaxError"


class DuplicateSymbol(SpecError):
    code = "DuplicateSymbol"


class MissingLexiconEntry(SpecError):
    code = "MissingLexiconEntry"

    def __init__(self, symbol: str, line: int | None = None, column: int | None = None):
        super().__init__(f"no lexicon entry for symbol {symbol!r}", line, column)
        self.symbol = symbol


class BadCountRange(SpecError):
    code = "BadCountRange"


class SpecInvalid(SpecError):
    """Raised when a parsed spec fails validation; ``diagnostics`` lists why."""

    code = "SpecInvalid"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "invalid spec",
                         first.line if first else None, first.column if first else None)

    def __str__(self) -> str:
        return "\n".join(str(d) for d in self.diagnostics)
