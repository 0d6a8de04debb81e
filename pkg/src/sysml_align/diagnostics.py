"""Diagnostics shared by the parser, resolver, and pipeline checks.

Codes are stable identifiers of the form ``area.kind`` so downstream
tooling (session transcripts, the review UI) can group and filter them
without parsing message text.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Span:
    """1-based line/column range in a source text."""

    line: int
    col: int
    end_line: int
    end_col: int

    @classmethod
    def point(cls, line: int, col: int) -> "Span":
        return cls(line, col, line, col)

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Span | None = None

    def format(self, source_name: str | None = None) -> str:
        where = f"{source_name or '<input>'}:{self.span}" if self.span else (source_name or "<input>")
        return f"{where}: {self.severity.value}: {self.message} [{self.code}]"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "span": None
            if self.span is None
            else {
                "line": self.span.line,
                "col": self.span.col,
                "end_line": self.span.end_line,
                "end_col": self.span.end_col,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagnostic":
        span = data.get("span")
        return cls(
            severity=Severity(data["severity"]),
            code=data["code"],
            message=data["message"],
            span=None if span is None else Span(span["line"], span["col"], span["end_line"], span["end_col"]),
        )


def has_errors(diagnostics) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


class DiagnosticError(Exception):
    """Raised when an operation cannot produce a value at all."""

    def __init__(self, diagnostics: list[Diagnostic] | Diagnostic, message: str | None = None):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = diagnostics
        super().__init__(message or "; ".join(d.format() for d in diagnostics))


def error(code: str, message: str, span: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def warning(code: str, message: str, span: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, span)


def info(code: str, message: str, span: Span | None = None) -> Diagnostic:
    return Diagnostic(Severity.INFO, code, message, span)
