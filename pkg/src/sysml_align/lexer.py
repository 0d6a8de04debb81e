"""Tokenizer for the supported SysML v2 textual subset."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, Span, error

KEYWORDS = frozenset(
    {
        "about",
        "alias",
        "allocation",
        "attribute",
        "comment",
        "connect",
        "connection",
        "def",
        "doc",
        "for",
        "import",
        "in",
        "inout",
        "interface",
        "item",
        "metadata",
        "out",
        "package",
        "part",
        "port",
        "private",
        "public",
        "requirement",
        "subsets",
        "to",
    }
)

# longest-match first
_PUNCT = ("::", ":>>", ":>", ":", ";", "{", "}", "<", ">", "#", "*", ",", ".")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | KEYWORD | PUNCT | BLOCK | EOF
    value: str
    span: Span


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def normalize_block_text(raw: str) -> str:
    """Normalize a ``/* ... */`` body: per-line strip, drop decorative ``*``
    line prefixes, drop blank leading/trailing lines."""
    lines = []
    for line in raw.splitlines():
        stripped = line.strip()
        if stripped.startswith("*"):
            stripped = stripped[1:].strip()
        lines.append(stripped)
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    pos = 0
    line = 1
    col = 1
    n = len(text)

    def advance(count: int) -> None:
        nonlocal pos, line, col
        for _ in range(count):
            if pos < n and text[pos] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            pos += 1

    while pos < n:
        ch = text[pos]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", pos):
            while pos < n and text[pos] != "\n":
                advance(1)
            continue
        if text.startswith("/*", pos):
            start_line, start_col = line, col
            advance(2)
            start = pos
            while pos < n and not text.startswith("*/", pos):
                advance(1)
            if pos >= n:
                diagnostics.append(
                    error("lex.unterminated-block", "unterminated '/*' block", Span.point(start_line, start_col))
                )
                tokens.append(
                    Token("BLOCK", normalize_block_text(text[start:pos]), Span(start_line, start_col, line, col))
                )
                break
            body = text[start:pos]
            advance(2)
            tokens.append(Token("BLOCK", normalize_block_text(body), Span(start_line, start_col, line, col)))
            continue
        if _is_ident_start(ch):
            start_line, start_col = line, col
            start = pos
            while pos < n and _is_ident_part(text[pos]):
                advance(1)
            word = text[start:pos]
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, Span(start_line, start_col, line, col - 1)))
            continue
        for punct in _PUNCT:
            if text.startswith(punct, pos):
                span = Span(line, col, line, col + len(punct) - 1)
                tokens.append(Token("PUNCT", punct, span))
                advance(len(punct))
                break
        else:
            diagnostics.append(error("lex.unexpected-char", f"unexpected character {ch!r}", Span.point(line, col)))
            advance(1)

    tokens.append(Token("EOF", "", Span.point(line, col)))
    return tokens, diagnostics
