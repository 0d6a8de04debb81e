"""Recursive-descent parser for the supported SysML v2 textual subset.

The normative grammar lives in ``docs/grammar.md``. The parser recovers at
the next ``;`` or ``}`` after an error so one run reports every problem it
can find; a model is only produced when no Error-severity diagnostic was
emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, Severity, Span, error
from .lexer import Token, tokenize
from .nodes import (
    Element,
    ElementKind,
    Model,
    Relation,
    RelationKind,
    admits_metadata_prefix,
    assign_qualified_names,
    source_digest,
)

_DEF_KEYWORDS = {
    "part": ElementKind.PART_DEF,
    "port": ElementKind.PORT_DEF,
    "attribute": ElementKind.ATTRIBUTE_DEF,
    "item": ElementKind.ITEM_DEF,
    "requirement": ElementKind.REQUIREMENT_DEF,
    "interface": ElementKind.INTERFACE_DEF,
    "metadata": ElementKind.METADATA_DEF,
}

_USAGE_KEYWORDS = {
    "part": ElementKind.PART_USAGE,
    "port": ElementKind.PORT_USAGE,
    "attribute": ElementKind.ATTRIBUTE_USAGE,
    "item": ElementKind.ITEM_USAGE,
    "requirement": ElementKind.REQUIREMENT_USAGE,
}

_DIRECTIONAL_KINDS = {ElementKind.PORT_USAGE, ElementKind.ATTRIBUTE_USAGE, ElementKind.ITEM_USAGE}

_HERITAGE = {
    ":>": RelationKind.SPECIALIZES,
    ":>>": RelationKind.REDEFINES,
    "subsets": RelationKind.SUBSETS,
}


@dataclass
class ParseResult:
    model: Model | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None

    def expect(self) -> Model:
        if self.model is None:
            from .diagnostics import DiagnosticError

            raise DiagnosticError([d for d in self.diagnostics if d.severity is Severity.ERROR] or self.diagnostics)
        return self.model


class _ParseError(Exception):
    pass


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # --- token plumbing -------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.cur
        return tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind == "KEYWORD" and self.cur.value in words

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        if self.at(kind, value):
            return self.advance()
        wanted = what or (value if value is not None else kind.lower())
        self.error(f"expected {wanted}, found {self._describe(self.cur)}")
        raise _ParseError()

    def _describe(self, tok: Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        return repr(tok.value)

    def error(self, message: str, span: Span | None = None, code: str = "parse.expected") -> None:
        self.diagnostics.append(error(code, message, span or self.cur.span))

    def recover(self) -> None:
        """Skip to just past the next ';' or to a '}' so parsing can resume."""
        while not self.at("EOF"):
            if self.at("PUNCT", ";"):
                self.advance()
                return
            if self.at("PUNCT", "}"):
                return
            self.advance()

    # --- shared pieces --------------------------------------------------

    def parse_qname(self) -> str:
        segments = [self.expect("IDENT", what="identifier").value]
        while self.at("PUNCT", "::") or self.at("PUNCT", "."):
            if self.at("PUNCT", "::") and self.peek().kind == "PUNCT" and self.peek().value == "*":
                break  # wildcard handled by import
            self.advance()
            segments.append(self.expect("IDENT", what="identifier").value)
        return "::".join(segments)

    def parse_short_name(self) -> str | None:
        if self.at("PUNCT", "<"):
            self.advance()
            name = self.expect("IDENT", what="short name").value
            self.expect("PUNCT", ">")
            return name
        return None

    def parse_name_part(self, el: Element) -> None:
        el.short_name = self.parse_short_name()
        el.name = self.expect("IDENT", what="name").value
        if el.short_name is None:
            el.short_name = self.parse_short_name()

    def parse_heritage(self, el: Element, allow_typing: bool) -> None:
        while True:
            if allow_typing and self.at("PUNCT", ":") :
                self.advance()
                el.relations.append(Relation(RelationKind.TYPED_BY, self.parse_qname()))
                continue
            matched = False
            for mark, rel_kind in _HERITAGE.items():
                if (self.at("PUNCT", mark)) or (mark == "subsets" and self.at_keyword("subsets")):
                    self.advance()
                    el.relations.append(Relation(rel_kind, self.parse_qname()))
                    while self.at("PUNCT", ","):
                        self.advance()
                        el.relations.append(Relation(rel_kind, self.parse_qname()))
                    matched = True
                    break
            if not matched:
                return

    def parse_body(self, el: Element) -> None:
        if self.at("PUNCT", ";"):
            self.advance()
            return
        self.expect("PUNCT", "{", what="'{' or ';'")
        self.parse_members(el)
        self.expect("PUNCT", "}")

    # --- members ---------------------------------------------------------

    def parse_members(self, owner: Element) -> None:
        while not self.at("PUNCT", "}") and not self.at("EOF"):
            try:
                self.parse_member(owner)
            except _ParseError:
                self.recover()
        self._check_duplicate_names(owner)

    def _check_duplicate_names(self, owner: Element) -> None:
        seen: dict[str, Element] = {}
        for child in owner.children:
            if not child.name:
                continue
            if child.name in seen:
                self.diagnostics.append(
                    error(
                        "parse.duplicate-name",
                        f"duplicate sibling name '{child.name}' in '{owner.name or '<root>'}'",
                        child.span,
                    )
                )
            else:
                seen[child.name] = child

    def parse_member(self, owner: Element) -> None:
        tags: list[str] = []
        first_tag_span: Span | None = None
        while self.at("PUNCT", "#"):
            first_tag_span = first_tag_span or self.cur.span
            self.advance()
            tags.append(self.parse_qname())

        if self.at("BLOCK"):
            tok = self.advance()
            owner.children.append(Element(ElementKind.COMMENT, text=tok.value, span=tok.span))
            self._reject_tags(tags, first_tag_span, ElementKind.COMMENT)
            return

        if not self.at("KEYWORD") and not self.at("PUNCT", "#"):
            self.error(f"expected a member declaration, found {self._describe(self.cur)}")
            raise _ParseError()

        word = self.cur.value
        if word == "doc":
            self._parse_doc(owner)
            self._reject_tags(tags, first_tag_span, ElementKind.COMMENT)
            return
        if word == "comment":
            el = self._parse_comment()
        elif word == "package":
            el = self._parse_package()
        elif word == "alias":
            el = self._parse_alias()
        elif word in ("public", "private", "import"):
            el = self._parse_import()
        elif word in ("in", "out", "inout"):
            el = self._parse_directional_usage()
        elif word == "allocation":
            el = self._parse_allocation()
        elif word in ("connection", "connect"):
            el = self._parse_connection()
        elif word in _DEF_KEYWORDS and self.peek().kind == "KEYWORD" and self.peek().value == "def":
            el = self._parse_definition()
        elif word in _USAGE_KEYWORDS:
            el = self._parse_usage()
        else:
            self.error(f"unexpected keyword '{word}'")
            raise _ParseError()

        if tags:
            if admits_metadata_prefix(el.kind):
                el.metadata_tags = tags
            else:
                self._reject_tags(tags, first_tag_span, el.kind)
        owner.children.append(el)

    def _reject_tags(self, tags: list[str], span: Span | None, kind: ElementKind) -> None:
        if tags:
            self.diagnostics.append(
                error(
                    "parse.metadata-not-allowed",
                    f"metadata prefix is not allowed on {kind.value}",
                    span,
                )
            )

    def _parse_doc(self, owner: Element) -> None:
        self.advance()  # doc
        tok = self.expect("BLOCK", what="'/* ... */' body")
        owner.doc = tok.value if owner.doc is None else owner.doc + "\n" + tok.value

    def _parse_comment(self) -> Element:
        span = self.advance().span  # comment
        el = Element(ElementKind.COMMENT, span=span)
        if self.at("IDENT") or self.at("PUNCT", "<"):
            self.parse_name_part(el)
        if self.at_keyword("about"):
            self.advance()
            el.relations.append(Relation(RelationKind.COMMENT_ABOUT, self.parse_qname()))
        tok = self.expect("BLOCK", what="'/* ... */' body")
        el.text = tok.value
        return el

    def _parse_package(self) -> Element:
        span = self.advance().span
        el = Element(ElementKind.PACKAGE, span=span)
        self.parse_name_part(el)
        self.parse_body(el)
        return el

    def _parse_alias(self) -> Element:
        span = self.advance().span
        el = Element(ElementKind.ALIAS, span=span)
        self.parse_name_part(el)
        self.expect("KEYWORD", "for")
        el.relations.append(Relation(RelationKind.ALIAS_TARGET, self.parse_qname()))
        self.expect("PUNCT", ";")
        return el

    def _parse_import(self) -> Element:
        span = self.cur.span
        visibility = "private"
        if self.at_keyword("public", "private"):
            visibility = self.advance().value
        self.expect("KEYWORD", "import")
        el = Element(ElementKind.IMPORT, visibility=visibility, span=span)
        target = self.parse_qname()
        if self.at("PUNCT", "::") and self.peek().kind == "PUNCT" and self.peek().value == "*":
            self.advance()
            self.advance()
            el.wildcard = True
        el.relations.append(Relation(RelationKind.IMPORT_TARGET, target))
        self.expect("PUNCT", ";")
        return el

    def _parse_directional_usage(self) -> Element:
        direction = self.advance().value
        if not self.at_keyword("port", "attribute", "item"):
            self.error(f"'{direction}' must be followed by 'port', 'attribute', or 'item'")
            raise _ParseError()
        el = self._parse_usage()
        el.direction = direction
        return el

    def _parse_definition(self) -> Element:
        word = self.advance().value  # kind keyword
        self.advance()  # def
        el = Element(_DEF_KEYWORDS[word], span=self.cur.span)
        if not (self.at("IDENT") or self.at("PUNCT", "<")):
            self.error("definition requires a name", code="parse.nameless-definition")
            raise _ParseError()
        self.parse_name_part(el)
        self.parse_heritage(el, allow_typing=False)
        self.parse_body(el)
        return el

    def _parse_usage(self) -> Element:
        word = self.advance().value
        el = Element(_USAGE_KEYWORDS[word], span=self.cur.span)
        self.parse_name_part(el)
        self.parse_heritage(el, allow_typing=True)
        self.parse_body(el)
        return el

    def _parse_allocation(self) -> Element:
        span = self.advance().span
        el = Element(ElementKind.ALLOCATION_USAGE, span=span)
        short = self.parse_short_name()
        first = self.parse_qname()
        if self.at_keyword("to") and short is None:
            source = first
        else:
            if "::" in first:
                self.error(f"allocation name must be a simple identifier, found '{first}'")
                raise _ParseError()
            el.name = first
            el.short_name = short
            source = self.parse_qname()
        self.expect("KEYWORD", "to")
        target = self.parse_qname()
        el.relations.append(Relation(RelationKind.ALLOCATED_FROM, source))
        el.relations.append(Relation(RelationKind.ALLOCATED_TO, target))
        self.expect("PUNCT", ";")
        return el

    def _parse_connection(self) -> Element:
        span = self.cur.span
        el = Element(ElementKind.CONNECTION_USAGE, span=span)
        if self.at_keyword("connection"):
            self.advance()
            if self.at("IDENT") or self.at("PUNCT", "<"):
                self.parse_name_part(el)
            if self.at("PUNCT", ":"):
                self.advance()
                el.relations.append(Relation(RelationKind.TYPED_BY, self.parse_qname()))
        self.expect("KEYWORD", "connect")
        el.relations.append(Relation(RelationKind.CONNECT_FROM, self.parse_qname()))
        self.expect("KEYWORD", "to")
        el.relations.append(Relation(RelationKind.CONNECT_TO, self.parse_qname()))
        self.expect("PUNCT", ";")
        return el

    # --- entry ------------------------------------------------------------

    def parse_root(self) -> Element | None:
        root: Element | None = None
        while not self.at("EOF"):
            before = self.pos
            try:
                if not self.at_keyword("package"):
                    self.error(f"expected 'package' at top level, found {self._describe(self.cur)}")
                    raise _ParseError()
                pkg = self._parse_package()
                if root is None:
                    root = pkg
                else:
                    self.error(
                        "a model holds exactly one root package",
                        pkg.span,
                        code="parse.multiple-roots",
                    )
            except _ParseError:
                self.recover()
            if self.pos == before:
                self.advance()  # recovery stopped on '}' at top level; force progress
        if root is None and not self.diagnostics:
            self.error("empty input: expected a package", code="parse.empty")
        return root


def parse_model(text: str, source_name: str = "<input>") -> ParseResult:
    """Parse source text into a Model.

    Returns a ParseResult; ``model`` is None whenever any Error-severity
    diagnostic was produced, so a returned Model always satisfies the type
    invariants (single root, unique qualified names).
    """
    tokens, diagnostics = tokenize(text)
    parser = _Parser(tokens)
    root = parser.parse_root()
    diagnostics = diagnostics + parser.diagnostics
    if root is not None and not any(d.severity is Severity.ERROR for d in diagnostics):
        assign_qualified_names(root)
        model = Model(root_package=root, source_name=source_name, source_digest=source_digest(text))
        return ParseResult(model, diagnostics)
    return ParseResult(None, diagnostics)
