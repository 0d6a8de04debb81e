"""Deterministic pretty-printer for parsed or generated models.

The output is the canonical form of the subset: `::` path separators,
four-space indentation, explicit import visibility, heritage clauses grouped
as typing / specializes / redefines / subsets. ``parse_model(render_model(m))``
is structurally equal to ``m``.
"""

from __future__ import annotations

from .nodes import Element, ElementKind, Model, RelationKind

_INDENT = "    "

_DEF_HEADS = {
    ElementKind.PART_DEF: "part def",
    ElementKind.PORT_DEF: "port def",
    ElementKind.ATTRIBUTE_DEF: "attribute def",
    ElementKind.ITEM_DEF: "item def",
    ElementKind.REQUIREMENT_DEF: "requirement def",
    ElementKind.INTERFACE_DEF: "interface def",
    ElementKind.METADATA_DEF: "metadata def",
}

_USAGE_HEADS = {
    ElementKind.PART_USAGE: "part",
    ElementKind.PORT_USAGE: "port",
    ElementKind.ATTRIBUTE_USAGE: "attribute",
    ElementKind.ITEM_USAGE: "item",
    ElementKind.REQUIREMENT_USAGE: "requirement",
}


def render_model(model: Model) -> str:
    lines: list[str] = []
    _render_element(model.root_package, 0, lines)
    return "\n".join(lines) + "\n"


def render_element(element: Element) -> str:
    """Render a single element subtree (used for snippets and reports)."""
    lines: list[str] = []
    _render_element(element, 0, lines)
    return "\n".join(lines) + "\n"


def _name_part(el: Element) -> str:
    short = f"<{el.short_name}> " if el.short_name else ""
    return f"{short}{el.name}" if el.name else short.rstrip()


def _heritage(el: Element) -> str:
    parts: list[str] = []
    typed = el.relation_targets(RelationKind.TYPED_BY)
    if typed:
        parts.append(": " + ", ".join(typed))
    for kind, mark in (
        (RelationKind.SPECIALIZES, ":>"),
        (RelationKind.REDEFINES, ":>>"),
        (RelationKind.SUBSETS, "subsets"),
    ):
        targets = el.relation_targets(kind)
        if targets:
            parts.append(f"{mark} " + ", ".join(targets))
    return (" " + " ".join(parts)) if parts else ""


def _tags(el: Element) -> str:
    return "".join(f"#{t} " for t in el.metadata_tags)


def _block(text: str, indent: str) -> str:
    if "\n" not in text:
        return f"/* {text} */"
    inner = ("\n" + indent + _INDENT).join(text.splitlines())
    return f"/*\n{indent}{_INDENT}{inner}\n{indent}*/"


def _render_element(el: Element, depth: int, lines: list[str]) -> None:
    indent = _INDENT * depth

    if el.kind is ElementKind.COMMENT:
        head = "comment"
        if el.name:
            head += f" {_name_part(el)}"
        about = el.first_target(RelationKind.COMMENT_ABOUT)
        if about:
            head += f" about {about}"
        lines.append(f"{indent}{head} {_block(el.text or '', indent)}")
        return

    if el.kind is ElementKind.IMPORT:
        target = el.first_target(RelationKind.IMPORT_TARGET) or ""
        wildcard = "::*" if el.wildcard else ""
        lines.append(f"{indent}{el.visibility or 'private'} import {target}{wildcard};")
        return

    if el.kind is ElementKind.ALIAS:
        target = el.first_target(RelationKind.ALIAS_TARGET) or ""
        lines.append(f"{indent}alias {_name_part(el)} for {target};")
        return

    if el.kind is ElementKind.ALLOCATION_USAGE:
        source = el.first_target(RelationKind.ALLOCATED_FROM) or ""
        target = el.first_target(RelationKind.ALLOCATED_TO) or ""
        name = f"{_name_part(el)} " if el.name else ""
        lines.append(f"{indent}{_tags(el)}allocation {name}{source} to {target};")
        return

    if el.kind is ElementKind.CONNECTION_USAGE:
        source = el.first_target(RelationKind.CONNECT_FROM) or ""
        target = el.first_target(RelationKind.CONNECT_TO) or ""
        typed = el.relation_targets(RelationKind.TYPED_BY)
        if el.name or typed:
            head = f"connection {_name_part(el)}" if el.name else "connection"
            if typed:
                head += " : " + ", ".join(typed)
            lines.append(f"{indent}{_tags(el)}{head} connect {source} to {target};")
        else:
            lines.append(f"{indent}{_tags(el)}connect {source} to {target};")
        return

    if el.kind is ElementKind.PACKAGE:
        head = f"{indent}package {_name_part(el)}"
    elif el.kind in _DEF_HEADS:
        head = f"{indent}{_DEF_HEADS[el.kind]} {_name_part(el)}{_heritage(el)}"
    else:
        direction = f"{el.direction} " if el.direction else ""
        head = f"{indent}{_tags(el)}{direction}{_USAGE_HEADS[el.kind]} {_name_part(el)}{_heritage(el)}"

    if not el.children and el.doc is None:
        lines.append(head + ";")
        return

    lines.append(head + " {")
    if el.doc is not None:
        lines.append(f"{indent}{_INDENT}doc {_block(el.doc, indent + _INDENT)}")
    for child in el.children:
        _render_element(child, depth + 1, lines)
    lines.append(f"{indent}}}")
