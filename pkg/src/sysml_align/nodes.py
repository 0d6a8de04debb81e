"""AST node types for the supported SysML v2 textual subset.

Models are immutable after construction by convention: the parser and the
alignment generator are the only writers, and both hand out finished trees.
Everything downstream (IR extraction, rendering, resolution) only reads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .diagnostics import Span


class ElementKind(str, Enum):
    PACKAGE = "Package"
    PART_DEF = "PartDef"
    PART_USAGE = "PartUsage"
    PORT_DEF = "PortDef"
    PORT_USAGE = "PortUsage"
    ATTRIBUTE_DEF = "AttributeDef"
    ATTRIBUTE_USAGE = "AttributeUsage"
    ITEM_DEF = "ItemDef"
    ITEM_USAGE = "ItemUsage"
    REQUIREMENT_DEF = "RequirementDef"
    REQUIREMENT_USAGE = "RequirementUsage"
    INTERFACE_DEF = "InterfaceDef"
    CONNECTION_USAGE = "ConnectionUsage"
    ALLOCATION_USAGE = "AllocationUsage"
    METADATA_DEF = "MetadataDef"
    ALIAS = "Alias"
    IMPORT = "Import"
    COMMENT = "Comment"


_DEFINITION_KINDS = frozenset(
    {
        ElementKind.PART_DEF,
        ElementKind.PORT_DEF,
        ElementKind.ATTRIBUTE_DEF,
        ElementKind.ITEM_DEF,
        ElementKind.REQUIREMENT_DEF,
        ElementKind.INTERFACE_DEF,
        ElementKind.METADATA_DEF,
    }
)

_USAGE_KINDS = frozenset(
    {
        ElementKind.PART_USAGE,
        ElementKind.PORT_USAGE,
        ElementKind.ATTRIBUTE_USAGE,
        ElementKind.ITEM_USAGE,
        ElementKind.REQUIREMENT_USAGE,
        ElementKind.CONNECTION_USAGE,
        ElementKind.ALLOCATION_USAGE,
    }
)


def is_definition(kind: ElementKind) -> bool:
    return kind in _DEFINITION_KINDS


def is_usage(kind: ElementKind) -> bool:
    return kind in _USAGE_KINDS


def admits_metadata_prefix(kind: ElementKind) -> bool:
    """Prefix metadata (``#Tag``) is legal on usages only."""
    return kind in _USAGE_KINDS


class RelationKind(str, Enum):
    SPECIALIZES = "Specializes"
    TYPED_BY = "TypedBy"
    SUBSETS = "Subsets"
    REDEFINES = "Redefines"
    ALLOCATED_FROM = "AllocatedFrom"
    ALLOCATED_TO = "AllocatedTo"
    CONNECT_FROM = "ConnectFrom"
    CONNECT_TO = "ConnectTo"
    IMPORT_TARGET = "ImportTarget"
    ALIAS_TARGET = "AliasTarget"
    COMMENT_ABOUT = "CommentAbout"


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    target: str  # qualified name, canonical `::` separators, possibly unresolved


@dataclass(eq=False)
class Element:
    kind: ElementKind
    name: str | None = None
    short_name: str | None = None
    children: list["Element"] = field(default_factory=list)
    relations: list[Relation] = field(default_factory=list)
    doc: str | None = None
    metadata_tags: list[str] = field(default_factory=list)
    # kind-specific payload
    direction: str | None = None  # in / out / inout on port, attribute, item usages
    visibility: str | None = None  # public / private on imports
    wildcard: bool = False  # import ...::*
    text: str | None = None  # comment body
    # assigned after the tree is complete
    qualified_name: str = ""
    span: Span | None = None

    def relation_targets(self, kind: RelationKind) -> list[str]:
        return [r.target for r in self.relations if r.kind is kind]

    def first_target(self, kind: RelationKind) -> str | None:
        targets = self.relation_targets(kind)
        return targets[0] if targets else None

    @property
    def local_name(self) -> str:
        return self.qualified_name.rsplit("::", 1)[-1] if self.qualified_name else (self.name or "")

    def walk(self) -> Iterator["Element"]:
        """Depth-first, source order, self first."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Model:
    root_package: Element
    source_name: str
    source_digest: str

    def walk(self) -> Iterator[Element]:
        return self.root_package.walk()

    @property
    def name(self) -> str:
        return self.root_package.name or ""


def source_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def assign_qualified_names(root: Element) -> None:
    """Set qualified names over a finished tree.

    Unnamed elements (bare connections/allocations/comments) get a synthetic
    segment ``$<kind><ordinal>``; the ordinal counts unnamed siblings of the
    same kind so the name is stable under whitespace-only edits.
    """

    def walk(el: Element, prefix: str) -> None:
        counters: dict[ElementKind, int] = {}
        for child in el.children:
            if child.name:
                segment = child.name
            else:
                counters[child.kind] = counters.get(child.kind, 0) + 1
                segment = f"${child.kind.value.lower()}{counters[child.kind]}"
            child.qualified_name = f"{prefix}::{segment}" if prefix else segment
            walk(child, child.qualified_name)

    root.qualified_name = root.name or "$root"
    walk(root, root.qualified_name)


def _normalized_doc(text: str | None) -> str | None:
    return text if text else None


def _relation_key(rel: Relation) -> tuple[str, str]:
    return (rel.kind.value, rel.target)


def structurally_equal(a: Element, b: Element) -> bool:
    """Structural equality per the round-trip contract.

    Ignores spans; compares relations as multisets (render groups heritage
    clauses, so source order within one element is not significant); child
    order is significant.
    """
    if a.kind is not b.kind:
        return False
    if (a.name, a.short_name) != (b.name, b.short_name):
        return False
    if sorted(map(_relation_key, a.relations)) != sorted(map(_relation_key, b.relations)):
        return False
    if _normalized_doc(a.doc) != _normalized_doc(b.doc):
        return False
    if a.metadata_tags != b.metadata_tags:
        return False
    if (a.direction, a.visibility, a.wildcard) != (b.direction, b.visibility, b.wildcard):
        return False
    if _normalized_text(a.text) != _normalized_text(b.text):
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def _normalized_text(text: str | None) -> str | None:
    return text if text else None


def models_structurally_equal(a: Model, b: Model) -> bool:
    return structurally_equal(a.root_package, b.root_package)
