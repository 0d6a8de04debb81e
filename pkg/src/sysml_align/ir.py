"""Flat intermediate representation of a model (Stage 1 artifact).

The IR is the only thing the matcher ever sees; it is deliberately free of
AST back-references. Field names and the JSON layout are documented in
``docs/ir-schema.md``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .diagnostics import DiagnosticError, error
from .nodes import Element, ElementKind, Model, RelationKind

#: AST kinds that become IR elements; the rest are folded into their owners.
IR_KINDS = frozenset(k for k in ElementKind if k not in (ElementKind.IMPORT, ElementKind.ALIAS, ElementKind.COMMENT))

_UID_LENGTH = 12


@dataclass(frozen=True)
class PortSummary:
    name: str
    direction: str | None
    type: str | None

    def to_dict(self) -> dict:
        return {"name": self.name, "direction": self.direction, "type": self.type}


@dataclass(frozen=True)
class AttributeSummary:
    name: str
    type: str | None

    def to_dict(self) -> dict:
        return {"name": self.name, "type": self.type}


@dataclass
class IRElement:
    uid: str
    qualified_name: str
    kind: ElementKind
    owner_uid: str | None
    typed_by: list[str] = field(default_factory=list)
    specializes: list[str] = field(default_factory=list)
    ports: list[PortSummary] = field(default_factory=list)
    attributes: list[AttributeSummary] = field(default_factory=list)
    doc: str | None = None
    metadata_tags: list[str] = field(default_factory=list)

    @property
    def local_name(self) -> str:
        return self.qualified_name.rsplit("::", 1)[-1]

    def to_dict(self) -> dict:
        return {
            "uid": self.uid,
            "qualified_name": self.qualified_name,
            "kind": self.kind.value,
            "owner_uid": self.owner_uid,
            "typed_by": list(self.typed_by),
            "specializes": list(self.specializes),
            "ports": [p.to_dict() for p in self.ports],
            "attributes": [a.to_dict() for a in self.attributes],
            "doc": self.doc,
            "metadata_tags": list(self.metadata_tags),
        }


@dataclass
class ModelIR:
    model_name: str
    source_digest: str
    elements: list[IRElement]

    def by_uid(self) -> dict[str, IRElement]:
        return {el.uid: el for el in self.elements}

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "source_digest": self.source_digest,
            "elements": [el.to_dict() for el in self.elements],
        }


@dataclass
class ExtractionReport:
    total_ast_elements: int
    extracted: int
    skipped: list[dict]

    def to_dict(self) -> dict:
        return {
            "total_ast_elements": self.total_ast_elements,
            "extracted": self.extracted,
            "skipped": list(self.skipped),
        }


def derive_uid(kind: ElementKind, qualified_name: str) -> str:
    """Truncated content hash: stable across reformatting, no global counter."""
    return hashlib.sha256(f"{kind.value}:{qualified_name}".encode("utf-8")).hexdigest()[:_UID_LENGTH]


def extract_ir(model: Model, uid_map: dict[str, str] | None = None) -> tuple[ModelIR, ExtractionReport]:
    """Summarize a model into its IR plus a completeness report.

    ``uid_map`` maps qualified names to caller-provided UIDs; elements not in
    the map fall back to derived UIDs. extracted + len(skipped) always equals
    the AST element count.
    """
    uid_map = uid_map or {}
    elements: list[IRElement] = []
    skipped: list[dict] = []
    uid_of: dict[str, str] = {}
    total = 0

    for el in model.walk():
        total += 1
        if el.kind not in IR_KINDS:
            skipped.append({"qualified_name": el.qualified_name, "reason": "folded"})
            continue
        uid = uid_map.get(el.qualified_name) or derive_uid(el.kind, el.qualified_name)
        uid_of[el.qualified_name] = uid
        elements.append(_summarize(el, uid))

    for ir_el, ast_el in zip(elements, (e for e in model.walk() if e.kind in IR_KINDS)):
        owner_q = ast_el.qualified_name.rsplit("::", 1)[0] if "::" in ast_el.qualified_name else None
        ir_el.owner_uid = uid_of.get(owner_q) if owner_q else None

    seen: dict[str, str] = {}
    for el in elements:
        if el.uid in seen:
            raise DiagnosticError(
                error("ir.uid-collision", f"uid '{el.uid}' assigned to both '{seen[el.uid]}' and '{el.qualified_name}'")
            )
        seen[el.uid] = el.qualified_name

    ir = ModelIR(model_name=model.name, source_digest=model.source_digest, elements=elements)
    report = ExtractionReport(total_ast_elements=total, extracted=len(elements), skipped=skipped)
    return ir, report


def _summarize(el: Element, uid: str) -> IRElement:
    ports = [
        PortSummary(
            name=child.name or child.local_name,
            direction=child.direction,
            type=child.first_target(RelationKind.TYPED_BY),
        )
        for child in el.children
        if child.kind is ElementKind.PORT_USAGE
    ]
    attributes = [
        AttributeSummary(name=child.name or child.local_name, type=child.first_target(RelationKind.TYPED_BY))
        for child in el.children
        if child.kind is ElementKind.ATTRIBUTE_USAGE
    ]
    return IRElement(
        uid=uid,
        qualified_name=el.qualified_name,
        kind=el.kind,
        owner_uid=None,
        typed_by=el.relation_targets(RelationKind.TYPED_BY),
        specializes=el.relation_targets(RelationKind.SPECIALIZES),
        ports=ports,
        attributes=attributes,
        doc=el.doc,
        metadata_tags=list(el.metadata_tags),
    )


# --- JSON round-trip ---------------------------------------------------------

_REQUIRED_ELEMENT_FIELDS = (
    "uid",
    "qualified_name",
    "kind",
    "owner_uid",
    "typed_by",
    "specializes",
    "ports",
    "attributes",
    "doc",
    "metadata_tags",
)


def ir_to_json(ir: ModelIR) -> str:
    from .jsonutil import canonical_dumps

    return canonical_dumps(ir.to_dict())


def json_to_ir(text: str) -> ModelIR:
    import json

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagnosticError(error("ir.schema", f"invalid JSON: {exc}")) from exc

    def fail(path: str, message: str):
        raise DiagnosticError(error("ir.schema", f"{path}: {message}"))

    for key in ("model_name", "source_digest", "elements"):
        if key not in data:
            fail(f"$.{key}", "missing field")
    if not isinstance(data["elements"], list):
        fail("$.elements", "expected a list")

    elements: list[IRElement] = []
    for i, raw in enumerate(data["elements"]):
        path = f"$.elements[{i}]"
        for key in _REQUIRED_ELEMENT_FIELDS:
            if key not in raw:
                fail(f"{path}.{key}", "missing field")
        try:
            kind = ElementKind(raw["kind"])
        except ValueError:
            fail(f"{path}.kind", f"unknown kind '{raw['kind']}'")
        elements.append(
            IRElement(
                uid=raw["uid"],
                qualified_name=raw["qualified_name"],
                kind=kind,
                owner_uid=raw["owner_uid"],
                typed_by=list(raw["typed_by"]),
                specializes=list(raw["specializes"]),
                ports=[PortSummary(p["name"], p.get("direction"), p.get("type")) for p in raw["ports"]],
                attributes=[AttributeSummary(a["name"], a.get("type")) for a in raw["attributes"]],
                doc=raw["doc"],
                metadata_tags=list(raw["metadata_tags"]),
            )
        )
    return ModelIR(model_name=data["model_name"], source_digest=data["source_digest"], elements=elements)
