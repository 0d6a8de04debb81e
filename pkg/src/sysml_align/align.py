"""Stage 4: generate the additive alignment package.

The generated package never copies or modifies source-model content: it
holds imports of both model roots and the extension library, one alias or
tagged allocation per accepted mapping, and one structured rationale comment
per construct.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .diagnostics import DiagnosticError, error
from .jsonutil import canonical_dumps
from .library import ExtensionLibrary
from .nodes import Element, ElementKind, Model, Relation, RelationKind, assign_qualified_names, source_digest
from .render import render_model
from .resolve import Resolver
from .verify import CONSTRUCT_ALIAS, CONSTRUCT_ALLOCATION, VerifiedMapping, detect_conflicts

_COMMENT_RE = re.compile(
    r"^confidence: (?P<confidence>[01]\.\d{2}); rationale: (?P<rationale>.*); origin: (?P<origin>Heuristic|Provider|User)$",
    re.DOTALL,
)


@dataclass
class AlignmentPackage:
    package: Element
    decisions_digest: str
    generated_at: str

    def to_model(self, source_name: str = "IntegratedModel_Alignment.sysml") -> Model:
        text = self.render()
        return Model(root_package=self.package, source_name=source_name, source_digest=source_digest(text))

    def render(self) -> str:
        return render_model(Model(root_package=self.package, source_name="", source_digest=""))


def rationale_comment_text(confidence: float, rationale: str, origin: str) -> str:
    safe = rationale.replace("*/", "* /")
    return f"confidence: {confidence:.2f}; rationale: {safe}; origin: {origin}"


def parse_rationale_comment(text: str) -> dict | None:
    """Parse the structured comment grammar; None when it does not conform."""
    match = _COMMENT_RE.match(text)
    if not match:
        return None
    return {
        "confidence": float(match.group("confidence")),
        "rationale": match.group("rationale"),
        "origin": match.group("origin"),
    }


def decisions_digest(accepted: list[VerifiedMapping]) -> str:
    payload = canonical_dumps([m.to_dict() for m in sorted(accepted, key=lambda m: m.mapping_id)])
    return "sha256:" + hashlib.sha256(payload.encode("utf-8")).hexdigest()


def generate_alignment_package(
    accepted: list[VerifiedMapping],
    oem_model: Model,
    supplier_model: Model,
    library: ExtensionLibrary,
    package_name: str | None = None,
    generated_at: str = "",
) -> AlignmentPackage:
    """Generate the additive package from accepted mappings.

    Preconditions (raised as DiagnosticError): every mapping Accepted or
    Modified with all checks passing, no ManyToOne/OneToMany conflicts among
    them, every tag in the library, every referenced element resolvable.
    """
    for m in accepted:
        if not m.is_accepted:
            raise DiagnosticError(
                error("align.pending", f"mapping {m.mapping_id} has verdict {m.verdict_status}; only accepted mappings can be aligned")
            )
        if not m.all_checks_pass:
            failing = ", ".join(c.name for c in m.checks if not c.passed)
            raise DiagnosticError(
                error("align.end-kind", f"mapping {m.mapping_id} has failing checks ({failing}) and cannot be aligned")
            )
        if not library.has_tag(m.effective_tag):
            raise DiagnosticError(
                error("align.unknown-tag", f"tag '{m.effective_tag}' of mapping {m.mapping_id} is not in the library")
            )

    blocking = detect_conflicts(accepted).of_kind("ManyToOne", "OneToMany")
    if blocking:
        details = "; ".join(f"{c['kind']}: {', '.join(c['members'])}" for c in blocking)
        raise DiagnosticError(error("align.conflict", f"unresolved mapping conflicts: {details}"))

    resolver = Resolver([oem_model, supplier_model])
    for m in accepted:
        for qname in (m.candidate.source_name, m.candidate.target_name):
            found, diag = resolver.try_resolve(qname)
            if found is None:
                raise DiagnosticError(
                    error("align.missing-element", f"mapping {m.mapping_id} references '{qname}': {diag.message}")
                )

    name = package_name or f"AlignmentPackage_{oem_model.name}_{supplier_model.name}"
    digest = decisions_digest(accepted)
    pkg = Element(ElementKind.PACKAGE, name=name)
    pkg.doc = (
        f"Alignment package referencing {oem_model.name} and {supplier_model.name}.\n"
        f"generated: {generated_at}; decisions: {digest}"
    )
    pkg.children.append(_import("private", oem_model.name, wildcard=True))
    pkg.children.append(_import("private", supplier_model.name, wildcard=True))
    pkg.children.append(_import("public", library.package_name, wildcard=True))

    used_names = set()
    aliases = sorted(
        (m for m in accepted if m.construct == CONSTRUCT_ALIAS),
        key=lambda m: (m.candidate.source_name, m.candidate.target_name),
    )
    for m in aliases:
        alias_name = _fresh(_local(m.candidate.target_name), used_names)
        alias = Element(ElementKind.ALIAS, name=alias_name)
        alias.relations.append(Relation(RelationKind.ALIAS_TARGET, m.candidate.source_name))
        pkg.children.append(alias)
        pkg.children.append(_rationale_comment(alias_name, m))

    allocations = sorted(
        (m for m in accepted if m.construct == CONSTRUCT_ALLOCATION),
        key=lambda m: (m.candidate.source_name, m.candidate.target_name),
    )
    for index, m in enumerate(allocations, start=1):
        alloc_name = _fresh(f"m{index}_{_local(m.candidate.source_name)}_to_{_local(m.candidate.target_name)}", used_names)
        alloc = Element(ElementKind.ALLOCATION_USAGE, name=alloc_name, metadata_tags=[m.effective_tag])
        alloc.relations.append(Relation(RelationKind.ALLOCATED_FROM, m.candidate.source_name))
        alloc.relations.append(Relation(RelationKind.ALLOCATED_TO, m.candidate.target_name))
        pkg.children.append(alloc)
        pkg.children.append(_rationale_comment(alloc_name, m))

    assign_qualified_names(pkg)
    return AlignmentPackage(package=pkg, decisions_digest=digest, generated_at=generated_at)


def _local(qualified_name: str) -> str:
    return qualified_name.rsplit("::", 1)[-1]


def _fresh(name: str, used: set) -> str:
    candidate = name
    suffix = 2
    while candidate in used:
        candidate = f"{name}_{suffix}"
        suffix += 1
    used.add(candidate)
    return candidate


def _import(visibility: str, target: str, wildcard: bool) -> Element:
    imp = Element(ElementKind.IMPORT, visibility=visibility, wildcard=wildcard)
    imp.relations.append(Relation(RelationKind.IMPORT_TARGET, target))
    return imp


def _rationale_comment(about: str, mapping: VerifiedMapping) -> Element:
    origin = "User" if mapping.verdict_status == "Modified" else mapping.candidate.origin
    comment = Element(
        ElementKind.COMMENT,
        text=rationale_comment_text(mapping.candidate.confidence, mapping.candidate.rationale, origin),
    )
    comment.relations.append(Relation(RelationKind.COMMENT_ABOUT, about))
    return comment


def generate_extension_demo(library: ExtensionLibrary, generated_at: str = "") -> str:
    """Stage-0 self-check snippet: two toy part usages plus one tagged
    allocation per library tag. Parses standalone."""
    if not library.tags:
        raise DiagnosticError(error("library.empty", "cannot generate a demo for an empty library"))
    pkg = Element(ElementKind.PACKAGE, name="AlignmentDemo")
    pkg.doc = f"Extension self-check: one tagged allocation per tag of {library.package_name}."
    pkg.children.append(_import("private", library.package_name, wildcard=True))
    pkg.children.append(Element(ElementKind.PART_USAGE, name="demoSource"))
    pkg.children.append(Element(ElementKind.PART_USAGE, name="demoTarget"))
    for index, tag in enumerate(library.tags, start=1):
        alloc = Element(ElementKind.ALLOCATION_USAGE, name=f"demo{index}", metadata_tags=[tag])
        alloc.relations.append(Relation(RelationKind.ALLOCATED_FROM, "demoSource"))
        alloc.relations.append(Relation(RelationKind.ALLOCATED_TO, "demoTarget"))
        pkg.children.append(alloc)
    assign_qualified_names(pkg)
    return render_model(Model(root_package=pkg, source_name="extension_demo.sysml", source_digest=""))
