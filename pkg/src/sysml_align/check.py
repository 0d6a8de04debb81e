"""Stage 5: consistency checks on the generated package and session coverage.

Four check groups: Structure, ReferenceScope, SemanticRelations,
ExtensionConsistency. Failures are diagnostics, not exceptions: an empty
DiagnosisList is the pass signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .align import AlignmentPackage, parse_rationale_comment
from .diagnostics import Diagnostic, Severity, error, warning
from .ir import ModelIR
from .library import ExtensionLibrary
from .matcher import CandidateSet
from .nodes import Element, ElementKind, Model, RelationKind, is_definition, is_usage
from .parser import parse_model
from .resolve import Resolver
from .verify import VerifiedMapping

CHECK_GROUPS = ("Structure", "ReferenceScope", "SemanticRelations", "ExtensionConsistency")

_PERMITTED_CHILD_KINDS = frozenset(
    {ElementKind.IMPORT, ElementKind.ALIAS, ElementKind.ALLOCATION_USAGE, ElementKind.COMMENT}
)


@dataclass
class DiagnosisList:
    groups: dict = field(default_factory=lambda: {g: [] for g in CHECK_GROUPS})

    @property
    def empty(self) -> bool:
        return not any(self.groups.values())

    def errors(self) -> list[Diagnostic]:
        return [d for diags in self.groups.values() for d in diags if d.severity is Severity.ERROR]

    def add(self, group: str, diagnostic: Diagnostic) -> None:
        self.groups[group].append(diagnostic)

    def to_dict(self) -> dict:
        return {group: [d.to_dict() for d in diags] for group, diags in self.groups.items()}


def check_consistency(
    pkg: AlignmentPackage | Model,
    oem_model: Model,
    supplier_model: Model,
    library: ExtensionLibrary,
) -> DiagnosisList:
    """Check the alignment package against both models and the library."""
    diagnosis = DiagnosisList()

    if isinstance(pkg, AlignmentPackage):
        reparsed = parse_model(pkg.render(), "IntegratedModel_Alignment.sysml")
        if reparsed.model is None:
            for diag in reparsed.diagnostics:
                diagnosis.add("Structure", diag)
            return diagnosis
        pkg_model = reparsed.model
    else:
        pkg_model = pkg

    root = pkg_model.root_package
    resolver = Resolver([oem_model, supplier_model, library.model, pkg_model])

    _check_structure(root, diagnosis)
    _check_reference_scope(root, resolver, diagnosis)
    _check_semantic_relations(root, resolver, diagnosis)
    _check_extension_consistency(root, resolver, library, diagnosis)
    return diagnosis


def _check_structure(root: Element, diagnosis: DiagnosisList) -> None:
    for child in root.children:
        if child.kind not in _PERMITTED_CHILD_KINDS:
            diagnosis.add(
                "Structure",
                error(
                    "check.structure",
                    f"'{child.qualified_name}' ({child.kind.value}) is not a permitted alignment-package member",
                ),
            )


def _referenced_names(el: Element) -> list[tuple[str, RelationKind]]:
    interesting = (
        RelationKind.IMPORT_TARGET,
        RelationKind.ALIAS_TARGET,
        RelationKind.ALLOCATED_FROM,
        RelationKind.ALLOCATED_TO,
        RelationKind.COMMENT_ABOUT,
    )
    return [(r.target, r.kind) for r in el.relations if r.kind in interesting]


def _check_reference_scope(root: Element, resolver: Resolver, diagnosis: DiagnosisList) -> None:
    for el in root.walk():
        for target, rel_kind in _referenced_names(el):
            found, diag = resolver.try_resolve_from(root, target)
            if found is None:
                diagnosis.add(
                    "ReferenceScope",
                    error(
                        "check.reference",
                        f"'{el.qualified_name}': {rel_kind.value} '{target}' does not resolve: {diag.message}",
                    ),
                )
            elif el.kind is ElementKind.IMPORT and el.wildcard:
                if found.kind is not ElementKind.PACKAGE and not is_definition(found.kind):
                    diagnosis.add(
                        "ReferenceScope",
                        error(
                            "check.reference",
                            f"wildcard import target '{target}' must be a package or definition scope",
                        ),
                    )


def _check_semantic_relations(root: Element, resolver: Resolver, diagnosis: DiagnosisList) -> None:
    for el in root.walk():
        if el.kind is ElementKind.ALLOCATION_USAGE:
            for rel_kind in (RelationKind.ALLOCATED_FROM, RelationKind.ALLOCATED_TO):
                target = el.first_target(rel_kind)
                if target is None:
                    continue
                found, _diag = resolver.try_resolve_from(root, target)
                if found is not None and not is_usage(found.kind):
                    diagnosis.add(
                        "SemanticRelations",
                        error(
                            "check.end-kind",
                            f"allocation '{el.qualified_name}' end '{target}' is a {found.kind.value};"
                            " allocation ends cannot be definitions",
                        ),
                    )
        elif el.kind is ElementKind.ALIAS:
            target = el.first_target(RelationKind.ALIAS_TARGET)
            if target is None:
                continue
            found, diag = resolver.try_resolve_from(root, target)
            if found is None and diag is not None and diag.code == "resolve.alias-cycle":
                diagnosis.add("SemanticRelations", error("check.alias-cycle", diag.message))


def _check_extension_consistency(
    root: Element,
    resolver: Resolver,
    library: ExtensionLibrary,
    diagnosis: DiagnosisList,
) -> None:
    comments_about: dict[str, int] = {}
    for el in root.children:
        if el.kind is ElementKind.COMMENT:
            about = el.first_target(RelationKind.COMMENT_ABOUT)
            if about:
                comments_about[about.rsplit("::", 1)[-1]] = comments_about.get(about.rsplit("::", 1)[-1], 0) + 1

    for el in root.children:
        if el.kind is ElementKind.ALLOCATION_USAGE:
            if len(el.metadata_tags) != 1:
                diagnosis.add(
                    "ExtensionConsistency",
                    error(
                        "check.extension",
                        f"allocation '{el.qualified_name}' carries {len(el.metadata_tags)} metadata tags; exactly one is required",
                    ),
                )
            for tag in el.metadata_tags:
                if not library.has_tag(tag):
                    diagnosis.add(
                        "ExtensionConsistency",
                        error("check.extension", f"tag '{tag}' on '{el.qualified_name}' is not defined by the library"),
                    )
        if el.kind in (ElementKind.ALLOCATION_USAGE, ElementKind.ALIAS):
            if not el.name:
                diagnosis.add(
                    "ExtensionConsistency",
                    error("check.extension", f"unnamed {el.kind.value} cannot carry a rationale comment"),
                )
                continue
            count = comments_about.get(el.name, 0)
            if count != 1:
                diagnosis.add(
                    "ExtensionConsistency",
                    error(
                        "check.extension",
                        f"'{el.qualified_name}' has {count} rationale comments; exactly one is required",
                    ),
                )

    for el in root.children:
        if el.kind is ElementKind.COMMENT and el.first_target(RelationKind.COMMENT_ABOUT):
            if parse_rationale_comment(el.text or "") is None:
                diagnosis.add(
                    "ExtensionConsistency",
                    error(
                        "check.extension",
                        f"comment about '{el.first_target(RelationKind.COMMENT_ABOUT)}' does not follow the"
                        " 'confidence: ..; rationale: ..; origin: ..' grammar",
                    ),
                )

    for el in root.children:
        if el.kind is ElementKind.IMPORT:
            target = el.first_target(RelationKind.IMPORT_TARGET)
            if target and target.split("::", 1)[0] == library.package_name and el.visibility != "public":
                diagnosis.add(
                    "ExtensionConsistency",
                    warning(
                        "check.extension-visibility",
                        f"library import '{target}' is {el.visibility}; consumers of the alignment package"
                        " cannot see the tags (public import expected)",
                    ),
                )


# --- coverage ---------------------------------------------------------------


@dataclass
class CoverageSide:
    model_name: str
    total_eligible: int
    matched: list[str]
    explicitly_unmatched: list[str]
    unprocessed: list[str]

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "total_eligible": self.total_eligible,
            "matched": list(self.matched),
            "explicitly_unmatched": list(self.explicitly_unmatched),
            "unprocessed": list(self.unprocessed),
        }


@dataclass
class CoverageReport:
    source: CoverageSide
    target: CoverageSide

    @property
    def has_unprocessed(self) -> bool:
        return bool(self.source.unprocessed or self.target.unprocessed)

    def to_dict(self) -> dict:
        return {"source": self.source.to_dict(), "target": self.target.to_dict()}


def check_coverage(
    mappings: list[VerifiedMapping],
    source_ir: ModelIR,
    target_ir: ModelIR,
    candidate_set: CandidateSet,
    explicit_unmatched: list[str] | None = None,
) -> CoverageReport:
    """Partition each model's eligible elements into matched / explicitly
    unmatched / unprocessed. Eligibility is frozen at Stage 2: it comes
    from the candidate set, not from live config."""
    from .nodes import ElementKind as EK

    eligible_kinds = frozenset(EK(k) for k in candidate_set.eligible_kinds)
    explicit = set(explicit_unmatched or [])
    accepted = [m for m in mappings if m.is_accepted]

    def side(ir: ModelIR, matched_uids: set) -> CoverageSide:
        eligible = {el.uid for el in ir.elements if el.kind in eligible_kinds}
        matched = eligible & matched_uids
        explicitly = (eligible & explicit) - matched
        unprocessed = eligible - matched - explicitly
        return CoverageSide(
            model_name=ir.model_name,
            total_eligible=len(eligible),
            matched=sorted(matched),
            explicitly_unmatched=sorted(explicitly),
            unprocessed=sorted(unprocessed),
        )

    return CoverageReport(
        source=side(source_ir, {m.candidate.source_uid for m in accepted}),
        target=side(target_ir, {m.candidate.target_uid for m in accepted}),
    )
