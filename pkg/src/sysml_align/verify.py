"""Stage 3: semantic admissibility checks, tag classification, conflicts,
and human verdicts for match candidates.

The end-kind rule is load-bearing: a tagged allocation may only relate
usages. Definition/definition pairs are routed to an alias binding instead,
and definition/usage pairs fail outright. The rule is enforced again by the
aligner (precondition) and the checker (diagnostic).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .diagnostics import DiagnosticError, error
from .ir import IRElement, ModelIR
from .library import ExtensionLibrary
from .matcher import MatchCandidate, kind_compatible
from .nodes import is_definition, is_usage
from .similarity import port_signature

CONSTRUCT_ALIAS = "AliasBinding"
CONSTRUCT_ALLOCATION = "TaggedAllocation"

VERDICT_PENDING = "Pending"
VERDICT_ACCEPTED = "Accepted"
VERDICT_REJECTED = "Rejected"
VERDICT_MODIFIED = "Modified"

TAG_FULLY_MATCHED = "FullyMatched"
TAG_REQUIRE_COMPLEMENT = "RequireComplement"
TAG_REQUIRE_MODIFICATION = "RequireModification"
TAG_FULLY_UNMATCHED = "FullyUnmatched"

PORT_RELATIONS = ("equal", "subset", "partial", "disjoint")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class VerifiedMapping:
    mapping_id: str
    candidate: MatchCandidate
    construct: str
    proposed_tag: str
    effective_tag: str
    port_relation: str
    checks: list[CheckResult]
    source_depth: int
    target_depth: int
    verdict_status: str = VERDICT_PENDING
    verdict_actor: str | None = None
    verdict_at: str | None = None
    verdict_note: str | None = None

    @property
    def all_checks_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def is_accepted(self) -> bool:
        return self.verdict_status in (VERDICT_ACCEPTED, VERDICT_MODIFIED)

    def to_dict(self) -> dict:
        return {
            "mapping_id": self.mapping_id,
            "candidate": self.candidate.to_dict(),
            "construct": self.construct,
            "proposed_tag": self.proposed_tag,
            "effective_tag": self.effective_tag,
            "port_relation": self.port_relation,
            "checks": [c.to_dict() for c in self.checks],
            "source_depth": self.source_depth,
            "target_depth": self.target_depth,
            "verdict": {
                "status": self.verdict_status,
                "actor": self.verdict_actor,
                "at": self.verdict_at,
                "note": self.verdict_note,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerifiedMapping":
        return cls(
            mapping_id=data["mapping_id"],
            candidate=MatchCandidate.from_dict(data["candidate"]),
            construct=data["construct"],
            proposed_tag=data["proposed_tag"],
            effective_tag=data["effective_tag"],
            port_relation=data["port_relation"],
            checks=[CheckResult(c["name"], c["passed"], c["detail"]) for c in data["checks"]],
            source_depth=data["source_depth"],
            target_depth=data["target_depth"],
            verdict_status=data["verdict"]["status"],
            verdict_actor=data["verdict"]["actor"],
            verdict_at=data["verdict"]["at"],
            verdict_note=data["verdict"]["note"],
        )


@dataclass
class ConflictReport:
    conflicts: list[dict] = field(default_factory=list)

    def of_kind(self, *kinds: str) -> list[dict]:
        return [c for c in self.conflicts if c["kind"] in kinds]

    def to_dict(self) -> dict:
        return {"conflicts": list(self.conflicts)}


def port_set_relation(a: frozenset, b: frozenset) -> tuple[str, str]:
    """Classify two port signatures into equal/subset/partial/disjoint.

    Both-empty counts as equal. Returns (relation, detail)."""
    if a == b:
        return "equal", "identical port signatures"
    if a and b < a:
        return "subset", "target ports are a strict subset of source ports"
    if b and a < b:
        return "subset", "source ports are a strict subset of target ports"
    if a & b:
        return "partial", "port signatures overlap partially"
    return "disjoint", "no shared port signature"


def classify_tag(kinds_compatible: bool, relation: str) -> str:
    """Total classification over the 4x2 (port relation x kind compat) grid.

    FullyUnmatched is never assigned here; it is reserved for explicit
    no-match records."""
    if not kinds_compatible:
        return TAG_REQUIRE_MODIFICATION
    if relation == "equal":
        return TAG_FULLY_MATCHED
    if relation == "subset":
        return TAG_REQUIRE_COMPLEMENT
    return TAG_REQUIRE_MODIFICATION


def _depth(qualified_name: str) -> int:
    return qualified_name.count("::")


def verify_candidate(
    candidate: MatchCandidate,
    source_ir: ModelIR,
    target_ir: ModelIR,
    library: ExtensionLibrary,
) -> VerifiedMapping:
    source = source_ir.by_uid().get(candidate.source_uid)
    target = target_ir.by_uid().get(candidate.target_uid)
    if source is None or target is None:
        missing = [u for u, el in ((candidate.source_uid, source), (candidate.target_uid, target)) if el is None]
        raise DiagnosticError(error("verify.unknown-uid", f"candidate references unknown uid {', '.join(missing)}"))

    checks: list[CheckResult] = []
    checks.append(CheckResult("uid_resolution", True, "both uids resolve in their IRs"))

    construct, end_check = _end_kind_check(source, target)
    checks.append(end_check)

    kinds_ok = kind_compatible(source.kind, target.kind)
    checks.append(
        CheckResult(
            "kind_compatibility",
            kinds_ok,
            f"{source.kind.value} vs {target.kind.value}"
            + ("" if kinds_ok else " are not compatible per the kind table"),
        )
    )

    relation, relation_detail = port_set_relation(port_signature(source.ports), port_signature(target.ports))
    proposed = classify_tag(kinds_ok, relation)
    in_library = library.has_tag(proposed)
    checks.append(
        CheckResult(
            "tag_in_library",
            in_library,
            f"'{proposed}' ({relation_detail})" + ("" if in_library else " is not defined by the loaded library"),
        )
    )

    return VerifiedMapping(
        mapping_id=f"{candidate.source_uid}-{candidate.target_uid}",
        candidate=candidate,
        construct=construct,
        proposed_tag=proposed,
        effective_tag=proposed,
        port_relation=relation,
        checks=checks,
        source_depth=_depth(candidate.source_name),
        target_depth=_depth(candidate.target_name),
    )


def _end_kind_check(source: IRElement, target: IRElement) -> tuple[str, CheckResult]:
    src_usage, tgt_usage = is_usage(source.kind), is_usage(target.kind)
    src_def, tgt_def = is_definition(source.kind), is_definition(target.kind)
    if src_usage and tgt_usage:
        return CONSTRUCT_ALLOCATION, CheckResult("end_kind", True, "both ends are usages; tagged allocation")
    if src_def and tgt_def:
        return CONSTRUCT_ALIAS, CheckResult("end_kind", True, "definition pair routed to alias binding")
    return (
        CONSTRUCT_ALLOCATION,
        CheckResult(
            "end_kind",
            False,
            f"allocation ends cannot be definitions ({source.kind.value} vs {target.kind.value})",
        ),
    )


def apply_verdict(
    mapping: VerifiedMapping,
    status: str,
    tag: str | None = None,
    actor: str = "User",
    note: str | None = None,
    timestamp: str = "",
    library: ExtensionLibrary | None = None,
) -> VerifiedMapping:
    """Record a human verdict. Accepting a mapping with failing checks is
    refused; Modified overrides the proposed tag and notes the override."""
    if status == VERDICT_PENDING:
        raise DiagnosticError(error("verify.verdict", "a verdict cannot be Pending"))
    if status not in (VERDICT_ACCEPTED, VERDICT_REJECTED, VERDICT_MODIFIED):
        raise DiagnosticError(error("verify.verdict", f"unknown verdict '{status}'"))

    if status in (VERDICT_ACCEPTED, VERDICT_MODIFIED) and not mapping.all_checks_pass:
        failing = ", ".join(c.name for c in mapping.checks if not c.passed)
        raise DiagnosticError(
            error("verify.refused", f"cannot accept mapping {mapping.mapping_id}: failing checks ({failing})")
        )

    effective = mapping.proposed_tag
    if status == VERDICT_MODIFIED:
        if tag is None:
            raise DiagnosticError(error("verify.verdict", "Modified verdict requires a tag"))
        if library is not None and not library.has_tag(tag):
            raise DiagnosticError(error("verify.unknown-tag", f"tag '{tag}' is not defined by the loaded library"))
        effective = tag
        note = f"user override: {mapping.proposed_tag} -> {tag}" + (f"; {note}" if note else "")

    return replace(
        mapping,
        effective_tag=effective,
        verdict_status=status,
        verdict_actor=actor,
        verdict_at=timestamp,
        verdict_note=note,
    )


def detect_conflicts(mappings: list[VerifiedMapping], depth_limit: int = 2) -> ConflictReport:
    """Structural conflicts among Pending/Accepted/Modified mappings."""
    active = [m for m in mappings if m.verdict_status in (VERDICT_PENDING, VERDICT_ACCEPTED, VERDICT_MODIFIED)]
    conflicts: list[dict] = []

    by_source: dict[str, list[VerifiedMapping]] = {}
    by_target: dict[str, list[VerifiedMapping]] = {}
    for m in active:
        by_source.setdefault(m.candidate.source_uid, []).append(m)
        by_target.setdefault(m.candidate.target_uid, []).append(m)

    for uid, group in sorted(by_source.items()):
        if len(group) >= 2:
            conflicts.append(
                {
                    "kind": "OneToMany",
                    "members": sorted(m.mapping_id for m in group),
                    "detail": f"source {uid} participates in {len(group)} mappings",
                }
            )
    for uid, group in sorted(by_target.items()):
        if len(group) >= 2:
            conflicts.append(
                {
                    "kind": "ManyToOne",
                    "members": sorted(m.mapping_id for m in group),
                    "detail": f"target {uid} participates in {len(group)} mappings",
                }
            )

    conflicts.extend(_alias_cycles(active))

    for m in active:
        if abs(m.source_depth - m.target_depth) > depth_limit:
            conflicts.append(
                {
                    "kind": "AbstractionMismatch",
                    "members": [m.mapping_id],
                    "detail": f"owner-chain depths differ by {abs(m.source_depth - m.target_depth)}"
                    f" (limit {depth_limit})",
                }
            )

    conflicts.sort(key=lambda c: (c["kind"], c["members"]))
    return ConflictReport(conflicts=conflicts)


def _alias_cycles(active: list[VerifiedMapping]) -> list[dict]:
    edges: dict[str, list[tuple[str, str]]] = {}
    for m in active:
        if m.construct == CONSTRUCT_ALIAS:
            edges.setdefault(m.candidate.source_uid, []).append((m.candidate.target_uid, m.mapping_id))

    conflicts: list[dict] = []
    seen_cycles: set[tuple[str, ...]] = set()

    def dfs(node: str, path: list[tuple[str, str]], on_path: set[str]) -> None:
        for nxt, mid in edges.get(node, ()):
            if nxt in on_path:
                members = tuple(sorted([m for _, m in path] + [mid]))
                if members not in seen_cycles:
                    seen_cycles.add(members)
                    conflicts.append(
                        {"kind": "CycleViaAlias", "members": list(members), "detail": "alias bindings form a cycle"}
                    )
                continue
            dfs(nxt, path + [(nxt, mid)], on_path | {nxt})

    for start in sorted(edges):
        dfs(start, [], {start})
    return conflicts
