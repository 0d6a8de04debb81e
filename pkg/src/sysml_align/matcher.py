"""Stage 2: propose confidence-scored match candidates between two model IRs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .diagnostics import DiagnosticError, error
from .ir import IRElement, ModelIR
from .nodes import ElementKind, is_definition, is_usage
from .similarity import context_similarity, name_similarity, port_similarity

FEATURE_NAMES = ("name", "kind", "ports", "context")

DEFAULT_WEIGHTS = {"name": 0.45, "kind": 0.20, "ports": 0.25, "context": 0.10}
DEFAULT_THRESHOLD = 0.55

#: Kinds considered for matching by default: usages, plus part/port defs for
#: alias suggestions. Package shells are never aligned.
DEFAULT_ELIGIBLE_KINDS = frozenset(
    {
        ElementKind.PART_USAGE,
        ElementKind.PORT_USAGE,
        ElementKind.ATTRIBUTE_USAGE,
        ElementKind.ITEM_USAGE,
        ElementKind.REQUIREMENT_USAGE,
        ElementKind.CONNECTION_USAGE,
        ElementKind.ALLOCATION_USAGE,
        ElementKind.PART_DEF,
        ElementKind.PORT_DEF,
    }
)

_FAMILY = {
    ElementKind.PACKAGE: "package",
    ElementKind.PART_DEF: "part",
    ElementKind.PART_USAGE: "part",
    ElementKind.PORT_DEF: "port",
    ElementKind.PORT_USAGE: "port",
    ElementKind.ATTRIBUTE_DEF: "attribute",
    ElementKind.ATTRIBUTE_USAGE: "attribute",
    ElementKind.ITEM_DEF: "item",
    ElementKind.ITEM_USAGE: "item",
    ElementKind.REQUIREMENT_DEF: "requirement",
    ElementKind.REQUIREMENT_USAGE: "requirement",
    ElementKind.INTERFACE_DEF: "interface",
    ElementKind.CONNECTION_USAGE: "connection",
    ElementKind.ALLOCATION_USAGE: "allocation",
    ElementKind.METADATA_DEF: "metadata",
    ElementKind.ALIAS: "alias",
    ElementKind.IMPORT: "import",
    ElementKind.COMMENT: "comment",
}


def kind_compatible(a: ElementKind, b: ElementKind) -> bool:
    """Same family on the same def/usage side (part<->part, port<->port, ...;
    def<->def pairs are compatible only with each other: the alias route)."""
    return _FAMILY[a] == _FAMILY[b] and is_definition(a) == is_definition(b) and is_usage(a) == is_usage(b)


@dataclass(frozen=True)
class MatchConfig:
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    threshold: float = DEFAULT_THRESHOLD
    eligible_kinds: frozenset = DEFAULT_ELIGIBLE_KINDS

    def validate(self) -> None:
        if set(self.weights) != set(FEATURE_NAMES):
            raise DiagnosticError(error("match.config", f"weights must name exactly {sorted(FEATURE_NAMES)}"))
        if any(w < 0 for w in self.weights.values()):
            raise DiagnosticError(error("match.config", "weights must be non-negative"))
        if abs(sum(self.weights.values()) - 1.0) > 1e-9:
            raise DiagnosticError(error("match.config", "weights must sum to 1"))
        if not 0.0 <= self.threshold <= 1.0:
            raise DiagnosticError(error("match.config", "threshold must lie in [0, 1]"))

    def to_dict(self) -> dict:
        return {
            "weights": dict(sorted(self.weights.items())),
            "threshold": self.threshold,
            "eligible_kinds": sorted(k.value for k in self.eligible_kinds),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MatchConfig":
        cfg = cls(
            weights=dict(data["weights"]),
            threshold=data["threshold"],
            eligible_kinds=frozenset(ElementKind(k) for k in data["eligible_kinds"]),
        )
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class MatchCandidate:
    source_uid: str
    target_uid: str
    source_name: str  # qualified
    target_name: str  # qualified
    confidence: float
    rationale: str
    features: dict
    origin: str  # Heuristic | Provider

    def key(self) -> tuple[str, str]:
        return (self.source_uid, self.target_uid)

    def to_dict(self) -> dict:
        return {
            "source_uid": self.source_uid,
            "target_uid": self.target_uid,
            "source_name": self.source_name,
            "target_name": self.target_name,
            "confidence": self.confidence,
            "rationale": self.rationale,
            "features": dict(sorted(self.features.items())),
            "origin": self.origin,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MatchCandidate":
        return cls(
            source_uid=data["source_uid"],
            target_uid=data["target_uid"],
            source_name=data["source_name"],
            target_name=data["target_name"],
            confidence=data["confidence"],
            rationale=data["rationale"],
            features=dict(data["features"]),
            origin=data["origin"],
        )


def candidate_sort_key(c: MatchCandidate) -> tuple:
    return (-c.confidence, c.source_name, c.target_name)


@dataclass
class CandidateSet:
    source_model: str
    source_digest: str
    target_model: str
    target_digest: str
    eligible_kinds: list[str]
    candidates: list[MatchCandidate]
    unmatched_source: list[str]
    unmatched_target: list[str]
    focus: str | None = None

    def to_dict(self) -> dict:
        return {
            "source_model": self.source_model,
            "source_digest": self.source_digest,
            "target_model": self.target_model,
            "target_digest": self.target_digest,
            "eligible_kinds": list(self.eligible_kinds),
            "candidates": [c.to_dict() for c in self.candidates],
            "unmatched_source": list(self.unmatched_source),
            "unmatched_target": list(self.unmatched_target),
            "focus": self.focus,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CandidateSet":
        return cls(
            source_model=data["source_model"],
            source_digest=data["source_digest"],
            target_model=data["target_model"],
            target_digest=data["target_digest"],
            eligible_kinds=list(data["eligible_kinds"]),
            candidates=[MatchCandidate.from_dict(c) for c in data["candidates"]],
            unmatched_source=list(data["unmatched_source"]),
            unmatched_target=list(data["unmatched_target"]),
            focus=data.get("focus"),
        )


def is_alignable(el: IRElement, config: MatchConfig) -> bool:
    """Eligible kind and referencable: unnamed elements (synthetic '$...'
    path segments) cannot be named by an alias or allocation end."""
    return el.kind in config.eligible_kinds and not el.local_name.startswith("$")


def eligible_elements(ir: ModelIR, config: MatchConfig) -> list[IRElement]:
    return [el for el in ir.elements if is_alignable(el, config)]


def _name_text(el: IRElement) -> str:
    return f"{el.local_name} {el.doc}" if el.doc else el.local_name


def score_pair(source: IRElement, target: IRElement, config: MatchConfig) -> tuple[float, dict]:
    features = {
        "name": round(name_similarity(_name_text(source), _name_text(target)), 4),
        "kind": 1.0 if kind_compatible(source.kind, target.kind) else 0.0,
        "ports": round(port_similarity(source.ports, target.ports), 4),
        "context": round(context_similarity(source.qualified_name, target.qualified_name), 4),
    }
    confidence = round(sum(config.weights[f] * features[f] for f in FEATURE_NAMES), 4)
    return confidence, features


def _rationale(features: dict) -> str:
    return "similarity " + " ".join(f"{f}={features[f]:.2f}" for f in FEATURE_NAMES)


def propose_heuristic(source_ir: ModelIR, target_ir: ModelIR, config: MatchConfig | None = None) -> CandidateSet:
    """Score every eligible source/target pair; pairs at or above the
    threshold become candidates. Pure and deterministic."""
    config = config or MatchConfig()
    config.validate()

    sources = eligible_elements(source_ir, config)
    targets = eligible_elements(target_ir, config)

    candidates: list[MatchCandidate] = []
    for src in sources:
        for tgt in targets:
            confidence, features = score_pair(src, tgt, config)
            if confidence >= config.threshold:
                candidates.append(
                    MatchCandidate(
                        source_uid=src.uid,
                        target_uid=tgt.uid,
                        source_name=src.qualified_name,
                        target_name=tgt.qualified_name,
                        confidence=confidence,
                        rationale=_rationale(features),
                        features=features,
                        origin="Heuristic",
                    )
                )
    candidates.sort(key=candidate_sort_key)

    matched_sources = {c.source_uid for c in candidates}
    matched_targets = {c.target_uid for c in candidates}
    return CandidateSet(
        source_model=source_ir.model_name,
        source_digest=source_ir.source_digest,
        target_model=target_ir.model_name,
        target_digest=target_ir.source_digest,
        eligible_kinds=sorted(k.value for k in config.eligible_kinds),
        candidates=candidates,
        unmatched_source=sorted(el.uid for el in sources if el.uid not in matched_sources),
        unmatched_target=sorted(el.uid for el in targets if el.uid not in matched_targets),
    )


def merge_candidate_sets(a: CandidateSet, b: CandidateSet) -> CandidateSet:
    """Union keyed by (source, target); on conflict keep the higher
    confidence and concatenate rationales tagged by origin."""
    if (a.source_digest, a.target_digest) != (b.source_digest, b.target_digest):
        raise DiagnosticError(error("match.mismatched-models", "candidate sets come from different model digests"))
    if a.eligible_kinds != b.eligible_kinds:
        raise DiagnosticError(error("match.mismatched-models", "candidate sets use different eligible kind sets"))

    merged: dict[tuple[str, str], MatchCandidate] = {c.key(): c for c in a.candidates}
    for cand in b.candidates:
        existing = merged.get(cand.key())
        if existing is None:
            merged[cand.key()] = cand
            continue
        ordered = sorted([existing, cand], key=lambda c: (c.origin != "Heuristic", c.origin))
        rationale = "; ".join(f"[{c.origin}] {c.rationale}" for c in ordered)
        keep = max(existing, cand, key=lambda c: (c.confidence, c.origin == "Heuristic"))
        merged[cand.key()] = replace(keep, rationale=rationale)

    candidates = sorted(merged.values(), key=candidate_sort_key)
    universe_source = set(a.unmatched_source) | {c.source_uid for c in a.candidates}
    universe_source |= set(b.unmatched_source) | {c.source_uid for c in b.candidates}
    universe_target = set(a.unmatched_target) | {c.target_uid for c in a.candidates}
    universe_target |= set(b.unmatched_target) | {c.target_uid for c in b.candidates}
    matched_sources = {c.source_uid for c in candidates}
    matched_targets = {c.target_uid for c in candidates}

    return CandidateSet(
        source_model=a.source_model,
        source_digest=a.source_digest,
        target_model=a.target_model,
        target_digest=a.target_digest,
        eligible_kinds=list(a.eligible_kinds),
        candidates=candidates,
        unmatched_source=sorted(universe_source - matched_sources),
        unmatched_target=sorted(universe_target - matched_targets),
        focus=a.focus if a.focus is not None else b.focus,
    )
