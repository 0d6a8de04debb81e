"""Ground-truth corpus generator for matcher quality evaluation.

Builds a source model and a transformed target model in parallel, recording
the true correspondence element-by-element as it constructs them. Three
transformation tiers:

1. rename-only: camelCase/snake_case flips and token permutations
   (token multisets preserved; port signatures normalize to the same sets)
2. rename + restructure: counterparts move to differently-named packages
   and a share of elements get harder renames (token dropped or added)
3. rename + port perturbation: tier 2 plus added/removed ports

The greedy one-to-one assignment over the candidate list (the same rule the
session's auto-verdict uses) is the evaluated "recovered mapping".
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from sysml_align.ir import extract_ir
from sysml_align.matcher import CandidateSet, MatchConfig, propose_heuristic
from sysml_align.nodes import Element, ElementKind, Model, Relation, RelationKind, assign_qualified_names
from sysml_align.parser import parse_model
from sysml_align.render import render_model

_GROUP_WORDS = (("sensing", "frontend"), ("control", "logic"), ("logging", "archive"), ("power", "supply"))

_PART_TOKENS = (
    ("flow", "meter"), ("pressure", "gauge"), ("temperature", "probe"), ("level", "switch"),
    ("speed", "encoder"), ("torque", "limiter"), ("voltage", "monitor"), ("current", "shunt"),
    ("humidity", "sensor"), ("vibration", "pickup"), ("position", "resolver"), ("density", "meter"),
    ("clock", "source"), ("pulse", "counter"), ("charge", "balancer"), ("thermal", "fuse"),
)

_PORT_TYPE_TOKENS = (("data", "out"), ("status", "out"), ("config", "in"), ("sync", "in"), ("power", "in"))


@dataclass
class CorpusPair:
    source: Model
    target: Model
    truth: dict[str, str] = field(default_factory=dict)  # source qname -> target qname


def _camel(tokens: list[str]) -> str:
    return tokens[0] + "".join(t.capitalize() for t in tokens[1:])


def _snake(tokens: list[str]) -> str:
    return "_".join(tokens)


def _style(rng: random.Random, tokens: list[str]) -> str:
    return _camel(tokens) if rng.random() < 0.5 else _snake(tokens)


def _rename(rng: random.Random, tokens: list[str], hard: bool) -> list[str]:
    out = list(tokens)
    rng.shuffle(out)
    if hard:
        if rng.random() < 0.5 and len(out) > 1:
            out = out[:-1]  # drop a token
        else:
            out = out + [rng.choice(("unit", "module", "assembly"))]
    return out


def build_pair(seed: int, tier: int, groups: int = 4, parts_per_group: int = 4) -> CorpusPair:
    """Deterministic source/target pair with exact ground truth for a tier."""
    rng = random.Random(seed * 10 + tier)
    part_pool = list(_PART_TOKENS)
    rng.shuffle(part_pool)

    src_root = Element(ElementKind.PACKAGE, name="SourceSystem")
    tgt_root = Element(ElementKind.PACKAGE, name="TargetSystem")
    pairs: list[tuple[Element, Element]] = []  # recorded at construction time

    src_iface = Element(ElementKind.PACKAGE, name="SourcePorts")
    tgt_iface = Element(ElementKind.PACKAGE, name="TargetPorts")
    src_root.children.append(src_iface)
    tgt_root.children.append(tgt_iface)
    for type_tokens in _PORT_TYPE_TOKENS:
        src_iface.children.append(Element(ElementKind.PORT_DEF, name=_camel(list(type_tokens)) + "Port"))
        tgt_iface.children.append(Element(ElementKind.PORT_DEF, name=_style(rng, list(type_tokens)) + "_port"))

    src_groups: list[Element] = []
    tgt_groups: list[Element] = []
    for g in range(groups):
        src_group = Element(ElementKind.PACKAGE, name=_camel(list(_GROUP_WORDS[g % len(_GROUP_WORDS)])))
        # tier >= 2: target group names share no tokens with source group names
        tgt_name = (
            _style(rng, [f"segment{g}", "block"]) if tier >= 2 else _snake(list(_GROUP_WORDS[g % len(_GROUP_WORDS)]))
        )
        tgt_group = Element(ElementKind.PACKAGE, name=tgt_name)
        src_root.children.append(src_group)
        tgt_root.children.append(tgt_group)
        src_groups.append(src_group)
        tgt_groups.append(tgt_group)

    part_index = 0
    for g, src_group in enumerate(src_groups):
        for _ in range(parts_per_group):
            tokens = list(part_pool[part_index % len(part_pool)])
            if part_index >= len(part_pool):
                tokens = tokens + [f"v{part_index // len(part_pool) + 1}"]
            part_index += 1

            hard = tier >= 2 and rng.random() < 0.25
            src_part = Element(ElementKind.PART_USAGE, name=_camel(tokens))
            tgt_part = Element(ElementKind.PART_USAGE, name=_style(rng, _rename(rng, tokens, hard)))
            pairs.append((src_part, tgt_part))

            n_ports = rng.randint(1, 3)
            for t in rng.sample(range(len(_PORT_TYPE_TOKENS)), n_ports):
                port_tokens = list(_PORT_TYPE_TOKENS[t]) + [tokens[0]]
                src_port = Element(ElementKind.PORT_USAGE, name=_camel(port_tokens))
                src_port.relations.append(
                    Relation(RelationKind.TYPED_BY, f"SourcePorts::{_camel(list(_PORT_TYPE_TOKENS[t]))}Port")
                )
                tgt_port = Element(ElementKind.PORT_USAGE, name=_snake(port_tokens))
                tgt_port.relations.append(
                    Relation(RelationKind.TYPED_BY, f"TargetPorts::{_style(rng, list(_PORT_TYPE_TOKENS[t]))}_port")
                )
                src_part.children.append(src_port)
                tgt_part.children.append(tgt_port)
                pairs.append((src_port, tgt_port))

            attr_tokens = [tokens[0], "rating"]
            src_attr = Element(ElementKind.ATTRIBUTE_USAGE, name=_camel(attr_tokens))
            tgt_attr = Element(ElementKind.ATTRIBUTE_USAGE, name=_snake(attr_tokens))
            src_part.children.append(src_attr)
            tgt_part.children.append(tgt_attr)
            pairs.append((src_attr, tgt_attr))

            src_group.children.append(src_part)
            tgt_group_index = g
            if tier >= 2 and rng.random() < 0.4:
                tgt_group_index = rng.randrange(groups)  # restructure: move the counterpart
            tgt_groups[tgt_group_index].children.append(tgt_part)

            if tier >= 3:
                _perturb_ports(rng, tgt_part)

    assign_qualified_names(src_root)
    assign_qualified_names(tgt_root)

    # perturbation may have removed a recorded element; it then has no
    # qualified name (assignment never reached it)
    truth = {
        src.qualified_name: tgt.qualified_name
        for src, tgt in pairs
        if src.qualified_name and tgt.qualified_name
    }

    source = _materialize(src_root, "source.sysml")
    target = _materialize(tgt_root, "target.sysml")
    return CorpusPair(source=source, target=target, truth=truth)


def _perturb_ports(rng: random.Random, part: Element) -> None:
    ports = [c for c in part.children if c.kind is ElementKind.PORT_USAGE]
    if ports and rng.random() < 0.5:
        part.children.remove(rng.choice(ports))
    if rng.random() < 0.5:
        extra = Element(ElementKind.PORT_USAGE, name=f"aux_{rng.randrange(100)}")
        extra.relations.append(Relation(RelationKind.TYPED_BY, "TargetPorts::aux_port"))
        part.children.append(extra)


def _materialize(root: Element, name: str) -> Model:
    # render + reparse so the pair goes through the full text pipeline
    text = render_model(Model(root_package=root, source_name=name, source_digest=""))
    return parse_model(text, name).expect()


def greedy_assignment(candidate_set: CandidateSet) -> list[tuple[str, str]]:
    """Best one-to-one assignment in candidate order (uids)."""
    used_s: set[str] = set()
    used_t: set[str] = set()
    chosen: list[tuple[str, str]] = []
    for c in candidate_set.candidates:
        if c.source_uid in used_s or c.target_uid in used_t:
            continue
        used_s.add(c.source_uid)
        used_t.add(c.target_uid)
        chosen.append((c.source_uid, c.target_uid))
    return chosen


def evaluate_tier(seed: int, tier: int, config: MatchConfig | None = None) -> dict:
    pair = build_pair(seed, tier)
    source_ir, _ = extract_ir(pair.source)
    target_ir, _ = extract_ir(pair.target)
    candidate_set = propose_heuristic(source_ir, target_ir, config or MatchConfig())

    src_uid = {el.qualified_name: el.uid for el in source_ir.elements}
    tgt_uid = {el.qualified_name: el.uid for el in target_ir.elements}
    truth_pairs = {(src_uid[s], tgt_uid[t]) for s, t in pair.truth.items()}

    recovered = set(greedy_assignment(candidate_set))
    true_positives = len(recovered & truth_pairs)
    precision = true_positives / len(recovered) if recovered else 0.0
    recall = true_positives / len(truth_pairs) if truth_pairs else 0.0
    return {
        "tier": tier,
        "truth": len(truth_pairs),
        "recovered": len(recovered),
        "true_positives": true_positives,
        "precision": precision,
        "recall": recall,
    }
