from __future__ import annotations

import random

import pytest

from sysml_align.diagnostics import DiagnosticError
from sysml_align.ir import extract_ir
from sysml_align.matcher import MatchCandidate
from sysml_align.parser import parse_model
from sysml_align.verify import (
    CONSTRUCT_ALIAS,
    CONSTRUCT_ALLOCATION,
    VERDICT_ACCEPTED,
    VERDICT_MODIFIED,
    VERDICT_REJECTED,
    VerifiedMapping,
    apply_verdict,
    classify_tag,
    detect_conflicts,
    port_set_relation,
    verify_candidate,
)


def ir_of(text: str, name: str):
    return extract_ir(parse_model(text, name).expect())[0]


def candidate_for(source_ir, target_ir, source_q, target_q, confidence=0.9):
    s = next(e for e in source_ir.elements if e.qualified_name == source_q)
    t = next(e for e in target_ir.elements if e.qualified_name == target_q)
    return MatchCandidate(
        source_uid=s.uid, target_uid=t.uid, source_name=s.qualified_name, target_name=t.qualified_name,
        confidence=confidence, rationale="test", features={}, origin="Heuristic",
    )


@pytest.fixture(scope="module")
def defs_and_usages(bundled_library):
    a = ir_of("package A { part def D1 { port p : T; } part u1 { port p : T; } part u2; }", "a.sysml")
    b = ir_of("package B { part def D2 { port p : T; } part v1 { port p : T; } part v2; }", "b.sysml")
    return a, b


def test_def_def_routed_to_alias(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::D1", "B::D2"), a, b, bundled_library)
    assert vm.construct == CONSTRUCT_ALIAS
    assert vm.all_checks_pass
    end = next(c for c in vm.checks if c.name == "end_kind")
    assert end.passed and "alias" in end.detail


def test_usage_usage_is_tagged_allocation(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::u1", "B::v1"), a, b, bundled_library)
    assert vm.construct == CONSTRUCT_ALLOCATION
    assert vm.all_checks_pass
    assert vm.proposed_tag == "FullyMatched"


def test_def_usage_fails_end_kind(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::D1", "B::v1"), a, b, bundled_library)
    end = next(c for c in vm.checks if c.name == "end_kind")
    assert not end.passed
    assert "cannot be definitions" in end.detail
    assert not vm.all_checks_pass


def test_identical_usages_fully_matched(corpus_texts, bundled_library):
    a = ir_of(corpus_texts["oem_measurement_system.sysml"], "a.sysml")
    b = ir_of(corpus_texts["oem_measurement_system.sysml"], "b.sysml")
    q = "OEMMeasurementSystem::Structure::measurementSystem::temperatureSensor"
    vm = verify_candidate(candidate_for(a, b, q, q), a, b, bundled_library)
    assert vm.proposed_tag == "FullyMatched"
    assert vm.port_relation == "equal"


def test_unknown_uid_raises(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    cand = candidate_for(a, b, "A::u1", "B::v1")
    broken = MatchCandidate(**{**cand.to_dict(), "source_uid": "nope"})
    with pytest.raises(DiagnosticError):
        verify_candidate(broken, a, b, bundled_library)


# --- classification grid -----------------------------------------------------

PORT_CASES = {
    "equal": ("package A { part x { port p : T; } }", "package B { part y { port p : T; } }"),
    "subset": ("package A { part x { port p : T; port q : T; } }", "package B { part y { port p : T; } }"),
    "partial": (
        "package A { part x { port p : T; port q : T; } }",
        "package B { part y { port p : T; port r : T; } }",
    ),
    "disjoint": ("package A { part x { port p : T; } }", "package B { part y { port r : T; } }"),
}

EXPECTED_TAG = {
    ("equal", True): "FullyMatched",
    ("subset", True): "RequireComplement",
    ("partial", True): "RequireModification",
    ("disjoint", True): "RequireModification",
    ("equal", False): "RequireModification",
    ("subset", False): "RequireModification",
    ("partial", False): "RequireModification",
    ("disjoint", False): "RequireModification",
}


@pytest.mark.parametrize("relation", list(PORT_CASES))
@pytest.mark.parametrize("kinds_ok", [True, False])
def test_classification_grid_total(relation, kinds_ok, bundled_library):
    src_text, tgt_text = PORT_CASES[relation]
    if not kinds_ok:
        tgt_text = tgt_text.replace("part y", "requirement y")  # same ports, incompatible kind
    a = ir_of(src_text, "a.sysml")
    b = ir_of(tgt_text, "b.sysml")
    vm = verify_candidate(candidate_for(a, b, "A::x", "B::y"), a, b, bundled_library)
    assert vm.port_relation == relation
    kind_check = next(c for c in vm.checks if c.name == "kind_compatibility")
    assert kind_check.passed is kinds_ok
    assert vm.proposed_tag == EXPECTED_TAG[(relation, kinds_ok)]
    assert vm.proposed_tag in bundled_library.tags


def test_classify_tag_never_emits_fully_unmatched():
    for kinds_ok in (True, False):
        for relation in ("equal", "subset", "partial", "disjoint"):
            assert classify_tag(kinds_ok, relation) != "FullyUnmatched"


def test_port_set_relation_cases():
    e = frozenset()
    p1 = frozenset({("a", "t")})
    p2 = frozenset({("a", "t"), ("b", "t")})
    p3 = frozenset({("a", "t"), ("c", "t")})
    assert port_set_relation(e, e)[0] == "equal"
    assert port_set_relation(p2, p1)[0] == "subset"
    assert port_set_relation(p1, p2)[0] == "subset"
    assert port_set_relation(e, p1)[0] == "subset"
    assert port_set_relation(p2, p3)[0] == "partial"
    assert port_set_relation(p1, frozenset({("z", "t")}))[0] == "disjoint"


# --- verdicts ---------------------------------------------------------------


def test_accept_all_pass(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::u1", "B::v1"), a, b, bundled_library)
    out = apply_verdict(vm, VERDICT_ACCEPTED, timestamp="t1")
    assert out.verdict_status == VERDICT_ACCEPTED
    assert out.verdict_at == "t1" and out.verdict_actor == "User"


def test_accept_refused_on_failed_end_kind(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::D1", "B::v1"), a, b, bundled_library)
    with pytest.raises(DiagnosticError) as exc:
        apply_verdict(vm, VERDICT_ACCEPTED, timestamp="t1")
    assert exc.value.diagnostics[0].code == "verify.refused"
    assert "end_kind" in exc.value.diagnostics[0].message


def test_modified_overrides_tag(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::u1", "B::v1"), a, b, bundled_library)
    out = apply_verdict(vm, VERDICT_MODIFIED, tag="RequireModification", timestamp="t", library=bundled_library)
    assert out.effective_tag == "RequireModification"
    assert out.proposed_tag == "FullyMatched"
    assert "user override" in out.verdict_note


def test_modified_requires_known_tag(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::u1", "B::v1"), a, b, bundled_library)
    with pytest.raises(DiagnosticError) as exc:
        apply_verdict(vm, VERDICT_MODIFIED, tag="NotATag", timestamp="t", library=bundled_library)
    assert exc.value.diagnostics[0].code == "verify.unknown-tag"


def test_pending_not_a_verdict(defs_and_usages, bundled_library):
    a, b = defs_and_usages
    vm = verify_candidate(candidate_for(a, b, "A::u1", "B::v1"), a, b, bundled_library)
    with pytest.raises(DiagnosticError):
        apply_verdict(vm, "Pending")


# --- conflicts ---------------------------------------------------------------


def _mapping(mid, s, t, construct=CONSTRUCT_ALLOCATION, status="Pending", sd=2, td=2):
    cand = MatchCandidate(
        source_uid=s, target_uid=t, source_name=f"S::{s}", target_name=f"T::{t}",
        confidence=0.8, rationale="r", features={}, origin="Heuristic",
    )
    return VerifiedMapping(
        mapping_id=mid, candidate=cand, construct=construct, proposed_tag="FullyMatched",
        effective_tag="FullyMatched", port_relation="equal", checks=[], source_depth=sd, target_depth=td,
        verdict_status=status,
    )


def test_shared_source_is_one_to_many():
    report = detect_conflicts([_mapping("m1", "a", "x"), _mapping("m2", "a", "y")])
    kinds = [c["kind"] for c in report.conflicts]
    assert kinds == ["OneToMany"]
    assert report.conflicts[0]["members"] == ["m1", "m2"]


def test_shared_target_is_many_to_one():
    report = detect_conflicts([_mapping("m1", "a", "x"), _mapping("m2", "b", "x")])
    assert [c["kind"] for c in report.conflicts] == ["ManyToOne"]


def test_empty_set_empty_report():
    assert detect_conflicts([]).conflicts == []


def test_rejected_mappings_do_not_conflict():
    report = detect_conflicts([_mapping("m1", "a", "x"), _mapping("m2", "a", "y", status=VERDICT_REJECTED)])
    assert report.conflicts == []


def test_abstraction_mismatch_depth_limit():
    report = detect_conflicts([_mapping("m1", "a", "x", sd=1, td=5)], depth_limit=2)
    assert [c["kind"] for c in report.conflicts] == ["AbstractionMismatch"]
    assert detect_conflicts([_mapping("m1", "a", "x", sd=1, td=3)], depth_limit=2).conflicts == []


def test_alias_cycle_detected():
    report = detect_conflicts(
        [_mapping("m1", "a", "b", construct=CONSTRUCT_ALIAS), _mapping("m2", "b", "a", construct=CONSTRUCT_ALIAS)]
    )
    assert any(c["kind"] == "CycleViaAlias" for c in report.conflicts)


def test_conflicts_equal_brute_force_oracle():
    rng = random.Random(7)
    uids = [f"u{i}" for i in range(6)]
    for _ in range(100):
        mappings = []
        for i in range(rng.randint(0, 10)):
            mappings.append(
                _mapping(
                    f"m{i}",
                    rng.choice(uids),
                    rng.choice(uids),
                    status=rng.choice(("Pending", "Accepted", "Rejected", "Modified")),
                    sd=rng.randint(0, 5),
                    td=rng.randint(0, 5),
                )
            )
        report = detect_conflicts(mappings, depth_limit=2)

        active = [m for m in mappings if m.verdict_status in ("Pending", "Accepted", "Modified")]
        expected = []
        # quadratic scan over sources and targets
        for uid in sorted({m.candidate.source_uid for m in active}):
            group = sorted(m.mapping_id for m in active if m.candidate.source_uid == uid)
            if len(group) >= 2:
                expected.append(("OneToMany", tuple(group)))
        for uid in sorted({m.candidate.target_uid for m in active}):
            group = sorted(m.mapping_id for m in active if m.candidate.target_uid == uid)
            if len(group) >= 2:
                expected.append(("ManyToOne", tuple(group)))
        for m in active:
            if abs(m.source_depth - m.target_depth) > 2:
                expected.append(("AbstractionMismatch", (m.mapping_id,)))

        got = [(c["kind"], tuple(c["members"])) for c in report.conflicts if c["kind"] != "CycleViaAlias"]
        assert sorted(got) == sorted(expected)
