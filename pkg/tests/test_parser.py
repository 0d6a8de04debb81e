from __future__ import annotations

from sysml_align.diagnostics import Severity
from sysml_align.nodes import ElementKind, RelationKind
from sysml_align.parser import parse_model


def parse_ok(text: str):
    result = parse_model(text, "test.sysml")
    assert result.ok, [d.format() for d in result.diagnostics]
    return result.model


def errors_of(text: str):
    result = parse_model(text, "test.sysml")
    assert result.model is None
    return [d for d in result.diagnostics if d.severity is Severity.ERROR]


def test_minimal_package_part_def():
    model = parse_ok("package P { part def A; }")
    (part,) = model.root_package.children
    assert part.kind is ElementKind.PART_DEF
    assert part.qualified_name == "P::A"


def test_tagged_allocation_right_form():
    # right form: tag prefix, then both ends, ends as written
    model = parse_ok("package P { part a1; part b1; #FullyMatched allocation a1 to b1; }")
    alloc = model.root_package.children[2]
    assert alloc.kind is ElementKind.ALLOCATION_USAGE
    assert alloc.metadata_tags == ["FullyMatched"]
    assert alloc.first_target(RelationKind.ALLOCATED_FROM) == "a1"
    assert alloc.first_target(RelationKind.ALLOCATED_TO) == "b1"
    assert alloc.name is None


def test_named_allocation():
    model = parse_ok("package P { allocation m1 X::a to Y::b; }")
    alloc = model.root_package.children[0]
    assert alloc.name == "m1"
    assert alloc.first_target(RelationKind.ALLOCATED_FROM) == "X::a"
    assert alloc.first_target(RelationKind.ALLOCATED_TO) == "Y::b"


def test_nameless_definition_is_an_error_at_the_brace():
    errs = errors_of("package P { part def { } }")
    assert errs
    # the offending token is the '{' that appears where the name belongs
    assert errs[0].span is not None
    assert (errs[0].span.line, errs[0].span.col) == (1, 22)


def test_duplicate_sibling_names_rejected():
    errs = errors_of("package P { part def A; part A; }")
    assert any(e.code == "parse.duplicate-name" for e in errs)


def test_alias_counts_toward_sibling_namespace():
    errs = errors_of("package P { part def A; alias A for Q::B; }")
    assert any(e.code == "parse.duplicate-name" for e in errs)


def test_metadata_prefix_on_definition_rejected():
    errs = errors_of("package P { #Tag part def A; }")
    assert any(e.code == "parse.metadata-not-allowed" for e in errs)


def test_metadata_prefix_on_alias_rejected():
    errs = errors_of("package P { #Tag alias A for B; }")
    assert any(e.code == "parse.metadata-not-allowed" for e in errs)


def test_multiple_root_packages_rejected():
    errs = errors_of("package P { } package Q { }")
    assert any(e.code == "parse.multiple-roots" for e in errs)


def test_error_recovery_reports_multiple_diagnostics():
    errs = errors_of("package P { part def ; part def { } part ok; }")
    assert len(errs) >= 2


def test_dot_separator_normalized():
    model = parse_ok("package P { part x : Lib.Types.T; }")
    assert model.root_package.children[0].first_target(RelationKind.TYPED_BY) == "Lib::Types::T"


def test_directions_on_port_attribute_item():
    model = parse_ok("package P { in port p : T; out attribute a; inout item i; }")
    directions = [c.direction for c in model.root_package.children]
    assert directions == ["in", "out", "inout"]


def test_direction_on_part_rejected():
    errs = errors_of("package P { in part x; }")
    assert errs


def test_short_name_both_orders():
    model = parse_ok("package P { part def <tp> TemperatureProbe; part def Gauge <pg>; }")
    a, b = model.root_package.children
    assert (a.short_name, a.name) == ("tp", "TemperatureProbe")
    assert (b.short_name, b.name) == ("pg", "Gauge")


def test_heritage_lists():
    model = parse_ok("package P { part def A :> B, C :>> D subsets E; }")
    el = model.root_package.children[0]
    assert el.relation_targets(RelationKind.SPECIALIZES) == ["B", "C"]
    assert el.relation_targets(RelationKind.REDEFINES) == ["D"]
    assert el.relation_targets(RelationKind.SUBSETS) == ["E"]


def test_connection_forms():
    model = parse_ok("package P { connect a to b; connection c1 : CD connect x to y; }")
    bare, named = model.root_package.children
    assert bare.kind is ElementKind.CONNECTION_USAGE and bare.name is None
    assert named.name == "c1"
    assert named.first_target(RelationKind.TYPED_BY) == "CD"
    assert named.first_target(RelationKind.CONNECT_FROM) == "x"
    assert named.first_target(RelationKind.CONNECT_TO) == "y"


def test_import_visibility_default_private():
    model = parse_ok("package P { import Q::R; public import S::*; }")
    default, public = model.root_package.children
    assert default.visibility == "private" and not default.wildcard
    assert public.visibility == "public" and public.wildcard
    assert public.first_target(RelationKind.IMPORT_TARGET) == "S"


def test_doc_sets_owner_and_comment_is_a_child():
    model = parse_ok("package P { doc /* pkg doc */ comment about P /* note */ /* bare */ }")
    root = model.root_package
    assert root.doc == "pkg doc"
    named, bare = root.children
    assert named.first_target(RelationKind.COMMENT_ABOUT) == "P"
    assert named.text == "note"
    assert bare.kind is ElementKind.COMMENT and bare.text == "bare"


def test_two_docs_concatenate():
    model = parse_ok("package P { doc /* one */ doc /* two */ }")
    assert model.root_package.doc == "one\ntwo"


def test_block_text_normalization():
    model = parse_ok("package P { doc /*\n     * line one\n     * line two\n     */ }")
    assert model.root_package.doc == "line one\nline two"


def test_unterminated_block_comment():
    errs = errors_of("package P { doc /* never closed ")
    assert any(e.code == "lex.unterminated-block" for e in errs)


def test_unexpected_character():
    errs = errors_of("package P { part a @ ; }")
    assert any(e.code == "lex.unexpected-char" for e in errs)


def test_unnamed_elements_get_stable_synthetic_names():
    text = "package P { connect a to b; connect c to d; /* note */ }"
    model = parse_ok(text)
    names = [c.qualified_name for c in model.root_package.children]
    assert names == ["P::$connectionusage1", "P::$connectionusage2", "P::$comment1"]
    reparsed = parse_ok("package P {\n  connect a to b;\n\n  connect c to d;\n  /* note */\n}")
    assert [c.qualified_name for c in reparsed.root_package.children] == names


def test_source_digest_stability(corpus_texts):
    text = corpus_texts["oem_measurement_system.sysml"]
    a = parse_model(text, "a").expect()
    b = parse_model(text, "b").expect()
    assert a.source_digest == b.source_digest
    assert a.source_digest.startswith("sha256:")


def test_keywords_not_usable_as_names():
    errs = errors_of("package P { part def part; }")
    assert errs
