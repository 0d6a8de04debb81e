from __future__ import annotations

import pytest

from sysml_align.diagnostics import DiagnosticError
from sysml_align.library import load_bundled_library, load_extension_library


def test_bundled_library_has_exactly_the_four_tags():
    lib = load_bundled_library()
    assert lib.tags == ["FullyMatched", "RequireComplement", "RequireModification", "FullyUnmatched"]
    assert lib.package_name == "AlignmentExtensions"
    assert lib.base == "MatchResult"


def test_single_custom_tag():
    lib = load_extension_library("package Ext { metadata def Custom; }")
    assert lib.tags == ["Custom"]
    assert lib.base is None


def test_plain_part_package_is_empty_library():
    with pytest.raises(DiagnosticError) as exc:
        load_extension_library("package NoTags { part def A; part a : A; }")
    assert exc.value.diagnostics[0].code == "library.empty"


def test_parse_failure_propagates():
    with pytest.raises(DiagnosticError):
        load_extension_library("package Broken { metadata def ; }")


def test_base_detection_excludes_supertype_from_tags(corpus_texts):
    lib = load_extension_library(corpus_texts["custom_tags_library.sysml"])
    assert lib.tags == ["ApprovedMatch", "DisputedMatch"]
    assert lib.base == "ReviewOutcome"


def test_has_tag_accepts_qualified_names():
    lib = load_bundled_library()
    assert lib.has_tag("FullyMatched")
    assert lib.has_tag("AlignmentExtensions::FullyMatched")
    assert not lib.has_tag("MatchResult")
