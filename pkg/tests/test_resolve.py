from __future__ import annotations

import pytest

from sysml_align.nodes import ElementKind
from sysml_align.parser import parse_model
from sysml_align.resolve import Resolver, ResolveError, resolve


def model_of(text: str, name: str = "m.sysml"):
    return parse_model(text, name).expect()


def test_resolve_minimal():
    m = model_of("package P { part def A; }")
    el = resolve([m], "P::A")
    assert el.kind is ElementKind.PART_DEF
    assert el.qualified_name == "P::A"


def test_not_found():
    m = model_of("package P { part def A; }")
    with pytest.raises(ResolveError) as exc:
        resolve([m], "P::Missing")
    assert exc.value.diagnostics[0].code == "resolve.not-found"


def test_private_import_not_visible_from_outside():
    lib = model_of("package Lib { part def Thing; }", "lib.sysml")
    private = model_of("package UsesPrivate { private import Lib::Thing; }", "p.sysml")
    public = model_of("package UsesPublic { public import Lib::Thing; }", "q.sysml")

    with pytest.raises(ResolveError):
        resolve([lib, private], "UsesPrivate::Thing")
    el = resolve([lib, public], "UsesPublic::Thing")
    assert el.qualified_name == "Lib::Thing"


def test_public_wildcard_import_exposes_children():
    lib = model_of("package Lib { part def A; part def B; }", "lib.sysml")
    hub = model_of("package Hub { public import Lib::*; }", "hub.sysml")
    assert resolve([lib, hub], "Hub::A").qualified_name == "Lib::A"
    assert resolve([lib, hub], "Hub::B").qualified_name == "Lib::B"


def test_private_wildcard_visible_inside_only():
    lib = model_of("package Lib { part def A; }", "lib.sysml")
    hub = model_of("package Hub { private import Lib::*; part user : A; }", "hub.sysml")
    resolver = Resolver([lib, hub])
    scope = resolver.resolve("Hub::user")
    # reference written inside Hub sees the private import
    assert resolver.resolve_from(scope, "A").qualified_name == "Lib::A"
    with pytest.raises(ResolveError):
        resolver.resolve("Hub::A")


def test_ambiguous_across_models_reports_both():
    a = model_of("package Shared { part def X; }", "a.sysml")
    b = model_of("package Shared { part def X; }", "b.sysml")
    with pytest.raises(ResolveError) as exc:
        resolve([a, b], "Shared::X")
    diag = exc.value.diagnostics[0]
    assert diag.code == "resolve.ambiguous"
    assert "a.sysml" in diag.message and "b.sysml" in diag.message


def test_alias_resolves_to_target():
    m = model_of("package P { part def A; alias theA for P::A; }")
    assert resolve([m], "P::theA").qualified_name == "P::A"


def test_alias_chain_and_cycle():
    m = model_of("package P { part def A; alias one for P::two; alias two for P::one; alias ok for P::A; }")
    resolver = Resolver([m])
    assert resolver.resolve("P::ok").qualified_name == "P::A"
    el, diag = resolver.try_resolve("P::one")
    assert el is None and diag.code == "resolve.alias-cycle"


def test_scoped_resolution_walks_outward():
    m = model_of(
        "package Root { part def Shared; package Inner { part user : Shared; part def Local; part l : Local; } }"
    )
    resolver = Resolver([m])
    inner_user = resolver.resolve("Root::Inner::user")
    assert resolver.resolve_from(inner_user, "Shared").qualified_name == "Root::Shared"
    assert resolver.resolve_from(inner_user, "Local").qualified_name == "Root::Inner::Local"
    assert resolver.resolve_from(inner_user, "Root::Shared").qualified_name == "Root::Shared"


def test_aligner_emitted_names_resolve(completed_session, bundled_library):
    """Resolution oracle: every name generated by the aligner resolves against
    {oem, supplier, extension}."""
    from sysml_align.nodes import RelationKind

    session = completed_session
    alignment = parse_model(
        (session.dir / "IntegratedModel_Alignment.sysml").read_text(encoding="utf-8"), "alignment"
    ).expect()
    oem = parse_model((session.dir / "inputs" / "oem.sysml").read_text(encoding="utf-8"), "oem").expect()
    sup = parse_model((session.dir / "inputs" / "supplier.sysml").read_text(encoding="utf-8"), "sup").expect()
    resolver = Resolver([oem, sup, bundled_library.model, alignment])
    checked = 0
    for el in alignment.walk():
        for rel in el.relations:
            if rel.kind in (
                RelationKind.ALIAS_TARGET,
                RelationKind.ALLOCATED_FROM,
                RelationKind.ALLOCATED_TO,
                RelationKind.IMPORT_TARGET,
                RelationKind.COMMENT_ABOUT,
            ):
                found, diag = resolver.try_resolve_from(alignment.root_package, rel.target)
                assert found is not None, f"{rel.target}: {diag and diag.message}"
                checked += 1
    assert checked > 20
