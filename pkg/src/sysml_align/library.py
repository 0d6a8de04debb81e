"""Loading of metadata extension libraries (the match-tag vocabulary)."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .diagnostics import DiagnosticError, error
from .nodes import ElementKind, Model, RelationKind
from .parser import parse_model

DEFAULT_LIBRARY_RESOURCE = "alignment_extensions.sysml"

#: Tag set the bundled library defines.
BUNDLED_TAGS = ("FullyMatched", "RequireComplement", "RequireModification", "FullyUnmatched")


@dataclass
class ExtensionLibrary:
    package_name: str
    tags: list[str]
    base: str | None
    model: Model

    def has_tag(self, name: str) -> bool:
        return name.rsplit("::", 1)[-1] in self.tags


def load_extension_library(text: str, source_name: str = "<library>") -> ExtensionLibrary:
    """Parse a package of MetadataDefs into an ExtensionLibrary.

    Tag names are the MetadataDefs that are not used as a supertype by the
    other MetadataDefs in the same package; a def that only serves as the
    shared supertype is reported as ``base`` instead.
    """
    result = parse_model(text, source_name)
    if result.model is None:
        raise DiagnosticError(result.diagnostics)
    model = result.model

    defs = [el for el in model.walk() if el.kind is ElementKind.METADATA_DEF]
    if not defs:
        raise DiagnosticError(error("library.empty", f"no metadata definitions found in '{source_name}'"))

    def_names = {el.name for el in defs}
    supertypes: list[str] = []
    for el in defs:
        for target in el.relation_targets(RelationKind.SPECIALIZES):
            supertypes.append(target.rsplit("::", 1)[-1])
    local_bases = {name for name in supertypes if name in def_names}

    tags = [el.name for el in defs if el.name not in local_bases]
    if not tags:
        raise DiagnosticError(error("library.empty", f"library '{source_name}' defines only supertypes, no tags"))

    tag_supers = {
        t
        for el in defs
        if el.name in tags
        for t in (s.rsplit("::", 1)[-1] for s in el.relation_targets(RelationKind.SPECIALIZES))
    }
    base = tag_supers.pop() if len(tag_supers) == 1 else None

    return ExtensionLibrary(
        package_name=model.name,
        tags=tags,
        base=base,
        model=model,
    )


def bundled_library_text() -> str:
    return resources.files("sysml_align.resources.library").joinpath(DEFAULT_LIBRARY_RESOURCE).read_text("utf-8")


def load_bundled_library() -> ExtensionLibrary:
    return load_extension_library(bundled_library_text(), DEFAULT_LIBRARY_RESOURCE)
