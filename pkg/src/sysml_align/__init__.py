"""Soft-alignment toolchain for independently developed SysML v2 textual models."""

__version__ = "0.1.0"

from .diagnostics import Diagnostic, DiagnosticError, Severity, Span
from .library import ExtensionLibrary, load_bundled_library, load_extension_library
from .nodes import Element, ElementKind, Model, Relation, RelationKind, is_definition, is_usage
from .parser import ParseResult, parse_model
from .render import render_model
from .resolve import Resolver, ResolveError, resolve

__all__ = [
    "Diagnostic",
    "DiagnosticError",
    "Element",
    "ElementKind",
    "ExtensionLibrary",
    "Model",
    "ParseResult",
    "Relation",
    "RelationKind",
    "ResolveError",
    "Resolver",
    "Severity",
    "Span",
    "__version__",
    "is_definition",
    "is_usage",
    "load_bundled_library",
    "load_extension_library",
    "parse_model",
    "render_model",
    "resolve",
]
