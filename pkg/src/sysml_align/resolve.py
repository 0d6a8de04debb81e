"""Name resolution across a set of models.

Two entry points:

* ``Resolver.resolve(qname)``: global resolution of a qualified name,
  starting at model roots. Crossing a namespace boundary from outside sees
  own members, aliases, and *public* imports only.
* ``Resolver.resolve_from(scope, qname)``: resolution as written inside a
  model: the first segment binds in the nearest enclosing namespace (where
  private imports are visible too), the rest of the path descends with the
  external rules.

Alias chains are followed to the final element; cycles are reported.
"""

from __future__ import annotations

from .diagnostics import Diagnostic, DiagnosticError, error
from .nodes import Element, ElementKind, Model


class ResolveError(DiagnosticError):
    pass


def _canonical(qname: str) -> list[str]:
    return qname.replace(".", "::").split("::")


class Resolver:
    def __init__(self, models: list[Model]):
        self.models = list(models)
        self._parent: dict[int, Element | None] = {}
        self._model_of: dict[int, Model] = {}
        for model in self.models:
            self._parent[id(model.root_package)] = None
            for el in model.walk():
                self._model_of[id(el)] = model
                for child in el.children:
                    self._parent[id(child)] = el

    # --- public API -------------------------------------------------------

    def resolve(self, qname: str, follow_aliases: bool = True) -> Element:
        el, diag = self.try_resolve(qname, follow_aliases=follow_aliases)
        if diag is not None:
            raise ResolveError(diag)
        assert el is not None
        return el

    def try_resolve(self, qname: str, follow_aliases: bool = True) -> tuple[Element | None, Diagnostic | None]:
        segments = _canonical(qname)
        branches = [m.root_package for m in self.models if m.root_package.name == segments[0]]
        return self._finish(qname, branches, segments[1:], follow_aliases)

    def resolve_from(self, scope: Element, qname: str, follow_aliases: bool = True) -> Element:
        el, diag = self.try_resolve_from(scope, qname, follow_aliases=follow_aliases)
        if diag is not None:
            raise ResolveError(diag)
        assert el is not None
        return el

    def try_resolve_from(
        self, scope: Element, qname: str, follow_aliases: bool = True
    ) -> tuple[Element | None, Diagnostic | None]:
        segments = _canonical(qname)
        branches: list[Element] = []
        ns: Element | None = scope
        while ns is not None:
            branches = self._lookup(ns, segments[0], include_private=True, guard=set())
            if branches:
                break
            ns = self._parent.get(id(ns))
        if not branches:
            branches = [m.root_package for m in self.models if m.root_package.name == segments[0]]
        return self._finish(qname, branches, segments[1:], follow_aliases)

    def model_of(self, el: Element) -> Model | None:
        return self._model_of.get(id(el))

    # --- machinery ----------------------------------------------------------

    def _finish(
        self, qname: str, branches: list[Element], rest: list[str], follow_aliases: bool
    ) -> tuple[Element | None, Diagnostic | None]:
        for segment in rest:
            next_branches: list[Element] = []
            for branch in branches:
                ns, diag = self._deref_alias(branch, set())
                if ns is None:
                    return None, diag
                next_branches.extend(self._lookup(ns, segment, include_private=False, guard=set()))
            branches = _dedupe(next_branches)
        if follow_aliases:
            finals: list[Element] = []
            for branch in branches:
                el, diag = self._deref_alias(branch, set())
                if el is None:
                    return None, diag
                finals.append(el)
            branches = _dedupe(finals)
        if not branches:
            return None, error("resolve.not-found", f"name '{qname}' not found")
        if len(branches) > 1:
            places = ", ".join(
                f"{b.qualified_name} ({(self.model_of(b) or _UNKNOWN).source_name})" for b in branches
            )
            return None, error("resolve.ambiguous", f"name '{qname}' is ambiguous: {places}")
        return branches[0], None

    def _deref_alias(self, el: Element, visiting: set[int]) -> tuple[Element | None, Diagnostic | None]:
        from .nodes import RelationKind

        if el.kind is not ElementKind.ALIAS:
            return el, None
        if id(el) in visiting:
            return None, error("resolve.alias-cycle", f"alias cycle through '{el.qualified_name}'")
        visiting.add(id(el))
        target = el.first_target(RelationKind.ALIAS_TARGET)
        if target is None:
            return None, error("resolve.not-found", f"alias '{el.qualified_name}' has no target")
        owner = self._parent.get(id(el))
        if owner is None:
            return None, error("resolve.not-found", f"alias '{el.qualified_name}' has no owner scope")
        found, diag = self.try_resolve_from(owner, target, follow_aliases=False)
        if found is None:
            return None, diag
        return self._deref_alias(found, visiting)

    def _lookup(self, ns: Element, name: str, include_private: bool, guard: set[int]) -> list[Element]:
        from .nodes import RelationKind

        hits = [child for child in ns.children if child.name == name]
        if hits:
            return hits
        for imp in ns.children:
            if imp.kind is not ElementKind.IMPORT or id(imp) in guard:
                continue
            if imp.visibility == "private" and not include_private:
                continue
            guard.add(id(imp))
            target_q = imp.first_target(RelationKind.IMPORT_TARGET)
            if target_q is None:
                continue
            target = self._resolve_import_target(ns, target_q, guard)
            if target is None:
                continue
            if imp.wildcard:
                hits.extend(self._lookup(target, name, include_private=False, guard=guard))
            elif _canonical(target_q)[-1] == name:
                hits.append(target)
        return _dedupe(hits)

    def _resolve_import_target(self, ns: Element, target_q: str, guard: set[int]) -> Element | None:
        segments = _canonical(target_q)
        scope: Element | None = ns
        first: list[Element] = []
        while scope is not None:
            first = self._lookup(scope, segments[0], include_private=True, guard=set(guard))
            if first:
                break
            scope = self._parent.get(id(scope))
        if not first:
            first = [m.root_package for m in self.models if m.root_package.name == segments[0]]
        el, _diag = self._finish(target_q, first, segments[1:], follow_aliases=True)
        return el


class _Unknown:
    source_name = "<unknown>"


_UNKNOWN = _Unknown()


def _dedupe(elements: list[Element]) -> list[Element]:
    seen: set[int] = set()
    out: list[Element] = []
    for el in elements:
        if id(el) not in seen:
            seen.add(id(el))
            out.append(el)
    return out


def resolve(models: list[Model], qname: str) -> Element:
    """Resolve a qualified name against a set of models; raises ResolveError
    with a NotFound or Ambiguous diagnostic."""
    return Resolver(models).resolve(qname)
