"""Deterministic similarity features used by the heuristic match engine.

No stemming, no synonym lists: semantic similarity beyond token identity is
the provider's job, not this module's.
"""

from __future__ import annotations

import re
from collections import Counter

from .ir import PortSummary

_TOKEN_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def tokenize(text: str) -> list[str]:
    """Split on case boundaries, digit runs, '_' and '-'; lowercase."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _multiset_jaccard(a: Counter, b: Counter) -> float:
    if not a and not b:
        return 1.0
    union = sum((a | b).values())
    inter = sum((a & b).values())
    return inter / union if union else 1.0


def name_similarity(a: str, b: str) -> float:
    """0.5 * token-multiset Jaccard + 0.5 * (1 - normalized edit distance).

    The edit distance is taken over the normalized token concatenations, so
    camelCase/snake_case spellings of the same tokens score 1.0. Symmetric by
    construction.
    """
    ta, tb = tokenize(a), tokenize(b)
    jac = _multiset_jaccard(Counter(ta), Counter(tb))
    sa, sb = " ".join(ta), " ".join(tb)
    longest = max(len(sa), len(sb))
    edit = levenshtein(sa, sb) / longest if longest else 0.0
    return 0.5 * jac + 0.5 * (1.0 - edit)


def _norm(text: str | None) -> str:
    return "-".join(tokenize(text or ""))


def port_signature(ports: list[PortSummary]) -> frozenset[tuple[str, str]]:
    """Normalized {(name, type)} signature; types compare by local segment."""
    return frozenset((_norm(p.name), _norm((p.type or "").rsplit("::", 1)[-1])) for p in ports)


def signature_jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def port_similarity(a: list[PortSummary], b: list[PortSummary]) -> float:
    return signature_jaccard(port_signature(a), port_signature(b))


def context_similarity(a_qualified: str, b_qualified: str) -> float:
    """Token-set Jaccard over the owner chains (path without the last segment)."""
    a_tokens = {t for seg in a_qualified.split("::")[:-1] for t in tokenize(seg)}
    b_tokens = {t for seg in b_qualified.split("::")[:-1] for t in tokenize(seg)}
    if not a_tokens and not b_tokens:
        return 1.0
    union = len(a_tokens | b_tokens)
    return len(a_tokens & b_tokens) / union if union else 1.0
