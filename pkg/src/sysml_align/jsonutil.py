"""Canonical JSON: one serialization for every artifact the pipeline writes.

Sorted keys, two-space indent, trailing newline. Repeated runs and
re-exports stay byte-identical and session directories diff cleanly.
"""

from __future__ import annotations

import json
from pathlib import Path


def canonical_dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_canonical(path: Path, data) -> None:
    path.write_text(canonical_dumps(data), encoding="utf-8")


def read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))
