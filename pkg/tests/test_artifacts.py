"""Packaging-level guards: shipped resources stay consistent."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from conftest import advance, make_session
from sysml_align.jsonutil import read_json
from sysml_align.session import SessionConfig


def _repo_root() -> Path | None:
    current = Path(__file__).resolve()
    for parent in current.parents:
        if (parent / "pyproject.toml").is_file():
            return parent
    return None


def test_repo_prompts_copy_matches_packaged_template():
    root = _repo_root()
    assert root is not None
    repo_copy = root / "prompts" / "sysmlv2_alignment_process.md"
    assert repo_copy.is_file(), "prompt template must ship at prompts/sysmlv2_alignment_process.md"
    packaged = resources.files("sysml_align.prompts").joinpath("sysmlv2_alignment_process.md").read_text("utf-8")
    assert repo_copy.read_text(encoding="utf-8") == packaged


def test_golden_file_is_committed():
    text = resources.files("sysml_align.resources.golden").joinpath("IntegratedModel_Alignment.sysml").read_text("utf-8")
    assert "#FullyMatched allocation" in text
    assert "alias" in text


def test_mock_provider_pipeline_equals_heuristic_pipeline(tmp_path):
    """End-to-end equivalence: same mappings, tags, verdicts, and coverage;
    the generated package differs only in the origin label of comments."""

    def run(engine: str, name: str):
        session = make_session(tmp_path, SessionConfig(engine=engine, provider_kind="mock"), name=name)
        return advance(session, 6)

    heuristic = run("heuristic", "h")
    mock = run("provider", "m")

    def mapping_view(session):
        doc = read_json(session.dir / "mappings.json")
        return [
            (
                m["candidate"]["source_uid"], m["candidate"]["target_uid"], m["candidate"]["confidence"],
                m["construct"], m["effective_tag"], m["verdict"]["status"],
            )
            for m in doc["mappings"]
        ]

    assert mapping_view(heuristic) == mapping_view(mock)
    assert read_json(heuristic.dir / "coverage.json") == read_json(mock.dir / "coverage.json")

    import re

    def normalize(text: str) -> str:
        text = text.replace("origin: Heuristic", "origin: Provider")
        return re.sub(r"decisions: sha256:[0-9a-f]+", "decisions: sha256:<digest>", text)

    h_text = (heuristic.dir / "IntegratedModel_Alignment.sysml").read_text()
    m_text = (mock.dir / "IntegratedModel_Alignment.sysml").read_text()
    assert normalize(h_text) == normalize(m_text)
