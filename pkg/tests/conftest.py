from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sysml_align.ir import extract_ir
from sysml_align.library import bundled_library_text, load_bundled_library
from sysml_align.parser import parse_model
from sysml_align.session import Session, SessionConfig

CORPUS_FILES = (
    "alias_import_showcase.sysml",
    "allocations_demo.sysml",
    "comments_annotations.sysml",
    "custom_tags_library.sysml",
    "interfaces_showcase.sysml",
    "measurement_requirements.sysml",
    "minimal.sysml",
    "nested_structure.sysml",
    "oem_measurement_system.sysml",
    "requirements_traceability.sysml",
    "supplier_sensor_kit.sysml",
    "vehicle_architecture.sysml",
)


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("sysml_align.resources.corpus").joinpath(name)))


@pytest.fixture(scope="session")
def corpus_texts() -> dict[str, str]:
    texts = {name: corpus_path(name).read_text(encoding="utf-8") for name in CORPUS_FILES}
    texts["alignment_extensions.sysml"] = bundled_library_text()
    return texts


@pytest.fixture(scope="session")
def oem_model(corpus_texts):
    return parse_model(corpus_texts["oem_measurement_system.sysml"], "oem.sysml").expect()


@pytest.fixture(scope="session")
def supplier_model(corpus_texts):
    return parse_model(corpus_texts["supplier_sensor_kit.sysml"], "supplier.sysml").expect()


@pytest.fixture(scope="session")
def bundled_library():
    return load_bundled_library()


@pytest.fixture(scope="session")
def oem_ir(oem_model):
    return extract_ir(oem_model)[0]


@pytest.fixture(scope="session")
def supplier_ir(supplier_model):
    return extract_ir(supplier_model)[0]


def make_session(tmp_path: Path, config: SessionConfig | None = None, name: str = "session") -> Session:
    return Session.init(
        corpus_path("oem_measurement_system.sysml"),
        corpus_path("supplier_sensor_kit.sysml"),
        tmp_path / name,
        config=config,
    )


def advance(session: Session, upto: int, acknowledge: bool = True, auto: bool = True) -> Session:
    """Drive a fresh session forward: stage 0 is already run by init."""
    session.confirm_stage(0)
    for k in range(1, upto + 1):
        session.run_stage(k)
        if k == 3 and auto:
            session.auto_verdicts()
        if k < upto or upto == 6:
            session.confirm_stage(k, acknowledge_unprocessed=acknowledge and k == 5)
    return session


@pytest.fixture()
def completed_session(tmp_path):
    session = make_session(tmp_path)
    return advance(session, 6)
