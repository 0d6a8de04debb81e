"""The seven-stage gated pipeline: persistence, confirmation, iteration, export.

A session is a directory of canonical JSON files plus model texts: no
database, inspectable and diffable. State is persisted after every
transition; reloading reproduces the in-memory state exactly.

Timestamps come from a logical clock by default (fixed epoch advanced by a
persisted counter) so that repeated runs with fixed inputs produce
byte-identical artifacts and export bundles; wall-clock timestamps are
opt-in via configuration.
"""

from __future__ import annotations

import datetime
import hashlib
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from .align import generate_alignment_package, generate_extension_demo
from .check import check_consistency, check_coverage
from .diagnostics import DiagnosticError
from .ir import extract_ir, ir_to_json, json_to_ir
from .jsonutil import canonical_dumps, read_json, write_canonical
from .library import ExtensionLibrary, bundled_library_text, load_extension_library
from .matcher import CandidateSet, MatchConfig, merge_candidate_sets, propose_heuristic
from .nodes import source_digest
from .parser import parse_model
from .providers import HttpProvider, MockProvider, Provider, ProviderError, ProviderReplyError, propose_via_provider
from .verify import (
    VERDICT_ACCEPTED,
    VERDICT_REJECTED,
    VerifiedMapping,
    apply_verdict,
    detect_conflicts,
    verify_candidate,
)

STAGE_COUNT = 7

STAGE_NAMES = (
    "Preparation and syntax confirmation",
    "Model element summarization",
    "Match candidate suggestion",
    "Mapping verification",
    "Aligned package generation",
    "Consistency check",
    "Export and documentation",
)

STATUS_PENDING = "Pending"
STATUS_AWAITING = "AwaitingConfirmation"
STATUS_CONFIRMED = "Confirmed"
STATUS_FAILED = "Failed"

ALIGNMENT_FILE = "IntegratedModel_Alignment.sysml"

EXPORT_FILES = (
    ALIGNMENT_FILE,
    "mappings.json",
    "candidates.json",
    "coverage.json",
    "diagnosis.json",
    "transcript.json",
    "summary.md",
)

_LOGICAL_EPOCH = datetime.datetime(2025, 1, 1, tzinfo=datetime.timezone.utc)


class SessionError(Exception):
    """Base for session-level failures; CLI maps subclasses to exit codes."""


class GatingError(SessionError):
    """Stage-order or stage-status violation."""


class ValidationFailure(SessionError):
    """Parse/validation failure inside a stage."""


class ProviderFailure(SessionError):
    """Provider transport or reply-schema failure (retryable)."""


@dataclass
class SessionConfig:
    match: MatchConfig = field(default_factory=MatchConfig)
    engine: str = "heuristic"  # heuristic | provider | both
    provider_kind: str = "mock"  # mock | http
    base_url: str | None = None
    model: str | None = None
    api_key_env: str = "SYSML_ALIGN_API_KEY"
    provider_retries: int = 2
    focus: str | None = None
    depth_limit: int = 2
    package_name: str | None = None
    clock_mode: str = "logical"  # logical | wall

    def to_dict(self) -> dict:
        return {
            "match": self.match.to_dict(),
            "engine": self.engine,
            "provider_kind": self.provider_kind,
            "base_url": self.base_url,
            "model": self.model,
            "api_key_env": self.api_key_env,
            "provider_retries": self.provider_retries,
            "focus": self.focus,
            "depth_limit": self.depth_limit,
            "package_name": self.package_name,
            "clock_mode": self.clock_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        return cls(
            match=MatchConfig.from_dict(data["match"]),
            engine=data["engine"],
            provider_kind=data["provider_kind"],
            base_url=data["base_url"],
            model=data["model"],
            api_key_env=data["api_key_env"],
            provider_retries=data["provider_retries"],
            focus=data["focus"],
            depth_limit=data["depth_limit"],
            package_name=data["package_name"],
            clock_mode=data["clock_mode"],
        )


def _new_stage_state() -> dict:
    return {"status": STATUS_PENDING, "attempts": 0, "artifacts": [], "transcript": [], "pending_feedback": []}


def session_lock(directory: Path) -> FileLock:
    return FileLock(str(Path(directory) / ".lock"))


class Session:
    def __init__(self, directory: Path, state: dict):
        self.dir = Path(directory)
        self.state = state

    # --- lifecycle -----------------------------------------------------

    @classmethod
    def init(
        cls,
        oem_path: str | Path,
        supplier_path: str | Path,
        out_dir: str | Path,
        library_path: str | Path | None = None,
        config: SessionConfig | None = None,
        oem_uids_path: str | Path | None = None,
        supplier_uids_path: str | Path | None = None,
    ) -> "Session":
        config = config or SessionConfig()
        config.match.validate()
        out = Path(out_dir)
        for path in (oem_path, supplier_path, library_path, oem_uids_path, supplier_uids_path):
            if path is not None and not Path(path).is_file():
                raise ValidationFailure(f"input file not readable: {path}")

        out.mkdir(parents=True, exist_ok=True)
        inputs = out / "inputs"
        inputs.mkdir(exist_ok=True)
        shutil.copyfile(oem_path, inputs / "oem.sysml")
        shutil.copyfile(supplier_path, inputs / "supplier.sysml")
        if library_path is not None:
            shutil.copyfile(library_path, inputs / "library.sysml")
        else:
            (inputs / "library.sysml").write_text(bundled_library_text(), encoding="utf-8")
        for src, name in ((oem_uids_path, "oem.uids.json"), (supplier_uids_path, "supplier.uids.json")):
            if src is not None:
                shutil.copyfile(src, inputs / name)

        digests = {
            "oem": source_digest((inputs / "oem.sysml").read_text(encoding="utf-8")),
            "supplier": source_digest((inputs / "supplier.sysml").read_text(encoding="utf-8")),
            "library": source_digest((inputs / "library.sysml").read_text(encoding="utf-8")),
        }
        session_id = hashlib.sha256(
            (digests["oem"] + digests["supplier"] + digests["library"] + canonical_dumps(config.to_dict())).encode()
        ).hexdigest()[:12]

        state = {
            "id": session_id,
            "clock": {"mode": config.clock_mode, "tick": 0},
            "config": config.to_dict(),
            "paths": {
                "oem": str(oem_path),
                "supplier": str(supplier_path),
                "library": str(library_path) if library_path else None,
            },
            "input_digests": digests,
            "uid_maps": {
                "oem": "inputs/oem.uids.json" if oem_uids_path else None,
                "supplier": "inputs/supplier.uids.json" if supplier_uids_path else None,
            },
            "stages": [_new_stage_state() for _ in range(STAGE_COUNT)],
        }
        session = cls(out, state)
        session.state["created_at"] = session.timestamp()
        try:
            session.run_stage(0)
        except (ValidationFailure, ProviderFailure):
            pass  # recorded in stage state; init itself succeeds with Stage 0 Failed
        return session

    @classmethod
    def load(cls, directory: str | Path) -> "Session":
        directory = Path(directory)
        state_file = directory / "session.json"
        if not state_file.is_file():
            raise ValidationFailure(f"not a session directory (missing session.json): {directory}")
        return cls(directory, read_json(state_file))

    def persist(self) -> None:
        tmp = self.dir / "session.json.tmp"
        tmp.write_text(canonical_dumps(self.state), encoding="utf-8")
        tmp.replace(self.dir / "session.json")

    # --- clock & transcript ---------------------------------------------

    def timestamp(self) -> str:
        clock = self.state["clock"]
        if clock["mode"] == "wall":
            return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        clock["tick"] += 1
        moment = _LOGICAL_EPOCH + datetime.timedelta(seconds=clock["tick"])
        return moment.strftime("%Y-%m-%dT%H:%M:%SZ")

    def transcript(self, stage: int, actor: str, text: str) -> None:
        self.state["stages"][stage]["transcript"].append(
            {"actor": actor, "text": text, "timestamp": self.timestamp()}
        )

    # --- state accessors --------------------------------------------------

    @property
    def config(self) -> SessionConfig:
        return SessionConfig.from_dict(self.state["config"])

    def stage(self, k: int) -> dict:
        if not 0 <= k < STAGE_COUNT:
            raise GatingError(f"stage index {k} out of range 0..6")
        return self.state["stages"][k]

    def status_rows(self) -> list[dict]:
        return [
            {
                "stage": k,
                "name": STAGE_NAMES[k],
                "status": s["status"],
                "attempts": s["attempts"],
                "artifacts": list(s["artifacts"]),
            }
            for k, s in enumerate(self.state["stages"])
        ]

    def artifact_path(self, name: str) -> Path:
        return self.dir / name

    # --- transitions -----------------------------------------------------

    def run_stage(self, k: int) -> None:
        stage = self.stage(k)
        for j in range(k):
            if self.state["stages"][j]["status"] != STATUS_CONFIRMED:
                raise GatingError(f"stage {k} requires stages below it to be Confirmed (stage {j} is "
                                  f"{self.state['stages'][j]['status']})")
        if stage["status"] == STATUS_CONFIRMED:
            raise GatingError(f"stage {k} is already Confirmed; reopen it first")

        runner = _STAGE_RUNNERS[k]
        stage["attempts"] += 1
        try:
            summary, artifacts = runner(self)
        except DiagnosticError as exc:
            stage["status"] = STATUS_FAILED
            self.transcript(k, "System", f"stage failed: {exc}")
            self.persist()
            raise ValidationFailure(str(exc)) from exc
        except (ProviderError, ProviderReplyError) as exc:
            stage["status"] = STATUS_FAILED
            self.transcript(k, "System", f"provider failure: {exc}")
            self.persist()
            raise ProviderFailure(str(exc)) from exc
        except ValidationFailure as exc:
            stage["status"] = STATUS_FAILED
            self.transcript(k, "System", f"stage failed: {exc}")
            self.persist()
            raise
        stage["status"] = STATUS_AWAITING
        stage["artifacts"] = artifacts
        self.transcript(k, "System", summary)
        self.persist()

    def confirm_stage(self, k: int, feedback: str | None = None, acknowledge_unprocessed: bool = False) -> None:
        stage = self.stage(k)
        if stage["status"] != STATUS_AWAITING:
            raise GatingError(f"stage {k} is {stage['status']}, not AwaitingConfirmation")
        if k == 5:
            coverage = read_json(self.dir / "coverage.json")
            unprocessed = coverage["source"]["unprocessed"] + coverage["target"]["unprocessed"]
            if unprocessed and not acknowledge_unprocessed:
                raise GatingError(
                    f"coverage reports {len(unprocessed)} unprocessed elements; "
                    "confirming Stage 5 requires explicit acknowledgment"
                )
            if unprocessed:
                self.transcript(5, "User", f"acknowledged {len(unprocessed)} unprocessed elements")
        stage["status"] = STATUS_CONFIRMED
        stage["pending_feedback"] = []
        self.transcript(k, "User", feedback or f"confirmed stage {k}")
        self.persist()

    def reject_stage(self, k: int, feedback: str) -> None:
        stage = self.stage(k)
        if stage["status"] != STATUS_AWAITING:
            raise GatingError(f"stage {k} is {stage['status']}, not AwaitingConfirmation")
        stage["status"] = STATUS_PENDING
        stage["pending_feedback"].append(feedback)
        self.transcript(k, "User", feedback)
        self.persist()

    def reopen_stage(self, k: int) -> None:
        stage = self.stage(k)
        if stage["status"] != STATUS_CONFIRMED:
            raise GatingError(f"stage {k} is {stage['status']}, not Confirmed")
        stage["status"] = STATUS_AWAITING
        for j in range(k + 1, STAGE_COUNT):
            later = self.state["stages"][j]
            for name in later["artifacts"]:
                target = self.dir / name
                if target.is_file():
                    target.unlink()
                elif target.is_dir():
                    shutil.rmtree(target)
            later["status"] = STATUS_PENDING
            later["artifacts"] = []
            later["pending_feedback"] = []
        self.transcript(k, "User", f"reopened stage {k}; stages {k + 1}..6 reset to Pending")
        self.persist()

    # --- verdicts ----------------------------------------------------------

    def _require_verdict_window(self) -> None:
        if self.state["stages"][3]["status"] != STATUS_AWAITING:
            raise GatingError("verdicts can only be applied while Stage 3 is AwaitingConfirmation")

    def _load_mappings_doc(self) -> dict:
        return read_json(self.dir / "mappings.json")

    def _store_mappings_doc(self, doc: dict) -> None:
        write_canonical(self.dir / "mappings.json", doc)

    def apply_verdict(self, mapping_id: str, status: str, tag: str | None = None, note: str | None = None,
                      actor: str = "User") -> None:
        self._require_verdict_window()
        doc = self._load_mappings_doc()
        mappings = [VerifiedMapping.from_dict(m) for m in doc["mappings"]]
        index = {m.mapping_id: i for i, m in enumerate(mappings)}
        if mapping_id not in index:
            raise ValidationFailure(f"unknown mapping id '{mapping_id}'")
        library = self._library()
        try:
            updated = apply_verdict(
                mappings[index[mapping_id]], status, tag=tag, actor=actor, note=note,
                timestamp=self.timestamp(), library=library,
            )
        except DiagnosticError as exc:
            raise ValidationFailure(str(exc)) from exc
        mappings[index[mapping_id]] = updated
        doc["mappings"] = [m.to_dict() for m in mappings]
        self._store_mappings_doc(doc)
        self._refresh_conflicts(mappings)
        self.transcript(3, actor, f"verdict {status} on {mapping_id}" + (f" (tag {tag})" if tag else ""))
        self.persist()

    def auto_verdicts(self, actor: str = "User") -> tuple[int, int]:
        """Greedy one-to-one resolution: accept the best passing candidate per
        element pair in candidate order, reject everything else."""
        self._require_verdict_window()
        doc = self._load_mappings_doc()
        mappings = [VerifiedMapping.from_dict(m) for m in doc["mappings"]]
        library = self._library()
        used_sources: set[str] = set()
        used_targets: set[str] = set()
        accepted = rejected = 0
        out: list[VerifiedMapping] = []
        for m in mappings:
            if m.verdict_status != "Pending":
                out.append(m)
                if m.is_accepted:
                    used_sources.add(m.candidate.source_uid)
                    used_targets.add(m.candidate.target_uid)
                continue
            acceptable = (
                m.all_checks_pass
                and m.candidate.source_uid not in used_sources
                and m.candidate.target_uid not in used_targets
            )
            if acceptable:
                out.append(apply_verdict(m, VERDICT_ACCEPTED, actor=actor, note="auto: best one-to-one",
                                         timestamp=self.timestamp(), library=library))
                used_sources.add(m.candidate.source_uid)
                used_targets.add(m.candidate.target_uid)
                accepted += 1
            else:
                reason = "failing checks" if not m.all_checks_pass else "dominated by a higher-ranked mapping"
                out.append(apply_verdict(m, VERDICT_REJECTED, actor=actor, note=f"auto: {reason}",
                                         timestamp=self.timestamp(), library=library))
                rejected += 1
        doc["mappings"] = [m.to_dict() for m in out]
        self._store_mappings_doc(doc)
        self._refresh_conflicts(out)
        self.transcript(3, actor, f"auto verdicts: {accepted} accepted, {rejected} rejected")
        self.persist()
        return accepted, rejected

    def mark_unmatched(self, uid: str, note: str | None = None, actor: str = "User") -> None:
        self._require_verdict_window()
        source_ir = json_to_ir((self.dir / "oem.ir.json").read_text(encoding="utf-8"))
        target_ir = json_to_ir((self.dir / "supplier.ir.json").read_text(encoding="utf-8"))
        if uid not in source_ir.by_uid() and uid not in target_ir.by_uid():
            raise ValidationFailure(f"unknown element uid '{uid}'")
        doc = self._load_mappings_doc()
        records = doc.get("explicitly_unmatched", [])
        if any(r["uid"] == uid for r in records):
            return
        records.append({"uid": uid, "note": note, "actor": actor, "timestamp": self.timestamp()})
        doc["explicitly_unmatched"] = sorted(records, key=lambda r: r["uid"])
        self._store_mappings_doc(doc)
        self.transcript(3, actor, f"marked {uid} as deliberately unmatched (FullyUnmatched)")
        self.persist()

    def _refresh_conflicts(self, mappings: list[VerifiedMapping]) -> None:
        report = detect_conflicts(mappings, depth_limit=self.config.depth_limit)
        write_canonical(self.dir / "conflicts.json", report.to_dict())

    # --- shared stage helpers ----------------------------------------------

    def _parse_input(self, name: str):
        path = self.dir / "inputs" / f"{name}.sysml"
        result = parse_model(path.read_text(encoding="utf-8"), f"{name}.sysml")
        return result

    def _library(self) -> ExtensionLibrary:
        text = (self.dir / "inputs" / "library.sysml").read_text(encoding="utf-8")
        return load_extension_library(text, "library.sysml")

    def _models(self):
        oem = self._parse_input("oem").expect()
        supplier = self._parse_input("supplier").expect()
        return oem, supplier

    def export_path(self) -> Path:
        return self.dir / "export"

    def export(self) -> Path:
        """Build (or rebuild) the export bundle. Requires Stage 5 Confirmed;
        re-exporting an unchanged session is byte-identical."""
        if self.state["stages"][5]["status"] != STATUS_CONFIRMED:
            raise GatingError("export requires Stage 5 to be Confirmed")
        if self.stage(6)["status"] == STATUS_CONFIRMED:
            summary, _artifacts = _run_stage6(self)
            self.transcript(6, "System", summary)
            self.persist()
        else:
            self.run_stage(6)
        return self.export_path()


# --- stage runners -------------------------------------------------------


def _run_stage0(session: Session) -> tuple[str, list[str]]:
    # refresh copies from the original paths when they are still reachable
    for name in ("oem", "supplier"):
        original = session.state["paths"][name]
        if original and Path(original).is_file():
            shutil.copyfile(original, session.dir / "inputs" / f"{name}.sysml")
            session.state["input_digests"][name] = source_digest(
                (session.dir / "inputs" / f"{name}.sysml").read_text(encoding="utf-8")
            )

    problems: list[str] = []
    for name in ("oem", "supplier"):
        result = session._parse_input(name)
        for diag in result.diagnostics:
            session.transcript(0, "System", f"preliminary analysis ({name}): {diag.format(f'{name}.sysml')}")
        if result.model is None:
            problems.append(f"{name} model failed to parse")
        else:
            session.transcript(
                0, "System", f"{name} model '{result.model.name}' parsed: "
                f"{sum(1 for _ in result.model.walk())} elements"
            )

    try:
        library = session._library()
        session.transcript(
            0, "System",
            f"extension library '{library.package_name}' loaded: tags {', '.join(library.tags)}"
            + (" (bundled default)" if session.state["paths"]["library"] is None else ""),
        )
    except DiagnosticError as exc:
        problems.append(f"extension library failed to load: {exc}")
        library = None

    if problems:
        raise ValidationFailure("; ".join(problems))

    demo = generate_extension_demo(library, generated_at=session.timestamp())
    (session.dir / "extension_demo.sysml").write_text(demo, encoding="utf-8")
    demo_ok = parse_model(demo, "extension_demo.sysml").ok
    session.transcript(0, "System", f"extension demo generated ({'parses cleanly' if demo_ok else 'PARSE FAILURE'})")
    return "inputs verified; extension demo generated", ["extension_demo.sysml"]


def _run_stage1(session: Session) -> tuple[str, list[str]]:
    oem, supplier = session._models()
    uid_maps = {}
    for name in ("oem", "supplier"):
        ref = session.state["uid_maps"][name]
        uid_maps[name] = read_json(session.dir / ref) if ref else None

    oem_ir, oem_report = extract_ir(oem, uid_maps["oem"])
    sup_ir, sup_report = extract_ir(supplier, uid_maps["supplier"])

    shared = set(el.uid for el in oem_ir.elements) & set(el.uid for el in sup_ir.elements)
    if shared:
        raise ValidationFailure(
            f"uid collision across models: {', '.join(sorted(shared))} (identical qualified names?)"
        )

    (session.dir / "oem.ir.json").write_text(ir_to_json(oem_ir), encoding="utf-8")
    (session.dir / "supplier.ir.json").write_text(ir_to_json(sup_ir), encoding="utf-8")
    write_canonical(
        session.dir / "extraction_report.json",
        {"oem": oem_report.to_dict(), "supplier": sup_report.to_dict()},
    )
    summary = (
        f"extracted {oem_report.extracted}/{oem_report.total_ast_elements} (oem), "
        f"{sup_report.extracted}/{sup_report.total_ast_elements} (supplier) elements"
    )
    return summary, ["oem.ir.json", "supplier.ir.json", "extraction_report.json"]


def _make_provider(config: SessionConfig) -> Provider:
    if config.provider_kind == "mock":
        return MockProvider(config.match)
    if config.provider_kind == "http":
        if not config.base_url or not config.model:
            raise ValidationFailure("http provider requires base_url and model")
        return HttpProvider(config.base_url, config.model, api_key_env=config.api_key_env)
    raise ValidationFailure(f"unknown provider kind '{config.provider_kind}'")


def _run_stage2(session: Session) -> tuple[str, list[str]]:
    config = session.config
    source_ir = json_to_ir((session.dir / "oem.ir.json").read_text(encoding="utf-8"))
    target_ir = json_to_ir((session.dir / "supplier.ir.json").read_text(encoding="utf-8"))
    artifacts = ["candidates.json"]

    candidate_set: CandidateSet | None = None
    if config.engine in ("heuristic", "both"):
        candidate_set = propose_heuristic(source_ir, target_ir, config.match)
        session.transcript(2, "System", f"heuristic engine proposed {len(candidate_set.candidates)} candidates")
    if config.engine in ("provider", "both"):
        feedback = list(session.state["stages"][2]["pending_feedback"])
        provider = _make_provider(config)
        library_text = (session.dir / "inputs" / "library.sysml").read_text(encoding="utf-8")
        proposed, diagnostics, request = propose_via_provider(
            provider, source_ir, target_ir, library_text,
            focus=config.focus, config=config.match, feedback=feedback,
            retries=config.provider_retries,
        )
        write_canonical(session.dir / "provider_request.json", request.to_dict())
        artifacts.append("provider_request.json")
        session.transcript(2, "Provider", f"{provider.name} proposed {len(proposed.candidates)} candidates")
        for diag in diagnostics:
            session.transcript(2, "System", diag.format())
        candidate_set = proposed if candidate_set is None else merge_candidate_sets(candidate_set, proposed)

    assert candidate_set is not None
    candidate_set.focus = config.focus
    write_canonical(session.dir / "candidates.json", candidate_set.to_dict())
    summary = (
        f"{len(candidate_set.candidates)} candidates; "
        f"{len(candidate_set.unmatched_source)} unmatched source, "
        f"{len(candidate_set.unmatched_target)} unmatched target"
    )
    return summary, artifacts


def _run_stage3(session: Session) -> tuple[str, list[str]]:
    source_ir = json_to_ir((session.dir / "oem.ir.json").read_text(encoding="utf-8"))
    target_ir = json_to_ir((session.dir / "supplier.ir.json").read_text(encoding="utf-8"))
    candidate_set = CandidateSet.from_dict(read_json(session.dir / "candidates.json"))
    library = session._library()

    mappings = [verify_candidate(c, source_ir, target_ir, library) for c in candidate_set.candidates]
    report = detect_conflicts(mappings, depth_limit=session.config.depth_limit)

    write_canonical(
        session.dir / "mappings.json",
        {"mappings": [m.to_dict() for m in mappings], "explicitly_unmatched": []},
    )
    write_canonical(session.dir / "conflicts.json", report.to_dict())
    passing = sum(1 for m in mappings if m.all_checks_pass)
    summary = f"verified {len(mappings)} candidates ({passing} pass all checks); {len(report.conflicts)} conflicts"
    return summary, ["mappings.json", "conflicts.json"]


def _run_stage4(session: Session) -> tuple[str, list[str]]:
    doc = session._load_mappings_doc()
    mappings = [VerifiedMapping.from_dict(m) for m in doc["mappings"]]
    pending = [m.mapping_id for m in mappings if m.verdict_status == "Pending"]
    if pending:
        raise ValidationFailure(
            f"{len(pending)} mappings still Pending (e.g. {pending[0]}); apply verdicts before Stage 4"
        )
    accepted = [m for m in mappings if m.is_accepted]
    oem, supplier = session._models()
    library = session._library()
    pkg = generate_alignment_package(
        accepted, oem, supplier, library,
        package_name=session.config.package_name,
        generated_at=session.timestamp(),
    )
    (session.dir / ALIGNMENT_FILE).write_text(pkg.render(), encoding="utf-8")
    session.state["decisions_digest"] = pkg.decisions_digest
    aliases = sum(1 for m in accepted if m.construct == "AliasBinding")
    summary = (
        f"alignment package '{pkg.package.name}' generated: {aliases} aliases, "
        f"{len(accepted) - aliases} tagged allocations"
    )
    return summary, [ALIGNMENT_FILE]


def _run_stage5(session: Session) -> tuple[str, list[str]]:
    oem, supplier = session._models()
    library = session._library()
    alignment = parse_model((session.dir / ALIGNMENT_FILE).read_text(encoding="utf-8"), ALIGNMENT_FILE)
    if alignment.model is None:
        raise ValidationFailure("alignment package does not re-parse: "
                                + "; ".join(d.format(ALIGNMENT_FILE) for d in alignment.diagnostics))

    diagnosis = check_consistency(alignment.model, oem, supplier, library)
    write_canonical(session.dir / "diagnosis.json", diagnosis.to_dict())

    doc = session._load_mappings_doc()
    mappings = [VerifiedMapping.from_dict(m) for m in doc["mappings"]]
    source_ir = json_to_ir((session.dir / "oem.ir.json").read_text(encoding="utf-8"))
    target_ir = json_to_ir((session.dir / "supplier.ir.json").read_text(encoding="utf-8"))
    candidate_set = CandidateSet.from_dict(read_json(session.dir / "candidates.json"))
    coverage = check_coverage(
        mappings, source_ir, target_ir, candidate_set,
        explicit_unmatched=[r["uid"] for r in doc.get("explicitly_unmatched", [])],
    )
    write_canonical(session.dir / "coverage.json", coverage.to_dict())

    errors = len(diagnosis.errors())
    unprocessed = len(coverage.source.unprocessed) + len(coverage.target.unprocessed)
    summary = f"consistency: {errors} errors; coverage: {unprocessed} unprocessed elements"
    return summary, ["diagnosis.json", "coverage.json"]


def _run_stage6(session: Session) -> tuple[str, list[str]]:
    export = session.export_path()
    export.mkdir(exist_ok=True)
    for name in (ALIGNMENT_FILE, "mappings.json", "candidates.json", "coverage.json", "diagnosis.json"):
        shutil.copyfile(session.dir / name, export / name)

    transcript = []
    for k in range(6):
        for entry in session.state["stages"][k]["transcript"]:
            transcript.append({"stage": k, **entry})
    write_canonical(export / "transcript.json", {"session": session.state["id"], "entries": transcript})

    (export / "summary.md").write_text(_summary_markdown(session), encoding="utf-8")

    digests = {name: source_digest((export / name).read_text(encoding="utf-8")) for name in EXPORT_FILES}
    for name, digest in sorted(digests.items()):
        session.transcript(6, "System", f"exported {name} ({digest})")
    return f"export bundle written to {export.name}/ ({len(EXPORT_FILES)} files)", ["export"]


def _summary_markdown(session: Session) -> str:
    state = session.state
    coverage = read_json(session.dir / "coverage.json")
    diagnosis = read_json(session.dir / "diagnosis.json")
    candidates = read_json(session.dir / "candidates.json")
    mappings_doc = read_json(session.dir / "mappings.json")
    mappings = mappings_doc["mappings"]

    accepted = [m for m in mappings if m["verdict"]["status"] in ("Accepted", "Modified")]
    lines = [
        "# Alignment session summary",
        "",
        f"Session `{state['id']}`: {candidates['source_model']} vs {candidates['target_model']}",
        "",
        "## Stages",
        "",
        "| # | Stage | Status | Attempts |",
        "|---|-------|--------|----------|",
    ]
    for k in range(6):
        s = state["stages"][k]
        lines.append(f"| {k} | {STAGE_NAMES[k]} | {s['status']} | {s['attempts']} |")
    lines += [
        "",
        "## Matching",
        "",
        f"- candidates proposed: {len(candidates['candidates'])}",
        f"- mappings accepted: {len(accepted)}",
        f"- explicitly unmatched: {len(mappings_doc.get('explicitly_unmatched', []))}",
        "",
        "## Coverage",
        "",
    ]
    for side in ("source", "target"):
        c = coverage[side]
        lines.append(
            f"- {c['model_name']}: {len(c['matched'])} matched, "
            f"{len(c['explicitly_unmatched'])} explicitly unmatched, "
            f"{len(c['unprocessed'])} unprocessed (of {c['total_eligible']} eligible)"
        )
    total_diags = sum(len(v) for v in diagnosis.values())
    lines += [
        "",
        "## Consistency",
        "",
        f"- diagnoses: {total_diags}" + ("" if total_diags else " (package passes all checks)"),
    ]
    for group, diags in diagnosis.items():
        if diags:
            lines.append(f"  - {group}: {len(diags)}")
    lines += [
        "",
        "## Inputs",
        "",
        f"- oem: `{state['input_digests']['oem']}`",
        f"- supplier: `{state['input_digests']['supplier']}`",
        f"- library: `{state['input_digests']['library']}`",
        "",
    ]
    return "\n".join(lines)


_STAGE_RUNNERS = {
    0: _run_stage0,
    1: _run_stage1,
    2: _run_stage2,
    3: _run_stage3,
    4: _run_stage4,
    5: _run_stage5,
    6: _run_stage6,
}
