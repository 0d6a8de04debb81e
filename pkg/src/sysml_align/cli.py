"""Command-line front end for the alignment pipeline.

Headless-complete: every session operation (including per-mapping verdicts
and explicit unmatch records) is reachable here without the review UI or a
live provider.

Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 provider, 4 gating
violation.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import click

from .diagnostics import DiagnosticError
from .jsonutil import canonical_dumps
from .matcher import MatchConfig
from .session import (
    GatingError,
    ProviderFailure,
    Session,
    SessionConfig,
    ValidationFailure,
    session_lock,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_PROVIDER = 3
EXIT_GATING = 4

_LOCK_TIMEOUT = 30.0


@click.group()
def cli() -> None:
    """Soft alignment for SysML v2 textual models."""


def _echo(data, as_json: bool, text: str) -> None:
    if as_json:
        click.echo(canonical_dumps({"data": data, "ok": True}), nl=False)
    else:
        click.echo(text)


def _load(session_dir: str) -> Session:
    return Session.load(session_dir)


@cli.command("init")
@click.option("--oem", required=True, type=click.Path(), help="OEM model file (.sysml or .txt)")
@click.option("--supplier", required=True, type=click.Path(), help="Supplier model file")
@click.option("--library", type=click.Path(), default=None, help="Extension library (bundled default when omitted)")
@click.option("--oem-uids", type=click.Path(), default=None, help="JSON map qualified-name -> uid")
@click.option("--supplier-uids", type=click.Path(), default=None)
@click.option("--out", required=True, type=click.Path(), help="Session directory to create")
@click.option("--engine", type=click.Choice(["heuristic", "provider", "both"]), default=None,
              help="Match engine(s); defaults to heuristic, or provider when --provider is given")
@click.option("--provider", "provider_kind", type=click.Choice(["mock", "http"]), default=None)
@click.option("--base-url", default=None, help="Chat-completion endpoint base URL (http provider)")
@click.option("--model", default=None, help="Model name (http provider)")
@click.option("--api-key-env", default="SYSML_ALIGN_API_KEY", show_default=True,
              help="Environment variable holding the API key (never a flag)")
@click.option("--focus", default=None, help="User intent text forwarded to the provider prompt")
@click.option("--threshold", type=float, default=None, help="Candidate confidence threshold")
@click.option("--package-name", default=None, help="Name of the generated alignment package")
@click.option("--clock", type=click.Choice(["logical", "wall"]), default="logical", show_default=True,
              help="logical = deterministic timestamps (reproducible artifacts)")
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
def cmd_init(oem, supplier, library, oem_uids, supplier_uids, out, engine, provider_kind,
             base_url, model, api_key_env, focus, threshold, package_name, clock, output_format):
    """Create a session and run Stage 0 (preparation and syntax confirmation)."""
    if engine is None:
        engine = "provider" if provider_kind is not None else "heuristic"
    match = MatchConfig() if threshold is None else MatchConfig(threshold=threshold)
    config = SessionConfig(
        match=match,
        engine=engine,
        provider_kind=provider_kind or "mock",
        base_url=base_url,
        model=model,
        api_key_env=api_key_env,
        focus=focus,
        package_name=package_name,
        clock_mode=clock,
    )
    session = Session.init(oem, supplier, out, library_path=library, config=config,
                           oem_uids_path=oem_uids, supplier_uids_path=supplier_uids)
    stage0 = session.stage(0)
    _echo(
        {"session": session.state["id"], "stage0": stage0["status"], "dir": str(session.dir)},
        output_format == "json",
        f"session {session.state['id']} created at {session.dir} (stage 0: {stage0['status']})",
    )
    if stage0["status"] == "Failed":
        raise ValidationFailure("stage 0 failed; see the session transcript for diagnostics")


@cli.command("run")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--stage", "stage_index", required=True, type=int)
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
def cmd_run(session_dir, stage_index, output_format):
    """Run (or re-run) one stage; the stage then awaits confirmation."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        session.run_stage(stage_index)
    state = session.stage(stage_index)
    _echo(
        {"stage": stage_index, "status": state["status"], "artifacts": state["artifacts"]},
        output_format == "json",
        f"stage {stage_index}: {state['status']} (artifacts: {', '.join(state['artifacts']) or 'none'})",
    )


@cli.command("confirm")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--stage", "stage_index", required=True, type=int)
@click.option("--message", default=None)
@click.option("--acknowledge-unprocessed", is_flag=True, default=False,
              help="Required to confirm Stage 5 while coverage reports unprocessed elements")
def cmd_confirm(session_dir, stage_index, message, acknowledge_unprocessed):
    """Confirm a stage that awaits confirmation."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        session.confirm_stage(stage_index, feedback=message, acknowledge_unprocessed=acknowledge_unprocessed)
    click.echo(f"stage {stage_index}: Confirmed")


@cli.command("reject")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--stage", "stage_index", required=True, type=int)
@click.option("--message", required=True, help="Correction feedback; injected into the next provider request")
def cmd_reject(session_dir, stage_index, message):
    """Reject a stage; it returns to Pending and the feedback is retained."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        session.reject_stage(stage_index, message)
    click.echo(f"stage {stage_index}: rejected, Pending again")


@cli.command("reopen")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--stage", "stage_index", required=True, type=int)
def cmd_reopen(session_dir, stage_index):
    """Reopen a Confirmed stage; all later stages reset to Pending."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        session.reopen_stage(stage_index)
    click.echo(f"stage {stage_index}: reopened")


@cli.command("status")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
def cmd_status(session_dir, output_format):
    """Show the stage board."""
    session = _load(session_dir)
    rows = session.status_rows()
    if output_format == "json":
        _echo({"id": session.state["id"], "stages": rows}, True, "")
        return
    click.echo(f"session {session.state['id']} ({session.dir})")
    for row in rows:
        click.echo(f"  [{row['stage']}] {row['name']:38s} {row['status']:21s} attempts={row['attempts']}")


@cli.command("verdict")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--mapping", "mapping_id", default=None, help="Mapping id (see mappings.json)")
@click.option("--accept", "verdict", flag_value="Accepted")
@click.option("--reject", "verdict", flag_value="Rejected")
@click.option("--modify", "tag", default=None, help="Accept with this tag override (Modified verdict)")
@click.option("--auto", is_flag=True, default=False,
              help="Greedy one-to-one: accept best passing candidate per element, reject the rest")
@click.option("--message", default=None)
def cmd_verdict(session_dir, mapping_id, verdict, tag, auto, message):
    """Apply human verdicts to verified mappings (Stage 3 window)."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        if auto:
            accepted, rejected = session.auto_verdicts()
            click.echo(f"auto verdicts: {accepted} accepted, {rejected} rejected")
            return
        if not mapping_id:
            raise click.UsageError("--mapping is required unless --auto is given")
        if tag is not None:
            session.apply_verdict(mapping_id, "Modified", tag=tag, note=message)
        elif verdict is not None:
            session.apply_verdict(mapping_id, verdict, note=message)
        else:
            raise click.UsageError("one of --accept, --reject, --modify TAG, or --auto is required")
    click.echo(f"verdict recorded for {mapping_id}")


@cli.command("unmatch")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--uid", required=True, help="Element uid to mark as deliberately unmatched")
@click.option("--message", default=None)
def cmd_unmatch(session_dir, uid, message):
    """Record an explicit FullyUnmatched decision for an element."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        session.mark_unmatched(uid, note=message)
    click.echo(f"{uid} marked as deliberately unmatched")


@cli.command("export")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text")
def cmd_export(session_dir, output_format):
    """Run Stage 6: write the export bundle (requires Stage 5 Confirmed)."""
    with session_lock(Path(session_dir)).acquire(timeout=_LOCK_TIMEOUT):
        session = _load(session_dir)
        bundle = session.export()
    _echo({"bundle": str(bundle)}, output_format == "json", f"export bundle written to {bundle}")


@cli.command("serve")
@click.option("--session", "session_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True, type=int)
@click.option("--ui", "ui_dir", type=click.Path(), default=None, help="Directory of built review-UI assets")
def cmd_serve(session_dir, host, port, ui_dir):
    """Start the local HTTP API (and static review UI, when built)."""
    import uvicorn

    from .service import create_app

    Session.load(session_dir)  # fail fast on a bad directory
    app = create_app(Path(session_dir), ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@cli.command("examples")
@click.option("--out", required=True, type=click.Path(), help="Directory to copy the bundled example models into")
def cmd_examples(out):
    """Copy the bundled measurement-system pair and extension library."""
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    corpus = resources.files("sysml_align.resources.corpus")
    for name in ("oem_measurement_system.sysml", "supplier_sensor_kit.sysml"):
        (out_path / name).write_text(corpus.joinpath(name).read_text("utf-8"), encoding="utf-8")
    library = resources.files("sysml_align.resources.library").joinpath("alignment_extensions.sysml")
    (out_path / "alignment_extensions.sysml").write_text(library.read_text("utf-8"), encoding="utf-8")
    click.echo(f"example models written to {out_path}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        click.echo(f"sysml-align: usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except GatingError as exc:
        click.echo(f"sysml-align: gating violation: {exc}", err=True)
        return EXIT_GATING
    except ProviderFailure as exc:
        click.echo(f"sysml-align: provider failure: {exc}", err=True)
        return EXIT_PROVIDER
    except (ValidationFailure, DiagnosticError) as exc:
        click.echo(f"sysml-align: error: {exc}", err=True)
        return EXIT_VALIDATION
    except click.Abort:
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
