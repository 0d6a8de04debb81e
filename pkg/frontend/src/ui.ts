// DOM layer: renders the panels and wires actions to the API client.
// Server state is the single source of truth: after any mutation (or any
// 409/422) everything re-renders from a fresh poll, which is also the
// rollback story for optimistic interactions.

import { ApiClient, ApiRequestError } from "./api.js";
import {
  candidateRows,
  correctionTemplate,
  coverageRows,
  describeError,
  diagnosisRows,
  packageLines,
  stageActions,
} from "./state.js";
import type { SessionInfo } from "./types.js";

const POLL_INTERVAL_MS = 1500;

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Dashboard {
  private statusLine: HTMLElement = el("div", "status-line");
  private board: HTMLElement = el("section", "panel stage-board");
  private candidates: HTMLElement = el("section", "panel candidates");
  private coverage: HTMLElement = el("section", "panel coverage");
  private diagnosis: HTMLElement = el("section", "panel diagnosis");
  private packageView: HTMLElement = el("section", "panel package");
  private exportPanel: HTMLElement = el("section", "panel export");

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  mount(): void {
    const header = el("header");
    header.appendChild(el("h1", undefined, "sysml-align review"));
    header.appendChild(this.statusLine);
    this.root.append(
      header,
      this.board,
      this.candidates,
      this.packageView,
      this.coverage,
      this.diagnosis,
      this.exportPanel,
    );
    void this.refresh();
    setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }

  private note(text: string): void {
    this.statusLine.textContent = text;
  }

  private async act(label: string, action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
      this.note(`${label}: ok`);
    } catch (err) {
      if (err instanceof ApiRequestError) {
        this.note(`${label}: ${describeError(err)}`);
      } else {
        this.note(`${label}: ${String(err)}`);
      }
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    let session: SessionInfo;
    try {
      session = await this.api.getSession();
    } catch (err) {
      this.note(`service unreachable: ${String(err)}`);
      return;
    }
    this.renderBoard(session);
    await Promise.all([
      this.renderCandidates(),
      this.renderCoverage(),
      this.renderDiagnosis(),
      this.renderPackage(),
    ]);
    this.renderExport(session);
  }

  private renderBoard(session: SessionInfo): void {
    const table = el("table");
    const head = el("tr");
    for (const title of ["#", "stage", "status", "attempts", "actions"]) {
      head.appendChild(el("th", undefined, title));
    }
    table.appendChild(head);

    session.stages.forEach((stage, index) => {
      const row = el("tr", `stage-${stage.status.toLowerCase()}`);
      row.appendChild(el("td", undefined, String(stage.stage)));
      row.appendChild(el("td", undefined, stage.name));
      row.appendChild(el("td", `status ${stage.status.toLowerCase()}`, stage.status));
      row.appendChild(el("td", undefined, String(stage.attempts)));

      const actions = el("td", "actions");
      const actionsFor = stageActions(session.stages, index);
      if (actionsFor.canRun) {
        actions.appendChild(this.button("run", () => this.api.runStage(stage.stage)));
      }
      if (actionsFor.canConfirm) {
        actions.appendChild(
          this.button("confirm", () => {
            const acknowledge = stage.stage === 5;
            return this.api.confirmStage(stage.stage, undefined, acknowledge);
          }),
        );
      }
      if (actionsFor.canReject) {
        actions.appendChild(
          this.button("reject...", () => {
            const message = window.prompt("Correction feedback for this stage:", correctionTemplate());
            if (!message) return Promise.resolve();
            return this.api.rejectStage(stage.stage, message);
          }),
        );
      }
      if (actionsFor.canReopen) {
        actions.appendChild(this.button("reopen", () => this.api.reopenStage(stage.stage)));
      }
      row.appendChild(actions);
      table.appendChild(row);
    });

    this.board.replaceChildren(el("h2", undefined, `Session ${session.id}`), table);
  }

  private button(label: string, action: () => Promise<unknown>): HTMLElement {
    const btn = el("button", undefined, label) as HTMLButtonElement;
    btn.addEventListener("click", () => void this.act(label, action));
    return btn;
  }

  private async renderCandidates(): Promise<void> {
    let rows;
    try {
      rows = candidateRows(await this.api.getCandidates());
    } catch {
      this.candidates.replaceChildren(el("h2", undefined, "Candidates"), el("p", "hint", "run Stage 2 to propose candidates"));
      return;
    }
    const table = el("table");
    const head = el("tr");
    for (const title of ["confidence", "source", "target", "construct", "tag", "checks", "verdict", ""]) {
      head.appendChild(el("th", undefined, title));
    }
    table.appendChild(head);
    for (const row of rows) {
      const tr = el("tr");
      tr.appendChild(el("td", "num", row.confidence.toFixed(2)));
      tr.appendChild(el("td", "name", row.source));
      tr.appendChild(el("td", "name", row.target));
      tr.appendChild(el("td", undefined, row.construct));
      tr.appendChild(el("td", "tag", row.tag));
      tr.appendChild(
        el("td", row.checksPassed ? "ok" : "bad", row.checksPassed ? "pass" : `fail: ${row.failingChecks.join(", ")}`),
      );
      tr.appendChild(el("td", `verdict ${row.verdict.toLowerCase()}`, row.verdict));
      const actions = el("td", "actions");
      if (row.canDecide && row.mappingId) {
        const id = row.mappingId;
        actions.appendChild(this.button("accept", () => this.api.postVerdict(id, "Accepted")));
        actions.appendChild(this.button("reject", () => this.api.postVerdict(id, "Rejected", undefined, "rejected in review")));
        actions.appendChild(
          this.button("retag...", () => {
            const tag = window.prompt("Override tag:", row.tag);
            if (!tag) return Promise.resolve();
            return this.api.postVerdict(id, "Modified", tag);
          }),
        );
      }
      tr.appendChild(actions);
      table.appendChild(tr);
    }
    this.candidates.replaceChildren(el("h2", undefined, `Candidates (${rows.length})`), table);
  }

  private async renderCoverage(): Promise<void> {
    try {
      const rows = coverageRows(await this.api.getCoverage());
      const list = el("ul");
      for (const row of rows) {
        list.appendChild(
          el(
            "li",
            undefined,
            `${row.model}: ${row.matched} matched, ${row.explicitlyUnmatched} explicitly unmatched, ` +
              `${row.unprocessed} unprocessed (of ${row.total})`,
          ),
        );
      }
      this.coverage.replaceChildren(el("h2", undefined, "Coverage"), list);
    } catch {
      this.coverage.replaceChildren(el("h2", undefined, "Coverage"), el("p", "hint", "run Stage 5 to compute coverage"));
    }
  }

  private async renderDiagnosis(): Promise<void> {
    try {
      const rows = diagnosisRows(await this.api.getDiagnosis());
      const list = el("ul");
      if (!rows.length) list.appendChild(el("li", "ok", "no findings: package passes all checks"));
      for (const row of rows) {
        list.appendChild(el("li", row.severity, `${row.group}: ${row.message}`));
      }
      this.diagnosis.replaceChildren(el("h2", undefined, "Diagnosis"), list);
    } catch {
      this.diagnosis.replaceChildren(el("h2", undefined, "Diagnosis"), el("p", "hint", "run Stage 5 to check consistency"));
    }
  }

  private async renderPackage(): Promise<void> {
    try {
      const text = await this.api.getArtifactText("IntegratedModel_Alignment.sysml");
      const pre = el("pre", "package-text");
      for (const line of packageLines(text)) {
        const span = el("span", `line ${line.kind}`, line.text + "\n");
        if (line.rationale) {
          span.title = `confidence ${line.rationale.confidence}: ${line.rationale.rationale} (${line.rationale.origin})`;
        }
        pre.appendChild(span);
      }
      this.packageView.replaceChildren(el("h2", undefined, "Alignment package"), pre);
    } catch {
      this.packageView.replaceChildren(
        el("h2", undefined, "Alignment package"),
        el("p", "hint", "run Stage 4 to generate the package"),
      );
    }
  }

  private renderExport(session: SessionInfo): void {
    const stage6 = session.stages[6];
    const body = el("div");
    if (stage6.status === "Confirmed" || stage6.status === "AwaitingConfirmation") {
      body.appendChild(el("p", "ok", "export bundle written to the session's export/ directory"));
      const list = el("ul");
      for (const name of [
        "IntegratedModel_Alignment.sysml",
        "mappings.json",
        "candidates.json",
        "coverage.json",
        "diagnosis.json",
      ]) {
        const item = el("li");
        const link = el("a", undefined, name) as HTMLAnchorElement;
        link.href = `/api/artifacts/${name}`;
        link.target = "_blank";
        item.appendChild(link);
        list.appendChild(item);
      }
      body.appendChild(list);
    } else {
      body.appendChild(el("p", "hint", "confirm Stage 5, then run Stage 6 to export"));
    }
    this.exportPanel.replaceChildren(el("h2", undefined, "Export"), body);
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  new Dashboard(new ApiClient(""), root).mount();
}
