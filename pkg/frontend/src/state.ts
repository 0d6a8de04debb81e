// Pure view-model builders: everything here is derived from API payloads
// and is unit-testable without a DOM.

import type {
  Candidate,
  CandidateSet,
  Coverage,
  Diagnosis,
  StageRow,
  StageStatus,
} from "./types.js";

export interface StageActions {
  canRun: boolean;
  canConfirm: boolean;
  canReject: boolean;
  canReopen: boolean;
}

export function stageActions(stages: StageRow[], index: number): StageActions {
  const status: StageStatus = stages[index].status;
  const predecessorsConfirmed = stages.slice(0, index).every((s) => s.status === "Confirmed");
  return {
    canRun: predecessorsConfirmed && status !== "Confirmed",
    canConfirm: status === "AwaitingConfirmation",
    canReject: status === "AwaitingConfirmation",
    canReopen: status === "Confirmed",
  };
}

export interface CandidateRow {
  mappingId: string | null;
  source: string;
  target: string;
  confidence: number;
  origin: string;
  rationale: string;
  construct: string;
  tag: string;
  checksPassed: boolean;
  failingChecks: string[];
  verdict: string;
  canDecide: boolean;
}

export function candidateRows(set: CandidateSet): CandidateRow[] {
  const rows = set.candidates.map((c: Candidate): CandidateRow => {
    const mapping = c.mapping;
    const failing = mapping ? mapping.checks.filter((ch) => !ch.passed).map((ch) => ch.name) : [];
    return {
      mappingId: mapping ? mapping.mapping_id : null,
      source: c.source_name,
      target: c.target_name,
      confidence: c.confidence,
      origin: c.origin,
      rationale: c.rationale,
      construct: mapping ? mapping.construct : "",
      tag: mapping ? mapping.effective_tag : "",
      checksPassed: mapping ? failing.length === 0 : false,
      failingChecks: failing,
      verdict: mapping ? mapping.verdict.status : "",
      canDecide: Boolean(mapping && mapping.verdict.status === "Pending"),
    };
  });
  // highest confidence first; names break ties so the table is stable
  rows.sort((a, b) => b.confidence - a.confidence || a.source.localeCompare(b.source) || a.target.localeCompare(b.target));
  return rows;
}

export interface PackageLine {
  text: string;
  kind: "alias" | "allocation" | "rationale" | "import" | "plain";
  rationale?: { confidence: string; rationale: string; origin: string };
}

const RATIONALE_RE = /confidence: ([0-9.]+); rationale: (.*); origin: (Heuristic|Provider|User)/;

export function packageLines(text: string): PackageLine[] {
  return text.split("\n").map((line): PackageLine => {
    const trimmed = line.trim();
    if (trimmed.startsWith("alias ")) {
      return { text: line, kind: "alias" };
    }
    if (trimmed.startsWith("#") || trimmed.startsWith("allocation ")) {
      return { text: line, kind: "allocation" };
    }
    if (trimmed.startsWith("comment about ")) {
      const match = RATIONALE_RE.exec(trimmed);
      if (match) {
        return {
          text: line,
          kind: "rationale",
          rationale: { confidence: match[1], rationale: match[2], origin: match[3] },
        };
      }
      return { text: line, kind: "rationale" };
    }
    if (trimmed.includes("import ")) {
      return { text: line, kind: "import" };
    }
    return { text: line, kind: "plain" };
  });
}

// Pre-filled skeleton in the correction-prompt style the pipeline expects:
// say what is wrong, state the right form, state the constraint.
export function correctionTemplate(): string {
  return "<construct> is wrong. right form: <correct form>. <constraint that must hold>.";
}

export interface CoverageRowView {
  model: string;
  matched: number;
  explicitlyUnmatched: number;
  unprocessed: number;
  total: number;
}

export function coverageRows(coverage: Coverage): CoverageRowView[] {
  return [coverage.source, coverage.target].map((side) => ({
    model: side.model_name,
    matched: side.matched.length,
    explicitlyUnmatched: side.explicitly_unmatched.length,
    unprocessed: side.unprocessed.length,
    total: side.total_eligible,
  }));
}

export interface DiagnosisRowView {
  group: string;
  severity: string;
  message: string;
}

export function diagnosisRows(diagnosis: Diagnosis): DiagnosisRowView[] {
  const rows: DiagnosisRowView[] = [];
  for (const group of Object.keys(diagnosis).sort()) {
    for (const item of diagnosis[group]) {
      rows.push({ group, severity: item.severity, message: item.message });
    }
  }
  return rows;
}

export function describeError(err: unknown): string {
  if (err && typeof err === "object" && "code" in err && "message" in err) {
    const e = err as { code: string; message: string };
    return `[${e.code}] ${e.message}`;
  }
  return String(err);
}
