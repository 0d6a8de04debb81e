import { describe, expect, it } from "vitest";

import {
  candidateRows,
  correctionTemplate,
  coverageRows,
  diagnosisRows,
  packageLines,
  stageActions,
} from "../src/state.js";
import type { CandidateSet, Coverage, StageRow } from "../src/types.js";

function stages(statuses: string[]): StageRow[] {
  return statuses.map((status, stage) => ({
    stage,
    name: `stage ${stage}`,
    status: status as StageRow["status"],
    attempts: 1,
    artifacts: [],
  }));
}

describe("stageActions", () => {
  it("fresh session: only stage 0 is actionable", () => {
    const board = stages(["AwaitingConfirmation", "Pending", "Pending", "Pending", "Pending", "Pending", "Pending"]);
    expect(stageActions(board, 0)).toEqual({ canRun: true, canConfirm: true, canReject: true, canReopen: false });
    expect(stageActions(board, 1).canRun).toBe(false);
    expect(stageActions(board, 3).canConfirm).toBe(false);
  });

  it("stage after confirmed predecessors is runnable", () => {
    const board = stages(["Confirmed", "Confirmed", "Pending", "Pending", "Pending", "Pending", "Pending"]);
    expect(stageActions(board, 2).canRun).toBe(true);
    expect(stageActions(board, 3).canRun).toBe(false);
    expect(stageActions(board, 0).canReopen).toBe(true);
  });

  it("failed stage can be re-run when predecessors are confirmed", () => {
    const board = stages(["Confirmed", "Failed", "Pending", "Pending", "Pending", "Pending", "Pending"]);
    expect(stageActions(board, 1)).toEqual({ canRun: true, canConfirm: false, canReject: false, canReopen: false });
  });
});

function candidateSet(): CandidateSet {
  return {
    source_model: "S",
    target_model: "T",
    focus: null,
    unmatched_source: [],
    unmatched_target: [],
    candidates: [
      {
        source_uid: "s1", target_uid: "t1", source_name: "S::b", target_name: "T::x",
        confidence: 0.7, rationale: "r1", features: {}, origin: "Heuristic",
        mapping: {
          mapping_id: "s1-t1", construct: "TaggedAllocation", proposed_tag: "FullyMatched",
          effective_tag: "FullyMatched",
          checks: [{ name: "end_kind", passed: true, detail: "" }],
          verdict: { status: "Pending", actor: null, at: null, note: null },
        },
      },
      {
        source_uid: "s2", target_uid: "t2", source_name: "S::a", target_name: "T::y",
        confidence: 0.9, rationale: "r2", features: {}, origin: "Provider",
        mapping: {
          mapping_id: "s2-t2", construct: "TaggedAllocation", proposed_tag: "RequireModification",
          effective_tag: "RequireModification",
          checks: [{ name: "end_kind", passed: false, detail: "def end" }],
          verdict: { status: "Rejected", actor: "User", at: "t", note: null },
        },
      },
    ],
  };
}

describe("candidateRows", () => {
  it("sorts by confidence descending and carries verdict state", () => {
    const rows = candidateRows(candidateSet());
    expect(rows.map((r) => r.mappingId)).toEqual(["s2-t2", "s1-t1"]);
    expect(rows[0].canDecide).toBe(false);
    expect(rows[0].failingChecks).toEqual(["end_kind"]);
    expect(rows[1].canDecide).toBe(true);
    expect(rows[1].checksPassed).toBe(true);
  });

  it("handles candidate sets before verification (no mapping blocks)", () => {
    const set = candidateSet();
    for (const c of set.candidates) delete c.mapping;
    const rows = candidateRows(set);
    expect(rows.every((r) => r.mappingId === null && !r.canDecide)).toBe(true);
  });
});

describe("packageLines", () => {
  it("classifies construct, rationale, and import lines", () => {
    const text = [
      "package Alignment {",
      "    private import OEM::*;",
      "    alias X for OEM::A;",
      "    comment about X /* confidence: 0.90; rationale: same thing; origin: Heuristic */",
      "    #FullyMatched allocation m1 OEM::a to SUP::b;",
      "}",
    ].join("\n");
    const kinds = packageLines(text).map((l) => l.kind);
    expect(kinds).toEqual(["plain", "import", "alias", "rationale", "allocation", "plain"]);
    const rationale = packageLines(text)[3].rationale;
    expect(rationale).toEqual({ confidence: "0.90", rationale: "same thing", origin: "Heuristic" });
  });
});

describe("panels", () => {
  it("coverage rows summarize both sides", () => {
    const coverage: Coverage = {
      source: { model_name: "S", total_eligible: 5, matched: ["a"], explicitly_unmatched: ["b"], unprocessed: ["c", "d", "e"] },
      target: { model_name: "T", total_eligible: 2, matched: ["x", "y"], explicitly_unmatched: [], unprocessed: [] },
    };
    expect(coverageRows(coverage)).toEqual([
      { model: "S", matched: 1, explicitlyUnmatched: 1, unprocessed: 3, total: 5 },
      { model: "T", matched: 2, explicitlyUnmatched: 0, unprocessed: 0, total: 2 },
    ]);
  });

  it("diagnosis rows flatten groups in stable order", () => {
    const rows = diagnosisRows({
      Structure: [],
      ExtensionConsistency: [{ severity: "warning", code: "c", message: "m", span: null }],
    });
    expect(rows).toEqual([{ group: "ExtensionConsistency", severity: "warning", message: "m" }]);
  });

  it("correction template has the expected skeleton", () => {
    expect(correctionTemplate()).toContain("right form:");
  });
});
