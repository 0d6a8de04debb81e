// Payload types mirroring the service's JSON envelopes (docs/api.md).
// The UI renders only what the API returns; it holds no pipeline logic.

export interface ApiError {
  code: "usage" | "validation" | "provider" | "gating";
  message: string;
}

export interface Envelope<T> {
  ok: boolean;
  data?: T;
  error?: ApiError;
}

export type StageStatus = "Pending" | "AwaitingConfirmation" | "Confirmed" | "Failed";

export interface TranscriptEntry {
  actor: "User" | "System" | "Provider";
  text: string;
  timestamp: string;
}

export interface StageRow {
  stage: number;
  name: string;
  status: StageStatus;
  attempts: number;
  artifacts: string[];
}

export interface SessionInfo {
  id: string;
  created_at: string;
  input_digests: Record<string, string>;
  config: Record<string, unknown>;
  stages: StageRow[];
}

export interface StageDetail {
  stage: number;
  status: StageStatus;
  attempts: number;
  artifacts: string[];
  transcript: TranscriptEntry[];
  pending_feedback: string[];
}

export interface CheckResult {
  name: string;
  passed: boolean;
  detail: string;
}

export interface Verdict {
  status: "Pending" | "Accepted" | "Rejected" | "Modified";
  actor: string | null;
  at: string | null;
  note: string | null;
}

export interface MappingInfo {
  mapping_id: string;
  construct: "AliasBinding" | "TaggedAllocation";
  proposed_tag: string;
  effective_tag: string;
  checks: CheckResult[];
  verdict: Verdict;
}

export interface Candidate {
  source_uid: string;
  target_uid: string;
  source_name: string;
  target_name: string;
  confidence: number;
  rationale: string;
  features: Record<string, number>;
  origin: string;
  mapping?: MappingInfo;
}

export interface UnmatchedRecord {
  uid: string;
  note: string | null;
  actor: string;
  timestamp: string;
}

export interface CandidateSet {
  source_model: string;
  target_model: string;
  candidates: Candidate[];
  unmatched_source: string[];
  unmatched_target: string[];
  explicitly_unmatched?: UnmatchedRecord[];
  focus: string | null;
}

export interface CoverageSide {
  model_name: string;
  total_eligible: number;
  matched: string[];
  explicitly_unmatched: string[];
  unprocessed: string[];
}

export interface Coverage {
  source: CoverageSide;
  target: CoverageSide;
}

export interface DiagnosticItem {
  severity: "error" | "warning" | "info";
  code: string;
  message: string;
  span: unknown;
}

export type Diagnosis = Record<string, DiagnosticItem[]>;
