// Shapes of the session API payloads the workbench consumes.  The UI holds
// no logic of its own: every rendered program, rank and diff comes straight
// from one of these documents.

export interface ClauseView {
  id: string;
  text: string;
  head: string;
  body: string[];
}

export interface DiffView {
  verdict: "equal" | "thinned" | "widened" | "mixed";
  predicate: string;
  missing: string[];
  extra: string[];
  imploded: boolean;
  detail: string;
}

export interface HistoryEntry {
  index: number;
  rule: string | null;
  safety: string | null;
  request: Record<string, unknown> | null;
  diff: DiffView | null;
}

export interface SessionState {
  session: string;
  revision: number;
  cursor: number;
  can_undo: boolean;
  can_redo: boolean;
  program: string;
  clauses: ClauseView[];
  history: HistoryEntry[];
}

export interface FolderRef {
  source: string;
  clause: string;
}

export interface CandidateScores {
  enables_fold: boolean;
  successful_path: boolean;
  variable_coordination: number;
  well_founded: boolean;
  size_penalty: number;
  unlinked: boolean;
  petitio_demoted: boolean;
}

export interface Candidate {
  literal: string;
  folder: FolderRef;
  insert_position: number;
  fold_positions: number[];
  scores: CandidateScores;
  rank: number;
}

export interface CandidatesResponse {
  clause: string;
  revision: number;
  candidates: Candidate[];
}

export interface FoldMatchView {
  folder: FolderRef;
  positions: number[];
  replacement: string;
}

export interface FoldsResponse {
  clause: string;
  revision: number;
  matches: FoldMatchView[];
}

export interface VerifyResponse {
  step: number;
  diff: DiffView;
  revision: number;
}

export type StepRequest = Record<string, unknown> & { rule: string };
