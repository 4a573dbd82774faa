// Payload shapes of the terminology service API.

export interface ConceptSummary {
  cui: string;
  code: string;
  label: string;
  language: string | null;
  leaf: boolean;
  parent: string | null;
}

export interface AtomView {
  aui: string;
  sui: string;
  text: string;
  language: string;
  source: string;
  source_code: string | null;
  preferred: boolean;
}

export interface ContextView {
  id: string;
  kind: string;
  text: string;
  source: string;
}

export interface ConceptResource extends ConceptSummary {
  status: string;
  preferred_aui: string | null;
  atoms: AtomView[];
  contexts: ContextView[];
  children: ConceptSummary[];
  forwarded_from?: string;
}

export interface SearchRow {
  concept: string;
  matched_term: string;
  match_kind: "preferred" | "synonym";
  exact: boolean;
  snippet: string | null;
  label: string;
  code: string;
}

export interface NeighborhoodView {
  center: string;
  radius: number;
  nodes: ConceptSummary[];
  edges: [string, string][];
}

export interface Proposal {
  kind: "existing_concept" | "new_concept" | "not_a_symptom";
  cui?: string | null;
  label?: string | null;
  parent?: string | null;
}

export interface VoteView {
  task_id: string;
  annotator: string;
  proposal: Proposal;
  at: string | null;
}

export interface TaskView {
  id: string;
  term: string;
  group: number;
  assignees: string[];
  votes: VoteView[];
  state: "Open" | "Consensus" | "Escalated" | "Finalized";
  resolved: Proposal | null;
  applied: Record<string, string> | null;
}

export interface AuditEventView {
  seq: number;
  actor: string;
  action: string;
  payload: Record<string, unknown>;
  at: string | null;
}

export interface ApiError {
  error: { code: string; message: string };
}

export class ServiceError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}
