// Client state: one observable snapshot of everything the panels render.
// Optimistic edits are kept as undo records keyed by request id so a
// service rejection rolls the tree back to exactly the pre-edit render.

import { AuditEventView, ConceptResource, ConceptSummary, SearchRow, TaskView } from "./types.js";

export interface TreeNode {
  summary: ConceptSummary;
  childIds: string[] | null; // null until lazily loaded
}

export interface PendingEdit {
  id: number;
  description: string;
  undo: () => void;
}

export interface UiState {
  annotator: string;
  storeVersion: number;
  rootIds: string[];
  nodes: Record<string, TreeNode>;
  expanded: Set<string>;
  selectedCui: string | null;
  selected: ConceptResource | null;
  searchText: string;
  searchScope: "global" | "subtree";
  searchResults: SearchRow[];
  tasks: TaskView[];
  queueCursor: number;
  auditRows: AuditEventView[];
  auditCursor: number;
  pending: Map<number, PendingEdit>;
  notice: string | null; // transient banner (errors, idempotent no-ops)
  offline: boolean;
}

export function initialState(annotator = "anonymous"): UiState {
  return {
    annotator,
    storeVersion: 0,
    rootIds: [],
    nodes: {},
    expanded: new Set(),
    selectedCui: null,
    selected: null,
    searchText: "",
    searchScope: "global",
    searchResults: [],
    tasks: [],
    queueCursor: 0,
    auditRows: [],
    auditCursor: 0,
    pending: new Map(),
    notice: null,
    offline: false,
  };
}

export type Listener = (state: UiState) => void;

export class StateStore {
  private listeners: Listener[] = [];
  private nextEditId = 1;

  constructor(public state: UiState = initialState()) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  update(mutate: (state: UiState) => void): void {
    mutate(this.state);
    for (const listener of this.listeners) listener(this.state);
  }

  // --- tree cache -----------------------------------------------------------

  putSummaries(summaries: ConceptSummary[]): void {
    this.update((s) => {
      for (const summary of summaries) {
        const existing = s.nodes[summary.cui];
        s.nodes[summary.cui] = {
          summary,
          childIds: existing ? existing.childIds : null,
        };
      }
    });
  }

  setChildren(cui: string, children: ConceptSummary[]): void {
    this.putSummaries(children);
    this.update((s) => {
      const node = s.nodes[cui];
      if (node) node.childIds = children.map((c) => c.cui);
    });
  }

  /** Loaded ancestor chain check: true when `maybeDesc` is reachable
   *  from `cui` via cached parent links. Unknown links report false;
   *  the service remains the authority. */
  knownDescendant(cui: string, maybeDesc: string): boolean {
    let walk: string | null = maybeDesc;
    const seen = new Set<string>();
    while (walk !== null && !seen.has(walk)) {
      if (walk === cui) return true;
      seen.add(walk);
      walk = this.state.nodes[walk]?.summary.parent ?? null;
    }
    return false;
  }

  // --- optimistic edits ----------------------------------------------------------

  beginEdit(description: string, undo: () => void): number {
    const id = this.nextEditId++;
    this.update((s) => {
      s.pending.set(id, { id, description, undo });
    });
    return id;
  }

  commitEdit(id: number): void {
    this.update((s) => {
      s.pending.delete(id);
    });
  }

  rollbackEdit(id: number, notice: string): void {
    const edit = this.state.pending.get(id);
    this.update((s) => {
      s.pending.delete(id);
      s.notice = notice;
    });
    if (edit) edit.undo();
  }
}
