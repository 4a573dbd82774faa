// Orchestration: every user gesture lands here, calls the service, and
// folds the response (or the rejection) back into the state store. The
// client never invents state; panels re-render from service payloads.

import { ApiClient } from "./api.js";
import { StateStore } from "./state.js";
import { ConceptSummary, Proposal, ServiceError } from "./types.js";

function summaryOf(resource: { cui: string; code: string; label: string;
                               language: string | null; leaf: boolean;
                               parent: string | null }): ConceptSummary {
  const { cui, code, label, language, leaf, parent } = resource;
  return { cui, code, label, language, leaf, parent };
}

export class Controller {
  constructor(public api: ApiClient, public store: StateStore,
              private debounceMs = 250) {}

  private searchTimer: ReturnType<typeof setTimeout> | null = null;
  private lastSynced = 0;

  private fail(error: unknown): void {
    if (error instanceof ServiceError) {
      // surface service errors verbatim
      this.store.update((s) => { s.notice = `${error.code}: ${error.message}`; });
    } else {
      this.store.update((s) => { s.offline = true; });
    }
  }

  private online(): void {
    if (this.store.state.offline) {
      this.store.update((s) => { s.offline = false; });
    }
  }

  // --- bootstrap ------------------------------------------------------------

  async start(): Promise<void> {
    const roots = await this.api.roots();
    this.store.putSummaries(roots);
    this.store.update((s) => { s.rootIds = roots.map((r) => r.cui); });
    await this.refreshTasks();
    await this.tailAudit();
    this.online();
  }

  // --- tree -----------------------------------------------------------------

  async toggle(cui: string): Promise<void> {
    const node = this.store.state.nodes[cui];
    if (!node) return;
    if (this.store.state.expanded.has(cui)) {
      this.store.update((s) => { s.expanded.delete(cui); });
      return;
    }
    if (node.childIds === null) {
      this.store.setChildren(cui, await this.api.children(cui));
    }
    this.store.update((s) => { s.expanded.add(cui); });
  }

  async select(cui: string): Promise<void> {
    const resource = await this.api.concept(cui);
    this.store.putSummaries([summaryOf(resource), ...resource.children]);
    this.store.setChildren(resource.cui, resource.children);
    this.store.update((s) => {
      s.selectedCui = resource.cui;
      s.selected = resource;
      s.notice = null;
    });
  }

  /** Select and expand every ancestor so the node is visible. */
  async reveal(cui: string): Promise<void> {
    await this.select(cui);
    const path: string[] = [];
    let parent = this.store.state.selected?.parent ?? null;
    while (parent !== null) {
      path.push(parent);
      let node = this.store.state.nodes[parent];
      if (!node) {
        const resource = await this.api.concept(parent);
        this.store.putSummaries([summaryOf(resource)]);
        node = this.store.state.nodes[parent];
      }
      parent = node.summary.parent;
    }
    for (const ancestor of path.reverse()) {
      if (this.store.state.nodes[ancestor].childIds === null) {
        this.store.setChildren(ancestor, await this.api.children(ancestor));
      }
      this.store.update((s) => { s.expanded.add(ancestor); });
    }
  }

  async dragReparent(dragged: string, target: string): Promise<void> {
    if (this.store.state.offline) {
      this.store.update((s) => { s.notice = "offline - edits disabled"; });
      return;
    }
    if (dragged === target || this.store.knownDescendant(dragged, target)) {
      this.store.update((s) => {
        s.notice = "cannot move a concept into its own subtree";
      });
      return;
    }
    const node = this.store.state.nodes[dragged];
    const before = { ...node.summary };
    const editId = this.store.beginEdit(`reparent ${dragged}`, () => {
      this.store.putSummaries([before]);
    });
    // optimistic: move now, let the response bring the new code
    this.store.putSummaries([{ ...before, parent: target }]);
    try {
      const resource = await this.api.reparent(dragged, target);
      this.store.putSummaries([summaryOf(resource), ...resource.children]);
      this.store.setChildren(resource.cui, resource.children);
      await this.refreshChildren(before.parent);
      await this.refreshChildren(target);
      this.store.commitEdit(editId);
      if (this.store.state.selectedCui === dragged) await this.select(dragged);
      await this.tailAudit();
    } catch (error) {
      if (error instanceof ServiceError) {
        this.store.rollbackEdit(editId, `${error.code}: ${error.message}`);
      } else {
        this.store.rollbackEdit(editId, "network failure");
        this.store.update((s) => { s.offline = true; });
      }
    }
  }

  private async refreshChildren(cui: string | null): Promise<void> {
    if (cui === null) return;
    const node = this.store.state.nodes[cui];
    if (node && node.childIds !== null) {
      this.store.setChildren(cui, await this.api.children(cui));
    }
  }

  // --- synonym panel -------------------------------------------------------------

  async addSynonym(text: string, language: string): Promise<void> {
    const cui = this.store.state.selectedCui;
    if (!cui) return;
    try {
      const before = this.store.state.selected?.atoms.length ?? 0;
      const resource = await this.api.addTerm(cui, text, language);
      this.store.update((s) => {
        s.selected = resource;
        if (resource.atoms.length === before) {
          s.notice = "synonym already attached (no change)";
        }
      });
      await this.tailAudit();
      this.online();
    } catch (error) {
      this.fail(error);
    }
  }

  async deleteSynonym(aui: string): Promise<void> {
    const selected = this.store.state.selected;
    if (!selected) return;
    const atom = selected.atoms.find((a) => a.aui === aui);
    if (atom?.preferred) {
      this.store.update((s) => {
        s.notice = "this is the preferred term - star another one first";
      });
      return;
    }
    try {
      const resource = await this.api.deleteTerm(aui);
      this.store.update((s) => { s.selected = resource; });
      await this.tailAudit();
    } catch (error) {
      this.fail(error);
    }
  }

  async starPreferred(aui: string): Promise<void> {
    const cui = this.store.state.selectedCui;
    if (!cui) return;
    try {
      const resource = await this.api.setPreferred(cui, aui);
      this.store.update((s) => { s.selected = resource; });
      await this.tailAudit();
    } catch (error) {
      this.fail(error);
    }
  }

  /** Concept-code entry: descend the tree by code prefix and reveal. */
  async jumpToCode(code: string): Promise<void> {
    const covers = (c: ConceptSummary) =>
      code === c.code || code.startsWith(c.code + ".");
    const roots = await this.api.roots();
    let current: ConceptSummary | undefined = roots.find(covers);
    while (current && current.code !== code) {
      const children = await this.api.children(current.cui);
      current = children.find(covers);
    }
    if (!current) {
      this.store.update((s) => { s.notice = `no concept with code ${code}`; });
      return;
    }
    await this.reveal(current.cui);
  }

  // --- search ------------------------------------------------------------------------

  searchInput(text: string): void {
    this.store.update((s) => { s.searchText = text; });
    if (this.searchTimer !== null) clearTimeout(this.searchTimer);
    this.searchTimer = setTimeout(() => {
      void this.runSearch();
    }, this.debounceMs);
  }

  async runSearch(): Promise<void> {
    const { searchText, searchScope, selectedCui } = this.store.state;
    if (!searchText.trim()) {
      this.store.update((s) => { s.searchResults = []; });
      return;
    }
    try {
      const root = searchScope === "subtree" && selectedCui
        ? selectedCui : undefined;
      const results = await this.api.search(searchText,
        root ? "subtree" : "global", root);
      this.store.update((s) => { s.searchResults = results; });
    } catch (error) {
      this.fail(error);
    }
  }

  setScope(scope: "global" | "subtree"): void {
    this.store.update((s) => { s.searchScope = scope; });
    void this.runSearch();
  }

  // --- review queue ---------------------------------------------------------------------

  async refreshTasks(): Promise<void> {
    const tasks = await this.api.tasks();
    this.store.update((s) => { s.tasks = tasks; });
  }

  private async voteAndRefresh(taskId: string, proposal: Proposal): Promise<void> {
    try {
      await this.api.vote(taskId, proposal);
      await this.refreshTasks();
      await this.tailAudit();
    } catch (error) {
      this.fail(error);
    }
  }

  voteExisting(taskId: string, cui: string): Promise<void> {
    return this.voteAndRefresh(taskId, { kind: "existing_concept", cui });
  }

  voteNew(taskId: string, label: string, parent: string | null): Promise<void> {
    return this.voteAndRefresh(taskId, { kind: "new_concept", label, parent });
  }

  voteNotSymptom(taskId: string): Promise<void> {
    return this.voteAndRefresh(taskId, { kind: "not_a_symptom" });
  }

  async resolveTask(taskId: string): Promise<void> {
    try {
      await this.api.resolve(taskId);
      await this.refreshTasks();
      await this.tailAudit();
    } catch (error) {
      this.fail(error);
    }
  }

  async finalizeTask(taskId: string, overrideCui?: string): Promise<void> {
    try {
      const override: Proposal | undefined = overrideCui
        ? { kind: "existing_concept", cui: overrideCui } : undefined;
      await this.api.finalize(taskId, override);
      await this.refreshTasks();
      if (this.store.state.selectedCui) {
        await this.select(this.store.state.selectedCui);
      }
      await this.tailAudit();
    } catch (error) {
      this.fail(error);
    }
  }

  // --- audit + freshness -------------------------------------------------------------------

  async tailAudit(): Promise<void> {
    const events = await this.api.audit(this.store.state.auditCursor);
    if (!events.length) return;
    this.store.update((s) => {
      s.auditRows = s.auditRows.concat(events);   // newest last
      s.auditCursor = events[events.length - 1].seq;
    });
  }

  /** Poll the store version; on movement, refresh queue and audit so
   *  other users' edits become visible. */
  async pollVersion(): Promise<void> {
    try {
      const version = await this.api.version();
      this.online();
      if (version !== this.lastSynced) {
        this.lastSynced = version;
        await this.refreshTasks();
        await this.tailAudit();
        if (this.store.state.selectedCui) {
          await this.select(this.store.state.selectedCui);
        }
      }
    } catch {
      this.store.update((s) => { s.offline = true; });
    }
  }
}
