// Typed client for the terminology service. All UI traffic funnels
// through here; the annotator id rides along as a header and every
// response's X-Store-Version is reported to the caller.

import {
  ApiError, AuditEventView, ConceptResource, ConceptSummary,
  NeighborhoodView, Proposal, SearchRow, ServiceError, TaskView,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ApiOptions {
  baseUrl: string;
  fetchImpl?: FetchLike;
  annotator?: () => string;
  onVersion?: (version: number) => void;
}

export class ApiClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;
  private annotator: () => string;
  private onVersion: (version: number) => void;

  constructor(options: ApiOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.fetchImpl = options.fetchImpl ?? ((url, init) => fetch(url, init));
    this.annotator = options.annotator ?? (() => "anonymous");
    this.onVersion = options.onVersion ?? (() => undefined);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        "Content-Type": "application/json",
        "X-Annotator": this.annotator(),
      },
    };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const version = response.headers.get("X-Store-Version");
    if (version !== null) this.onVersion(parseInt(version, 10));
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let message = response.statusText;
      try {
        const payload = (await response.json()) as ApiError;
        if (payload.error) {
          code = payload.error.code;
          message = payload.error.message;
        }
      } catch {
        // non-JSON error body; keep the HTTP status text
      }
      throw new ServiceError(code, message, response.status);
    }
    return (await response.json()) as T;
  }

  roots(): Promise<ConceptSummary[]> {
    return this.request<{ roots: ConceptSummary[] }>("GET", "/api/roots")
      .then((body) => body.roots);
  }

  concept(cui: string): Promise<ConceptResource> {
    return this.request("GET", `/api/concepts/${cui}`);
  }

  children(cui: string): Promise<ConceptSummary[]> {
    return this.request<{ children: ConceptSummary[] }>(
      "GET", `/api/concepts/${cui}/children`).then((body) => body.children);
  }

  neighborhood(cui: string, radius = 1): Promise<NeighborhoodView> {
    return this.request("GET",
      `/api/concepts/${cui}/neighborhood?radius=${radius}`);
  }

  search(q: string, scope: "global" | "subtree" = "global",
         root?: string): Promise<SearchRow[]> {
    const params = new URLSearchParams({ q, scope });
    if (root) params.set("root", root);
    return this.request<{ results: SearchRow[] }>(
      "GET", `/api/search?${params.toString()}`).then((body) => body.results);
  }

  createConcept(label: string, parent: string | null,
                language = "en"): Promise<ConceptResource> {
    return this.request("POST", "/api/concepts", { label, parent, language });
  }

  reparent(cui: string, parent: string): Promise<ConceptResource> {
    return this.request("PATCH", `/api/concepts/${cui}`, { parent });
  }

  setPreferred(cui: string, aui: string): Promise<ConceptResource> {
    return this.request("PATCH", `/api/concepts/${cui}`, { preferred_aui: aui });
  }

  deleteConcept(cui: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/api/concepts/${cui}`);
  }

  addTerm(cui: string, text: string, language: string,
          source = "MANUAL"): Promise<ConceptResource> {
    return this.request("POST", `/api/concepts/${cui}/terms`,
      { text, language, source });
  }

  deleteTerm(aui: string): Promise<ConceptResource> {
    return this.request("DELETE", `/api/terms/${aui}`);
  }

  tasks(state?: string, assignee?: string): Promise<TaskView[]> {
    const params = new URLSearchParams();
    if (state) params.set("state", state);
    if (assignee) params.set("assignee", assignee);
    const suffix = params.size ? `?${params.toString()}` : "";
    return this.request<{ tasks: TaskView[] }>("GET", `/api/tasks${suffix}`)
      .then((body) => body.tasks);
  }

  task(id: string): Promise<TaskView> {
    return this.request("GET", `/api/tasks/${id}`);
  }

  createTasks(terms: string[], annotators: string[], seed = 0,
              perTerm = 3, groupCount = 5): Promise<TaskView[]> {
    return this.request<{ tasks: TaskView[] }>("POST", "/api/tasks", {
      terms, annotators, seed, per_term: perTerm, group_count: groupCount,
    }).then((body) => body.tasks);
  }

  vote(taskId: string, proposal: Proposal): Promise<TaskView> {
    return this.request("POST", `/api/tasks/${taskId}/votes`, { proposal });
  }

  resolve(taskId: string, force = false): Promise<TaskView> {
    return this.request("POST", `/api/tasks/${taskId}/resolve`, { force });
  }

  finalize(taskId: string, override?: Proposal): Promise<TaskView> {
    return this.request("POST", `/api/tasks/${taskId}/finalize`,
      { override: override ?? null });
  }

  audit(since: number): Promise<AuditEventView[]> {
    return this.request<{ events: AuditEventView[] }>(
      "GET", `/api/audit?since=${since}`).then((body) => body.events);
  }

  version(): Promise<number> {
    return this.request<{ events: AuditEventView[]; version: number }>(
      "GET", "/api/audit?since=2147483647").then((body) => body.version);
  }
}
