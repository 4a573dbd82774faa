// Render functions: UI state in, virtual nodes out. No DOM access here,
// so every panel is testable as a pure function; dom.ts materializes the
// tree in the browser.

import { UiState } from "./state.js";
import { AtomView, TaskView } from "./types.js";

export type Handler = (payload?: unknown) => void;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  on: Record<string, Handler>;
  children: (VNode | string)[];
}

export function h(tag: string, attrs: Record<string, string> = {},
                  children: (VNode | string)[] = [],
                  on: Record<string, Handler> = {}): VNode {
  return { tag, attrs, on, children };
}

export function textOf(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}

export function findAll(node: VNode | string,
                        predicate: (n: VNode) => boolean): VNode[] {
  if (typeof node === "string") return [];
  const here = predicate(node) ? [node] : [];
  return here.concat(...node.children.map((c) => findAll(c, predicate)));
}

export function findByClass(node: VNode, className: string): VNode[] {
  return findAll(node, (n) =>
    (n.attrs["class"] ?? "").split(" ").includes(className));
}

// --- tree panel -------------------------------------------------------------

export interface TreeHandlers {
  onToggle: (cui: string) => void;
  onSelect: (cui: string) => void;
  onDrop: (dragged: string, target: string) => void;
}

function treeNode(state: UiState, cui: string, handlers: TreeHandlers): VNode {
  const node = state.nodes[cui];
  const expanded = state.expanded.has(cui);
  const selected = state.selectedCui === cui;
  const row = h("div", {
    class: "tree-row" + (selected ? " selected" : ""),
    "data-cui": cui,
    draggable: "true",
  }, [
    h("span", { class: "expander" },
      [node.summary.leaf ? "·" : expanded ? "▾" : "▸"],
      { click: () => handlers.onToggle(cui) }),
    h("span", { class: "tree-label" }, [node.summary.label],
      { click: () => handlers.onSelect(cui) }),
    h("span", { class: "code-badge" }, [node.summary.code]),
  ], {
    drop: (payload) => handlers.onDrop(String(payload), cui),
  });
  const children = expanded && node.childIds
    ? [h("ul", { class: "tree-children" },
        node.childIds.map((child) => treeNode(state, child, handlers)))]
    : [];
  return h("li", { class: "tree-node" }, [row, ...children]);
}

export function treePanel(state: UiState, handlers: TreeHandlers): VNode {
  return h("ul", { class: "tree-panel" },
    state.rootIds.map((cui) => treeNode(state, cui, handlers)));
}

// --- synonym / detail panel ----------------------------------------------------

export interface SynonymHandlers {
  onAddTerm: (text: string, language: string) => void;
  onDeleteTerm: (aui: string) => void;
  onStar: (aui: string) => void;
  onJumpToCode: (code: string) => void;
}

function atomRow(atom: AtomView, handlers: SynonymHandlers): VNode {
  return h("li", { class: "atom-row", "data-aui": atom.aui }, [
    h("span", { class: "star" + (atom.preferred ? " preferred" : "") },
      [atom.preferred ? "★" : "☆"], { click: () => handlers.onStar(atom.aui) }),
    h("span", { class: "atom-text" }, [atom.text]),
    h("span", { class: "lang-badge" }, [atom.language]),
    h("span", { class: "source-badge" }, [atom.source]),
    h("button", {
      class: "delete-term",
      ...(atom.preferred ? { disabled: "true",
                             title: "re-star another term first" } : {}),
    }, ["×"], { click: () => handlers.onDeleteTerm(atom.aui) }),
  ]);
}

export function synonymPanel(state: UiState, handlers: SynonymHandlers): VNode {
  if (!state.selected) {
    return h("div", { class: "synonym-panel empty" }, ["select a concept"]);
  }
  const concept = state.selected;
  const neighborhood = h("div", { class: "network-view" }, [
    h("div", { class: "network-title" }, ["nearby concepts"]),
    h("ul", {}, [
      ...(concept.parent ? [h("li", { class: "network-node parent" },
        [state.nodes[concept.parent]?.summary.label ?? concept.parent])] : []),
      ...concept.children.map((child) =>
        h("li", { class: "network-node child" }, [child.label])),
    ]),
  ]);
  return h("div", { class: "synonym-panel" }, [
    h("h2", {}, [concept.label]),
    h("div", { class: "concept-code code-badge" }, [concept.code]),
    h("div", { class: "concept-status" }, [concept.status]),
    h("ul", { class: "atom-list" },
      concept.atoms.map((atom) => atomRow(atom, handlers))),
    h("form", { class: "add-term" }, [
      h("input", { name: "text", placeholder: "new synonym" }),
      h("select", { name: "language" }, [
        h("option", { value: "zh" }, ["zh"]),
        h("option", { value: "en" }, ["en"]),
      ]),
      h("button", { type: "submit" }, ["add"]),
    ], {
      submit: (payload) => {
        const data = payload as { text: string; language: string };
        handlers.onAddTerm(data.text, data.language);
      },
    }),
    h("form", { class: "code-jump" }, [
      h("input", { name: "code", placeholder: "jump to code" }),
      h("button", { type: "submit" }, ["go"]),
    ], { submit: (payload) => handlers.onJumpToCode(String(payload)) }),
    neighborhood,
    ...concept.contexts.map((ctx) =>
      h("blockquote", { class: `context ${ctx.kind}` }, [ctx.text])),
  ]);
}

// --- search box ------------------------------------------------------------------

export interface SearchHandlers {
  onInput: (text: string) => void;
  onScope: (scope: "global" | "subtree") => void;
  onPick: (cui: string) => void;
}

export function searchBox(state: UiState, handlers: SearchHandlers): VNode {
  return h("div", { class: "search-box" }, [
    h("input", { class: "search-input", value: state.searchText,
                 placeholder: "search terms" },
      [], { input: (payload) => handlers.onInput(String(payload)) }),
    h("button", {
      class: "scope-toggle" + (state.searchScope === "subtree" ? " local" : ""),
    }, [state.searchScope === "subtree" ? "local" : "global"], {
      click: () => handlers.onScope(
        state.searchScope === "subtree" ? "global" : "subtree"),
    }),
    h("ul", { class: "search-results" }, state.searchResults.map((row) =>
      h("li", {
        class: "search-result" + (row.exact ? " exact" : ""),
        "data-cui": row.concept,
      }, [
        h("span", { class: "result-label" }, [row.label]),
        h("span", { class: "result-match" },
          [`${row.matched_term} (${row.match_kind})`]),
        h("span", { class: "code-badge" }, [row.code]),
      ], { click: () => handlers.onPick(row.concept) }))),
  ]);
}

// --- review queue ---------------------------------------------------------------------

export interface QueueHandlers {
  onVoteExisting: (taskId: string, cui: string) => void;
  onVoteNew: (taskId: string, label: string, parent: string | null) => void;
  onVoteNotSymptom: (taskId: string) => void;
  onResolve: (taskId: string) => void;
  onFinalize: (taskId: string, overrideCui?: string) => void;
}

function proposalText(task: TaskView): string[] {
  return task.votes.map((vote) => {
    const p = vote.proposal;
    if (p.kind === "existing_concept") return `${vote.annotator}: ${p.cui}`;
    if (p.kind === "new_concept") return `${vote.annotator}: new "${p.label}"`;
    return `${vote.annotator}: not a symptom`;
  });
}

function taskCard(state: UiState, task: TaskView, handlers: QueueHandlers): VNode {
  const mine = task.assignees.includes(state.annotator);
  const voted = task.votes.some((v) => v.annotator === state.annotator);
  const children: (VNode | string)[] = [
    h("div", { class: "task-term" }, [task.term]),
    h("div", { class: "task-state" }, [task.state]),
    h("div", { class: "task-votes" },
      [`${task.votes.length}/${task.assignees.length} votes`]),
  ];
  if (task.state === "Open" && mine && !voted) {
    children.push(h("form", { class: "vote-form" }, [
      h("input", { name: "cui", placeholder: "existing concept id" }),
      h("button", { type: "submit" }, ["map to concept"]),
    ], { submit: (payload) =>
          handlers.onVoteExisting(task.id, String(payload)) }));
    children.push(h("button", { class: "vote-nas" }, ["not a symptom"],
      { click: () => handlers.onVoteNotSymptom(task.id) }));
  } else if (task.state === "Open") {
    children.push(h("div", { class: "read-only" },
      [voted ? "vote recorded" : "assigned to others"]));
  }
  if (task.state === "Open"
      && task.votes.length === task.assignees.length) {
    children.push(h("button", { class: "resolve" }, ["resolve"],
      { click: () => handlers.onResolve(task.id) }));
  }
  if (task.state === "Escalated") {
    children.push(h("ul", { class: "conflict" },
      proposalText(task).map((t) => h("li", { class: "conflict-vote" }, [t]))));
    children.push(h("form", { class: "override-form" }, [
      h("input", { name: "cui", placeholder: "override concept id" }),
      h("button", { type: "submit" }, ["finalize with override"]),
    ], { submit: (payload) =>
          handlers.onFinalize(task.id, String(payload)) }));
  }
  if (task.state === "Consensus") {
    children.push(h("button", { class: "finalize" }, ["finalize"],
      { click: () => handlers.onFinalize(task.id) }));
  }
  return h("div", { class: `task-card ${task.state.toLowerCase()}`,
                    "data-task": task.id }, children);
}

export function reviewQueue(state: UiState, handlers: QueueHandlers): VNode {
  return h("div", { class: "review-queue" },
    state.tasks.map((task) => taskCard(state, task, handlers)));
}

// --- audit pane ------------------------------------------------------------------------

export function auditPane(state: UiState): VNode {
  return h("table", { class: "audit-pane" }, [
    h("tbody", {}, state.auditRows.map((event) =>
      h("tr", { class: "audit-row", "data-seq": String(event.seq) }, [
        h("td", { class: "audit-seq" }, [String(event.seq)]),
        h("td", { class: "audit-actor" }, [event.actor]),
        h("td", { class: "audit-action" }, [event.action]),
        h("td", { class: "audit-payload" },
          [JSON.stringify(event.payload).slice(0, 120)]),
      ]))),
  ]);
}

// --- chrome -----------------------------------------------------------------------------

export function statusBar(state: UiState): VNode {
  return h("div", { class: "status-bar" }, [
    h("span", { class: "store-version" }, [`v${state.storeVersion}`]),
    h("span", { class: "annotator-id" }, [state.annotator]),
    ...(state.notice ? [h("span", { class: "notice" }, [state.notice])] : []),
    ...(state.offline ? [h("span", { class: "offline-banner" },
      ["offline - edits disabled"])] : []),
    ...(state.pending.size > 0 ? [h("span", { class: "pending-count" },
      [`${state.pending.size} pending`])] : []),
  ]);
}

export function app(state: UiState, tree: TreeHandlers, syn: SynonymHandlers,
                    searchH: SearchHandlers, queue: QueueHandlers): VNode {
  return h("div", { class: "app" }, [
    statusBar(state),
    h("div", { class: "columns" }, [
      h("div", { class: "left" }, [searchBox(state, searchH),
                                   treePanel(state, tree)]),
      h("div", { class: "right" }, [synonymPanel(state, syn),
                                    reviewQueue(state, queue)]),
    ]),
    auditPane(state),
  ]);
}
