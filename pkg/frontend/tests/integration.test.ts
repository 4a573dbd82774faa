// End-to-end flows against a live terminology service. The suite boots
// the Python server on a scratch store and drives the UI controller
// through the HTTP API only, asserting on rendered panels.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import { initialState, StateStore } from "../src/state.js";
import {
  auditPane, findByClass, reviewQueue, synonymPanel, textOf, treePanel, VNode,
} from "../src/views.js";

const PORT = 8876 + Math.floor(Math.random() * 100);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let storeDir: string;

function makeSession(annotator: string) {
  const store = new StateStore(initialState(annotator));
  const api = new ApiClient({
    baseUrl: BASE,
    annotator: () => store.state.annotator,
    onVersion: (v) => {
      if (v !== store.state.storeVersion) {
        store.update((s) => { s.storeVersion = v; });
      }
    },
  });
  return { store, controller: new Controller(api, store, 0) };
}

function renderTree(store: StateStore): VNode {
  return treePanel(store.state, {
    onToggle: () => undefined, onSelect: () => undefined,
    onDrop: () => undefined,
  });
}

function renderDetail(store: StateStore): VNode {
  return synonymPanel(store.state, {
    onAddTerm: () => undefined, onDeleteTerm: () => undefined,
    onStar: () => undefined, onJumpToCode: () => undefined,
  });
}

function codeBadgeOf(store: StateStore, cui: string): string {
  const tree = renderTree(store);
  const row = findByClass(tree, "tree-row")
    .find((r) => r.attrs["data-cui"] === cui);
  if (!row) throw new Error(`${cui} not rendered`);
  return textOf(findByClass(row, "code-badge")[0]);
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), "ispo-ui-"));
  execFileSync("python3", ["-c", `
from ispo.fixtures import taxonomy_store
from ispo.workspace import Workspace
Workspace.init(${JSON.stringify(storeDir + "/store")}, taxonomy_store()).close()
`]);
  server = spawn("python3", ["-m", "ispo.cli", "serve",
                             "--store", `${storeDir}/store`,
                             "--addr", `127.0.0.1:${PORT}`],
                 { stdio: "ignore" });
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${BASE}/api/roots`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("service did not come up");
});

afterAll(() => {
  server?.kill();
  rmSync(storeDir, { recursive: true, force: true });
});

async function cuiBySearch(controller: Controller, store: StateStore,
                           text: string): Promise<string> {
  controller.searchInput(text);
  await controller.runSearch();
  const exact = store.state.searchResults.find((r) => r.exact);
  if (!exact) throw new Error(`no exact hit for ${text}`);
  return exact.concept;
}

describe("drag-reparent flow", () => {
  it("updates the code badge after a legal move", async () => {
    const { store, controller } = makeSession("alice");
    await controller.start();
    const cough = await cuiBySearch(controller, store, "cough");
    const nervous = store.state.rootIds[0];
    const respiratory = store.state.rootIds[1];
    await controller.toggle(respiratory);
    const before = codeBadgeOf(store, cough);
    expect(before.startsWith("02.")).toBe(true);

    await controller.dragReparent(cough, nervous);
    await controller.toggle(nervous);
    const after = codeBadgeOf(store, cough);
    expect(after.startsWith("01.")).toBe(true);
    expect(after).not.toBe(before);
    expect(store.state.pending.size).toBe(0);

    await controller.dragReparent(cough, respiratory); // put it back
  });

  it("blocks a drop onto the node's own descendant", async () => {
    const { store, controller } = makeSession("alice");
    await controller.start();
    const tcm = store.state.rootIds[11];
    await controller.toggle(tcm);
    const tongue = store.state.nodes[tcm].childIds![0];
    // parent chain is loaded: the client refuses without a request
    const version = store.state.storeVersion;
    await controller.dragReparent(tcm, tongue);
    expect(store.state.notice).toMatch(/own subtree/);
    expect(store.state.nodes[tcm].summary.parent).toBeNull();

    // bypass the client knowledge: a direct service call still refuses
    // and the controller surfaces the error verbatim
    store.putSummaries([{ ...store.state.nodes[tongue].summary, parent: null }]);
    await controller.dragReparent(tcm, tongue);
    expect(store.state.notice).toMatch(/^CycleError:/);
    expect(store.state.nodes[tcm].summary.parent).toBeNull(); // rolled back
    const fresh = makeSession("checker");
    await fresh.controller.start();
    expect(fresh.store.state.nodes[tcm].summary.parent).toBeNull();
    expect(fresh.store.state.storeVersion).toBe(version); // nothing committed
  });
});

describe("review queue flow", () => {
  it("three votes flip the task to consensus and finalize adds the synonym", async () => {
    const annotators = ["ann-a", "ann-b", "ann-c"];
    const reviewer = makeSession("senior");
    await reviewer.controller.start();
    const fever = await cuiBySearch(reviewer.controller, reviewer.store, "fever");

    const tasks = await reviewer.controller.api.createTasks(
      ["intermittent fever"], annotators, 7, 3, 1);
    const taskId = tasks[0].id;

    for (const annotator of annotators) {
      const session = makeSession(annotator);
      await session.controller.refreshTasks();
      const card = findByClass(
        reviewQueue(session.store.state, {
          onVoteExisting: () => undefined, onVoteNew: () => undefined,
          onVoteNotSymptom: () => undefined, onResolve: () => undefined,
          onFinalize: () => undefined,
        }), "task-card").find((c) => c.attrs["data-task"] === taskId)!;
      expect(findByClass(card, "vote-form").length).toBe(1); // assignee sees form
      await session.controller.voteExisting(taskId, fever);
    }

    await reviewer.controller.resolveTask(taskId);
    await reviewer.controller.refreshTasks();
    let task = reviewer.store.state.tasks.find((t) => t.id === taskId)!;
    expect(task.state).toBe("Consensus");
    const queueView = reviewQueue(reviewer.store.state, {
      onVoteExisting: () => undefined, onVoteNew: () => undefined,
      onVoteNotSymptom: () => undefined, onResolve: () => undefined,
      onFinalize: () => undefined,
    });
    const consensusCard = findByClass(queueView, "task-card")
      .find((c) => c.attrs["data-task"] === taskId)!;
    expect(findByClass(consensusCard, "finalize").length).toBe(1);

    await reviewer.controller.select(fever);
    await reviewer.controller.finalizeTask(taskId);
    task = reviewer.store.state.tasks.find((t) => t.id === taskId)!;
    expect(task.state).toBe("Finalized");

    // the synonym is visible in the detail panel
    const detail = renderDetail(reviewer.store);
    const atomTexts = findByClass(detail, "atom-text").map(textOf);
    expect(atomTexts).toContain("intermittent fever");
  });
});

describe("audit pane flow", () => {
  it("appends exactly one row per mutation, no duplicates across polls", async () => {
    const { store, controller } = makeSession("auditor");
    await controller.start();
    const seqsBefore = store.state.auditRows.map((e) => e.seq);
    const general = store.state.rootIds[9];

    await controller.select(general);
    await controller.addSynonym("general condition probe", "en");
    await controller.tailAudit(); // extra poll must not duplicate
    const seqsAfter = store.state.auditRows.map((e) => e.seq);
    expect(seqsAfter.length).toBe(seqsBefore.length + 1);
    expect(new Set(seqsAfter).size).toBe(seqsAfter.length);

    const pane = auditPane(store.state);
    const rows = findByClass(pane, "audit-row");
    expect(rows.length).toBe(seqsAfter.length);
    expect(textOf(findByClass(rows[rows.length - 1], "audit-action")[0]))
      .toBe("add_term");
  });
});

describe("reload reproducibility", () => {
  it("a full reload reproduces the same view at the same store version", async () => {
    const first = makeSession("alice");
    await first.controller.start();
    const cough = await cuiBySearch(first.controller, first.store, "cough");
    await first.controller.reveal(cough);

    const second = makeSession("alice");
    await second.controller.start();
    await cuiBySearch(second.controller, second.store, "cough");
    await second.controller.reveal(cough);

    expect(second.store.state.storeVersion).toBe(first.store.state.storeVersion);
    expect(JSON.stringify(renderTree(second.store)))
      .toBe(JSON.stringify(renderTree(first.store)));
    expect(JSON.stringify(renderDetail(second.store)))
      .toBe(JSON.stringify(renderDetail(first.store)));
  });
});
