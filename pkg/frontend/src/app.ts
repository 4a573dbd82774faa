// Browser bootstrap: wire api + state + controller, render on change,
// poll the store version every two seconds for multi-user freshness.

import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { initialState, StateStore } from "./state.js";
import { app } from "./views.js";
import { mount } from "./dom.js";

const ANNOTATOR_KEY = "ispo.annotator";

export function boot(container: HTMLElement, baseUrl = ""): Controller {
  const saved = window.localStorage.getItem(ANNOTATOR_KEY) ?? "anonymous";
  const store = new StateStore(initialState(saved));
  const api = new ApiClient({
    baseUrl,
    annotator: () => store.state.annotator,
    onVersion: (version) => {
      if (version !== store.state.storeVersion) {
        store.update((s) => { s.storeVersion = version; });
      }
    },
  });
  const controller = new Controller(api, store);

  const render = () => {
    mount(container, app(
      store.state,
      {
        onToggle: (cui) => void controller.toggle(cui),
        onSelect: (cui) => void controller.select(cui),
        onDrop: (dragged, target) => void controller.dragReparent(dragged, target),
      },
      {
        onAddTerm: (text, language) => void controller.addSynonym(text, language),
        onDeleteTerm: (aui) => void controller.deleteSynonym(aui),
        onStar: (aui) => void controller.starPreferred(aui),
        onJumpToCode: (code) => void controller.jumpToCode(code),
      },
      {
        onInput: (text) => controller.searchInput(text),
        onScope: (scope) => controller.setScope(scope),
        onPick: (cui) => void controller.reveal(cui),
      },
      {
        onVoteExisting: (taskId, cui) => void controller.voteExisting(taskId, cui),
        onVoteNew: (taskId, label, parent) =>
          void controller.voteNew(taskId, label, parent),
        onVoteNotSymptom: (taskId) => void controller.voteNotSymptom(taskId),
        onResolve: (taskId) => void controller.resolveTask(taskId),
        onFinalize: (taskId, overrideCui) =>
          void controller.finalizeTask(taskId, overrideCui),
      },
    ));
  };

  store.subscribe(render);
  render();
  void controller.start();
  window.setInterval(() => void controller.pollVersion(), 2000);

  // settings drawer stand-in: double-click the annotator id to change it
  container.addEventListener("dblclick", (e) => {
    const target = e.target as HTMLElement;
    if (target.classList.contains("annotator-id")) {
      const next = window.prompt("annotator id", store.state.annotator);
      if (next) {
        window.localStorage.setItem(ANNOTATOR_KEY, next);
        store.update((s) => { s.annotator = next; });
      }
    }
  });
  return controller;
}

declare global {
  interface Window { ispoBoot: typeof boot; }
}

if (typeof window !== "undefined") {
  window.ispoBoot = boot;
  const container = document.getElementById("app");
  if (container) boot(container);
}
