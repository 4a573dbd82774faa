// Virtual-node materialization for the browser. Panels re-render
// wholesale on every state change; at curation scale that is cheap and
// keeps the render path identical to what the tests assert on.

import { Handler, VNode } from "./views.js";

function formPayload(form: HTMLFormElement): unknown {
  const named = Array.from(form.querySelectorAll("input, select"))
    .filter((el): el is HTMLInputElement | HTMLSelectElement =>
      "name" in el && (el as HTMLInputElement).name !== "");
  if (named.length === 1) return named[0].value;
  const out: Record<string, string> = {};
  for (const el of named) out[el.name] = el.value;
  return out;
}

export function materialize(node: VNode | string): Node {
  if (typeof node === "string") return document.createTextNode(node);
  const el = document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    if (key === "value" && el instanceof HTMLInputElement) {
      el.value = value;
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const [event, handler] of Object.entries(node.on)) {
    attach(el, event, handler);
  }
  if (node.attrs["draggable"] === "true") {
    el.addEventListener("dragstart", (e) => {
      const cui = node.attrs["data-cui"];
      (e as DragEvent).dataTransfer?.setData("text/cui", cui);
    });
    el.addEventListener("dragover", (e) => e.preventDefault());
  }
  for (const child of node.children) el.appendChild(materialize(child));
  return el;
}

function attach(el: HTMLElement, event: string, handler: Handler): void {
  if (event === "submit") {
    el.addEventListener("submit", (e) => {
      e.preventDefault();
      handler(formPayload(el as HTMLFormElement));
    });
  } else if (event === "input") {
    el.addEventListener("input", (e) => {
      handler((e.target as HTMLInputElement).value);
    });
  } else if (event === "drop") {
    el.addEventListener("drop", (e) => {
      e.preventDefault();
      e.stopPropagation();
      const cui = (e as DragEvent).dataTransfer?.getData("text/cui");
      if (cui) handler(cui);
    });
  } else {
    el.addEventListener(event, () => handler());
  }
}

export function mount(container: HTMLElement, node: VNode): void {
  container.replaceChildren(materialize(node));
}
