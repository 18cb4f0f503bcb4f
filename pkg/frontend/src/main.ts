/** Browser entry point: wires the API client, session state, rendering and
 * keyboard shortcuts into the page. All logic lives in the imported modules;
 * this file only touches the DOM. */

import { ApiClient } from "./api.js";
import { shortcutFor } from "./keyboard.js";
import { ReviewSession } from "./state.js";
import type { Decision, Task } from "./types.js";
import { renderQueue, renderTabs, renderToast } from "./view.js";

const TOKEN_KEY = "violens-token";

function requireElement(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function start(): void {
  const baseUrl = (window as { VIOLENS_API?: string }).VIOLENS_API ?? "";
  const api = new ApiClient(baseUrl, sessionStorage.getItem(TOKEN_KEY));
  const reviewer = localStorage.getItem("violens-reviewer") ?? "historian";
  const session = new ReviewSession(api, "detect", reviewer);

  const tabs = requireElement("tabs");
  const queue = requireElement("queue");
  const toasts = requireElement("toasts");

  function redraw(): void {
    tabs.innerHTML = renderTabs(session.state.task);
    queue.innerHTML = renderQueue(session.state);
  }

  function toast(message: string, kind: "info" | "error"): void {
    toasts.insertAdjacentHTML("beforeend", renderToast(message, kind));
    const el = toasts.lastElementChild;
    setTimeout(() => el?.remove(), 4000);
  }

  async function act(decision: Decision): Promise<void> {
    let corrected: string | undefined;
    if (decision === "relabel") {
      const picker = queue.querySelector<HTMLSelectElement>(".focused .relabel-picker");
      corrected = picker?.value;
    }
    const outcome = await session.submit(decision, corrected);
    if (outcome.kind === "failed") {
      toast(`verdict not saved (${outcome.status || "network"}): ${outcome.message}`, "error");
    } else if (outcome.kind === "already-reviewed") {
      toast("already reviewed by someone else", "info");
    }
    if (session.state.items.length === 0 && session.state.total > 0) {
      void session.load(); // fetch the next page of pending items
    }
  }

  session.onChange(redraw);

  tabs.addEventListener("click", (event) => {
    const task = (event.target as HTMLElement).dataset?.task as Task | undefined;
    if (task) void session.switchTask(task);
  });

  queue.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "retry-load") {
      void session.load(session.state.offset);
      return;
    }
    if (target.id === "token-save") {
      const input = document.getElementById("token-input") as HTMLInputElement | null;
      if (input?.value) {
        sessionStorage.setItem(TOKEN_KEY, input.value);
        api.setToken(input.value);
        void session.load();
      }
      return;
    }
    const action = target.dataset?.action as Decision | undefined;
    if (action) void act(action);
  });

  document.addEventListener("keydown", (event) => {
    const action = shortcutFor(event.key, event.target as { tagName?: string });
    if (!action) return;
    event.preventDefault();
    if (action === "next") session.moveFocus(1);
    else if (action === "previous") session.moveFocus(-1);
    else if (action === "reload") void session.load(session.state.offset);
    else void act(action);
  });

  void session.load();
}

document.addEventListener("DOMContentLoaded", start);
