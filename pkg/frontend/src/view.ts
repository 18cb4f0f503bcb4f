/** HTML rendering. Pure functions from state to markup strings, so the
 * whole presentation layer is testable without a browser. */

import type { QueueState } from "./state.js";
import { citationOf, type QueueItem, type RegistryLabel, TASKS } from "./types.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderTabs(active: string): string {
  return TASKS.map((task) => {
    const cls = task === active ? "tab active" : "tab";
    return `<button class="${cls}" data-task="${task}">${task}</button>`;
  }).join("");
}

export function renderScore(score: number): string {
  return score.toFixed(2);
}

/** The relabel picker offers registry labels only, with their descriptions
 * as tooltips (38 consequence classes need in-context definitions). */
export function renderLabelPicker(labels: RegistryLabel[], predicted: string): string {
  const options = labels
    .map((label) => {
      const selected = label.name === predicted ? " selected" : "";
      return (
        `<option value="${escapeHtml(label.name)}" ` +
        `title="${escapeHtml(label.description)}"${selected}>` +
        `${escapeHtml(label.name)}</option>`
      );
    })
    .join("");
  return `<select class="relabel-picker">${options}</select>`;
}

export function renderItem(item: QueueItem, labels: RegistryLabel[], focused: boolean): string {
  const citation = citationOf(item);
  const cls = focused ? "queue-item focused" : "queue-item";
  const truncated = item.truncated ? `<span class="flag">truncated</span>` : "";
  return `
<article class="${cls}" data-prediction="${escapeHtml(item.prediction_id)}">
  <header>
    <cite>${escapeHtml(citation)}</cite>
    <span class="predicted" title="model ${escapeHtml(item.model_id)}">
      ${escapeHtml(item.label)} (${renderScore(item.score)})</span>
    ${truncated}
  </header>
  <p class="passage">${escapeHtml(item.text)}</p>
  <footer>
    <button class="accept" data-action="accept">accept (a)</button>
    <button class="reject" data-action="reject">reject (r)</button>
    ${renderLabelPicker(labels, item.label)}
    <button class="relabel" data-action="relabel">relabel (l)</button>
  </footer>
</article>`;
}

export function renderQueue(state: QueueState): string {
  if (state.needsAuth) {
    return `
<div class="auth-prompt">
  <p>Session token required.</p>
  <input type="password" id="token-input" placeholder="API token" />
  <button id="token-save">Save token</button>
</div>`;
  }
  if (state.loadError) {
    return `
<div class="banner error">
  <p>Could not reach the review service: ${escapeHtml(state.loadError)}</p>
  <button id="retry-load">Retry</button>
</div>${state.items.map((item, i) => renderItem(item, state.labels, i === state.focus)).join("")}`;
  }
  if (state.loading && state.items.length === 0) {
    return `<p class="loading">Loading queue…</p>`;
  }
  if (state.items.length === 0) {
    return `<p class="all-reviewed">All reviewed. Nothing pending for “${state.task}”.</p>`;
  }
  const progress = `
<p class="progress">${state.total} pending · ${state.reviewed} reviewed this session</p>`;
  return (
    progress +
    state.items.map((item, i) => renderItem(item, state.labels, i === state.focus)).join("")
  );
}

export function renderToast(message: string, kind: "info" | "error"): string {
  return `<div class="toast ${kind}">${escapeHtml(message)}</div>`;
}
