/** Review-session state: the loaded queue page, the focused item, and the
 * optimistic submit/rollback cycle.
 *
 * The store keeps no authority of its own: every verdict goes through the
 * API, and a failed submit restores the item exactly where it was. Reloading
 * rebuilds the same state from the server.
 */

import { ApiClient, ApiError } from "./api.js";
import type { Decision, QueueItem, RegistryLabel, Task } from "./types.js";

export type SubmitOutcome =
  | { kind: "recorded" }
  | { kind: "already-reviewed" }
  | { kind: "failed"; status: number; message: string };

export interface QueueState {
  task: Task;
  items: QueueItem[];
  total: number;
  offset: number;
  focus: number;
  reviewed: number;
  loading: boolean;
  loadError: string | null;
  labels: RegistryLabel[];
  needsAuth: boolean;
}

export class ReviewSession {
  state: QueueState;
  reviewer: string;
  private listeners: Array<() => void> = [];

  constructor(
    private api: ApiClient,
    task: Task,
    reviewer: string,
  ) {
    this.reviewer = reviewer;
    this.state = emptyState(task);
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  get current(): QueueItem | undefined {
    return this.state.items[this.state.focus];
  }

  async switchTask(task: Task): Promise<void> {
    this.state = emptyState(task);
    await this.load();
  }

  /** Load one queue page in server order (most uncertain first). */
  async load(offset = 0): Promise<void> {
    this.state.loading = true;
    this.state.loadError = null;
    this.notify();
    try {
      const [page, labels] = await Promise.all([
        this.api.loadQueue(this.state.task, 25, offset),
        this.api.loadRegistry(this.state.task),
      ]);
      this.state.items = page.items;
      this.state.total = page.total;
      this.state.offset = offset;
      this.state.labels = labels;
      this.state.focus = 0;
      this.state.needsAuth = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.state.needsAuth = true;
      } else {
        // keep current items: a failed refresh must not lose data
        this.state.loadError = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.state.loading = false;
      this.notify();
    }
  }

  moveFocus(delta: number): void {
    const n = this.state.items.length;
    if (n === 0) return;
    this.state.focus = Math.min(Math.max(this.state.focus + delta, 0), n - 1);
    this.notify();
  }

  /** Submit a verdict for the focused item, removing it optimistically.
   * On 4xx/5xx the item is restored at its original position; a 409 means
   * another reviewer got there first and the item stays out of the queue. */
  async submit(decision: Decision, correctedLabel?: string): Promise<SubmitOutcome> {
    const index = this.state.focus;
    const item = this.state.items[index];
    if (!item) return { kind: "failed", status: 0, message: "no item focused" };
    if (decision === "relabel") {
      if (!correctedLabel || !this.state.labels.some((l) => l.name === correctedLabel)) {
        return { kind: "failed", status: 0, message: "relabel needs a registry label" };
      }
    }

    this.state.items = this.state.items.filter((_, i) => i !== index);
    this.state.total -= 1;
    this.state.focus = Math.min(index, this.state.items.length - 1);
    if (this.state.focus < 0) this.state.focus = 0;
    this.notify();

    try {
      await this.api.submitVerdict(item.prediction_id, {
        decision,
        reviewer: this.reviewer,
        ...(decision === "relabel" ? { corrected_label: correctedLabel } : {}),
      });
      this.state.reviewed += 1;
      this.notify();
      return { kind: "recorded" };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else already judged it; it is no longer pending
        this.notify();
        return { kind: "already-reviewed" };
      }
      // roll the optimistic removal back
      const items = [...this.state.items];
      items.splice(index, 0, item);
      this.state.items = items;
      this.state.total += 1;
      this.state.focus = index;
      if (err instanceof ApiError && err.status === 401) this.state.needsAuth = true;
      this.notify();
      const status = err instanceof ApiError ? err.status : 0;
      return {
        kind: "failed",
        status,
        message: err instanceof Error ? err.message : String(err),
      };
    }
  }
}

function emptyState(task: Task): QueueState {
  return {
    task,
    items: [],
    total: 0,
    offset: 0,
    focus: 0,
    reviewed: 0,
    loading: false,
    loadError: null,
    labels: [],
    needsAuth: false,
  };
}
