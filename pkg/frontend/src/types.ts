/** JSON shapes served by the review service. The UI never requires fields
 * beyond these, so unknown additions on the server are harmless. */

export type Task = "detect" | "level" | "context" | "motive" | "consequence";

export const TASKS: Task[] = ["detect", "level", "context", "motive", "consequence"];

export interface QueueItem {
  prediction_id: string;
  passage_id: string;
  task: Task;
  label: string;
  score: number;
  model_id: string;
  truncated: boolean;
  text: string;
  work_id: string;
  chapter: number;
  section: number;
  citation: string;
}

export interface QueuePage {
  total: number;
  items: QueueItem[];
}

export interface RegistryLabel {
  name: string;
  description: string;
}

export type Decision = "accept" | "reject" | "relabel";

export interface VerdictRequest {
  decision: Decision;
  reviewer: string;
  corrected_label?: string;
}

export interface VerdictResponse {
  id: string;
  prediction_id: string;
  decision: Decision;
  corrected_label: string | null;
  reviewer: string;
  created_at: number;
}

/** Citation string for a queue item, rendered exactly as the stored source
 * reference: "Work chapter.section". */
export function citationOf(item: Pick<QueueItem, "work_id" | "chapter" | "section">): string {
  return `${item.work_id} ${item.chapter}.${item.section}`;
}
