/** Keyboard shortcuts for review throughput. Pure key-to-action mapping so
 * the bindings are testable; main.ts attaches it to the document. */

export type ShortcutAction =
  | "accept"
  | "reject"
  | "relabel"
  | "next"
  | "previous"
  | "reload";

const BINDINGS: Record<string, ShortcutAction> = {
  a: "accept",
  r: "reject",
  l: "relabel",
  j: "next",
  ArrowDown: "next",
  k: "previous",
  ArrowUp: "previous",
  g: "reload",
};

export function shortcutFor(key: string, target?: { tagName?: string }): ShortcutAction | null {
  // never steal keys from form fields (the relabel picker, token input)
  const tag = target?.tagName?.toUpperCase();
  if (tag === "INPUT" || tag === "SELECT" || tag === "TEXTAREA") return null;
  return BINDINGS[key] ?? null;
}
