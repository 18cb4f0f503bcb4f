import { describe, expect, it } from "vitest";

import { shortcutFor } from "../src/keyboard";

describe("keyboard shortcuts", () => {
  it("maps review actions", () => {
    expect(shortcutFor("a")).toBe("accept");
    expect(shortcutFor("r")).toBe("reject");
    expect(shortcutFor("l")).toBe("relabel");
    expect(shortcutFor("j")).toBe("next");
    expect(shortcutFor("ArrowUp")).toBe("previous");
    expect(shortcutFor("g")).toBe("reload");
  });

  it("ignores unbound keys", () => {
    expect(shortcutFor("x")).toBeNull();
    expect(shortcutFor("Escape")).toBeNull();
  });

  it("never steals keys from form fields", () => {
    expect(shortcutFor("a", { tagName: "INPUT" })).toBeNull();
    expect(shortcutFor("r", { tagName: "select" })).toBeNull();
    expect(shortcutFor("a", { tagName: "ARTICLE" })).toBe("accept");
  });
});
