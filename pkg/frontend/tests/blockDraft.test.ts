import { describe, expect, it } from "vitest";

import {
  blockDraftToDoc,
  emptyBlockDraft,
  validateBlockDraft,
} from "../src/viewmodels/blockDraft.js";
import { capInstance } from "./fixtures.js";

const instance = capInstance();

describe("block draft", () => {
  it("accepts a well-formed duty block and sorts members by date", () => {
    const draft = {
      ...emptyBlockDraft(),
      id: "week1",
      memberIds: ["N@2026-03-04", "N@2026-03-02", "N@2026-03-03"],
      freeDaysAfter: 1,
    };
    expect(validateBlockDraft(instance, draft)).toEqual([]);
    const doc = blockDraftToDoc(instance, draft);
    expect(doc.members).toEqual(["N@2026-03-02", "N@2026-03-03", "N@2026-03-04"]);
    expect(doc.free_days_after).toBe(1);
    expect(doc.kind).toBe("duty-block");
  });

  it("rejects drafts without id or members", () => {
    const problems = validateBlockDraft(instance, emptyBlockDraft());
    expect(problems.some((p) => p.includes("id"))).toBe(true);
    expect(problems.some((p) => p.includes("member"))).toBe(true);
  });

  it("rejects members of the wrong kind", () => {
    const draft = {
      ...emptyBlockDraft(),
      id: "w",
      kind: "shift-block" as const,
      memberIds: ["N@2026-03-02"],
    };
    const problems = validateBlockDraft(instance, draft);
    expect(problems.some((p) => p.includes("not a shift instance"))).toBe(true);
  });

  it("rejects duplicate block ids", () => {
    const withBlock = structuredClone(instance);
    withBlock.blocks.push({
      id: "week1",
      kind: "duty-block",
      members: ["N@2026-03-02"],
      allow_extra_duties_inside: true,
      allow_extra_shifts_inside: true,
      free_days_after: 0,
      consecutive_predecessor: null,
      max_consecutive_run: null,
    });
    const draft = { ...emptyBlockDraft(), id: "week1", memberIds: ["N@2026-03-03"] };
    expect(validateBlockDraft(withBlock, draft).some((p) => p.includes("taken"))).toBe(true);
  });
});
