import { describe, expect, it } from "vitest";

import {
  applyServerResponse,
  buildAdjustEditor,
  canPublish,
  hardFindings,
  hasPendingEdits,
  pendingEdits,
  publishTarget,
  stageEdit,
} from "../src/viewmodels/adjustEditor.js";
import { capInstance, rosterRecord } from "./fixtures.js";

const instance = capInstance();

describe("adjust editor", () => {
  it("starts publishable for a clean draft", () => {
    const state = buildAdjustEditor(instance, rosterRecord());
    expect(canPublish(state)).toBe(true);
    expect(publishTarget(state)).toBe(1);
  });

  it("refuses to offer publish while hard findings exist", () => {
    const record = rosterRecord({
      hard_count: 1,
      findings: [
        { family: "14-rest-hard", severity: "hard", message: "rest clash", subjects: [] },
      ],
    });
    const state = buildAdjustEditor(instance, record);
    expect(canPublish(state)).toBe(false);
    expect(hardFindings(state)).toHaveLength(1);
  });

  it("stages single-cell edits and blocks publish until checked", () => {
    let state = buildAdjustEditor(instance, rosterRecord());
    state = stageEdit(state, "N@2026-03-03", "p0");
    expect(hasPendingEdits(state)).toBe(true);
    expect(pendingEdits(state)).toEqual({ "N@2026-03-03": "p0" });
    expect(canPublish(state)).toBe(false); // unchecked edits cannot be published
  });

  it("staging the current assignee is a no-op", () => {
    let state = buildAdjustEditor(instance, rosterRecord());
    state = stageEdit(state, "N@2026-03-02", "p0"); // already p0
    expect(hasPendingEdits(state)).toBe(false);
  });

  it("adopts the server verdict after a check", () => {
    let state = buildAdjustEditor(instance, rosterRecord());
    state = stageEdit(state, "N@2026-03-03", "p0");
    state = applyServerResponse(state, {
      version: 2,
      hard_findings: [
        { family: "14-rest-hard", severity: "hard", message: "p0 holds both nights", subjects: [] },
      ],
      publishable: false,
    });
    expect(hasPendingEdits(state)).toBe(false);
    expect(publishTarget(state)).toBe(2);
    expect(canPublish(state)).toBe(false);

    state = stageEdit(state, "N@2026-03-03", "p1");
    state = applyServerResponse(state, { version: 3, hard_findings: [], publishable: true });
    expect(canPublish(state)).toBe(true);
    expect(publishTarget(state)).toBe(3);
  });
});
