// Draft state for the planner's block-creation form: a set of duty or
// shift instances over a week (or any span) that must go to one person.

import type { BlockDoc, InstanceDoc } from "../types.js";

export interface BlockDraft {
  id: string;
  kind: "duty-block" | "shift-block";
  memberIds: string[];
  freeDaysAfter: number;
  allowExtraDuties: boolean;
  allowExtraShifts: boolean;
}

export function emptyBlockDraft(): BlockDraft {
  return {
    id: "",
    kind: "duty-block",
    memberIds: [],
    freeDaysAfter: 0,
    allowExtraDuties: true,
    allowExtraShifts: true,
  };
}

/** Pre-flight checks mirroring the server's instance validation. */
export function validateBlockDraft(instance: InstanceDoc, draft: BlockDraft): string[] {
  const errors: string[] = [];
  if (!draft.id.trim()) errors.push("the block needs an id");
  if (instance.blocks.some((b) => b.id === draft.id)) errors.push(`block id '${draft.id}' is taken`);
  if (!draft.memberIds.length) errors.push("pick at least one member");
  const pool =
    draft.kind === "duty-block"
      ? new Map(instance.duty_instances.map((d) => [d.id, d.date]))
      : new Map(instance.shift_instances.map((s) => [s.id, s.date]));
  const dates: string[] = [];
  for (const member of draft.memberIds) {
    const date = pool.get(member);
    if (date === undefined) {
      errors.push(`'${member}' is not a ${draft.kind === "duty-block" ? "duty" : "shift"} instance`);
    } else {
      dates.push(date);
    }
  }
  if (draft.freeDaysAfter < 0) errors.push("free days after the block cannot be negative");
  return errors;
}

/** Members sorted chronologically, as the server requires. */
export function blockDraftToDoc(instance: InstanceDoc, draft: BlockDraft): Omit<BlockDoc, "consecutive_predecessor" | "max_consecutive_run"> & {
  consecutive_predecessor: null;
  max_consecutive_run: null;
} {
  const pool =
    draft.kind === "duty-block"
      ? new Map(instance.duty_instances.map((d) => [d.id, `${d.date}|${d.id}`]))
      : new Map(instance.shift_instances.map((s) => [s.id, `${s.date}|${s.id}`]));
  const members = [...draft.memberIds].sort((a, b) =>
    (pool.get(a) ?? a).localeCompare(pool.get(b) ?? b),
  );
  return {
    id: draft.id.trim(),
    kind: draft.kind,
    members,
    allow_extra_duties_inside: draft.allowExtraDuties,
    allow_extra_shifts_inside: draft.allowExtraShifts,
    free_days_after: draft.freeDaysAfter,
    consecutive_predecessor: null,
    max_consecutive_run: null,
  };
}
