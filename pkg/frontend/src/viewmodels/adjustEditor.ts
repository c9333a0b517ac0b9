// Manual roster adjustment: staged single-cell edits, server findings
// inline, and a publish gate that stays shut while hard findings exist.

import type { Finding, InstanceDoc, RosterVersionRecord } from "../types.js";

export interface AdjustCell {
  dutyId: string;
  date: string;
  label: string;
  assigned: string | null;
  pending: string | null | undefined; // undefined = untouched
  options: string[];
}

export interface AdjustEditorState {
  instanceId: string;
  baseVersion: number;
  savedVersion: number | null;
  cells: AdjustCell[];
  findings: Finding[];
  publishable: boolean;
}

export function buildAdjustEditor(instance: InstanceDoc, record: RosterVersionRecord): AdjustEditorState {
  const physicianIds = instance.physicians.map((p) => p.id).sort();
  const cells = [...instance.duty_instances]
    .sort((a, b) => (a.date === b.date ? a.id.localeCompare(b.id) : a.date.localeCompare(b.date)))
    .map((duty) => ({
      dutyId: duty.id,
      date: duty.date,
      label: duty.template_id,
      assigned: record.roster.duty_assignments[duty.id] ?? null,
      pending: undefined,
      options: physicianIds,
    }));
  return {
    instanceId: instance.id,
    baseVersion: record.version,
    savedVersion: null,
    cells,
    findings: record.findings ?? [],
    publishable: record.hard_count === 0,
  };
}

export function stageEdit(state: AdjustEditorState, dutyId: string, physicianId: string | null): AdjustEditorState {
  const cells = state.cells.map((cell) =>
    cell.dutyId === dutyId
      ? { ...cell, pending: physicianId === cell.assigned ? undefined : physicianId }
      : cell,
  );
  return { ...state, cells };
}

export function pendingEdits(state: AdjustEditorState): Record<string, string | null> {
  const edits: Record<string, string | null> = {};
  for (const cell of state.cells) {
    if (cell.pending !== undefined) edits[cell.dutyId] = cell.pending;
  }
  return edits;
}

export function hasPendingEdits(state: AdjustEditorState): boolean {
  return state.cells.some((cell) => cell.pending !== undefined);
}

export function applyServerResponse(
  state: AdjustEditorState,
  resp: { version: number; hard_findings: Finding[]; publishable: boolean },
): AdjustEditorState {
  const cells = state.cells.map((cell) =>
    cell.pending !== undefined ? { ...cell, assigned: cell.pending, pending: undefined } : cell,
  );
  return {
    ...state,
    cells,
    savedVersion: resp.version,
    findings: resp.hard_findings,
    publishable: resp.publishable,
  };
}

/** Version the publish button would target. */
export function publishTarget(state: AdjustEditorState): number {
  return state.savedVersion ?? state.baseVersion;
}

/**
 * The gate: unsaved edits must go to the server first, and a draft with
 * hard findings is never publishable, whatever the client thinks.
 */
export function canPublish(state: AdjustEditorState): boolean {
  return state.publishable && !hasPendingEdits(state) && state.findings.every((f) => f.severity !== "hard");
}

export function hardFindings(state: AdjustEditorState): Finding[] {
  return state.findings.filter((f) => f.severity === "hard");
}
