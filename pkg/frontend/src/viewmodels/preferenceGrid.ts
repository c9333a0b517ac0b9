// Preference-entry grid: duty rows and weekly-set rows against the
// selectable levels, with live per-level remaining-cap counters.
//
// Cap checks here are user-experience sugar; the server re-validates
// every submission and remains the enforcement point.

import type { InstanceDoc, PreferenceEntry, PreferenceLevel } from "../types.js";
import { DUTY_LEVELS, WEEKLY_LEVELS } from "../types.js";

export interface GridCell {
  level: PreferenceLevel;
  selected: boolean;
  enabled: boolean;
  /** Tooltip for a disabled cell, e.g. the exhausted cap. */
  reason?: string;
}

export interface GridRow {
  key: string;
  kind: "duty" | "weekly";
  label: string;
  date?: string;
  week?: number;
  month: string;
  cells: GridCell[];
}

export interface CapCounter {
  level: PreferenceLevel;
  month: string;
  cap: number;
  used: number;
  remaining: number;
}

export interface PreferenceGridViewModel {
  rows: GridRow[];
  counters: CapCounter[];
}

export type Selections = Map<string, PreferenceLevel>;

export function dutyRowKey(dutyInstanceId: string): string {
  return `duty:${dutyInstanceId}`;
}

export function weeklyRowKey(setId: string, week: number): string {
  return `weekly:${setId}:${week}`;
}

function parseDay(iso: string): Date {
  return new Date(`${iso}T00:00:00Z`);
}

function monthOf(date: Date): string {
  return date.toISOString().slice(0, 7);
}

/** Monday of the k-th ISO week touched by the period (1-based). */
export function weekMonday(startDate: string, week: number): Date {
  const start = parseDay(startDate);
  const weekday = (start.getUTCDay() + 6) % 7; // Monday = 0
  const monday = new Date(start);
  monday.setUTCDate(start.getUTCDate() - weekday + (week - 1) * 7);
  return monday;
}

export function weekCount(instance: InstanceDoc): number {
  const start = parseDay(instance.period.start_date);
  const end = parseDay(instance.period.end_date);
  const firstMonday = weekMonday(instance.period.start_date, 1);
  const endWeekday = (end.getUTCDay() + 6) % 7;
  const lastMonday = new Date(end);
  lastMonday.setUTCDate(end.getUTCDate() - endWeekday);
  return Math.round((lastMonday.getTime() - firstMonday.getTime()) / (7 * 86400_000)) + 1 + (start > end ? -1 : 0);
}

function rowMonth(row: { kind: "duty" | "weekly"; date?: string; week?: number }, instance: InstanceDoc): string {
  if (row.kind === "duty" && row.date) return row.date.slice(0, 7);
  return monthOf(weekMonday(instance.period.start_date, row.week ?? 1));
}

function usageByLevelMonth(instance: InstanceDoc, selections: Selections): Map<string, number> {
  const usage = new Map<string, number>();
  const dutyById = new Map(instance.duty_instances.map((d) => [d.id, d]));
  for (const [key, level] of selections) {
    if (level === "indifferent") continue; // never capped, never counted
    let month: string;
    if (key.startsWith("duty:")) {
      const duty = dutyById.get(key.slice(5));
      if (!duty) continue;
      month = duty.date.slice(0, 7);
    } else {
      const week = Number(key.split(":")[2]);
      month = monthOf(weekMonday(instance.period.start_date, week));
    }
    const slot = `${level}|${month}`;
    usage.set(slot, (usage.get(slot) ?? 0) + 1);
  }
  return usage;
}

function capFor(instance: InstanceDoc, level: PreferenceLevel): number | undefined {
  return instance.preference_policy.monthly_caps[level];
}

export function buildPreferenceGrid(
  instance: InstanceDoc,
  physicianId: string,
  selections: Selections,
): PreferenceGridViewModel {
  const usage = usageByLevelMonth(instance, selections);
  const rows: GridRow[] = [];

  const makeCells = (
    key: string,
    month: string,
    levels: PreferenceLevel[],
  ): GridCell[] => {
    const current = selections.get(key);
    return levels.map((level) => {
      const selected = current === level;
      const cap = capFor(instance, level);
      let enabled = true;
      let reason: string | undefined;
      if (!selected && cap !== undefined && level !== "indifferent") {
        const used = usage.get(`${level}|${month}`) ?? 0;
        if (used >= cap) {
          enabled = false;
          reason = `monthly cap of ${cap} '${level}' selections reached for ${month}`;
        }
      }
      return { level, selected, enabled, reason };
    });
  };

  const phys = instance.physicians.find((p) => p.id === physicianId);
  const absences = new Set(phys?.absences ?? []);
  const sortedDuties = [...instance.duty_instances].sort((a, b) =>
    a.date === b.date ? a.id.localeCompare(b.id) : a.date.localeCompare(b.date),
  );
  for (const duty of sortedDuties) {
    if (absences.has(duty.date)) continue; // no point stating wishes for absent days
    const key = dutyRowKey(duty.id);
    const month = duty.date.slice(0, 7);
    const tpl = instance.duty_templates.find((t) => t.id === duty.template_id);
    rows.push({
      key,
      kind: "duty",
      label: `${tpl?.label || duty.template_id} on ${duty.date}`,
      date: duty.date,
      month,
      cells: makeCells(key, month, DUTY_LEVELS),
    });
  }

  const weeks = weekCount(instance);
  for (const set of instance.weekly_sets) {
    for (let week = 1; week <= weeks; week += 1) {
      const key = weeklyRowKey(set.id, week);
      const month = rowMonth({ kind: "weekly", week }, instance);
      rows.push({
        key,
        kind: "weekly",
        label: `${set.label || set.id}, week ${week}`,
        week,
        month,
        // "impossible" is intentionally absent on weekly rows.
        cells: makeCells(key, month, WEEKLY_LEVELS),
      });
    }
  }

  const counters: CapCounter[] = [];
  const months = [...new Set(rows.map((r) => r.month))].sort();
  for (const [levelName, cap] of Object.entries(instance.preference_policy.monthly_caps)) {
    const level = levelName as PreferenceLevel;
    for (const month of months) {
      const used = usage.get(`${level}|${month}`) ?? 0;
      counters.push({ level, month, cap: cap as number, used, remaining: Math.max(0, (cap as number) - used) });
    }
  }
  return { rows, counters };
}

export type SelectionResult =
  | { ok: true; selections: Selections }
  | { ok: false; reason: string };

/** Toggle a cell; refuses cap-exceeding picks with the cap named. */
export function applySelection(
  instance: InstanceDoc,
  selections: Selections,
  rowKey: string,
  level: PreferenceLevel,
): SelectionResult {
  if (rowKey.startsWith("weekly:") && level === "impossible") {
    return { ok: false, reason: "'impossible' is not available for weekly preferences" };
  }
  const next = new Map(selections);
  if (selections.get(rowKey) === level) {
    next.delete(rowKey); // clicking the current level clears it
    return { ok: true, selections: next };
  }
  next.set(rowKey, level);
  const cap = capFor(instance, level);
  if (cap !== undefined && level !== "indifferent") {
    const month = rowKey.startsWith("duty:")
      ? instance.duty_instances.find((d) => d.id === rowKey.slice(5))?.date.slice(0, 7)
      : monthOf(weekMonday(instance.period.start_date, Number(rowKey.split(":")[2])));
    const used = usageByLevelMonth(instance, next).get(`${level}|${month}`) ?? 0;
    if (used > cap) {
      return {
        ok: false,
        reason: `monthly cap of ${cap} '${level}' selections reached for ${month}`,
      };
    }
  }
  return { ok: true, selections: next };
}

/** Wire format for submission; only explicit non-indifferent picks travel. */
export function selectionsToEntries(selections: Selections): PreferenceEntry[] {
  const entries: PreferenceEntry[] = [];
  for (const [key, level] of [...selections.entries()].sort()) {
    if (key.startsWith("duty:")) {
      entries.push({ level, duty_instance_id: key.slice(5) });
    } else {
      const [, setId, week] = key.split(":");
      entries.push({ level, weekly_set_id: setId, week_index: Number(week) });
    }
  }
  return entries;
}

export function entriesToSelections(entries: PreferenceEntry[]): Selections {
  const selections: Selections = new Map();
  for (const entry of entries) {
    if (entry.duty_instance_id) {
      selections.set(dutyRowKey(entry.duty_instance_id), entry.level);
    } else if (entry.weekly_set_id && entry.week_index) {
      selections.set(weeklyRowKey(entry.weekly_set_id, entry.week_index), entry.level);
    }
  }
  return selections;
}
