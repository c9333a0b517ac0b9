// Month-style calendar rows for a stored roster.

import type { InstanceDoc, RosterDoc } from "../types.js";

export interface CalendarEntry {
  id: string;
  label: string;
  time: string;
  physician: string | null;
  kind: "duty" | "shift";
  mine: boolean;
}

export interface CalendarDay {
  date: string;
  weekday: number;
  entries: CalendarEntry[];
}

function fmt(minutes: number): string {
  const clock = ((minutes % 1440) + 1440) % 1440;
  const h = String(Math.floor(clock / 60)).padStart(2, "0");
  const m = String(clock % 60).padStart(2, "0");
  return `${h}:${m}`;
}

export function buildRosterCalendar(
  instance: InstanceDoc,
  roster: RosterDoc,
  physicianId?: string,
): CalendarDay[] {
  const byDate = new Map<string, CalendarEntry[]>();
  const start = new Date(`${instance.period.start_date}T00:00:00Z`);
  const end = new Date(`${instance.period.end_date}T00:00:00Z`);
  for (let d = new Date(start); d <= end; d.setUTCDate(d.getUTCDate() + 1)) {
    byDate.set(d.toISOString().slice(0, 10), []);
  }
  for (const duty of instance.duty_instances) {
    const assigned = roster.duty_assignments[duty.id] ?? null;
    byDate.get(duty.date)?.push({
      id: duty.id,
      label: duty.template_id,
      time: `${fmt(duty.start_abs)}–${fmt(duty.end_abs)}`,
      physician: assigned,
      kind: "duty",
      mine: physicianId !== undefined && assigned === physicianId,
    });
  }
  for (const shift of instance.shift_instances) {
    const assigned = roster.shift_assignments[shift.id] ?? [];
    for (const pid of assigned) {
      if (physicianId !== undefined && pid !== physicianId) continue;
      byDate.get(shift.date)?.push({
        id: shift.id,
        label: shift.template_id,
        time: `${fmt(shift.start_abs)}–${fmt(shift.end_abs)}`,
        physician: pid,
        kind: "shift",
        mine: physicianId !== undefined && pid === physicianId,
      });
    }
  }
  const days: CalendarDay[] = [];
  for (const [date, entries] of [...byDate.entries()].sort()) {
    entries.sort((a, b) => (a.time === b.time ? a.id.localeCompare(b.id) : a.time.localeCompare(b.time)));
    const weekday = (new Date(`${date}T00:00:00Z`).getUTCDay() + 6) % 7;
    days.push({ date, weekday, entries });
  }
  return days;
}
