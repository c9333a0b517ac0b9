import type { InstanceDoc, RosterVersionRecord } from "../src/types.js";

/** Twelve nightly duties across 2026-03-02..13, caps 10 undesired / 3 impossible. */
export function capInstance(): InstanceDoc {
  const dutyInstances = [];
  for (let day = 2; day <= 13; day += 1) {
    const date = `2026-03-${String(day).padStart(2, "0")}`;
    dutyInstances.push({
      id: `N@${date}`,
      template_id: "N",
      date,
      start_abs: (day - 2) * 1440 + 20 * 60,
      end_abs: (day - 1) * 1440 + 8 * 60,
      pre_assigned: null,
    });
  }
  return {
    schema_version: 1,
    kind: "roster-instance",
    id: "cap-demo",
    label: "cap demo",
    period: {
      start_date: "2026-03-02",
      end_date: "2026-03-13",
      public_holidays: [],
      weekend_threshold: "21:00",
    },
    physicians: [
      {
        id: "p0",
        name: "Dr. Abel",
        employment_rate: 1,
        qualifications: [],
        absences: [],
        planned_manually: false,
        weekend_preference: "none",
      },
      {
        id: "p1",
        name: "Dr. Brandt",
        employment_rate: 1,
        qualifications: [],
        absences: [],
        planned_manually: false,
        weekend_preference: "none",
      },
    ],
    duty_templates: [
      { id: "N", label: "night", weekdays: [0, 1, 2, 3, 4, 5, 6], start: "20:00", end: "08:00", mandatory: false },
    ],
    shift_templates: [],
    duty_instances: dutyInstances,
    shift_instances: [],
    blocks: [],
    pools: [],
    weekly_sets: [
      { id: "nights", label: "night week", duty_templates: ["N"], shift_templates: [] },
    ],
    preference_policy: { monthly_caps: { undesired: 10, impossible: 3 } },
    weekend_policy: {},
  };
}

export function rosterRecord(overrides: Partial<RosterVersionRecord> = {}): RosterVersionRecord {
  return {
    instance_id: "cap-demo",
    version: 1,
    status: "draft",
    author: "solver",
    roster: {
      instance_id: "cap-demo",
      duty_assignments: { "N@2026-03-02": "p0", "N@2026-03-03": "p1" },
      shift_assignments: {},
      unassigned_duties: [],
      objective: 100,
      status: "optimal-within-gap",
    },
    report: null,
    findings: [],
    hard_count: 0,
    ...overrides,
  };
}
