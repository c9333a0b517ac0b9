import { describe, expect, it } from "vitest";

import { buildRosterCalendar } from "../src/viewmodels/rosterCalendar.js";
import { capInstance, rosterRecord } from "./fixtures.js";

describe("roster calendar", () => {
  it("places every period day and its assignments", () => {
    const instance = capInstance();
    const record = rosterRecord();
    const days = buildRosterCalendar(instance, record.roster);
    expect(days).toHaveLength(12);
    expect(days[0]!.date).toBe("2026-03-02");
    const first = days[0]!.entries[0]!;
    expect(first.physician).toBe("p0");
    // A night duty renders with the overnight span.
    expect(first.time).toBe("20:00–08:00");
  });

  it("marks the session physician's own entries", () => {
    const instance = capInstance();
    const record = rosterRecord();
    const days = buildRosterCalendar(instance, record.roster, "p1");
    const mine = days.flatMap((d) => d.entries).filter((e) => e.mine);
    expect(mine.map((e) => e.id)).toEqual(["N@2026-03-03"]);
  });

  it("shows open duties as unassigned", () => {
    const instance = capInstance();
    const record = rosterRecord();
    const days = buildRosterCalendar(instance, record.roster);
    const open = days.flatMap((d) => d.entries).filter((e) => e.physician === null);
    expect(open.length).toBe(10);
  });
});
