import { describe, expect, it } from "vitest";

import {
  applySelection,
  buildPreferenceGrid,
  dutyRowKey,
  entriesToSelections,
  selectionsToEntries,
  weeklyRowKey,
  type Selections,
} from "../src/viewmodels/preferenceGrid.js";
import { capInstance } from "./fixtures.js";

const instance = capInstance();
const dutyIds = instance.duty_instances.map((d) => d.id);

function withSelections(pairs: [string, string][]): Selections {
  return new Map(pairs) as Selections;
}

describe("preference grid", () => {
  it("shows one row per duty instance and per weekly set week", () => {
    const vm = buildPreferenceGrid(instance, "p0", new Map());
    const dutyRows = vm.rows.filter((r) => r.kind === "duty");
    const weeklyRows = vm.rows.filter((r) => r.kind === "weekly");
    expect(dutyRows).toHaveLength(12);
    expect(weeklyRows).toHaveLength(2); // two ISO weeks in the period
  });

  it("hides the impossible level on weekly rows", () => {
    const vm = buildPreferenceGrid(instance, "p0", new Map());
    const weekly = vm.rows.find((r) => r.kind === "weekly")!;
    expect(weekly.cells.map((c) => c.level)).not.toContain("impossible");
    const duty = vm.rows.find((r) => r.kind === "duty")!;
    expect(duty.cells.map((c) => c.level)).toContain("impossible");
  });

  it("disables the eleventh undesired pick with the cap in the tooltip", () => {
    const ten = withSelections(dutyIds.slice(0, 10).map((id) => [dutyRowKey(id), "undesired"]));
    const vm = buildPreferenceGrid(instance, "p0", ten);
    const eleventhRow = vm.rows.find((r) => r.key === dutyRowKey(dutyIds[10]!))!;
    const cell = eleventhRow.cells.find((c) => c.level === "undesired")!;
    expect(cell.enabled).toBe(false);
    expect(cell.reason).toContain("cap of 10");
    // Already-selected cells stay enabled so the user can clear them.
    const firstRow = vm.rows.find((r) => r.key === dutyRowKey(dutyIds[0]!))!;
    expect(firstRow.cells.find((c) => c.level === "undesired")!.enabled).toBe(true);
  });

  it("refuses an over-cap selection and names the cap", () => {
    const ten = withSelections(dutyIds.slice(0, 10).map((id) => [dutyRowKey(id), "undesired"]));
    const result = applySelection(instance, ten, dutyRowKey(dutyIds[10]!), "undesired");
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.reason).toContain("cap of 10");
  });

  it("disables the fourth impossible pick", () => {
    const three = withSelections(dutyIds.slice(0, 3).map((id) => [dutyRowKey(id), "impossible"]));
    const vm = buildPreferenceGrid(instance, "p0", three);
    const fourth = vm.rows.find((r) => r.key === dutyRowKey(dutyIds[3]!))!;
    expect(fourth.cells.find((c) => c.level === "impossible")!.enabled).toBe(false);
    const refused = applySelection(instance, three, dutyRowKey(dutyIds[3]!), "impossible");
    expect(refused.ok).toBe(false);
  });

  it("never applies impossible to a weekly row", () => {
    const result = applySelection(instance, new Map(), weeklyRowKey("nights", 1), "impossible");
    expect(result.ok).toBe(false);
  });

  it("keeps live remaining counters in sync with selections", () => {
    const two = withSelections(dutyIds.slice(0, 2).map((id) => [dutyRowKey(id), "undesired"]));
    const vm = buildPreferenceGrid(instance, "p0", two);
    const counter = vm.counters.find((c) => c.level === "undesired" && c.month === "2026-03")!;
    expect(counter.used).toBe(2);
    expect(counter.remaining).toBe(8);
  });

  it("clicking the selected level clears it", () => {
    const one = withSelections([[dutyRowKey(dutyIds[0]!), "desired"]]);
    const result = applySelection(instance, one, dutyRowKey(dutyIds[0]!), "desired");
    expect(result.ok).toBe(true);
    if (result.ok) expect(result.selections.size).toBe(0);
  });

  it("round-trips selections through wire entries", () => {
    const picks = withSelections([
      [dutyRowKey(dutyIds[0]!), "strongly-desired"],
      [weeklyRowKey("nights", 2), "undesired"],
    ]);
    const entries = selectionsToEntries(picks);
    expect(entries).toEqual([
      { level: "strongly-desired", duty_instance_id: dutyIds[0] },
      { level: "undesired", weekly_set_id: "nights", week_index: 2 },
    ]);
    expect(entriesToSelections(entries)).toEqual(picks);
  });

  it("skips duty rows on the physician's absence days", () => {
    const withAbsence = structuredClone(instance);
    withAbsence.physicians[0]!.absences = ["2026-03-02"];
    const vm = buildPreferenceGrid(withAbsence, "p0", new Map());
    expect(vm.rows.some((r) => r.key === dutyRowKey("N@2026-03-02"))).toBe(false);
  });
});
