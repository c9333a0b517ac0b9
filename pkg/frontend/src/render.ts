// Thin DOM layer. All state changes flow through the API client; these
// functions only turn view-models into elements and wire callbacks.

import type { AdjustEditorState } from "./viewmodels/adjustEditor.js";
import { canPublish, hardFindings } from "./viewmodels/adjustEditor.js";
import type { BlockDraft } from "./viewmodels/blockDraft.js";
import type { PreferenceGridViewModel } from "./viewmodels/preferenceGrid.js";
import type { CalendarDay } from "./viewmodels/rosterCalendar.js";
import type { InstanceDoc, PreferenceLevel, WeekendPreference } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else if (key === "title") node.title = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function renderLogin(onLogin: (role: "planner" | "physician", physicianId: string) => void): HTMLElement {
  const physicianInput = el("input", { placeholder: "physician id", id: "login-physician" });
  const root = el("div", { class: "login" }, [
    el("h1", {}, ["Duty roster"]),
    el("button", { id: "login-planner" }, ["Log in as planner"]),
    el("div", {}, [
      physicianInput,
      el("button", { id: "login-physician-btn" }, ["Log in as physician"]),
    ]),
  ]);
  root.querySelector("#login-planner")!.addEventListener("click", () => onLogin("planner", ""));
  root.querySelector("#login-physician-btn")!.addEventListener("click", () => {
    if (physicianInput.value) onLogin("physician", physicianInput.value);
  });
  return root;
}

export function renderWeekendToggle(
  current: WeekendPreference,
  onChange: (value: WeekendPreference) => void,
): HTMLElement {
  const options: [WeekendPreference, string][] = [
    ["one-duty", "more weekends, one duty each"],
    ["multiple-duties", "fewer weekends, several duties each"],
    ["none", "no weekend preference"],
  ];
  const group = el("fieldset", { class: "weekend-toggle" }, [el("legend", {}, ["Worked weekends"])]);
  for (const [value, label] of options) {
    const input = el("input", { type: "radio", name: "weekend-preference", value });
    input.checked = value === current;
    input.addEventListener("change", () => onChange(value));
    group.append(el("label", {}, [input, ` ${label}`]));
  }
  return group;
}

export function renderPreferenceGrid(
  vm: PreferenceGridViewModel,
  onPick: (rowKey: string, level: PreferenceLevel) => void,
  onSubmit: () => void,
): HTMLElement {
  const counters = el(
    "div",
    { class: "cap-counters" },
    vm.counters.map((c) =>
      el("span", { class: "cap", "data-level": c.level }, [
        `${c.level} ${c.month}: ${c.remaining} of ${c.cap} left`,
      ]),
    ),
  );
  const table = el("table", { class: "pref-grid" });
  for (const row of vm.rows) {
    const tr = el("tr", { "data-row": row.key }, [el("td", {}, [row.label])]);
    for (const cell of row.cells) {
      const button = el(
        "button",
        {
          class: `pref-cell${cell.selected ? " selected" : ""}`,
          "data-level": cell.level,
          ...(cell.enabled ? {} : { disabled: "disabled" }),
          ...(cell.reason ? { title: cell.reason } : {}),
        },
        [cell.level],
      );
      if (cell.enabled) button.addEventListener("click", () => onPick(row.key, cell.level));
      tr.append(el("td", {}, [button]));
    }
    table.append(tr);
  }
  const submit = el("button", { class: "submit" }, ["Submit preferences"]);
  submit.addEventListener("click", onSubmit);
  return el("div", { class: "preferences" }, [counters, table, submit]);
}

export function renderCalendar(days: CalendarDay[]): HTMLElement {
  const table = el("table", { class: "calendar" });
  for (const day of days) {
    const cell = el(
      "td",
      { class: "day" },
      [
        el("div", { class: "date" }, [day.date]),
        ...day.entries.map((entry) =>
          el("div", { class: `entry${entry.mine ? " mine" : ""}` }, [
            `${entry.label} ${entry.time} ${entry.physician ?? "(open)"}`,
          ]),
        ),
      ],
    );
    if (day.weekday === 0 || days.length === 0) table.append(el("tr"));
    table.lastElementChild?.append(cell);
  }
  return table;
}

export function renderAdjustEditor(
  state: AdjustEditorState,
  onEdit: (dutyId: string, physicianId: string | null) => void,
  onSave: () => void,
  onPublish: () => void,
): HTMLElement {
  const findings = el(
    "ul",
    { class: "findings" },
    state.findings.map((f) =>
      el("li", { class: `finding ${f.severity}` }, [`[${f.family}] ${f.message}`]),
    ),
  );
  const table = el("table", { class: "adjust" });
  for (const cell of state.cells) {
    const select = el("select", { "data-duty": cell.dutyId });
    select.append(el("option", { value: "" }, ["(unassigned)"]));
    for (const pid of cell.options) {
      const option = el("option", { value: pid }, [pid]);
      if ((cell.pending ?? cell.assigned) === pid) option.selected = true;
      select.append(option);
    }
    select.addEventListener("change", () => onEdit(cell.dutyId, select.value || null));
    table.append(el("tr", {}, [el("td", {}, [`${cell.label} ${cell.date}`]), el("td", {}, [select])]));
  }
  const save = el("button", { class: "save" }, ["Check adjustments"]);
  save.addEventListener("click", onSave);
  const publish = el(
    "button",
    { class: "publish", ...(canPublish(state) ? {} : { disabled: "disabled" }) },
    ["Publish"],
  );
  if (!canPublish(state)) {
    publish.title = hardFindings(state).length
      ? "hard findings must be resolved before publishing"
      : "check adjustments first";
  }
  publish.addEventListener("click", onPublish);
  return el("div", { class: "adjust-editor" }, [findings, table, save, publish]);
}

export function renderBlockCreator(
  instance: InstanceDoc,
  onCreate: (draft: BlockDraft) => void,
): HTMLElement {
  const idInput = el("input", { placeholder: "block id", class: "block-id" });
  const kindSelect = el("select", { class: "block-kind" }, [
    el("option", { value: "duty-block" }, ["duty block"]),
    el("option", { value: "shift-block" }, ["shift block"]),
  ]);
  const memberSelect = el("select", { multiple: "multiple", size: "8", class: "block-members" });
  const fillMembers = () => {
    memberSelect.replaceChildren();
    const source = kindSelect.value === "duty-block" ? instance.duty_instances : instance.shift_instances;
    for (const occ of source) {
      memberSelect.append(el("option", { value: occ.id }, [`${occ.id}`]));
    }
  };
  fillMembers();
  kindSelect.addEventListener("change", fillMembers);
  const freeDays = el("input", { type: "number", value: "0", min: "0", class: "block-free-days" });
  const noExtraDuties = el("input", { type: "checkbox", class: "block-no-extra-duties" });
  const create = el("button", { class: "create-block" }, ["Create block"]);
  create.addEventListener("click", () =>
    onCreate({
      id: idInput.value,
      kind: kindSelect.value as BlockDraft["kind"],
      memberIds: Array.from(memberSelect.selectedOptions).map((o) => o.value),
      freeDaysAfter: Number(freeDays.value),
      allowExtraDuties: !noExtraDuties.checked,
      allowExtraShifts: true,
    }),
  );
  return el("fieldset", { class: "block-creator" }, [
    el("legend", {}, ["Create a block"]),
    idInput,
    kindSelect,
    memberSelect,
    el("label", {}, ["free days after ", freeDays]),
    el("label", {}, [noExtraDuties, " no extra duties inside"]),
    create,
  ]);
}

export function renderPlannerDashboard(
  instance: InstanceDoc,
  onSolve: () => void,
  onOpenAdjust: () => void,
  onCreateBlock?: (draft: BlockDraft) => void,
): HTMLElement {
  const summary = el("ul", { class: "config-summary" }, [
    el("li", {}, [`${instance.physicians.length} physicians`]),
    el("li", {}, [`${instance.duty_templates.length} duty templates, ${instance.shift_templates.length} ward shifts`]),
    el("li", {}, [`${instance.blocks.length} blocks, ${instance.pools.length} pools`]),
    el("li", {}, [`${instance.duty_instances.length} duty instances in period`]),
  ]);
  const blocks = el(
    "ul",
    { class: "blocks" },
    instance.blocks.map((b) =>
      el("li", {}, [`${b.id} (${b.kind}): ${b.members.join(", ")}${b.free_days_after ? ` +${b.free_days_after} free days` : ""}`]),
    ),
  );
  const solve = el("button", { class: "solve" }, ["Generate roster"]);
  solve.addEventListener("click", onSolve);
  const adjust = el("button", { class: "open-adjust" }, ["Adjust latest roster"]);
  adjust.addEventListener("click", onOpenAdjust);
  const children: (Node | string)[] = [
    el("h2", {}, [instance.label || instance.id]),
    summary,
    el("h3", {}, ["Blocks"]),
    blocks,
  ];
  if (onCreateBlock) children.push(renderBlockCreator(instance, onCreateBlock));
  children.push(solve, adjust);
  return el("div", { class: "dashboard" }, children);
}
