// Application shell: login, then the role-specific screens. The server
// holds all authoritative state; refreshing reproduces it.

import { ApiClient, ApiError } from "./api.js";
import {
  renderAdjustEditor,
  renderCalendar,
  renderLogin,
  renderPlannerDashboard,
  renderPreferenceGrid,
  renderWeekendToggle,
  el,
} from "./render.js";
import { blockDraftToDoc, validateBlockDraft } from "./viewmodels/blockDraft.js";
import {
  applyServerResponse,
  buildAdjustEditor,
  pendingEdits,
  publishTarget,
  type AdjustEditorState,
} from "./viewmodels/adjustEditor.js";
import {
  applySelection,
  buildPreferenceGrid,
  entriesToSelections,
  selectionsToEntries,
  type Selections,
} from "./viewmodels/preferenceGrid.js";
import { buildRosterCalendar } from "./viewmodels/rosterCalendar.js";
import type { InstanceDoc } from "./types.js";

const api = new ApiClient();

function mount(node: HTMLElement): void {
  const root = document.getElementById("app")!;
  root.replaceChildren(node);
}

function flash(message: string): void {
  const banner = el("div", { class: "flash" }, [message]);
  document.body.prepend(banner);
  setTimeout(() => banner.remove(), 6000);
}

async function start(): Promise<void> {
  mount(
    renderLogin(async (role, physicianId) => {
      try {
        await api.login(role, physicianId || undefined);
        const instances = await api.listInstances();
        if (!instances.length) {
          flash("no instances configured yet");
          return;
        }
        const first = instances[0]!;
        if (role === "planner") await plannerScreen(first.id);
        else await physicianScreen(first.id, physicianId);
      } catch (err) {
        flash(err instanceof ApiError ? err.message : String(err));
      }
    }),
  );
}

async function plannerScreen(instanceId: string): Promise<void> {
  const { instance, version } = await api.getInstance(instanceId);
  mount(
    renderPlannerDashboard(
      instance,
      async () => {
        try {
          const { job_id } = await api.solve(instanceId, { gap: 0.03 });
          flash(`solve started (job ${job_id})`);
          const job = await api.pollJob(job_id);
          if (job.state === "failed") {
            flash(`solve failed at ${job.stage}: ${job.error}`);
            return;
          }
          flash(`roster version ${job.roster_version} ready (objective ${job.objective})`);
          await adjustScreen(instanceId, instance);
        } catch (err) {
          flash(err instanceof ApiError ? err.message : String(err));
        }
      },
      () => adjustScreen(instanceId, instance),
      async (draft) => {
        const problems = validateBlockDraft(instance, draft);
        if (problems.length) {
          flash(problems.join("; "));
          return;
        }
        try {
          const doc = blockDraftToDoc(instance, draft);
          await api.putSectionItem(instanceId, "blocks", doc.id, doc, version);
          flash(`block ${doc.id} created`);
          await plannerScreen(instanceId); // reload server state
        } catch (err) {
          flash(err instanceof ApiError ? err.message : String(err));
        }
      },
    ),
  );
}

async function adjustScreen(instanceId: string, instance: InstanceDoc): Promise<void> {
  let record;
  try {
    record = await api.getRoster(instanceId);
  } catch (err) {
    flash(err instanceof ApiError ? err.message : String(err));
    return;
  }
  let state: AdjustEditorState = buildAdjustEditor(instance, record);

  const redraw = () => {
    mount(
      renderAdjustEditor(
        state,
        (dutyId, pid) => {
          state = { ...state, cells: state.cells.map((c) => (c.dutyId === dutyId ? { ...c, pending: pid } : c)) };
          redraw();
        },
        async () => {
          try {
            const resp = await api.adjustRoster(instanceId, publishTarget(state), pendingEdits(state));
            state = applyServerResponse(state, resp);
            redraw();
          } catch (err) {
            flash(err instanceof ApiError ? err.message : String(err));
          }
        },
        async () => {
          try {
            const resp = await api.publishRoster(instanceId, publishTarget(state));
            flash(`published version ${resp.published_version}`);
          } catch (err) {
            if (err instanceof ApiError && err.findings.length) {
              state = { ...state, findings: err.findings, publishable: false };
              redraw();
            }
            flash(err instanceof ApiError ? err.message : String(err));
          }
        },
      ),
    );
  };
  redraw();
}

async function physicianScreen(instanceId: string, physicianId: string): Promise<void> {
  const { instance } = await api.getInstance(instanceId);
  const stored = await api.getPreferences(instanceId, physicianId);
  let selections: Selections = entriesToSelections(stored.entries);
  let version = stored.version;
  let weekendPreference = stored.weekend_preference;

  const redraw = () => {
    const vm = buildPreferenceGrid(instance, physicianId, selections);
    const grid = renderPreferenceGrid(
      vm,
      (rowKey, level) => {
        const result = applySelection(instance, selections, rowKey, level);
        if (!result.ok) {
          flash(result.reason);
          return;
        }
        selections = result.selections;
        redraw();
      },
      async () => {
        try {
          const resp = await api.submitPreferences(
            instanceId,
            physicianId,
            selectionsToEntries(selections),
            version,
            weekendPreference,
          );
          version = resp.version;
          flash("preferences saved");
        } catch (err) {
          flash(err instanceof ApiError ? err.message : String(err)); // server names the violated cap
        }
      },
    );
    const toggle = renderWeekendToggle(weekendPreference, (value) => {
      weekendPreference = value;
    });
    const screen = el("div", {}, [toggle, grid]);
    api
      .getRoster(instanceId)
      .then((record) => {
        screen.append(el("h3", {}, ["Published roster"]));
        screen.append(renderCalendar(buildRosterCalendar(instance, record.roster, physicianId)));
        screen.append(
          el("a", { href: api.calendarUrl(instanceId, physicianId), download: "roster.ics" }, [
            "Export calendar",
          ]),
        );
      })
      .catch(() => {
        screen.append(el("p", {}, ["No published roster yet."]));
      });
    mount(screen);
  };
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void start();
}
