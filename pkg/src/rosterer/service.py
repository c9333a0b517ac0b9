"""HTTP facade for the two-role planning workflow.

Physicians log in to submit preferences and read published rosters;
planners additionally configure the roster structure, trigger solves,
adjust drafts, and publish.  Solves run on a background worker so the
API never blocks on the solver; each job works on a snapshot of the
instance taken at submission time.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import threading
from concurrent.futures import ThreadPoolExecutor

from fastapi import Body, Depends, FastAPI, Header, HTTPException, Query, Response
from fastapi.responses import JSONResponse

from . import instance_io
from . import model as m
from .derivation import derive, derived_to_dict, with_expanded_instances
from .errors import (
    BuildInfeasibleError,
    ConfigurationError,
    PublishRejectedError,
    RostererError,
    VersionConflictError,
)
from .pipeline import run_pipeline
from .solve import RosterSolution, SolverConfig
from .store import Store
from .validate import quality_report, recount_soft, validate_hard

ROLE_PLANNER = "planner"
ROLE_PHYSICIAN = "physician"

_SECTION_FIELDS = {
    "physicians": "physicians",
    "duty-templates": "duty_templates",
    "shift-templates": "shift_templates",
    "blocks": "blocks",
    "pools": "pools",
    "weekly-sets": "weekly_sets",
}


def create_app(store: Store | None = None, solver: SolverConfig | None = None, workers: int = 1) -> FastAPI:
    app = FastAPI(title="rosterer", version="0.1.0")
    app.state.store = store or Store(":memory:")
    app.state.solver = solver or SolverConfig.from_env()
    app.state.executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="solve")
    app.state.jobs_lock = threading.Lock()

    st: Store = app.state.store

    # -- auth ------------------------------------------------------------

    def auth(authorization: str | None = Header(default=None)) -> dict:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(401, "missing bearer token")
        ident = st.resolve_token(authorization.removeprefix("Bearer ").strip())
        if ident is None:
            raise HTTPException(401, "unknown token")
        return ident

    def planner(ident: dict = Depends(auth)) -> dict:
        if ident["role"] != ROLE_PLANNER:
            raise HTTPException(403, "planner role required")
        return ident

    @app.post("/api/auth/login")
    def login(body: dict = Body(...)):
        role = body.get("role")
        if role not in (ROLE_PLANNER, ROLE_PHYSICIAN):
            raise HTTPException(400, "role must be 'planner' or 'physician'")
        physician_id = body.get("physician_id")
        if role == ROLE_PHYSICIAN and not physician_id:
            raise HTTPException(400, "physician logins need a physician_id")
        token = st.create_token(role, physician_id)
        return {"token": token, "role": role, "physician_id": physician_id}

    # -- instance configuration -------------------------------------------

    @app.get("/api/instances")
    def list_instances(ident: dict = Depends(auth)):
        return st.list_instances()

    @app.post("/api/instances", status_code=201)
    def create_instance(body: dict = Body(...), ident: dict = Depends(planner)):
        inst = _decode_instance(body)
        _require_valid(inst)
        version = _run_store(lambda: st.save_instance(inst))
        return {"id": inst.id, "version": version}

    @app.get("/api/instances/{iid}")
    def get_instance(iid: str, ident: dict = Depends(auth)):
        inst, version = _load(iid)
        doc = instance_io.instance_to_dict(inst)
        return {"version": version, "instance": doc}

    @app.put("/api/instances/{iid}")
    def put_instance(iid: str, body: dict = Body(...), ident: dict = Depends(planner)):
        expected = body.get("version")
        if expected is None:
            raise HTTPException(400, "body needs the current 'version' for optimistic locking")
        inst = _decode_instance(body.get("instance", {}))
        if inst.id != iid:
            raise HTTPException(400, "instance id mismatch")
        _require_valid(inst)
        version = _run_store(lambda: st.save_instance(inst, expected_version=expected))
        return {"id": iid, "version": version}

    @app.put("/api/instances/{iid}/{section}/{item_id}")
    def put_section_item(
        iid: str, section: str, item_id: str, body: dict = Body(...), ident: dict = Depends(planner)
    ):
        return _edit_section(iid, section, item_id, body)

    @app.delete("/api/instances/{iid}/{section}/{item_id}")
    def delete_section_item(iid: str, section: str, item_id: str, version: int = Query(...), ident: dict = Depends(planner)):
        return _edit_section(iid, section, item_id, None, expected=version)

    @app.put("/api/instances/{iid}/weekend-policy")
    def put_weekend_policy(iid: str, body: dict = Body(...), ident: dict = Depends(planner)):
        inst, version = _load(iid)
        expected = body.get("version")
        if expected != version:
            raise HTTPException(409, f"instance is at version {version}")
        policy = m.WeekendPolicy(**body.get("weekend_policy", {}))
        new = inst.replace(weekend_policy=policy)
        _require_valid(new)
        return {"id": iid, "version": _run_store(lambda: st.save_instance(new, expected_version=version))}

    @app.put("/api/instances/{iid}/rest-rules")
    def put_rest_rules(iid: str, body: dict = Body(...), ident: dict = Depends(planner)):
        inst, version = _load(iid)
        expected = body.get("version")
        if expected != version:
            raise HTTPException(409, f"instance is at version {version}")
        rules = tuple(
            m.RestRule(
                from_template=r["from_template"],
                to_template=r["to_template"],
                mandatory_hours=r["mandatory_hours"],
                desired_levels=tuple(m.RestLevel(l["hours"], l["weight"]) for l in r.get("desired_levels", [])),
            )
            for r in body.get("rest_rules", [])
        )
        new = inst.replace(rest_rules=rules)
        _require_valid(new)
        return {"id": iid, "version": _run_store(lambda: st.save_instance(new, expected_version=version))}

    @app.post("/api/instances/{iid}/expand")
    def expand(iid: str, body: dict = Body(default={}), ident: dict = Depends(planner)):
        inst, version = _load(iid)
        if body.get("version") != version:
            raise HTTPException(409, f"instance is at version {version}")
        new = with_expanded_instances(inst)
        new_version = _run_store(lambda: st.save_instance(new, expected_version=version))
        return {
            "id": iid,
            "version": new_version,
            "duty_instances": len(new.duty_instances),
            "shift_instances": len(new.shift_instances),
        }

    @app.get("/api/instances/{iid}/derived")
    def derived_dump(iid: str, ident: dict = Depends(planner)):
        inst, _ = st.effective_instance(iid)
        return derived_to_dict(derive(inst))

    # -- preferences --------------------------------------------------------

    @app.post("/api/instances/{iid}/preferences")
    def post_preferences(iid: str, body: dict = Body(...), ident: dict = Depends(auth)):
        physician_id = body.get("physician_id") or ident.get("physician_id")
        if ident["role"] == ROLE_PHYSICIAN and physician_id != ident.get("physician_id"):
            raise HTTPException(403, "physicians may only edit their own preferences")
        if not physician_id:
            raise HTTPException(400, "physician_id required")
        inst, _ = _load(iid)
        try:
            inst.physician(physician_id)
        except KeyError:
            raise HTTPException(404, f"unknown physician {physician_id!r}") from None
        try:
            records = [
                m.PreferenceRecord(
                    physician_id=physician_id,
                    level=m.PreferenceLevel(e["level"]),
                    duty_instance_id=e.get("duty_instance_id"),
                    weekly_set_id=e.get("weekly_set_id"),
                    week_index=e.get("week_index"),
                )
                for e in body.get("entries", [])
            ]
        except (KeyError, ValueError) as exc:
            raise HTTPException(400, f"malformed preference entry: {exc}") from None

        base = [p for p in inst.preferences if p.physician_id != physician_id]
        candidate = inst.replace(preferences=tuple(base + records))
        errors = [f for f in m.validate_instance(candidate) if f.severity == "error"]
        if errors:
            raise HTTPException(400, "; ".join(f.message for f in errors[:3]))
        version = _run_store(
            lambda: st.save_preferences(iid, physician_id, records, body.get("expected_version"))
        )

        weekend_pref = body.get("weekend_preference")
        if weekend_pref is not None:
            try:
                kind = m.WeekendPreferenceKind(weekend_pref)
            except ValueError:
                raise HTTPException(400, f"unknown weekend preference {weekend_pref!r}") from None
            current, inst_version = _load(iid)
            updated = tuple(
                dataclasses.replace(p, weekend_preference=kind) if p.id == physician_id else p
                for p in current.physicians
            )
            _run_store(lambda: st.save_instance(current.replace(physicians=updated), expected_version=inst_version))

        caps = _remaining_caps(candidate, physician_id)
        return {
            "physician_id": physician_id,
            "version": version,
            "remaining_caps": caps,
            "weekend_preference": weekend_pref,
        }

    @app.get("/api/instances/{iid}/preferences/{physician_id}")
    def get_preferences(iid: str, physician_id: str, ident: dict = Depends(auth)):
        if ident["role"] == ROLE_PHYSICIAN and physician_id != ident.get("physician_id"):
            raise HTTPException(403, "physicians may only read their own preferences")
        inst, _ = st.effective_instance(iid)
        stored = st.load_preferences(iid).get(physician_id)
        version = stored[1] if stored else 0
        entries = [
            {
                "level": p.level.value,
                "duty_instance_id": p.duty_instance_id,
                "weekly_set_id": p.weekly_set_id,
                "week_index": p.week_index,
            }
            for p in inst.preferences
            if p.physician_id == physician_id
        ]
        try:
            weekend_pref = inst.physician(physician_id).weekend_preference.value
        except KeyError:
            raise HTTPException(404, f"unknown physician {physician_id!r}") from None
        return {
            "physician_id": physician_id,
            "version": version,
            "entries": entries,
            "remaining_caps": _remaining_caps(inst, physician_id),
            "weekend_preference": weekend_pref,
        }

    def _remaining_caps(inst: m.RosterInstance, physician_id: str) -> dict:
        """Months remaining per capped level, for the client's counters."""
        counts: dict[tuple[str, tuple[int, int]], int] = {}
        duty_by_id = {d.id: d for d in inst.duty_instances}
        for p in inst.preferences:
            if p.physician_id != physician_id:
                continue
            if p.duty_instance_id and p.duty_instance_id in duty_by_id:
                month = duty_by_id[p.duty_instance_id].date
            elif p.week_index:
                start = inst.period.start_date
                first_monday = start - dt.timedelta(days=start.weekday())
                month = first_monday + dt.timedelta(weeks=p.week_index - 1)
            else:
                continue
            key = (p.level.value, (month.year, month.month))
            counts[key] = counts.get(key, 0) + 1
        out: dict[str, dict[str, int]] = {}
        for level, cap in inst.preference_policy.monthly_caps.items():
            per_month = {}
            for (lvl, (y, mo)), n in counts.items():
                if lvl == level.value:
                    per_month[f"{y:04d}-{mo:02d}"] = max(0, cap - n)
            out[level.value] = {"cap": cap, "remaining_by_month": per_month}
        return out

    # -- solving --------------------------------------------------------------

    @app.post("/api/instances/{iid}/solve", status_code=202)
    def post_solve(iid: str, body: dict = Body(default={}), ident: dict = Depends(planner)):
        inst, version = st.effective_instance(iid)
        gap = float(body.get("gap", 0.03))
        time_limit = float(body.get("time_limit", 600.0))
        backend = body.get("backend", "external")
        if backend not in ("external", "oracle"):
            raise HTTPException(400, "backend must be 'external' or 'oracle'")
        snapshot = instance_io.instance_to_dict(inst)
        job_id = st.create_job(
            iid,
            {
                "snapshot": snapshot,
                "instance_version": version,
                "gap": gap,
                "time_limit": time_limit,
                "backend": backend,
            },
        )
        app.state.executor.submit(_run_job, job_id)
        return {"job_id": job_id, "state": "queued"}

    def _run_job(job_id: str) -> None:
        st.update_job(job_id, "running", {"started_at": dt.datetime.now(dt.timezone.utc).isoformat()})
        job = st.get_job(job_id)
        stage = "decode"
        try:
            inst = instance_io.instance_from_dict(job["snapshot"])
            stage = "solve"
            result = run_pipeline(
                inst,
                gap=job["gap"],
                time_limit=job["time_limit"],
                backend=job["backend"],
                solver=app.state.solver,
            )
            if result.roster is None:
                st.update_job(
                    job_id,
                    "failed",
                    {"stage": "solve", "error": f"no solution: {result.raw.status}", "status": result.raw.status},
                )
                return
            stage = "store"
            version = st.add_roster_version(
                inst.id,
                result.roster.to_dict(),
                result.report.to_dict() if result.report else None,
                [f.as_dict() for f in result.hard_findings],
                author="solver",
            )
            st.update_job(
                job_id,
                "done",
                {
                    "roster_version": version,
                    "status": result.raw.status,
                    "objective": result.raw.objective,
                    "bound": result.raw.bound,
                    "hard_violations": len(result.hard_findings),
                    "solver_seconds": result.roster.solver_seconds,
                    "total_seconds": result.roster.total_seconds,
                },
            )
        except BuildInfeasibleError as exc:
            st.update_job(job_id, "failed", {"stage": "build", "error": str(exc), "subjects": list(exc.subjects)})
        except RostererError as exc:
            st.update_job(job_id, "failed", {"stage": stage, "error": str(exc)})
        except Exception as exc:  # keep the job record truthful on crashes
            st.update_job(job_id, "failed", {"stage": stage, "error": f"{type(exc).__name__}: {exc}"})

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str, ident: dict = Depends(auth)):
        try:
            job = st.get_job(job_id)
        except KeyError:
            raise HTTPException(404, "unknown job") from None
        job.pop("snapshot", None)
        return job

    # -- rosters ----------------------------------------------------------------

    def _roster_version_for(ident: dict, iid: str, version: int | None) -> dict:
        if ident["role"] == ROLE_PHYSICIAN:
            published = st.published_version(iid)
            if published is None:
                raise HTTPException(404, "no published roster")
            if version not in (None, published):
                raise HTTPException(403, "physicians see only the published roster")
            version = published
        try:
            return st.get_roster_version(iid, version)
        except KeyError as exc:
            raise HTTPException(404, str(exc)) from None

    @app.get("/api/instances/{iid}/roster")
    def get_roster(iid: str, version: int | None = Query(default=None), ident: dict = Depends(auth)):
        return _roster_version_for(ident, iid, version)

    @app.get("/api/instances/{iid}/roster-versions")
    def get_roster_versions(iid: str, ident: dict = Depends(planner)):
        return st.list_roster_versions(iid)

    @app.post("/api/instances/{iid}/roster/{version}/adjust")
    def adjust(iid: str, version: int, body: dict = Body(...), ident: dict = Depends(planner)):
        try:
            record = st.get_roster_version(iid, version)
        except KeyError as exc:
            raise HTTPException(404, str(exc)) from None
        inst, _ = st.effective_instance(iid)
        roster = RosterSolution.from_dict(record["roster"])
        duty_assignments = dict(roster.duty_assignments)
        for iid_duty, pid in body.get("duties", {}).items():
            try:
                inst.duty_instance(iid_duty)
            except KeyError:
                raise HTTPException(400, f"unknown duty instance {iid_duty!r}") from None
            if pid is None:
                duty_assignments.pop(iid_duty, None)
            else:
                try:
                    inst.physician(pid)
                except KeyError:
                    raise HTTPException(400, f"unknown physician {pid!r}") from None
                duty_assignments[iid_duty] = pid
        shift_assignments = {k: list(v) for k, v in roster.shift_assignments.items()}
        for iid_shift, pids in body.get("shifts", {}).items():
            if iid_shift not in shift_assignments:
                raise HTTPException(400, f"unknown shift instance {iid_shift!r}")
            shift_assignments[iid_shift] = list(pids)

        unassigned = tuple(d.id for d in inst.duty_instances if d.id not in duty_assignments)
        adjusted = RosterSolution(
            instance_id=iid,
            duty_assignments=duty_assignments,
            shift_assignments={k: tuple(v) for k, v in shift_assignments.items()},
            unassigned_duties=unassigned,
            objective=0.0,
            bound=roster.bound,
            status=roster.status,
            backend=roster.backend + "+manual",
            gap_target=roster.gap_target,
            solver_seconds=roster.solver_seconds,
            total_seconds=roster.total_seconds,
        )
        der = derive(inst)
        findings = validate_hard(adjusted, inst, der)
        tally = recount_soft(adjusted, inst, der)
        adjusted = dataclasses.replace(adjusted, objective=tally.objective)
        report = quality_report(adjusted, inst, der, hard_findings=findings, tally=tally)
        new_version = st.add_roster_version(
            iid,
            adjusted.to_dict(),
            report.to_dict(),
            [f.as_dict() for f in findings],
            author=f"manual:{ident['role']}",
        )
        return {
            "version": new_version,
            "hard_findings": [f.as_dict() for f in findings],
            "objective": tally.objective,
            "publishable": not findings,
        }

    @app.post("/api/instances/{iid}/roster/{version}/publish")
    def publish(iid: str, version: int, ident: dict = Depends(planner)):
        try:
            st.publish_roster(iid, version, author=ident["role"])
        except KeyError as exc:
            raise HTTPException(404, str(exc)) from None
        except PublishRejectedError as exc:
            record = st.get_roster_version(iid, version)
            raise HTTPException(
                409, {"message": str(exc), "findings": record["findings"]}
            ) from None
        return {"instance_id": iid, "published_version": version}

    # -- calendar export -----------------------------------------------------------

    @app.get("/api/instances/{iid}/calendar/{physician_id}.ics")
    def calendar(iid: str, physician_id: str, version: int | None = Query(default=None), ident: dict = Depends(auth)):
        if ident["role"] == ROLE_PHYSICIAN and physician_id != ident.get("physician_id"):
            raise HTTPException(403, "physicians may only export their own calendar")
        record = _roster_version_for(ident, iid, version)
        inst, _ = st.effective_instance(iid)
        roster = RosterSolution.from_dict(record["roster"])
        text = render_icalendar(inst, roster, physician_id)
        return Response(content=text, media_type="text/calendar")

    # -- shared helpers -----------------------------------------------------------

    def _decode_instance(doc: dict) -> m.RosterInstance:
        try:
            return instance_io.instance_from_dict(doc)
        except instance_io.DocumentError as exc:
            raise HTTPException(400, str(exc)) from None

    def _require_valid(inst: m.RosterInstance) -> None:
        errors = [f for f in m.validate_instance(inst) if f.severity == "error"]
        if errors:
            raise HTTPException(400, "; ".join(f.message for f in errors[:5]))

    def _load(iid: str) -> tuple[m.RosterInstance, int]:
        try:
            return st.load_instance(iid)
        except KeyError:
            raise HTTPException(404, f"unknown instance {iid!r}") from None

    def _run_store(fn):
        try:
            return fn()
        except VersionConflictError as exc:
            raise HTTPException(409, str(exc)) from None

    def _edit_section(iid: str, section: str, item_id: str, body: dict | None, expected: int | None = None):
        if section not in _SECTION_FIELDS:
            raise HTTPException(404, f"unknown section {section!r}")
        inst, version = _load(iid)
        if body is not None:
            expected = body.get("version")
        if expected != version:
            raise HTTPException(409, f"instance is at version {version}")
        field = _SECTION_FIELDS[section]
        items = list(getattr(inst, field))
        items = [item for item in items if item.id != item_id]
        if body is not None:
            item_doc = dict(body.get("item", {}))
            item_doc.setdefault("id", item_id)
            if item_doc["id"] != item_id:
                raise HTTPException(400, "item id mismatch")
            full = instance_io.instance_to_dict(inst)
            full[field] = [item_doc]
            try:
                decoded = instance_io.instance_from_dict(full)
            except instance_io.DocumentError as exc:
                raise HTTPException(400, str(exc)) from None
            items.append(getattr(decoded, field)[0])
        new = inst.replace(**{field: tuple(items)})
        _require_valid(new)
        new_version = _run_store(lambda: st.save_instance(new, expected_version=version))
        return {"id": iid, "version": new_version, "section": section, "item_id": item_id}

    @app.exception_handler(ConfigurationError)
    def config_error(_, exc: ConfigurationError):  # pragma: no cover - safety net
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    return app


def render_icalendar(inst: m.RosterInstance, roster: RosterSolution, physician_id: str) -> str:
    """Personal calendar of assigned duties and shifts (RFC 5545 subset)."""

    def fmt(abs_minutes: int) -> str:
        moment = dt.datetime.combine(inst.period.start_date, dt.time(0, 0)) + dt.timedelta(minutes=abs_minutes)
        return moment.strftime("%Y%m%dT%H%M%S")

    lines = [
        "BEGIN:VCALENDAR",
        "VERSION:2.0",
        "PRODID:-//rosterer//roster//EN",
        "CALSCALE:GREGORIAN",
    ]
    events = []
    for d in inst.duty_instances:
        if roster.duty_assignments.get(d.id) == physician_id:
            tpl = inst.duty_template(d.template_id)
            events.append((d.start_abs, d.end_abs, d.id, tpl.label or tpl.id))
    for s in inst.shift_instances:
        if physician_id in roster.shift_assignments.get(s.id, ()):
            tpl = inst.shift_template(s.template_id)
            events.append((s.start_abs, s.end_abs, s.id, tpl.label or tpl.id))
    for start, end, uid, label in sorted(events):
        lines += [
            "BEGIN:VEVENT",
            f"UID:{uid}@{inst.id}",
            f"DTSTART:{fmt(start)}",
            f"DTEND:{fmt(end)}",
            f"SUMMARY:{label}",
            "END:VEVENT",
        ]
    lines.append("END:VCALENDAR")
    return "\r\n".join(lines) + "\r\n"


def main() -> None:  # pragma: no cover - thin launcher
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Run the rostering service")
    parser.add_argument("--store", default="rosterer.db")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run(create_app(Store(args.store)), host=args.host, port=args.port)


if __name__ == "__main__":  # pragma: no cover
    main()
