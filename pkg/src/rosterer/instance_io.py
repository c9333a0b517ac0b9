"""Instance, roster, and report document encoding.

One self-contained UTF-8 JSON document per artifact, with a mandatory
``schema_version`` field.  This format is the contract between the CLI,
the HTTP service, persistence, and the web client.  Encoding is
deterministic (sorted keys), so identical values produce identical
bytes.
"""

from __future__ import annotations

import datetime as dt
import json
from typing import Any

from . import model as m

DOC_KIND_INSTANCE = "roster-instance"
DOC_KIND_ROSTER = "roster-solution"
DOC_KIND_REPORT = "quality-report"


class DocumentError(ValueError):
    """Raised for malformed or wrong-version documents."""


def _date(d: dt.date) -> str:
    return d.isoformat()


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text)


# -- encoding ---------------------------------------------------------------


def instance_to_dict(inst: m.RosterInstance) -> dict[str, Any]:
    p = inst.period
    return {
        "schema_version": inst.schema_version,
        "kind": DOC_KIND_INSTANCE,
        "id": inst.id,
        "label": inst.label,
        "period": {
            "start_date": _date(p.start_date),
            "end_date": _date(p.end_date),
            "public_holidays": sorted(_date(h) for h in p.public_holidays),
            "weekend_threshold": m.format_time_of_day(p.weekend_threshold),
        },
        "qualifications": [{"id": q.id, "label": q.label} for q in inst.qualifications],
        "physicians": [
            {
                "id": ph.id,
                "name": ph.name,
                "employment_rate": ph.employment_rate,
                "qualifications": sorted(ph.qualifications),
                "absences": sorted(_date(a) for a in ph.absences),
                "planned_manually": ph.planned_manually,
                "weekend_preference": ph.weekend_preference.value,
            }
            for ph in inst.physicians
        ],
        "duty_templates": [_duty_template_to_dict(t) for t in inst.duty_templates],
        "shift_templates": [_shift_template_to_dict(t) for t in inst.shift_templates],
        "duty_instances": [
            {
                "id": d.id,
                "template_id": d.template_id,
                "date": _date(d.date),
                "start_abs": d.start_abs,
                "end_abs": d.end_abs,
                "pre_assigned": d.pre_assigned,
            }
            for d in inst.duty_instances
        ],
        "shift_instances": [
            {
                "id": s.id,
                "template_id": s.template_id,
                "date": _date(s.date),
                "start_abs": s.start_abs,
                "end_abs": s.end_abs,
                "pre_assigned": list(s.pre_assigned),
            }
            for s in inst.shift_instances
        ],
        "blocks": [
            {
                "id": b.id,
                "kind": b.kind.value,
                "members": list(b.members),
                "allow_extra_duties_inside": b.allow_extra_duties_inside,
                "allow_extra_shifts_inside": b.allow_extra_shifts_inside,
                "free_days_after": b.free_days_after,
                "consecutive_predecessor": b.consecutive_predecessor,
                "desired_consecutive_weight": b.desired_consecutive_weight,
                "max_consecutive_run": b.max_consecutive_run,
            }
            for b in inst.blocks
        ],
        "rest_rules": [
            {
                "from_template": r.from_template,
                "to_template": r.to_template,
                "mandatory_hours": r.mandatory_hours,
                "desired_levels": [{"hours": l.hours, "weight": l.weight} for l in r.desired_levels],
            }
            for r in inst.rest_rules
        ],
        "pools": [_pool_to_dict(pool) for pool in inst.pools],
        "weekly_sets": [
            {
                "id": w.id,
                "label": w.label,
                "duty_templates": sorted(w.duty_templates),
                "shift_templates": sorted(w.shift_templates),
            }
            for w in inst.weekly_sets
        ],
        "preferences": [
            {
                "physician_id": pr.physician_id,
                "level": pr.level.value,
                "duty_instance_id": pr.duty_instance_id,
                "weekly_set_id": pr.weekly_set_id,
                "week_index": pr.week_index,
            }
            for pr in inst.preferences
        ],
        "preference_policy": {
            "monthly_caps": {level.value: cap for level, cap in sorted(inst.preference_policy.monthly_caps.items(), key=lambda kv: kv[0].value)},
        },
        "weekend_policy": {
            "max_we": inst.weekend_policy.max_we,
            "des_max_we": inst.weekend_policy.des_max_we,
            "des_max_we_weight": inst.weekend_policy.des_max_we_weight,
            "min_free_we": inst.weekend_policy.min_free_we,
            "des_min_free_we": inst.weekend_policy.des_min_free_we,
            "des_min_free_we_weight": inst.weekend_policy.des_min_free_we_weight,
            "cons_we": inst.weekend_policy.cons_we,
            "preference_violation_weight": inst.weekend_policy.preference_violation_weight,
        },
        "carryover": {
            "lookback_days": inst.carryover.lookback_days,
            "assignments": [
                {
                    "physician_id": a.physician_id,
                    "kind": a.kind,
                    "template_id": a.template_id,
                    "date": _date(a.date),
                    "start_abs": a.start_abs,
                    "end_abs": a.end_abs,
                }
                for a in inst.carryover.assignments
            ],
            "past_we": dict(sorted(inst.carryover.past_we.items())),
            "pending_free_days": dict(sorted(inst.carryover.pending_free_days.items())),
            "prev_block_assignments": {k: list(v) for k, v in sorted(inst.carryover.prev_block_assignments.items())},
        },
        "weights": {f: getattr(inst.weights, f) for f in sorted(_weight_fields())},
    }


def _duty_template_to_dict(t: m.DutyTemplate) -> dict[str, Any]:
    return {
        "id": t.id,
        "label": t.label,
        "weekdays": sorted(t.weekdays),
        "holiday_rule": t.holiday_rule.value if t.holiday_rule else None,
        "pre_holiday_rule": t.pre_holiday_rule.value if t.pre_holiday_rule else None,
        "start": m.format_time_of_day(t.start),
        "end": m.format_time_of_day(t.end),
        "holiday_override": _override_to_dict(t.holiday_override),
        "mandatory": t.mandatory,
        "forbidden_before_absence": t.forbidden_before_absence,
        "forbidden_after_absence": t.forbidden_after_absence,
        "desired_consecutive": t.desired_consecutive,
        "required_quals": sorted(t.required_quals),
        "excluded_quals": sorted(t.excluded_quals),
        "desired_quals": sorted(t.desired_quals),
        "undesired_quals": sorted(t.undesired_quals),
    }


def _shift_template_to_dict(t: m.ShiftTemplate) -> dict[str, Any]:
    return {
        "id": t.id,
        "label": t.label,
        "ward_members": sorted(t.ward_members),
        "weekdays": sorted(t.weekdays),
        "holiday_rule": t.holiday_rule.value if t.holiday_rule else None,
        "pre_holiday_rule": t.pre_holiday_rule.value if t.pre_holiday_rule else None,
        "start": m.format_time_of_day(t.start),
        "end": m.format_time_of_day(t.end),
        "holiday_override": _override_to_dict(t.holiday_override),
        "min_staff": t.min_staff,
        "desired_min_staff": t.desired_min_staff,
        "max_staff": t.max_staff,
        "desired_penalty_weight": t.desired_penalty_weight,
        "required_quals": sorted(t.required_quals),
        "excluded_quals": sorted(t.excluded_quals),
        "desired_quals": sorted(t.desired_quals),
        "undesired_quals": sorted(t.undesired_quals),
    }


def _pool_to_dict(p: m.Pool) -> dict[str, Any]:
    return {
        "id": p.id,
        "label": p.label,
        "physicians": sorted(p.physicians),
        "duty_instances": sorted(p.duty_instances),
        "exact_count": p.exact_count,
        "max_duties": p.max_duties,
        "des_max_duties": p.des_max_duties,
        "des_max_duties_weight": p.des_max_duties_weight,
        "min_duties": p.min_duties,
        "des_min_duties": p.des_min_duties,
        "des_min_duties_weight": p.des_min_duties_weight,
        "max_phy_per_day": p.max_phy_per_day,
        "des_max_phy_per_day": p.des_max_phy_per_day,
        "des_max_phy_weight": p.des_max_phy_weight,
        "fair_distribution": p.fair_distribution,
        "fairness_down_weight": p.fairness_down_weight,
        "fairness_up_weight": p.fairness_up_weight,
    }


def _override_to_dict(o: m.TimeWindowOverride | None):
    if o is None:
        return None
    return {"start": m.format_time_of_day(o.start), "end": m.format_time_of_day(o.end)}


def _weight_fields() -> list[str]:
    import dataclasses

    return [f.name for f in dataclasses.fields(m.WeightConfig)]


# -- decoding ---------------------------------------------------------------


def instance_from_dict(doc: dict[str, Any]) -> m.RosterInstance:
    if doc.get("kind") != DOC_KIND_INSTANCE:
        raise DocumentError(f"not a {DOC_KIND_INSTANCE} document")
    version = doc.get("schema_version")
    if version != m.SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema version {version!r}")
    try:
        return _decode_instance(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed instance document: {exc}") from exc


def _decode_instance(doc: dict[str, Any]) -> m.RosterInstance:
    p = doc["period"]
    period = m.PlanningPeriod(
        start_date=_parse_date(p["start_date"]),
        end_date=_parse_date(p["end_date"]),
        public_holidays=frozenset(_parse_date(h) for h in p.get("public_holidays", [])),
        weekend_threshold=m.parse_time_of_day(p.get("weekend_threshold", "21:00")),
    )
    co = doc.get("carryover", {})
    wdoc = doc.get("weights", {})
    unknown = set(wdoc) - set(_weight_fields())
    if unknown:
        raise DocumentError(f"unknown weight fields {sorted(unknown)}")
    return m.RosterInstance(
        id=doc["id"],
        label=doc.get("label", ""),
        schema_version=doc["schema_version"],
        period=period,
        qualifications=tuple(m.Qualification(q["id"], q.get("label", "")) for q in doc.get("qualifications", [])),
        physicians=tuple(
            m.Physician(
                id=ph["id"],
                name=ph.get("name", ""),
                employment_rate=ph.get("employment_rate", 1.0),
                qualifications=frozenset(ph.get("qualifications", [])),
                absences=frozenset(_parse_date(a) for a in ph.get("absences", [])),
                planned_manually=ph.get("planned_manually", False),
                weekend_preference=m.WeekendPreferenceKind(ph.get("weekend_preference", "none")),
            )
            for ph in doc.get("physicians", [])
        ),
        duty_templates=tuple(_decode_duty_template(t) for t in doc.get("duty_templates", [])),
        shift_templates=tuple(_decode_shift_template(t) for t in doc.get("shift_templates", [])),
        duty_instances=tuple(
            m.DutyInstance(
                id=d["id"],
                template_id=d["template_id"],
                date=_parse_date(d["date"]),
                start_abs=d["start_abs"],
                end_abs=d["end_abs"],
                pre_assigned=d.get("pre_assigned"),
            )
            for d in doc.get("duty_instances", [])
        ),
        shift_instances=tuple(
            m.ShiftInstance(
                id=s["id"],
                template_id=s["template_id"],
                date=_parse_date(s["date"]),
                start_abs=s["start_abs"],
                end_abs=s["end_abs"],
                pre_assigned=tuple(s.get("pre_assigned", [])),
            )
            for s in doc.get("shift_instances", [])
        ),
        blocks=tuple(
            m.BlockDefinition(
                id=b["id"],
                kind=m.BlockKind(b["kind"]),
                members=tuple(b.get("members", [])),
                allow_extra_duties_inside=b.get("allow_extra_duties_inside", True),
                allow_extra_shifts_inside=b.get("allow_extra_shifts_inside", True),
                free_days_after=b.get("free_days_after", 0),
                consecutive_predecessor=b.get("consecutive_predecessor"),
                desired_consecutive_weight=b.get("desired_consecutive_weight"),
                max_consecutive_run=b.get("max_consecutive_run"),
            )
            for b in doc.get("blocks", [])
        ),
        rest_rules=tuple(
            m.RestRule(
                from_template=r["from_template"],
                to_template=r["to_template"],
                mandatory_hours=r["mandatory_hours"],
                desired_levels=tuple(m.RestLevel(l["hours"], l["weight"]) for l in r.get("desired_levels", [])),
            )
            for r in doc.get("rest_rules", [])
        ),
        pools=tuple(_decode_pool(pl) for pl in doc.get("pools", [])),
        weekly_sets=tuple(
            m.WeeklySetDefinition(
                id=w["id"],
                label=w.get("label", ""),
                duty_templates=frozenset(w.get("duty_templates", [])),
                shift_templates=frozenset(w.get("shift_templates", [])),
            )
            for w in doc.get("weekly_sets", [])
        ),
        preferences=tuple(
            m.PreferenceRecord(
                physician_id=pr["physician_id"],
                level=m.PreferenceLevel(pr["level"]),
                duty_instance_id=pr.get("duty_instance_id"),
                weekly_set_id=pr.get("weekly_set_id"),
                week_index=pr.get("week_index"),
            )
            for pr in doc.get("preferences", [])
        ),
        preference_policy=m.PreferencePolicy(
            monthly_caps={
                m.PreferenceLevel(level): cap
                for level, cap in doc.get("preference_policy", {}).get("monthly_caps", {}).items()
            }
        ),
        weekend_policy=m.WeekendPolicy(**doc.get("weekend_policy", {})),
        carryover=m.CarryoverState(
            lookback_days=co.get("lookback_days", 0),
            assignments=tuple(
                m.CarryoverAssignment(
                    physician_id=a["physician_id"],
                    kind=a["kind"],
                    template_id=a["template_id"],
                    date=_parse_date(a["date"]),
                    start_abs=a["start_abs"],
                    end_abs=a["end_abs"],
                )
                for a in co.get("assignments", [])
            ),
            past_we=dict(co.get("past_we", {})),
            pending_free_days=dict(co.get("pending_free_days", {})),
            prev_block_assignments={k: tuple(v) for k, v in co.get("prev_block_assignments", {}).items()},
        ),
        weights=m.WeightConfig(**wdoc),
    )


def _decode_duty_template(t: dict[str, Any]) -> m.DutyTemplate:
    return m.DutyTemplate(
        id=t["id"],
        label=t.get("label", ""),
        weekdays=frozenset(t.get("weekdays", [])),
        holiday_rule=m.HolidayRule(t["holiday_rule"]) if t.get("holiday_rule") else None,
        pre_holiday_rule=m.HolidayRule(t["pre_holiday_rule"]) if t.get("pre_holiday_rule") else None,
        start=m.parse_time_of_day(t["start"]),
        end=m.parse_time_of_day(t["end"]),
        holiday_override=_decode_override(t.get("holiday_override")),
        mandatory=t.get("mandatory", True),
        forbidden_before_absence=t.get("forbidden_before_absence", False),
        forbidden_after_absence=t.get("forbidden_after_absence", False),
        desired_consecutive=t.get("desired_consecutive", False),
        required_quals=frozenset(t.get("required_quals", [])),
        excluded_quals=frozenset(t.get("excluded_quals", [])),
        desired_quals=frozenset(t.get("desired_quals", [])),
        undesired_quals=frozenset(t.get("undesired_quals", [])),
    )


def _decode_shift_template(t: dict[str, Any]) -> m.ShiftTemplate:
    return m.ShiftTemplate(
        id=t["id"],
        label=t.get("label", ""),
        ward_members=frozenset(t.get("ward_members", [])),
        weekdays=frozenset(t.get("weekdays", [])),
        holiday_rule=m.HolidayRule(t["holiday_rule"]) if t.get("holiday_rule") else None,
        pre_holiday_rule=m.HolidayRule(t["pre_holiday_rule"]) if t.get("pre_holiday_rule") else None,
        start=m.parse_time_of_day(t["start"]),
        end=m.parse_time_of_day(t["end"]),
        holiday_override=_decode_override(t.get("holiday_override")),
        min_staff=t.get("min_staff", 0),
        desired_min_staff=t.get("desired_min_staff", 0),
        max_staff=t.get("max_staff", 99),
        desired_penalty_weight=t.get("desired_penalty_weight"),
        required_quals=frozenset(t.get("required_quals", [])),
        excluded_quals=frozenset(t.get("excluded_quals", [])),
        desired_quals=frozenset(t.get("desired_quals", [])),
        undesired_quals=frozenset(t.get("undesired_quals", [])),
    )


def _decode_pool(p: dict[str, Any]) -> m.Pool:
    return m.Pool(
        id=p["id"],
        label=p.get("label", ""),
        physicians=frozenset(p.get("physicians", [])),
        duty_instances=frozenset(p.get("duty_instances", [])),
        exact_count=p.get("exact_count"),
        max_duties=p.get("max_duties"),
        des_max_duties=p.get("des_max_duties"),
        des_max_duties_weight=p.get("des_max_duties_weight"),
        min_duties=p.get("min_duties"),
        des_min_duties=p.get("des_min_duties"),
        des_min_duties_weight=p.get("des_min_duties_weight"),
        max_phy_per_day=p.get("max_phy_per_day"),
        des_max_phy_per_day=p.get("des_max_phy_per_day"),
        des_max_phy_weight=p.get("des_max_phy_weight"),
        fair_distribution=p.get("fair_distribution", False),
        fairness_down_weight=p.get("fairness_down_weight"),
        fairness_up_weight=p.get("fairness_up_weight"),
    )


def _decode_override(o) -> m.TimeWindowOverride | None:
    if o is None:
        return None
    return m.TimeWindowOverride(start=m.parse_time_of_day(o["start"]), end=m.parse_time_of_day(o["end"]))


# -- byte-level helpers ------------------------------------------------------


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def encode_instance(inst: m.RosterInstance) -> str:
    return dumps(instance_to_dict(inst))


def decode_instance(text: str) -> m.RosterInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)
