"""Domain model for the rostering engine.

Everything a department configures lives here: the planning period,
physicians, duty/shift templates and their generated instances, blocks,
rest rules, pools, preferences, weekend policy, carryover from the
previous period, and the objective weights.  All types are immutable
value objects; computation happens in :mod:`rosterer.derive` and
:mod:`rosterer.mip`.

Times are handled in minutes.  A time of day is minutes since midnight;
resolved instance times are minutes since 00:00 of the first period day
(day 1), so an instance from the previous period has negative times.
This keeps rest-time arithmetic exact across midnight rollovers.
"""

from __future__ import annotations

import datetime as dt
import math
import re
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Iterable, Mapping

MINUTES_PER_DAY = 1440

_ID_RE = re.compile(r"^[A-Za-z0-9_.:@+-]+$")


def parse_time_of_day(text: str) -> int:
    """Parse ``"HH:MM"`` into minutes since midnight (0..1439)."""
    h, m = text.split(":")
    minutes = int(h) * 60 + int(m)
    if not 0 <= minutes < MINUTES_PER_DAY:
        raise ValueError(f"time of day out of range: {text!r}")
    return minutes


def format_time_of_day(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def round_half_up_ratio(value: int, num: int, den: int) -> int:
    """Round ``value * num / den`` to the nearest integer, halves up.

    Exact integer arithmetic; this is the one rounding routine used for
    every nearest-integer site in the model (weekend caps scaled by the
    in-period Saturday fraction).
    """
    if den <= 0:
        raise ValueError("denominator must be positive")
    return (2 * value * num + den) // (2 * den)


def round_half_up(value: float) -> int:
    """Float companion of :func:`round_half_up_ratio` (halves up)."""
    return math.floor(value + 0.5)


class WeekendPreferenceKind(str, Enum):
    ONE_DUTY = "one-duty"
    MULTIPLE_DUTIES = "multiple-duties"
    NONE = "none"


class HolidayRule(str, Enum):
    """How a template's occurrence reacts to special days.

    ``ALSO`` adds the special days to the weekday pattern, ``ONLY``
    replaces the pattern with the special days, ``NEVER`` removes them.
    A template without a rule ignores special days entirely.
    """

    ALSO = "also"
    ONLY = "only"
    NEVER = "never"


class PreferenceLevel(str, Enum):
    STRONGLY_DESIRED = "strongly-desired"
    DESIRED = "desired"
    INDIFFERENT = "indifferent"
    UNDESIRED = "undesired"
    IMPOSSIBLE = "impossible"


class BlockKind(str, Enum):
    DUTY = "duty-block"
    SHIFT = "shift-block"


@dataclass(frozen=True)
class PlanningPeriod:
    """The date range being rostered, plus holiday and weekend context."""

    start_date: dt.date
    end_date: dt.date
    public_holidays: frozenset[dt.date] = frozenset()
    # A Friday assignment ending after this time of day makes the weekend
    # a worked weekend.
    weekend_threshold: int = 21 * 60

    @property
    def num_days(self) -> int:
        return (self.end_date - self.start_date).days + 1

    def day_index(self, date: dt.date) -> int:
        """1-based day index; values outside [1, T] are previous/next period."""
        return (date - self.start_date).days + 1

    def date_of(self, day: int) -> dt.date:
        return self.start_date + dt.timedelta(days=day - 1)

    def contains(self, date: dt.date) -> bool:
        return self.start_date <= date <= self.end_date

    def is_holiday(self, date: dt.date) -> bool:
        return date in self.public_holidays


@dataclass(frozen=True)
class Qualification:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Physician:
    id: str
    name: str = ""
    employment_rate: float = 1.0
    qualifications: frozenset[str] = frozenset()
    absences: frozenset[dt.date] = frozenset()
    planned_manually: bool = False
    weekend_preference: WeekendPreferenceKind = WeekendPreferenceKind.NONE


@dataclass(frozen=True)
class TimeWindowOverride:
    """Alternate working times on holidays and days adjacent to one."""

    start: int
    end: int


@dataclass(frozen=True)
class DutyTemplate:
    """A special activity assigned to exactly one physician per occurrence day."""

    id: str
    label: str = ""
    weekdays: frozenset[int] = frozenset()  # 0=Mon .. 6=Sun
    holiday_rule: HolidayRule | None = None
    pre_holiday_rule: HolidayRule | None = None
    start: int = 8 * 60
    end: int = 16 * 60  # end <= start rolls into the next day
    holiday_override: TimeWindowOverride | None = None
    mandatory: bool = True
    forbidden_before_absence: bool = False
    forbidden_after_absence: bool = False
    desired_consecutive: bool = False
    required_quals: frozenset[str] = frozenset()
    excluded_quals: frozenset[str] = frozenset()
    desired_quals: frozenset[str] = frozenset()
    undesired_quals: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ShiftTemplate:
    """Regular ward work; takes min..max physicians per occurrence day."""

    id: str
    label: str = ""
    ward_members: frozenset[str] = frozenset()  # empty = open to everyone
    weekdays: frozenset[int] = frozenset()
    holiday_rule: HolidayRule | None = None
    pre_holiday_rule: HolidayRule | None = None
    start: int = 7 * 60
    end: int = 16 * 60
    holiday_override: TimeWindowOverride | None = None
    min_staff: int = 0
    desired_min_staff: int = 0
    max_staff: int = 99
    desired_penalty_weight: float | None = None
    required_quals: frozenset[str] = frozenset()
    excluded_quals: frozenset[str] = frozenset()
    desired_quals: frozenset[str] = frozenset()
    undesired_quals: frozenset[str] = frozenset()


@dataclass(frozen=True)
class DutyInstance:
    """One occurrence of a duty template on a concrete day.

    ``start_abs``/``end_abs`` are minutes from 00:00 of period day 1.
    """

    id: str
    template_id: str
    date: dt.date
    start_abs: int
    end_abs: int
    pre_assigned: str | None = None


@dataclass(frozen=True)
class ShiftInstance:
    id: str
    template_id: str
    date: dt.date
    start_abs: int
    end_abs: int
    pre_assigned: tuple[str, ...] = ()


@dataclass(frozen=True)
class BlockDefinition:
    """Instances that must all go to the same physician."""

    id: str
    kind: BlockKind
    members: tuple[str, ...] = ()
    allow_extra_duties_inside: bool = True
    allow_extra_shifts_inside: bool = True
    free_days_after: int = 0
    consecutive_predecessor: str | None = None
    desired_consecutive_weight: float | None = None
    max_consecutive_run: int | None = None


@dataclass(frozen=True)
class RestLevel:
    hours: float
    weight: float


# Default soft-rest penalty ladder (most important level first).
DEFAULT_REST_LADDER = (4.0, 2.0, 1.0)


def rest_levels(*hours: float) -> tuple["RestLevel", ...]:
    """Ascending desired-rest levels weighted by the default ladder."""
    return tuple(
        RestLevel(h, DEFAULT_REST_LADDER[min(i, len(DEFAULT_REST_LADDER) - 1)])
        for i, h in enumerate(hours)
    )


@dataclass(frozen=True)
class RestRule:
    """Required recovery between an ordered pair of templates.

    ``mandatory_hours`` may be negative: the pair may overlap by up to
    that many hours.  ``desired_levels`` are sorted ascending by hours;
    the first (shortest) level is the most important one.
    """

    from_template: str
    to_template: str
    mandatory_hours: float
    desired_levels: tuple[RestLevel, ...] = ()


@dataclass(frozen=True)
class Pool:
    """A (physicians x duty instances) group with count rules.

    Carries hard/soft per-physician duty-count bounds, an optional exact
    count, a per-day simultaneity cap, and/or availability-proportional
    fair-distribution targets.
    """

    id: str
    label: str = ""
    physicians: frozenset[str] = frozenset()
    duty_instances: frozenset[str] = frozenset()
    exact_count: int | None = None
    max_duties: int | None = None
    des_max_duties: int | None = None
    des_max_duties_weight: float | None = None
    min_duties: int | None = None
    des_min_duties: int | None = None
    des_min_duties_weight: float | None = None
    max_phy_per_day: int | None = None
    des_max_phy_per_day: int | None = None
    des_max_phy_weight: float | None = None
    fair_distribution: bool = False
    fairness_down_weight: float | None = None
    fairness_up_weight: float | None = None


@dataclass(frozen=True)
class WeeklySetDefinition:
    """A named combination of templates a weekly preference refers to."""

    id: str
    label: str = ""
    duty_templates: frozenset[str] = frozenset()
    shift_templates: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PreferenceRecord:
    """One preference selection by one physician.

    Exactly one target: a duty instance, or a weekly set in a given ISO
    week of the period (week_index is 1-based).
    """

    physician_id: str
    level: PreferenceLevel
    duty_instance_id: str | None = None
    weekly_set_id: str | None = None
    week_index: int | None = None


@dataclass(frozen=True)
class PreferencePolicy:
    """Department-level caps on how often each level may be selected.

    Caps are per physician and calendar month; levels without an entry
    are unlimited.  Enforced at ingestion, not inside the MIP.
    """

    monthly_caps: Mapping[PreferenceLevel, int] = field(default_factory=dict)

    def cap_for(self, level: PreferenceLevel) -> int | None:
        cap = self.monthly_caps.get(level)
        return int(cap) if cap is not None else None


@dataclass(frozen=True)
class WeekendPolicy:
    max_we: int | None = None
    des_max_we: int | None = None
    des_max_we_weight: float | None = None
    min_free_we: int | None = None
    des_min_free_we: int | None = None
    des_min_free_we_weight: float | None = None
    cons_we: int | None = None
    preference_violation_weight: float | None = None


@dataclass(frozen=True)
class CarryoverAssignment:
    """A previous-period assignment that still constrains this period."""

    physician_id: str
    kind: str  # "duty" | "shift"
    template_id: str
    date: dt.date
    start_abs: int  # negative: before day 1
    end_abs: int


@dataclass(frozen=True)
class CarryoverState:
    lookback_days: int = 0
    assignments: tuple[CarryoverAssignment, ...] = ()
    # Consecutive worked weekends at the end of the previous period.
    past_we: Mapping[str, int] = field(default_factory=dict)
    # Free days still owed at period start from a block that ended in the
    # previous period: physician id -> number of initial days to keep free.
    pending_free_days: Mapping[str, int] = field(default_factory=dict)
    # Assignment of previous-period blocks, for continuity of block chains
    # whose predecessor lies before day 1: block id -> physician ids.
    prev_block_assignments: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return (
            not self.assignments
            and not self.pending_free_days
            and not self.prev_block_assignments
            and not any(self.past_we.values())
        )


@dataclass(frozen=True)
class WeightConfig:
    """Objective weight magnitudes.

    All values are nonnegative magnitudes; the model builder applies the
    sign (rewards enter positive, penalties negative).  The default
    ladder keeps duty coverage above staffing, staffing above fairness,
    fairness above preferences, and preferences above continuity
    (1000 / 200 / 50 / 10 / 1).
    """

    duty_coverage: float = 1000.0
    shift_desired: float = 200.0
    shift_above_desired: float = 0.0
    soft_quali_duty: float = 50.0
    soft_quali_shift: float = 50.0
    prev_rest_scale: float = 1.0
    pref_strongly_desired: float = 20.0
    pref_desired: float = 10.0
    pref_undesired: float = 10.0
    weekly_pref_scale: float = 1.0
    we_pref_violation: float = 10.0
    max_we_violation: float = 50.0
    free_we_violation: float = 50.0
    pool_des_max: float = 50.0
    pool_des_min: float = 50.0
    pool_des_max_phy: float = 50.0
    fairness_down: float = 50.0
    fairness_up: float = 50.0
    duty_consecutive: float = 1.0
    block_consecutive: float = 1.0
    max_consec_block: float = 50.0

    def preference_magnitude(self, level: PreferenceLevel) -> float:
        if level is PreferenceLevel.STRONGLY_DESIRED:
            return self.pref_strongly_desired
        if level is PreferenceLevel.DESIRED:
            return self.pref_desired
        if level is PreferenceLevel.UNDESIRED:
            return -self.pref_undesired
        return 0.0


SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RosterInstance:
    """Aggregate root: one department's full planning-period input."""

    id: str
    period: PlanningPeriod
    label: str = ""
    schema_version: int = SCHEMA_VERSION
    qualifications: tuple[Qualification, ...] = ()
    physicians: tuple[Physician, ...] = ()
    duty_templates: tuple[DutyTemplate, ...] = ()
    shift_templates: tuple[ShiftTemplate, ...] = ()
    duty_instances: tuple[DutyInstance, ...] = ()
    shift_instances: tuple[ShiftInstance, ...] = ()
    blocks: tuple[BlockDefinition, ...] = ()
    rest_rules: tuple[RestRule, ...] = ()
    pools: tuple[Pool, ...] = ()
    weekly_sets: tuple[WeeklySetDefinition, ...] = ()
    preferences: tuple[PreferenceRecord, ...] = ()
    preference_policy: PreferencePolicy = field(default_factory=PreferencePolicy)
    weekend_policy: WeekendPolicy = field(default_factory=WeekendPolicy)
    carryover: CarryoverState = field(default_factory=CarryoverState)
    weights: WeightConfig = field(default_factory=WeightConfig)

    # -- indexed access -------------------------------------------------

    def physician(self, pid: str) -> Physician:
        return _lookup(self.physicians, pid, "physician")

    def duty_template(self, tid: str) -> DutyTemplate:
        return _lookup(self.duty_templates, tid, "duty template")

    def shift_template(self, tid: str) -> ShiftTemplate:
        return _lookup(self.shift_templates, tid, "shift template")

    def duty_instance(self, iid: str) -> DutyInstance:
        return _lookup(self.duty_instances, iid, "duty instance")

    def shift_instance(self, iid: str) -> ShiftInstance:
        return _lookup(self.shift_instances, iid, "shift instance")

    def block(self, bid: str) -> BlockDefinition:
        return _lookup(self.blocks, bid, "block")

    def pool(self, pid: str) -> Pool:
        return _lookup(self.pools, pid, "pool")

    def weekly_set(self, sid: str) -> WeeklySetDefinition:
        return _lookup(self.weekly_sets, sid, "weekly set")

    def replace(self, **changes) -> "RosterInstance":
        return replace(self, **changes)


def _lookup(items, item_id: str, what: str):
    for item in items:
        if item.id == item_id:
            return item
    raise KeyError(f"unknown {what}: {item_id!r}")


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Finding:
    """A validation finding; ``severity`` is ``"error"`` or ``"warning"``."""

    code: str
    severity: str
    message: str
    subjects: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "subjects": list(self.subjects),
        }


def _err(code: str, message: str, *subjects: str) -> Finding:
    return Finding(code, "error", message, tuple(subjects))


def _warn(code: str, message: str, *subjects: str) -> Finding:
    return Finding(code, "warning", message, tuple(subjects))


def _check_ids_unique(items: Iterable, what: str, out: list[Finding]) -> None:
    seen: set[str] = set()
    for item in items:
        if item.id in seen:
            out.append(_err("duplicate-id", f"duplicate {what} id {item.id!r}", item.id))
        seen.add(item.id)
        if not _ID_RE.match(item.id):
            out.append(_err("bad-id", f"{what} id {item.id!r} has unsupported characters", item.id))


def _check_quali_sets(obj, kind: str, out: list[Finding]) -> None:
    if obj.required_quals & obj.excluded_quals:
        clash = sorted(obj.required_quals & obj.excluded_quals)
        out.append(
            _err(
                "qualification-conflict",
                f"{kind} {obj.id!r} requires and excludes {clash}",
                obj.id,
            )
        )
    if obj.desired_quals & obj.undesired_quals:
        clash = sorted(obj.desired_quals & obj.undesired_quals)
        out.append(
            _err(
                "qualification-conflict",
                f"{kind} {obj.id!r} desires and undesires {clash}",
                obj.id,
            )
        )


def validate_instance(inst: RosterInstance) -> list[Finding]:
    """Check every structural invariant; returns findings, errors first.

    A clean instance returns an empty list.  Warnings flag data that is
    legal but suspicious (e.g. a pool with a single member).
    """
    out: list[Finding] = []
    period = inst.period

    if inst.schema_version != SCHEMA_VERSION:
        out.append(
            _err(
                "schema-version",
                f"unsupported schema version {inst.schema_version} (expected {SCHEMA_VERSION})",
            )
        )

    if period.start_date > period.end_date:
        out.append(_err("period", "period start is after its end"))
    if not 0 <= period.weekend_threshold < MINUTES_PER_DAY:
        out.append(_err("period", "weekend threshold must be a valid time of day"))
    for hol in sorted(period.public_holidays):
        lo = period.start_date - dt.timedelta(days=1)
        hi = period.end_date + dt.timedelta(days=1)
        if not lo <= hol <= hi:
            out.append(_err("holiday-range", f"public holiday {hol} outside period and adjacent days"))

    _check_ids_unique(inst.qualifications, "qualification", out)
    _check_ids_unique(inst.physicians, "physician", out)
    _check_ids_unique(inst.duty_templates, "duty template", out)
    _check_ids_unique(inst.shift_templates, "shift template", out)
    _check_ids_unique(inst.duty_instances, "duty instance", out)
    _check_ids_unique(inst.shift_instances, "shift instance", out)
    _check_ids_unique(inst.blocks, "block", out)
    _check_ids_unique(inst.pools, "pool", out)
    _check_ids_unique(inst.weekly_sets, "weekly set", out)

    quali_ids = {q.id for q in inst.qualifications}
    phys_ids = {p.id for p in inst.physicians}
    duty_tpl_ids = {t.id for t in inst.duty_templates}
    shift_tpl_ids = {t.id for t in inst.shift_templates}
    duty_inst_by_id = {d.id: d for d in inst.duty_instances}
    shift_inst_by_id = {s.id: s for s in inst.shift_instances}

    for phys in inst.physicians:
        if not 0.0 < phys.employment_rate <= 1.0:
            out.append(
                _err(
                    "employment-rate",
                    f"physician {phys.id!r} employment rate {phys.employment_rate} not in (0, 1]",
                    phys.id,
                )
            )
        for q in sorted(phys.qualifications - quali_ids):
            out.append(_err("unknown-qualification", f"physician {phys.id!r} has unknown qualification {q!r}", phys.id))

    for tpl in inst.duty_templates:
        _check_quali_sets(tpl, "duty template", out)
        if not tpl.weekdays and tpl.holiday_rule is not HolidayRule.ONLY and tpl.pre_holiday_rule is not HolidayRule.ONLY:
            out.append(
                _err(
                    "empty-weekdays",
                    f"duty template {tpl.id!r} has no weekdays and no only-on-special-days rule",
                    tpl.id,
                )
            )
        for q in sorted((tpl.required_quals | tpl.excluded_quals | tpl.desired_quals | tpl.undesired_quals) - quali_ids):
            out.append(_err("unknown-qualification", f"duty template {tpl.id!r} references unknown qualification {q!r}", tpl.id))

    for tpl in inst.shift_templates:
        _check_quali_sets(tpl, "shift template", out)
        if not 0 <= tpl.min_staff <= tpl.desired_min_staff <= tpl.max_staff:
            out.append(
                _err(
                    "staffing-bounds",
                    f"shift template {tpl.id!r} needs min <= desired <= max "
                    f"(got {tpl.min_staff}/{tpl.desired_min_staff}/{tpl.max_staff})",
                    tpl.id,
                )
            )
        for p in sorted(tpl.ward_members - phys_ids):
            out.append(_err("unknown-physician", f"shift template {tpl.id!r} ward lists unknown physician {p!r}", tpl.id))
        for q in sorted((tpl.required_quals | tpl.excluded_quals | tpl.desired_quals | tpl.undesired_quals) - quali_ids):
            out.append(_err("unknown-qualification", f"shift template {tpl.id!r} references unknown qualification {q!r}", tpl.id))

    lookback_lo = period.start_date - dt.timedelta(days=max(inst.carryover.lookback_days, 0))
    for inst_list, tpl_ids, kind in (
        (inst.duty_instances, duty_tpl_ids, "duty"),
        (inst.shift_instances, shift_tpl_ids, "shift"),
    ):
        for occ in inst_list:
            if occ.template_id not in tpl_ids:
                out.append(_err("unknown-template", f"{kind} instance {occ.id!r} references unknown template {occ.template_id!r}", occ.id))
            if occ.end_abs <= occ.start_abs:
                out.append(_err("instance-times", f"{kind} instance {occ.id!r} ends at or before its start", occ.id))
            if not (period.contains(occ.date) or lookback_lo <= occ.date < period.start_date):
                out.append(_err("instance-date", f"{kind} instance {occ.id!r} dated {occ.date} outside period and carryover window", occ.id))

    for occ in inst.duty_instances:
        if occ.pre_assigned is None:
            continue
        if occ.pre_assigned not in phys_ids:
            out.append(_err("unknown-physician", f"duty instance {occ.id!r} pre-assigned to unknown physician", occ.id))
        elif occ.template_id in duty_tpl_ids:
            tpl = inst.duty_template(occ.template_id)
            phys = inst.physician(occ.pre_assigned)
            if not is_hard_qualified(phys, tpl):
                out.append(
                    _err(
                        "preassignment-unqualified",
                        f"duty instance {occ.id!r} pre-assigned to unqualified physician {phys.id!r}",
                        occ.id,
                        phys.id,
                    )
                )
    for occ in inst.shift_instances:
        for pid in occ.pre_assigned:
            if pid not in phys_ids:
                out.append(_err("unknown-physician", f"shift instance {occ.id!r} pre-assigned to unknown physician", occ.id))
            elif occ.template_id in shift_tpl_ids:
                tpl = inst.shift_template(occ.template_id)
                if not is_hard_qualified(inst.physician(pid), tpl):
                    out.append(
                        _err(
                            "preassignment-unqualified",
                            f"shift instance {occ.id!r} pre-assigned to unqualified physician {pid!r}",
                            occ.id,
                            pid,
                        )
                    )

    block_ids = {b.id for b in inst.blocks}
    for block in inst.blocks:
        member_pool = duty_inst_by_id if block.kind is BlockKind.DUTY else shift_inst_by_id
        missing = [m for m in block.members if m not in member_pool]
        if missing:
            out.append(_err("block-members", f"block {block.id!r} references unknown {block.kind.value} members {missing}", block.id))
        elif not block.members:
            out.append(_err("block-members", f"block {block.id!r} has no members", block.id))
        else:
            starts = [member_pool[m].start_abs for m in block.members]
            if starts != sorted(starts):
                out.append(_err("block-order", f"block {block.id!r} members are not in chronological order", block.id))
        if block.free_days_after < 0:
            out.append(_err("block-free-days", f"block {block.id!r} has negative free days", block.id))
        if block.max_consecutive_run is not None and block.max_consecutive_run < 1:
            out.append(_err("block-consec-run", f"block {block.id!r} max consecutive run must be >= 1", block.id))
        if (
            block.consecutive_predecessor is not None
            and block.consecutive_predecessor not in block_ids
            and block.consecutive_predecessor not in inst.carryover.prev_block_assignments
        ):
            out.append(
                _warn(
                    "block-predecessor",
                    f"block {block.id!r} predecessor {block.consecutive_predecessor!r} is neither in this "
                    "period nor in carryover; continuity is ignored",
                    block.id,
                )
            )

    for rule in inst.rest_rules:
        known = duty_tpl_ids | shift_tpl_ids
        for tid in (rule.from_template, rule.to_template):
            if tid not in known:
                out.append(_err("rest-rule-template", f"rest rule references unknown template {tid!r}", tid))
        hours = [lvl.hours for lvl in rule.desired_levels]
        if any(h <= rule.mandatory_hours for h in hours):
            out.append(
                _err(
                    "rest-levels",
                    f"rest rule {rule.from_template!r}->{rule.to_template!r} has a desired level "
                    "not above the mandatory rest",
                    rule.from_template,
                    rule.to_template,
                )
            )
        if hours != sorted(hours):
            out.append(_err("rest-levels", f"rest rule {rule.from_template!r}->{rule.to_template!r} levels must ascend", rule.from_template))
        if any(lvl.weight < 0 for lvl in rule.desired_levels):
            out.append(_err("rest-levels", f"rest rule {rule.from_template!r}->{rule.to_template!r} has a negative weight", rule.from_template))

    for pool in inst.pools:
        if pool.exact_count is not None and any(
            v is not None for v in (pool.max_duties, pool.min_duties, pool.des_max_duties, pool.des_min_duties)
        ):
            out.append(_err("pool-bounds", f"pool {pool.id!r} mixes an exact count with min/max counts", pool.id))
        if pool.max_duties is not None and pool.des_max_duties is not None and pool.des_max_duties > pool.max_duties:
            out.append(_err("pool-bounds", f"pool {pool.id!r} desired max exceeds hard max", pool.id))
        if pool.min_duties is not None and pool.des_min_duties is not None and pool.des_min_duties < pool.min_duties:
            out.append(_err("pool-bounds", f"pool {pool.id!r} desired min is below hard min", pool.id))
        if pool.max_phy_per_day is not None and pool.des_max_phy_per_day is not None and pool.des_max_phy_per_day > pool.max_phy_per_day:
            out.append(_err("pool-bounds", f"pool {pool.id!r} desired simultaneity cap exceeds the hard cap", pool.id))
        for p in sorted(pool.physicians - phys_ids):
            out.append(_err("unknown-physician", f"pool {pool.id!r} lists unknown physician {p!r}", pool.id))
        for d in sorted(pool.duty_instances - set(duty_inst_by_id)):
            out.append(_err("unknown-instance", f"pool {pool.id!r} lists unknown duty instance {d!r}", pool.id))
        if len(pool.physicians) == 1:
            out.append(_warn("pool-singleton", f"pool {pool.id!r} has a single member physician", pool.id))
        if pool.fair_distribution and not pool.duty_instances:
            out.append(_warn("pool-empty", f"fair pool {pool.id!r} has no duties", pool.id))

    for ws in inst.weekly_sets:
        for tid in sorted(ws.duty_templates - duty_tpl_ids):
            out.append(_err("unknown-template", f"weekly set {ws.id!r} references unknown duty template {tid!r}", ws.id))
        for tid in sorted(ws.shift_templates - shift_tpl_ids):
            out.append(_err("unknown-template", f"weekly set {ws.id!r} references unknown shift template {tid!r}", ws.id))

    weekly_set_ids = {w.id for w in inst.weekly_sets}
    monthly_counts: dict[tuple[str, PreferenceLevel, tuple[int, int]], int] = {}
    for pref in inst.preferences:
        if pref.physician_id not in phys_ids:
            out.append(_err("unknown-physician", f"preference references unknown physician {pref.physician_id!r}", pref.physician_id))
            continue
        has_duty = pref.duty_instance_id is not None
        has_weekly = pref.weekly_set_id is not None
        if has_duty == has_weekly:
            out.append(_err("preference-target", f"preference by {pref.physician_id!r} must target exactly one of duty instance or weekly set", pref.physician_id))
            continue
        if has_duty:
            if pref.duty_instance_id not in duty_inst_by_id:
                out.append(_err("unknown-instance", f"preference references unknown duty instance {pref.duty_instance_id!r}", pref.physician_id))
                continue
            month = _month_of(duty_inst_by_id[pref.duty_instance_id].date)
        else:
            if pref.weekly_set_id not in weekly_set_ids:
                out.append(_err("unknown-weekly-set", f"preference references unknown weekly set {pref.weekly_set_id!r}", pref.physician_id))
                continue
            if pref.week_index is None or pref.week_index < 1:
                out.append(_err("preference-week", f"weekly preference by {pref.physician_id!r} needs a positive week index", pref.physician_id))
                continue
            if pref.level is PreferenceLevel.IMPOSSIBLE:
                out.append(_err("impossible-weekly", f"weekly preference by {pref.physician_id!r} may not use the impossible level", pref.physician_id))
                continue
            month = _month_of(_week_monday(period, pref.week_index))
        key = (pref.physician_id, pref.level, month)
        monthly_counts[key] = monthly_counts.get(key, 0) + 1

    for (pid, level, month), count in sorted(monthly_counts.items(), key=lambda kv: kv[0][:2] + (kv[0][2],)):
        cap = inst.preference_policy.cap_for(level)
        if cap is not None and count > cap:
            out.append(
                _err(
                    "preference-cap",
                    f"physician {pid!r} selected {level.value!r} {count} times in {month[0]:04d}-{month[1]:02d} "
                    f"(cap is {cap} per month)",
                    pid,
                )
            )

    wp = inst.weekend_policy
    for name in ("max_we", "des_max_we", "min_free_we", "des_min_free_we"):
        value = getattr(wp, name)
        if value is not None and value < 0:
            out.append(_err("weekend-policy", f"weekend policy {name} must be nonnegative", name))
    if wp.cons_we is not None and wp.cons_we < 1:
        out.append(_err("weekend-policy", "weekend policy cons_we must be >= 1"))
    if wp.max_we is not None and wp.des_max_we is not None and wp.des_max_we > wp.max_we:
        out.append(_err("weekend-policy", "desired max worked weekends exceeds the hard max"))
    if wp.min_free_we is not None and wp.des_min_free_we is not None and wp.des_min_free_we < wp.min_free_we:
        out.append(_err("weekend-policy", "desired min free weekends is below the hard min"))

    co = inst.carryover
    for a in co.assignments:
        if a.physician_id not in phys_ids:
            out.append(_err("unknown-physician", f"carryover assignment references unknown physician {a.physician_id!r}", a.physician_id))
        if a.kind not in ("duty", "shift"):
            out.append(_err("carryover-kind", f"carryover assignment kind {a.kind!r} must be duty or shift"))
        if a.date >= period.start_date:
            out.append(_err("carryover-date", f"carryover assignment dated {a.date} is not before the period"))
    if co.assignments:
        needed = _required_lookback_days(inst)
        if co.lookback_days < needed:
            out.append(
                _warn(
                    "carryover-lookback",
                    f"carryover lookback of {co.lookback_days} day(s) is shorter than the {needed} "
                    "day(s) implied by the longest rest time and free-day rule",
                )
            )
    for pid in sorted(set(co.past_we) | set(co.pending_free_days)):
        if pid not in phys_ids:
            out.append(_err("unknown-physician", f"carryover references unknown physician {pid!r}", pid))

    for f in fields(inst.weights):
        value = getattr(inst.weights, f.name)
        if not math.isfinite(value) or value < 0:
            out.append(_err("weights", f"weight {f.name} must be finite and nonnegative"))

    out.sort(key=lambda f: (f.severity != "error", f.code))
    return out


def _month_of(date: dt.date) -> tuple[int, int]:
    return (date.year, date.month)


def _week_monday(period: PlanningPeriod, week_index: int) -> dt.date:
    """Monday of the k-th ISO week touched by the period (1-based)."""
    first_monday = period.start_date - dt.timedelta(days=period.start_date.weekday())
    return first_monday + dt.timedelta(weeks=week_index - 1)


def week_index_of(period: PlanningPeriod, date: dt.date) -> int:
    monday = date - dt.timedelta(days=date.weekday())
    first_monday = period.start_date - dt.timedelta(days=period.start_date.weekday())
    return (monday - first_monday).days // 7 + 1


def num_weeks(period: PlanningPeriod) -> int:
    return week_index_of(period, period.end_date)


def _required_lookback_days(inst: RosterInstance) -> int:
    longest_rest = 0.0
    for rule in inst.rest_rules:
        longest_rest = max(longest_rest, rule.mandatory_hours, *(l.hours for l in rule.desired_levels), 0.0)
    longest_free = max((b.free_days_after for b in inst.blocks), default=0)
    return max(math.ceil(longest_rest / 24.0) + 1, longest_free)


# ---------------------------------------------------------------------------
# Qualification predicates (shared by derivation and the validator)


def is_hard_qualified(phys: Physician, tpl: DutyTemplate | ShiftTemplate) -> bool:
    return tpl.required_quals <= phys.qualifications and not (tpl.excluded_quals & phys.qualifications)


def is_soft_qualified(phys: Physician, tpl: DutyTemplate | ShiftTemplate) -> bool:
    return (
        is_hard_qualified(phys, tpl)
        and tpl.desired_quals <= phys.qualifications
        and not (tpl.undesired_quals & phys.qualifications)
    )
