"""Derived sets: everything computed from a raw instance before modeling.

Covers instance expansion from templates, the weekend/month calendar,
rest-time conflict pairs (hard and leveled soft), carryover exclusions
from the previous period, qualification filters, consecutive-run
windows, and fair-distribution targets.

All functions are pure and deterministic: the same instance yields a
byte-identical serialized result.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from . import model as m
from .errors import ConfigurationError

_ONE_DAY = dt.timedelta(days=1)


# ---------------------------------------------------------------------------
# Instance expansion


def occurs_on(tpl: m.DutyTemplate | m.ShiftTemplate, date: dt.date, period: m.PlanningPeriod) -> bool:
    """Apply weekday pattern plus holiday / pre-holiday rules.

    ``also`` adds the special days to the pattern, ``only`` replaces the
    pattern with them, ``never`` removes them (and wins over additions).
    """
    hol = period.is_holiday(date)
    pre = period.is_holiday(date + _ONE_DAY)
    base = date.weekday() in tpl.weekdays
    if m.HolidayRule.ONLY in (tpl.holiday_rule, tpl.pre_holiday_rule):
        base = False
    occ = base
    if tpl.holiday_rule in (m.HolidayRule.ALSO, m.HolidayRule.ONLY) and hol:
        occ = True
    if tpl.pre_holiday_rule in (m.HolidayRule.ALSO, m.HolidayRule.ONLY) and pre:
        occ = True
    if tpl.holiday_rule is m.HolidayRule.NEVER and hol:
        occ = False
    if tpl.pre_holiday_rule is m.HolidayRule.NEVER and pre:
        occ = False
    return occ


def _window_for(tpl: m.DutyTemplate | m.ShiftTemplate, date: dt.date, period: m.PlanningPeriod) -> tuple[int, int]:
    start, end = tpl.start, tpl.end
    if tpl.holiday_override is not None:
        near_holiday = (
            period.is_holiday(date)
            or period.is_holiday(date - _ONE_DAY)
            or period.is_holiday(date + _ONE_DAY)
        )
        if near_holiday:
            start, end = tpl.holiday_override.start, tpl.holiday_override.end
    duration = (end - start) % m.MINUTES_PER_DAY
    if duration == 0:
        raise ConfigurationError(
            f"template {tpl.id!r} working times produce end <= start on {date}"
        )
    day0 = (period.day_index(date) - 1) * m.MINUTES_PER_DAY
    return day0 + start, day0 + start + duration


def instance_id(template_id: str, date: dt.date) -> str:
    return f"{template_id}@{date.isoformat()}"


def expand_instances(inst: m.RosterInstance) -> tuple[tuple[m.DutyInstance, ...], tuple[m.ShiftInstance, ...]]:
    """Generate one instance per template per occurrence day of the period."""
    period = inst.period
    duties: list[m.DutyInstance] = []
    shifts: list[m.ShiftInstance] = []
    for day in range(1, period.num_days + 1):
        date = period.date_of(day)
        for tpl in inst.duty_templates:
            if occurs_on(tpl, date, period):
                start, end = _window_for(tpl, date, period)
                duties.append(m.DutyInstance(instance_id(tpl.id, date), tpl.id, date, start, end))
        for tpl in inst.shift_templates:
            if occurs_on(tpl, date, period):
                start, end = _window_for(tpl, date, period)
                shifts.append(m.ShiftInstance(instance_id(tpl.id, date), tpl.id, date, start, end))
    return tuple(duties), tuple(shifts)


def with_expanded_instances(inst: m.RosterInstance) -> m.RosterInstance:
    """Fill in missing instances, keeping any that already exist.

    Existing entries win so that pre-assignments and manual edits
    survive re-expansion.
    """
    duties, shifts = expand_instances(inst)
    have_d = {d.id for d in inst.duty_instances}
    have_s = {s.id for s in inst.shift_instances}
    new_d = inst.duty_instances + tuple(d for d in duties if d.id not in have_d)
    new_s = inst.shift_instances + tuple(s for s in shifts if s.id not in have_s)
    return inst.replace(duty_instances=new_d, shift_instances=new_s)


# ---------------------------------------------------------------------------
# Calendar


@dataclass(frozen=True)
class WeekendInfo:
    index: int  # 1-based, chronological
    saturday: dt.date

    @property
    def month(self) -> tuple[int, int]:
        # A weekend belongs to the month of its Saturday, consistent with
        # the Saturday-fraction scaling of monthly weekend caps.
        return (self.saturday.year, self.saturday.month)


@dataclass(frozen=True)
class MonthInfo:
    key: tuple[int, int]
    weekend_indices: tuple[int, ...]
    saturdays_inside: int
    saturdays_total: int

    @property
    def we_factor(self) -> float:
        return self.saturdays_inside / self.saturdays_total

    def scale_round(self, value: int) -> int:
        """value * we_factor rounded to nearest (halves up), exactly."""
        return m.round_half_up_ratio(value, self.saturdays_inside, self.saturdays_total)


@dataclass(frozen=True)
class Calendar:
    weekends: tuple[WeekendInfo, ...]
    months: tuple[MonthInfo, ...]

    def month(self, key: tuple[int, int]) -> MonthInfo:
        for info in self.months:
            if info.key == key:
                return info
        raise KeyError(f"month {key} not in period")


def _saturdays_in_month(year: int, month: int) -> list[dt.date]:
    first = dt.date(year, month, 1)
    days = (first.replace(month=month % 12 + 1, year=year + month // 12) - _ONE_DAY).day
    return [d for d in (dt.date(year, month, i) for i in range(1, days + 1)) if d.weekday() == 5]


def compute_calendar(period: m.PlanningPeriod) -> Calendar:
    """Weekends (indexed by Saturday) and months with Saturday fractions."""
    saturdays: list[dt.date] = []
    d = period.start_date
    while d <= period.end_date:
        if d.weekday() == 5:
            saturdays.append(d)
        elif d.weekday() == 6:  # a Sunday whose Saturday precedes the period
            sat = d - _ONE_DAY
            if sat not in saturdays and not period.contains(sat):
                saturdays.append(sat)
        d += _ONE_DAY
    saturdays.sort()
    weekends = tuple(WeekendInfo(i + 1, sat) for i, sat in enumerate(saturdays))

    month_keys: list[tuple[int, int]] = []
    d = period.start_date
    while d <= period.end_date:
        key = (d.year, d.month)
        if key not in month_keys:
            month_keys.append(key)
        d += _ONE_DAY
    months = []
    for key in month_keys:
        all_sats = _saturdays_in_month(*key)
        inside = sum(1 for s in all_sats if period.contains(s))
        indices = tuple(w.index for w in weekends if w.month == key)
        months.append(MonthInfo(key, indices, inside, len(all_sats)))
    return Calendar(weekends, tuple(months))


# ---------------------------------------------------------------------------
# Rest-time conflicts


@dataclass(frozen=True)
class ConflictPair:
    first_id: str
    second_id: str
    first_is_duty: bool
    second_is_duty: bool


@dataclass(frozen=True)
class SoftConflict:
    first_id: str
    second_id: str
    first_is_duty: bool
    second_is_duty: bool
    level_hours: float
    weight: float


def _pair_sort_key(item):
    occ, _is_duty = item
    return (occ.start_abs, occ.end_abs, occ.id)


def derive_conflicts(
    duty_instances: tuple[m.DutyInstance, ...],
    shift_instances: tuple[m.ShiftInstance, ...],
    rest_rules: tuple[m.RestRule, ...],
    known_templates: set[str] | None = None,
) -> tuple[tuple[ConflictPair, ...], tuple[SoftConflict, ...]]:
    """Classify ordered instance pairs against the rest rules.

    The rule (A -> B) applies to the pair whose first element starts
    earlier (ties: earlier end, then id).  With ``gap`` being second
    start minus first end (negative when overlapping), the pair is a
    hard conflict iff ``gap < mandatory`` and otherwise a soft conflict
    at the tightest violated desired level.
    """
    if known_templates is not None:
        for rule in rest_rules:
            for tid in (rule.from_template, rule.to_template):
                if tid not in known_templates:
                    raise ConfigurationError(f"rest rule references unknown template {tid!r}")
    rules: dict[tuple[str, str], m.RestRule] = {}
    horizon = 0.0
    for rule in rest_rules:
        rules[(rule.from_template, rule.to_template)] = rule
        horizon = max(horizon, rule.mandatory_hours, *[l.hours for l in rule.desired_levels], 0.0)
    if not rules:
        return (), ()

    items = [(d, True) for d in duty_instances] + [(s, False) for s in shift_instances]
    items.sort(key=_pair_sort_key)
    horizon_min = horizon * 60.0

    hard: list[ConflictPair] = []
    soft: list[SoftConflict] = []
    for i, (a, a_duty) in enumerate(items):
        for b, b_duty in items[i + 1 :]:
            if b.start_abs - a.end_abs >= horizon_min:
                break
            rule = rules.get((a.template_id, b.template_id))
            if rule is None:
                continue
            gap_hours = (b.start_abs - a.end_abs) / 60.0
            if gap_hours < rule.mandatory_hours:
                hard.append(ConflictPair(a.id, b.id, a_duty, b_duty))
            else:
                for level in rule.desired_levels:
                    if gap_hours < level.hours:
                        soft.append(SoftConflict(a.id, b.id, a_duty, b_duty, level.hours, level.weight))
                        break
    return tuple(hard), tuple(soft)


# ---------------------------------------------------------------------------
# Carryover


@dataclass(frozen=True)
class CarryoverEffects:
    # Hard exclusions from previous-period rest times and free-day debts.
    r_duty: dict[str, frozenset[str]]
    r_shift: dict[str, frozenset[str]]
    # Soft analogues: instance -> summed weight of violated desired levels.
    r_duty_soft: dict[str, dict[str, float]]
    r_shift_soft: dict[str, dict[str, float]]
    past_we: dict[str, int]
    # Current-period shift blocks whose predecessor lies in the previous
    # period: block id -> physicians who worked that predecessor.
    prev_block_physicians: dict[str, tuple[str, ...]]
    # Boundary continuity for duties: duty instance id -> physician who
    # worked the template on the day before day 1.
    duty_prev_physician: dict[str, str]
    # Duties whose previous-period predecessor exists but was unassigned.
    duty_prev_unassigned: frozenset[str]


def derive_carryover(inst: m.RosterInstance) -> CarryoverEffects:
    co = inst.carryover
    period = inst.period
    rules: dict[tuple[str, str], m.RestRule] = {
        (r.from_template, r.to_template): r for r in inst.rest_rules
    }

    r_duty: dict[str, set[str]] = {}
    r_shift: dict[str, set[str]] = {}
    r_duty_soft: dict[str, dict[str, float]] = {}
    r_shift_soft: dict[str, dict[str, float]] = {}

    def _hard(pid: str, iid: str, is_duty: bool) -> None:
        (r_duty if is_duty else r_shift).setdefault(pid, set()).add(iid)

    def _soft(pid: str, iid: str, is_duty: bool, weight: float) -> None:
        bucket = (r_duty_soft if is_duty else r_shift_soft).setdefault(pid, {})
        bucket[iid] = bucket.get(iid, 0.0) + weight

    current = [(d, True) for d in inst.duty_instances] + [(s, False) for s in inst.shift_instances]
    for prev in co.assignments:
        for occ, is_duty in current:
            rule = rules.get((prev.template_id, occ.template_id))
            if rule is None:
                continue
            gap_hours = (occ.start_abs - prev.end_abs) / 60.0
            if gap_hours < rule.mandatory_hours:
                _hard(prev.physician_id, occ.id, is_duty)
            else:
                for level in rule.desired_levels:
                    if gap_hours < level.hours:
                        _soft(prev.physician_id, occ.id, is_duty, level.weight)
                        break

    for pid, days in sorted(co.pending_free_days.items()):
        for occ, is_duty in current:
            day = period.day_index(occ.date)
            if 1 <= day <= days:
                _hard(pid, occ.id, is_duty)

    prev_block_physicians: dict[str, tuple[str, ...]] = {}
    for block in inst.blocks:
        pred = block.consecutive_predecessor
        if pred is not None and pred in co.prev_block_assignments:
            prev_block_physicians[block.id] = tuple(co.prev_block_assignments[pred])

    duty_prev_physician: dict[str, str] = {}
    duty_prev_unassigned: set[str] = set()
    boundary = {
        (a.template_id, a.date): a.physician_id
        for a in co.assignments
        if a.kind == "duty"
    }
    tpl_by_id = {t.id: t for t in inst.duty_templates}
    for d in inst.duty_instances:
        tpl = tpl_by_id.get(d.template_id)
        if tpl is None or not tpl.desired_consecutive:
            continue
        prev_date = d.date - _ONE_DAY
        if prev_date >= period.start_date:
            continue  # predecessor inside the period; handled by the builder
        key = (d.template_id, prev_date)
        if key in boundary:
            duty_prev_physician[d.id] = boundary[key]
        elif co.lookback_days >= 1 and not co.is_empty():
            # Lookback data exists and shows the slot unassigned.
            duty_prev_unassigned.add(d.id)

    return CarryoverEffects(
        r_duty={k: frozenset(v) for k, v in sorted(r_duty.items())},
        r_shift={k: frozenset(v) for k, v in sorted(r_shift.items())},
        r_duty_soft={k: dict(sorted(v.items())) for k, v in sorted(r_duty_soft.items())},
        r_shift_soft={k: dict(sorted(v.items())) for k, v in sorted(r_shift_soft.items())},
        past_we=dict(sorted(co.past_we.items())),
        prev_block_physicians=dict(sorted(prev_block_physicians.items())),
        duty_prev_physician=dict(sorted(duty_prev_physician.items())),
        duty_prev_unassigned=frozenset(duty_prev_unassigned),
    )


# ---------------------------------------------------------------------------
# Preference folding


def preference_deltas(inst: m.RosterInstance, weights: m.WeightConfig):
    """Objective deltas from duty-specific and weekly preferences.

    Weekly selections apply their (scaled) weight to every member
    instance of the set inside the chosen week.  Impossible selections
    are hard and not part of the objective.
    """
    pref_duty: dict[tuple[str, str], float] = {}
    pref_shift: dict[tuple[str, str], float] = {}
    weekly_duty_members: dict[tuple[str, int], list[str]] = {}
    weekly_shift_members: dict[tuple[str, int], list[str]] = {}
    if any(p.weekly_set_id is not None for p in inst.preferences):
        for d in inst.duty_instances:
            week = m.week_index_of(inst.period, d.date)
            weekly_duty_members.setdefault((d.template_id, week), []).append(d.id)
        for s in inst.shift_instances:
            week = m.week_index_of(inst.period, s.date)
            weekly_shift_members.setdefault((s.template_id, week), []).append(s.id)

    for pref in inst.preferences:
        if pref.level is m.PreferenceLevel.IMPOSSIBLE:
            continue
        magnitude = weights.preference_magnitude(pref.level)
        if magnitude == 0.0:
            continue
        if pref.duty_instance_id is not None:
            key = (pref.physician_id, pref.duty_instance_id)
            pref_duty[key] = pref_duty.get(key, 0.0) + magnitude
        else:
            ws = inst.weekly_set(pref.weekly_set_id)
            scaled = magnitude * weights.weekly_pref_scale
            for tid in sorted(ws.duty_templates):
                for iid in weekly_duty_members.get((tid, pref.week_index), ()):
                    key = (pref.physician_id, iid)
                    pref_duty[key] = pref_duty.get(key, 0.0) + scaled
            for tid in sorted(ws.shift_templates):
                for iid in weekly_shift_members.get((tid, pref.week_index), ()):
                    key = (pref.physician_id, iid)
                    pref_shift[key] = pref_shift.get(key, 0.0) + scaled
    return pref_duty, pref_shift


# ---------------------------------------------------------------------------
# Fair-distribution targets


def compute_target_numbers(
    pool: m.Pool,
    physicians: tuple[m.Physician, ...],
    duty_instances_by_id: dict[str, m.DutyInstance],
) -> dict[str, float]:
    """Availability-proportional duty targets for a fair pool.

    A physician's availability is her employment volume times the number
    of pool duties on whose days she is not absent.  Targets sum to the
    pool's duty count exactly (up to float rounding).
    """
    if not pool.fair_distribution:
        raise ValueError(f"pool {pool.id!r} has no fair distribution")
    members = [p for p in physicians if p.id in pool.physicians]
    pool_days = [duty_instances_by_id[d].date for d in sorted(pool.duty_instances)]
    n = len(pool_days)
    weights = {p.id: p.employment_rate * sum(1 for day in pool_days if day not in p.absences) for p in members}
    total = sum(weights.values())
    if n and total <= 0.0:
        raise ConfigurationError(
            f"degenerate pool {pool.id!r}: every member is absent on all pool duty days"
        )
    if not members:
        raise ConfigurationError(f"degenerate pool {pool.id!r}: no member physicians")
    if n == 0:
        return {p.id: 0.0 for p in members}
    return {pid: n * w / total for pid, w in weights.items()}


# ---------------------------------------------------------------------------
# Consecutive-run windows over shift-block chains


@dataclass(frozen=True)
class ConsecWindow:
    """A run of n+1 chained shift blocks that one physician should not fully take.

    ``block_ids`` are the members inside the current period;
    ``restrict_to`` narrows the constrained physicians when part of the
    window lies in the previous period (only whoever worked all of those
    earlier blocks can still complete the run).
    """

    index: int
    block_ids: tuple[str, ...]
    restrict_to: tuple[str, ...] | None = None


def derive_consec_windows(inst: m.RosterInstance) -> tuple[ConsecWindow, ...]:
    blocks = {b.id: b for b in inst.blocks}
    co_assign = inst.carryover.prev_block_assignments
    windows: list[ConsecWindow] = []
    j = 0
    for block in inst.blocks:
        if block.kind is not m.BlockKind.SHIFT or block.max_consecutive_run is None:
            continue
        n = block.max_consecutive_run
        chain: list[str] = [block.id]
        prev_part: list[str] = []
        cur = block
        while len(chain) + len(prev_part) < n + 1:
            pred = cur.consecutive_predecessor
            if pred is None:
                break
            if pred in blocks:
                chain.append(pred)
                cur = blocks[pred]
            elif pred in co_assign:
                prev_part.append(pred)
                # Older history beyond the carryover snapshot is unknown.
                break
            else:
                break
        if len(chain) + len(prev_part) < n + 1:
            continue
        restrict: tuple[str, ...] | None = None
        if prev_part:
            worked_all = set(co_assign[prev_part[0]])
            for pid_list in (co_assign[b] for b in prev_part[1:]):
                worked_all &= set(pid_list)
            restrict = tuple(sorted(worked_all))
            if not restrict:
                continue  # nobody can complete the run
        j += 1
        windows.append(ConsecWindow(j, tuple(reversed(chain)), restrict))
    return tuple(windows)


# ---------------------------------------------------------------------------
# The full bundle


@dataclass(frozen=True)
class DerivedSets:
    calendar: Calendar
    duties_by_day: dict[int, tuple[str, ...]]
    shifts_by_day: dict[int, tuple[str, ...]]
    duties_by_weekend: dict[int, tuple[str, ...]]
    duties_by_month: dict[tuple[int, int], tuple[str, ...]]
    # Qualification filters, at template granularity.
    duty_quali: dict[str, frozenset[str]]
    duty_quali_soft: dict[str, frozenset[str]]
    shift_quali: dict[str, frozenset[str]]
    shift_quali_soft: dict[str, frozenset[str]]
    hard_conflicts: tuple[ConflictPair, ...]
    soft_conflicts: tuple[SoftConflict, ...]
    carry: CarryoverEffects
    # Within-period duty continuity: instance -> predecessor instance.
    duty_prev: dict[str, str]
    consec_windows: tuple[ConsecWindow, ...]
    target_num: dict[str, dict[str, float]]  # pool id -> physician -> target
    impossible_duties: dict[str, frozenset[str]]
    impossible_shifts: dict[str, frozenset[str]]

    def duty_hard_ok(self, pid: str, template_id: str) -> bool:
        return template_id in self.duty_quali.get(pid, frozenset())

    def duty_soft_ok(self, pid: str, template_id: str) -> bool:
        return template_id in self.duty_quali_soft.get(pid, frozenset())

    def shift_hard_ok(self, pid: str, template_id: str) -> bool:
        return template_id in self.shift_quali.get(pid, frozenset())

    def shift_soft_ok(self, pid: str, template_id: str) -> bool:
        return template_id in self.shift_quali_soft.get(pid, frozenset())


def derive_qualification_sets(inst: m.RosterInstance):
    """Hard and soft qualification filters per physician (by template)."""
    duty_quali: dict[str, frozenset[str]] = {}
    duty_soft: dict[str, frozenset[str]] = {}
    shift_quali: dict[str, frozenset[str]] = {}
    shift_soft: dict[str, frozenset[str]] = {}
    for p in inst.physicians:
        duty_quali[p.id] = frozenset(t.id for t in inst.duty_templates if m.is_hard_qualified(p, t))
        duty_soft[p.id] = frozenset(t.id for t in inst.duty_templates if m.is_soft_qualified(p, t))
        shift_quali[p.id] = frozenset(t.id for t in inst.shift_templates if m.is_hard_qualified(p, t))
        shift_soft[p.id] = frozenset(t.id for t in inst.shift_templates if m.is_soft_qualified(p, t))
    return duty_quali, duty_soft, shift_quali, shift_soft


def derive(inst: m.RosterInstance) -> DerivedSets:
    """Compute every derived set for a validated instance."""
    period = inst.period
    calendar = compute_calendar(period)

    duties_by_day: dict[int, list[str]] = {}
    shifts_by_day: dict[int, list[str]] = {}
    duties_by_month: dict[tuple[int, int], list[str]] = {}
    for d in inst.duty_instances:
        duties_by_day.setdefault(period.day_index(d.date), []).append(d.id)
        duties_by_month.setdefault((d.date.year, d.date.month), []).append(d.id)
    for s in inst.shift_instances:
        shifts_by_day.setdefault(period.day_index(s.date), []).append(s.id)

    threshold = period.weekend_threshold
    duties_by_weekend: dict[int, list[str]] = {}
    for w in calendar.weekends:
        members: list[str] = []
        friday = w.saturday - _ONE_DAY
        fri_cutoff = (period.day_index(friday) - 1) * m.MINUTES_PER_DAY + threshold
        for d in inst.duty_instances:
            if d.date == w.saturday or d.date == w.saturday + _ONE_DAY:
                members.append(d.id)
            elif d.date == friday and d.end_abs > fri_cutoff:
                members.append(d.id)
        duties_by_weekend[w.index] = members

    duty_quali, duty_soft, shift_quali, shift_soft = derive_qualification_sets(inst)

    known = {t.id for t in inst.duty_templates} | {t.id for t in inst.shift_templates}
    hard_conflicts, soft_conflicts = derive_conflicts(
        inst.duty_instances, inst.shift_instances, inst.rest_rules, known_templates=known
    )

    carry = derive_carryover(inst)

    tpl_by_id = {t.id: t for t in inst.duty_templates}
    by_tpl_date = {(d.template_id, d.date): d.id for d in inst.duty_instances}
    duty_prev: dict[str, str] = {}
    for d in inst.duty_instances:
        tpl = tpl_by_id[d.template_id]
        if not tpl.desired_consecutive:
            continue
        prev_id = by_tpl_date.get((d.template_id, d.date - _ONE_DAY))
        if prev_id is not None:
            duty_prev[d.id] = prev_id

    duty_inst_by_id = {d.id: d for d in inst.duty_instances}
    target_num: dict[str, dict[str, float]] = {}
    for pool in inst.pools:
        if pool.fair_distribution:
            targets = compute_target_numbers(pool, inst.physicians, duty_inst_by_id)
            target_num[pool.id] = dict(sorted(targets.items()))

    # Impossible selections exist only for duty instances; the shift side
    # stays as an (empty) set so downstream code treats both uniformly.
    impossible_duties: dict[str, set[str]] = {}
    impossible_shifts: dict[str, set[str]] = {}
    for pref in inst.preferences:
        if pref.level is not m.PreferenceLevel.IMPOSSIBLE:
            continue
        if pref.duty_instance_id is not None:
            impossible_duties.setdefault(pref.physician_id, set()).add(pref.duty_instance_id)

    return DerivedSets(
        calendar=calendar,
        duties_by_day={k: tuple(v) for k, v in sorted(duties_by_day.items())},
        shifts_by_day={k: tuple(v) for k, v in sorted(shifts_by_day.items())},
        duties_by_weekend={k: tuple(v) for k, v in sorted(duties_by_weekend.items())},
        duties_by_month={k: tuple(v) for k, v in sorted(duties_by_month.items())},
        duty_quali=duty_quali,
        duty_quali_soft=duty_soft,
        shift_quali=shift_quali,
        shift_quali_soft=shift_soft,
        hard_conflicts=hard_conflicts,
        soft_conflicts=soft_conflicts,
        carry=carry,
        duty_prev=duty_prev,
        consec_windows=derive_consec_windows(inst),
        target_num=target_num,
        impossible_duties={k: frozenset(v) for k, v in sorted(impossible_duties.items())},
        impossible_shifts={k: frozenset(v) for k, v in sorted(impossible_shifts.items())},
    )


def derived_to_dict(der: DerivedSets) -> dict:
    """Serializable view of the derived sets, for debugging dumps."""
    return {
        "weekends": [
            {"index": w.index, "saturday": w.saturday.isoformat(), "month": list(w.month)}
            for w in der.calendar.weekends
        ],
        "months": [
            {
                "month": list(info.key),
                "weekends": list(info.weekend_indices),
                "saturdays_inside": info.saturdays_inside,
                "saturdays_total": info.saturdays_total,
                "we_factor": info.we_factor,
            }
            for info in der.calendar.months
        ],
        "duties_by_day": {str(k): list(v) for k, v in der.duties_by_day.items()},
        "shifts_by_day": {str(k): list(v) for k, v in der.shifts_by_day.items()},
        "duties_by_weekend": {str(k): list(v) for k, v in der.duties_by_weekend.items()},
        "duties_by_month": {f"{y:04d}-{mo:02d}": list(v) for (y, mo), v in der.duties_by_month.items()},
        "duty_quali": {k: sorted(v) for k, v in sorted(der.duty_quali.items())},
        "duty_quali_soft": {k: sorted(v) for k, v in sorted(der.duty_quali_soft.items())},
        "shift_quali": {k: sorted(v) for k, v in sorted(der.shift_quali.items())},
        "shift_quali_soft": {k: sorted(v) for k, v in sorted(der.shift_quali_soft.items())},
        "hard_conflicts": [
            [c.first_id, c.second_id] for c in der.hard_conflicts
        ],
        "soft_conflicts": [
            {"pair": [c.first_id, c.second_id], "level_hours": c.level_hours, "weight": c.weight}
            for c in der.soft_conflicts
        ],
        "carryover_excluded_duties": {k: sorted(v) for k, v in der.carry.r_duty.items()},
        "carryover_excluded_shifts": {k: sorted(v) for k, v in der.carry.r_shift.items()},
        "carryover_soft_duties": {k: dict(v) for k, v in der.carry.r_duty_soft.items()},
        "carryover_soft_shifts": {k: dict(v) for k, v in der.carry.r_shift_soft.items()},
        "past_we": dict(der.carry.past_we),
        "prev_block_physicians": {k: list(v) for k, v in der.carry.prev_block_physicians.items()},
        "duty_prev": dict(sorted(der.duty_prev.items())),
        "duty_prev_physician": dict(der.carry.duty_prev_physician),
        "consec_windows": [
            {"index": w.index, "blocks": list(w.block_ids), "restrict_to": list(w.restrict_to) if w.restrict_to else None}
            for w in der.consec_windows
        ],
        "target_num": {pool: dict(t) for pool, t in sorted(der.target_num.items())},
        "impossible_duties": {k: sorted(v) for k, v in der.impossible_duties.items()},
    }
