"""Independent roster verification and quality reporting.

Everything here recomputes from the roster, the instance, and the
derived sets by direct counting: set membership, window sums, and gap
arithmetic.  Nothing is shared with the model builder, so this acts as
double-entry bookkeeping against it: any disagreement between the
solver's objective and the recount here points at a modeling bug.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field

from . import model as m
from .derivation import DerivedSets, preference_deltas
from .solve import RosterSolution

_ONE_DAY = dt.timedelta(days=1)


@dataclass(frozen=True)
class ViolationFinding:
    family: str
    severity: str  # "hard" | "soft"
    message: str
    subjects: tuple[str, ...] = ()
    magnitude: float = 1.0

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "severity": self.severity,
            "message": self.message,
            "subjects": list(self.subjects),
            "magnitude": self.magnitude,
        }


class _View:
    """Indexed access to one roster against one instance."""

    def __init__(self, roster: RosterSolution, inst: m.RosterInstance, der: DerivedSets):
        self.roster = roster
        self.inst = inst
        self.der = der
        self.duty_by_id = {d.id: d for d in inst.duty_instances}
        self.shift_by_id = {s.id: s for s in inst.shift_instances}
        self.duty_tpl = {t.id: t for t in inst.duty_templates}
        self.shift_tpl = {t.id: t for t in inst.shift_templates}
        self.phys_ids = {p.id for p in inst.physicians}

        for iid, pid in roster.duty_assignments.items():
            if iid not in self.duty_by_id:
                raise ValueError(f"roster references unknown duty instance {iid!r}")
            if pid not in self.phys_ids:
                raise ValueError(f"roster references unknown physician {pid!r}")
        for iid, pids in roster.shift_assignments.items():
            if iid not in self.shift_by_id:
                raise ValueError(f"roster references unknown shift instance {iid!r}")
            for pid in pids:
                if pid not in self.phys_ids:
                    raise ValueError(f"roster references unknown physician {pid!r}")

        self.duties_of: dict[str, set[str]] = {p.id: set() for p in inst.physicians}
        for iid, pid in roster.duty_assignments.items():
            self.duties_of[pid].add(iid)
        self.shifts_of: dict[str, set[str]] = {p.id: set() for p in inst.physicians}
        self.shift_count: dict[str, int] = {}
        for iid, pids in roster.shift_assignments.items():
            self.shift_count[iid] = len(pids)
            for pid in pids:
                self.shifts_of[pid].add(iid)

    def has_duty(self, pid: str, iid: str) -> bool:
        return iid in self.duties_of.get(pid, ())

    def has_shift(self, pid: str, iid: str) -> bool:
        return iid in self.shifts_of.get(pid, ())

    def has(self, pid: str, iid: str, is_duty: bool) -> bool:
        return self.has_duty(pid, iid) if is_duty else self.has_shift(pid, iid)

    def assignments_on_day(self, pid: str, day: int) -> list[str]:
        out = [d for d in self.der.duties_by_day.get(day, ()) if self.has_duty(pid, d)]
        out += [s for s in self.der.shifts_by_day.get(day, ()) if self.has_shift(pid, s)]
        return out

    def weekend_duty_count(self, pid: str, windex: int) -> int:
        return sum(1 for d in self.der.duties_by_weekend.get(windex, ()) if self.has_duty(pid, d))

    def works_weekend(self, pid: str, windex: int) -> bool:
        return self.weekend_duty_count(pid, windex) > 0

    def block_taken_by(self, block: m.BlockDefinition, pid: str) -> bool:
        if block.kind is m.BlockKind.DUTY:
            return all(self.has_duty(pid, iid) for iid in block.members)
        return all(self.has_shift(pid, iid) for iid in block.members)

    def block_touched_by(self, block: m.BlockDefinition, pid: str) -> bool:
        if block.kind is m.BlockKind.DUTY:
            return any(self.has_duty(pid, iid) for iid in block.members)
        return any(self.has_shift(pid, iid) for iid in block.members)


def _weekend_soft_active(inst: m.RosterInstance, der: DerivedSets) -> bool:
    wp = inst.weekend_policy
    return bool(der.calendar.weekends) and (
        wp.cons_we is not None
        or wp.max_we is not None
        or wp.des_max_we is not None
        or wp.min_free_we is not None
        or wp.des_min_free_we is not None
        or any(p.weekend_preference is not m.WeekendPreferenceKind.NONE for p in inst.physicians)
    )


def _free_weekend_cap(weekends_in_month: int, min_free: int, info) -> int:
    num = weekends_in_month * info.saturdays_total - min_free * info.saturdays_inside
    return m.round_half_up_ratio(num, 1, info.saturdays_total)


# ---------------------------------------------------------------------------
# Hard validation


def validate_hard(roster: RosterSolution, inst: m.RosterInstance, der: DerivedSets) -> list[ViolationFinding]:
    """Recheck every active hard constraint family by direct counting."""
    v = _View(roster, inst, der)
    out: list[ViolationFinding] = []
    period = inst.period

    def bad(family: str, message: str, *subjects: str, magnitude: float = 1.0):
        out.append(ViolationFinding(family, "hard", message, tuple(subjects), magnitude))

    for d in inst.duty_instances:
        assigned = roster.duty_assignments.get(d.id)
        if v.duty_tpl[d.template_id].mandatory and assigned is None:
            bad("01-duty-mandatory", f"mandatory duty {d.id!r} is unassigned", d.id)

    for d in inst.duty_instances:
        if d.pre_assigned is not None and roster.duty_assignments.get(d.id) != d.pre_assigned:
            bad("03-duty-manual-fixed", f"manual duty {d.id!r} is not with {d.pre_assigned!r}", d.id, d.pre_assigned)
    for p in inst.physicians:
        if not p.planned_manually:
            continue
        extra_d = [iid for iid in sorted(v.duties_of[p.id]) if v.duty_by_id[iid].pre_assigned != p.id]
        for iid in extra_d:
            bad("04-duty-manual-exclusive", f"manually planned {p.id!r} picked up duty {iid!r}", p.id, iid)
        extra_s = [iid for iid in sorted(v.shifts_of[p.id]) if p.id not in v.shift_by_id[iid].pre_assigned]
        for iid in extra_s:
            bad("13.2-shift-manual-exclusive", f"manually planned {p.id!r} picked up shift {iid!r}", p.id, iid)

    for iid, pid in sorted(roster.duty_assignments.items()):
        if not der.duty_hard_ok(pid, v.duty_by_id[iid].template_id):
            bad("05.1-duty-qualification", f"{pid!r} lacks a required qualification for {iid!r}", pid, iid)
    for iid, pids in sorted(roster.shift_assignments.items()):
        for pid in pids:
            if not der.shift_hard_ok(pid, v.shift_by_id[iid].template_id):
                bad("05.2-shift-qualification", f"{pid!r} lacks a required qualification for {iid!r}", pid, iid)

    for s in inst.shift_instances:
        tpl = v.shift_tpl[s.template_id]
        count = v.shift_count.get(s.id, 0)
        if count < tpl.min_staff:
            bad(
                "06-shift-min-staff",
                f"shift {s.id!r} has {count} assigned, below the hard minimum {tpl.min_staff}",
                s.id,
                magnitude=tpl.min_staff - count,
            )
        if count > tpl.max_staff:
            bad(
                "07-shift-max-staff",
                f"shift {s.id!r} has {count} assigned, above the maximum {tpl.max_staff}",
                s.id,
                magnitude=count - tpl.max_staff,
            )
        if tpl.ward_members:
            for pid in roster.shift_assignments.get(s.id, ()):
                if pid not in tpl.ward_members:
                    bad("12-shift-ward-only", f"{pid!r} is not on the ward of shift {s.id!r}", pid, s.id)
        for pid in s.pre_assigned:
            if not v.has_shift(pid, s.id):
                bad("13.1-shift-manual-fixed", f"manual shift {s.id!r} is not with {pid!r}", s.id, pid)

    for pair in der.hard_conflicts:
        for p in inst.physicians:
            if v.has(p.id, pair.first_id, pair.first_is_duty) and v.has(p.id, pair.second_id, pair.second_is_duty):
                bad(
                    "14-rest-hard",
                    f"{p.id!r} holds {pair.first_id!r} and {pair.second_id!r}, violating a mandatory rest time",
                    p.id,
                    pair.first_id,
                    pair.second_id,
                )

    for p in inst.physicians:
        for date in sorted(p.absences):
            day = period.day_index(date)
            for iid in v.assignments_on_day(p.id, day):
                bad("16-absence", f"{p.id!r} is assigned {iid!r} while absent on {date}", p.id, iid)
            before = day - 1
            for iid in der.duties_by_day.get(before, ()):
                if v.duty_tpl[v.duty_by_id[iid].template_id].forbidden_before_absence and v.has_duty(p.id, iid):
                    bad("18-before-absence", f"{p.id!r} holds {iid!r} on the day before an absence", p.id, iid)
            after = day + 1
            for iid in der.duties_by_day.get(after, ()):
                if v.duty_tpl[v.duty_by_id[iid].template_id].forbidden_after_absence and v.has_duty(p.id, iid):
                    bad("19-after-absence", f"{p.id!r} holds {iid!r} on the day after an absence", p.id, iid)

    for pid, iids in sorted(der.impossible_duties.items()):
        for iid in sorted(iids):
            if v.has_duty(pid, iid):
                bad("17.1-impossible-duty", f"{pid!r} holds {iid!r} despite marking it impossible", pid, iid)

    for block in inst.blocks:
        fam = "20-duty-block-link" if block.kind is m.BlockKind.DUTY else "21-shift-block-link"
        for p in inst.physicians:
            if v.block_touched_by(block, p.id) and not v.block_taken_by(block, p.id):
                bad(fam, f"block {block.id!r} is split: {p.id!r} holds only part of it", block.id, p.id)
        holders = [p.id for p in inst.physicians if v.block_taken_by(block, p.id)]
        if block.free_days_after > 0:
            end_day = max(period.day_index(v.duty_by_id[i].date if block.kind is m.BlockKind.DUTY else v.shift_by_id[i].date) for i in block.members)
            for pid in holders:
                for delta in range(1, block.free_days_after + 1):
                    day = end_day + delta
                    if day > period.num_days:
                        break
                    for iid in v.assignments_on_day(pid, day):
                        bad(
                            "22-block-free-days",
                            f"{pid!r} works {iid!r} during the free days owed after block {block.id!r}",
                            pid,
                            iid,
                            block.id,
                        )
        if not (block.allow_extra_duties_inside and block.allow_extra_shifts_inside):
            members = set(block.members)
            days = [
                period.day_index((v.duty_by_id[i] if block.kind is m.BlockKind.DUTY else v.shift_by_id[i]).date)
                for i in block.members
            ]
            for pid in holders:
                for day in range(min(days), max(days) + 1):
                    if not block.allow_extra_duties_inside:
                        for iid in der.duties_by_day.get(day, ()):
                            if iid not in members and v.has_duty(pid, iid):
                                bad("23-block-no-extra", f"{pid!r} works extra duty {iid!r} during block {block.id!r}", pid, iid, block.id)
                    if not block.allow_extra_shifts_inside:
                        for iid in der.shifts_by_day.get(day, ()):
                            if iid not in members and v.has_shift(pid, iid):
                                bad("23-block-no-extra", f"{pid!r} works extra shift {iid!r} during block {block.id!r}", pid, iid, block.id)

    for pool in inst.pools:
        members = sorted(pool.physicians)
        pool_duties = sorted(pool.duty_instances)
        counts = {pid: sum(1 for d in pool_duties if v.has_duty(pid, d)) for pid in members}
        if pool.exact_count is not None:
            for pid in members:
                if counts[pid] != pool.exact_count:
                    bad(
                        "27-pool-exact",
                        f"{pid!r} has {counts[pid]} duties in pool {pool.id!r}, required exactly {pool.exact_count}",
                        pid,
                        pool.id,
                        magnitude=abs(counts[pid] - pool.exact_count),
                    )
        if pool.max_duties is not None:
            for pid in members:
                if counts[pid] > pool.max_duties:
                    bad(
                        "28-pool-max",
                        f"{pid!r} has {counts[pid]} duties in pool {pool.id!r}, above the cap {pool.max_duties}",
                        pid,
                        pool.id,
                        magnitude=counts[pid] - pool.max_duties,
                    )
        if pool.min_duties is not None:
            for pid in members:
                if counts[pid] < pool.min_duties:
                    bad(
                        "30-pool-min",
                        f"{pid!r} has {counts[pid]} duties in pool {pool.id!r}, below the floor {pool.min_duties}",
                        pid,
                        pool.id,
                        magnitude=pool.min_duties - counts[pid],
                    )
        if pool.max_phy_per_day is not None:
            by_day: dict[int, int] = {}
            for d in pool_duties:
                pid = roster.duty_assignments.get(d)
                if pid in pool.physicians:
                    day = period.day_index(v.duty_by_id[d].date)
                    by_day[day] = by_day.get(day, 0) + 1
            for day, total in sorted(by_day.items()):
                if total > pool.max_phy_per_day:
                    bad(
                        "32-pool-max-phy",
                        f"pool {pool.id!r} has {total} physicians on day {day}, above the cap {pool.max_phy_per_day}",
                        pool.id,
                        magnitude=total - pool.max_phy_per_day,
                    )

    wp = inst.weekend_policy
    weekends = der.calendar.weekends
    if weekends:
        if wp.cons_we is not None:
            W = len(weekends)
            for p in inst.physicians:
                worked = [v.works_weekend(p.id, w.index) for w in weekends]
                for start in range(0, W - wp.cons_we):
                    if all(worked[start : start + wp.cons_we + 1]):
                        bad(
                            "37.1-consec-weekends",
                            f"{p.id!r} works {wp.cons_we + 1} consecutive weekends starting at weekend {start + 1}",
                            p.id,
                        )
                past = der.carry.past_we.get(p.id, 0)
                if past > 0:
                    budget = max(0, wp.cons_we - past)
                    window = worked[: budget + 1]
                    if len(window) > budget and all(window):
                        bad(
                            "37.2-consec-weekends-boundary",
                            f"{p.id!r} exceeds {wp.cons_we} consecutive weekends counting {past} from last period",
                            p.id,
                        )
        for info in der.calendar.months:
            if not info.weekend_indices:
                continue
            for p in inst.physicians:
                worked = sum(1 for wi in info.weekend_indices if v.works_weekend(p.id, wi))
                if wp.max_we is not None and worked > info.scale_round(wp.max_we):
                    bad(
                        "40-max-we-month",
                        f"{p.id!r} works {worked} weekends in {info.key[0]:04d}-{info.key[1]:02d}, "
                        f"above the cap {info.scale_round(wp.max_we)}",
                        p.id,
                        magnitude=worked - info.scale_round(wp.max_we),
                    )
                if wp.min_free_we is not None:
                    cap = _free_weekend_cap(len(info.weekend_indices), wp.min_free_we, info)
                    if worked > cap:
                        bad(
                            "42-min-free-we-month",
                            f"{p.id!r} keeps too few free weekends in {info.key[0]:04d}-{info.key[1]:02d}",
                            p.id,
                            magnitude=worked - cap,
                        )

    for pid, iids in sorted(der.carry.r_duty.items()):
        for iid in sorted(iids):
            if v.has_duty(pid, iid):
                bad("44.1-prev-period-duty", f"{pid!r} holds {iid!r}, blocked by the previous period", pid, iid)
    for pid, iids in sorted(der.carry.r_shift.items()):
        for iid in sorted(iids):
            if v.has_shift(pid, iid):
                bad("44.2-prev-period-shift", f"{pid!r} holds {iid!r}, blocked by the previous period", pid, iid)

    return out


# ---------------------------------------------------------------------------
# Soft recount


@dataclass
class SoftTally:
    objective: float = 0.0
    desired_rest_by_level: dict[float, int] = field(default_factory=dict)
    understaffed_shift_days: int = 0
    staffing_shortfall: int = 0
    below_hard_minimum: int = 0
    duty_prefs_total: dict[str, int] = field(default_factory=dict)
    duty_prefs_assigned: dict[str, int] = field(default_factory=dict)
    weekly_prefs_total: dict[str, int] = field(default_factory=dict)
    weekly_prefs_assigned: dict[str, int] = field(default_factory=dict)
    weekend_pref_violations: int = 0
    max_we_violations: int = 0
    free_we_violations: int = 0
    pool_below_floor: dict[str, int] = field(default_factory=dict)
    pool_above_ceil: dict[str, int] = field(default_factory=dict)
    pool_des_max_excess: dict[str, int] = field(default_factory=dict)
    pool_des_min_shortfall: dict[str, int] = field(default_factory=dict)
    pool_des_max_phy_excess: dict[str, int] = field(default_factory=dict)
    consecutive_duty_pairs: int = 0
    consecutive_block_pairs: int = 0
    consec_window_violations: int = 0
    unassigned_duties: int = 0


def recount_soft(
    roster: RosterSolution,
    inst: m.RosterInstance,
    der: DerivedSets,
    weights: m.WeightConfig | None = None,
) -> SoftTally:
    """Recompute every soft quantity and the full objective from scratch."""
    w = weights or inst.weights
    v = _View(roster, inst, der)
    t = SoftTally()
    period = inst.period
    obj = 0.0

    pref_duty, pref_shift = preference_deltas(inst, w)

    for iid, pid in roster.duty_assignments.items():
        tpl = v.duty_tpl[v.duty_by_id[iid].template_id]
        if not tpl.mandatory:
            obj += w.duty_coverage
        if tpl.id not in der.duty_quali_soft.get(pid, frozenset()):
            obj -= w.soft_quali_duty
        soft_prev = der.carry.r_duty_soft.get(pid, {}).get(iid)
        if soft_prev:
            obj -= w.prev_rest_scale * soft_prev
        obj += pref_duty.get((pid, iid), 0.0)
    for iid, pids in roster.shift_assignments.items():
        tpl_id = v.shift_by_id[iid].template_id
        for pid in pids:
            if tpl_id not in der.shift_quali_soft.get(pid, frozenset()):
                obj -= w.soft_quali_shift
            soft_prev = der.carry.r_shift_soft.get(pid, {}).get(iid)
            if soft_prev:
                obj -= w.prev_rest_scale * soft_prev
            obj += pref_shift.get((pid, iid), 0.0)

    t.unassigned_duties = len(roster.unassigned_duties)

    for s in inst.shift_instances:
        tpl = v.shift_tpl[s.template_id]
        count = v.shift_count.get(s.id, 0)
        if count < tpl.min_staff:
            t.below_hard_minimum += 1
        if count < tpl.desired_min_staff:
            t.understaffed_shift_days += 1
            t.staffing_shortfall += tpl.desired_min_staff - count
        if tpl.desired_min_staff > tpl.min_staff:
            des_weight = tpl.desired_penalty_weight if tpl.desired_penalty_weight is not None else w.shift_desired
            y_des = min(max(count - tpl.min_staff, 0), tpl.desired_min_staff - tpl.min_staff)
            y_max = max(count - tpl.desired_min_staff, 0)
            obj += des_weight * y_des + w.shift_above_desired * y_max

    for conflict in der.soft_conflicts:
        for p in inst.physicians:
            if v.has(p.id, conflict.first_id, conflict.first_is_duty) and v.has(
                p.id, conflict.second_id, conflict.second_is_duty
            ):
                t.desired_rest_by_level[conflict.level_hours] = (
                    t.desired_rest_by_level.get(conflict.level_hours, 0) + 1
                )
                obj -= conflict.weight

    # Preference fulfillment tallies (and their objective part is already in
    # the folded coefficients above).
    for pref in inst.preferences:
        level = pref.level.value
        if pref.duty_instance_id is not None:
            if pref.level is m.PreferenceLevel.IMPOSSIBLE:
                continue
            t.duty_prefs_total[level] = t.duty_prefs_total.get(level, 0) + 1
            if roster.duty_assignments.get(pref.duty_instance_id) == pref.physician_id:
                t.duty_prefs_assigned[level] = t.duty_prefs_assigned.get(level, 0) + 1
        elif pref.weekly_set_id is not None:
            t.weekly_prefs_total[level] = t.weekly_prefs_total.get(level, 0) + 1
            ws = inst.weekly_set(pref.weekly_set_id)
            hit = False
            for d in inst.duty_instances:
                if d.template_id in ws.duty_templates and m.week_index_of(period, d.date) == pref.week_index:
                    if v.has_duty(pref.physician_id, d.id):
                        hit = True
                        break
            if not hit:
                for s in inst.shift_instances:
                    if s.template_id in ws.shift_templates and m.week_index_of(period, s.date) == pref.week_index:
                        if v.has_shift(pref.physician_id, s.id):
                            hit = True
                            break
            if hit:
                t.weekly_prefs_assigned[level] = t.weekly_prefs_assigned.get(level, 0) + 1

    wp = inst.weekend_policy
    if _weekend_soft_active(inst, der):
        we_pref_weight = (
            wp.preference_violation_weight if wp.preference_violation_weight is not None else w.we_pref_violation
        )
        for p in inst.physicians:
            for we in der.calendar.weekends:
                count = v.weekend_duty_count(p.id, we.index)
                if p.weekend_preference is m.WeekendPreferenceKind.ONE_DUTY and count > 1:
                    t.weekend_pref_violations += count - 1
                    obj -= we_pref_weight * (count - 1)
                elif p.weekend_preference is m.WeekendPreferenceKind.MULTIPLE_DUTIES and count == 1:
                    t.weekend_pref_violations += 1
                    obj -= we_pref_weight
        for info in der.calendar.months:
            if not info.weekend_indices:
                continue
            for p in inst.physicians:
                worked = sum(1 for wi in info.weekend_indices if v.works_weekend(p.id, wi))
                if wp.des_max_we is not None:
                    excess = max(0, worked - info.scale_round(wp.des_max_we))
                    t.max_we_violations += excess
                    weight = wp.des_max_we_weight if wp.des_max_we_weight is not None else w.max_we_violation
                    obj -= weight * excess
                if wp.des_min_free_we is not None:
                    cap = _free_weekend_cap(len(info.weekend_indices), wp.des_min_free_we, info)
                    excess = max(0, worked - cap)
                    t.free_we_violations += excess
                    weight = wp.des_min_free_we_weight if wp.des_min_free_we_weight is not None else w.free_we_violation
                    obj -= weight * excess

    for pool in inst.pools:
        members = sorted(pool.physicians)
        pool_duties = sorted(pool.duty_instances)
        counts = {pid: sum(1 for d in pool_duties if v.has_duty(pid, d)) for pid in members}
        if pool.des_max_duties is not None:
            weight = pool.des_max_duties_weight if pool.des_max_duties_weight is not None else w.pool_des_max
            excess = sum(max(0, counts[pid] - pool.des_max_duties) for pid in members)
            t.pool_des_max_excess[pool.id] = excess
            obj -= weight * excess
        if pool.des_min_duties is not None:
            weight = pool.des_min_duties_weight if pool.des_min_duties_weight is not None else w.pool_des_min
            shortfall = sum(max(0, pool.des_min_duties - counts[pid]) for pid in members)
            t.pool_des_min_shortfall[pool.id] = shortfall
            obj -= weight * shortfall
        if pool.des_max_phy_per_day is not None:
            weight = pool.des_max_phy_weight if pool.des_max_phy_weight is not None else w.pool_des_max_phy
            by_day: dict[int, int] = {}
            for d in pool_duties:
                pid = roster.duty_assignments.get(d)
                if pid in pool.physicians:
                    day = period.day_index(v.duty_by_id[d].date)
                    by_day[day] = by_day.get(day, 0) + 1
            excess = sum(max(0, n - pool.des_max_phy_per_day) for n in by_day.values())
            t.pool_des_max_phy_excess[pool.id] = excess
            obj -= weight * excess
        if pool.fair_distribution:
            down_w = pool.fairness_down_weight if pool.fairness_down_weight is not None else w.fairness_down
            up_w = pool.fairness_up_weight if pool.fairness_up_weight is not None else w.fairness_up
            targets = der.target_num[pool.id]
            below = above = 0
            for pid in members:
                target = targets[pid]
                down = max(0, math.floor(target) - counts[pid])
                up = max(0, counts[pid] - math.ceil(target))
                if down:
                    below += 1
                if up:
                    above += 1
                obj -= down_w * down + up_w * up
            t.pool_below_floor[pool.id] = below
            t.pool_above_ceil[pool.id] = above

    for iid, prev_id in sorted(der.duty_prev.items()):
        pid = roster.duty_assignments.get(iid)
        if pid is not None and roster.duty_assignments.get(prev_id) == pid:
            t.consecutive_duty_pairs += 1
            obj += w.duty_consecutive
    for iid, pid in sorted(der.carry.duty_prev_physician.items()):
        if roster.duty_assignments.get(iid) == pid:
            t.consecutive_duty_pairs += 1
            obj += w.duty_consecutive

    blocks = {b.id: b for b in inst.blocks}
    for b in inst.blocks:
        if b.kind is not m.BlockKind.SHIFT or b.consecutive_predecessor is None:
            continue
        reward = b.desired_consecutive_weight if b.desired_consecutive_weight is not None else w.block_consecutive
        pred = b.consecutive_predecessor
        if pred in blocks and blocks[pred].kind is m.BlockKind.SHIFT:
            for p in inst.physicians:
                if v.block_taken_by(b, p.id) and v.block_taken_by(blocks[pred], p.id):
                    t.consecutive_block_pairs += 1
                    obj += reward
        elif b.id in der.carry.prev_block_physicians:
            for pid in der.carry.prev_block_physicians[b.id]:
                if v.block_taken_by(b, pid):
                    t.consecutive_block_pairs += 1
                    obj += reward

    for window in der.consec_windows:
        candidates = window.restrict_to if window.restrict_to is not None else [p.id for p in inst.physicians]
        if any(all(v.block_taken_by(blocks[bid], pid) for bid in window.block_ids) for pid in candidates):
            t.consec_window_violations += 1
            obj -= w.max_consec_block

    t.objective = obj
    return t


# ---------------------------------------------------------------------------
# Quality report


@dataclass
class QualityReport:
    instance_id: str
    solver_seconds: float
    total_seconds: float
    status: str
    objective: float
    recomputed_objective: float
    hard_violations: int
    tally: SoftTally
    worked_weekends: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        t = self.tally
        return {
            "kind": "quality-report",
            "schema_version": m.SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "computation": {
                "solver_seconds": self.solver_seconds,
                "total_seconds": self.total_seconds,
                "status": self.status,
                "objective": self.objective,
                "recomputed_objective": self.recomputed_objective,
            },
            "staffing": {
                "unassigned_duties": t.unassigned_duties,
                "understaffed_shift_days": t.understaffed_shift_days,
                "staffing_shortfall": t.staffing_shortfall,
                "below_hard_minimum": t.below_hard_minimum,
            },
            "hard_violations": self.hard_violations,
            "preferences": {
                "duty_totals": dict(sorted(t.duty_prefs_total.items())),
                "duty_assigned": dict(sorted(t.duty_prefs_assigned.items())),
                "weekly_totals": dict(sorted(t.weekly_prefs_total.items())),
                "weekly_assigned": dict(sorted(t.weekly_prefs_assigned.items())),
                "weekend_preference_violations": t.weekend_pref_violations,
            },
            "fairness": {
                "pool_below_floor": dict(sorted(t.pool_below_floor.items())),
                "pool_above_ceil": dict(sorted(t.pool_above_ceil.items())),
                "pool_des_max_excess": dict(sorted(t.pool_des_max_excess.items())),
                "pool_des_min_shortfall": dict(sorted(t.pool_des_min_shortfall.items())),
                "pool_des_max_phy_excess": dict(sorted(t.pool_des_max_phy_excess.items())),
                "max_we_violations": t.max_we_violations,
                "free_we_violations": t.free_we_violations,
            },
            "continuity": {
                "consecutive_duty_pairs": t.consecutive_duty_pairs,
                "consecutive_block_pairs": t.consecutive_block_pairs,
                "consec_window_violations": t.consec_window_violations,
            },
            "desired_rest_violations": {f"{hours:g}h": n for hours, n in sorted(t.desired_rest_by_level.items())},
            "worked_weekends": {pid: dict(sorted(months.items())) for pid, months in sorted(self.worked_weekends.items())},
        }

    def render_table(self) -> str:
        doc = self.to_dict()
        rows: list[tuple[str, str]] = [
            ("Solver time [s]", f"{self.solver_seconds:.1f}"),
            ("Total computation time [s]", f"{self.total_seconds:.1f}"),
            ("Objective", f"{self.objective:.1f}"),
            ("Hard violations", str(self.hard_violations)),
            ("Unassigned duties", str(doc["staffing"]["unassigned_duties"])),
            ("Understaffed wards", str(doc["staffing"]["understaffed_shift_days"])),
            ("Below hard minimum", str(doc["staffing"]["below_hard_minimum"])),
        ]
        prefs = doc["preferences"]
        for level in ("strongly-desired", "desired", "undesired"):
            total = prefs["duty_totals"].get(level, 0)
            got = prefs["duty_assigned"].get(level, 0)
            if total or got:
                rows.append((f"Number of {level} duties", str(total)))
                rows.append((f"{level.capitalize()} duties assigned", str(got)))
        for level in ("strongly-desired", "desired", "undesired"):
            total = prefs["weekly_totals"].get(level, 0)
            got = prefs["weekly_assigned"].get(level, 0)
            if total or got:
                rows.append((f"{level.capitalize()} weekly sets assigned", f"{got} of {total}"))
        rows.append(("Weekend preference violations", str(prefs["weekend_preference_violations"])))
        fair = doc["fairness"]
        for pool_id, n in fair["pool_below_floor"].items():
            rows.append((f"Phys. below fair target [{pool_id}]", str(n)))
        for pool_id, n in fair["pool_above_ceil"].items():
            rows.append((f"Phys. above fair target [{pool_id}]", str(n)))
        cont = doc["continuity"]
        rows.append(("Consecutive duty assignments", str(cont["consecutive_duty_pairs"])))
        rows.append(("Consecutive block assignments", str(cont["consecutive_block_pairs"])))
        for level, n in doc["desired_rest_violations"].items():
            rows.append((f"Violated desired rest times [{level}]", str(n)))
        width = max(len(r[0]) for r in rows) + 2
        lines = [f"Quality report for {self.instance_id}", "=" * (width + 12)]
        lines += [f"{name:<{width}}{value:>10}" for name, value in rows]
        return "\n".join(lines) + "\n"


def quality_report(
    roster: RosterSolution,
    inst: m.RosterInstance,
    der: DerivedSets,
    hard_findings: list[ViolationFinding] | None = None,
    tally: SoftTally | None = None,
) -> QualityReport:
    if hard_findings is None:
        hard_findings = validate_hard(roster, inst, der)
    if tally is None:
        tally = recount_soft(roster, inst, der)
    v = _View(roster, inst, der)
    worked: dict[str, dict[str, int]] = {}
    for p in inst.physicians:
        per_month: dict[str, int] = {}
        for info in der.calendar.months:
            n = sum(1 for wi in info.weekend_indices if v.works_weekend(p.id, wi))
            if info.weekend_indices:
                per_month[f"{info.key[0]:04d}-{info.key[1]:02d}"] = n
        worked[p.id] = per_month
    return QualityReport(
        instance_id=inst.id,
        solver_seconds=roster.solver_seconds,
        total_seconds=roster.total_seconds,
        status=roster.status,
        objective=roster.objective,
        recomputed_objective=tally.objective,
        hard_violations=len(hard_findings),
        tally=tally,
        worked_weekends=worked,
    )


def compare_rosters(a: QualityReport, b: QualityReport) -> dict[str, float]:
    """Signed per-indicator deltas (b minus a) over the numeric leaves."""
    out: dict[str, float] = {}

    def walk(prefix: str, left, right):
        if isinstance(left, dict) and isinstance(right, dict):
            for key in sorted(set(left) | set(right)):
                walk(f"{prefix}.{key}" if prefix else str(key), left.get(key, 0), right.get(key, 0))
        elif isinstance(left, (int, float)) and isinstance(right, (int, float)):
            if left != right:
                out[prefix] = right - left

    da, db = a.to_dict(), b.to_dict()
    for section in ("staffing", "preferences", "fairness", "continuity", "desired_rest_violations"):
        walk(section, da.get(section, {}), db.get(section, {}))
    return out
