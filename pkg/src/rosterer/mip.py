"""Compilation of an instance into a solver-neutral integer program.

The builder is deterministic: identical inputs produce identical
variable ordering, names, coefficients, and constraints, so the MPS
encoding downstream is byte-identical.  Only constraint families whose
triggering configuration is present are emitted.

Family catalog (tag prefixes, used for provenance and statistics):

  01 duty-mandatory            exactly one physician per mandatory duty
  02 duty-at-most-one          optional duties take at most one physician
  03 duty-manual-fixed         pre-assigned duties are fixed to one
  04 duty-manual-exclusive     manually planned physicians get nothing else
  05.1/05.2 qualification      hard qualification filters (duties/shifts)
  06 shift-min-staff           hard minimum staffing
  07 shift-max-staff           hard maximum staffing
  08 shift-surplus-split       surplus above minimum splits into two counters
  09 shift-desired-cap         desired-level counter cap
  10 shift-above-desired-cap   above-desired counter cap
  11.1/11.2 shift-gate         above-desired counts only once desired is full
  12 shift-ward-only           only ward members may take a ward shift
  13.1/13.2 shift-manual       manual shift assignments fixed / exclusive
  14.1..14.4 rest-hard         mandatory rest conflicts (duty/shift pairs)
  15.1..15.4 rest-soft         desired rest conflicts with violation flags
  16.1/16.2 absence            nothing on absent days
  17.1 impossible              physician-declared impossible duties
  18 before-absence            flagged duties not on the day before absence
  19 after-absence             flagged duties not on the day after absence
  20 duty-block-link           duty block members move together
  21 shift-block-link          shift block members move together
  22.1..22.4 block-free-days   free days owed after a block
  23.1..23.4 block-no-extra    no extra work during a closed block
  24.1..24.3 block-consec      shift-block continuity across the chain
  25.1..25.2 duty-consec       duty continuity on consecutive days
  26 max-consec-blocks         window cap on chained shift blocks
  27 pool-exact                exact duty count per pool member
  28 pool-max                  hard maximum duties in a pool
  29 pool-des-max              desired maximum with violation counter
  30 pool-min                  hard minimum duties in a pool
  31 pool-des-min              desired minimum with violation counter
  32 pool-max-phy              hard per-day simultaneity cap
  33 pool-des-max-phy          desired per-day simultaneity cap
  34 pool-fair-floor           fairness band below floor(target)
  35 pool-fair-ceil            fairness band above ceil(target)
  36.1/36.2 weekend-attend     attendance indicator linking
  37.1/37.2 consec-weekends    consecutive worked-weekend windows
  38 weekend-pref-one          one-duty weekend preference violations
  39 weekend-pref-mult         multiple-duty weekend preference violations
  40 max-we-month              hard monthly worked-weekend cap (scaled)
  41 des-max-we-month          desired monthly worked-weekend cap
  42 min-free-we-month         hard monthly free-weekend floor (scaled)
  43 des-min-free-we-month     desired monthly free-weekend floor
  44.1/44.2 prev-period        exclusions carried over from last period
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import model as m
from .derivation import DerivedSets, preference_deltas
from .errors import BuildInfeasibleError, ConfigurationError

BINARY = "binary"
INTEGER = "integer"

SENSE_LE = "<="
SENSE_GE = ">="
SENSE_EQ = "=="


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # binary | integer (both with lower bound 0)
    upper: float
    objective: float


@dataclass(frozen=True)
class Constraint:
    name: str
    family: str
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


class CanonicalModel:
    """Solver-neutral maximization MIP with provenance-tagged constraints."""

    sense = "maximize"

    def __init__(self) -> None:
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self._index: dict[str, int] = {}

    def add_variable(self, name: str, kind: str, upper: float, objective: float) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        idx = len(self.variables)
        self.variables.append(Variable(name, kind, upper, objective))
        self._index[name] = idx
        return idx

    def add_constraint(self, name: str, family: str, terms, sense: str, rhs: float) -> None:
        clean = tuple((i, float(c)) for i, c in terms if c != 0.0)
        self.constraints.append(Constraint(name, family, clean, sense, float(rhs)))

    def variable_index(self, name: str) -> int:
        return self._index[name]

    def has_variable(self, name: str) -> bool:
        return name in self._index

    def objective_value(self, values) -> float:
        """Dot product with a value vector (by variable index)."""
        return float(sum(v.objective * values[i] for i, v in enumerate(self.variables) if v.objective))

    def to_diagnostic_text(self) -> str:
        """One line per variable and constraint, with provenance tags."""
        out = [f"MAXIMIZE over {len(self.variables)} variables, {len(self.constraints)} constraints"]
        for v in self.variables:
            out.append(f"var {v.name} {v.kind} [0,{v.upper:g}] obj={v.objective:g}")
        for c in self.constraints:
            lhs = " + ".join(
                f"{coef:g}*{self.variables[i].name}" for i, coef in c.terms
            )
            out.append(f"[{c.family}] {c.name}: {lhs or '0'} {c.sense} {c.rhs:g}")
        return "\n".join(out) + "\n"


def model_statistics(model: CanonicalModel) -> dict:
    """Variable counts per kind and constraint counts per family tag."""
    kinds: dict[str, int] = {}
    for v in model.variables:
        kinds[v.kind] = kinds.get(v.kind, 0) + 1
    families: dict[str, int] = {}
    for c in model.constraints:
        families[c.family] = families.get(c.family, 0) + 1
    return {
        "variables": len(model.variables),
        "variables_by_kind": dict(sorted(kinds.items())),
        "constraints": len(model.constraints),
        "constraints_by_family": dict(sorted(families.items())),
    }


# ---------------------------------------------------------------------------


def _check_preassignments(inst: m.RosterInstance, der: DerivedSets) -> None:
    """Reject pre-assignments that contradict hard constraints outright."""
    for d in inst.duty_instances:
        pid = d.pre_assigned
        if pid is None:
            continue
        phys = inst.physician(pid)
        if not der.duty_hard_ok(pid, d.template_id):
            raise BuildInfeasibleError(
                f"manual duty {d.id!r} assigned to {pid!r} who lacks a required qualification",
                (d.id, pid),
            )
        if d.date in phys.absences:
            raise BuildInfeasibleError(
                f"manual duty {d.id!r} assigned to {pid!r} who is absent on {d.date}",
                (d.id, pid),
            )
        if d.id in der.impossible_duties.get(pid, frozenset()):
            raise BuildInfeasibleError(
                f"manual duty {d.id!r} assigned to {pid!r} who marked it impossible",
                (d.id, pid),
            )
        if d.id in der.carry.r_duty.get(pid, frozenset()):
            raise BuildInfeasibleError(
                f"manual duty {d.id!r} assigned to {pid!r} conflicts with the previous period",
                (d.id, pid),
            )
    for s in inst.shift_instances:
        for pid in s.pre_assigned:
            phys = inst.physician(pid)
            if not der.shift_hard_ok(pid, s.template_id):
                raise BuildInfeasibleError(
                    f"manual shift {s.id!r} assigned to {pid!r} who lacks a required qualification",
                    (s.id, pid),
                )
            if s.date in phys.absences:
                raise BuildInfeasibleError(
                    f"manual shift {s.id!r} assigned to {pid!r} who is absent on {s.date}",
                    (s.id, pid),
                )
            if s.id in der.carry.r_shift.get(pid, frozenset()):
                raise BuildInfeasibleError(
                    f"manual shift {s.id!r} assigned to {pid!r} conflicts with the previous period",
                    (s.id, pid),
                )

    manual_duty: dict[tuple[str, str], bool] = {
        (d.pre_assigned, d.id): True for d in inst.duty_instances if d.pre_assigned
    }
    manual_shift: dict[tuple[str, str], bool] = {
        (pid, s.id): True for s in inst.shift_instances for pid in s.pre_assigned
    }
    for pair in der.hard_conflicts:
        for p in inst.physicians:
            first_manual = (p.id, pair.first_id) in (manual_duty if pair.first_is_duty else manual_shift)
            second_manual = (p.id, pair.second_id) in (manual_duty if pair.second_is_duty else manual_shift)
            if first_manual and second_manual:
                raise BuildInfeasibleError(
                    f"manual assignments {pair.first_id!r} and {pair.second_id!r} for {p.id!r} "
                    "violate a mandatory rest time",
                    (pair.first_id, pair.second_id, p.id),
                )


def build_model(
    inst: m.RosterInstance,
    der: DerivedSets,
    weights: m.WeightConfig | None = None,
) -> CanonicalModel:
    """Compile (instance, derived sets, weights) into a canonical MIP."""
    w = weights or inst.weights
    period = inst.period
    T = period.num_days
    for occ in list(inst.duty_instances) + list(inst.shift_instances):
        if not period.contains(occ.date):
            raise ConfigurationError(
                f"instance {occ.id!r} dated {occ.date} lies outside the planning period"
            )

    _check_preassignments(inst, der)
    pref_duty, pref_shift = preference_deltas(inst, w)

    model = CanonicalModel()
    P = inst.physicians
    duties = inst.duty_instances
    shifts = inst.shift_instances
    duty_tpl = {t.id: t for t in inst.duty_templates}
    shift_tpl = {t.id: t for t in inst.shift_templates}
    duty_by_id = {d.id: d for d in duties}
    shift_by_id = {s.id: s for s in shifts}

    # ---- variables ---------------------------------------------------

    x: dict[tuple[str, str], int] = {}
    for p in P:
        soft_ok = der.duty_quali_soft[p.id]
        carry_soft = der.carry.r_duty_soft.get(p.id, {})
        for d in duties:
            tpl = duty_tpl[d.template_id]
            coef = 0.0
            if not tpl.mandatory:
                coef += w.duty_coverage
            if d.template_id not in soft_ok:
                coef -= w.soft_quali_duty
            soft_prev = carry_soft.get(d.id)
            if soft_prev:
                coef -= w.prev_rest_scale * soft_prev
            coef += pref_duty.get((p.id, d.id), 0.0)
            x[p.id, d.id] = model.add_variable(f"x[{p.id},{d.id}]", BINARY, 1, coef)

    y: dict[tuple[str, str], int] = {}
    for p in P:
        soft_ok = der.shift_quali_soft[p.id]
        carry_soft = der.carry.r_shift_soft.get(p.id, {})
        for s in shifts:
            coef = 0.0
            if s.template_id not in soft_ok:
                coef -= w.soft_quali_shift
            soft_prev = carry_soft.get(s.id)
            if soft_prev:
                coef -= w.prev_rest_scale * soft_prev
            coef += pref_shift.get((p.id, s.id), 0.0)
            y[p.id, s.id] = model.add_variable(f"y[{p.id},{s.id}]", BINARY, 1, coef)

    y_des: dict[str, int] = {}
    y_max: dict[str, int] = {}
    y_aux: dict[str, int] = {}
    for s in shifts:
        tpl = shift_tpl[s.template_id]
        if tpl.desired_min_staff > tpl.min_staff:
            des_weight = tpl.desired_penalty_weight if tpl.desired_penalty_weight is not None else w.shift_desired
            y_des[s.id] = model.add_variable(f"yDes[{s.id}]", INTEGER, tpl.desired_min_staff - tpl.min_staff, des_weight)
            y_max[s.id] = model.add_variable(f"yMax[{s.id}]", INTEGER, tpl.max_staff - tpl.desired_min_staff, w.shift_above_desired)
            y_aux[s.id] = model.add_variable(f"yAux[{s.id}]", BINARY, 1, 0.0)

    duty_blocks = [b for b in inst.blocks if b.kind is m.BlockKind.DUTY]
    shift_blocks = [b for b in inst.blocks if b.kind is m.BlockKind.SHIFT]
    shift_block_ids = {b.id for b in shift_blocks}

    x_blk: dict[tuple[str, str], int] = {}
    for b in duty_blocks:
        for p in P:
            x_blk[p.id, b.id] = model.add_variable(f"xBlk[{p.id},{b.id}]", BINARY, 1, 0.0)
    y_blk: dict[tuple[str, str], int] = {}
    for b in shift_blocks:
        for p in P:
            y_blk[p.id, b.id] = model.add_variable(f"yBlk[{p.id},{b.id}]", BINARY, 1, 0.0)

    # Continuity of chained shift blocks; at the period boundary only the
    # physicians who worked the predecessor can continue the chain.
    y_blk_cons: dict[tuple[str, str], int] = {}
    blk_cons_mode: dict[str, str] = {}
    for b in shift_blocks:
        pred = b.consecutive_predecessor
        if pred is None:
            continue
        reward = b.desired_consecutive_weight if b.desired_consecutive_weight is not None else w.block_consecutive
        if pred in shift_block_ids:
            blk_cons_mode[b.id] = "period"
            for p in P:
                y_blk_cons[p.id, b.id] = model.add_variable(f"yBlkCons[{p.id},{b.id}]", BINARY, 1, reward)
        elif b.id in der.carry.prev_block_physicians:
            blk_cons_mode[b.id] = "boundary"
            for pid in der.carry.prev_block_physicians[b.id]:
                y_blk_cons[pid, b.id] = model.add_variable(f"yBlkCons[{pid},{b.id}]", BINARY, 1, reward)

    x_cons: dict[tuple[str, str], int] = {}
    for d in duties:
        if d.id in der.duty_prev:
            for p in P:
                x_cons[p.id, d.id] = model.add_variable(f"xCons[{p.id},{d.id}]", BINARY, 1, w.duty_consecutive)
        elif d.id in der.carry.duty_prev_physician:
            pid = der.carry.duty_prev_physician[d.id]
            x_cons[pid, d.id] = model.add_variable(f"xCons[{pid},{d.id}]", BINARY, 1, w.duty_consecutive)

    vio_rest: dict[tuple[str, int], int] = {}
    for ci, conflict in enumerate(der.soft_conflicts):
        for p in P:
            vio_rest[p.id, ci] = model.add_variable(
                f"vioRest[{p.id},{conflict.first_id},{conflict.second_id}]", BINARY, 1, -conflict.weight
            )

    wp = inst.weekend_policy
    weekends = der.calendar.weekends
    pref_one = [p for p in P if p.weekend_preference is m.WeekendPreferenceKind.ONE_DUTY]
    pref_mult = [p for p in P if p.weekend_preference is m.WeekendPreferenceKind.MULTIPLE_DUTIES]
    weekend_active = bool(weekends) and (
        wp.cons_we is not None
        or wp.max_we is not None
        or wp.des_max_we is not None
        or wp.min_free_we is not None
        or wp.des_min_free_we is not None
        or bool(pref_one)
        or bool(pref_mult)
    )

    we_att: dict[tuple[str, int], int] = {}
    vio_we_pref: dict[tuple[str, int], int] = {}
    vio_max_we: dict[tuple[str, tuple[int, int]], int] = {}
    vio_free_we: dict[tuple[str, tuple[int, int]], int] = {}
    months_with_we = [info for info in der.calendar.months if info.weekend_indices]
    if weekend_active:
        for p in P:
            for we in weekends:
                we_att[p.id, we.index] = model.add_variable(f"weAtt[{p.id},w{we.index}]", BINARY, 1, 0.0)
        we_pref_weight = (
            wp.preference_violation_weight if wp.preference_violation_weight is not None else w.we_pref_violation
        )
        for p in pref_one:
            for we in weekends:
                cap = max(0, len(der.duties_by_weekend.get(we.index, ())) - 1)
                vio_we_pref[p.id, we.index] = model.add_variable(
                    f"vioWePref[{p.id},w{we.index}]", INTEGER, cap, -we_pref_weight
                )
        for p in pref_mult:
            for we in weekends:
                vio_we_pref[p.id, we.index] = model.add_variable(
                    f"vioWePref[{p.id},w{we.index}]", BINARY, 1, -we_pref_weight
                )
        if wp.des_max_we is not None:
            weight = wp.des_max_we_weight if wp.des_max_we_weight is not None else w.max_we_violation
            for p in P:
                for info in months_with_we:
                    vio_max_we[p.id, info.key] = model.add_variable(
                        f"vioMaxWe[{p.id},{info.key[0]:04d}-{info.key[1]:02d}]",
                        INTEGER,
                        len(info.weekend_indices),
                        -weight,
                    )
        if wp.des_min_free_we is not None:
            weight = wp.des_min_free_we_weight if wp.des_min_free_we_weight is not None else w.free_we_violation
            for p in P:
                for info in months_with_we:
                    vio_free_we[p.id, info.key] = model.add_variable(
                        f"vioFreeWe[{p.id},{info.key[0]:04d}-{info.key[1]:02d}]",
                        INTEGER,
                        len(info.weekend_indices),
                        -weight,
                    )

    vio_max_d: dict[tuple[str, str], int] = {}
    vio_min_d: dict[tuple[str, str], int] = {}
    vio_max_phy: dict[tuple[str, int], int] = {}
    vio_down: dict[tuple[str, str], int] = {}
    vio_up: dict[tuple[str, str], int] = {}
    pool_days: dict[str, list[int]] = {}
    for pool in inst.pools:
        members = [p for p in P if p.id in pool.physicians]
        pool_duty_ids = sorted(pool.duty_instances)
        days = sorted({period.day_index(duty_by_id[d].date) for d in pool_duty_ids})
        pool_days[pool.id] = days
        if pool.des_max_duties is not None:
            weight = pool.des_max_duties_weight if pool.des_max_duties_weight is not None else w.pool_des_max
            cap = max(0, len(pool_duty_ids) - pool.des_max_duties)
            for p in members:
                vio_max_d[p.id, pool.id] = model.add_variable(f"vioMaxD[{p.id},{pool.id}]", INTEGER, cap, -weight)
        if pool.des_min_duties is not None:
            weight = pool.des_min_duties_weight if pool.des_min_duties_weight is not None else w.pool_des_min
            for p in members:
                vio_min_d[p.id, pool.id] = model.add_variable(
                    f"vioMinD[{p.id},{pool.id}]", INTEGER, pool.des_min_duties, -weight
                )
        if pool.des_max_phy_per_day is not None:
            weight = pool.des_max_phy_weight if pool.des_max_phy_weight is not None else w.pool_des_max_phy
            day_counts = {}
            for d in pool_duty_ids:
                day = period.day_index(duty_by_id[d].date)
                day_counts[day] = day_counts.get(day, 0) + 1
            for day in days:
                cap = max(0, day_counts[day] - pool.des_max_phy_per_day)
                vio_max_phy[pool.id, day] = model.add_variable(f"vioMaxPhy[{pool.id},t{day}]", INTEGER, cap, -weight)
        if pool.fair_distribution:
            down_weight = pool.fairness_down_weight if pool.fairness_down_weight is not None else w.fairness_down
            up_weight = pool.fairness_up_weight if pool.fairness_up_weight is not None else w.fairness_up
            targets = der.target_num[pool.id]
            for p in members:
                target = targets[p.id]
                vio_down[p.id, pool.id] = model.add_variable(
                    f"vioDown[{p.id},{pool.id}]", INTEGER, math.floor(target), -down_weight
                )
                vio_up[p.id, pool.id] = model.add_variable(
                    f"vioUp[{p.id},{pool.id}]",
                    INTEGER,
                    max(0, len(pool_duty_ids) - math.ceil(target)),
                    -up_weight,
                )

    vio_max_cons_b: dict[int, int] = {}
    for window in der.consec_windows:
        vio_max_cons_b[window.index] = model.add_variable(
            f"vioMaxConsB[{window.index}]", BINARY, 1, -w.max_consec_block
        )

    # ---- constraints --------------------------------------------------

    con = model.add_constraint

    for d in duties:
        terms = [(x[p.id, d.id], 1.0) for p in P]
        if duty_tpl[d.template_id].mandatory:
            con(f"01|{d.id}", "01-duty-mandatory", terms, SENSE_EQ, 1)
        else:
            con(f"02|{d.id}", "02-duty-at-most-one", terms, SENSE_LE, 1)

    for d in duties:
        if d.pre_assigned is not None:
            con(f"03|{d.id}", "03-duty-manual-fixed", [(x[d.pre_assigned, d.id], 1.0)], SENSE_EQ, 1)
    for p in P:
        if not p.planned_manually:
            continue
        for d in duties:
            if d.pre_assigned != p.id:
                con(f"04|{p.id}|{d.id}", "04-duty-manual-exclusive", [(x[p.id, d.id], 1.0)], SENSE_EQ, 0)

    for p in P:
        allowed = der.duty_quali[p.id]
        for d in duties:
            if d.template_id not in allowed:
                con(f"05.1|{p.id}|{d.id}", "05.1-duty-qualification", [(x[p.id, d.id], 1.0)], SENSE_EQ, 0)
    for p in P:
        allowed = der.shift_quali[p.id]
        for s in shifts:
            if s.template_id not in allowed:
                con(f"05.2|{p.id}|{s.id}", "05.2-shift-qualification", [(y[p.id, s.id], 1.0)], SENSE_EQ, 0)

    for s in shifts:
        tpl = shift_tpl[s.template_id]
        eligible = [p for p in P if not tpl.ward_members or p.id in tpl.ward_members]
        staff_terms = [(y[p.id, s.id], 1.0) for p in eligible]
        if tpl.min_staff > 0:
            con(f"06|{s.id}", "06-shift-min-staff", staff_terms, SENSE_GE, tpl.min_staff)
        con(f"07|{s.id}", "07-shift-max-staff", staff_terms, SENSE_LE, tpl.max_staff)
        if s.id in y_des:
            split = [(y_des[s.id], 1.0), (y_max[s.id], 1.0)] + [(i, -1.0) for i, _ in staff_terms]
            con(f"08|{s.id}", "08-shift-surplus-split", split, SENSE_EQ, -tpl.min_staff)
            des_gap = tpl.desired_min_staff - tpl.min_staff
            con(f"09|{s.id}", "09-shift-desired-cap", [(y_des[s.id], 1.0)], SENSE_LE, des_gap)
            con(
                f"10|{s.id}",
                "10-shift-above-desired-cap",
                [(y_max[s.id], 1.0)],
                SENSE_LE,
                tpl.max_staff - tpl.desired_min_staff,
            )
            con(
                f"11.1|{s.id}",
                "11.1-shift-gate-lower",
                [(y_aux[s.id], des_gap), (y_des[s.id], 1.0)],
                SENSE_GE,
                des_gap,
            )
            con(
                f"11.2|{s.id}",
                "11.2-shift-gate-upper",
                [(y_max[s.id], 1.0), (y_aux[s.id], tpl.max_staff)],
                SENSE_LE,
                tpl.max_staff,
            )

    for s in shifts:
        tpl = shift_tpl[s.template_id]
        if not tpl.ward_members:
            continue
        for p in P:
            if p.id not in tpl.ward_members:
                con(f"12|{p.id}|{s.id}", "12-shift-ward-only", [(y[p.id, s.id], 1.0)], SENSE_EQ, 0)

    for s in shifts:
        for pid in s.pre_assigned:
            con(f"13.1|{pid}|{s.id}", "13.1-shift-manual-fixed", [(y[pid, s.id], 1.0)], SENSE_EQ, 1)
    for p in P:
        if not p.planned_manually:
            continue
        for s in shifts:
            if p.id not in s.pre_assigned:
                con(f"13.2|{p.id}|{s.id}", "13.2-shift-manual-exclusive", [(y[p.id, s.id], 1.0)], SENSE_EQ, 0)

    def _assign_var(pid: str, iid: str, is_duty: bool) -> int:
        return x[pid, iid] if is_duty else y[pid, iid]

    _REST_SUB = {(True, True): "1", (True, False): "2", (False, True): "3", (False, False): "4"}
    for pair in der.hard_conflicts:
        sub = _REST_SUB[pair.first_is_duty, pair.second_is_duty]
        family = f"14.{sub}-rest-hard"
        for p in P:
            con(
                f"14.{sub}|{p.id}|{pair.first_id}|{pair.second_id}",
                family,
                [
                    (_assign_var(p.id, pair.first_id, pair.first_is_duty), 1.0),
                    (_assign_var(p.id, pair.second_id, pair.second_is_duty), 1.0),
                ],
                SENSE_LE,
                1,
            )
    for ci, conflict in enumerate(der.soft_conflicts):
        sub = _REST_SUB[conflict.first_is_duty, conflict.second_is_duty]
        family = f"15.{sub}-rest-soft"
        for p in P:
            con(
                f"15.{sub}|{p.id}|{conflict.first_id}|{conflict.second_id}",
                family,
                [
                    (_assign_var(p.id, conflict.first_id, conflict.first_is_duty), 1.0),
                    (_assign_var(p.id, conflict.second_id, conflict.second_is_duty), 1.0),
                    (vio_rest[p.id, ci], -1.0),
                ],
                SENSE_LE,
                1,
            )

    for p in P:
        for date in sorted(p.absences):
            day = period.day_index(date)
            if 1 <= day <= T:
                duty_terms = [(x[p.id, d], 1.0) for d in der.duties_by_day.get(day, ())]
                if duty_terms:
                    con(f"16.1|{p.id}|t{day}", "16.1-absence-duty", duty_terms, SENSE_EQ, 0)
                shift_terms = [(y[p.id, s], 1.0) for s in der.shifts_by_day.get(day, ())]
                if shift_terms:
                    con(f"16.2|{p.id}|t{day}", "16.2-absence-shift", shift_terms, SENSE_EQ, 0)

    for p in P:
        for iid in sorted(der.impossible_duties.get(p.id, frozenset())):
            con(f"17.1|{p.id}|{iid}", "17.1-impossible-duty", [(x[p.id, iid], 1.0)], SENSE_EQ, 0)

    for p in P:
        for date in sorted(p.absences):
            before = period.day_index(date) - 1
            if 1 <= before <= T:
                terms = [
                    (x[p.id, d], 1.0)
                    for d in der.duties_by_day.get(before, ())
                    if duty_tpl[duty_by_id[d].template_id].forbidden_before_absence
                ]
                if terms:
                    con(f"18|{p.id}|t{before}", "18-before-absence", terms, SENSE_EQ, 0)
            after = period.day_index(date) + 1
            if 1 <= after <= T:
                terms = [
                    (x[p.id, d], 1.0)
                    for d in der.duties_by_day.get(after, ())
                    if duty_tpl[duty_by_id[d].template_id].forbidden_after_absence
                ]
                if terms:
                    con(f"19|{p.id}|t{after}", "19-after-absence", terms, SENSE_EQ, 0)

    for b in duty_blocks:
        for p in P:
            for iid in b.members:
                con(
                    f"20|{p.id}|{b.id}|{iid}",
                    "20-duty-block-link",
                    [(x[p.id, iid], 1.0), (x_blk[p.id, b.id], -1.0)],
                    SENSE_EQ,
                    0,
                )
    for b in shift_blocks:
        for p in P:
            for iid in b.members:
                con(
                    f"21|{p.id}|{b.id}|{iid}",
                    "21-shift-block-link",
                    [(y[p.id, iid], 1.0), (y_blk[p.id, b.id], -1.0)],
                    SENSE_EQ,
                    0,
                )

    def _block_days(b: m.BlockDefinition) -> tuple[int, int]:
        members = [duty_by_id[i] if b.kind is m.BlockKind.DUTY else shift_by_id[i] for i in b.members]
        days = [period.day_index(occ.date) for occ in members]
        return min(days), max(days)

    for b in duty_blocks + shift_blocks:
        if b.free_days_after <= 0:
            continue
        blk_var = x_blk if b.kind is m.BlockKind.DUTY else y_blk
        subs = ("1", "2") if b.kind is m.BlockKind.DUTY else ("3", "4")
        _, end_day = _block_days(b)
        for delta in range(1, b.free_days_after + 1):
            day = end_day + delta
            if day > T:
                break  # the remaining free days are owed in the next period
            for p in P:
                for iid in der.duties_by_day.get(day, ()):
                    con(
                        f"22.{subs[0]}|{p.id}|{b.id}|{iid}",
                        f"22.{subs[0]}-block-free-days",
                        [(x[p.id, iid], 1.0), (blk_var[p.id, b.id], 1.0)],
                        SENSE_LE,
                        1,
                    )
                for iid in der.shifts_by_day.get(day, ()):
                    con(
                        f"22.{subs[1]}|{p.id}|{b.id}|{iid}",
                        f"22.{subs[1]}-block-free-days",
                        [(y[p.id, iid], 1.0), (blk_var[p.id, b.id], 1.0)],
                        SENSE_LE,
                        1,
                    )

    for b in duty_blocks + shift_blocks:
        if b.allow_extra_duties_inside and b.allow_extra_shifts_inside:
            continue
        blk_var = x_blk if b.kind is m.BlockKind.DUTY else y_blk
        member_set = set(b.members)
        subs = ("1", "2") if b.kind is m.BlockKind.DUTY else ("3", "4")
        start_day, end_day = _block_days(b)
        for day in range(max(start_day, 1), min(end_day, T) + 1):
            for p in P:
                if not b.allow_extra_duties_inside:
                    for iid in der.duties_by_day.get(day, ()):
                        if iid in member_set:
                            continue
                        con(
                            f"23.{subs[0]}|{p.id}|{b.id}|{iid}",
                            f"23.{subs[0]}-block-no-extra",
                            [(x[p.id, iid], 1.0), (blk_var[p.id, b.id], 1.0)],
                            SENSE_LE,
                            1,
                        )
                if not b.allow_extra_shifts_inside:
                    for iid in der.shifts_by_day.get(day, ()):
                        if iid in member_set:
                            continue
                        con(
                            f"23.{subs[1]}|{p.id}|{b.id}|{iid}",
                            f"23.{subs[1]}-block-no-extra",
                            [(y[p.id, iid], 1.0), (blk_var[p.id, b.id], 1.0)],
                            SENSE_LE,
                            1,
                        )

    for b in shift_blocks:
        mode = blk_cons_mode.get(b.id)
        if mode is None:
            continue
        if mode == "period":
            for p in P:
                con(
                    f"24.1|{p.id}|{b.id}",
                    "24.1-block-consec-own",
                    [(y_blk_cons[p.id, b.id], 1.0), (y_blk[p.id, b.id], -1.0)],
                    SENSE_LE,
                    0,
                )
                con(
                    f"24.2|{p.id}|{b.id}",
                    "24.2-block-consec-prev",
                    [(y_blk_cons[p.id, b.id], 1.0), (y_blk[p.id, b.consecutive_predecessor], -1.0)],
                    SENSE_LE,
                    0,
                )
        else:
            for pid in der.carry.prev_block_physicians[b.id]:
                con(
                    f"24.3|{pid}|{b.id}",
                    "24.3-block-consec-boundary",
                    [(y_blk_cons[pid, b.id], 1.0), (y_blk[pid, b.id], -1.0)],
                    SENSE_LE,
                    0,
                )

    for d in duties:
        if d.id in der.duty_prev:
            prev_id = der.duty_prev[d.id]
            for p in P:
                con(
                    f"25.1|{p.id}|{d.id}",
                    "25.1-duty-consec-own",
                    [(x_cons[p.id, d.id], 1.0), (x[p.id, d.id], -1.0)],
                    SENSE_LE,
                    0,
                )
                con(
                    f"25.2|{p.id}|{d.id}",
                    "25.2-duty-consec-prev",
                    [(x_cons[p.id, d.id], 1.0), (x[p.id, prev_id], -1.0)],
                    SENSE_LE,
                    0,
                )
        elif d.id in der.carry.duty_prev_physician:
            pid = der.carry.duty_prev_physician[d.id]
            con(
                f"25.1|{pid}|{d.id}",
                "25.1-duty-consec-own",
                [(x_cons[pid, d.id], 1.0), (x[pid, d.id], -1.0)],
                SENSE_LE,
                0,
            )

    for window in der.consec_windows:
        restrict = window.restrict_to
        targets = [p.id for p in P if restrict is None or p.id in restrict]
        for pid in targets:
            terms = [(y_blk[pid, bid], 1.0) for bid in window.block_ids]
            terms.append((vio_max_cons_b[window.index], -1.0))
            con(
                f"26|{pid}|j{window.index}",
                "26-max-consec-blocks",
                terms,
                SENSE_LE,
                len(window.block_ids) - 1,
            )

    for pool in inst.pools:
        members = [p for p in P if p.id in pool.physicians]
        pool_duty_ids = sorted(pool.duty_instances)
        if pool.exact_count is not None:
            for p in members:
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                con(f"27|{p.id}|{pool.id}", "27-pool-exact", terms, SENSE_EQ, pool.exact_count)
        if pool.max_duties is not None:
            for p in members:
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                con(f"28|{p.id}|{pool.id}", "28-pool-max", terms, SENSE_LE, pool.max_duties)
        if pool.des_max_duties is not None:
            for p in members:
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                terms.append((vio_max_d[p.id, pool.id], -1.0))
                con(f"29|{p.id}|{pool.id}", "29-pool-des-max", terms, SENSE_LE, pool.des_max_duties)
        if pool.min_duties is not None:
            for p in members:
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                con(f"30|{p.id}|{pool.id}", "30-pool-min", terms, SENSE_GE, pool.min_duties)
        if pool.des_min_duties is not None:
            for p in members:
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                terms.append((vio_min_d[p.id, pool.id], 1.0))
                con(f"31|{p.id}|{pool.id}", "31-pool-des-min", terms, SENSE_GE, pool.des_min_duties)
        by_day: dict[int, list[str]] = {}
        for d in pool_duty_ids:
            by_day.setdefault(period.day_index(duty_by_id[d].date), []).append(d)
        if pool.max_phy_per_day is not None:
            for day in pool_days[pool.id]:
                terms = [(x[p.id, d], 1.0) for p in members for d in by_day[day]]
                con(f"32|{pool.id}|t{day}", "32-pool-max-phy", terms, SENSE_LE, pool.max_phy_per_day)
        if pool.des_max_phy_per_day is not None:
            for day in pool_days[pool.id]:
                terms = [(x[p.id, d], 1.0) for p in members for d in by_day[day]]
                terms.append((vio_max_phy[pool.id, day], -1.0))
                con(f"33|{pool.id}|t{day}", "33-pool-des-max-phy", terms, SENSE_LE, pool.des_max_phy_per_day)
        if pool.fair_distribution:
            targets = der.target_num[pool.id]
            for p in members:
                target = targets[p.id]
                terms = [(x[p.id, d], 1.0) for d in pool_duty_ids]
                con(
                    f"34|{p.id}|{pool.id}",
                    "34-pool-fair-floor",
                    terms + [(vio_down[p.id, pool.id], 1.0)],
                    SENSE_GE,
                    math.floor(target),
                )
                con(
                    f"35|{p.id}|{pool.id}",
                    "35-pool-fair-ceil",
                    terms + [(vio_up[p.id, pool.id], -1.0)],
                    SENSE_LE,
                    math.ceil(target),
                )

    if weekend_active:
        for p in P:
            for we in weekends:
                members = der.duties_by_weekend.get(we.index, ())
                att = we_att[p.id, we.index]
                for iid in members:
                    con(
                        f"36.1|{p.id}|w{we.index}|{iid}",
                        "36.1-weekend-attend-lb",
                        [(att, 1.0), (x[p.id, iid], -1.0)],
                        SENSE_GE,
                        0,
                    )
                terms = [(att, 1.0)] + [(x[p.id, iid], -1.0) for iid in members]
                con(f"36.2|{p.id}|w{we.index}", "36.2-weekend-attend-ub", terms, SENSE_LE, 0)

        if wp.cons_we is not None:
            W = len(weekends)
            for p in P:
                for start in range(1, W - wp.cons_we + 1):
                    terms = [(we_att[p.id, wi], 1.0) for wi in range(start, start + wp.cons_we + 1)]
                    con(
                        f"37.1|{p.id}|w{start}",
                        "37.1-consec-weekends",
                        terms,
                        SENSE_LE,
                        wp.cons_we,
                    )
            for p in P:
                past = der.carry.past_we.get(p.id, 0)
                if past <= 0:
                    continue
                budget = max(0, wp.cons_we - past)
                window = range(1, min(budget + 1, W) + 1)
                terms = [(we_att[p.id, wi], 1.0) for wi in window]
                if len(terms) > budget:
                    con(f"37.2|{p.id}", "37.2-consec-weekends-boundary", terms, SENSE_LE, budget)

        for p in pref_one:
            for we in weekends:
                members = der.duties_by_weekend.get(we.index, ())
                terms = [(we_att[p.id, we.index], 1.0), (vio_we_pref[p.id, we.index], 1.0)]
                terms += [(x[p.id, iid], -1.0) for iid in members]
                con(f"38|{p.id}|w{we.index}", "38-weekend-pref-one", terms, SENSE_GE, 0)
        for p in pref_mult:
            for we in weekends:
                members = der.duties_by_weekend.get(we.index, ())
                terms = [(we_att[p.id, we.index], 2.0), (vio_we_pref[p.id, we.index], -1.0)]
                terms += [(x[p.id, iid], -1.0) for iid in members]
                con(f"39|{p.id}|w{we.index}", "39-weekend-pref-mult", terms, SENSE_LE, 0)

        for info in months_with_we:
            mk = f"{info.key[0]:04d}-{info.key[1]:02d}"
            we_terms = lambda pid: [(we_att[pid, wi], 1.0) for wi in info.weekend_indices]  # noqa: E731
            if wp.max_we is not None:
                rhs = info.scale_round(wp.max_we)
                for p in P:
                    con(f"40|{p.id}|{mk}", "40-max-we-month", we_terms(p.id), SENSE_LE, rhs)
            if wp.des_max_we is not None:
                rhs = info.scale_round(wp.des_max_we)
                for p in P:
                    terms = we_terms(p.id) + [(vio_max_we[p.id, info.key], -1.0)]
                    con(f"41|{p.id}|{mk}", "41-des-max-we-month", terms, SENSE_LE, rhs)
            if wp.min_free_we is not None:
                rhs = _free_weekend_cap(len(info.weekend_indices), wp.min_free_we, info)
                for p in P:
                    con(f"42|{p.id}|{mk}", "42-min-free-we-month", we_terms(p.id), SENSE_LE, rhs)
            if wp.des_min_free_we is not None:
                rhs = _free_weekend_cap(len(info.weekend_indices), wp.des_min_free_we, info)
                for p in P:
                    terms = we_terms(p.id) + [(vio_free_we[p.id, info.key], -1.0)]
                    con(f"43|{p.id}|{mk}", "43-des-min-free-we-month", terms, SENSE_LE, rhs)

    for p in P:
        for iid in sorted(der.carry.r_duty.get(p.id, frozenset())):
            con(f"44.1|{p.id}|{iid}", "44.1-prev-period-duty", [(x[p.id, iid], 1.0)], SENSE_EQ, 0)
        for iid in sorted(der.carry.r_shift.get(p.id, frozenset())):
            con(f"44.2|{p.id}|{iid}", "44.2-prev-period-shift", [(y[p.id, iid], 1.0)], SENSE_EQ, 0)

    return model


def _free_weekend_cap(weekends_in_month: int, min_free: int, info) -> int:
    """Worked-weekend cap implied by a free-weekend floor, scaled and rounded."""
    num = weekends_in_month * info.saturdays_total - min_free * info.saturdays_inside
    return m.round_half_up_ratio(num, 1, info.saturdays_total)
