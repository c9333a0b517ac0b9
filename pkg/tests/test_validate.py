import dataclasses

import pytest

from conftest import make_instance, make_period, night_template
from rosterer import model as m
from rosterer.derivation import derive
from rosterer.mip import build_model
from rosterer.solve import RosterSolution, exhaustive_oracle, extract_roster
from rosterer.validate import compare_rosters, quality_report, recount_soft, validate_hard


def solve_tiny(inst):
    der = derive(inst)
    raw = exhaustive_oracle(build_model(inst, der))
    return extract_roster(raw, inst), der, raw


def reassign(roster, **duties):
    updated = dict(roster.duty_assignments)
    for duty, pid in duties.items():
        if pid is None:
            updated.pop(duty, None)
        else:
            updated[duty] = pid
    return dataclasses.replace(roster, duty_assignments=updated)


@pytest.fixture
def conflict_instance():
    inst = make_instance(
        period=make_period(days=2),
        duty_templates=[night_template()],
        rest_rules=(m.RestRule("N", "N", 24.0),),
    )
    return inst


def test_solver_roster_passes_hard_validation(conflict_instance):
    roster, der, _ = solve_tiny(conflict_instance)
    assert validate_hard(roster, conflict_instance, der) == []


def test_tampered_roster_raises_rest_finding(conflict_instance):
    roster, der, _ = solve_tiny(conflict_instance)
    # Give both nights to whoever holds day one: 12h gap < 24h rest.
    holder = roster.duty_assignments["N@2026-03-02"]
    broken = reassign(roster, **{"N@2026-03-03": holder})
    findings = validate_hard(broken, conflict_instance, der)
    assert any(f.family == "14-rest-hard" for f in findings)


def test_unassigned_mandatory_duty_is_reported(conflict_instance):
    roster, der, _ = solve_tiny(conflict_instance)
    broken = reassign(roster, **{"N@2026-03-03": None})
    broken = dataclasses.replace(broken, unassigned_duties=("N@2026-03-03",))
    findings = validate_hard(broken, conflict_instance, der)
    assert any(f.family == "01-duty-mandatory" and "N@2026-03-03" in f.subjects for f in findings)


def test_dangling_ids_raise_structural_error(conflict_instance):
    roster, der, _ = solve_tiny(conflict_instance)
    broken = reassign(roster, **{"ghost": "p0"})
    with pytest.raises(ValueError, match="unknown duty instance"):
        validate_hard(broken, conflict_instance, der)


def test_desired_rest_tally_counts_the_tight_level():
    inst = make_instance(
        period=make_period(days=3),
        duty_templates=[night_template(mandatory=False)],
        rest_rules=(m.RestRule("N", "N", 24.0, (m.RestLevel(48.0, 4.0), m.RestLevel(72.0, 2.0))),),
    )
    der = derive(inst)
    # Day 1 and day 3 nights for the same physician: a 36h gap, 48h level.
    roster = RosterSolution(
        instance_id=inst.id,
        duty_assignments={"N@2026-03-02": "p0", "N@2026-03-04": "p0"},
        shift_assignments={},
        unassigned_duties=("N@2026-03-03",),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    assert validate_hard(roster, inst, der) == []
    tally = recount_soft(roster, inst, der)
    assert tally.desired_rest_by_level == {48.0: 1}
    # Coverage rewards twice, one desired-rest penalty at weight 4.
    assert tally.objective == pytest.approx(2 * inst.weights.duty_coverage - 4.0)


def test_soft_violation_strictly_decreases_objective():
    inst = make_instance(
        period=make_period(days=4),
        duty_templates=[night_template(mandatory=False)],
        rest_rules=(m.RestRule("N", "N", 24.0, (m.RestLevel(48.0, 4.0),)),),
    )
    der = derive(inst)
    base = RosterSolution(
        instance_id=inst.id,
        duty_assignments={"N@2026-03-02": "p0", "N@2026-03-04": "p1"},
        shift_assignments={}, unassigned_duties=(),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    with_violation = reassign(base, **{"N@2026-03-04": "p0"})
    clean = recount_soft(base, inst, der).objective
    dirty = recount_soft(with_violation, inst, der).objective
    assert dirty < clean


def test_fairness_band_recount_by_hand():
    # Ten duties, three physicians; make p0's availability dominate so the
    # targets land strictly fractional, then underfill p0.
    inst = make_instance(period=make_period(days=5), physicians=0,
                         duty_templates=[night_template(mandatory=False), night_template(tid="M", mandatory=False)])
    phys = (
        m.Physician(id="p0", employment_rate=1.0),
        m.Physician(id="p1", employment_rate=1.0),
        m.Physician(id="p2", employment_rate=0.94),
    )
    duty_ids = sorted(d.id for d in inst.duty_instances)
    pool = m.Pool(id="f", physicians=frozenset({"p0", "p1", "p2"}),
                  duty_instances=frozenset(duty_ids), fair_distribution=True)
    inst = inst.replace(physicians=phys, pools=(pool,))
    der = derive(inst)
    target = der.target_num["f"]["p0"]
    assert 3.0 < target < 4.0  # 10 / 2.94 = 3.40...

    assignments = {duty_ids[0]: "p0", duty_ids[1]: "p0"}  # two for p0
    for i, duty in enumerate(duty_ids[2:]):
        assignments[duty] = ("p1", "p2")[i % 2]
    roster = RosterSolution(
        instance_id=inst.id, duty_assignments=assignments, shift_assignments={},
        unassigned_duties=(), objective=0.0, bound=0.0, status="optimal-within-gap",
        backend="manual", gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    tally = recount_soft(roster, inst, der)
    # floor(3.40) - 2 = 1 below the fairness floor.
    assert tally.pool_below_floor["f"] == 1


def test_empty_roster_on_optional_instance():
    inst = make_instance(period=make_period(days=3), duty_templates=[night_template(mandatory=False)])
    der = derive(inst)
    roster = RosterSolution(
        instance_id=inst.id, duty_assignments={}, shift_assignments={},
        unassigned_duties=tuple(d.id for d in inst.duty_instances),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    assert validate_hard(roster, inst, der) == []
    tally = recount_soft(roster, inst, der)
    assert tally.objective == 0.0
    assert tally.unassigned_duties == 3


def test_block_split_and_free_day_findings():
    tpl = m.DutyTemplate(id="F", weekdays=frozenset(range(7)), start=8 * 60, end=16 * 60, mandatory=False)
    inst = make_instance(period=make_period(days=4), duty_templates=[tpl])
    ids = [d.id for d in inst.duty_instances]
    inst = inst.replace(blocks=(
        m.BlockDefinition(id="b", kind=m.BlockKind.DUTY, members=tuple(ids[:2]), free_days_after=1),
    ))
    der = derive(inst)
    split = RosterSolution(
        instance_id=inst.id, duty_assignments={ids[0]: "p0", ids[1]: "p1"},
        shift_assignments={}, unassigned_duties=tuple(ids[2:]),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    families = {f.family for f in validate_hard(split, inst, der)}
    assert "20-duty-block-link" in families

    busy_after = RosterSolution(
        instance_id=inst.id,
        duty_assignments={ids[0]: "p0", ids[1]: "p0", ids[2]: "p0"},
        shift_assignments={}, unassigned_duties=(ids[3],),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    families = {f.family for f in validate_hard(busy_after, inst, der)}
    assert "22-block-free-days" in families


def test_weekend_cap_finding():
    inst = make_instance(
        period=make_period(start="2026-03-02", days=14),
        duty_templates=[night_template(mandatory=False)],
        weekend_policy=m.WeekendPolicy(max_we=1),
    )
    der = derive(inst)
    # Both weekends worked by p0 against a monthly cap of one.
    roster = RosterSolution(
        instance_id=inst.id,
        duty_assignments={"N@2026-03-07": "p0", "N@2026-03-14": "p0"},
        shift_assignments={},
        unassigned_duties=tuple(d.id for d in inst.duty_instances if d.id not in ("N@2026-03-07", "N@2026-03-14")),
        objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
        gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
    )
    families = {f.family for f in validate_hard(roster, inst, der)}
    assert "40-max-we-month" in families


def test_quality_report_fields_and_rendering(conflict_instance):
    roster, der, raw = solve_tiny(conflict_instance)
    report = quality_report(roster, conflict_instance, der)
    doc = report.to_dict()
    assert doc["kind"] == "quality-report"
    assert doc["staffing"]["below_hard_minimum"] == 0
    assert doc["hard_violations"] == 0
    table = report.render_table()
    assert "Unassigned duties" in table and "Understaffed wards" in table


def test_compare_rosters_reports_signed_deltas():
    inst = make_instance(
        period=make_period(days=3),
        duty_templates=[night_template(mandatory=False)],
        rest_rules=(m.RestRule("N", "N", 24.0, (m.RestLevel(48.0, 4.0),)),),
    )
    der = derive(inst)

    def mk(assignments):
        return RosterSolution(
            instance_id=inst.id, duty_assignments=assignments, shift_assignments={},
            unassigned_duties=tuple(d.id for d in inst.duty_instances if d.id not in assignments),
            objective=0.0, bound=0.0, status="optimal-within-gap", backend="manual",
            gap_target=0.0, solver_seconds=0.0, total_seconds=0.0,
        )

    a = quality_report(mk({"N@2026-03-02": "p0", "N@2026-03-04": "p1"}), inst, der)
    b = quality_report(mk({"N@2026-03-02": "p0", "N@2026-03-04": "p0"}), inst, der)
    deltas = compare_rosters(a, b)
    assert deltas.get("desired_rest_violations.48h") == 1


def test_recount_matches_oracle_objective_on_scenarios():
    from rosterer.scenarios import random_tiny_instance

    checked = 0
    for seed in (11, 23, 35, 47):
        inst = random_tiny_instance(seed)
        if any(f.severity == "error" for f in m.validate_instance(inst)):
            continue
        try:
            der = derive(inst)
            model = build_model(inst, der)
            raw = exhaustive_oracle(model)
        except Exception:
            continue
        if not raw.has_solution:
            continue
        roster = extract_roster(raw, inst)
        tally = recount_soft(roster, inst, der)
        assert tally.objective == pytest.approx(raw.objective, abs=1e-6)
        checked += 1
    assert checked >= 2


def test_builder_and_validator_agree_on_perturbed_rosters():
    """Double-entry property beyond optima: for arbitrary rosters, the
    model's hard constraint families and the validator's recount reach
    the same feasible/infeasible verdict."""
    import random

    import numpy as np

    from rosterer.equivalence import checked_tiny_instance
    from rosterer.solve import _derivation_plan, _propagate_fixings

    hard_prefixes = (
        "01", "02", "03", "04", "05", "06", "07", "12", "13", "14",
        "16", "17", "18", "19", "20", "21", "22", "23", "27", "28",
        "30", "32", "37", "40", "42", "44",
    )

    checked = agreements = 0
    for seed in range(40):
        if checked >= 4:
            break
        inst, der, model, oracle = checked_tiny_instance(seed)
        if not oracle.has_solution:
            continue
        rng = random.Random(seed)
        base = extract_roster(oracle, inst)
        for _ in range(6):
            duties = dict(base.duty_assignments)
            if inst.duty_instances:
                target = rng.choice(inst.duty_instances).id
                pick = rng.choice([p.id for p in inst.physicians] + [None])
                if pick is None:
                    duties.pop(target, None)
                else:
                    duties[target] = pick
            roster = dataclasses.replace(
                base,
                duty_assignments=duties,
                unassigned_duties=tuple(d.id for d in inst.duty_instances if d.id not in duties),
            )
            validator_clean = not validate_hard(roster, inst, der)

            # Model-side verdict: set assignments, derive dependents, and
            # evaluate only the hard constraint families.
            names = {v.name: i for i, v in enumerate(model.variables)}
            n = len(model.variables)
            derived = [
                i for i, v in enumerate(model.variables)
                if not v.name.startswith(("x[", "y["))
            ]
            plan = _derivation_plan(model, set(derived))
            V = np.zeros((1, n))
            for p in inst.physicians:
                for d in inst.duty_instances:
                    V[0, names[f"x[{p.id},{d.id}]"]] = 1.0 if duties.get(d.id) == p.id else 0.0
                for s in inst.shift_instances:
                    V[0, names[f"y[{p.id},{s.id}]"]] = (
                        1.0 if p.id in roster.shift_assignments.get(s.id, ()) else 0.0
                    )
            for step in plan:
                step(V)
            np.clip(V, 0.0, np.array([v.upper for v in model.variables]), out=V)
            model_clean = True
            for con in model.constraints:
                if not con.family.startswith(hard_prefixes):
                    continue
                lhs = sum(coef * V[0, i] for i, coef in con.terms)
                ok = (
                    abs(lhs - con.rhs) <= 1e-6
                    if con.sense == "=="
                    else lhs <= con.rhs + 1e-6
                    if con.sense == "<="
                    else lhs >= con.rhs - 1e-6
                )
                if not ok:
                    model_clean = False
                    break
            assert model_clean == validator_clean, (
                f"seed {seed}: model says {'clean' if model_clean else 'violated'}, "
                f"validator says {'clean' if validator_clean else 'violated'}"
            )
            agreements += 1
        checked += 1
    assert checked >= 4 and agreements >= 24
