"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL
line per criterion.  The random-equivalence suite covers seeds 0..99.
"""

import time

import pytest

from conftest import make_instance, make_period, night_template
from rosterer import model as m
from rosterer.derivation import derive
from rosterer.equivalence import checked_tiny_instance
from rosterer.mip import build_model, model_statistics
from rosterer.mps import emit_mps, parse_mps
from rosterer.scenarios import cardiology, internal_medicine, orthopedics
from rosterer.solve import SolveRequest, extract_roster, invoke_external
from rosterer.validate import recount_soft, validate_hard

N_RANDOM = 100


def report(ok: bool, label: str):
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {label}")
    assert ok, label


@pytest.fixture(scope="module")
def tiny_suite():
    """100 seeded random tiny instances with their oracle optima."""
    suite = []
    for seed in range(N_RANDOM):
        inst, der, model, oracle = checked_tiny_instance(seed)
        suite.append((seed, inst, der, model, oracle))
    return suite


@pytest.fixture(scope="module")
def external_results(tiny_suite):
    results = {}
    for seed, _, _, model, _ in tiny_suite:
        results[seed] = invoke_external(SolveRequest(model=model, gap=0.0, time_limit=120))
    return results


@pytest.fixture(scope="module")
def scenario_runs():
    """Gapped external solves of the three bundled demo scenarios."""
    runs = []
    for factory, kwargs in (
        (internal_medicine, {}),
        (cardiology, {}),
        (orthopedics, {}),
    ):
        started = time.monotonic()
        inst = factory(seed=0, **kwargs)
        der = derive(inst)
        model = build_model(inst, der)
        raw = invoke_external(SolveRequest(model=model, gap=0.03, time_limit=550))
        total = time.monotonic() - started
        roster = extract_roster(raw, inst, gap_target=0.03, total_seconds=total)
        runs.append((inst, der, model, raw, roster, total))
    return runs


def test_oracle_equivalence_on_100_random_instances(tiny_suite, external_results):
    started = time.monotonic()
    mismatches = []
    for seed, _, _, _, oracle in tiny_suite:
        ext = external_results[seed]
        if oracle.status != ext.status:
            mismatches.append((seed, oracle.status, ext.status))
        elif oracle.has_solution and abs(oracle.objective - ext.objective) > 1e-6:
            mismatches.append((seed, oracle.objective, ext.objective))
    elapsed = time.monotonic() - started
    feasible = sum(1 for *_ , o in tiny_suite if o.has_solution)
    report(
        not mismatches,
        f"oracle equivalence: {N_RANDOM - len(mismatches)}/{N_RANDOM} agree "
        f"({feasible} feasible, {N_RANDOM - feasible} infeasible), compare pass {elapsed:.1f}s"
        + (f"; first mismatch {mismatches[0]}" if mismatches else ""),
    )


def test_double_entry_validation_zero_hard_findings(tiny_suite, scenario_runs):
    bad = []
    for inst, der, _, raw, roster, _ in scenario_runs:
        findings = validate_hard(roster, inst, der)
        if findings:
            bad.append((inst.id, [f.family for f in findings[:3]]))
    for seed, inst, der, _, oracle in tiny_suite:
        if not oracle.has_solution:
            continue
        roster = extract_roster(oracle, inst)
        findings = validate_hard(roster, inst, der)
        if findings:
            bad.append((f"tiny-{seed}", [f.family for f in findings[:3]]))
    report(not bad, f"double-entry validation: zero hard findings across all rosters{'' if not bad else f'; {bad[:2]}'}")


def test_objective_reconciliation(tiny_suite, scenario_runs):
    worst_exact = 0.0
    for seed, inst, der, _, oracle in tiny_suite:
        if not oracle.has_solution:
            continue
        roster = extract_roster(oracle, inst)
        tally = recount_soft(roster, inst, der)
        worst_exact = max(worst_exact, abs(tally.objective - oracle.objective))
    gap_ok = True
    for inst, der, _, raw, roster, _ in scenario_runs:
        tally = recount_soft(roster, inst, der)
        slack = 0.03 * max(1.0, abs(raw.bound)) + 1e-6
        if not (raw.objective - 1e-6 <= tally.objective <= raw.objective + slack):
            gap_ok = False
    report(
        worst_exact <= 1e-6 and gap_ok,
        f"objective reconciliation: max |recount - oracle| = {worst_exact:.2e} (tol 1e-6); "
        f"gapped scenario recounts within gap bound: {gap_ok}",
    )


def test_scale_internal_medicine_replica(scenario_runs):
    inst, _, model, raw, roster, total = scenario_runs[0]
    assert inst.id.startswith("internal-medicine")
    gap_reached = (
        raw.status == "optimal-within-gap"
        or abs(raw.bound - raw.objective) <= 0.03 * max(1.0, abs(raw.bound)) + 1e-6
    )
    report(
        total <= 600.0 and gap_reached and len(inst.physicians) == 35,
        f"scale check: {len(inst.physicians)} physicians, {len(model.variables)} vars, "
        f"solved to 3% gap in {total:.1f}s total (limit 600s), status {raw.status}",
    )


def test_model_size_cardiology_full_scale():
    inst = cardiology(seed=0, scale="full")
    model = build_model(inst, derive(inst))
    stats = model_statistics(model)
    n_vars, n_cons = stats["variables"], stats["constraints"]
    ok = 40_000 <= n_vars <= 4_000_000 and 100_000 <= n_cons <= 10_000_000
    report(
        ok,
        f"model size: full-scale replica has {n_vars} variables / {n_cons} constraints "
        "(within an order of magnitude of 4e5 / 1e6)",
    )


def test_target_number_conservation(tiny_suite):
    worst = 0.0
    pools_checked = 0
    instances = [inst for _, inst, *_ in tiny_suite]
    instances += [internal_medicine(seed=0), cardiology(seed=0), orthopedics(seed=0)]
    for inst in instances:
        der = derive(inst)
        for pool in inst.pools:
            if not pool.fair_distribution:
                continue
            targets = der.target_num[pool.id]
            worst = max(worst, abs(sum(targets.values()) - len(pool.duty_instances)))
            pools_checked += 1
    report(
        worst <= 1e-9 and pools_checked > 0,
        f"target conservation: {pools_checked} fair pools, max |sum(targets) - pool size| = {worst:.2e}",
    )


def test_mps_fixpoint_on_demo_models():
    sizes = []
    for factory in (internal_medicine, cardiology, orthopedics):
        inst = factory(seed=0)
        model = build_model(inst, derive(inst))
        first = emit_mps(model)
        second = emit_mps(parse_mps(first.data))
        sizes.append(len(first.data))
        if first.data != second.data:
            report(False, f"MPS fixpoint broken for {inst.id}")
    report(True, f"MPS fixpoint: emit-parse-emit byte-identical on all demo models ({sizes} bytes)")


def test_family_omission_is_structural():
    ortho = orthopedics(seed=0)
    assert not ortho.blocks
    model = build_model(ortho, derive(ortho))
    block_vars = [v.name for v in model.variables if v.name.startswith(("xBlk[", "yBlk[", "yBlkCons[", "vioMaxConsB["))]
    block_families = [
        f for f in model_statistics(model)["constraints_by_family"]
        if f.split("-")[0].split(".")[0] in {"20", "21", "22", "23", "24", "26"}
    ]

    poolless = make_instance(
        period=make_period(days=4),
        duty_templates=[night_template()],
        rest_rules=(m.RestRule("N", "N", 24.0),),
    )
    model2 = build_model(poolless, derive(poolless))
    pool_vars = [
        v.name for v in model2.variables
        if v.name.startswith(("vioMaxD[", "vioMinD[", "vioMaxPhy[", "vioDown[", "vioUp["))
    ]
    pool_families = [
        f for f in model_statistics(model2)["constraints_by_family"]
        if f.split("-")[0] in {str(n) for n in range(27, 36)}
    ]
    report(
        not block_vars and not block_families and not pool_vars and not pool_families,
        "family omission: block-free config has no block variables/constraints, "
        "pool-free config has no pool families",
    )
