"""End-to-end runs: derive, build, solve, extract, validate, report."""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import model as m
from .derivation import DerivedSets, derive, with_expanded_instances
from .errors import ConfigurationError
from .mip import CanonicalModel, build_model
from .solve import RawSolution, RosterSolution, SolveRequest, SolverConfig, extract_roster, solve
from .validate import QualityReport, SoftTally, ViolationFinding, quality_report, recount_soft, validate_hard


@dataclass
class PipelineResult:
    instance: m.RosterInstance
    derived: DerivedSets
    model: CanonicalModel
    raw: RawSolution
    roster: RosterSolution | None
    hard_findings: list[ViolationFinding]
    tally: SoftTally | None
    report: QualityReport | None


def run_pipeline(
    inst: m.RosterInstance,
    gap: float = 0.03,
    time_limit: float = 600.0,
    backend: str = "external",
    solver: SolverConfig | None = None,
) -> PipelineResult:
    """Full solve with validation; instances are expanded when missing."""
    started = time.monotonic()
    errors = [f for f in m.validate_instance(inst) if f.severity == "error"]
    if errors:
        raise ConfigurationError(
            "instance has validation errors: " + "; ".join(f.message for f in errors[:5])
        )
    if not inst.duty_instances and not inst.shift_instances:
        inst = with_expanded_instances(inst)
    der = derive(inst)
    model = build_model(inst, der)
    req = SolveRequest(model=model, gap=gap, time_limit=time_limit, backend=backend, solver=solver or SolverConfig())
    raw = solve(req)
    if not raw.has_solution:
        return PipelineResult(inst, der, model, raw, None, [], None, None)
    total = time.monotonic() - started
    roster = extract_roster(raw, inst, gap_target=gap, total_seconds=total)
    findings = validate_hard(roster, inst, der)
    tally = recount_soft(roster, inst, der)
    report = quality_report(roster, inst, der, hard_findings=findings, tally=tally)
    return PipelineResult(inst, der, model, raw, roster, findings, tally, report)
