"""Solving canonical models and mapping solutions back to rosters.

Two backends: an external branch-and-cut solver spoken to purely through
files (MPS in, text solution out), and an exhaustive enumeration oracle
for tiny models used as an independent correctness reference.

The external command is configurable: the bundled runner
(``python -m rosterer.solver_backend``) is the default, and a CBC binary
can be selected via ``ROSTERER_SOLVER=cbc:/path/to/cbc``.  Both produce
the same solution-file dialect.
"""

from __future__ import annotations

import math
import os
import re
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

from . import model as m
from .errors import (
    IntegralityError,
    OracleSizeError,
    SolverEnvironmentError,
    SolverProtocolError,
)
from .mip import BINARY, SENSE_EQ, SENSE_GE, SENSE_LE, CanonicalModel
from .mps import emit_mps

INTEGRALITY_TOL = 1e-6
ORACLE_FREE_LIMIT = 24

STATUS_OPTIMAL = "optimal-within-gap"
STATUS_FEASIBLE = "feasible"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIMEOUT = "timeout-no-solution"


@dataclass(frozen=True)
class SolverConfig:
    """How to reach the external solver process."""

    kind: str = "builtin"  # builtin | cbc
    path: str | None = None
    extra_flags: tuple[str, ...] = ()

    @classmethod
    def from_env(cls, env=None) -> "SolverConfig":
        env = env if env is not None else os.environ
        spec = env.get("ROSTERER_SOLVER", "builtin")
        flags = tuple(env.get("ROSTERER_SOLVER_FLAGS", "").split())
        if spec == "builtin":
            return cls("builtin", None, flags)
        if ":" in spec:
            kind, path = spec.split(":", 1)
            return cls(kind, path, flags)
        return cls("cbc", spec, flags)


@dataclass(frozen=True)
class SolveRequest:
    model: CanonicalModel
    gap: float = 0.03
    time_limit: float = 600.0
    backend: str = "external"  # external | oracle
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not 0.0 <= self.gap < 1.0:
            raise ValueError(f"gap {self.gap} outside [0, 1)")
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")


@dataclass
class RawSolution:
    values: dict[str, float]
    objective: float
    bound: float
    status: str
    solver_seconds: float = 0.0
    backend: str = "external"
    log: str = ""

    @property
    def has_solution(self) -> bool:
        return self.status in (STATUS_OPTIMAL, STATUS_FEASIBLE)


def _round_near_integers(values: dict[str, float]) -> dict[str, float]:
    out = {}
    for name, v in values.items():
        r = round(v)
        out[name] = float(r) if abs(v - r) <= INTEGRALITY_TOL else v
    return out


# ---------------------------------------------------------------------------
# External solver over file exchange


def _command_for(cfg: SolverConfig, mps_path: str, sol_path: str, gap: float, limit: float) -> list[str]:
    if cfg.kind == "builtin":
        return [
            sys.executable,
            "-m",
            "rosterer.solver_backend",
            mps_path,
            "--gap",
            str(gap),
            "--time-limit",
            str(limit),
            "--solution",
            sol_path,
            *cfg.extra_flags,
        ]
    if cfg.kind == "cbc":
        if not cfg.path:
            raise SolverEnvironmentError("cbc backend selected but no executable path configured")
        return [
            cfg.path,
            mps_path,
            "-ratioGap",
            str(gap),
            "-seconds",
            str(limit),
            *cfg.extra_flags,
            "-solve",
            "-solution",
            sol_path,
        ]
    raise SolverEnvironmentError(f"unknown solver kind {cfg.kind!r}")


_HEADER_RE = re.compile(r"objective value\s+(-?[\d.eE+-]+)")


def parse_solution_file(text: str) -> tuple[str, dict[str, float], float, float | None]:
    """Parse the solution dialect shared by the bundled runner and CBC."""
    lines = text.splitlines()
    if not lines:
        raise SolverProtocolError("empty solution file")
    header = lines[0].strip()
    lowered = header.lower()
    if lowered.startswith("infeasible") or "infeasible" in lowered.split(" - ")[0]:
        return STATUS_INFEASIBLE, {}, 0.0, None
    if lowered.startswith("unbounded"):
        raise SolverProtocolError(f"solver reports an unbounded model: {header}")
    if "no feasible solution" in lowered:
        return STATUS_TIMEOUT, {}, 0.0, None
    if lowered.startswith("optimal"):
        status = STATUS_OPTIMAL
    elif lowered.startswith("stopped"):
        status = STATUS_FEASIBLE
    else:
        raise SolverProtocolError(f"unrecognized solution header: {header!r}")
    match = _HEADER_RE.search(header)
    if not match:
        raise SolverProtocolError(f"missing objective value in header: {header!r}")
    objective = float(match.group(1))

    bound: float | None = None
    values: dict[str, float] = {}
    for line in lines[1:]:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("*"):
            parts = stripped.split()
            if len(parts) >= 3 and parts[1] == "bound":
                bound = float(parts[2])
            continue
        parts = stripped.split()
        # "<index> <name> <value> [reduced cost]" or "<name> <value>"
        if len(parts) >= 3 and parts[0].lstrip("-").isdigit():
            values[parts[1]] = float(parts[2])
        elif len(parts) >= 2:
            values[parts[0]] = float(parts[1])
    return status, values, objective, bound


def invoke_external(req: SolveRequest) -> RawSolution:
    """Write the model to MPS, run the solver process, read the solution."""
    doc = emit_mps(req.model)
    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="rosterer-solve-") as tmp:
        mps_path = os.path.join(tmp, "model.mps")
        sol_path = os.path.join(tmp, "model.sol")
        with open(mps_path, "wb") as fh:
            fh.write(doc.data)
        cmd = _command_for(req.solver, mps_path, sol_path, req.gap, req.time_limit)
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=req.time_limit * 3 + 120)
        except FileNotFoundError as exc:
            raise SolverEnvironmentError(f"solver executable not found: {cmd[0]!r}") from exc
        except subprocess.TimeoutExpired as exc:
            raise SolverProtocolError(f"solver did not return in time: {cmd[0]!r}", str(exc)) from exc
        elapsed = time.monotonic() - started
        if not os.path.exists(sol_path):
            raise SolverProtocolError(
                f"solver produced no solution file (exit {proc.returncode})", proc.stderr
            )
        with open(sol_path, "r", encoding="ascii", errors="replace") as fh:
            sol_text = fh.read()
    try:
        status, short_values, objective, bound = parse_solution_file(sol_text)
    except SolverProtocolError as exc:
        raise SolverProtocolError(str(exc), proc.stderr) from exc

    values = {doc.original_variable(name): v for name, v in short_values.items()}
    # Every declared variable gets a value; solvers may omit zeros.
    for v in req.model.variables:
        values.setdefault(v.name, 0.0)
    values = _round_near_integers(values)

    raw = RawSolution(
        values=values,
        objective=objective,
        bound=bound if bound is not None else objective,
        status=status,
        solver_seconds=elapsed,
        backend=f"external:{req.solver.kind}",
        log=(proc.stdout or "")[-4000:],
    )
    if raw.has_solution:
        recomputed = req.model.objective_value([values[v.name] for v in req.model.variables])
        if abs(recomputed - raw.objective) > 1e-6 * max(1.0, abs(recomputed)):
            raise SolverProtocolError(
                f"reported objective {raw.objective} disagrees with solution values ({recomputed})",
                proc.stderr,
            )
        raw.objective = recomputed
        if bound is None:
            raw.bound = recomputed
    return raw


# ---------------------------------------------------------------------------
# Exhaustive oracle


def _propagate_fixings(model: CanonicalModel) -> tuple[dict[int, float] | None, bool]:
    """Fix variables forced by simple constraint patterns.

    Returns (fixed map, feasible).  ``feasible=False`` means a constraint
    is already unsatisfiable, so the model is infeasible outright.
    """
    fixed: dict[int, float] = {}
    ubs = [v.upper for v in model.variables]
    changed = True
    while changed:
        changed = False
        for con in model.constraints:
            fs = 0.0
            unfixed: list[tuple[int, float]] = []
            for i, coef in con.terms:
                if i in fixed:
                    fs += coef * fixed[i]
                else:
                    unfixed.append((i, coef))
            residual = con.rhs - fs
            if not unfixed:
                ok = (
                    abs(residual) <= 1e-9
                    if con.sense == SENSE_EQ
                    else residual >= -1e-9
                    if con.sense == SENSE_LE
                    else residual <= 1e-9
                )
                if not ok:
                    return None, False
                continue
            if con.sense == SENSE_EQ and len(unfixed) == 1:
                i, coef = unfixed[0]
                value = residual / coef
                if abs(value - round(value)) > 1e-9 or not -1e-9 <= value <= ubs[i] + 1e-9:
                    return None, False
                fixed[i] = float(round(value))
                changed = True
                continue
            if all(coef > 0 for _, coef in unfixed):
                full = sum(coef * ubs[i] for i, coef in unfixed)
                if con.sense in (SENSE_EQ, SENSE_LE):
                    if residual < -1e-9:
                        return None, False
                    if abs(residual) <= 1e-9 and con.sense == SENSE_EQ:
                        for i, _ in unfixed:
                            fixed[i] = 0.0
                        changed = True
                        continue
                    if con.sense == SENSE_LE and abs(residual) <= 1e-9:
                        for i, _ in unfixed:
                            fixed[i] = 0.0
                        changed = True
                        continue
                if con.sense in (SENSE_EQ, SENSE_GE) and abs(residual - full) <= 1e-9:
                    for i, _ in unfixed:
                        fixed[i] = float(ubs[i])
                    changed = True
                    continue
                if con.sense == SENSE_GE and residual > full + 1e-9:
                    return None, False
    return fixed, True


_DERIVED_PREFIXES = (
    "xBlk[",
    "yBlk[",
    "yDes[",
    "yMax[",
    "yAux[",
    "xCons[",
    "yBlkCons[",
    "vioRest[",
    "weAtt[",
    "vioWePref[",
    "vioMaxWe[",
    "vioFreeWe[",
    "vioMaxD[",
    "vioMinD[",
    "vioMaxPhy[",
    "vioDown[",
    "vioUp[",
    "vioMaxConsB[",
)


def exhaustive_oracle(model: CanonicalModel, free_limit: int = ORACLE_FREE_LIMIT) -> RawSolution:
    """Exact optimum by enumerating free assignment binaries.

    Assignment variables (``x[...]``/``y[...]``) not fixed by forced
    constraints are enumerated; block, staffing-split, attendance, and
    violation variables are derived from their defining constraints at
    their optimal values.  Every candidate is then verified against the
    complete constraint list, so a derivation mistake can only lose
    feasible candidates, never admit an infeasible one.
    """
    import numpy as np

    started = time.monotonic()
    n = len(model.variables)
    if n == 0:
        return RawSolution({}, 0.0, 0.0, STATUS_OPTIMAL, time.monotonic() - started, "oracle")

    fixed, feasible = _propagate_fixings(model)
    if not feasible:
        return RawSolution({}, 0.0, 0.0, STATUS_INFEASIBLE, time.monotonic() - started, "oracle")

    free: list[int] = []
    derived: list[int] = []
    for i, v in enumerate(model.variables):
        if i in fixed:
            continue
        name = v.name
        if name.startswith("x[") or name.startswith("y["):
            free.append(i)
        elif name.startswith(_DERIVED_PREFIXES):
            # Violation counters must carry nonpositive weights for the
            # minimal-value derivation to be optimal; mirrors, staffing
            # splits, and continuity rewards are exempt.
            unique_or_reward = name.startswith(("xCons[", "yBlkCons[", "xBlk[", "yBlk[", "yDes[", "yMax[", "yAux[", "weAtt["))
            if v.objective > 0 and not unique_or_reward:
                raise OracleSizeError(f"cannot derive {name!r}: positive weight on a violation counter")
            derived.append(i)
        elif v.kind == BINARY:
            free.append(i)  # unrecognized binaries are enumerated
        else:
            raise OracleSizeError(f"cannot derive unrecognized integer variable {name!r}")
    if len(free) > free_limit:
        raise OracleSizeError(f"{len(free)} free binaries exceed the oracle limit of {free_limit}")

    plan = _derivation_plan(model, set(derived)) if derived else []

    n_rows = 1 << len(free)
    chunk_rows = min(n_rows, 1 << 14)
    obj = np.array([v.objective for v in model.variables])
    ub = np.array([v.upper for v in model.variables])

    # Constraint matrix for the generic feasibility check.
    from scipy import sparse

    if model.constraints:
        rows, cols, vals, lo, hi = [], [], [], [], []
        for j, con in enumerate(model.constraints):
            for i, coef in con.terms:
                rows.append(j)
                cols.append(i)
                vals.append(coef)
            lo.append(con.rhs if con.sense in (SENSE_EQ, SENSE_GE) else -np.inf)
            hi.append(con.rhs if con.sense in (SENSE_EQ, SENSE_LE) else np.inf)
        A = sparse.csr_array((vals, (rows, cols)), shape=(len(model.constraints), n))
        lo_arr, hi_arr = np.array(lo), np.array(hi)
    else:
        A = None

    best_obj = -math.inf
    best_row: np.ndarray | None = None
    base = np.zeros(n)
    for i, value in fixed.items():
        base[i] = value

    free_arr = np.array(free, dtype=np.int64)
    for start in range(0, n_rows, chunk_rows):
        count = min(chunk_rows, n_rows - start)
        codes = np.arange(start, start + count, dtype=np.uint64)
        V = np.tile(base, (count, 1))
        for bit, i in enumerate(free_arr):
            V[:, i] = (codes >> np.uint64(bit)) & np.uint64(1)
        for step in plan:
            step(V)
        np.clip(V, 0.0, ub, out=V)
        if A is not None:
            lhs = A @ V.T
            ok = np.all((lhs >= lo_arr[:, None] - 1e-6) & (lhs <= hi_arr[:, None] + 1e-6), axis=0)
        else:
            ok = np.ones(count, dtype=bool)
        if not ok.any():
            continue
        objs = V[ok] @ obj
        k = int(np.argmax(objs))
        if objs[k] > best_obj:
            best_obj = float(objs[k])
            best_row = V[ok][k].copy()

    elapsed = time.monotonic() - started
    if best_row is None:
        return RawSolution({}, 0.0, 0.0, STATUS_INFEASIBLE, elapsed, "oracle")
    values = {v.name: float(best_row[i]) for i, v in enumerate(model.variables)}
    return RawSolution(values, best_obj, best_obj, STATUS_OPTIMAL, elapsed, "oracle")


def _derivation_plan(model: CanonicalModel, derived: set[int]):
    """Vectorized fill rules for dependent variables, in dependency order.

    Mined from the model's own constraints:

    * mirror equalities fix block variables to a member assignment;
    * attendance indicators become the OR of their member assignments;
    * staffing-split triples get the unique feasible decomposition;
    * penalty counters take the largest lower bound their constraints
      imply (their weights are nonpositive);
    * reward flags take the smallest upper bound (weights nonnegative).
    """
    import numpy as np

    names = [v.name for v in model.variables]
    index = {name: i for i, name in enumerate(names)}
    ubs = [v.upper for v in model.variables]

    mirrors: dict[int, int] = {}
    att_members: dict[int, list[int]] = {}
    trio: dict[int, tuple[int, int, list[int], float, float]] = {}
    lower_cons: dict[int, list] = {}
    upper_cons: dict[int, list] = {}

    # First pass: variables with a dedicated (exact) derivation.  These
    # must never fall through to the bound-mining below, because they
    # also appear in unrelated families (free days, window caps) whose
    # implied bounds would overwrite the exact value.
    for con in model.constraints:
        fam = con.family
        if fam.startswith(("20", "21")) and len(con.terms) == 2 and con.sense == SENSE_EQ:
            (i1, _), (i2, _) = con.terms
            blk, other = (i2, i1) if i2 in derived and i1 not in derived else (i1, i2)
            if blk in derived and blk not in mirrors:
                mirrors[blk] = other
        elif fam.startswith("36.2"):
            att = next(i for i, c in con.terms if c > 0)
            if att in derived:
                att_members[att] = [i for i, c in con.terms if c < 0]
        elif fam.startswith("08"):
            des = next(i for i, c in con.terms if c > 0 and names[i].startswith("yDes["))
            ymax = next(i for i, c in con.terms if c > 0 and names[i].startswith("yMax["))
            members = [i for i, c in con.terms if c < 0]
            trio[des] = (des, ymax, members, -con.rhs, ubs[des])

    exact: set[int] = set(mirrors) | set(att_members)
    for des, ymax, _, _, _ in trio.values():
        exact |= {des, ymax}
    exact |= {i for i, name in enumerate(names) if name.startswith(("yDes[", "yMax[", "yAux["))}

    for con in model.constraints:
        if con.family.startswith(("20", "21", "36.2", "08")):
            continue
        for i, coef in con.terms:
            if i not in derived or i in exact:
                continue
            others = [(k, c) for k, c in con.terms if k != i]
            if (con.sense == SENSE_LE and coef < 0) or (con.sense == SENSE_GE and coef > 0):
                lower_cons.setdefault(i, []).append((con.rhs, coef, others))
            elif (con.sense == SENSE_LE and coef > 0) or (con.sense == SENSE_GE and coef < 0):
                upper_cons.setdefault(i, []).append((con.rhs, coef, others))

    aux_for: dict[int, int] = {}
    for i, name in enumerate(names):
        if name.startswith("yAux["):
            des_name = "yDes[" + name[len("yAux[") :]
            if des_name in index:
                aux_for[index[des_name]] = i

    steps = []

    def _mirror_step(pairs):
        def run(V):
            for blk, src in pairs:
                V[:, blk] = V[:, src]

        return run

    def _att_step(items):
        def run(V):
            for att, members in items:
                if members:
                    V[:, att] = V[:, members].max(axis=1)
                else:
                    V[:, att] = 0.0

        return run

    def _trio_step(items):
        def run(V):
            for des, ymax, members, min_staff, des_gap in items:
                surplus = V[:, members].sum(axis=1) - min_staff if members else np.full(len(V), -min_staff)
                surplus = np.maximum(surplus, 0.0)
                des_val = np.minimum(surplus, des_gap)
                V[:, des] = des_val
                V[:, ymax] = surplus - des_val
                aux = aux_for.get(des)
                if aux is not None:
                    V[:, aux] = (des_val < des_gap).astype(float)

        return run

    def _lower_step(items):
        def run(V):
            for i, cons in items:
                value = np.zeros(len(V))
                for rhs, coef, others in cons:
                    acc = np.full(len(V), rhs)
                    for k, c in others:
                        acc -= c * V[:, k]
                    np.maximum(value, acc / coef, out=value)
                V[:, i] = np.maximum(value, 0.0)

        return run

    def _upper_step(items):
        def run(V):
            for i, cons, cap in items:
                value = np.full(len(V), float(cap))
                for rhs, coef, others in cons:
                    acc = np.full(len(V), rhs)
                    for k, c in others:
                        acc -= c * V[:, k]
                    np.minimum(value, acc / coef, out=value)
                V[:, i] = np.maximum(value, 0.0)

        return run

    if mirrors:
        steps.append(_mirror_step(sorted(mirrors.items())))
    if att_members:
        steps.append(_att_step(sorted(att_members.items())))
    if trio:
        steps.append(_trio_step(list(trio.values())))
    level2_lower = [(i, cons) for i, cons in sorted(lower_cons.items())]
    if level2_lower:
        steps.append(_lower_step(level2_lower))
    level2_upper = [(i, cons, ubs[i]) for i, cons in sorted(upper_cons.items()) if i not in lower_cons]
    if level2_upper:
        steps.append(_upper_step(level2_upper))
    return steps


# ---------------------------------------------------------------------------
# Dispatch + extraction


def solve(req: SolveRequest) -> RawSolution:
    if req.backend == "external":
        return invoke_external(req)
    if req.backend == "oracle":
        return exhaustive_oracle(req.model)
    raise ValueError(f"unknown backend {req.backend!r}")


@dataclass(frozen=True)
class RosterSolution:
    """Assignments plus solver metadata; the engine's main output."""

    instance_id: str
    duty_assignments: dict[str, str]
    shift_assignments: dict[str, tuple[str, ...]]
    unassigned_duties: tuple[str, ...]
    objective: float
    bound: float
    status: str
    backend: str
    gap_target: float
    solver_seconds: float
    total_seconds: float

    def physician_duties(self, pid: str) -> list[str]:
        return sorted(d for d, p in self.duty_assignments.items() if p == pid)

    def physician_shifts(self, pid: str) -> list[str]:
        return sorted(s for s, ps in self.shift_assignments.items() if pid in ps)

    def to_dict(self) -> dict:
        return {
            "kind": "roster-solution",
            "schema_version": m.SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "duty_assignments": dict(sorted(self.duty_assignments.items())),
            "shift_assignments": {k: list(v) for k, v in sorted(self.shift_assignments.items())},
            "unassigned_duties": list(self.unassigned_duties),
            "objective": self.objective,
            "bound": self.bound,
            "status": self.status,
            "backend": self.backend,
            "gap_target": self.gap_target,
            "solver_seconds": self.solver_seconds,
            "total_seconds": self.total_seconds,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RosterSolution":
        return cls(
            instance_id=doc["instance_id"],
            duty_assignments=dict(doc.get("duty_assignments", {})),
            shift_assignments={k: tuple(v) for k, v in doc.get("shift_assignments", {}).items()},
            unassigned_duties=tuple(doc.get("unassigned_duties", [])),
            objective=doc.get("objective", 0.0),
            bound=doc.get("bound", 0.0),
            status=doc.get("status", STATUS_FEASIBLE),
            backend=doc.get("backend", ""),
            gap_target=doc.get("gap_target", 0.0),
            solver_seconds=doc.get("solver_seconds", 0.0),
            total_seconds=doc.get("total_seconds", 0.0),
        )


def extract_roster(
    raw: RawSolution,
    inst: m.RosterInstance,
    gap_target: float = 0.0,
    total_seconds: float | None = None,
) -> RosterSolution:
    """Turn solver values into per-physician assignments.

    Raises :class:`IntegralityError` if any assignment variable is
    fractional beyond tolerance, and lists optional duties that stayed
    unassigned.
    """
    if not raw.has_solution:
        raise ValueError(f"solution status {raw.status!r} carries no assignments")
    duty_assignments: dict[str, str] = {}
    shift_assignments: dict[str, list[str]] = {s.id: [] for s in inst.shift_instances}
    for p in inst.physicians:
        for d in inst.duty_instances:
            value = raw.values.get(f"x[{p.id},{d.id}]", 0.0)
            if abs(value - round(value)) > INTEGRALITY_TOL:
                raise IntegralityError(f"x[{p.id},{d.id}] = {value} is fractional")
            if round(value) == 1:
                duty_assignments[d.id] = p.id
        for s in inst.shift_instances:
            value = raw.values.get(f"y[{p.id},{s.id}]", 0.0)
            if abs(value - round(value)) > INTEGRALITY_TOL:
                raise IntegralityError(f"y[{p.id},{s.id}] = {value} is fractional")
            if round(value) == 1:
                shift_assignments[s.id].append(p.id)
    unassigned = tuple(d.id for d in inst.duty_instances if d.id not in duty_assignments)
    return RosterSolution(
        instance_id=inst.id,
        duty_assignments=duty_assignments,
        shift_assignments={k: tuple(v) for k, v in shift_assignments.items()},
        unassigned_duties=unassigned,
        objective=raw.objective,
        bound=raw.bound,
        status=raw.status,
        backend=raw.backend,
        gap_target=gap_target,
        solver_seconds=raw.solver_seconds,
        total_seconds=total_seconds if total_seconds is not None else raw.solver_seconds,
    )
