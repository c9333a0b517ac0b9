"""Bundled MILP runner: reads an MPS file, writes a solution file.

This is the default "external" solver for the engine: it runs as a
separate process and communicates purely through files, so swapping in
another branch-and-cut solver (e.g. a CBC binary) only changes the
command line.  Internally it solves with HiGHS via scipy.

The solution file follows the common text dialect::

    Optimal - objective value 52
          0 X0000001  1  0
          1 X0000002  0  0

with one optional comment line ``* bound <value>`` carrying the proven
objective bound.  Objective values are reported for the maximization
problem declared in the MPS OBJSENSE section.
"""

from __future__ import annotations

import argparse
import sys

from .mip import SENSE_EQ, SENSE_GE, SENSE_LE, CanonicalModel
from .mps import parse_mps


def solve_model(model: CanonicalModel, gap: float, time_limit: float):
    """Maximize the model; returns (status, values, objective, bound).

    status is one of optimal / feasible / infeasible / timeout / unbounded.
    """
    import numpy as np
    from scipy import sparse
    from scipy.optimize import Bounds, LinearConstraint, milp

    n = len(model.variables)
    if n == 0:
        return "optimal", [], 0.0, 0.0

    c = np.array([-v.objective for v in model.variables])  # milp minimizes
    ub = np.array([v.upper for v in model.variables], dtype=float)
    bounds = Bounds(np.zeros(n), ub)
    integrality = np.ones(n, dtype=np.uint8)

    constraints = []
    if model.constraints:
        rows, cols, vals = [], [], []
        lo, hi = [], []
        for j, con in enumerate(model.constraints):
            for i, coef in con.terms:
                rows.append(j)
                cols.append(i)
                vals.append(coef)
            if con.sense == SENSE_EQ:
                lo.append(con.rhs)
                hi.append(con.rhs)
            elif con.sense == SENSE_LE:
                lo.append(-np.inf)
                hi.append(con.rhs)
            elif con.sense == SENSE_GE:
                lo.append(con.rhs)
                hi.append(np.inf)
            else:
                raise ValueError(f"unknown sense {con.sense!r}")
        A = sparse.csc_array((vals, (rows, cols)), shape=(len(model.constraints), n))
        constraints = [LinearConstraint(A, np.array(lo), np.array(hi))]

    options = {"mip_rel_gap": max(gap, 0.0)}
    if time_limit:
        options["time_limit"] = float(time_limit)
    res = milp(c=c, integrality=integrality, bounds=bounds, constraints=constraints, options=options)

    if res.status == 2:
        return "infeasible", None, 0.0, 0.0
    if res.status == 3:
        return "unbounded", None, 0.0, 0.0
    if res.x is None:
        return "timeout", None, 0.0, 0.0
    objective = -float(res.fun)
    dual = getattr(res, "mip_dual_bound", None)
    bound = -float(dual) if dual is not None else objective
    status = "optimal" if res.status == 0 else "feasible"
    return status, [float(v) for v in res.x], objective, bound


_HEADERS = {
    "optimal": "Optimal - objective value",
    "feasible": "Stopped on time - objective value",
    "timeout": "Stopped on time - no feasible solution",
    "infeasible": "Infeasible - objective value 0",
    "unbounded": "Unbounded - objective value 0",
}


def write_solution(path: str, model: CanonicalModel, status: str, values, objective: float, bound: float) -> None:
    lines = []
    if status in ("optimal", "feasible"):
        lines.append(f"{_HEADERS[status]} {objective:.12g}")
        lines.append(f"* bound {bound:.12g}")
        for i, v in enumerate(model.variables):
            lines.append(f"{i:7d} {v.name}  {values[i]:.12g}  0")
    else:
        lines.append(_HEADERS[status])
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rosterer-solver", description=__doc__.splitlines()[0])
    parser.add_argument("mps", help="input model in fixed MPS format")
    parser.add_argument("--gap", type=float, default=0.0, help="relative optimality gap")
    parser.add_argument("--time-limit", type=float, default=0.0, help="wall clock limit in seconds (0 = none)")
    parser.add_argument("--solution", required=True, help="output solution file")
    args = parser.parse_args(argv)

    with open(args.mps, "rb") as fh:
        model = parse_mps(fh.read())
    status, values, objective, bound = solve_model(model, args.gap, args.time_limit)
    write_solution(args.solution, model, status, values, objective, bound)
    return 0


if __name__ == "__main__":
    sys.exit(main())
