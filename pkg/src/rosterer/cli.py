"""Command-line driver for the rostering pipeline.

Every subcommand is a thin composition of library calls.  Exit codes:
0 success, 1 findings/disagreements reported, 2 usage or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import instance_io
from . import model as m
from .derivation import derive, derived_to_dict
from .equivalence import run_equivalence
from .errors import RostererError
from .mip import build_model, model_statistics
from .mps import emit_mps
from .pipeline import run_pipeline
from .scenarios import SCENARIOS, demo_instance
from .solve import RosterSolution, SolverConfig
from .validate import quality_report, validate_hard

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _read_instance(path: str) -> m.RosterInstance:
    if path == "-":
        return instance_io.decode_instance(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return instance_io.decode_instance(fh.read())


def _read_roster(path: str) -> RosterSolution:
    with open(path, "r", encoding="utf-8") as fh:
        return RosterSolution.from_dict(json.load(fh))


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_demo(args) -> int:
    kwargs = {}
    if args.scenario == "cardiology" and args.scale:
        kwargs["scale"] = args.scale
    inst = demo_instance(args.scenario, seed=args.seed, **kwargs)
    _write(args.output, instance_io.encode_instance(inst))
    return EXIT_OK


def _cmd_validate(args) -> int:
    inst = _read_instance(args.instance)
    findings = m.validate_instance(inst)
    count = 0
    for f in findings:
        print(f"{f.severity}: [{f.code}] {f.message}")
        count += f.severity == "error"
    if args.roster:
        der = derive(inst)
        roster = _read_roster(args.roster)
        hard = validate_hard(roster, inst, der)
        for f in hard:
            print(f"hard: [{f.family}] {f.message}")
        count += len(hard)
    print(f"{count} blocking finding(s)")
    return EXIT_FINDINGS if count else EXIT_OK


def _cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    result = run_pipeline(
        inst,
        gap=args.gap,
        time_limit=args.time_limit,
        backend=args.backend,
        solver=SolverConfig.from_env(),
    )
    if args.dump_derived:
        _write(args.dump_derived, instance_io.dumps(derived_to_dict(result.derived)))
    if result.roster is None:
        print(f"no solution: {result.raw.status}", file=sys.stderr)
        return EXIT_FINDINGS
    if args.out_roster:
        _write(args.out_roster, instance_io.dumps(result.roster.to_dict()))
    if args.out_report:
        _write(args.out_report, instance_io.dumps(result.report.to_dict()))
    print(
        f"status={result.raw.status} objective={result.raw.objective:g} bound={result.raw.bound:g} "
        f"solver={result.roster.solver_seconds:.1f}s total={result.roster.total_seconds:.1f}s"
    )
    if args.report_format == "table":
        print(result.report.render_table())
    elif args.report_format == "doc":
        print(instance_io.dumps(result.report.to_dict()))
    if result.hard_findings:
        for f in result.hard_findings:
            print(f"hard: [{f.family}] {f.message}", file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_OK


def _cmd_report(args) -> int:
    inst = _read_instance(args.instance)
    roster = _read_roster(args.roster)
    der = derive(inst)
    report = quality_report(roster, inst, der)
    if args.format == "table":
        print(report.render_table())
    else:
        print(instance_io.dumps(report.to_dict()))
    return EXIT_OK


def _cmd_export_mps(args) -> int:
    inst = _read_instance(args.instance)
    der = derive(inst)
    model = build_model(inst, der)
    doc = emit_mps(model)
    with open(args.output, "wb") as fh:
        fh.write(doc.data)
    if args.names:
        _write(args.names, instance_io.dumps({"variables": doc.variable_names, "rows": doc.row_names}))
    if args.stats:
        print(instance_io.dumps(model_statistics(model)))
    if args.dump_derived:
        _write(args.dump_derived, instance_io.dumps(derived_to_dict(der)))
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    outcomes = run_equivalence(args.n, base_seed=args.seed, time_limit=args.time_limit)
    agree = sum(1 for o in outcomes if o.agrees)
    for o in outcomes:
        if not o.agrees or args.verbose:
            print(
                f"seed {o.seed}: oracle {o.oracle_status}/{o.oracle_objective:.6f} "
                f"external {o.external_status}/{o.external_objective:.6f}"
                + ("" if o.agrees else "  <-- MISMATCH")
            )
    print(f"{agree}/{len(outcomes)} agree")
    return EXIT_OK if agree == len(outcomes) else EXIT_FINDINGS


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import Store

    app = create_app(Store(args.store), solver=SolverConfig.from_env())
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rosterer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="emit a bundled demo scenario instance")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=["standard", "full"], default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("validate", help="validate an instance and optionally a roster")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-r", "--roster", default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="run the full pipeline on an instance")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--gap", type=float, default=0.03)
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--backend", choices=["external", "oracle"], default="external")
    p.add_argument("--out-roster", default=None)
    p.add_argument("--out-report", default=None)
    p.add_argument("--report-format", choices=["table", "doc", "none"], default="table")
    p.add_argument("--dump-derived", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("report", help="recompute the quality report for a roster")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-r", "--roster", required=True)
    p.add_argument("--format", choices=["table", "doc"], default="table")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("export-mps", help="compile an instance and write fixed MPS")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--names", default=None, help="write the short-name sidecar map")
    p.add_argument("--stats", action="store_true", help="print model statistics")
    p.add_argument("--dump-derived", default=None)
    p.set_defaults(func=_cmd_export_mps)

    p = sub.add_parser("oracle-check", help="compare exhaustive oracle and external solver")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store", default=os.environ.get("ROSTERER_STORE", "rosterer.db"))
    p.add_argument("--host", default=os.environ.get("ROSTERER_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("ROSTERER_PORT", "8000")))
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except RostererError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
