"""``normsched`` command line.

Files are JSON.  An instance file holds ``{"jobs": [...]}``; a bundle holds
``{"instance": ..., "schedule": ...}`` and optionally ``"partition"``.
Every command accepts either where an instance is enough, and ``solve``
writes a bundle, so ``gen | solve | verify`` chains work.

Exit codes: 0 success, 1 validation failure, 2 I/O or parse error,
3 solver budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import INF, abnormality_point, lint, shifts_and_resolution
from .dyadic import fmt_time
from .instances import make_jp, make_pp_schedule, make_theorem_schedule, random_intree
from .render import job_labels, render_gantt
from .solver import SolveOptions, SolverError, grid_dp_solve, solve_exact
from .timeline import (
    BlockPartition,
    Instance,
    InfeasibleError,
    IntervalSchedule,
    derive_partition,
    dumps,
    partition_feasible,
    realize,
    schedule_metrics,
    validate_instance,
    validate_schedule,
)
from .transform import improve

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# file handling


def _read(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def load_bundle(path: str, instance_path: str | None = None):
    """(instance, schedule or None, partition or None) from a file."""
    data = _read(path)
    try:
        if "jobs" in data:
            inst = Instance.from_json(data)
            return inst, None, None
        inst_data = data.get("instance")
        if inst_data is None and instance_path:
            inst_data = _read(instance_path)
        if inst_data is None:
            raise InputError(f"{path} has no instance; pass --instance")
        inst = Instance.from_json(inst_data)
        sched = IntervalSchedule.from_json(data["schedule"]) if "schedule" in data else None
        part = BlockPartition.from_json(data["partition"]) if "partition" in data else None
        return inst, sched, part
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed input {path}: {exc}") from exc


def bundle(instance: Instance, schedule: IntervalSchedule | None = None, **extra) -> dict:
    out = {"instance": instance.to_json()}
    if schedule is not None:
        out["schedule"] = schedule.to_json()
    out.update(extra)
    return out


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst, _, _ = load_bundle(args.input)
    rep = validate_instance(inst)
    if not rep:
        print(f"invalid instance: {rep}", file=sys.stderr)
        return EXIT_INVALID
    if args.threads:
        os.environ["NORMSCHED_THREADS"] = str(args.threads)
    if args.method == "grid":
        res = grid_dp_solve(inst, args.grid_k, args.horizon)
    else:
        opts = SolveOptions(max_blocks=args.blocks, time_limit=args.time_limit, incumbent_k=args.grid_k,
                            threads=args.threads)
        res = solve_exact(inst, opts)
    payload = res.to_json()
    payload["total"] = payload["metrics"]["total"]
    out = bundle(inst, res.schedule, **{k: v for k, v in payload.items() if k != "schedule"})
    if args.deterministic:
        out = _strip_timing(out)
    _write(dumps(out, True), args.output)
    return EXIT_OK if res.certified else EXIT_BUDGET


def _verify_report(inst, sched, part) -> tuple[dict, bool]:
    report: dict = {}
    ok = True
    if sched is not None:
        rep = validate_schedule(inst, sched)
        report["feasible"] = rep.ok
        report["violations"] = rep.to_dict()["violations"]
        ok = rep.ok
        if ok:
            part = derive_partition(inst, sched)
            shifts, res = shifts_and_resolution(sched)
            report["resolution"] = None if res is None else fmt_time(res)
            report["metrics"] = schedule_metrics(sched).to_json()
    elif part is not None:
        rep = partition_feasible(inst, part)
        report["feasible"] = rep.ok
        report["violations"] = rep.to_dict()["violations"]
        ok = rep.ok
        if ok:
            sched = realize(inst, part)
            _, res = shifts_and_resolution(sched)
            report["resolution"] = None if res is None else fmt_time(res)
            report["metrics"] = schedule_metrics(sched).to_json()
    else:
        raise InputError("nothing to verify: the file has neither a schedule nor a partition")
    if ok:
        point = abnormality_point(part)
        report["normal"] = point == INF
        report["abnormality_point"] = "inf" if point == INF else point
        report["events"] = [fmt_time(e) for e in part.events]
    return report, ok


def cmd_verify(args) -> int:
    inst, sched, part = load_bundle(args.schedule, args.instance)
    report, ok = _verify_report(inst, sched, part)
    _write(dumps(report, True), args.output)
    return EXIT_OK if ok else EXIT_INVALID


def _partition_of(inst, sched, part):
    if part is not None:
        return part
    if sched is None:
        raise InputError("lint needs a schedule or a partition")
    rep = validate_schedule(inst, sched)
    if not rep:
        raise InfeasibleError(rep)
    return derive_partition(inst, sched)


def cmd_lint(args) -> int:
    inst, sched, part = load_bundle(args.schedule, args.instance)
    P = _partition_of(inst, sched, part)
    diags = lint(inst, P, maximal=args.maximal)
    out = {"diagnostics": [d.to_json() for d in diags]}
    clean = not diags
    if args.fix:
        fixed, trace = improve(inst, P, max_rounds=args.max_rounds)
        remaining = lint(inst, fixed, maximal=args.maximal)
        out["trace"] = [m.to_json() for m in trace]
        out["fixed"] = bundle(inst, realize(inst, fixed, completing_first=True), partition=fixed.to_json())
        out["remaining"] = [d.to_json() for d in remaining]
        clean = not remaining
    _write(dumps(out, True), args.output)
    return EXIT_OK if clean else EXIT_INVALID


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "jp":
        out = make_jp(args.p).to_json()
    elif fam == "pp":
        out = bundle(make_jp(args.p), make_pp_schedule(args.p))
    elif fam == "theorem":
        inst, sched = make_theorem_schedule(args.p, args.chain_length)
        out = bundle(inst, sched)
    else:
        out = random_intree(args.n, args.max_release, args.seed).to_json()
    _write(dumps(out, True), args.output)
    return EXIT_OK


def cmd_gantt(args) -> int:
    inst, sched, part = load_bundle(args.schedule, args.instance)
    if sched is None:
        if part is None:
            raise InputError("gantt needs a schedule or a partition")
        sched = realize(inst, part)
    labels = job_labels(inst, sched) if args.labels == "family" else None
    _write(render_gantt(sched, args.format, labels, title=args.title), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_bench

    only = [int(x) for x in args.only.split(",")] if args.only else list(range(1, 11))
    ok = run_bench(Path(args.out_dir), only=only, j1_budget=args.j1_budget, scale=args.scale,
                   figures=not args.no_figures, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_INVALID


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="normsched", description="Exact two-machine preemptive scheduling toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, deterministic=True):
        p.add_argument("-o", "--output", help="output file (default stdout)")
        if deterministic:
            p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True,
                           help="drop wall-clock fields so output is byte-stable (default on)")

    p = sub.add_parser("solve", help="optimal schedule for an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("exact", "grid"), default="exact")
    p.add_argument("--grid-k", type=int, default=1, help="grid exponent (grid method) or incumbent grid (exact)")
    p.add_argument("--horizon", type=int, default=None, help="grid horizon in time units")
    p.add_argument("--blocks", type=int, default=None, help="override the structure block budget")
    p.add_argument("--time-limit", type=float, default=None, help="seconds before the exact search gives up")
    p.add_argument("--threads", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="feasibility, normality and resolution report")
    p.add_argument("--schedule", required=True)
    p.add_argument("--instance")
    common(p, False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lint", help="necessary-optimality diagnostics")
    p.add_argument("--schedule", required=True)
    p.add_argument("--instance")
    p.add_argument("--maximal", action="store_true", help="also report abnormal blocks")
    p.add_argument("--fix", action="store_true", help="apply improving transformations and print the trace")
    p.add_argument("--max-rounds", type=int, default=100)
    common(p, False)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("gen", help="generate instances and constructed schedules")
    p.add_argument("--family", choices=("jp", "pp", "theorem", "random"), required=True)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--chain-length", type=int, default=None)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--max-release", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    common(p, False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gantt", help="render a schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--instance")
    p.add_argument("--format", choices=("ascii", "svg"), default="ascii")
    p.add_argument("--labels", choices=("family", "id"), default="family")
    p.add_argument("--title")
    common(p, False)
    p.set_defaults(func=cmd_gantt)

    p = sub.add_parser("bench", help="run the acceptance suite; write JSON, text table and figures")
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--j1-budget", type=float, default=None, help="seconds for the exact J_1 solve")
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the random sample sizes")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InfeasibleError as exc:
        print(f"infeasible: {exc.report}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
