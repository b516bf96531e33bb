"""Command-line harness: ``logrec <subcommand> ...``.

Exit codes: 0 success, 1 violations found (``check``), 2 input error,
3 no optimality proof although ``--prove`` was given, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import cp, gen, kernels, ls, oracle, satenc
from .core import (
    InputError,
    InternalError,
    Problem,
    Schedule,
    check_schedule,
    dumps_problem,
    load_problem,
    objective,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_UNPROVED = 3
EXIT_INTERNAL = 4


def _ms(value, with_times):
    if not with_times:
        return None
    return round(value, 3)


def _fmt_ms(value, with_times):
    return f"{value:.3f}" if with_times else "-"


def _seconds(timeout_ms):
    return None if timeout_ms is None else timeout_ms / 1000.0


# -- schedule files -----------------------------------------------------------

def format_schedule(problem: Problem, schedule: Schedule) -> list[str]:
    names = problem.action_names
    return [f"{p}\t{names[i]}" for p, i in schedule.ordered()]


def parse_schedule(text: str, names) -> Schedule:
    """Read ``position<TAB>name`` lines (or a ``--json`` solver report)."""
    n = len(names)
    positions = {}
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            entries = [(e["position"], e["action"]) for e in doc["schedule"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"bad JSON schedule: {exc}") from None
        for p, a in entries:
            if not isinstance(a, int) or not 0 <= a < n:
                raise InputError(f"schedule names unknown action id {a!r}")
            if a in positions:
                raise InputError(f"action {a} scheduled twice")
            positions[a] = p
        return Schedule.from_positions(n, positions)
    index = {name: k for k, name in enumerate(names)}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#") or line.startswith("iter="):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise InputError(f"schedule line {lineno}: expected 'position<TAB>name', got {line!r}")
        try:
            p = int(fields[0])
        except ValueError:
            raise InputError(f"schedule line {lineno}: position {fields[0]!r} is not an integer") from None
        name = fields[1].strip()
        if name not in index:
            raise InputError(f"schedule line {lineno}: unknown action {name!r}")
        if index[name] in positions:
            raise InputError(f"schedule line {lineno}: action {name!r} scheduled twice")
        positions[index[name]] = p
    return Schedule.from_positions(n, positions)


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write_out(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- reports --------------------------------------------------------------------

def _solution_doc(problem, schedule, stats, method, with_times, extra=None):
    names = problem.action_names
    s = stats.as_dict()
    for key in ("first_ms", "best_ms", "total_ms"):
        s[key] = _ms(s[key], with_times)
    doc = {
        "instance": problem.name,
        "method": method,
        "backend": kernels.BACKEND,
        "n": problem.n,
        "value": objective(schedule),
        "proved_optimal": stats.proved_optimal,
        "accepted": [i for i in range(problem.n) if schedule.accepted[i]],
        "schedule": [{"position": p, "action": i, "name": names[i]} for p, i in schedule.ordered()],
        "stats": s,
        "stop_reason": getattr(stats, "stop_reason", None),
    }
    if extra:
        doc.update(extra)
    return doc


def _emit(doc, as_json):
    if as_json:
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _verify(problem, schedule):
    bad = check_schedule(problem, schedule)
    if bad:
        raise InternalError("solver emitted an invalid schedule: " + "; ".join(map(str, bad)))


def cmd_solve(args) -> int:
    problem = load_problem(args.instance)
    config = cp.CpConfig(
        time_limit=_seconds(args.timeout),
        node_limit=args.node_limit,
        prove_optimality=not args.first,
    )
    schedule, stats = cp.branch_and_bound(problem, config)
    _verify(problem, schedule)
    t = not args.no_times
    if args.json:
        trace = [{"value": v, "t_ms": _ms(ms, t), "nodes": k} for v, ms, k in stats.trace]
        _emit(_solution_doc(problem, schedule, stats, "cp", t, {"trace": trace}), True)
    else:
        out = format_schedule(problem, schedule)
        out.append(f"# instance={problem.name} n={problem.n} deps={len(problem.deps)} precs={len(problem.precs)}")
        out.append(
            f"# value={stats.best_value} proved={str(stats.proved_optimal).lower()} "
            f"first_value={stats.first_value} first_ms={_fmt_ms(stats.first_ms, t)} "
            f"best_ms={_fmt_ms(stats.best_ms, t)} total_ms={_fmt_ms(stats.total_ms, t)} "
            f"nodes={stats.nodes_or_iterations} stop={stats.stop_reason}"
        )
        if args.trace:
            for v, ms, k in stats.trace:
                out.append(f"# incumbent value={v} t_ms={_fmt_ms(ms, t)} nodes={k}")
        sys.stdout.write("\n".join(out) + "\n")
    if args.prove and not stats.proved_optimal:
        return EXIT_UNPROVED
    return EXIT_OK


def cmd_ls(args) -> int:
    problem = load_problem(args.instance)
    warm = ls.warm_start_from_logs(problem) if args.warm_start else None
    params = ls.LsParams(
        mode=args.mode,
        max_iterations=args.iters,
        tabu_max=args.tabu_max,
        rng_seed=args.seed,
        warm_start=warm,
        time_limit=_seconds(args.timeout),
    )
    if args.mode == ls.DESCENT:
        schedule, stats = ls.descent(problem, params)
    else:
        schedule, stats, _ = ls.tabu_search(problem, params)
    _verify(problem, schedule)
    t = not args.no_times
    if args.json:
        trace = [dict(row, t_ms=_ms(row["t_ms"], t)) for row in stats.trace]
        _emit(_solution_doc(problem, schedule, stats, args.mode, t, {"trace": trace}), True)
        return EXIT_OK
    out = format_schedule(problem, schedule)
    out.append(f"# instance={problem.name} n={problem.n} precs={len(problem.precs)} mode={args.mode} seed={args.seed}")
    out.append(
        f"# best_cost={stats.best_value} iterations={stats.nodes_or_iterations} "
        f"best_ms={_fmt_ms(stats.best_ms, t)} total_ms={_fmt_ms(stats.total_ms, t)} stop={stats.stop_reason}"
    )
    if args.trace:
        out.append("# trace")
        out.extend(ls.format_trace(stats.trace, with_times=t))
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = gen.GenSpec(args.size, args.dep_density, args.prec_density, args.seed)
    problem = gen.generate(spec)
    _write_out(dumps_problem(problem), args.output)
    if args.output not in (None, "-"):
        summary = {"name": problem.name, "label": spec.label, "n": problem.n,
                   "deps": len(problem.deps), "precs": len(problem.precs), "path": args.output}
        if args.json:
            _emit(summary, True)
        else:
            print(f"{spec.label}: n={problem.n} deps={len(problem.deps)} precs={len(problem.precs)} -> {args.output}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cnf = satenc.parse_dimacs(_read_text(args.cnf))
    problem, rmap = satenc.encode(cnf)
    stem = Path(args.cnf).with_suffix("") if args.cnf != "-" else Path("formula")
    out = args.output or f"{stem}.json"
    map_out = args.map or f"{stem}.map.json"
    Path(out).write_text(dumps_problem(problem))
    satenc.save_map(rmap, map_out)
    summary = {"instance": out, "map": map_out, "n": problem.n, "precs": len(problem.precs),
               "target": cnf.num_vars * len(cnf.clauses)}
    if args.json:
        _emit(summary, True)
    else:
        print(f"wrote {out} (n={problem.n}, precs={len(problem.precs)}) and {map_out}; "
              f"satisfiable iff optimum = {summary['target']}")
    return EXIT_OK


def cmd_decode(args) -> int:
    rmap = satenc.load_map(args.map)
    names = [f"x{v + 1}_{int(pol)}^{c + 1}" for v, c, pol in map(rmap.triple, range(rmap.n))]
    schedule = parse_schedule(_read_text(args.schedule), names)
    valuation = satenc.decode(rmap, schedule)
    if valuation is not None and args.cnf:
        cnf = satenc.parse_dimacs(_read_text(args.cnf))
        if not cnf.satisfied_by(valuation):
            raise InternalError("decoded valuation does not satisfy the formula")
    if args.json:
        _emit({"valuation": valuation}, True)
    elif valuation is None:
        print("s NOT-FULL (schedule accepts fewer than N*C actions)")
    else:
        print("s SATISFIABLE")
        print("v " + " ".join(str(v + 1 if val else -(v + 1)) for v, val in enumerate(valuation)) + " 0")
    return EXIT_OK


def cmd_check(args) -> int:
    problem = load_problem(args.instance)
    schedule = parse_schedule(_read_text(args.schedule), problem.action_names)
    bad = check_schedule(problem, schedule)
    if args.json:
        _emit({"valid": not bad, "value": objective(schedule),
               "violations": [asdict(v) for v in bad]}, True)
    elif bad:
        for v in bad:
            print(v)
    else:
        print(f"ok value={objective(schedule)}")
    return EXIT_VIOLATIONS if bad else EXIT_OK


def cmd_oracle(args) -> int:
    problem = load_problem(args.instance)
    value, accepted = oracle.brute_force(problem, cap=args.cap)
    schedule = cp.schedule_for(problem, accepted)
    if args.json:
        _emit({"instance": problem.name, "value": value,
               "accepted": [i for i in range(problem.n) if accepted[i]]}, True)
    else:
        out = format_schedule(problem, schedule)
        out.append(f"# instance={problem.name} oracle value={value}")
        sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


# -- benchmarks -------------------------------------------------------------------

@dataclass
class BenchRow:
    name: str
    size: int
    dep_count: int
    prec_count: int
    method: str
    first_value: int
    first_ms: float | None
    best_value: int
    best_ms: float | None
    proof_ms: float | None
    proved: bool
    iterations: int
    status: str
    timeout_ms: float | None


def _parse_ints(text):
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _bench_instance(job):
    size, seed, d_dep, d_prec, methods, timeout_ms, iters, tabu_max, t = job
    spec = gen.GenSpec(size, d_dep, d_prec, seed)
    problem = gen.generate(spec)
    rows = []
    limit = _seconds(timeout_ms)
    for method in methods:
        if method == "cp":
            schedule, stats = cp.branch_and_bound(problem, cp.CpConfig(time_limit=limit))
        elif problem.deps:
            continue
        else:
            params = ls.LsParams(mode=method, max_iterations=iters, tabu_max=tabu_max,
                                 rng_seed=seed, time_limit=limit)
            run = ls.descent if method == ls.DESCENT else ls.tabu_search
            schedule, stats = run(problem, params)[:2]
        _verify(problem, schedule)
        reason = stats.stop_reason
        if method == "cp":
            status = "optimal" if stats.proved_optimal else ("timeout" if reason == "time_limit" else "unproved")
        else:
            status = "timeout" if reason == "time_limit" else "done"
        rows.append(BenchRow(
            name=spec.label, size=size, dep_count=len(problem.deps), prec_count=len(problem.precs),
            method=method, first_value=stats.first_value, first_ms=_ms(stats.first_ms, t),
            best_value=stats.best_value, best_ms=_ms(stats.best_ms, t),
            proof_ms=_ms(stats.total_ms, t) if (method == "cp" and stats.proved_optimal) else None,
            proved=stats.proved_optimal, iterations=stats.nodes_or_iterations, status=status,
            timeout_ms=timeout_ms,
        ))
    return rows


def _cell(v, width):
    return f"{'-' if v is None else v!s:>{width}}"


def render_tables(rows: list[BenchRow]) -> str:
    out = []
    cp_rows = [r for r in rows if r.method == "cp"]
    if cp_rows:
        out.append("CP (branch-and-bound)")
        hdr = ("Bench", "Size", "#dep", "#prec", "First", "Time", "Opt", "Time", "Proof")
        out.append(" ".join(f"{h:>9}" for h in hdr))
        for r in cp_rows:
            opt = str(r.best_value) if r.proved else f">={r.best_value}"
            proof = r.proof_ms if r.proved else r.status
            cells = (r.name, r.size, r.dep_count, r.prec_count, r.first_value, r.first_ms, opt, r.best_ms, proof)
            out.append(" ".join(_cell(c, 9) for c in cells))
        out.append("")
    by_name = {}
    for r in rows:
        by_name.setdefault(r.name, {})[r.method] = r
    ls_names = [k for k, m in by_name.items() if "descent" in m or "tabu" in m]
    if ls_names:
        out.append("Local search (precedence-only)")
        hdr = ("Bench", "Size", "#prec", "Opt", "D.best", "D.iter", "D.time", "T.best", "T.iter", "T.time")
        out.append(" ".join(f"{h:>9}" for h in hdr))
        for name in ls_names:
            m = by_name[name]
            any_row = next(iter(m.values()))
            c = m.get("cp")
            opt = None if c is None else (str(c.best_value) if c.proved else f">={c.best_value}")
            d, tb = m.get("descent"), m.get("tabu")
            cells = (name, any_row.size, any_row.prec_count, opt,
                     d and d.best_value, d and d.iterations, d and d.best_ms,
                     tb and tb.best_value, tb and tb.iterations, tb and tb.best_ms)
            out.append(" ".join(_cell(x, 9) for x in cells))
        out.append("")
    agg = aggregate(rows)
    if agg:
        out.append("Per-size summary")
        out.append(" ".join(f"{h:>11}" for h in ("Size", "Method", "Count", "MeanBest", "MedianBest", "MedianMs", "Proved")))
        for a in agg:
            cells = (a["size"], a["method"], a["count"], a["mean_best"], a["median_best"], a["median_best_ms"], a["proved"])
            out.append(" ".join(_cell(x, 11) for x in cells))
    return "\n".join(out) + "\n"


def aggregate(rows: list[BenchRow]) -> list[dict]:
    groups = {}
    for r in rows:
        groups.setdefault((r.size, r.method), []).append(r)
    out = []
    for (size, method), rs in sorted(groups.items()):
        times = [r.best_ms for r in rs if r.best_ms is not None]
        out.append({
            "size": size,
            "method": method,
            "count": len(rs),
            "mean_best": round(statistics.mean(r.best_value for r in rs), 3),
            "median_best": statistics.median(r.best_value for r in rs),
            "median_best_ms": round(statistics.median(times), 3) if times else None,
            "proved": sum(r.proved for r in rs),
        })
    return out


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    fields = list(BenchRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def run_bench(sizes, seeds, d_dep, d_prec, methods, timeout_ms, iters=None, tabu_max=10,
              with_times=True, jobs=1) -> list[BenchRow]:
    work = [(size, seed, d_dep, d_prec, tuple(methods), timeout_ms, iters, tabu_max, with_times)
            for size in sizes for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_instance, work))
    else:
        results = [_bench_instance(job) for job in work]
    return [row for rows in results for row in rows]


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("cp", ls.DESCENT, ls.TABU):
            raise InputError(f"unknown method {m!r}; choose from cp, descent, tabu")
    rows = run_bench(
        _parse_ints(args.sizes), _parse_ints(args.seeds), args.dep_density, args.prec_density,
        methods, args.timeout, args.iters, args.tabu_max, not args.no_times, args.jobs,
    )
    if args.csv:
        Path(args.csv).write_text(rows_to_csv(rows))
    if args.json:
        _emit({"rows": [asdict(r) for r in rows], "summary": aggregate(rows)}, True)
    else:
        sys.stdout.write(render_tables(rows))
    return EXIT_OK


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--no-times", action="store_true",
                        help="omit wall-clock fields so repeated runs are byte-identical")

    parser = argparse.ArgumentParser(prog="logrec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="logrec 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="exact branch-and-bound")
    p.add_argument("instance")
    p.add_argument("--timeout", type=float, help="milliseconds")
    p.add_argument("--node-limit", type=int)
    p.add_argument("--prove", action="store_true", help="exit 3 unless optimality is proved")
    p.add_argument("--first", action="store_true", help="stop at the first solution")
    p.add_argument("--trace", action="store_true", help="list every incumbent")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ls", parents=[common], help="descent or Tabu local search")
    p.add_argument("instance")
    p.add_argument("--mode", choices=[ls.DESCENT, ls.TABU], default=ls.TABU)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, help="sweeps (descent) or moves (tabu); tabu default 10*n^2")
    p.add_argument("--tabu-max", type=int, default=10)
    p.add_argument("--timeout", type=float, help="milliseconds")
    p.add_argument("--warm-start", action="store_true", help="start from the instance's logs")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_ls)

    p = sub.add_parser("gen", parents=[common], help="random benchmark instance")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--dep-density", type=float, default=1.5)
    p.add_argument("--prec-density", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("encode", parents=[common], help="DIMACS CNF to reconciliation instance")
    p.add_argument("cnf")
    p.add_argument("-o", "--output")
    p.add_argument("--map")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="schedule back to a valuation")
    p.add_argument("map")
    p.add_argument("schedule")
    p.add_argument("--cnf", help="verify the valuation against this formula")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("check", parents=[common], help="validate a schedule")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", parents=[common], help="exhaustive optimum (small n)")
    p.add_argument("instance")
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", parents=[common], help="benchmark tables")
    p.add_argument("--sizes", default="40,50")
    p.add_argument("--seeds", default="1-4")
    p.add_argument("--seed", type=int, help="single seed; overrides --seeds")
    p.add_argument("--dep-density", type=float, default=0.0)
    p.add_argument("--prec-density", type=float, default=1.5)
    p.add_argument("--methods", default="cp,descent,tabu")
    p.add_argument("--timeout", type=float, default=10000.0, help="milliseconds per instance and method")
    p.add_argument("--iters", type=int)
    p.add_argument("--tabu-max", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and args.command == "bench":
        args.seeds = str(args.seed)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
