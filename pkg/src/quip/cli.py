"""Command-line entry point.

Subcommands: bound, design, fit, suggest, sequential, simulate, bench,
oracle. All randomness is flag-seeded; every JSON output carries a
schema_version field. Exit codes: 0 success / certified optimum, 2
time-limit incumbent, 1 error (including usage errors).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import acquisition, bench, bounds, encoding, gp, maximin, sequential, simulators

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIME_LIMIT = 2


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _emit(obj: dict) -> None:
    obj = {"schema_version": SCHEMA_VERSION, **obj}
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_bound(args) -> int:
    _emit(
        {
            "n": args.n,
            "d": args.d,
            "M": args.M,
            "q0": bounds.q0(args.n, args.d, args.M),
            "gilbert_q": bounds.gilbert_q(args.n, args.d, args.M),
            "derangement_q": bounds.derangement_q(args.n, args.d, args.M),
        }
    )
    return EXIT_OK


def _cmd_design(args) -> int:
    result = maximin.optimize_maximin(
        args.n, args.d, args.M, time_limit=args.time_limit, seed=args.seed
    )
    if args.out:
        encoding.save_design(result.design, args.out)
    _emit(
        {
            "n": args.n,
            "d": args.d,
            "M": args.M,
            "q_star": result.q_star,
            "certified": result.certified,
            "nodes": sum(r.nodes_explored for r in result.trace),
            "elapsed": sum(r.elapsed for r in result.trace),
            "design": [list(p.levels) for p in result.design.points],
        }
    )
    return EXIT_OK if result.certified else EXIT_TIME_LIMIT


def _read_responses(path) -> np.ndarray:
    with open(path) as fh:
        vals = [float(v) for row in csv.reader(fh) for v in row if v.strip()]
    return np.asarray(vals)


def _cmd_fit(args) -> int:
    D = encoding.load_design(args.design, M=args.M)
    f = _read_responses(args.responses)
    model = gp.fit_mle(D, f, gp.FitConfig(seed=args.seed))
    if args.out:
        gp.save_model(model, args.out)
    _emit(
        {
            "n": D.n,
            "d": D.d,
            "M": D.M,
            "theta": [float(v) for v in model.params.theta],
            "mu": model.params.mu,
            "tau2": model.params.tau2,
            "is_constant": model.is_constant,
        }
    )
    return EXIT_OK


def _cmd_suggest(args) -> int:
    model = gp.load_model(args.model)
    spec = acquisition.AcquisitionSpec(
        args.acq, args.lam, args.gap, args.time_limit
    )
    rep = acquisition.optimize_acquisition(model, spec)
    _emit(
        {
            "point": list(rep.best_point.levels),
            "value": rep.best_value,
            "certified_bound": rep.certified_bound,
            "relative_gap": rep.relative_gap,
            "status": rep.status,
            "nodes": rep.nodes,
            "elapsed": rep.elapsed,
        }
    )
    return EXIT_TIME_LIMIT if rep.status == acquisition.STATUS_TIME_LIMIT else EXIT_OK


def _csv_table_simulator(path, M):
    table: dict[tuple[int, ...], float] = {}
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            table[tuple(int(v) for v in row[:-1])] = float(row[-1])
    if not table:
        raise ValueError(f"no rows in lookup table {path}")
    d = len(next(iter(table)))

    def sim(x):
        return table[x.levels]

    return d, M, sim


def _simulator_for(args):
    """(d, M, objective) with costs negated to the maximization sign."""
    if args.simulator == "csv":
        if not args.table:
            raise ValueError("--table is required for the csv simulator")
        return _csv_table_simulator(args.table, args.M or 2)
    return bench.problem_objective(args.simulator, args.d)


def _cmd_sequential(args) -> int:
    d, M, objective = _simulator_for(args)
    if args.init_design:
        init = encoding.load_design(args.init_design, M=M)
    else:
        init = bench.initial_design(args.n_init, d, M, args.seed)
    f0 = np.array([objective(p) for p in init.points])
    spec = acquisition.AcquisitionSpec(args.acq, args.lam, args.gap, args.time_limit)
    campaign = sequential.run_campaign(
        init, f0, objective, spec, args.n_seq, seed=args.seed
    )
    if args.out:
        sequential.save_campaign(campaign, args.out)
    point, value = sequential.best_so_far(campaign)
    _emit(
        {
            "n_total": campaign.design.n,
            "iterations": len(campaign.history),
            "best_point": list(point.levels),
            "best_value": value,
        }
    )
    return EXIT_OK


def _parse_path(text: str) -> list[int]:
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def _cmd_simulate(args) -> int:
    levels = _parse_path(args.path)
    if args.problem == "rover":
        course = (
            simulators.load_course(args.config) if args.config
            else simulators.default_rover()
        )
        res = simulators.rover_cost(course, encoding.Point(tuple(levels), 9))
    else:
        if args.config:
            world = simulators.load_world(args.config)
        else:
            world = (
                simulators.default_maze() if args.problem == "maze"
                else simulators.default_snake()
            )
        x = encoding.Point(tuple(levels), 5)
        res = (
            simulators.maze_cost(world, x) if args.problem == "maze"
            else simulators.snake_reward(world, x)
        )
    _emit(
        {
            "problem": args.problem,
            "value": res.value,
            "trace": [dict(t, position=list(t["position"])) for t in res.trace],
        }
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    plan = bench.load_plan(args.plan)
    report = bench.run_bench(plan)
    bench.write_report(report, args.out)
    _emit(
        {
            "rows": len(report.rows),
            "out": args.out,
            "aggregate": list(report.summary),
        }
    )
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.kind == "maximin":
        q_star, design = maximin.brute_force_maximin(args.n, args.d, args.M)
        _emit(
            {
                "kind": "maximin",
                "q_star": q_star,
                "design": [list(p.levels) for p in design.points],
            }
        )
    else:
        model = gp.load_model(args.model)
        spec = acquisition.AcquisitionSpec(args.acq, args.lam, 0.0)
        point, value = acquisition.enumerate_acquisition(model, spec)
        _emit(
            {
                "kind": "acquisition",
                "point": list(point.levels),
                "value": value,
            }
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quip", description="Exact designs and sequential "
                "acquisition over categorical lattices.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[], help="feasible-distance bounds")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--M", type=int, required=True)
    b.set_defaults(func=_cmd_bound)

    d = sub.add_parser("design", help="exact maximin design")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--d", type=int, required=True)
    d.add_argument("--M", type=int, required=True)
    d.add_argument("--time-limit", type=float, default=None)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default=None)
    d.set_defaults(func=_cmd_design)

    f = sub.add_parser("fit", help="fit the GP surrogate by MLE")
    f.add_argument("--design", required=True)
    f.add_argument("--responses", required=True)
    f.add_argument("--M", type=int, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default=None)
    f.set_defaults(func=_cmd_fit)

    s = sub.add_parser("suggest", help="optimize an acquisition criterion")
    s.add_argument("--model", required=True)
    s.add_argument("--acq", choices=["alm", "ucb"], required=True)
    s.add_argument("--lambda", dest="lam", type=float,
                   default=acquisition.DEFAULT_LAMBDA)
    s.add_argument("--gap", type=float, default=acquisition.DEFAULT_GAP)
    s.add_argument("--time-limit", type=float, default=None)
    s.set_defaults(func=_cmd_suggest)

    q = sub.add_parser("sequential", help="run a sequential design campaign")
    q.add_argument("--simulator", choices=["maze", "snake", "rover", "csv"],
                   required=True)
    q.add_argument("--acq", choices=["alm", "ucb"], required=True)
    q.add_argument("--n-init", type=int, default=20)
    q.add_argument("--n-seq", type=int, default=30)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--d", type=int, default=None)
    q.add_argument("--M", type=int, default=None)
    q.add_argument("--table", default=None,
                   help="lookup table CSV for the csv simulator")
    q.add_argument("--init-design", default=None)
    q.add_argument("--lambda", dest="lam", type=float,
                   default=acquisition.DEFAULT_LAMBDA)
    q.add_argument("--gap", type=float, default=acquisition.DEFAULT_GAP)
    q.add_argument("--time-limit", type=float, default=None)
    q.add_argument("--out", default=None)
    q.set_defaults(func=_cmd_sequential)

    m = sub.add_parser("simulate", help="evaluate one simulator path")
    m.add_argument("--problem", choices=["maze", "snake", "rover"], required=True)
    m.add_argument("--config", default=None)
    m.add_argument("--path", required=True, help="comma-separated levels")
    m.set_defaults(func=_cmd_simulate)

    be = sub.add_parser("bench", help="run a benchmark plan")
    be.add_argument("--plan", required=True)
    be.add_argument("--out", required=True)
    be.set_defaults(func=_cmd_bench)

    o = sub.add_parser("oracle", help="brute-force testing oracles")
    osub = o.add_subparsers(dest="kind", required=True)
    om = osub.add_parser("maximin")
    om.add_argument("--n", type=int, required=True)
    om.add_argument("--d", type=int, required=True)
    om.add_argument("--M", type=int, required=True)
    om.set_defaults(func=_cmd_oracle)
    oa = osub.add_parser("acquisition")
    oa.add_argument("--model", required=True)
    oa.add_argument("--acq", choices=["alm", "ucb"], required=True)
    oa.add_argument("--lambda", dest="lam", type=float,
                    default=acquisition.DEFAULT_LAMBDA)
    oa.set_defaults(func=_cmd_oracle)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
