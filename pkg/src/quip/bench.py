"""Benchmark harness: seeded replicated comparisons of sequential-design
methods on the shipped simulators, plus bound-vs-oracle scatter data.

Output is data, not plots: a per-iteration row table (CSV) and an
aggregated summary (JSON) with the median and the empirical 2.5/97.5
percentile band across replications.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    AcquisitionSpec,
    candidate_set_acquisition,
    enumerate_acquisition,
    optimize_acquisition,
    random_point,
)
from .encoding import Design, Point, design_from_array
from .gp import FitConfig, fit_mle
from .maximin import FeasibilityInstance, solve_feasibility
from .sequential import rrmse, run_campaign
from .simulators import (
    default_maze,
    default_rover,
    default_snake,
    maze_cost,
    rover_cost,
    snake_reward,
)

SCHEMA_VERSION = 1
METHODS = ("quip", "random", "candidate")


@dataclass(frozen=True)
class BenchPlan:
    problem: str  # "maze" | "snake" | "rover"
    methods: tuple[str, ...] = METHODS
    replications: int = 20
    seed: int = 0
    n_init: int = 20
    n_seq: int = 30
    d: int | None = None  # None: the problem's native path length
    acq: str = "ucb"
    lam: float = 2.96
    gap_tolerance: float = 0.10
    time_limit: float | None = 5.0  # per acquisition solve
    candidate_c: int = 2000
    mode: str = "opt"  # "opt" (best-so-far) or "active" (adds RRMSE)
    test_size: int = 500
    test_seed: int = 12345

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.mode not in ("opt", "active"):
            raise ValueError("mode must be 'opt' or 'active'")


@dataclass(frozen=True)
class BenchReport:
    plan: BenchPlan
    rows: tuple[dict, ...]
    summary: tuple[dict, ...] = field(default=())


def problem_objective(problem: str, d: int | None = None):
    """(d, M, objective) for a problem id; objective is maximization-signed
    (costs are negated)."""
    if problem == "maze":
        world = default_maze()
        dd = d or 12
        return dd, 5, lambda x: -maze_cost(world, x).value
    if problem == "snake":
        world = default_snake()
        dd = d or 12
        return dd, 5, lambda x: snake_reward(world, x).value
    if problem == "rover":
        course = default_rover()
        dd = d or 8
        return dd, 9, lambda x: rover_cost(course, x).value * -1.0
    raise ValueError(f"unknown problem {problem!r}")


def _rep_seed(master: int, rep: int) -> int:
    return int(np.random.SeedSequence([master, rep]).generate_state(1)[0])


def initial_design(n: int, d: int, M: int, seed: int) -> Design:
    """Seeded space-filling initial design: a witness at the guaranteed
    distance q0 (fast; the full maximin optimum is not needed here)."""
    from .bounds import q0

    rep = solve_feasibility(FeasibilityInstance(n, d, M, q=q0(n, d, M), seed=seed))
    assert rep.design is not None
    return rep.design


def _test_set(d: int, M: int, size: int, seed: int, objective):
    rng = np.random.default_rng(seed)
    X = rng.integers(1, M + 1, size=(size, d))
    y = np.array([objective(Point(tuple(int(v) for v in r), M)) for r in X])
    return X, y


def _rrmse_on_test(D: Design, f: np.ndarray, X_test, y_test, fit_seed: int):
    from .gp import predict_batch

    model = fit_mle(D, f, FitConfig(n_starts=4, seed=fit_seed))
    mean, _ = predict_batch(model, X_test)
    return rrmse(y_test, mean)


def _run_arm(method: str, plan: BenchPlan, rep: int, d: int, M: int, objective,
             init: Design, f0: np.ndarray, test=None) -> list[dict]:
    seed = _rep_seed(plan.seed, rep)
    spec = AcquisitionSpec(plan.acq, plan.lam, plan.gap_tolerance, plan.time_limit)
    rows: list[dict] = []

    def row(it, best, elapsed, extra=None):
        r = {
            "method": method,
            "replication": rep,
            "seed": seed,
            "iteration": it,
            "best_so_far": best,
            "wall_time": elapsed,
            "rrmse": None,
            "candidate_c": plan.candidate_c if method == "candidate" else None,
        }
        if extra:
            r.update(extra)
        return r

    points = list(init.points)
    f = f0.copy()
    best = float(f.max())
    t_start = time.perf_counter()
    rows.append(row(0, best, 0.0))

    if method == "quip":
        c = run_campaign(init, f0, objective, spec, plan.n_seq, seed=seed,
                         fit_config=FitConfig(n_starts=4, seed=seed))
        f = c.responses
        points = list(c.design.points)
        for h in c.history:
            best = max(best, h["response"])
            rows.append(row(h["iteration"], best, h["wall_time"]))
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBE]))
        for it in range(1, plan.n_seq + 1):
            t0 = time.perf_counter()
            D = Design(tuple(points))
            if method == "random":
                x = random_point(d, M, rng)
            else:  # candidate
                model = fit_mle(D, f, FitConfig(n_starts=4, seed=seed))
                x, _ = candidate_set_acquisition(
                    model, spec, plan.candidate_c,
                    int(rng.integers(0, 2**31)),
                )
            y = float(objective(x))
            points.append(x)
            f = np.append(f, y)
            best = max(best, y)
            rows.append(row(it, best, time.perf_counter() - t0))

    if plan.mode == "active" and test is not None:
        X_test, y_test = test
        # RRMSE of the final fitted model per arm (active-learning metric)
        final = _rrmse_on_test(Design(tuple(points)), f, X_test, y_test, seed)
        rows[-1]["rrmse"] = final
    rows[-1]["total_time"] = time.perf_counter() - t_start
    return rows


def aggregate(rows) -> list[dict]:
    """Median and empirical 2.5/97.5 percentiles of best-so-far per
    (method, iteration)."""
    keys = sorted({(r["method"], r["iteration"]) for r in rows})
    out = []
    for method, it in keys:
        vals = np.array(
            [r["best_so_far"] for r in rows
             if r["method"] == method and r["iteration"] == it]
        )
        out.append(
            {
                "method": method,
                "iteration": it,
                "median": float(np.median(vals)),
                "p2_5": float(np.percentile(vals, 2.5)),
                "p97_5": float(np.percentile(vals, 97.5)),
                "replications": int(vals.size),
            }
        )
    return out


def run_bench(plan: BenchPlan) -> BenchReport:
    """Run every (method, replication) arm of the plan.

    All methods within a replication share the same seeded initial design
    and initial responses, so differences are attributable to the
    acquisition strategy alone.
    """
    d, M, objective = problem_objective(plan.problem, plan.d)
    test = None
    if plan.mode == "active":
        test = _test_set(d, M, plan.test_size, plan.test_seed, objective)
    rows: list[dict] = []
    for rep in range(plan.replications):
        seed = _rep_seed(plan.seed, rep)
        init = initial_design(plan.n_init, d, M, seed)
        f0 = np.array([objective(p) for p in init.points])
        for method in plan.methods:
            rows.extend(_run_arm(method, plan, rep, d, M, objective, init, f0, test))
    rows.sort(key=lambda r: (r["method"], r["seed"], r["iteration"]))
    return BenchReport(plan, tuple(rows), tuple(aggregate(rows)))


def bound_oracle_scatter(
    replications: int = 100,
    seed: int = 0,
    d: int = 8,
    M: int = 3,
    n: int = 20,
    acq: str = "ucb",
    lam: float = 2.96,
    gap_tolerance: float = 0.10,
) -> list[dict]:
    """Certified-bound vs enumeration-oracle pairs on fitted snake models.

    Each replication fits a GP to the snake reward at a random distinct
    design in {1..M}^d, solves the acquisition with the gap stopping rule,
    and records the certified bound alongside the true enumerated optimum.
    Levels are interpreted as the first M of the 5 grid actions.
    """
    world = default_snake()
    spec = AcquisitionSpec(acq, lam, gap_tolerance)
    spec0 = AcquisitionSpec(acq, lam, 0.0)

    def objective(levels):
        return snake_reward(world, Point(tuple(levels), 5)).value

    rows = []
    for rep in range(replications):
        rng = np.random.default_rng(np.random.SeedSequence([seed, rep, 0x5CA7]))
        seen = set()
        X = []
        while len(X) < n:
            cand = tuple(int(v) for v in rng.integers(1, M + 1, size=d))
            if cand not in seen:
                seen.add(cand)
                X.append(cand)
        D = design_from_array(np.array(X), M)
        f = np.array([objective(p.levels) for p in D.points])
        model = fit_mle(D, f, FitConfig(n_starts=4, seed=rep))
        rep_solve = optimize_acquisition(model, spec)
        _, true_opt = enumerate_acquisition(model, spec0)
        bound = rep_solve.certified_bound
        rows.append(
            {
                "replication": rep,
                "certified_bound": float(bound),
                "incumbent": float(rep_solve.best_value),
                "true_optimum": float(true_opt),
                "conservative": bool(bound >= true_opt - 1e-9),
                "relative_slack": float(
                    (bound - true_opt) / max(abs(true_opt), 1e-12)
                ),
            }
        )
    return rows


def write_rows_csv(rows, path) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)


def write_report(report: BenchReport, out_dir) -> None:
    """Emit rows.csv and summary.json under out_dir (created if missing)."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    write_rows_csv(report.rows, os.path.join(out_dir, "rows.csv"))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "plan": {
            "problem": report.plan.problem,
            "methods": list(report.plan.methods),
            "replications": report.plan.replications,
            "seed": report.plan.seed,
            "n_init": report.plan.n_init,
            "n_seq": report.plan.n_seq,
            "d": report.plan.d,
            "acq": report.plan.acq,
            "lam": report.plan.lam,
            "gap_tolerance": report.plan.gap_tolerance,
            "candidate_c": report.plan.candidate_c,
            "mode": report.plan.mode,
        },
        "aggregate": list(report.summary),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def plan_from_dict(obj: dict) -> BenchPlan:
    kwargs = {k: v for k, v in obj.items() if k != "schema_version"}
    if "methods" in kwargs:
        kwargs["methods"] = tuple(kwargs["methods"])
    return BenchPlan(**kwargs)


def load_plan(path) -> BenchPlan:
    with open(path) as fh:
        return plan_from_dict(json.load(fh))
