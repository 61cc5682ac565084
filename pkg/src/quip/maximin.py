"""Exact maximin initial designs via iterated feasibility solves.

The feasibility question "does an n-point design in {1..M}^d with minimum
pairwise Hamming distance >= q exist?" is answered by a two-phase solver:

1. a cheap seeded incumbent search (warm-start repair, then randomized
   greedy row construction) that can only prove feasibility, and
2. a complete depth-first backtracking search over canonical designs that
   certifies infeasibility by exhaustion.

The complete search assigns one cell at a time (row-major) and breaks the
problem's symmetries -- row permutations and independent per-column level
relabelings -- by restricting to canonical matrices: rows in non-decreasing
lexicographic order, and within each column a level k+1 may appear only
after level k has appeared above it. Every orbit of the symmetry group
contains its lexicographically minimal matrix, which satisfies both
restrictions, so the restriction is sound for infeasibility certificates.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import q0
from .encoding import Design, design_from_array, min_pairwise_distance

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIME_LIMIT = "time_limit"


class InvalidDistanceError(ValueError):
    """Requested distance q outside {0..d}."""


class TooLargeError(ValueError):
    """Brute-force enumeration would exceed the size guard."""


@dataclass(frozen=True)
class FeasibilityInstance:
    n: int
    d: int
    M: int
    q: int
    time_limit: float | None = None
    warm_start: Design | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.M < 2:
            raise ValueError(f"bad instance ({self.n},{self.d},{self.M})")
        if not 0 <= self.q <= self.d:
            raise InvalidDistanceError(f"q={self.q} outside 0..{self.d}")


@dataclass(frozen=True)
class SolveReport:
    status: str  # FEASIBLE | INFEASIBLE | TIME_LIMIT
    design: Design | None
    q: int
    achieved_q: int | None
    nodes_explored: int
    elapsed: float


@dataclass(frozen=True)
class MaximinResult:
    design: Design
    q_star: int
    certified: bool  # False when a time limit left q_star a lower bound only
    trace: tuple[SolveReport, ...] = field(default=())


def _achieved_q(arr: np.ndarray) -> int:
    n, d = arr.shape
    if n < 2:
        return d
    best = d
    for i in range(n - 1):
        mism = np.count_nonzero(arr[i + 1 :] != arr[i], axis=1)
        best = min(best, int(mism.min()))
        if best == 0:
            break
    return best


def _report(arr: np.ndarray, M: int, q: int, nodes: int, t0: float) -> SolveReport:
    D = design_from_array(arr, M)
    return SolveReport(FEASIBLE, D, q, _achieved_q(arr), nodes, time.perf_counter() - t0)


def _repair(arr: np.ndarray, M: int, q: int, rng: np.random.Generator) -> bool:
    """Bounded single-cell local search lifting `arr` to min distance >= q.

    Mutates arr in place; budget of 10*n*d moves. Returns True on success.
    """
    n, d = arr.shape
    budget = 10 * n * d
    for _ in range(budget):
        viol = None
        for i in range(n):
            mism = np.count_nonzero(arr[:i] != arr[i], axis=1)
            short = np.nonzero(mism < q)[0]
            if short.size:
                viol = (int(short[0]), i)
                break
        if viol is None:
            return True
        a, b = viol
        # move one cell of the later row off the earlier row's level
        eq_cols = np.nonzero(arr[a] == arr[b])[0]
        j = int(rng.choice(eq_cols))
        choices = [v for v in range(1, M + 1) if v != arr[b, j]]
        arr[b, j] = choices[int(rng.integers(len(choices)))]
    return False


def _greedy_rows(
    n: int, d: int, M: int, q: int, rng: np.random.Generator, attempts: int = 60
) -> np.ndarray | None:
    """Randomized greedy construction: add rows one at a time, each sampled
    until it sits at distance >= q from all previous rows."""
    if q <= 0:
        return np.ones((n, d), dtype=np.int64)
    tries_per_row = 120
    for _ in range(attempts):
        rows = [np.ones(d, dtype=np.int64)]
        ok = True
        while len(rows) < n:
            placed = False
            prev = np.array(rows)
            for _ in range(tries_per_row):
                cand = rng.integers(1, M + 1, size=d)
                if np.count_nonzero(prev != cand, axis=1).min() >= q:
                    rows.append(cand)
                    placed = True
                    break
            if not placed:
                ok = False
                break
        if ok:
            return np.array(rows)
    return None


def _canonicalize(arr: np.ndarray) -> np.ndarray:
    """Map a design to its symmetry-canonical form: relabel each column by
    first occurrence, then sort rows lexicographically (iterated to a
    fixed point, bounded)."""
    cur = arr.copy()
    for _ in range(8):
        nxt = cur.copy()
        for j in range(cur.shape[1]):
            remap: dict[int, int] = {}
            for v in cur[:, j]:
                if int(v) not in remap:
                    remap[int(v)] = len(remap) + 1
            nxt[:, j] = [remap[int(v)] for v in cur[:, j]]
        order = np.lexsort(nxt.T[::-1])
        nxt = nxt[order]
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return cur


class _CompleteSearch:
    """Depth-first complete search over canonical designs."""

    def __init__(self, inst: FeasibilityInstance, hint: np.ndarray | None):
        self.n, self.d, self.M, self.q = inst.n, inst.d, inst.M, inst.q
        self.grid = np.zeros((self.n, self.d), dtype=np.int64)
        self.hint = hint
        self.nodes = 0
        self.deadline = (
            time.perf_counter() + inst.time_limit if inst.time_limit else None
        )
        self.timed_out = False
        self.solution: np.ndarray | None = None
        # max level used so far per column (value-precedence state)
        self.maxused = np.zeros(self.d, dtype=np.int64)

    def run(self) -> None:
        # row 0 is all-ones by value precedence; distance constraints
        # involve no pair yet.
        self.grid[0, :] = 1
        self.maxused[:] = 1
        if self.n == 1:
            self.solution = self.grid.copy()
            return
        self._fill(1, 0, np.zeros(1, dtype=np.int64), True)

    def _fill(self, i: int, j: int, mism: np.ndarray, tight: bool) -> bool:
        """Assign cell (i, j). `mism` holds mismatch counts of the partial
        row i against rows 0..i-1 over columns < j. `tight` means the row-i
        prefix equals the row-(i-1) prefix so far. Returns True to stop."""
        if j == self.d:
            return self._next_row(i)
        n, d, q = self.n, self.d, self.q
        rem_after = d - j - 1
        lo = int(self.grid[i - 1, j]) if tight else 1
        hi = min(self.M, int(self.maxused[j]) + 1)
        values = range(lo, hi + 1)
        if self.hint is not None:
            h = int(self.hint[i, j])
            if lo <= h <= hi:
                values = [h] + [v for v in range(lo, hi + 1) if v != h]
        for v in values:
            self.nodes += 1
            if self.deadline is not None and self.nodes % 2048 == 0:
                if time.perf_counter() > self.deadline:
                    self.timed_out = True
                    return True
            new_mism = mism + (self.grid[:i, j] != v)
            if np.any(new_mism + rem_after < q):
                continue
            self.grid[i, j] = v
            old_max = self.maxused[j]
            if v > old_max:
                self.maxused[j] = v
            if self._fill(i, j + 1, new_mism, tight and v == lo):
                return True
            self.maxused[j] = old_max
        return False

    def _next_row(self, i: int) -> bool:
        if i + 1 == self.n:
            self.solution = self.grid.copy()
            return True
        return self._fill(i + 1, 0, np.zeros(i + 1, dtype=np.int64), True)


def solve_feasibility(inst: FeasibilityInstance) -> SolveReport:
    """Decide whether a design with min pairwise distance >= q exists.

    FEASIBLE reports carry a witness design; INFEASIBLE is certified by
    exhaustion of the complete search and is never emitted after a
    time-limit abort.
    """
    t0 = time.perf_counter()
    n, d, M, q = inst.n, inst.d, inst.M, inst.q

    if q == 0 or n == 1:
        arr = np.ones((n, d), dtype=np.int64)
        if inst.warm_start is not None:
            arr = inst.warm_start.as_array()
        return _report(arr, M, q, 0, t0)

    rng = np.random.default_rng(
        np.random.SeedSequence([inst.seed, n, d, M, q, 0x51D]).generate_state(4)
    )

    # Phase 1a: warm-start repair.
    hint = None
    if inst.warm_start is not None:
        ws = inst.warm_start
        if (ws.n, ws.d, ws.M) != (n, d, M):
            raise ValueError("warm start shape does not match instance")
        arr = ws.as_array().copy()
        if _repair(arr, M, q, rng):
            return _report(arr, M, q, 0, t0)
        hint = _canonicalize(ws.as_array())

    # Phase 1b: randomized greedy construction.
    greedy = _greedy_rows(n, d, M, q, rng)
    if greedy is not None:
        return _report(greedy, M, q, 0, t0)

    # Phase 2: complete search with symmetry breaking.
    search = _CompleteSearch(inst, hint)
    search.run()
    elapsed = time.perf_counter() - t0
    if search.solution is not None:
        return _report(search.solution, M, q, search.nodes, t0)
    if search.timed_out:
        return SolveReport(TIME_LIMIT, None, q, None, search.nodes, elapsed)
    return SolveReport(INFEASIBLE, None, q, None, search.nodes, elapsed)


def optimize_maximin(
    n: int,
    d: int,
    M: int,
    time_limit: float | None = None,
    seed: int = 0,
) -> MaximinResult:
    """Maximin design driver: start from the guaranteed-feasible distance
    q0(n, d, M), then raise the target by one (warm-starting from the last
    witness) until the feasibility solve certifies infeasibility or the
    target exceeds d-1.

    When a feasibility solve times out, the incumbent design is returned
    with certified=False: q_star is then only a lower bound.
    """
    if n < 2:
        raise ValueError("optimize_maximin needs n >= 2")
    deadline = time.perf_counter() + time_limit if time_limit else None

    def remaining():
        if deadline is None:
            return None
        return max(0.05, deadline - time.perf_counter())

    qt = q0(n, d, M)
    trace: list[SolveReport] = []
    rep = solve_feasibility(
        FeasibilityInstance(n, d, M, qt, time_limit=remaining(), seed=seed)
    )
    trace.append(rep)
    if rep.status == TIME_LIMIT:
        raise TimeoutError(
            f"feasibility solve at the guaranteed distance q0={qt} timed out"
        )
    if rep.status == INFEASIBLE:
        # only reachable when n > M**d: fall back to the duplicate design
        rep = solve_feasibility(FeasibilityInstance(n, d, M, 0, seed=seed))
        trace.append(rep)
        return MaximinResult(rep.design, 0, True, tuple(trace))

    best = rep.design
    q_star = qt
    certified = True
    qt += 1
    while qt <= d - 1:
        rep = solve_feasibility(
            FeasibilityInstance(
                n, d, M, qt, time_limit=remaining(), warm_start=best, seed=seed
            )
        )
        trace.append(rep)
        if rep.status == FEASIBLE:
            best = rep.design
            q_star = qt
            qt += 1
        elif rep.status == INFEASIBLE:
            break
        else:  # time limit: no infeasibility claim is made
            certified = False
            break
    return MaximinResult(best, q_star, certified, tuple(trace))


def brute_force_maximin(
    n: int, d: int, M: int, guard: int = 10**8
) -> tuple[int, Design]:
    """Exact maximin optimum, independent of the feasibility solver.

    Tries distance targets q = d, d-1, ... and searches for n lattice
    points that are pairwise at distance >= q (a clique in the distance-q
    graph, found by depth-first search with candidate-set filtering over
    increasing indices). The first point is pinned to the all-ones corner,
    which is sound because per-column level relabeling maps any design
    point there without changing distances. If no clique exists even at
    q = 1 (n exceeds the lattice), the duplicate design at q = 0 remains.
    """
    from math import comb

    lattice = M**d
    if comb(lattice + n - 1, n) > guard:
        raise TooLargeError(
            f"enumeration for (n={n}, d={d}, M={M}) exceeds guard"
        )
    pts = np.array(
        list(itertools.product(range(1, M + 1), repeat=d)), dtype=np.int64
    )
    dist = (pts[:, None, :] != pts[None, :, :]).sum(axis=2)

    chosen: list[int] = []

    def rec(cand: np.ndarray, q: int) -> bool:
        if len(chosen) == n:
            return True
        if len(chosen) + cand.size < n:
            return False
        for i in range(cand.size):
            idx = int(cand[i])
            rest = cand[i + 1 :]
            chosen.append(idx)
            if rec(rest[dist[idx, rest] >= q], q):
                return True
            chosen.pop()
        return False

    for q in range(d, 0, -1):
        chosen.clear()
        chosen.append(0)
        first = np.arange(1, lattice)
        if rec(first[dist[0, first] >= q], q):
            return q, design_from_array(pts[chosen], M)
    return 0, design_from_array(pts[[0] * n], M)
