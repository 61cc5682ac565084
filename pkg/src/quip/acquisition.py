"""Acquisition criteria over the categorical lattice and their exact
global optimization.

Two criteria are supported, both derived from the fitted surrogate:

* ALM: pick the point of maximum posterior variance. Internally this
  minimizes the quadratic form Q(x) = g' W g with g the correlation
  vector to the design and W the inverse correlation matrix, since
  var = tau2 * (1 - Q).
* UCB: pick the point maximizing mean + lambda * stddev.

The global optimizer is a best-first branch-and-bound over one-factor-at-
a-time assignments. With a subset of factors fixed, each correlation
g_r factors into an exact prefix times a product of free-factor terms,
each in [exp(-theta_l), 1]; this sandwiches every g_r in an interval
[L_r, U_r] from which admissible bounds on Q, the mean, and the standard
deviation follow by splitting coefficient signs. Bounds are exact at
leaves, so the first fully-assigned node popped from the best-first queue
is a certified global optimum.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .encoding import Design, Point
from .gp import GpModel, cross_correlation
from .maximin import TooLargeError

DEFAULT_LAMBDA = 2.96
DEFAULT_GAP = 0.10

STATUS_OPTIMAL = "optimal"
STATUS_GAP = "gap_reached"
STATUS_TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class AcquisitionSpec:
    kind: str  # "alm" or "ucb"
    lam: float = DEFAULT_LAMBDA
    gap_tolerance: float = DEFAULT_GAP
    time_limit: float | None = None

    def __post_init__(self):
        if self.kind not in ("alm", "ucb"):
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.kind == "ucb" and self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not 0.0 <= self.gap_tolerance < 1.0:
            raise ValueError("gap tolerance must lie in [0, 1)")


@dataclass(frozen=True)
class AcqSolveReport:
    best_point: Point
    best_value: float  # maximization convention (variance for ALM)
    certified_bound: float
    relative_gap: float
    nodes: int
    status: str
    elapsed: float


def eval_alm(model: GpModel, x: Point) -> float:
    """The quadratic form Q(x) = g' Gamma^{-1} g minimized by ALM;
    the posterior variance is tau2 * (1 - Q)."""
    g = cross_correlation(
        np.asarray([x.levels]), model.design.as_array(), model.params.theta
    )[0]
    v = solve_triangular(model.chol, g, lower=True)
    return float(v @ v)


def eval_ucb(model: GpModel, x: Point, lam: float = DEFAULT_LAMBDA) -> float:
    from .gp import predict

    mean, var = predict(model, x)
    return mean + lam * np.sqrt(var)


def _objective_batch(model: GpModel, X_new: np.ndarray, spec: AcquisitionSpec):
    """Vectorized acquisition values (maximization convention)."""
    from .gp import predict_batch

    mean, var = predict_batch(model, X_new)
    if spec.kind == "alm":
        return var
    return mean + spec.lam * np.sqrt(var)


class _BnB:
    """Best-first branch-and-bound over per-factor level assignments."""

    def __init__(self, model: GpModel, spec: AcquisitionSpec):
        self.model = model
        self.spec = spec
        self.X = model.design.as_array()
        self.n, self.d = self.X.shape
        self.M = model.design.M
        theta = model.params.theta
        self.order = np.argsort(-theta, kind="stable")  # most influential first
        self.theta = theta
        self.decay = np.exp(-theta)
        W = cho_solve((model.chol, True), np.eye(self.n))
        self.Wp = np.maximum(W, 0.0)
        self.Wn = np.minimum(W, 0.0)
        self.ap = np.maximum(model.alpha, 0.0)
        self.an = np.minimum(model.alpha, 0.0)
        self.tau2 = model.params.tau2
        self.tau = np.sqrt(self.tau2)
        self.mu = model.params.mu
        # product of free-factor minimum terms for each prefix depth
        free_min = np.ones(self.d + 1)
        for depth in range(self.d - 1, -1, -1):
            free_min[depth] = free_min[depth + 1] * self.decay[self.order[depth]]
        self.free_min = free_min

    def _vectors(self, levels: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Correlation interval [L, U] per training point for a prefix."""
        U = np.ones(self.n)
        for depth, v in enumerate(levels):
            j = self.order[depth]
            U = U * np.where(self.X[:, j] == v, 1.0, self.decay[j])
        L = U * self.free_min[len(levels)]
        return L, U

    def _bound(self, L: np.ndarray, U: np.ndarray) -> float:
        """Admissible upper bound on the objective over the subtree."""
        q_low = max(0.0, float(L @ self.Wp @ L + U @ self.Wn @ U))
        var_high = self.tau2 * max(0.0, 1.0 - q_low)
        if self.spec.kind == "alm":
            return var_high
        mean_high = self.mu + float(U @ self.ap + L @ self.an)
        return mean_high + self.spec.lam * np.sqrt(var_high)

    def _leaf_value(self, levels_by_factor: np.ndarray) -> float:
        return float(
            _objective_batch(self.model, levels_by_factor[None, :], self.spec)[0]
        )

    def _to_factor_order(self, levels: tuple[int, ...]) -> np.ndarray:
        out = np.zeros(self.d, dtype=np.int64)
        out[self.order] = levels
        return out

    def solve(self) -> AcqSolveReport:
        t0 = time.perf_counter()
        deadline = t0 + self.spec.time_limit if self.spec.time_limit else None
        tol = self.spec.gap_tolerance

        counter = itertools.count()
        heap: list[tuple[float, int, tuple[int, ...]]] = []
        L0, U0 = self._vectors(())
        heapq.heappush(heap, (-self._bound(L0, U0), next(counter), ()))

        incumbent = -np.inf
        incumbent_levels: np.ndarray | None = None

        # seed incumbent with training points (always feasible re-selections)
        train_vals = _objective_batch(self.model, self.X, self.spec)
        k = int(np.argmax(train_vals))
        incumbent = float(train_vals[k])
        incumbent_levels = self.X[k].copy()

        nodes = 0
        status = STATUS_OPTIMAL
        open_bound: float | None = None  # bound of the abandoned subtree, if any

        while heap:
            neg_bound, _, levels = heapq.heappop(heap)
            bound = -neg_bound
            nodes += 1
            if bound <= incumbent + 1e-15:
                # remaining nodes are no better: incumbent is optimal
                break
            rel = (bound - incumbent) / max(abs(bound), 1e-12)
            if tol > 0 and rel <= tol:
                status = STATUS_GAP
                open_bound = bound
                break
            if deadline is not None and time.perf_counter() > deadline:
                status = STATUS_TIME_LIMIT
                open_bound = bound
                break
            depth = len(levels)
            if depth == self.d:
                # leaf bounds are exact, so this pop certifies optimality
                val = self._leaf_value(self._to_factor_order(levels))
                if val > incumbent:
                    incumbent = val
                    incumbent_levels = self._to_factor_order(levels)
                break
            L, U = self._vectors(levels)
            j = self.order[depth]
            for v in range(1, self.M + 1):
                match = self.X[:, j] == v
                Uc = U * np.where(match, 1.0, self.decay[j])
                Lc = Uc * self.free_min[depth + 1]
                child = levels + (v,)
                if depth + 1 == self.d:
                    val = self._leaf_value(self._to_factor_order(child))
                    if val > incumbent:
                        incumbent = val
                        incumbent_levels = self._to_factor_order(child)
                else:
                    b = self._bound(Lc, Uc)
                    if b > incumbent + 1e-15:
                        heapq.heappush(heap, (-b, next(counter), child))

        if status == STATUS_OPTIMAL:
            certified = incumbent
            rel_gap = 0.0
        else:
            # best-first: the popped (abandoned) bound dominates the heap
            certified = max(incumbent, open_bound if open_bound is not None else -np.inf)
            rel_gap = (certified - incumbent) / max(abs(certified), 1e-12)
        assert incumbent_levels is not None
        point = Point(tuple(int(v) for v in incumbent_levels), self.M)
        return AcqSolveReport(
            point, incumbent, certified, rel_gap, nodes, status,
            time.perf_counter() - t0,
        )


def optimize_acquisition(model: GpModel, spec: AcquisitionSpec) -> AcqSolveReport:
    """Exact (or gap-certified) global optimization of the acquisition.

    Re-selecting an existing design point is allowed: the criteria impose
    no exclusion, and for noiseless fits ALM never re-selects anyway since
    the variance vanishes at observed points.
    """
    if model.is_constant:
        # flat surrogate: every point is optimal; return the lattice origin
        point = Point((1,) * model.design.d, model.design.M)
        val = float(_objective_batch(model, np.asarray([point.levels]), spec)[0])
        return AcqSolveReport(point, val, val, 0.0, 0, STATUS_OPTIMAL, 0.0)
    return _BnB(model, spec).solve()


def lattice_array(d: int, M: int) -> np.ndarray:
    """Full lattice {1..M}^d as an M**d x d array in lexicographic order."""
    return np.array(
        list(itertools.product(range(1, M + 1), repeat=d)), dtype=np.int64
    )


def enumerate_acquisition(
    model: GpModel, spec: AcquisitionSpec, guard: int = 10**7
) -> tuple[Point, float]:
    """Exact optimum by full lattice enumeration (testing oracle).

    Ties break to the lexicographically smallest point.
    """
    d, M = model.design.d, model.design.M
    if M**d > guard:
        raise TooLargeError(f"lattice size {M}**{d} exceeds enumeration guard")
    best_val = -np.inf
    best_levels = None
    chunk = 65536
    full = lattice_array(d, M)
    for lo in range(0, full.shape[0], chunk):
        block = full[lo : lo + chunk]
        vals = _objective_batch(model, block, spec)
        k = int(np.argmax(vals))
        if vals[k] > best_val:  # strict: keeps the first (lex-least) argmax
            best_val = float(vals[k])
            best_levels = block[k]
    assert best_levels is not None
    return Point(tuple(int(v) for v in best_levels), M), best_val


def random_point(d: int, M: int, rng: np.random.Generator | int) -> Point:
    """Uniform draw from the lattice."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return Point(tuple(int(v) for v in rng.integers(1, M + 1, size=d)), M)


def candidate_set_acquisition(
    model: GpModel, spec: AcquisitionSpec, C: int, seed: int
) -> tuple[Point, float]:
    """Best of C uniform i.i.d. candidate points (Monte Carlo baseline).

    Candidates form a seed-determined stream, so enlarging C with a fixed
    seed only extends the candidate prefix.
    """
    if C < 1:
        raise ValueError("need at least one candidate")
    rng = np.random.default_rng(seed)
    d, M = model.design.d, model.design.M
    cands = rng.integers(1, M + 1, size=(C, d))
    vals = _objective_batch(model, cands, spec)
    k = int(np.argmax(vals))
    return Point(tuple(int(v) for v in cands[k]), M), float(vals[k])
