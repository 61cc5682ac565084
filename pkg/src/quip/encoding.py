"""Categorical points, designs, one-hot encoding and Hamming geometry.

Levels are 1-indexed everywhere: a point with d factors and M levels per
factor lives in {1..M}^d. Every point carries its own (d, M) so dimension
mismatches surface as errors instead of silent corruption.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1


class DimensionMismatchError(ValueError):
    """Two points or designs do not share the same (d, M)."""


class MalformedRowError(ValueError):
    """A one-hot row does not sum to exactly one."""


class NeedsTwoPointsError(ValueError):
    """Operation requires a design with at least two points."""


@dataclass(frozen=True)
class Point:
    """A single categorical point: 1-indexed levels in {1..M}^d."""

    levels: tuple[int, ...]
    M: int

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))
        if len(self.levels) < 1:
            raise ValueError("point needs at least one factor")
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        for j, v in enumerate(self.levels):
            if not 1 <= v <= self.M:
                raise ValueError(f"level {v} at factor {j} outside 1..{self.M}")

    @property
    def d(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class Design:
    """An ordered collection of n points sharing (d, M).

    Duplicate points are representable; they form a valid degenerate
    design with minimum pairwise distance 0.
    """

    points: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("design needs at least one point")
        d, M = self.points[0].d, self.points[0].M
        for p in self.points[1:]:
            if p.d != d or p.M != M:
                raise DimensionMismatchError(
                    f"point ({p.d},{p.M}) does not match design ({d},{M})"
                )

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points[0].d

    @property
    def M(self) -> int:
        return self.points[0].M

    def as_array(self) -> np.ndarray:
        """n x d integer array of 1-indexed levels."""
        return np.array([p.levels for p in self.points], dtype=np.int64)


def design_from_array(levels, M: int) -> Design:
    arr = np.asarray(levels, dtype=np.int64)
    return Design(tuple(Point(tuple(row), M) for row in arr))


def encode(x: Point) -> np.ndarray:
    """One-hot encode a point as a d x M binary matrix with unit row sums."""
    out = np.zeros((x.d, x.M), dtype=np.int8)
    out[np.arange(x.d), np.asarray(x.levels) - 1] = 1
    return out


def decode(m, M: int | None = None) -> Point:
    """Invert :func:`encode`. Raises MalformedRowError if a row sum is not 1."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise MalformedRowError("one-hot matrix must be 2-dimensional")
    sums = m.sum(axis=1)
    if not np.all(sums == 1):
        bad = int(np.nonzero(sums != 1)[0][0])
        raise MalformedRowError(f"row {bad} sums to {int(sums[bad])}, expected 1")
    levels = tuple(int(k) + 1 for k in m.argmax(axis=1))
    return Point(levels, M if M is not None else m.shape[1])


def encode_design(D: Design) -> np.ndarray:
    """One-hot encode a design as an n x d x M binary tensor."""
    return np.stack([encode(p) for p in D.points])


def hamming(x: Point, y: Point) -> int:
    """Number of dissimilar entries between two points."""
    if x.d != y.d or x.M != y.M:
        raise DimensionMismatchError(
            f"cannot compare ({x.d},{x.M}) against ({y.d},{y.M})"
        )
    return sum(a != b for a, b in zip(x.levels, y.levels))


def min_pairwise_distance(D: Design) -> int:
    """Minimum Hamming distance over all point pairs of the design."""
    if D.n < 2:
        raise NeedsTwoPointsError("min pairwise distance needs n >= 2")
    arr = D.as_array()
    best = D.d
    for i, j in itertools.combinations(range(D.n), 2):
        dist = int(np.count_nonzero(arr[i] != arr[j]))
        if dist < best:
            best = dist
            if best == 0:
                break
    return best


def all_points(d: int, M: int):
    """Iterate the full lattice {1..M}^d in lexicographic order."""
    for levels in itertools.product(range(1, M + 1), repeat=d):
        yield Point(levels, M)


def design_to_dict(D: Design) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": D.n,
        "d": D.d,
        "M": D.M,
        "points": [list(p.levels) for p in D.points],
    }


def design_from_dict(obj: dict) -> Design:
    for field in ("n", "d", "M", "points"):
        if field not in obj:
            raise ValueError(f"design file missing field '{field}'")
    M = int(obj["M"])
    pts = []
    for i, row in enumerate(obj["points"]):
        if len(row) != obj["d"]:
            raise ValueError(f"point {i} has {len(row)} levels, expected {obj['d']}")
        pts.append(Point(tuple(int(v) for v in row), M))
    if len(pts) != obj["n"]:
        raise ValueError(f"file declares n={obj['n']} but has {len(pts)} points")
    return Design(tuple(pts))


def save_design(D: Design, path) -> None:
    with open(path, "w") as fh:
        json.dump(design_to_dict(D), fh, indent=2)
        fh.write("\n")


def load_design(path, M: int | None = None) -> Design:
    """Read a design from JSON, or from headerless CSV (one point per row).

    CSV has no (d, M) header, so `M` must be supplied for CSV input;
    it defaults to the largest level present.
    """
    text = open(path).read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return design_from_dict(json.loads(text))
    rows = [
        [int(v) for v in row if v.strip() != ""]
        for row in csv.reader(text.splitlines())
        if row
    ]
    if not rows:
        raise ValueError(f"no points found in {path}")
    level_max = max(max(r) for r in rows)
    M = M if M is not None else max(level_max, 2)
    return Design(tuple(Point(tuple(r), M) for r in rows))
