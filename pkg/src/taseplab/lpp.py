"""Last-passage percolation on the wedge.

The wedge is W = {(i, j): j >= 0, i + j >= 0}; admissible paths step east
(+1, 0) or northwest (-1, +1), and T(i, j) is the maximal total weight over
paths from the origin.  Under the change of coordinates c = i + j the wedge
becomes the quadrant {(c, j): 0 <= c, 0 <= j} and steps become right/up, so
the region feeding a target (i_t, j_t) is exactly the rectangle
[0, i_t + j_t] x [0, j_t]; every cell of it lies on some admissible path.

The row recurrence T[j, c] = Y[j, c] + max(T[j, c-1], T[j-1, c]) couples
cells within a row through the east term.  Writing S for the running sum of
Y along the row turns it into a running maximum:

    (T - S)[c] = max((T - S)[c-1], T[j-1, c] - S[c-1]),

which is `np.maximum.accumulate`, so each row costs a handful of vector
passes.  All row operations are exact for dyadic-rational weights, which the
small-instance equivalence tests exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .disorder import DisorderLaw, Environment, sample_environment, validate_law
from .errors import DomainError, ParameterError, PathError, ResourceError
from .parallel import run_ordered
from .streams import WEIGHT_STREAM, counter_exponential, derive_seed

DEFAULT_MAX_CELLS = 20_000_000


class WedgePoint(NamedTuple):
    i: int
    j: int


def in_wedge(i: int, j: int) -> bool:
    return j >= 0 and i + j >= 0


def in_cone(x: float, y: float) -> bool:
    """Membership in the continuum cone W' = {y >= 0, x + y >= 0}."""
    return y >= 0.0 and x + y >= 0.0


def sample_weight(env: Environment, weight_seed: int, point) -> float:
    """Cell weight Y_ij ~ Exp(alpha(i)), a pure function of (weight_seed, i, j)."""
    i, j = point
    if not in_wedge(i, j):
        raise DomainError(f"point ({i}, {j}) outside the wedge")
    return float(counter_exponential(weight_seed, i, j, WEIGHT_STREAM, env.rate(i)))


def _row_update(prev_row: np.ndarray, y_row: np.ndarray) -> np.ndarray:
    s = np.cumsum(y_row)
    b = np.empty_like(y_row)
    b[0] = prev_row[0]
    b[1:] = prev_row[1:] - s[:-1]
    return np.maximum.accumulate(b) + s


def _weight_rows(env: Environment, weight_seed: int, j_max: int, c_max: int):
    """Yield (j, y_row) for rows 0..j_max; row j holds Y at i = c - j."""
    alpha_win = env.rates_covering(-j_max, c_max)
    for j in range(j_max + 1):
        i_vec = np.arange(-j, c_max - j + 1, dtype=np.int64)
        start = j_max - j
        alphas = alpha_win[start : start + c_max + 1]
        yield j, counter_exponential(weight_seed, i_vec, j, WEIGHT_STREAM, alphas)


def _check_target(point) -> tuple[int, int]:
    i, j = int(point[0]), int(point[1])
    if not in_wedge(i, j):
        raise DomainError(f"target ({i}, {j}) outside the wedge")
    return i, j


@dataclass
class PassageTable:
    """Passage times over the full rectangle feeding the target.

    values[j, c] = T(c - j, j); weights holds the matching Y grid so paths
    can be revalidated against their summed weights.
    """

    i_target: int
    j_target: int
    values: np.ndarray
    weights: np.ndarray
    env: Environment | None = None
    weight_seed: int | None = None

    @property
    def c_max(self) -> int:
        return self.i_target + self.j_target

    def covers(self, i: int, j: int) -> bool:
        return 0 <= j <= self.j_target and 0 <= i + j <= self.c_max

    def value(self, i: int, j: int) -> float:
        if not self.covers(i, j):
            raise DomainError(f"point ({i}, {j}) not covered by the table")
        return float(self.values[j, i + j])

    def weight(self, i: int, j: int) -> float:
        if not self.covers(i, j):
            raise DomainError(f"point ({i}, {j}) not covered by the table")
        return float(self.weights[j, i + j])


def _table_from_grid(y: np.ndarray, i_t: int, j_t: int, env=None, weight_seed=None) -> PassageTable:
    t = np.empty_like(y)
    t[0] = np.cumsum(y[0])
    for j in range(1, j_t + 1):
        t[j] = _row_update(t[j - 1], y[j])
    return PassageTable(i_target=i_t, j_target=j_t, values=t, weights=y,
                        env=env, weight_seed=weight_seed)


def passage_table(env: Environment, weight_seed: int, target,
                  max_cells: int = DEFAULT_MAX_CELLS) -> PassageTable:
    """Fill T over the full region feeding `target` (kept for backtracking).

    Raises ResourceError when the region exceeds `max_cells`; use
    `passage_time` for large targets where only the value is needed.
    """
    i_t, j_t = _check_target(target)
    c_max = i_t + j_t
    cells = (j_t + 1) * (c_max + 1)
    if cells > max_cells:
        raise ResourceError(
            f"table for target ({i_t}, {j_t}) needs {cells} cells, budget is {max_cells}")
    y = np.empty((j_t + 1, c_max + 1), dtype=np.float64)
    for j, y_row in _weight_rows(env, weight_seed, j_t, c_max):
        y[j] = y_row
    return _table_from_grid(y, i_t, j_t, env=env, weight_seed=weight_seed)


def passage_table_from_weights(weights, target) -> PassageTable:
    """Test hook: build the table from injected weights.

    `weights` is either a mapping {(i, j): y} (cells absent from the mapping
    weigh 0) or a callable (i, j) -> y; weights must be nonnegative.
    """
    i_t, j_t = _check_target(target)
    c_max = i_t + j_t
    if isinstance(weights, Mapping):
        lookup: Callable[[int, int], float] = lambda i, j: weights.get((i, j), 0.0)
    else:
        lookup = weights
    y = np.empty((j_t + 1, c_max + 1), dtype=np.float64)
    for j in range(j_t + 1):
        for c in range(c_max + 1):
            w = float(lookup(c - j, j))
            if w < 0.0:
                raise ParameterError(f"negative weight {w} at ({c - j}, {j})")
            y[j, c] = w
    return _table_from_grid(y, i_t, j_t)


def passage_time(env: Environment, weight_seed: int, target) -> float:
    """T(target) via the row-streamed recurrence; O(width) memory."""
    i_t, j_t = _check_target(target)
    c_max = i_t + j_t
    row = None
    for j, y_row in _weight_rows(env, weight_seed, j_t, c_max):
        row = np.cumsum(y_row) if j == 0 else _row_update(row, y_row)
    return float(row[-1])


@dataclass(frozen=True)
class LatticePath:
    """Vertex sequence in W with east / northwest increments."""

    vertices: tuple[tuple[int, int], ...]

    def validate(self) -> None:
        if not self.vertices:
            raise PathError("empty path")
        for i, j in self.vertices:
            if not in_wedge(i, j):
                raise PathError(f"vertex ({i}, {j}) outside the wedge")
        for (i0, j0), (i1, j1) in zip(self.vertices, self.vertices[1:]):
            if (i1 - i0, j1 - j0) not in ((1, 0), (-1, 1)):
                raise PathError(f"illegal step ({i0},{j0}) -> ({i1},{j1})")

    def weight_sum(self, table: PassageTable) -> float:
        return float(sum(table.weight(i, j) for i, j in self.vertices))


def backtrack_path(table: PassageTable, target=None) -> LatticePath:
    """An argmax path from (0, 0) to target; ties prefer the east predecessor."""
    if target is None:
        i_t, j_t = table.i_target, table.j_target
    else:
        i_t, j_t = int(target[0]), int(target[1])
        if not table.covers(i_t, j_t):
            raise DomainError(f"target ({i_t}, {j_t}) not covered by the table")
    t = table.values
    j, c = j_t, i_t + j_t
    rev = [(c - j, j)]
    while (j, c) != (0, 0):
        east = t[j, c - 1] if c >= 1 else -math.inf
        nw = t[j - 1, c] if j >= 1 else -math.inf
        if east >= nw:
            c -= 1
        else:
            j -= 1
        rev.append((c - j, j))
    path = LatticePath(vertices=tuple(reversed(rev)))
    path.validate()
    return path


def column_coverage(path: LatticePath) -> set[int]:
    """Set of visited columns; contains every integer in [0, i_end] because
    the column coordinate walks by +-1 from 0 to its endpoint."""
    path.validate()
    return {i for i, _ in path.vertices}


def _tau_replica(args) -> float:
    law, x, y, n, env_seed, weight_seed = args
    i_t = math.floor(x * n)
    j_t = math.floor(y * n)
    # Floor rounding can push the target just outside the wedge when x < 0;
    # clamp onto the edge, which leaves the n -> infinity limit untouched.
    i_t = max(i_t, -j_t)
    env = sample_environment(law, env_seed, (-j_t, i_t + j_t))
    return passage_time(env, weight_seed, (i_t, j_t)) / n


@dataclass
class TauEstimate:
    """Monte Carlo scaling study of T(floor(xn), floor(yn)) / n."""

    law: DisorderLaw
    x: float
    y: float
    sizes: tuple[int, ...]
    replicas: int
    means: np.ndarray
    sems: np.ndarray
    point: float        # largest-n mean
    point_sem: float
    extrapolated: float | None  # diagnostic n^(-2/3) fit over the last two sizes


def tau_estimate(law: DisorderLaw, x: float, y: float, sizes, replicas: int,
                 seed: int, workers: int = 1) -> TauEstimate:
    """Per-size mean and standard error of T/n over independent replicas.

    Each (size, replica) pair gets its own derived environment and weight
    seeds, so replicas are independent and order-insensitive.
    """
    validate_law(law)
    if not in_cone(x, y):
        raise DomainError(f"({x}, {y}) outside the cone W'")
    sizes = tuple(int(n) for n in sizes)
    if not sizes or any(n <= 0 for n in sizes):
        raise ParameterError("sizes must be positive integers")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ParameterError("sizes must be strictly increasing")
    if replicas < 2:
        raise ParameterError("need at least 2 replicas for a standard error")

    means = np.empty(len(sizes))
    sems = np.empty(len(sizes))
    for k, n in enumerate(sizes):
        args = [
            (law, x, y, n,
             derive_seed(seed, "tau-env", n, rep),
             derive_seed(seed, "tau-weights", n, rep))
            for rep in range(replicas)
        ]
        vals = np.array(run_ordered(_tau_replica, args, workers))
        means[k] = vals.mean()
        sems[k] = vals.std(ddof=1) / math.sqrt(replicas)

    extrapolated = None
    if len(sizes) >= 2:
        n1, n2 = sizes[-2], sizes[-1]
        w1, w2 = n1 ** (-2.0 / 3.0), n2 ** (-2.0 / 3.0)
        c = (means[-2] - means[-1]) / (w1 - w2)
        extrapolated = float(means[-1] - c * w2)

    return TauEstimate(law=law, x=x, y=y, sizes=sizes, replicas=replicas,
                       means=means, sems=sems,
                       point=float(means[-1]), point_sem=float(sems[-1]),
                       extrapolated=extrapolated)
