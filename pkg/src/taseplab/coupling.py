"""Coupling of disordered weights with homogeneous slow-rate exponentials.

Each cell gets an independent top-up U = B * E with B ~ Ber(1 - r/alpha(i))
and E ~ Exp(r), so Z = Y + U is exactly Exp(r).  The audits check the two
facts the lower-bound argument rests on: the distributional identity for Z,
and the column-coverage bound on the conditional expectation of the top-ups
collected along a maximal path chosen from (environment, Y) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .disorder import DisorderLaw, Environment, essential_infimum, mu, sample_environment, validate_law
from .errors import DomainError, InvariantError, ParameterError
from .lpp import backtrack_path, in_cone, in_wedge, passage_table
from .parallel import run_ordered
from .streams import (
    U_BERNOULLI_STREAM,
    U_EXP_STREAM,
    WEIGHT_STREAM,
    counter_exponential,
    counter_uniform,
    derive_seed,
)


@dataclass(frozen=True)
class CouplingSample:
    i: int
    j: int
    alpha: float
    y: float
    u: float
    z: float  # = y + u exactly


def _u_values(u_seed: int, i, j, alphas, r: float):
    """Vectorized U = B * E; zero exactly with probability r/alpha per cell."""
    coin = counter_uniform(u_seed, i, j, U_BERNOULLI_STREAM)
    e = counter_exponential(u_seed, i, j, U_EXP_STREAM, r)
    return np.where(coin < r / np.asarray(alphas, dtype=np.float64), 0.0, e)


def sample_U(env: Environment, u_seed: int, point) -> float:
    """Top-up U at a cell; pure function of (u_seed, i, j)."""
    i, j = point
    if not in_wedge(i, j):
        raise DomainError(f"point ({i}, {j}) outside the wedge")
    r = essential_infimum(env.law)
    alpha = env.rate(i)
    if alpha < r:
        raise InvariantError(f"environment rate {alpha} below essential infimum {r}")
    return float(_u_values(u_seed, i, j, alpha, r))


def sample_coupling(env: Environment, weight_seed: int, u_seed: int, point) -> CouplingSample:
    i, j = point
    if not in_wedge(i, j):
        raise DomainError(f"point ({i}, {j}) outside the wedge")
    alpha = env.rate(i)
    y = float(counter_exponential(weight_seed, i, j, WEIGHT_STREAM, alpha))
    u = sample_U(env, u_seed, point)
    return CouplingSample(i=i, j=j, alpha=alpha, y=y, u=u, z=y + u)


def conditional_mean_U(alpha: float, r: float) -> float:
    """E[U | environment] = 1/r - 1/alpha for a cell in column with rate alpha."""
    if r <= 0:
        raise ParameterError(f"rate r must be positive, got {r}")
    if alpha < r:
        raise DomainError(f"alpha={alpha} below r={r}")
    return 1.0 / r - 1.0 / alpha


@dataclass
class ZAuditReport:
    """One-sample KS comparison of Z = Y + U against Exp(r)."""

    law: DisorderLaw
    samples: int
    seed: int
    r: float
    ks_statistic: float
    p_value: float
    significance: float
    passed: bool
    mean_z: float
    zero_fraction_u: float
    z_samples: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "law": repr(self.law),
            "samples": self.samples,
            "seed": self.seed,
            "r": self.r,
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
            "significance": self.significance,
            "passed": self.passed,
            "mean_z": self.mean_z,
            "zero_fraction_u": self.zero_fraction_u,
        }


def audit_Z_distribution(law: DisorderLaw, samples: int, seed: int,
                         significance: float = 0.01,
                         keep_samples: bool = False) -> ZAuditReport:
    """Draw (Y, U) across fresh alphas, form Z, and KS-test against Exp(r)."""
    validate_law(law)
    if samples < 1000:
        raise ParameterError(f"need at least 1000 samples, got {samples}")
    r = essential_infimum(law)
    env = sample_environment(law, derive_seed(seed, "z-audit", "env"), (0, samples - 1))
    w_seed = derive_seed(seed, "z-audit", "weights")
    u_seed = derive_seed(seed, "z-audit", "u")
    idx = np.arange(samples, dtype=np.int64)
    y = counter_exponential(w_seed, idx, 0, WEIGHT_STREAM, env.rates)
    u = _u_values(u_seed, idx, 0, env.rates, r)
    z = y + u
    ks = stats.kstest(z, "expon", args=(0.0, 1.0 / r))
    return ZAuditReport(
        law=law, samples=samples, seed=seed, r=r,
        ks_statistic=float(ks.statistic), p_value=float(ks.pvalue),
        significance=significance, passed=bool(ks.pvalue >= significance),
        mean_z=float(z.mean()), zero_fraction_u=float(np.mean(u == 0.0)),
        z_samples=z if keep_samples else None,
    )


def _path_bound_replica(args):
    law, x, y, n, env_seed, w_seed, u_seed = args
    r = essential_infimum(law)
    i_t = math.floor(x * n)
    j_t = math.floor(y * n)
    env = sample_environment(law, env_seed, (-j_t, i_t + j_t))
    table = passage_table(env, w_seed, (i_t, j_t))
    path = backtrack_path(table)
    iv = np.array([i for i, _ in path.vertices], dtype=np.int64)
    jv = np.array([j for _, j in path.vertices], dtype=np.int64)
    alphas = env.rates_covering(-j_t, i_t + j_t)[iv + j_t]
    cond_sum = float(np.sum(1.0 / r - 1.0 / alphas)) / n
    # Exact column-coverage floor: the path meets every column in [0, i_t],
    # so its conditional sum dominates the one-cell-per-column sum.
    cols = env.rates_covering(0, i_t) if i_t >= 0 else np.empty(0)
    column_floor = float(np.sum(1.0 / r - 1.0 / cols)) / n
    sampled_sum = float(np.sum(_u_values(u_seed, iv, jv, alphas, r))) / n
    if cond_sum < column_floor - 1e-12:
        raise InvariantError(
            f"conditional path sum {cond_sum} below column-coverage floor {column_floor}")
    return cond_sum, column_floor, sampled_sum


@dataclass
class PathBoundReport:
    """Conditional top-up mass per unit length along maximal paths.

    `cond_mean` estimates lim (1/n) sum over the maximal path of
    E[U | environment]; the proof's floor for it is mu * x.
    """

    law: DisorderLaw
    x: float
    y: float
    n: int
    replicas: int
    seed: int
    mu: float
    bound: float            # mu * x
    cond_mean: float
    cond_sem: float
    passed: bool            # cond_mean >= bound - 3 * sem
    sampled_mean: float     # same functional with U actually drawn
    sampled_sem: float
    tower_gap: float        # |sampled_mean - cond_mean|
    tower_gap_sem: float
    tower_consistent: bool
    per_replica_floor_ok: bool
    cond_sums: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "law": repr(self.law),
            "x": self.x, "y": self.y, "n": self.n,
            "replicas": self.replicas, "seed": self.seed,
            "mu": self.mu, "bound": self.bound,
            "cond_mean": self.cond_mean, "cond_sem": self.cond_sem,
            "passed": self.passed,
            "sampled_mean": self.sampled_mean, "sampled_sem": self.sampled_sem,
            "tower_gap": self.tower_gap, "tower_gap_sem": self.tower_gap_sem,
            "tower_consistent": self.tower_consistent,
            "per_replica_floor_ok": self.per_replica_floor_ok,
        }


def audit_path_bound(law: DisorderLaw, x: float, y: float, n: int, replicas: int,
                     seed: int, workers: int = 1) -> PathBoundReport:
    """Evaluate the conditional top-up sum along maximal paths.

    The maximal path is computed from (environment, Y) alone and the sum uses
    conditional means, never sampled U, matching the conditioning step of the
    bound; a sampled-U version is also reported as a tower-property
    cross-check.  Only x >= 0 is supported (the column-coverage step runs
    over columns 0..floor(xn)).
    """
    validate_law(law)
    if x < 0:
        raise ParameterError("audit_path_bound supports x >= 0 only")
    if not in_cone(x, y):
        raise DomainError(f"({x}, {y}) outside the cone W'")
    if replicas < 2:
        raise ParameterError("need at least 2 replicas")
    args = [
        (law, x, y, n,
         derive_seed(seed, "path-bound-env", rep),
         derive_seed(seed, "path-bound-weights", rep),
         derive_seed(seed, "path-bound-u", rep))
        for rep in range(replicas)
    ]
    rows = run_ordered(_path_bound_replica, args, workers)
    cond = np.array([r[0] for r in rows])
    floors = np.array([r[1] for r in rows])
    sampled = np.array([r[2] for r in rows])

    m = mu(law)
    bound = m * x
    cond_mean = float(cond.mean())
    cond_sem = float(cond.std(ddof=1) / math.sqrt(replicas))
    sampled_mean = float(sampled.mean())
    sampled_sem = float(sampled.std(ddof=1) / math.sqrt(replicas))
    diff = sampled - cond
    gap_sem = float(diff.std(ddof=1) / math.sqrt(replicas))
    gap = float(diff.mean())

    return PathBoundReport(
        law=law, x=x, y=y, n=n, replicas=replicas, seed=seed,
        mu=m, bound=bound,
        cond_mean=cond_mean, cond_sem=cond_sem,
        passed=bool(cond_mean >= bound - 3.0 * cond_sem),
        sampled_mean=sampled_mean, sampled_sem=sampled_sem,
        tower_gap=gap, tower_gap_sem=gap_sem,
        tower_consistent=bool(abs(gap) <= 3.0 * gap_sem),
        per_replica_floor_ok=bool(np.all(cond >= floors - 1e-12)),
        cond_sums=cond,
    )
