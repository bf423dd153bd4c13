"""Acceptance criteria, runnable from pytest and from `taseplab verify`.

Each check pins its parameters, tolerances, and seeds here; the functions
return a CriterionResult and never raise on a failed bound, so the CLI can
print one line per criterion and exit 3 on failure.

The empirical-plateau ladder uses burn-in/window values validated by
relaxation pilots (flux at L=8192 is stationary from ~200k time units;
jammed-block and uniform initial conditions converge to the same value).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import audit_path_bound, audit_Z_distribution
from .disorder import PointMass, TwoPoint
from .lpp import backtrack_path, passage_table_from_weights, tau_estimate
from .ring import flux_curve
from .shape import ShapeModel, g_profile, plateau_check, plateau_interval, tau_hom, tilde_tau, variational_flux

AUDIT_SEED = 20260809       # pinned: KS p-value 0.84 for the canonical law
FLUX_SEED = 1101
SHAPE_FD_SEED = 607
LADDER_SEED = 2202
EQUIV_SEED = 3303
PLATEAU_LADDER_SEED = 4404

CANONICAL_LAW = TwoPoint(0.5, 1.0, 0.5)   # r = 0.5, mu = 0.5
LADDER_SIZES = (250, 500, 1000, 2000)
LADDER_POINTS = ((0.0, 1.0), (1.0, 1.0), (-0.5, 1.0))
LADDER_REPLICAS = 50

# (burn_in, window) per ring size for the empirical plateau; batches fixed.
PLATEAU_LADDER = {512: (30_000.0, 60_000.0),
                  2048: (100_000.0, 100_000.0),
                  8192: (250_000.0, 150_000.0)}
PLATEAU_RHOS = (0.46, 0.50, 0.54)
PLATEAU_ENV_SEEDS = 4
PLATEAU_BAND = (0.125 - 0.01, 0.125 + 0.01)


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)


def _result(name: str, failures: list[str], details: list[str]) -> CriterionResult:
    return CriterionResult(name=name, passed=not failures, details=details + failures)


def check_homogeneous_flux(workers: int = 1) -> CriterionResult:
    """Criterion 1: ring flux matches N(L-N)/(L(L-1)) for r=1, L=256.

    The uniform random placement is itself stationary for the homogeneous
    ring (verified against the generator solve in the test suite), so a
    short decorrelation burn-in suffices.  Batches must be long against the
    flux autocorrelation time (~L^{3/2} units) for an honest sem; 200k units
    over 16 batches keeps sem well under the required 0.002.
    """
    L = 256
    grid = [round(0.1 * k, 10) for k in range(1, 10)]
    rows = flux_curve(PointMass(1.0), L, grid, burn_in=5000.0, window=200_000.0,
                      batches=16, seed=FLUX_SEED, env_seeds=1, workers=workers)
    failures, details = [], []
    for _, _, m in rows:
        exact = m.N * (L - m.N) / (L * (L - 1))
        dev = abs(m.estimate - exact)
        details.append(
            f"  rho={m.rho:.4f}: est={m.estimate:.6f} sem={m.sem:.2g} exact={exact:.6f}")
        if m.sem >= 0.002:
            failures.append(f"  rho={m.rho}: sem {m.sem:.4g} >= 0.002")
        if dev > 3.0 * m.sem:
            failures.append(f"  rho={m.rho}: |est-exact|={dev:.4g} > 3*sem={3*m.sem:.4g}")
    return _result("homogeneous flux exactness", failures, details)


def _ladder_check(law, bound_fn, name: str, workers: int) -> CriterionResult:
    failures, details = [], []
    for x, y in LADDER_POINTS:
        est = tau_estimate(law, x, y, LADDER_SIZES, LADDER_REPLICAS,
                           seed=LADDER_SEED, workers=workers)
        bound = bound_fn(x, y)
        details.append(f"  (x,y)=({x},{y}): means={np.round(est.means, 4).tolist()} "
                       f"sems={np.round(est.sems, 4).tolist()} bound={bound:.4f}")
        for k in range(1, len(LADDER_SIZES)):
            slack = 2.0 * math.hypot(est.sems[k - 1], est.sems[k])
            if est.means[k] < est.means[k - 1] - slack:
                failures.append(
                    f"  (x,y)=({x},{y}): mean drops {est.means[k-1]:.4f} -> "
                    f"{est.means[k]:.4f} beyond 2*sem at n={LADDER_SIZES[k]}")
        for n, m, s in zip(LADDER_SIZES, est.means, est.sems):
            if m > bound + 3.0 * s:
                failures.append(
                    f"  (x,y)=({x},{y}) n={n}: mean {m:.4f} > bound {bound:.4f} + 3*sem")
    return _result(name, failures, details)


def check_homogeneous_limit_shape(workers: int = 1) -> CriterionResult:
    """Criterion 2: PointMass(1) ladder is nondecreasing and below tau_hom."""
    return _ladder_check(PointMass(1.0), lambda x, y: tau_hom(1.0, x, y),
                         "homogeneous limit shape", workers)


def check_disorder_bound(workers: int = 1) -> CriterionResult:
    """Criterion 3: TwoPoint ladder stays below tilde_tau."""
    model = ShapeModel.from_law(CANONICAL_LAW)
    return _ladder_check(CANONICAL_LAW, lambda x, y: tilde_tau(model, x, y),
                         "disorder bound tau <= tilde_tau", workers)


def check_coupling_audits(workers: int = 1) -> CriterionResult:
    """Criterion 4: Z ~ Exp(r) by KS, and the path bound mean >= mu*x - 3*sem."""
    failures, details = [], []
    z = audit_Z_distribution(CANONICAL_LAW, 100_000, AUDIT_SEED)
    details.append(f"  KS stat={z.ks_statistic:.5f} p={z.p_value:.4f}")
    if not z.passed:
        failures.append(f"  KS p-value {z.p_value:.4g} < 0.01")
    pb = audit_path_bound(CANONICAL_LAW, 1.0, 1.0, n=500, replicas=200,
                          seed=AUDIT_SEED, workers=workers)
    details.append(f"  path bound: cond={pb.cond_mean:.4f} sem={pb.cond_sem:.4f} "
                   f"target mu*x={pb.bound:.4f}")
    if not pb.passed:
        failures.append(
            f"  conditional sum {pb.cond_mean:.4f} < mu*x - 3*sem = "
            f"{pb.bound - 3 * pb.cond_sem:.4f}")
    if not pb.per_replica_floor_ok:
        failures.append("  per-replica column-coverage floor violated")
    return _result("coupling audits", failures, details)


def check_plateau_analytics() -> CriterionResult:
    """Criterion 5: variational flux equals r/4 on the plateau, dips outside,
    and agrees with plateau_check as a biconditional across the grid."""
    model = ShapeModel(0.5, 0.5)
    r4 = model.r / 4.0
    lo, hi = plateau_interval(model)
    failures, details = [], []
    details.append(f"  interval [{lo}, {hi}]")

    inside = [lo + 0.005 * k for k in range(int(round((hi - lo) / 0.005)) + 1)]
    worst = 0.0
    for rho in inside:
        f = variational_flux(model, rho).value
        worst = max(worst, abs(f - r4))
    details.append(f"  worst in-plateau |f - r/4| = {worst:.3g}")
    if worst > 1e-6:
        failures.append(f"  in-plateau flux deviates by {worst:.3g} > 1e-6")

    for rho in (lo - 0.02, hi + 0.02):
        f = variational_flux(model, rho).value
        details.append(f"  rho={rho:.4f}: f={f:.9f}")
        if not f < r4 - 1e-4:
            failures.append(f"  rho={rho:.4f}: f={f:.6g} not below r/4 - 1e-4")

    coarse = [round(0.05 + 0.01 * k, 10) for k in range(91)]
    grid = sorted(set(coarse) | set(round(v, 10) for v in inside) | {lo - 0.02, hi + 0.02})
    mismatches = 0
    for rho in grid:
        f_ok = variational_flux(model, rho).value >= r4 - 1e-6
        p_ok = plateau_check(model, rho).passed
        if f_ok != p_ok:
            mismatches += 1
            failures.append(f"  biconditional breaks at rho={rho}: flux>={r4}-1e-6 is "
                            f"{f_ok}, plateau_check is {p_ok}")
    details.append(f"  biconditional checked on {len(grid)} densities, "
                   f"{mismatches} mismatches")
    return _result("plateau analytics", failures, details)


def check_derivative_formulas() -> CriterionResult:
    """Criterion 6: one-sided difference quotients of the profile at x=0
    match (2-4*rho)/r +- mu to 1e-4 on 20 random (r, mu, rho) triples."""
    rng = np.random.default_rng(SHAPE_FD_SEED)
    h = 1e-6
    failures, details = [], []
    worst = 0.0
    for _ in range(20):
        r = 0.3 + 1.7 * rng.random()
        m = (0.9 / r) * rng.random()
        rho = 0.05 + 0.9 * rng.random()
        model = ShapeModel(r, m)
        g0 = g_profile(model, rho, 0.0)
        left = (g0 - g_profile(model, rho, -h)) / h
        right = (g_profile(model, rho, h) - g0) / h
        e = max(abs(left - ((2 - 4 * rho) / r + m)),
                abs(right - ((2 - 4 * rho) / r - m)))
        worst = max(worst, e)
        if e > 1e-4:
            failures.append(f"  (r={r:.3f}, mu={m:.3f}, rho={rho:.3f}): FD error {e:.2g}")
    details.append(f"  worst one-sided FD error over 20 triples: {worst:.3g}")
    return _result("one-sided derivative formulas", failures, details)


def check_empirical_plateau(workers: int = 1) -> CriterionResult:
    """Criterion 7: flatness across plateau densities per L, nonincreasing
    trend in L, and the L=8192 level inside [0.115, 0.135]."""
    failures, details = [], []
    level: dict[int, dict[float, tuple[float, float]]] = {}
    for L, (burn_in, window) in PLATEAU_LADDER.items():
        rows = flux_curve(CANONICAL_LAW, L, list(PLATEAU_RHOS), burn_in, window,
                          batches=12, seed=PLATEAU_LADDER_SEED,
                          env_seeds=PLATEAU_ENV_SEEDS, workers=workers)
        # rows come back ordered (env replica outer, grid density inner)
        per_rho: dict[float, list] = {rho: [] for rho in PLATEAU_RHOS}
        for pos, (_, _, m) in enumerate(rows):
            per_rho[PLATEAU_RHOS[pos % len(PLATEAU_RHOS)]].append(m)
        level[L] = {}
        for rho, ms in per_rho.items():
            ests = np.array([m.estimate for m in ms])
            within = np.array([m.sem for m in ms])
            est = float(ests.mean())
            sem = math.sqrt(ests.var(ddof=1) / len(ests) + float(np.mean(within ** 2)) / len(ests))
            level[L][rho] = (est, sem)
            details.append(f"  L={L} rho={rho}: est={est:.5f} sem={sem:.5f} "
                           f"(seeds: {np.round(ests, 5).tolist()})")
    # (a) flatness within each L
    for L, by_rho in level.items():
        for ra, rb in itertools.combinations(PLATEAU_RHOS, 2):
            ea, sa = by_rho[ra]
            eb, sb = by_rho[rb]
            if abs(ea - eb) > 3.0 * math.hypot(sa, sb):
                failures.append(f"  L={L}: |f({ra}) - f({rb})| = {abs(ea-eb):.5f} "
                                f"> 3*combined-sem {3*math.hypot(sa, sb):.5f}")
    # (b) nonincreasing in L and final band
    ladder = sorted(PLATEAU_LADDER)
    for rho in PLATEAU_RHOS:
        for La, Lb in zip(ladder, ladder[1:]):
            ea, sa = level[La][rho]
            eb, sb = level[Lb][rho]
            if eb > ea + 2.0 * math.hypot(sa, sb):
                failures.append(f"  rho={rho}: est rises {ea:.5f} (L={La}) -> "
                                f"{eb:.5f} (L={Lb}) beyond 2*sem")
        est, _ = level[ladder[-1]][rho]
        if not PLATEAU_BAND[0] <= est <= PLATEAU_BAND[1]:
            failures.append(f"  rho={rho}: L={ladder[-1]} estimate {est:.5f} outside "
                            f"[{PLATEAU_BAND[0]}, {PLATEAU_BAND[1]}]")
    return _result("empirical plateau (ring ladder)", failures, details)


def _enumerate_max(weights: dict, target: tuple[int, int]) -> float:
    """Independent oracle: exhaustive path enumeration (<= 2^12 paths)."""
    i_t, j_t = target
    best = -math.inf
    stack = [((0, 0), weights.get((0, 0), 0.0))]
    while stack:
        (i, j), acc = stack.pop()
        if (i, j) == (i_t, j_t):
            best = max(best, acc)
            continue
        for di, dj in ((1, 0), (-1, 1)):
            ni, nj = i + di, j + dj
            if nj > j_t or ni + nj > i_t + j_t:
                continue  # can no longer reach the target
            if nj >= 0 and ni + nj >= 0:
                stack.append(((ni, nj), acc + weights.get((ni, nj), 0.0)))
    return best


def check_small_instance_equivalence() -> CriterionResult:
    """Criterion 8: DP equals exhaustive enumeration on 500 random instances.

    Weights are dyadic rationals (multiples of 2^-10), which makes every
    float64 sum exact in both summation orders, so equality is literal.
    """
    rng = np.random.default_rng(EQUIV_SEED)
    failures = []
    for case in range(500):
        east = int(rng.integers(0, 13))
        nw = int(rng.integers(0, 13 - east))
        if east == 0 and nw == 0:
            east = 1
        target = (east - nw, nw)
        cells = [(c - j, j) for j in range(nw + 1) for c in range(east + 1)]
        weights = {cell: float(rng.integers(0, 1 << 20)) / 1024.0 for cell in cells}
        table = passage_table_from_weights(weights, target)
        dp = table.value(*target)
        brute = _enumerate_max(weights, target)
        if dp != brute:
            failures.append(f"  case {case}: DP {dp!r} != enumeration {brute!r}")
        path = backtrack_path(table)
        if path.weight_sum(table) != dp:
            failures.append(f"  case {case}: backtracked path weight != T(target)")
    return _result("small-instance oracle equivalence",
                   failures, ["  500 instances, <= 12 steps, dyadic weights"])


QUICK_CHECKS = (
    ("1", check_homogeneous_flux, True),
    ("4", check_coupling_audits, True),
    ("5", lambda workers=1: check_plateau_analytics(), False),
    ("6", lambda workers=1: check_derivative_formulas(), False),
    ("8", lambda workers=1: check_small_instance_equivalence(), False),
)
FULL_CHECKS = (
    ("2", check_homogeneous_limit_shape, True),
    ("3", check_disorder_bound, True),
    ("7", check_empirical_plateau, True),
)


def run_all(full: bool = False, log=print, workers: int = 1) -> list[CriterionResult]:
    checks = list(QUICK_CHECKS) + (list(FULL_CHECKS) if full else [])
    checks.sort(key=lambda c: c[0])
    results = []
    for number, fn, takes_workers in checks:
        res = fn(workers=workers) if takes_workers else fn()
        results.append(res)
        log(f"CRITERION {number} ({res.name}): {'PASS' if res.passed else 'FAIL'}")
        for line in res.details:
            log(line)
    return results
