"""Event-driven TASEP on a ring with site disorder.

Geometry is a ring of L sites holding a fixed number of particles; bond i
carries the rate alpha(i) of the departure site and is active when site i
is occupied and site i+1 (mod L) is empty.  Events follow the Gillespie
direct method over a rate tree.  Flux is measured by counting crossings on
all L bonds over a time window split into batches; in stationarity every
bond carries the same long-run rate, and averaging over bonds cuts the
variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .disorder import DisorderLaw, Environment, essential_infimum, sample_environment
from .errors import InvariantError, ParameterError
from .fenwick import RateTree
from .parallel import run_ordered
from .shape import FluxEstimate
from .streams import SplitMix64, derive_seed

MIN_BATCHES = 8


def diffusive_burn_in(L: int, r: float) -> float:
    """Conservative diffusive relaxation heuristic, 10 L^2 / r time units."""
    return 10.0 * L * L / r


@dataclass
class RingState:
    L: int
    occupancy: np.ndarray  # uint8, length L
    N: int
    rates: np.ndarray      # alpha(i) per site
    clock: float
    tree: RateTree
    bond_counts: np.ndarray
    events: int

    def active_bonds(self) -> np.ndarray:
        """Recompute the active set from occupancy (ground truth for tests)."""
        nxt = np.roll(self.occupancy, -1)
        return (self.occupancy == 1) & (nxt == 0)

    def rebuild_tree(self) -> RateTree:
        return RateTree.from_rates(np.where(self.active_bonds(), self.rates, 0.0))


@dataclass(frozen=True)
class RingEvent:
    time: float
    bond: int
    dt: float


def _uniform_positions(L: int, N: int, placement_seed: int) -> np.ndarray:
    """First N entries of a seeded Fisher-Yates shuffle of range(L)."""
    rng = SplitMix64(placement_seed)
    arr = np.arange(L, dtype=np.int64)
    for t in range(N):
        k = t + int(rng.uniform() * (L - t))
        arr[t], arr[k] = arr[k], arr[t]
    return arr[:N]


def init_ring(env: Environment, L: int, rho: float, placement_seed: int) -> RingState:
    """Place round(rho * L) particles uniformly at random and index the bonds."""
    if L < 4:
        raise ParameterError(f"ring size must be >= 4, got {L}")
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"density must lie in (0,1), got {rho}")
    N = round(rho * L)
    if N <= 0 or N >= L:
        raise ParameterError(f"degenerate density: N={N} of L={L} sites")
    rates = np.asarray(env.rates_covering(0, L - 1), dtype=np.float64).copy()
    occ = np.zeros(L, dtype=np.uint8)
    occ[_uniform_positions(L, N, placement_seed)] = 1
    state = RingState(L=L, occupancy=occ, N=N, rates=rates, clock=0.0,
                      tree=RateTree(L), bond_counts=np.zeros(L, dtype=np.int64),
                      events=0)
    state.tree = state.rebuild_tree()
    return state


def step(state: RingState, rng: SplitMix64) -> RingEvent:
    """One Gillespie event; matches the numba kernel draw-for-draw."""
    total = state.tree.total
    if total <= 0.0:
        raise InvariantError("no active bonds (jammed ring)")
    dt = -math.log1p(-rng.uniform()) / total
    state.clock += dt
    sel = state.tree.sample(rng.uniform() * total)

    L = state.L
    nxt = (sel + 1) % L
    state.occupancy[sel] = 0
    state.occupancy[nxt] = 1
    occ = state.occupancy
    for b in ((sel - 1) % L, sel, nxt):
        active = occ[b] == 1 and occ[(b + 1) % L] == 0
        state.tree.set(b, state.rates[b] if active else 0.0)
    state.bond_counts[sel] += 1
    state.events += 1
    return RingEvent(time=state.clock, bond=sel, dt=dt)


@dataclass
class FluxMeasurement:
    """Batched crossing counts and the batch-means flux estimate."""

    L: int
    N: int
    rho: float            # N / L
    burn_in: float
    window: float
    batches: int
    batch_counts: np.ndarray
    bond_counts: np.ndarray
    events: int
    estimate: float       # crossings / (window * L)
    sem: float            # batch-means standard error
    first_half: float     # burn-in adequacy diagnostics
    second_half: float
    placement_seed: int
    event_seed: int

    def to_flux_estimate(self) -> FluxEstimate:
        return FluxEstimate(rho=self.rho, value=self.estimate, sem=self.sem,
                            source="simulation")


def measure_flux(env: Environment, L: int, rho: float, burn_in: float | None,
                 window: float, batches: int, placement_seed: int,
                 event_seed: int) -> FluxMeasurement:
    """Run burn-in, then count crossings on all bonds over the window.

    burn_in=None uses the diffusive default for L <= 2048 and demands an
    explicit value beyond that (the default grows like L^2 and is far past
    any sane budget there).
    """
    if batches < MIN_BATCHES:
        raise ParameterError(f"need at least {MIN_BATCHES} batches, got {batches}")
    if window <= 0.0:
        raise ParameterError(f"window must be positive, got {window}")
    if burn_in is None:
        if L > 2048:
            raise ParameterError(
                f"L={L}: pass burn_in explicitly (diffusive default is impractical)")
        burn_in = diffusive_burn_in(L, essential_infimum(env.law))
    if burn_in < 0.0:
        raise ParameterError(f"burn_in must be nonnegative, got {burn_in}")

    state = init_ring(env, L, rho, placement_seed)
    occ = state.occupancy.copy()
    batch_counts, bond_counts, events, _, status = _kernel.run_gillespie(
        occ, state.rates, np.uint64(event_seed & ((1 << 64) - 1)),
        float(burn_in), float(window), int(batches))
    if status == _kernel.STATUS_JAMMED:
        raise InvariantError("ring jammed during measurement")

    batch_dt = window / batches
    batch_rates = batch_counts / (batch_dt * L)
    estimate = float(batch_counts.sum()) / (window * L)
    sem = float(batch_rates.std(ddof=1) / math.sqrt(batches))
    half = batches // 2
    first_half = float(batch_rates[:half].mean())
    second_half = float(batch_rates[half:].mean())
    return FluxMeasurement(
        L=L, N=state.N, rho=state.N / L, burn_in=float(burn_in), window=float(window),
        batches=batches, batch_counts=batch_counts, bond_counts=bond_counts,
        events=int(events), estimate=estimate, sem=sem,
        first_half=first_half, second_half=second_half,
        placement_seed=placement_seed, event_seed=event_seed,
    )


def _flux_task(args) -> FluxMeasurement:
    law, L, rho, burn_in, window, batches, env_seed, placement_seed, event_seed = args
    env = sample_environment(law, env_seed, (0, L - 1))
    return measure_flux(env, L, rho, burn_in, window, batches,
                        placement_seed, event_seed)


def flux_curve(law: DisorderLaw, L: int, rho_grid, burn_in: float | None,
               window: float, batches: int, seed: int, env_seeds: int = 1,
               workers: int = 1) -> list[tuple[int, int, FluxMeasurement]]:
    """One FluxMeasurement per (environment replica, density).

    env_seeds=1 keeps a single disorder realization across the whole grid;
    larger values add a cross-realization mode.  Returns (env_index,
    env_seed, measurement) triples in deterministic order.
    """
    rho_grid = list(rho_grid)
    if env_seeds < 1:
        raise ParameterError("need at least one environment seed")
    jobs = []
    meta = []
    for k in range(env_seeds):
        env_seed = derive_seed(seed, "flux-env", k)
        for rho in rho_grid:
            jobs.append((law, L, rho, burn_in, window, batches, env_seed,
                         derive_seed(seed, "flux-placement", k, rho),
                         derive_seed(seed, "flux-events", k, rho)))
            meta.append((k, env_seed))
    results = run_ordered(_flux_task, jobs, workers)
    return [(k, s, m) for (k, s), m in zip(meta, results)]
