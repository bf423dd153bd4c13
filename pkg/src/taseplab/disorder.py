"""Disorder laws and seeded rate environments.

A disorder law is the common distribution of the i.i.d. site rates alpha(i).
Four families are supported: a point mass, a two-point law, a uniform law,
and a mixture that replaces an epsilon fraction of sites with a slow
component.  All of them expose the essential infimum r, the supremum of the
support, and mu = 1/r - E[1/alpha] in closed form; the uniform law's
E[1/alpha] is the analytic integral, never quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ParameterError
from .streams import ALPHA_STREAM, counter_uniform

_MAX_MIXTURE_DEPTH = 4


@dataclass(frozen=True)
class PointMass:
    r: float


@dataclass(frozen=True)
class TwoPoint:
    """alpha = r with probability p, else b (with b >= r)."""

    r: float
    b: float
    p: float


@dataclass(frozen=True)
class Uniform:
    """alpha uniform on [r, b], b > r."""

    r: float
    b: float


@dataclass(frozen=True)
class Mixture:
    """alpha = base with probability 1 - epsilon, else a draw from slow."""

    base: float
    epsilon: float
    slow: "DisorderLaw"


DisorderLaw = Union[PointMass, TwoPoint, Uniform, Mixture]


def validate_law(law: DisorderLaw) -> None:
    """Raise ParameterError on nonpositive rates, bad probabilities, or
    mixtures nested deeper than the stream budget allows."""
    _validate(law, depth=0)


def _validate(law: DisorderLaw, depth: int) -> None:
    if depth > _MAX_MIXTURE_DEPTH:
        raise ParameterError("mixture laws nested deeper than %d levels" % _MAX_MIXTURE_DEPTH)
    if isinstance(law, PointMass):
        if not law.r > 0:
            raise ParameterError(f"PointMass rate must be positive, got {law.r}")
    elif isinstance(law, TwoPoint):
        if not (law.r > 0 and law.b > 0):
            raise ParameterError(f"TwoPoint rates must be positive, got r={law.r}, b={law.b}")
        if law.b < law.r:
            raise ParameterError(f"TwoPoint needs b >= r, got r={law.r}, b={law.b}")
        if not 0.0 <= law.p <= 1.0:
            raise ParameterError(f"TwoPoint probability p must lie in [0,1], got {law.p}")
    elif isinstance(law, Uniform):
        if not (law.r > 0 and law.b > 0):
            raise ParameterError(f"Uniform endpoints must be positive, got [{law.r}, {law.b}]")
        if not law.b > law.r:
            raise ParameterError(f"Uniform needs b > r, got [{law.r}, {law.b}]")
    elif isinstance(law, Mixture):
        if not law.base > 0:
            raise ParameterError(f"Mixture base rate must be positive, got {law.base}")
        if not 0.0 <= law.epsilon <= 1.0:
            raise ParameterError(f"Mixture epsilon must lie in [0,1], got {law.epsilon}")
        _validate(law.slow, depth + 1)
    else:
        raise ParameterError(f"unknown disorder law {law!r}")


def essential_infimum(law: DisorderLaw) -> float:
    """r = inf of rates the law actually puts mass at or below (exactly)."""
    validate_law(law)
    return _essinf(law)


def _essinf(law: DisorderLaw) -> float:
    if isinstance(law, PointMass):
        return law.r
    if isinstance(law, TwoPoint):
        return law.r if law.p > 0 else law.b
    if isinstance(law, Uniform):
        return law.r
    # Mixture: degenerate epsilon collapses to one component.
    if law.epsilon == 0.0:
        return law.base
    if law.epsilon == 1.0:
        return _essinf(law.slow)
    return min(law.base, _essinf(law.slow))


def sup_support(law: DisorderLaw) -> float:
    """Supremum of the support (all supported laws are bounded above)."""
    validate_law(law)
    return _sup(law)


def _sup(law: DisorderLaw) -> float:
    if isinstance(law, PointMass):
        return law.r
    if isinstance(law, (TwoPoint, Uniform)):
        return law.b
    if law.epsilon == 0.0:
        return law.base
    if law.epsilon == 1.0:
        return _sup(law.slow)
    return max(law.base, _sup(law.slow))


def mean_inverse_rate(law: DisorderLaw) -> float:
    """E[1/alpha], closed form per variant."""
    validate_law(law)
    return _mean_inv(law)


def _mean_inv(law: DisorderLaw) -> float:
    if isinstance(law, PointMass):
        return 1.0 / law.r
    if isinstance(law, TwoPoint):
        return law.p / law.r + (1.0 - law.p) / law.b
    if isinstance(law, Uniform):
        return (math.log(law.b) - math.log(law.r)) / (law.b - law.r)
    return (1.0 - law.epsilon) / law.base + law.epsilon * _mean_inv(law.slow)


def mu(law: DisorderLaw) -> float:
    """mu = 1/r - E[1/alpha]; zero exactly when the law is a point mass at r."""
    validate_law(law)
    return 1.0 / _essinf(law) - _mean_inv(law)


def _sample_rates(law: DisorderLaw, seed: int, idx: np.ndarray, stream: int) -> np.ndarray:
    if isinstance(law, PointMass):
        return np.full(idx.shape, law.r, dtype=np.float64)
    u = counter_uniform(seed, idx, 0, stream)
    if isinstance(law, TwoPoint):
        return np.where(u < law.p, law.r, law.b)
    if isinstance(law, Uniform):
        return law.r + (law.b - law.r) * u
    slow = _sample_rates(law.slow, seed, idx, stream + 1)
    return np.where(u < law.epsilon, slow, law.base)


def rates_at(law: DisorderLaw, seed: int, indices) -> np.ndarray:
    """Rates alpha(i) for the given indices; pure in (law, seed, i)."""
    validate_law(law)
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    return _sample_rates(law, seed, idx, ALPHA_STREAM)


@dataclass(frozen=True)
class Environment:
    """A seeded realization of alpha(i) over [i_min, i_max] (inclusive).

    Rates are a pure function of (law, seed, i); the stored window is just a
    cache, and `rates_covering` can widen it without perturbing any value.
    """

    law: DisorderLaw
    seed: int
    i_min: int
    i_max: int
    rates: np.ndarray

    def rate(self, i: int) -> float:
        if not self.i_min <= i <= self.i_max:
            raise DomainError(f"index {i} outside environment range [{self.i_min}, {self.i_max}]")
        return float(self.rates[i - self.i_min])

    def rates_covering(self, lo: int, hi: int) -> np.ndarray:
        """Rates for [lo, hi] inclusive, resampled from the counter stream
        when the window exceeds the stored one (identical where they overlap)."""
        if lo > hi:
            raise ParameterError(f"empty index range [{lo}, {hi}]")
        if self.i_min <= lo and hi <= self.i_max:
            return self.rates[lo - self.i_min : hi - self.i_min + 1]
        return rates_at(self.law, self.seed, np.arange(lo, hi + 1))


def sample_environment(law: DisorderLaw, seed: int, index_range: tuple[int, int]) -> Environment:
    """Materialize alpha(i) for i in the inclusive integer interval."""
    lo, hi = int(index_range[0]), int(index_range[1])
    if lo > hi:
        raise ParameterError(f"empty index range [{lo}, {hi}]")
    rates = rates_at(law, seed, np.arange(lo, hi + 1))
    return Environment(law=law, seed=seed, i_min=lo, i_max=hi, rates=rates)
