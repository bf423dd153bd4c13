"""Closed-form limit-shape and flux analytics.

Holds the homogeneous shape (tau, k), the disorder upper bound
tilde_tau(x, y) = tau_hom(x, y) - mu*|x|, the inversion h and the
variational flux f(rho) = inf_v [k(v) + v*rho], plus the plateau checks.

Every extremum is located by golden section after a midpoint
convexity/concavity pre-check; the profile x -> tilde_tau(x, 1 - x*rho) has
a kink at x = 0 (its one-sided derivatives differ by 2*mu), so
derivative-based optimizers are unsound exactly where the plateau argument
lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, DomainError, InvariantError, ParameterError
from .lpp import in_cone

_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden ratio step ~0.618
_Y_CAP = 1e12


@dataclass(frozen=True)
class ShapeModel:
    """The pair (r, mu) describing a disorder law at shape level."""

    r: float
    mu: float

    def __post_init__(self):
        if not self.r > 0:
            raise ParameterError(f"slow rate r must be positive, got {self.r}")
        if self.mu < 0:
            raise ParameterError(f"mu must be nonnegative, got {self.mu}")

    @classmethod
    def from_law(cls, law) -> "ShapeModel":
        from .disorder import essential_infimum, mu as law_mu
        return cls(r=essential_infimum(law), mu=law_mu(law))


@dataclass(frozen=True)
class FluxEstimate:
    rho: float
    value: float
    sem: float
    source: str  # analytic | variational | simulation | lpp


def tau_hom(r: float, x: float, y: float) -> float:
    """Homogeneous limit shape (1/r)(sqrt(x+y) + sqrt(y))^2 on the cone W'."""
    if not in_cone(x, y):
        raise DomainError(f"({x}, {y}) outside the cone W'")
    return (math.sqrt(x + y) + math.sqrt(y)) ** 2 / r


def tilde_tau(model: ShapeModel, x: float, y: float) -> float:
    """Upper bound for the disordered limit shape: tau_hom - mu*|x|."""
    return tau_hom(model.r, x, y) - model.mu * abs(x)


def k_hom(r: float, v: float) -> float:
    """Homogeneous velocity profile: r(1 - v/r)^2/4 for v >= -r, else -v.

    The branches meet continuously at v = -r where both equal r.
    """
    if v >= -r:
        return r * (1.0 - v / r) ** 2 / 4.0
    return -v


def hom_flux(r: float, rho: float) -> FluxEstimate:
    """Closed-form homogeneous flux r*rho*(1 - rho)."""
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"density must lie in [0,1], got {rho}")
    return FluxEstimate(rho=rho, value=r * rho * (1.0 - rho), sem=0.0, source="analytic")


def golden_section_min(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-9) -> tuple[float, float]:
    """Minimum of a unimodal f on [lo, hi]; returns (argmin, value)."""
    if not hi > lo:
        raise ParameterError(f"empty bracket [{lo}, {hi}]")
    a, b = lo, hi
    m1 = b - _PHI * (b - a)
    m2 = a + _PHI * (b - a)
    f1, f2 = f(m1), f(m2)
    while b - a > tol:
        if f1 < f2:
            b, m2, f2 = m2, m1, f1
            m1 = b - _PHI * (b - a)
            f1 = f(m1)
        else:
            a, m1, f1 = m1, m2, f2
            m2 = a + _PHI * (b - a)
            f2 = f(m2)
    x = 0.5 * (a + b)
    return x, f(x)


def _midpoint_shape_check(f, lo, hi, convex: bool, what: str, grid: int = 16,
                          rel_tol: float = 1e-7) -> None:
    """Midpoint convexity (or concavity) spot check before golden section."""
    xs = [lo + (hi - lo) * k / grid for k in range(grid + 1)]
    vals = [f(x) for x in xs]
    scale = max(1.0, max(abs(v) for v in vals))
    for k in range(1, grid):
        chord = 0.5 * (vals[k - 1] + vals[k + 1])
        bulge = vals[k] - chord
        if convex and bulge > rel_tol * scale:
            raise BracketError(f"{what} fails midpoint convexity near {xs[k]}")
        if not convex and bulge < -rel_tol * scale:
            raise BracketError(f"{what} fails midpoint concavity near {xs[k]}")


def h_from_tau(tau_eval: Callable[[float, float], float], t: float, x: float,
               y_ceiling: float | None = None, tol: float = 1e-10) -> float:
    """h(t, x) = inf{y >= 0 : tau(x, y) > t} by bisection along the ray.

    tau_eval must be continuous and nondecreasing in y on [max(0, -x), inf).
    Returns the ray base when tau there already exceeds t.  If `y_ceiling`
    is given, tau(x, y_ceiling) <= t is a bracket error; otherwise the upper
    bracket doubles from the base until tau exceeds t (error past 1e12).
    """
    base = max(0.0, -x)
    if tau_eval(x, base) > t:
        return base
    if y_ceiling is not None:
        hi = y_ceiling
        if tau_eval(x, hi) <= t:
            raise BracketError(f"tau(x, {hi}) <= t; ceiling too low")
    else:
        hi = base + max(1.0, t)
        while tau_eval(x, hi) <= t:
            hi = 2.0 * hi + 1.0
            if hi > _Y_CAP:
                raise BracketError(f"tau(x, y) never exceeds t={t} below y={_Y_CAP}")
    lo = base
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tau_eval(x, mid) > t:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def k_from_tau(tau_eval: Callable[[float, float], float], v: float,
               y_ceiling: float | None = None) -> float:
    """k(v) = h(1, v), using positive 1-homogeneity of tau."""
    return h_from_tau(tau_eval, 1.0, v, y_ceiling=y_ceiling)


def flux_from_k(k_eval: Callable[[float], float], rho: float,
                v_lo: float, v_hi: float, tol: float = 1e-9) -> FluxEstimate:
    """f(rho) = inf_v [k(v) + v*rho] over the bracket by golden section.

    A minimizer pinned to the bracket boundary widens the bracket once and
    retries; a second pin is a bracket error.
    """
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"density must lie in [0,1], got {rho}")
    phi = lambda v: k_eval(v) + v * rho
    _midpoint_shape_check(phi, v_lo, v_hi, convex=True, what="k(v) + v*rho")
    lo, hi = v_lo, v_hi
    for attempt in range(2):
        v_star, f_star = golden_section_min(phi, lo, hi, tol=tol)
        edge = 1e-6 * (hi - lo)
        if v_star - lo > edge and hi - v_star > edge:
            return FluxEstimate(rho=rho, value=f_star, sem=0.0, source="variational")
        width = hi - lo
        lo, hi = lo - width, hi + width
    raise BracketError(f"variational minimizer pinned to bracket edge near v={v_star}")


def variational_flux(model: ShapeModel, rho: float, tol: float = 1e-9) -> FluxEstimate:
    """Flux through the full pipeline tilde_tau -> h -> k -> inf_v [k + v*rho].

    The v bracket [-1/r - 1, 1/r + 1] contains the homogeneous minimizer
    r(1 - 2*rho) with room for the mu perturbation; the bisection ceiling
    4r(1 + mu|v|) + |v| always brackets since tilde_tau(v, y) >= y/r - mu|v|.
    """
    r, m = model.r, model.mu
    tau = lambda x, y: tilde_tau(model, x, y)
    k = lambda v: k_from_tau(tau, v, y_ceiling=4.0 * r * (1.0 + m * abs(v)) + abs(v))
    return flux_from_k(k, rho, v_lo=-1.0 / r - 1.0, v_hi=1.0 / r + 1.0, tol=tol)


def g_profile(model: ShapeModel, rho: float, x: float) -> float:
    """The maximized profile tilde_tau(x, 1 - x*rho) from the flux equivalence."""
    return tilde_tau(model, x, 1.0 - x * rho)


def plateau_interval(model: ShapeModel) -> tuple[float, float]:
    """[1/2 - mu*r/4, 1/2 + mu*r/4], the guaranteed plateau of f at r/4."""
    half_width = model.mu * model.r / 4.0
    return 0.5 - half_width, 0.5 + half_width


@dataclass(frozen=True)
class PlateauCheck:
    rho: float
    max_value: float
    argmax: float
    threshold: float  # 4/r
    passed: bool


def plateau_check(model: ShapeModel, rho: float, tol: float = 1e-9) -> PlateauCheck:
    """Maximize g_profile in x and compare with 4/r.

    PASS means max_x tilde_tau(x, 1 - x*rho) <= 4/r + tol, the flux >= r/4
    side of the equivalence chain.  For rho strictly inside the plateau the
    argmax must sit on the kink at x = 0 (checked to 1e-6).
    """
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"density must lie in (0,1), got {rho}")
    # Admissible x keeps (x, 1 - x*rho) in the cone: y >= 0 gives x <= 1/rho,
    # x + y >= 0 gives x >= -1/(1 - rho).  Shrink by a relative epsilon so
    # rounding in 1 - x*rho cannot push the endpoints out of the cone.
    x_lo = -(1.0 - 1e-12) / (1.0 - rho)
    x_hi = (1.0 - 1e-12) / rho
    g = lambda x: g_profile(model, rho, x)
    _midpoint_shape_check(g, x_lo, x_hi, convex=False, what="g_profile")
    argmax, neg_max = golden_section_min(lambda x: -g(x), x_lo, x_hi, tol=tol)
    max_value = -neg_max
    threshold = 4.0 / model.r
    passed = max_value <= threshold + 1e-9
    lo, hi = plateau_interval(model)
    if lo < rho < hi and abs(argmax) > 1e-6:
        raise InvariantError(
            f"argmax {argmax} off the kink for rho={rho} inside the plateau")
    return PlateauCheck(rho=rho, max_value=max_value, argmax=argmax,
                        threshold=threshold, passed=passed)
