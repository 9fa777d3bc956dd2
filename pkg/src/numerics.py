"""
Special functions and radial quadrature primitives

Incomplete gamma for fractional (also negative) first argument, Bessel J0/J1/J2,
a fixed composite Gauss-Legendre panel rule and an adaptive radial integrator
built on scipy's quad_vec. Every function is pure and thread-safe.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union
import math

import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, special

from .errors import ConvergenceError, DomainError
from .logging_config import get_logger
from .models import GammaArgs, QuadratureSpec

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

# Beyond this x (and well past |a|) the scaled gamma comes from its asymptotic series
ASYMPTOTIC_THRESHOLD = 50.0
_SERIES_TERMS = 200

# absolute tolerance floor, so an integrand that vanishes identically converges
_TINY = np.finfo(float).tiny

# Nodes evaluated per vectorized chunk of a panel rule
CHUNK_NODES = 1 << 18


# --------------------------------------------------------------------------
# incomplete gamma
# --------------------------------------------------------------------------

def _upper_direct(a: float, x: float) -> float:
    if x == 0.0:
        return float(special.gamma(a))
    if a > 0.0:
        return float(special.gamma(a) * special.gammaincc(a, x))
    if a == 0.0:
        return float(special.exp1(x))
    # shift up to a0 in (0, 1] (or 0 for integer a), then recur back down
    steps = int(-a) if a == math.floor(a) else math.ceil(-a)
    a0 = a + steps
    value = float(special.exp1(x)) if a0 == 0.0 else \
        float(special.gamma(a0) * special.gammaincc(a0, x))
    b = a0
    decay = math.exp(-x)
    for _ in range(steps):
        b -= 1.0
        value = (value - x ** b * decay) / b
    return value


def _asymptotic_scaled(a: float, x: float) -> float:
    """e^x Gamma(a, x) ~ x^(a-1) (1 + (a-1)/x + (a-1)(a-2)/x^2 + ...)"""
    total = 1.0
    term = 1.0
    for n in range(1, _SERIES_TERMS):
        following = term * (a - n) / x
        if abs(following) >= abs(term):
            break
        term = following
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return x ** (a - 1.0) * total


def _asymptotic_applies(a: float, x: float) -> bool:
    # the series terms shrink from the first one only while x clearly exceeds |a|
    return x >= max(ASYMPTOTIC_THRESHOLD, 2.0 * abs(a) + 20.0)


def upper_incomplete_gamma(args: GammaArgs) -> float:
    """Gamma(a, x) = integral from x to infinity of t^(a-1) e^-t dt"""
    if _asymptotic_applies(args.a, args.x):
        return math.exp(-args.x) * _asymptotic_scaled(args.a, args.x)
    return _upper_direct(args.a, args.x)


def scaled_incomplete_gamma(args: GammaArgs) -> float:
    """e^x Gamma(a, x), finite for large x where Gamma(a, x) itself underflows"""
    if _asymptotic_applies(args.a, args.x):
        return _asymptotic_scaled(args.a, args.x)
    return math.exp(args.x) * _upper_direct(args.a, args.x)


def scaled_gamma(a: float, x: float) -> float:
    """Shorthand for scaled_incomplete_gamma(GammaArgs(a, x))"""
    return scaled_incomplete_gamma(GammaArgs(a, x))


# --------------------------------------------------------------------------
# Bessel functions
# --------------------------------------------------------------------------

def _upward_j2(x: np.ndarray, j0: np.ndarray, j1: np.ndarray) -> np.ndarray:
    # recurrence is unstable below x = 1; jv only runs on that part
    j2 = np.empty_like(x)
    small = x < 1.0
    j2[small] = special.jv(2, x[small])
    large = ~small
    j2[large] = 2.0 * j1[large] / x[large] - j0[large]
    return j2


def _bessel_j2(x: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(x)
    return _upward_j2(flat, special.j0(flat), special.j1(flat)).reshape(x.shape)


def bessel_j(order: int, x: ArrayLike) -> ArrayLike:
    """J_order(x) for order 0, 1 or 2 and x >= 0"""
    if order not in (0, 1, 2):
        raise DomainError("unsupported Bessel order", module="numerics", context={"order": order})
    values = np.asarray(x, dtype=float)
    if np.any(values < 0.0):
        raise DomainError("Bessel argument must be >= 0", module="numerics")
    if order == 0:
        out = special.j0(values)
    elif order == 1:
        out = special.j1(values)
    else:
        out = _bessel_j2(values)
    return float(out) if out.ndim == 0 else out


def bessel_j012(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """J0, J1 and J2 in one pass (J2 from the upward recurrence where stable)"""
    x = np.asarray(x, dtype=float)
    j0 = special.j0(x)
    j1 = special.j1(x)
    return j0, j1, _upward_j2(x, j0, j1)

# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

def composite_gauss_legendre(breakpoints: np.ndarray, order: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an order-point Gauss-Legendre rule on every panel"""
    edges = np.asarray(breakpoints, dtype=float)
    x, w = legendre.leggauss(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def oscillation_breakpoints(budget: Callable[[np.ndarray], np.ndarray], lower: float,
                            upper: float, step: float) -> np.ndarray:
    """Panel edges where an increasing phase budget advances by step

    budget maps radius to an accumulated path length (vectorized, increasing);
    the edges are found by bisection on all targets at once.
    """
    start, stop = float(budget(np.array([lower]))[0]), float(budget(np.array([upper]))[0])
    count = int(math.ceil((stop - start) / step))
    if count <= 1:
        return np.array([lower, upper])
    targets = start + step * np.arange(1, count)
    lo = np.full(targets.shape, lower)
    hi = np.full(targets.shape, upper)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = budget(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    edges = np.concatenate([[lower], 0.5 * (lo + hi), [upper]])
    return np.unique(edges)


@dataclass(frozen=True)
class PanelEstimate:
    """Fixed-panel integral with its error estimate and the integral of |f|"""
    value: np.ndarray
    error: float
    absolute: float


def _weighted_sum(evaluate: Callable[[slice], np.ndarray], weights: np.ndarray
                  ) -> Tuple[np.ndarray, np.ndarray]:
    value: Union[float, np.ndarray] = 0.0
    absolute: Union[float, np.ndarray] = 0.0
    for start in range(0, weights.size, CHUNK_NODES):
        sl = slice(start, start + CHUNK_NODES)
        samples = np.asarray(evaluate(sl))
        value = value + samples @ weights[sl]
        absolute = absolute + np.abs(samples) @ weights[sl]
    return np.asarray(value), np.asarray(absolute)


@dataclass(frozen=True, eq=False)
class PanelRule:
    """Composite Gauss-Legendre rule on fixed panels with a lower-order companion

    The integrand is sampled on nodes and on check_nodes; the spread between
    the two sums is the error estimate.
    """
    nodes: np.ndarray
    weights: np.ndarray
    check_nodes: np.ndarray
    check_weights: np.ndarray
    panel_count: int

    @classmethod
    def from_edges(cls, edges: np.ndarray, order: int = 8, check_order: int = 6) -> 'PanelRule':
        edges = np.asarray(edges, dtype=float)
        nodes, weights = composite_gauss_legendre(edges, order)
        check_nodes, check_weights = composite_gauss_legendre(edges, check_order)
        return cls(nodes=nodes, weights=weights, check_nodes=check_nodes,
                   check_weights=check_weights, panel_count=int(edges.size - 1))

    def integrate(self, evaluate: Callable[[slice], np.ndarray],
                  check: Callable[[slice], np.ndarray]) -> PanelEstimate:
        """evaluate(sl) samples nodes[sl] and check(sl) samples check_nodes[sl], shape (..., n)"""
        value, absolute = _weighted_sum(evaluate, self.weights)
        check_value, _ = _weighted_sum(check, self.check_weights)
        return PanelEstimate(value=value, error=float(np.max(np.abs(value - check_value))),
                             absolute=float(np.max(absolute)))


# scipy quad_vec status codes
_ROUNDING_LIMITED = 2
_NON_FINITE = 3


def integrate_radial(integrand: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec, *,
                     lower: float = 0.0, upper: Optional[float] = None,
                     budget: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                     step: Optional[float] = None) -> Union[complex, np.ndarray]:
    """Adaptive integral of integrand over [lower, upper] with scipy's quad_vec

    upper defaults to spec.truncation_radius. With a phase budget the interval
    is pre-split where budget(rho) advances by step, so no starting interval
    spans more than half an oscillation; otherwise spec.initial_panels equal
    intervals are used. The integrand is vectorized over rho and may return
    shape (..., n); real and imaginary parts are integrated together.
    """
    upper = spec.truncation_radius if upper is None else upper
    if not (math.isfinite(lower) and math.isfinite(upper) and upper > lower):
        raise DomainError("integration interval must be finite and non-empty", module="numerics",
                          context={"lower": lower, "upper": upper})
    if budget is not None:
        if step is None or step <= 0.0:
            raise DomainError("a phase budget needs a positive step", module="numerics")
        points = oscillation_breakpoints(budget, lower, upper, step)[1:-1]
        limit = max(spec.max_subdivisions, 4 * (points.size + 1))
    else:
        points = np.linspace(lower, upper, spec.initial_panels + 1)[1:-1]
        limit = spec.max_subdivisions

    shape: List[Tuple[int, ...]] = []

    def packed(rho: float) -> np.ndarray:
        value = np.asarray(integrand(np.array([rho])))[..., 0]
        if not shape:
            shape.append(value.shape)
        return np.concatenate([np.real(value).ravel(), np.imag(value).ravel()]).astype(float)

    result, error, info = integrate.quad_vec(
        packed, lower, upper, epsabs=max(spec.absolute_tolerance, _TINY),
        epsrel=spec.relative_tolerance, limit=limit,
        points=list(points) if points.size else None, full_output=True)
    half = result.size // 2
    value = (result[:half] + 1j * result[half:]).reshape(shape[0])
    estimate: Union[complex, np.ndarray] = complex(value) if value.ndim == 0 else value

    if info.status == _NON_FINITE or not np.all(np.isfinite(result)):
        raise ConvergenceError("integrand is not finite on the interval", module="numerics",
                               estimate=estimate, error_bound=float(error),
                               context={"lower": lower, "upper": upper})
    if info.status not in (0, _ROUNDING_LIMITED):
        raise ConvergenceError("radial quadrature did not converge", module="numerics",
                               estimate=estimate, error_bound=float(error),
                               context={"lower": lower, "upper": upper,
                                        "max_subdivisions": limit})
    logger.debug("integrate_radial: status=%d intervals=%d evaluations=%d error=%.3g",
                 info.status, len(info.intervals), info.neval, error)
    return estimate
