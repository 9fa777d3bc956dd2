"""
Closed-form focal amplitude from the Green-theorem route

E_A/E_L at the focus for an ideal lens, with or without a hard aperture, written
with e^x Gamma(a, x) so nothing overflows at small u.
"""
import math
from typing import Optional

import numpy as np

from .constants import EPSILON_0, SPEED_OF_LIGHT
from .errors import DomainError
from .logging_config import get_logger
from .models import FocalAmplitude, FocusGeometry, QuadratureSpec
from .numerics import integrate_radial, scaled_gamma

logger = get_logger(__name__)

# -i: Gouy phase of the focus relative to the lens-plane reference
GOUY = -1j


def _bracket(u: float, x: float) -> float:
    """u^-1/2 e^x Gamma(-1/4, x) + u^1/2 e^x Gamma(1/4, x)"""
    return scaled_gamma(-0.25, x) / math.sqrt(u) + math.sqrt(u) * scaled_gamma(0.25, x)


def focal_bracket(u: float) -> float:
    """Dimensionless bracket B(u) shared by the focal amplitude and R_sc"""
    if not (math.isfinite(u) and u > 0.0):
        raise DomainError("focusing strength u must be > 0", module="green_focus",
                          context={"u": u})
    return _bracket(u, 1.0 / (u * u))


def electric_field_scale(power: float, geom: FocusGeometry) -> float:
    """Peak input field E_L (V/m) of a Gaussian beam carrying power P_in"""
    if not power > 0.0:
        raise DomainError("input power must be > 0", module="green_focus",
                          context={"power": power})
    return math.sqrt(4.0 * power / (EPSILON_0 * math.pi * SPEED_OF_LIGHT)) / geom.w_l


def focal_field_infinite(geom: FocusGeometry) -> FocalAmplitude:
    """E_A/E_L for an unobstructed lens"""
    ratio = GOUY * 0.25 * geom.k * geom.f * focal_bracket(geom.u)
    return FocalAmplitude(ratio=complex(ratio))


def focal_field_finite(geom: FocusGeometry) -> FocalAmplitude:
    """E_A/E_L when the beam is clipped at rho0 = v f"""
    if not geom.aperture_finite:
        raise DomainError("focal_field_finite needs a finite aperture", module="green_focus",
                          context={"v": geom.v})
    u, v = geom.u, geom.v
    x = 1.0 / (u * u)
    clipped = (1.0 + v * v) / (u * u)
    bracket = _bracket(u, x) - math.exp(-(v / u) ** 2) * _bracket(u, clipped)
    return FocalAmplitude(ratio=complex(GOUY * 0.25 * geom.k * geom.f * bracket))


def focal_field_quadrature(geom: FocusGeometry,
                           spec: Optional[QuadratureSpec] = None) -> FocalAmplitude:
    """E_A/E_L from direct radial quadrature over the lens plane (aperture honored)"""
    spec = spec or QuadratureSpec.for_geometry(geom, relative_tolerance=1e-12)
    f, w = geom.f, geom.w_l

    def integrand(rho: np.ndarray) -> np.ndarray:
        r = np.hypot(rho, f)
        return rho * (f + r) / r ** 2.5 * np.exp(-(rho / w) ** 2)

    integral = integrate_radial(integrand, spec).real
    ratio = GOUY * 0.5 * geom.k * math.sqrt(f) * integral
    return FocalAmplitude(ratio=complex(ratio))


def restore_dimensions(amplitude: FocalAmplitude, power: float, geom: FocusGeometry) -> float:
    """|E_A| in V/m for input power P_in"""
    return amplitude.magnitude * electric_field_scale(power, geom)


def focal_amplitude(geom: FocusGeometry, power: Optional[float] = None) -> FocalAmplitude:
    """Closed-form focal amplitude for the geometry's aperture, with |E_A| if power is given"""
    amplitude = focal_field_finite(geom) if geom.aperture_finite else focal_field_infinite(geom)
    if power is None:
        return amplitude
    absolute = restore_dimensions(amplitude, power, geom)
    logger.debug("focal amplitude u=%.4g v=%.4g: |E_A/E_L|=%.6g |E_A|=%.6g V/m",
                 geom.u, geom.v, amplitude.magnitude, absolute)
    return FocalAmplitude(ratio=amplitude.ratio, absolute=absolute)
