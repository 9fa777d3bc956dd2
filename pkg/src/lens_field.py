"""
Incident Gaussian beam and the ideal-lens transformation

The lens is a phase plate that also tilts the local polarization so the field
stays transverse to the ray toward the focus, with a 1/sqrt(cos theta) factor
that conserves power. Fields use the circular basis (eps_plus, z, eps_minus).
"""
import math
from typing import Tuple

import numpy as np

from .errors import PreconditionError
from .models import CylPoint, FocusGeometry, LensModel, PolarizedField

SQRT2 = math.sqrt(2.0)

# Relative tolerance for "this point lies on the lens plane"
_PLANE_TOLERANCE = 1e-9


def lens_point(geom: FocusGeometry, rho: float, phi: float = 0.0) -> CylPoint:
    """Point on the focusing lens plane z = -f"""
    return CylPoint(rho=rho, phi=phi, z=-geom.f)


def _require_plane(geom: FocusGeometry, point: CylPoint, sign: int) -> None:
    if abs(point.z - sign * geom.f) > _PLANE_TOLERANCE * geom.f:
        raise PreconditionError("point is not on the lens plane", module="lens_field",
                                context={"z": point.z, "expected": sign * geom.f})


def optical_path(geom: FocusGeometry, rho: np.ndarray,
                 model: LensModel = LensModel.SPHERICAL) -> np.ndarray:
    """Path length imprinted by the lens; the phase is exp(-i k path)"""
    rho = np.asarray(rho, dtype=float)
    if model is LensModel.PARABOLIC:
        return geom.f + rho * rho / (2.0 * geom.f)
    return np.hypot(rho, geom.f)


def input_beam(geom: FocusGeometry, point: CylPoint) -> PolarizedField:
    """Collimated eps_plus Gaussian on the lens plane"""
    _require_plane(geom, point, -1)
    return PolarizedField(f_plus=complex(math.exp(-(point.rho / geom.w_l) ** 2)))


def lens_components(geom: FocusGeometry, rho: np.ndarray,
                    model: LensModel = LensModel.SPHERICAL
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Focusing field right after the lens with the azimuthal phases stripped

    Returns (f_plus, f_z e^{-i phi}, f_minus e^{-2i phi}) on the lens plane.
    The parabolic model is the bare phase plate on the input beam (no tilt).
    Beyond a finite aperture the field is exactly zero.
    """
    rho = np.asarray(rho, dtype=float)
    envelope = np.exp(-(rho / geom.w_l) ** 2)
    phase = np.exp(-1j * geom.k * optical_path(geom, rho, model))
    if geom.aperture_finite:
        envelope = np.where(rho <= geom.rho0, envelope, 0.0)
    if model is LensModel.PARABOLIC:
        zero = np.zeros(rho.shape, dtype=complex)
        return envelope * phase, zero, zero.copy()
    r = np.hypot(rho, geom.f)
    cos_t = geom.f / r
    sin_t = rho / r
    amplitude = envelope * phase / np.sqrt(cos_t)
    return (amplitude * (1.0 + cos_t) / 2.0,
            amplitude * sin_t / SQRT2,
            amplitude * (cos_t - 1.0) / 2.0)


def lens_transform(geom: FocusGeometry, point: CylPoint,
                   model: LensModel = LensModel.SPHERICAL) -> PolarizedField:
    """Focusing field directly behind the lens at a point on z = -f"""
    _require_plane(geom, point, -1)
    plus, axial, minus = lens_components(geom, np.array([point.rho]), model)
    return PolarizedField(
        f_plus=complex(plus[0]),
        f_z=complex(axial[0]) * complex(math.cos(point.phi), math.sin(point.phi)),
        f_minus=complex(minus[0]) * complex(math.cos(2 * point.phi), math.sin(2 * point.phi)),
    )


def plane_components(geom: FocusGeometry, rho: np.ndarray, sign: int
                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit-amplitude lens-plane field at z = sign*f, azimuthal phases stripped

    Phase reference makes the focal amplitude real: after the focus the wave
    carries exp(+i(k r - pi/2)), before it exp(-i(k r - pi/2)).
    """
    rho = np.asarray(rho, dtype=float)
    r = np.hypot(rho, geom.f)
    cos_t = geom.f / r
    sin_t = rho / r
    envelope = np.exp(-(rho / geom.w_l) ** 2) / np.sqrt(cos_t)
    if geom.aperture_finite:
        envelope = np.where(rho <= geom.rho0, envelope, 0.0)
    amplitude = envelope * np.exp(sign * 1j * (geom.k * r - math.pi / 2.0))
    return (amplitude * (1.0 + cos_t) / 2.0,
            -sign * amplitude * sin_t / SQRT2,
            amplitude * (cos_t - 1.0) / 2.0)


def collection_plane_field(geom: FocusGeometry, point: CylPoint,
                           amplitude: float = 1.0) -> PolarizedField:
    """Excitation field on the collection lens (z = +f), scaled by E_L

    A point on z = -f gives the same field before the focus, which equals
    i E_L times lens_transform.
    """
    sign = 1 if point.z > 0 else -1
    _require_plane(geom, point, sign)
    plus, axial, minus = plane_components(geom, np.array([point.rho]), sign)
    rotation = complex(math.cos(point.phi), math.sin(point.phi))
    return PolarizedField(
        f_plus=amplitude * complex(plus[0]),
        f_z=amplitude * complex(axial[0]) * rotation,
        f_minus=amplitude * complex(minus[0]) * rotation ** 2,
    )


def paraxial_field(geom: FocusGeometry, point: CylPoint) -> PolarizedField:
    """Gaussian-beam focal field of the same input, phase-referenced like the modes

    Focal waist w_f, Rayleigh range pi w_f^2/lambda, Gouy phase -arctan(z/z_R)
    and the -i focal phase, so at the focus f_plus = -i w_L/w_f.
    """
    z_r = geom.rayleigh_range
    zeta = point.z / z_r
    width = geom.w_f * math.sqrt(1.0 + zeta * zeta)
    curvature = point.z / (point.z ** 2 + z_r ** 2)
    phase = geom.k * point.z + 0.5 * geom.k * point.rho ** 2 * curvature - math.atan(zeta)
    magnitude = (geom.w_l / width) * math.exp(-(point.rho / width) ** 2)
    return PolarizedField(f_plus=-1j * magnitude * complex(math.cos(phase), math.sin(phase)))


def paraxial_axial_intensity(geom: FocusGeometry, z: np.ndarray) -> np.ndarray:
    """|f_plus|^2 on axis for the paraxial Gaussian beam"""
    zeta = np.asarray(z, dtype=float) / geom.rayleigh_range
    return (geom.w_l / geom.w_f) ** 2 / (1.0 + zeta * zeta)


def to_cartesian(field: PolarizedField) -> np.ndarray:
    """(Ex, Ey, Ez) of a circular-basis field"""
    return field.cartesian()
