"""
Extinction and reflectivity of a single atom at the focus

Dipole far field, energy flux through the lens planes, aperture and fiber
collection, and the thermal-motion reduction of the scattering ratio.
"""
from typing import Optional, Tuple
import math

import numpy as np

from .constants import EPSILON_0, FAR_FIELD_WAVELENGTHS, RB87_MASS, SPEED_OF_LIGHT
from .errors import DomainError, PreconditionError
from .lens_field import SQRT2, plane_components
from .logging_config import get_logger
from .models import (
    CollectionMode, CylPoint, ExtinctionResult, FluxBreakdown, FluxPlane, FocusGeometry,
    MotionalModel, PolarizedField, QuadratureSpec, TrapThermalState,
)
from .numerics import integrate_radial
from .scattering import scattering_ratio_finite, weak_resonant_power

logger = get_logger(__name__)

DEFAULT_MONTE_CARLO_SAMPLES = 100_000
MAX_SCATTERING_RATIO = 2.0


# --------------------------------------------------------------------------
# fields and flux
# --------------------------------------------------------------------------

def _scattered_components(e_a: float, k: float, rho: np.ndarray, z: np.ndarray
                          ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dipole far field with the azimuthal phases stripped"""
    r = np.hypot(rho, z)
    s = rho / r
    c_z = z / r
    amplitude = 1.5 * e_a / (k * r) * np.exp(1j * (k * r + math.pi / 2.0))
    return (amplitude * (1.0 - s * s / 2.0),
            -amplitude * s * c_z / SQRT2,
            -amplitude * s * s / 2.0)


def dipole_far_field(e_a: float, point: CylPoint, wavelength: float) -> PolarizedField:
    """Field radiated by the atom driven with eps_plus amplitude E_A (V/m)"""
    if point.r < FAR_FIELD_WAVELENGTHS * wavelength:
        raise PreconditionError("point is inside the dipole near field", module="extinction",
                                context={"r": point.r, "minimum": FAR_FIELD_WAVELENGTHS * wavelength})
    k = 2.0 * math.pi / wavelength
    plus, axial, minus = _scattered_components(e_a, k, np.array([point.rho]), np.array([point.z]))
    turn = complex(math.cos(point.phi), math.sin(point.phi))
    return PolarizedField(f_plus=complex(plus[0]), f_z=complex(axial[0]) * turn,
                          f_minus=complex(minus[0]) * turn * turn)


def _hermitian(a: Tuple[np.ndarray, ...], b: Tuple[np.ndarray, ...]) -> np.ndarray:
    return a[0] * np.conj(b[0]) + a[1] * np.conj(b[1]) + a[2] * np.conj(b[2])


def _require_far_plane(geom: FocusGeometry) -> None:
    if geom.f < FAR_FIELD_WAVELENGTHS * geom.wavelength:
        raise PreconditionError("lens plane is inside the dipole near field",
                                module="extinction", context={"f": geom.f})


def flux_breakdown(geom: FocusGeometry, e_a: float, e_l: float,
                   plane: FluxPlane) -> FluxBreakdown:
    """Input, scattered and interference power through the lens plane at z = -f or +f"""
    if geom.aperture_finite:
        raise DomainError("flux breakdown is defined for the full plane", module="extinction",
                          context={"v": geom.v})
    _require_far_plane(geom)
    sign = plane.z_sign
    scale = 0.5 * EPSILON_0 * SPEED_OF_LIGHT
    k, f = geom.k, geom.f
    spec = QuadratureSpec.for_geometry(geom, relative_tolerance=1e-10)

    def input_density(rho: np.ndarray) -> np.ndarray:
        cos_t = f / np.hypot(rho, f)
        field = tuple(e_l * c for c in plane_components(geom, rho, sign))
        return 2.0 * math.pi * rho * np.abs(_hermitian(field, field)) * cos_t

    def scattered_density(alpha: np.ndarray) -> np.ndarray:
        # plane integral rewritten over the polar angle: dA cos(theta) = r^2 dOmega
        rho = f * np.tan(alpha)
        r = f / np.cos(alpha)
        field = _scattered_components(e_a, k, rho, np.full(rho.shape, sign * f))
        return 2.0 * math.pi * np.sin(alpha) * r * r * np.abs(_hermitian(field, field))

    def interference_density(rho: np.ndarray) -> np.ndarray:
        cos_t = f / np.hypot(rho, f)
        excitation = tuple(e_l * c for c in plane_components(geom, rho, sign))
        scattered = _scattered_components(e_a, k, rho, np.full(rho.shape, sign * f))
        forward = _hermitian(excitation, scattered)
        backward = _hermitian(scattered, excitation)
        return 2.0 * math.pi * rho * np.real(sign * cos_t * forward + cos_t * backward)

    input_term = scale * integrate_radial(input_density, spec).real
    scattered_term = sign * scale * integrate_radial(scattered_density, spec, lower=0.0,
                                                     upper=math.pi / 2.0).real
    interference_term = scale * integrate_radial(interference_density, spec).real
    logger.debug("flux at %s: input=%.6g scattered=%.6g interference=%.6g W",
                 plane.value, input_term, scattered_term, interference_term)
    return FluxBreakdown(input_term=input_term, scattered_term=scattered_term,
                         interference_term=interference_term, plane=plane)


def fiber_projection_overlap(geom: FocusGeometry, e_a: float, e_l: float) -> complex:
    """Amplitude transmission into the fiber mode by projecting the field at z = +f

    Closed form 1 - R_sc/2 when e_a is the focal field of e_l.
    """
    _require_far_plane(geom)
    f, k = geom.f, geom.k
    power = 0.25 * EPSILON_0 * math.pi * SPEED_OF_LIGHT * e_l ** 2 * geom.w_l ** 2
    spec = QuadratureSpec.for_geometry(geom, relative_tolerance=1e-10)

    def density(rho: np.ndarray) -> np.ndarray:
        cos_t = f / np.hypot(rho, f)
        excitation = tuple(e_l * c for c in plane_components(geom, rho, 1))
        scattered = _scattered_components(e_a, k, rho, np.full(rho.shape, f))
        return 2.0 * math.pi * rho * cos_t * _hermitian(scattered, excitation)

    overlap = 0.5 * EPSILON_0 * SPEED_OF_LIGHT * integrate_radial(density, spec)
    return complex(1.0 + overlap / power)


def scattered_power_on_sphere(e_a: float, wavelength: float, radius: float) -> float:
    """Total radiated power from a sphere quadrature of |E_sc|^2"""
    k = 2.0 * math.pi / wavelength
    spec = QuadratureSpec(relative_tolerance=1e-10)

    def density(theta: np.ndarray) -> np.ndarray:
        rho = radius * np.sin(theta)
        z = radius * np.cos(theta)
        field = _scattered_components(e_a, k, rho, z)
        return 2.0 * math.pi * np.sin(theta) * radius ** 2 * np.abs(_hermitian(field, field))

    total = integrate_radial(density, spec, lower=0.0, upper=math.pi).real
    return 0.5 * EPSILON_0 * SPEED_OF_LIGHT * total


# --------------------------------------------------------------------------
# extinction
# --------------------------------------------------------------------------

def _require_ratio(r_sc: float) -> None:
    if not 0.0 <= r_sc <= MAX_SCATTERING_RATIO:
        raise DomainError("scattering ratio must lie in [0, 2]", module="extinction",
                          context={"r_sc": r_sc})


def extinction_full_plane(r_sc: float) -> ExtinctionResult:
    """Whole lens plane collected: half the scattered power is missing forward"""
    _require_ratio(r_sc)
    return ExtinctionResult(epsilon=r_sc / 2.0, reflectivity=r_sc / 2.0,
                            collection=CollectionMode.FULL_PLANE)


def extinction_fiber(r_sc: float) -> ExtinctionResult:
    """Detection through the single-mode fiber matched to the input beam"""
    _require_ratio(r_sc)
    return ExtinctionResult(epsilon=1.0 - (1.0 - r_sc / 2.0) ** 2,
                            reflectivity=r_sc ** 2 / 4.0,
                            collection=CollectionMode.FIBER_MODE)


def pickup_factor(v: float) -> float:
    """Share of scattered light entering a collection aperture v = rho0/f, in [0, 1]"""
    if not v >= 0.0:
        raise DomainError("aperture v must be >= 0", module="extinction", context={"v": v})
    if math.isinf(v):
        return 0.0
    return (1.0 + 0.75 * v * v) / (1.0 + v * v) ** 1.5


def pickup_factor_na(na: float) -> float:
    """pickup_factor written with the numerical aperture"""
    if not 0.0 <= na <= 1.0:
        raise DomainError("numerical aperture must lie in [0, 1]", module="extinction",
                          context={"na": na})
    return (1.0 - na * na / 4.0) * math.sqrt(1.0 - na * na)


def aperture_from_na(na: float) -> float:
    """v = rho0/f for a numerical aperture"""
    if not 0.0 <= na < 1.0:
        raise DomainError("numerical aperture must lie in [0, 1)", module="extinction",
                          context={"na": na})
    return na / math.sqrt(1.0 - na * na)


def extinction_finite_aperture(geom: FocusGeometry,
                               collection_v: Optional[float] = None) -> ExtinctionResult:
    """Extinction with a clipped focusing lens and a collection lens of aperture collection_v

    The transmission is normalized to the input power passing the clipping aperture rho0.
    """
    if not geom.aperture_finite:
        raise DomainError("extinction_finite_aperture needs a finite aperture",
                          module="extinction", context={"v": geom.v})
    v = geom.v if collection_v is None else collection_v
    if not 0.0 < v < math.inf:
        raise DomainError("collection aperture must be finite and > 0", module="extinction",
                          context={"collection_v": v})
    alpha = pickup_factor(v)
    r_sc = scattering_ratio_finite(geom).r_sc
    empty_trap = -math.expm1(-2.0 * (geom.rho0 / geom.w_l) ** 2)
    return ExtinctionResult(epsilon=0.5 * (1.0 + alpha) * r_sc / empty_trap,
                            reflectivity=0.5 * (1.0 - alpha) * r_sc,
                            collection=CollectionMode.FINITE_APERTURE, v=v)


def clamp_for_report(result: ExtinctionResult) -> ExtinctionResult:
    """Clip epsilon and reflectivity into [0, 1], warning when that changes anything"""
    if result.in_range:
        return result
    logger.warning("extinction outside [0, 1] (epsilon=%.6g, R=%.6g, %s); clamping",
                   result.epsilon, result.reflectivity, result.collection.value)
    return ExtinctionResult(epsilon=min(max(result.epsilon, 0.0), 1.0),
                            reflectivity=min(max(result.reflectivity, 0.0), 1.0),
                            collection=result.collection, v=result.v)


# --------------------------------------------------------------------------
# thermal motion
# --------------------------------------------------------------------------

def thermal_spread(temperature: float, frequency: float, mass: float = RB87_MASS) -> float:
    """RMS position of a thermal atom in a harmonic trap of frequency (Hz)"""
    trap = TrapThermalState(temperature=temperature, nu_rho=frequency, nu_z=frequency, mass=mass)
    return trap.sigma_rho


def motional_factor(geom: FocusGeometry, trap: TrapThermalState,
                    model: MotionalModel = MotionalModel.RADIAL) -> float:
    """Reduction factor R_sc'/R_sc from the paraxial intensity averaged over the spread"""
    w_f = geom.w_f
    sigma_rho, sigma_z = trap.sigma_rho, trap.sigma_z
    if sigma_rho >= w_f / math.sqrt(2.0):
        raise PreconditionError("transverse spread too large for the paraxial expansion",
                                module="extinction",
                                context={"sigma_rho": sigma_rho, "w_f": w_f})
    transverse = 1.0 - 2.0 * sigma_rho ** 2 / w_f ** 2
    if model is MotionalModel.RADIAL:
        transverse = transverse ** 2
    axial = 1.0 - sigma_z ** 2 * geom.wavelength ** 2 / (math.pi ** 2 * w_f ** 4)
    return transverse * axial


def motional_correction(r_sc: float, geom: FocusGeometry, trap: TrapThermalState,
                        model: MotionalModel = MotionalModel.RADIAL) -> float:
    """R_sc reduced by the thermal position spread of the atom"""
    return r_sc * motional_factor(geom, trap, model)


def motional_correction_monte_carlo(r_sc: float, geom: FocusGeometry, trap: TrapThermalState,
                                    samples: int = DEFAULT_MONTE_CARLO_SAMPLES,
                                    rng: Optional[np.random.Generator] = None,
                                    model: MotionalModel = MotionalModel.RADIAL) -> float:
    """R_sc averaged over sampled atom positions in the paraxial focal intensity"""
    if samples < 1:
        raise DomainError("samples must be >= 1", module="extinction",
                          context={"samples": samples})
    rng = rng if rng is not None else np.random.default_rng()
    x = rng.normal(0.0, trap.sigma_rho, samples)
    y = rng.normal(0.0, trap.sigma_rho, samples) if model is MotionalModel.RADIAL \
        else np.zeros(samples)
    z = rng.normal(0.0, trap.sigma_z, samples)
    width_sq = geom.w_f ** 2 * (1.0 + (z / geom.rayleigh_range) ** 2)
    relative = geom.w_f ** 2 / width_sq * np.exp(-2.0 * (x * x + y * y) / width_sq)
    mean = float(np.mean(relative))
    logger.debug("Monte Carlo motional factor %.6g from %d samples", mean, samples)
    return r_sc * mean
