"""
Two-level atom response and the scattering ratio R_sc(u)
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple
import math

from scipy.optimize import minimize_scalar

from .constants import EPSILON_0, HBAR, SPEED_OF_LIGHT
from .errors import DomainError
from .green_focus import focal_field_finite, focal_field_infinite
from .logging_config import get_logger
from .models import AtomParams, DriveParams, FocusGeometry, OptimumResult, ScatterResult

logger = get_logger(__name__)

DEFAULT_SEARCH_INTERVAL = (0.5, 5.0)
DEFAULT_OPTIMUM_TOLERANCE = 1e-4
# An optimum this many tolerances from an end is treated as the end
BOUNDARY_MARGIN = 10.0


def excited_population(atom: AtomParams, drive: DriveParams) -> float:
    """Steady-state rho_22 of the optical Bloch equations"""
    quarter_rabi = drive.rabi ** 2 / 4.0
    return quarter_rabi / (drive.detuning ** 2 + 2.0 * quarter_rabi + atom.gamma ** 2 / 4.0)


def scattered_power(atom: AtomParams, drive: DriveParams) -> float:
    """P_sc = rho_22 Gamma hbar omega_12 (W)"""
    return excited_population(atom, drive) * atom.gamma * HBAR * atom.omega_12


def weak_resonant_power(e_a: float, wavelength: float) -> float:
    """Scattered power far below saturation on resonance, 3 eps0 c lambda^2 E_A^2/(4 pi)"""
    return 3.0 * EPSILON_0 * SPEED_OF_LIGHT * wavelength ** 2 * abs(e_a) ** 2 / (4.0 * math.pi)


def saturation_parameter(atom: AtomParams, drive: DriveParams) -> float:
    """2 Omega^2 / Gamma^2"""
    return 2.0 * drive.rabi ** 2 / atom.gamma ** 2


def photon_rate(atom: AtomParams, drive: DriveParams) -> float:
    """Scattered photons per second"""
    return excited_population(atom, drive) * atom.gamma


def _ratio_from_amplitude(geom: FocusGeometry, focal_ratio: float) -> float:
    return 3.0 * geom.wavelength ** 2 / (math.pi ** 2 * geom.w_l ** 2) * focal_ratio


def scattering_ratio(geom: FocusGeometry) -> ScatterResult:
    """R_sc for an unobstructed lens (weak resonant drive)"""
    focal_ratio = focal_field_infinite(geom).magnitude ** 2
    r_sc = _ratio_from_amplitude(geom, focal_ratio)
    return ScatterResult(r_sc=r_sc, p_sc_over_pin=r_sc, focal_ratio=focal_ratio, u=geom.u)


def scattering_ratio_finite(geom: FocusGeometry) -> ScatterResult:
    """R_sc when the focusing lens clips the beam at rho0"""
    focal_ratio = focal_field_finite(geom).magnitude ** 2
    r_sc = _ratio_from_amplitude(geom, focal_ratio)
    return ScatterResult(r_sc=r_sc, p_sc_over_pin=r_sc, focal_ratio=focal_ratio, u=geom.u,
                         v=geom.v)


def scattering_ratio_for(geom: FocusGeometry) -> ScatterResult:
    """Dispatch on the aperture"""
    return scattering_ratio_finite(geom) if geom.aperture_finite else scattering_ratio(geom)


def probe_power_for_rate(geom: FocusGeometry, atom: AtomParams, rate: float) -> float:
    """Weak resonant input power (W) that scatters `rate` photons per second"""
    if not rate > 0.0:
        raise DomainError("photon rate must be > 0", module="scattering", context={"rate": rate})
    r_sc = scattering_ratio_for(geom).r_sc
    return rate * HBAR * atom.omega_12 / r_sc


def _scan_point(u: float, f: float, wavelength: float) -> ScatterResult:
    if u == 0.0:
        return ScatterResult(r_sc=0.0, p_sc_over_pin=0.0, focal_ratio=0.0, u=0.0)
    return scattering_ratio(FocusGeometry.from_u(u, f=f, wavelength=wavelength))


def scan_scattering_ratio(us: Sequence[float], f: float = 4.5e-3, wavelength: float = 780e-9,
                          workers: int = 1) -> List[ScatterResult]:
    """R_sc over a grid of focusing strengths; u = 0 maps to the zero-field limit"""
    if any(u < 0.0 for u in us):
        raise DomainError("focusing strengths must be >= 0", module="scattering")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda u: _scan_point(u, f, wavelength), us))
    return [_scan_point(u, f, wavelength) for u in us]


def r_sc_of_u(u: float) -> float:
    """R_sc as a function of u alone"""
    return scattering_ratio(FocusGeometry.from_u(u)).r_sc


def find_optimal_focusing(search_interval: Tuple[float, float] = DEFAULT_SEARCH_INTERVAL,
                          tolerance: float = DEFAULT_OPTIMUM_TOLERANCE) -> OptimumResult:
    """Maximizer of R_sc(u) on an interval; a maximum at an end is flagged"""
    from .extinction import extinction_fiber

    lo, hi = search_interval
    if not 0.0 < lo < hi:
        raise DomainError("search interval must satisfy 0 < u_lo < u_hi", module="scattering",
                          context={"interval": search_interval})
    xatol = tolerance / 2.0
    found = minimize_scalar(lambda u: -r_sc_of_u(u), bounds=(lo, hi), method="bounded",
                            options={"xatol": xatol})
    u_star = float(found.x)
    r_star = -float(found.fun)
    ends = {lo: r_sc_of_u(lo), hi: r_sc_of_u(hi)}
    margin = BOUNDARY_MARGIN * xatol
    at_boundary = (u_star - lo <= margin or hi - u_star <= margin
                   or max(ends.values()) >= r_star)
    if at_boundary:
        u_star = max(ends, key=ends.__getitem__)
        r_star = ends[u_star]
        logger.warning("R_sc maximum on [%.4g, %.4g] sits at the boundary u=%.4g",
                       lo, hi, u_star)
    logger.debug("optimum u*=%.6g R*=%.6g after %d evaluations", u_star, r_star, found.nfev)
    return OptimumResult(u_star=u_star, r_star=r_star,
                         epsilon_fiber=extinction_fiber(r_star).epsilon,
                         interval=(lo, hi), at_boundary=at_boundary)
