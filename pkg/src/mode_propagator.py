"""
Cylindrical-mode propagation of the focusing field

The field behind the lens is projected onto forward, source-free Maxwell modes
(k_t, s) with angular momentum m = 1, then resummed at any point z >= -f.
Coefficients are referenced to the focus: kappa carries exp(i k_z f), so the
mode sum uses exp(i k_z z) with z measured from the focus.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, List, Optional, Sequence, Tuple
import math

import numpy as np
from numpy.polynomial import legendre

from .errors import ConvergenceError, DomainError, PreconditionError
from .lens_field import (
    SQRT2, lens_components, lens_point, optical_path, paraxial_axial_intensity,
)
from .logging_config import get_logger
from .models import (
    AxialProfile, CylPoint, FocalPlaneProfile, FocusGeometry, IntensityMap, LensModel,
    ModeSpectrum, PolarizedField, QuadratureSpec,
)
from .numerics import (
    PanelRule, bessel_j012, composite_gauss_legendre, integrate_radial,
    oscillation_breakpoints,
)

logger = get_logger(__name__)

DEFAULT_GRID_SIZE = 512
DEFAULT_RELATIVE_TOLERANCE = 1e-8
# Native nodes resolve up to one radian of k_t-phase per node
NATIVE_PHASE_PER_NODE = 1.0
PANEL_ORDER = 8
EDGE_FIELD_THRESHOLD = 1e-6

FieldFunction = Callable[[CylPoint], PolarizedField]


# --------------------------------------------------------------------------
# decomposition
# --------------------------------------------------------------------------

class _LensSamples:
    """Lens-plane field cached on one fixed Gauss-Legendre panel rule, weighted by rho"""

    def __init__(self, geom: FocusGeometry, model: LensModel, spec: QuadratureSpec):
        self.geom = geom
        self.model = model
        self.spec = spec
        upper = spec.truncation_radius
        self.budget = lambda rho: optical_path(geom, rho, model) + rho
        self.step = geom.wavelength / 4.0
        self.rule = PanelRule.from_edges(
            oscillation_breakpoints(self.budget, 0.0, upper, self.step), order=PANEL_ORDER)
        self.rho, self.weighted = self._weighted(self.rule.nodes)
        self.check_rho, self.check_weighted = self._weighted(self.rule.check_nodes)
        logger.debug("lens samples: panels=%d nodes=%d cutoff=%.4g m",
                     self.rule.panel_count, self.rho.size, upper)

    def _weighted(self, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return rho, rho * np.stack(lens_components(self.geom, rho, self.model))

    def _integrand(self, k_t: float, rho: np.ndarray) -> np.ndarray:
        plus, axial, minus = lens_components(self.geom, rho, self.model)
        j0, j1, j2 = bessel_j012(k_t * rho)
        return rho * np.stack([plus * j0, axial * j1, minus * j2])

    def radial_integrals(self, k_t: float) -> np.ndarray:
        """(I0, I1, I2) for one k_t, adaptive fallback when the fixed rule is too coarse"""
        def sampler(rho: np.ndarray, weighted: np.ndarray) -> Callable[[slice], np.ndarray]:
            def evaluate(sl: slice) -> np.ndarray:
                return weighted[:, sl] * np.stack(bessel_j012(k_t * rho[sl]))
            return evaluate

        estimate = self.rule.integrate(sampler(self.rho, self.weighted),
                                       sampler(self.check_rho, self.check_weighted))
        tolerance = max(self.spec.absolute_tolerance,
                        self.spec.relative_tolerance * estimate.absolute)
        if estimate.error <= tolerance:
            return np.asarray(estimate.value)
        logger.debug("fixed rule missed tolerance at k_t=%.6g (error %.3g), refining",
                     k_t, estimate.error)
        spec = replace(self.spec, absolute_tolerance=tolerance)
        return np.asarray(integrate_radial(lambda rho: self._integrand(k_t, rho), spec,
                                           budget=self.budget, step=self.step))


def _mode_coefficients(k: float, f: float, k_t: float, integrals: np.ndarray
                       ) -> Tuple[complex, complex]:
    i0, i1, i2 = integrals
    k_z = math.sqrt(k * k - k_t * k_t)
    prefactor = math.pi * k_t * complex(math.cos(k_z * f), math.sin(k_z * f))
    shared = 1j * SQRT2 * (k_t / k) * i1
    plus = prefactor * ((k + k_z) / k * i0 + shared + (k - k_z) / k * i2)
    minus = prefactor * ((-k + k_z) / k * i0 + shared + (-k - k_z) / k * i2)
    return plus, minus


def kt_nodes(wavenumber: float, grid_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, k)"""
    x, w = legendre.leggauss(grid_size)
    return 0.5 * wavenumber * (x + 1.0), 0.5 * wavenumber * w


def decompose(geom: FocusGeometry, grid_size: int = DEFAULT_GRID_SIZE, *,
              model: LensModel = LensModel.SPHERICAL,
              relative_tolerance: float = DEFAULT_RELATIVE_TOLERANCE,
              workers: int = 1) -> ModeSpectrum:
    """Mode coefficients kappa_s(k_t) of the focusing field behind the lens"""
    if grid_size < ModeSpectrum.MIN_NODES:
        raise DomainError("grid_size must be >= 64", module="mode_propagator",
                          context={"grid_size": grid_size})
    if workers < 1:
        raise DomainError("workers must be >= 1", module="mode_propagator",
                          context={"workers": workers})
    spec = QuadratureSpec.for_geometry(geom, relative_tolerance=relative_tolerance)
    if geom.aperture_finite:
        edge = math.exp(-(geom.v / geom.u) ** 2)
        if edge > EDGE_FIELD_THRESHOLD:
            logger.warning("hard aperture cuts the beam at %.3g of its peak field; "
                           "the mode spectrum rings at the edge", edge)

    samples = _LensSamples(geom, model, spec)
    k, f = geom.k, geom.f
    k_t, weights = kt_nodes(k, grid_size)

    def project(node: float) -> Tuple[complex, complex]:
        try:
            return _mode_coefficients(k, f, node, samples.radial_integrals(node))
        except ConvergenceError as err:
            raise ConvergenceError("mode projection did not converge",
                                   module="mode_propagator", estimate=err.estimate,
                                   error_bound=err.error_bound,
                                   context={"k_t": node, "grid_size": grid_size}) from err

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(project, k_t))
    else:
        pairs = [project(node) for node in k_t]

    kappa = np.array(pairs, dtype=complex)
    logger.debug("decomposed u=%.4g into %d nodes", geom.u, grid_size)
    return ModeSpectrum(k_t=k_t, weights=weights, kappa_plus=kappa[:, 0].copy(),
                        kappa_minus=kappa[:, 1].copy(), wavenumber=k, focal_length=f,
                        lens_model=model)


# --------------------------------------------------------------------------
# reconstruction
# --------------------------------------------------------------------------

def _check_points(spectrum: ModeSpectrum, points: Sequence[CylPoint]) -> None:
    floor = -spectrum.focal_length * (1.0 + 1e-9)
    for point in points:
        if point.z < floor:
            raise DomainError("points must lie behind the lens (z >= -f)",
                              module="mode_propagator",
                              context={"z": point.z, "f": spectrum.focal_length})


def _kt_rule(spectrum: ModeSpectrum, points: Sequence[CylPoint]
             ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Shared k_t rule for a batch: native nodes, or pi-phase panels fed by interpolation"""
    k = spectrum.wavenumber
    reach_z = max(abs(p.z) for p in points)
    reach_rho = max(p.rho for p in points)
    phase = k * (reach_z + reach_rho)
    if phase <= NATIVE_PHASE_PER_NODE * spectrum.size:
        return spectrum.k_t, spectrum.weights, spectrum.kappa_plus, spectrum.kappa_minus

    def budget(k_t: np.ndarray) -> np.ndarray:
        return reach_z * (k - np.sqrt(np.maximum(k * k - k_t * k_t, 0.0))) + reach_rho * k_t

    edges = oscillation_breakpoints(budget, 0.0, k, math.pi)
    nodes, weights = composite_gauss_legendre(edges, PANEL_ORDER)
    plus, minus = spectrum.interpolate(nodes)
    logger.debug("reconstruction grid: %d panels, %d nodes", edges.size - 1, nodes.size)
    return nodes, weights, plus, minus


def _mode_sum(k: float, k_t: np.ndarray, weights: np.ndarray, kappa_plus: np.ndarray,
              kappa_minus: np.ndarray, point: CylPoint) -> PolarizedField:
    k_z = np.sqrt(k * k - k_t * k_t)
    total = kappa_plus + kappa_minus
    helical = kappa_plus - kappa_minus
    g = weights * np.exp(1j * k_z * point.z) / (4.0 * math.pi)
    j0, j1, j2 = bessel_j012(k_t * point.rho)
    plus = np.sum(g * (k * helical + k_z * total) / k * j0)
    axial = -1j * SQRT2 * np.sum(g * (k_t / k) * total * j1)
    minus = np.sum(g * (k * helical - k_z * total) / k * j2)
    turn = complex(math.cos(point.phi), math.sin(point.phi))
    return PolarizedField(f_plus=complex(plus), f_z=complex(axial) * turn,
                          f_minus=complex(minus) * turn * turn)


def reconstruct_many(spectrum: ModeSpectrum, points: Sequence[CylPoint]
                     ) -> List[PolarizedField]:
    """Field at each point, all sharing one k_t rule"""
    points = list(points)
    if not points:
        return []
    _check_points(spectrum, points)
    k_t, weights, plus, minus = _kt_rule(spectrum, points)
    return [_mode_sum(spectrum.wavenumber, k_t, weights, plus, minus, p) for p in points]


def reconstruct(spectrum: ModeSpectrum, point: CylPoint) -> PolarizedField:
    """Focused field (units of E_L) at a point behind the lens"""
    return reconstruct_many(spectrum, [point])[0]


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------

def _require_samples(samples: int) -> None:
    if samples < 3:
        raise DomainError("at least 3 samples are needed", module="mode_propagator",
                          context={"samples": samples})


def full_width_half_maximum(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """FWHM and peak position by linear interpolation between bracketing samples"""
    peak = int(np.argmax(y))
    if peak == 0 or peak == y.size - 1:
        raise PreconditionError("FWHM undefined: peak is not interior to the range",
                                module="mode_propagator",
                                context={"peak_at": float(x[peak])})
    half = 0.5 * y[peak]
    below_left = np.flatnonzero(y[:peak] < half)
    below_right = np.flatnonzero(y[peak + 1:] < half)
    if below_left.size == 0 or below_right.size == 0:
        raise PreconditionError("FWHM undefined: profile does not fall to half maximum",
                                module="mode_propagator",
                                context={"range": (float(x[0]), float(x[-1]))})
    i = below_left[-1]
    left = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    j = peak + 1 + below_right[0]
    right = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return float(right - left), float(x[peak])


def axial_intensity_profile(spectrum: ModeSpectrum, z_range: Tuple[float, float],
                            samples: int, comparison: Optional[FocusGeometry] = None
                            ) -> AxialProfile:
    """|f_plus|^2 along the optical axis with its FWHM, next to the Gaussian beam of comparison"""
    _require_samples(samples)
    z = np.linspace(z_range[0], z_range[1], samples)
    fields = reconstruct_many(spectrum, [CylPoint(rho=0.0, z=float(value)) for value in z])
    intensity = np.array([abs(field.f_plus) ** 2 for field in fields])
    fwhm, peak_z = full_width_half_maximum(z, intensity)
    paraxial = None if comparison is None else paraxial_axial_intensity(comparison, z)
    return AxialProfile(z=z, intensity=intensity, fwhm=fwhm, peak_z=peak_z, paraxial=paraxial)


def focal_plane_profile(spectrum: ModeSpectrum, rho_range: Tuple[float, float],
                        samples: int) -> FocalPlaneProfile:
    """Component magnitudes across the focal plane at phi = 0"""
    _require_samples(samples)
    rho = np.linspace(rho_range[0], rho_range[1], samples)
    fields = reconstruct_many(spectrum, [CylPoint(rho=float(value)) for value in rho])
    table = np.array([field.magnitudes() for field in fields])
    return FocalPlaneProfile(rho=rho, plus=table[:, 0], z_component=table[:, 1],
                             minus=table[:, 2])


def intensity_map(spectrum: ModeSpectrum, rho_range: Tuple[float, float],
                  z_range: Tuple[float, float], rho_samples: int,
                  z_samples: int) -> IntensityMap:
    """Total intensity of the focal region on a (rho, z) grid"""
    _require_samples(rho_samples)
    _require_samples(z_samples)
    rho = np.linspace(rho_range[0], rho_range[1], rho_samples)
    z = np.linspace(z_range[0], z_range[1], z_samples)
    points = [CylPoint(rho=float(r), z=float(depth)) for depth in z for r in rho]
    fields = reconstruct_many(spectrum, points)
    intensity = np.array([field.intensity for field in fields]).reshape(z_samples, rho_samples)
    return IntensityMap(rho=rho, z=z, intensity=intensity)


def paraxial_depth_of_field(geom: FocusGeometry) -> float:
    """Twice the Rayleigh range, 2 lambda/(pi u^2)"""
    return 2.0 * geom.wavelength / (math.pi * geom.u ** 2)


# --------------------------------------------------------------------------
# consistency checks
# --------------------------------------------------------------------------

def reconstruction_error(spectrum: ModeSpectrum, geom: FocusGeometry,
                         samples: int = 64) -> float:
    """Intensity-weighted RMS relative difference to the lens field on z = -f

    Sampled over rho <= 2 w_L (or the aperture, if smaller).
    """
    _require_samples(samples)
    reach = 2.0 * geom.w_l
    if geom.aperture_finite:
        reach = min(reach, geom.rho0)
    rho = np.linspace(0.0, reach, samples)
    fields = reconstruct_many(spectrum, [lens_point(geom, float(r)) for r in rho])
    got = np.array([(f.f_plus, f.f_z, f.f_minus) for f in fields])
    want = np.stack(lens_components(geom, rho, spectrum.lens_model), axis=1)
    error = math.sqrt(float(np.sum(np.abs(got - want) ** 2)) / float(np.sum(np.abs(want) ** 2)))
    logger.debug("reconstruction error at the lens: %.3g", error)
    return error


def mirror_helicity(field_fn: FieldFunction) -> FieldFunction:
    """Field for eps_minus input from the eps_plus solution

    Reflection y -> -y swaps the circular components and sends phi to -phi.
    """
    def mirrored(point: CylPoint) -> PolarizedField:
        image = field_fn(CylPoint(rho=point.rho, phi=-point.phi, z=point.z))
        return PolarizedField(f_plus=image.f_minus, f_z=image.f_z, f_minus=image.f_plus)

    return mirrored


def divergence_ratio(spectrum: ModeSpectrum, point: CylPoint,
                     step: Optional[float] = None) -> float:
    """|div E| / |curl E| by central differences around point"""
    h = step if step is not None else 2.0 * math.pi / spectrum.wavenumber / 1000.0
    center = point.cartesian()
    probes = []
    for axis in range(3):
        for sign in (1.0, -1.0):
            shifted = center.copy()
            shifted[axis] += sign * h
            probes.append(CylPoint.from_cartesian(*shifted))
    vectors = [field.cartesian() for field in reconstruct_many(spectrum, probes)]
    # jacobian[i, j] = dE_i/dx_j
    jacobian = np.empty((3, 3), dtype=complex)
    for axis in range(3):
        jacobian[:, axis] = (vectors[2 * axis] - vectors[2 * axis + 1]) / (2.0 * h)
    divergence = np.trace(jacobian)
    curl = np.array([jacobian[2, 1] - jacobian[1, 2],
                     jacobian[0, 2] - jacobian[2, 0],
                     jacobian[1, 0] - jacobian[0, 1]])
    return float(abs(divergence) / np.linalg.norm(curl))


def mode_power(spectrum: ModeSpectrum) -> float:
    """Sum over s of the k_t integral of |kappa|^2/(2 pi k_t)"""
    density = (np.abs(spectrum.kappa_plus) ** 2 + np.abs(spectrum.kappa_minus) ** 2) \
        / (2.0 * math.pi * spectrum.k_t)
    return float(np.sum(spectrum.weights * density))


def lens_plane_power(geom: FocusGeometry, model: LensModel = LensModel.SPHERICAL) -> float:
    """Area integral of |F|^2 over the lens plane, in units of E_L^2 m^2"""
    spec = QuadratureSpec.for_geometry(geom)

    def integrand(rho: np.ndarray) -> np.ndarray:
        plus, axial, minus = lens_components(geom, rho, model)
        return 2.0 * math.pi * rho * (np.abs(plus) ** 2 + np.abs(axial) ** 2
                                      + np.abs(minus) ** 2)

    return float(integrate_radial(integrand, spec).real)
