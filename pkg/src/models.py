"""
Core data models for AtomLens
"""
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple
import json
import math

import numpy as np
from numpy.polynomial import legendre

from .constants import (
    BOLTZMANN, EPSILON_0, HBAR, RB87_D2_LINEWIDTH_HZ, RB87_D2_WAVELENGTH,
    RB87_MASS, SPEED_OF_LIGHT,
)
from .errors import DomainError

# Gaussian envelope exp(-rho^2/w^2) is below 1e-12 past 5.26 w
ENVELOPE_CUTOFF = 5.26
DEFAULT_TRUNCATION = 5.3


def _jsonable(value: Any) -> Any:
    """Convert numpy, complex and enum values for JSON output"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


class _Record:
    """Shared serialization for the dataclasses below"""

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for output"""
        return _jsonable({f.name: getattr(self, f.name) for f in fields(self)})  # type: ignore[arg-type]

    def to_json(self) -> str:
        """Convert to JSON string"""
        return json.dumps(self.to_dict(), default=str)


# --------------------------------------------------------------------------
# numerics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec(_Record):
    """Tolerances and limits for radial quadrature

    max_subdivisions caps the number of subintervals the adaptive integrator may
    hold; it is raised to fit the starting breakpoints when those are more.
    """
    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 0.0
    max_subdivisions: int = 10_000
    truncation_radius: float = math.inf
    initial_panels: int = 8

    def __post_init__(self):
        if not 0.0 < self.relative_tolerance <= 1e-3:
            raise DomainError("relative_tolerance must lie in (0, 1e-3]", module="numerics",
                              context={"relative_tolerance": self.relative_tolerance})
        if self.absolute_tolerance < 0.0:
            raise DomainError("absolute_tolerance must be >= 0", module="numerics",
                              context={"absolute_tolerance": self.absolute_tolerance})
        if self.max_subdivisions < 1 or self.initial_panels < 1:
            raise DomainError("max_subdivisions and initial_panels must be >= 1",
                              module="numerics")
        if not self.truncation_radius > 0.0:
            raise DomainError("truncation_radius must be > 0", module="numerics",
                              context={"truncation_radius": self.truncation_radius})

    @classmethod
    def for_geometry(cls, geom: "FocusGeometry", relative_tolerance: float = 1e-9,
                     **kwargs) -> 'QuadratureSpec':
        """Factory: truncate where the input envelope is negligible, or at the aperture"""
        radius = DEFAULT_TRUNCATION * geom.w_l
        if geom.aperture_finite:
            radius = min(radius, geom.rho0)
        return cls(relative_tolerance=relative_tolerance, truncation_radius=radius, **kwargs)

    def covers_envelope(self, w_l: float) -> bool:
        """True when the cutoff leaves exp(-rho^2/w^2) below 1e-12"""
        return self.truncation_radius >= ENVELOPE_CUTOFF * w_l


@dataclass(frozen=True)
class GammaArgs(_Record):
    """Arguments (a, x) of the upper incomplete gamma function"""
    a: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.x)):
            raise DomainError("incomplete gamma arguments must be finite", module="numerics",
                              context={"a": self.a, "x": self.x})
        if self.x < 0.0 or (self.x == 0.0 and self.a <= 0.0):
            raise DomainError("Gamma(a, x) diverges for x <= 0 with a <= 0", module="numerics",
                              context={"a": self.a, "x": self.x})


# --------------------------------------------------------------------------
# lens field
# --------------------------------------------------------------------------

class LensModel(str, Enum):
    """Phase imprinted by the ideal lens"""
    SPHERICAL = "spherical"
    PARABOLIC = "parabolic"


@dataclass(frozen=True)
class FocusGeometry(_Record):
    """Input waist, focal length, wavelength and aperture half-f-number v = rho0/f"""
    w_l: float
    f: float
    wavelength: float
    v: float = math.inf

    def __post_init__(self):
        for name in ("w_l", "f", "wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be a positive length", module="lens_field",
                                  context={name: value})
        if math.isnan(self.v) or self.v <= 0.0:
            raise DomainError("aperture v must be > 0 or infinite", module="lens_field",
                              context={"v": self.v})

    @classmethod
    def create(cls, w_l: float, f: float, wavelength: float, rho0: Optional[float] = None,
               na: Optional[float] = None) -> 'FocusGeometry':
        """Factory method; the aperture may be given as a radius or a numerical aperture"""
        if rho0 is not None and na is not None:
            raise DomainError("give either rho0 or na, not both", module="lens_field")
        v = math.inf
        if rho0 is not None:
            v = rho0 / f
        elif na is not None:
            if not 0.0 < na < 1.0:
                raise DomainError("numerical aperture must lie in (0, 1)", module="lens_field",
                                  context={"na": na})
            v = na / math.sqrt(1.0 - na * na)
        return cls(w_l=w_l, f=f, wavelength=wavelength, v=v)

    @classmethod
    def from_u(cls, u: float, f: float = 4.5e-3, wavelength: float = 780e-9,
               v: float = math.inf) -> 'FocusGeometry':
        """Factory method keyed on the focusing strength"""
        return cls(w_l=u * f, f=f, wavelength=wavelength, v=v)

    def with_aperture(self, v: float) -> 'FocusGeometry':
        return replace(self, v=v)

    @property
    def u(self) -> float:
        return self.w_l / self.f

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def aperture_finite(self) -> bool:
        return math.isfinite(self.v)

    @property
    def rho0(self) -> float:
        return self.v * self.f

    @property
    def na(self) -> float:
        if not self.aperture_finite:
            return 1.0
        return self.v / math.sqrt(1.0 + self.v * self.v)

    @property
    def w_f(self) -> float:
        """Paraxial focal waist"""
        return self.wavelength / (math.pi * self.u)

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.w_f ** 2 / self.wavelength


@dataclass(frozen=True)
class CylPoint(_Record):
    """Cylindrical coordinates with the origin at the focus"""
    rho: float
    phi: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not self.rho >= 0.0:
            raise DomainError("rho must be >= 0", module="lens_field", context={"rho": self.rho})

    @property
    def r(self) -> float:
        return math.hypot(self.rho, self.z)

    def cartesian(self) -> np.ndarray:
        return np.array([self.rho * math.cos(self.phi), self.rho * math.sin(self.phi), self.z])

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> 'CylPoint':
        return cls(rho=math.hypot(x, y), phi=math.atan2(y, x), z=z)


@dataclass(frozen=True)
class PolarizedField(_Record):
    """Field amplitudes along (eps_plus, z, eps_minus)"""
    f_plus: complex = 0j
    f_z: complex = 0j
    f_minus: complex = 0j

    @property
    def intensity(self) -> float:
        return abs(self.f_plus) ** 2 + abs(self.f_z) ** 2 + abs(self.f_minus) ** 2

    def magnitudes(self) -> Tuple[float, float, float]:
        return abs(self.f_plus), abs(self.f_z), abs(self.f_minus)

    def cartesian(self) -> np.ndarray:
        """(Ex, Ey, Ez) with eps_pm = (x +- i y)/sqrt(2)"""
        root2 = math.sqrt(2.0)
        return np.array([
            (self.f_plus + self.f_minus) / root2,
            1j * (self.f_plus - self.f_minus) / root2,
            self.f_z,
        ], dtype=complex)

    @classmethod
    def from_cartesian(cls, vector: np.ndarray) -> 'PolarizedField':
        ex, ey, ez = (complex(c) for c in vector)
        root2 = math.sqrt(2.0)
        return cls(f_plus=(ex - 1j * ey) / root2, f_z=ez, f_minus=(ex + 1j * ey) / root2)


# --------------------------------------------------------------------------
# mode propagator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeIndex(_Record):
    """One cylindrical mode (k_t, s) at angular momentum m"""
    k_t: float
    s: int
    wavenumber: float
    m: int = 1

    def __post_init__(self):
        if not 0.0 < self.k_t < self.wavenumber:
            raise DomainError("k_t must lie in (0, k)", module="mode_propagator",
                              context={"k_t": self.k_t, "k": self.wavenumber})
        if self.s not in (1, -1):
            raise DomainError("helicity must be +1 or -1", module="mode_propagator",
                              context={"s": self.s})

    @property
    def k_z(self) -> float:
        return math.sqrt(self.wavenumber ** 2 - self.k_t ** 2)


@dataclass(frozen=True, eq=False)
class ModeSpectrum(_Record):
    """Mode coefficients kappa on Gauss-Legendre nodes in k_t over (0, k), m = 1"""
    k_t: np.ndarray
    weights: np.ndarray
    kappa_plus: np.ndarray
    kappa_minus: np.ndarray
    wavenumber: float
    focal_length: float
    lens_model: LensModel = LensModel.SPHERICAL
    m: int = 1

    MIN_NODES = 64

    def __post_init__(self):
        n = self.k_t.size
        if n < self.MIN_NODES:
            raise DomainError("mode spectrum needs at least 64 nodes", module="mode_propagator",
                              context={"nodes": n})
        if not all(a.shape == (n,) for a in (self.weights, self.kappa_plus, self.kappa_minus)):
            raise DomainError("node and coefficient arrays must have equal length",
                              module="mode_propagator")
        if np.any(np.diff(self.k_t) <= 0.0) or self.k_t[0] <= 0.0 \
                or self.k_t[-1] >= self.wavenumber:
            raise DomainError("k_t nodes must increase strictly inside (0, k)",
                              module="mode_propagator")
        if not (np.all(np.isfinite(self.kappa_plus)) and np.all(np.isfinite(self.kappa_minus))):
            raise DomainError("mode coefficients must be finite", module="mode_propagator")

    @property
    def size(self) -> int:
        return int(self.k_t.size)

    @property
    def nodes(self) -> List[Tuple[float, float]]:
        return list(zip(self.k_t.tolist(), self.weights.tolist()))

    @property
    def k_z(self) -> np.ndarray:
        return np.sqrt(self.wavenumber ** 2 - self.k_t ** 2)

    def coefficient(self, index: ModeIndex) -> complex:
        """kappa at a stored node; any m other than 1 is identically zero"""
        if index.m != self.m:
            return 0j
        hit = np.flatnonzero(np.isclose(self.k_t, index.k_t, rtol=1e-12, atol=0.0))
        if hit.size == 0:
            raise DomainError("k_t is not a node of this spectrum", module="mode_propagator",
                              context={"k_t": index.k_t})
        table = self.kappa_plus if index.s == 1 else self.kappa_minus
        return complex(table[hit[0]])

    @cached_property
    def legendre_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        """Legendre series of kappa on (0, k) from the Gauss nodes (discrete transform)"""
        x = 2.0 * self.k_t / self.wavenumber - 1.0
        w = 2.0 * self.weights / self.wavenumber
        basis = legendre.legvander(x, self.size - 1)
        norm = (2.0 * np.arange(self.size) + 1.0) / 2.0
        plus = norm * (basis.T @ (w * self.kappa_plus))
        minus = norm * (basis.T @ (w * self.kappa_minus))
        return plus, minus

    def interpolate(self, k_t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """kappa_plus and kappa_minus at arbitrary k_t in (0, k)"""
        x = 2.0 * np.asarray(k_t) / self.wavenumber - 1.0
        plus, minus = self.legendre_coefficients
        return legendre.legval(x, plus), legendre.legval(x, minus)

    def to_dict(self) -> Dict[str, Any]:
        return _jsonable({
            "k_t": self.k_t, "weights": self.weights,
            "kappa_plus": self.kappa_plus, "kappa_minus": self.kappa_minus,
            "wavenumber": self.wavenumber, "focal_length": self.focal_length,
            "lens_model": self.lens_model, "m": self.m,
        })


@dataclass(frozen=True, eq=False)
class AxialProfile(_Record):
    """On-axis |f_plus|^2 samples and their full width at half maximum

    paraxial holds the Gaussian-beam intensity at the same z when a comparison
    geometry was given.
    """
    z: np.ndarray
    intensity: np.ndarray
    fwhm: float
    peak_z: float
    paraxial: Optional[np.ndarray] = None

    def rows(self) -> List[Tuple[float, ...]]:
        if self.paraxial is None:
            return list(zip(self.z.tolist(), self.intensity.tolist()))
        return list(zip(self.z.tolist(), self.intensity.tolist(), self.paraxial.tolist()))


@dataclass(frozen=True, eq=False)
class FocalPlaneProfile(_Record):
    """Component magnitudes across the focal plane at phi = 0"""
    rho: np.ndarray
    plus: np.ndarray
    z_component: np.ndarray
    minus: np.ndarray

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return list(zip(self.rho.tolist(), self.plus.tolist(),
                        self.z_component.tolist(), self.minus.tolist()))


@dataclass(frozen=True, eq=False)
class IntensityMap(_Record):
    """Total intensity on a (rho, z) grid, indexed [z, rho]"""
    rho: np.ndarray
    z: np.ndarray
    intensity: np.ndarray

    def rows(self) -> List[Tuple[float, float, float]]:
        return [(float(z), float(rho), float(self.intensity[i, j]))
                for i, z in enumerate(self.z) for j, rho in enumerate(self.rho)]


# --------------------------------------------------------------------------
# green focus
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FocalAmplitude(_Record):
    """E_A/E_L at the focus (purely eps_plus), optionally with |E_A| in V/m"""
    ratio: complex
    absolute: Optional[float] = None
    polarization: str = "plus"

    @property
    def magnitude(self) -> float:
        return abs(self.ratio)

    @property
    def phase(self) -> float:
        return math.atan2(self.ratio.imag, self.ratio.real)


# --------------------------------------------------------------------------
# scattering
# --------------------------------------------------------------------------

def _decay_rate(omega_12: float, dipole: float) -> float:
    return omega_12 ** 3 * dipole ** 2 / (3.0 * math.pi * EPSILON_0 * HBAR * SPEED_OF_LIGHT ** 3)


@dataclass(frozen=True)
class AtomParams(_Record):
    """Two-level atom: decay rate, transition frequency (rad/s) and dipole moment (C m)"""
    gamma: float
    omega_12: float
    dipole: float

    def __post_init__(self):
        if not (self.gamma > 0.0 and self.omega_12 > 0.0 and self.dipole > 0.0):
            raise DomainError("gamma, omega_12 and dipole must be positive", module="scattering",
                              context={"gamma": self.gamma, "omega_12": self.omega_12})
        expected = _decay_rate(self.omega_12, self.dipole)
        if abs(expected - self.gamma) > 1e-10 * self.gamma:
            raise DomainError("decay rate inconsistent with dipole moment", module="scattering",
                              context={"gamma": self.gamma, "from_dipole": expected})

    @classmethod
    def from_decay_rate(cls, gamma: float, wavelength: float) -> 'AtomParams':
        """Factory: derive the dipole moment from the decay rate"""
        omega_12 = 2.0 * math.pi * SPEED_OF_LIGHT / wavelength
        dipole = math.sqrt(3.0 * math.pi * EPSILON_0 * HBAR * SPEED_OF_LIGHT ** 3 * gamma
                           / omega_12 ** 3)
        return cls(gamma=gamma, omega_12=omega_12, dipole=dipole)

    @classmethod
    def rubidium87_d2(cls) -> 'AtomParams':
        return cls.from_decay_rate(2.0 * math.pi * RB87_D2_LINEWIDTH_HZ, RB87_D2_WAVELENGTH)

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.omega_12


@dataclass(frozen=True)
class DriveParams(_Record):
    """Rabi frequency and detuning (rad/s)"""
    rabi: float
    detuning: float = 0.0

    def __post_init__(self):
        if not self.rabi >= 0.0:
            raise DomainError("Rabi frequency must be >= 0", module="scattering",
                              context={"rabi": self.rabi})

    @classmethod
    def from_field(cls, e_a: float, atom: AtomParams, detuning: float = 0.0) -> 'DriveParams':
        """Factory: Omega = E_A |d12| / hbar"""
        return cls(rabi=abs(e_a) * atom.dipole / HBAR, detuning=detuning)


@dataclass(frozen=True)
class ScatterResult(_Record):
    """Scattering ratio, scattered power fraction and (E_A/E_L)^2"""
    r_sc: float
    p_sc_over_pin: float
    focal_ratio: float
    u: float
    v: float = math.inf


@dataclass(frozen=True)
class OptimumResult(_Record):
    """Maximizer of R_sc(u) on a search interval"""
    u_star: float
    r_star: float
    epsilon_fiber: float
    interval: Tuple[float, float]
    at_boundary: bool = False


# --------------------------------------------------------------------------
# extinction
# --------------------------------------------------------------------------

class FluxPlane(str, Enum):
    BEFORE_FOCUS = "before_focus"
    AFTER_FOCUS = "after_focus"

    @property
    def z_sign(self) -> int:
        return -1 if self is FluxPlane.BEFORE_FOCUS else 1


@dataclass(frozen=True)
class FluxBreakdown(_Record):
    """Power through a lens plane split into input, scattered and interference parts (W)"""
    input_term: float
    scattered_term: float
    interference_term: float
    plane: FluxPlane

    @property
    def total(self) -> float:
        return self.input_term + self.scattered_term + self.interference_term


class CollectionMode(str, Enum):
    FULL_PLANE = "full_plane"
    FINITE_APERTURE = "finite_aperture"
    FIBER_MODE = "fiber_mode"


@dataclass(frozen=True)
class ExtinctionResult(_Record):
    """Extinction and reflectivity for one collection geometry (raw, unclamped)"""
    epsilon: float
    reflectivity: float
    collection: CollectionMode
    v: Optional[float] = None

    @property
    def in_range(self) -> bool:
        return 0.0 <= self.epsilon <= 1.0 and 0.0 <= self.reflectivity <= 1.0


class MotionalModel(str, Enum):
    """Transverse factor of the motional reduction: squared or single power"""
    RADIAL = "radial"
    SINGLE_AXIS = "single-axis"


@dataclass(frozen=True)
class TrapThermalState(_Record):
    """Thermal atom in a harmonic trap; frequencies in Hz"""
    temperature: float
    nu_rho: float
    nu_z: float
    mass: float = RB87_MASS

    def __post_init__(self):
        if not self.temperature >= 0.0:
            raise DomainError("temperature must be >= 0", module="extinction",
                              context={"temperature": self.temperature})
        if not (self.nu_rho > 0.0 and self.nu_z > 0.0 and self.mass > 0.0):
            raise DomainError("trap frequencies and mass must be positive", module="extinction",
                              context={"nu_rho": self.nu_rho, "nu_z": self.nu_z})

    @classmethod
    def rubidium87(cls, temperature: float, nu_rho: float, nu_z: float) -> 'TrapThermalState':
        return cls(temperature=temperature, nu_rho=nu_rho, nu_z=nu_z, mass=RB87_MASS)

    def _spread(self, nu: float) -> float:
        return math.sqrt(BOLTZMANN * self.temperature / (self.mass * (2.0 * math.pi * nu) ** 2))

    @property
    def sigma_rho(self) -> float:
        return self._spread(self.nu_rho)

    @property
    def sigma_z(self) -> float:
        return self._spread(self.nu_z)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LorentzianFit(_Record):
    """Fitted Lorentzian dip; frequencies in MHz"""
    center: float
    fwhm: float
    t_min: float
    residual_rms: float
    covariance: np.ndarray = field(default_factory=lambda: np.full((3, 3), np.nan))
    degenerate: bool = False
    iterations: int = 0

    @property
    def epsilon_max(self) -> float:
        return 1.0 - self.t_min

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.abs(np.diag(self.covariance)))

    def to_dict(self) -> Dict[str, Any]:
        return _jsonable({
            "center_mhz": self.center,
            "fwhm_mhz": self.fwhm,
            "t_min": self.t_min,
            "epsilon_max": self.epsilon_max,
            "residual_rms": self.residual_rms,
            "degenerate": self.degenerate,
            "covariance": self.covariance,
        })


@dataclass(frozen=True, eq=False)
class SpectrumRecord(_Record):
    """Transmission spectrum: detuning (MHz), transmission, optional sigma"""
    detunings: np.ndarray
    transmissions: np.ndarray
    sigmas: Optional[np.ndarray] = None
    fit: Optional[LorentzianFit] = None

    TRANSMISSION_CEILING = 1.2

    def __post_init__(self):
        n = self.detunings.size
        if self.transmissions.shape != (n,) or (self.sigmas is not None
                                                 and self.sigmas.shape != (n,)):
            raise DomainError("spectrum columns must have equal length", module="spectra")
        if np.any(np.diff(self.detunings) <= 0.0):
            raise DomainError("detunings must increase strictly", module="spectra")
        if np.any(self.transmissions < 0.0) or np.any(self.transmissions > self.TRANSMISSION_CEILING):
            raise DomainError("transmission values must lie in [0, 1.2]", module="spectra",
                              context={"min": float(self.transmissions.min()),
                                       "max": float(self.transmissions.max())})
        if self.sigmas is not None and np.any(self.sigmas <= 0.0):
            raise DomainError("uncertainties must be positive", module="spectra")

    @classmethod
    def create(cls, points: List[Tuple[float, ...]]) -> 'SpectrumRecord':
        """Factory method from (detuning, transmission[, sigma]) tuples"""
        if not points:
            raise DomainError("empty spectrum", module="spectra")
        widths = {len(p) for p in points}
        if widths not in ({2}, {3}):
            raise DomainError("points must all be (detuning, transmission[, sigma])",
                              module="spectra")
        table = np.asarray(points, dtype=float)
        sigmas = table[:, 2].copy() if table.shape[1] == 3 else None
        return cls(detunings=table[:, 0].copy(), transmissions=table[:, 1].copy(), sigmas=sigmas)

    @property
    def points(self) -> List[Tuple[float, ...]]:
        if self.sigmas is None:
            return list(zip(self.detunings.tolist(), self.transmissions.tolist()))
        return list(zip(self.detunings.tolist(), self.transmissions.tolist(),
                        self.sigmas.tolist()))

    def with_fit(self, fit: LorentzianFit) -> 'SpectrumRecord':
        return replace(self, fit=fit)


@dataclass(frozen=True)
class LinewidthReport(_Record):
    """Fitted width against the natural linewidth"""
    fwhm: float
    gamma_natural: float
    ratio: float
    threshold: float
    consistent: bool


