"""
Main application orchestrator for AtomLens
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import math

import numpy as np

from .extinction import (
    clamp_for_report, extinction_finite_aperture, extinction_fiber, extinction_full_plane,
    motional_correction, motional_correction_monte_carlo, pickup_factor,
)
from .green_focus import focal_amplitude
from .logging_config import get_logger
from .mode_propagator import (
    DEFAULT_GRID_SIZE, axial_intensity_profile, decompose, focal_plane_profile, intensity_map,
    paraxial_depth_of_field,
)
from .models import (
    AxialProfile, FocalPlaneProfile, FocusGeometry, IntensityMap, LensModel, LinewidthReport,
    LorentzianFit, ModeSpectrum, MotionalModel, OptimumResult, SpectrumRecord,
    TrapThermalState,
)
from .scattering import (
    DEFAULT_SEARCH_INTERVAL, find_optimal_focusing, scan_scattering_ratio, scattering_ratio,
    scattering_ratio_for,
)
from .spectra import (
    LINEWIDTH_THRESHOLD, MEASURED_SPECTRA, discrepancy_report, fit_lorentzian,
    natural_linewidth_check, read_spectrum_csv,
)

logger = get_logger(__name__)

Table = Tuple[List[str], List[Tuple[Any, ...]]]

RB87_NATURAL_LINEWIDTH_MHZ = 6.0666


class AtomLens:
    """Main AtomLens orchestrator shared by the CLI and the HTTP service"""

    def __init__(self, grid_size: int = DEFAULT_GRID_SIZE, workers: int = 1,
                 relative_tolerance: float = 1e-8, lens_model: LensModel = LensModel.SPHERICAL):
        self.grid_size = grid_size
        self.workers = workers
        self.relative_tolerance = relative_tolerance
        self.lens_model = lens_model

    # ------------------------------------------------------------------ fields

    def _spectrum(self, geom: FocusGeometry) -> ModeSpectrum:
        logger.info("decomposing u=%.4g with %d k_t nodes", geom.u, self.grid_size)
        return decompose(geom, self.grid_size, model=self.lens_model,
                         relative_tolerance=self.relative_tolerance, workers=self.workers)

    def axial_profile(self, geom: FocusGeometry, z_range: Tuple[float, float],
                      samples: int) -> AxialProfile:
        return axial_intensity_profile(self._spectrum(geom), z_range, samples, comparison=geom)

    def focal_plane(self, geom: FocusGeometry, rho_range: Tuple[float, float],
                    samples: int) -> FocalPlaneProfile:
        return focal_plane_profile(self._spectrum(geom), rho_range, samples)

    def field_map(self, geom: FocusGeometry, rho_range: Tuple[float, float],
                  z_range: Tuple[float, float], rho_samples: int,
                  z_samples: int) -> IntensityMap:
        return intensity_map(self._spectrum(geom), rho_range, z_range, rho_samples, z_samples)

    def depth_of_field(self, geom: FocusGeometry) -> float:
        return paraxial_depth_of_field(geom)

    # -------------------------------------------------------------- scattering

    def scattering_summary(self, geom: FocusGeometry,
                           power: Optional[float] = None) -> Dict[str, Any]:
        """R_sc, focal amplitude and, with a power, |E_A| for one geometry"""
        result = scattering_ratio_for(geom)
        amplitude = focal_amplitude(geom, power)
        summary = result.to_dict()
        summary["focal_ratio_phase"] = amplitude.phase
        if amplitude.absolute is not None:
            summary["e_a_volts_per_meter"] = amplitude.absolute
        return summary

    def rsc_scan(self, us: Sequence[float], f: float, wavelength: float,
                 v: float = math.inf) -> Table:
        columns = ["u", "r_sc", "epsilon_fiber", "epsilon_aperture", "reflectivity"]
        rows = []
        for result in scan_scattering_ratio(us, f, wavelength, workers=self.workers):
            fiber = extinction_fiber(result.r_sc)
            aperture = self._aperture_extinction(result.u, f, wavelength, v, result.r_sc)
            rows.append((result.u, result.r_sc, fiber.epsilon, aperture.epsilon,
                         fiber.reflectivity))
        return columns, rows

    def extinction_scan(self, us: Sequence[float], f: float, wavelength: float,
                        v: float) -> Table:
        columns = ["u", "r_sc", "epsilon_full_plane", "epsilon_fiber", "reflectivity_fiber",
                   "epsilon_aperture", "reflectivity_aperture", "alpha"]
        alpha = pickup_factor(v) if math.isfinite(v) else 0.0
        rows = []
        for result in scan_scattering_ratio(us, f, wavelength, workers=self.workers):
            fiber = extinction_fiber(result.r_sc)
            aperture = self._aperture_extinction(result.u, f, wavelength, v, result.r_sc)
            rows.append((result.u, result.r_sc, extinction_full_plane(result.r_sc).epsilon,
                         fiber.epsilon, fiber.reflectivity, aperture.epsilon,
                         aperture.reflectivity, alpha))
        return columns, rows

    @staticmethod
    def _aperture_extinction(u: float, f: float, wavelength: float, v: float, r_sc: float):
        if u == 0.0:
            return extinction_full_plane(0.0)
        if not math.isfinite(v):
            return extinction_full_plane(r_sc)
        geom = FocusGeometry.from_u(u, f=f, wavelength=wavelength, v=v)
        return clamp_for_report(extinction_finite_aperture(geom))

    def table1(self, f: float = 4.5e-3, wavelength: float = 780e-9) -> Table:
        columns = ["w_l_mm", "u", "w_f_um", "r_sc", "epsilon_theory_percent",
                   "epsilon_measured_percent"]
        rows = []
        for row, report in zip(MEASURED_SPECTRA, discrepancy_report(MEASURED_SPECTRA, f,
                                                                    wavelength)):
            geom = FocusGeometry(w_l=row.w_l_mm * 1e-3, f=f, wavelength=wavelength)
            rows.append((row.w_l_mm, geom.u, geom.w_f * 1e6, report["r_sc"],
                         report["epsilon_theory_percent"], row.epsilon_percent))
        return columns, rows

    def optimum(self, interval: Tuple[float, float] = DEFAULT_SEARCH_INTERVAL,
                tolerance: float = 1e-4) -> OptimumResult:
        return find_optimal_focusing(interval, tolerance)

    def extinction_summary(self, geom: FocusGeometry) -> Dict[str, Any]:
        """Extinction for every collection geometry the focusing geometry allows"""
        r_sc = scattering_ratio(geom).r_sc
        summary: Dict[str, Any] = {
            "r_sc": r_sc,
            "full_plane": extinction_full_plane(r_sc).to_dict(),
            "fiber_mode": extinction_fiber(r_sc).to_dict(),
        }
        if geom.aperture_finite:
            summary["finite_aperture"] = extinction_finite_aperture(geom).to_dict()
            summary["pickup_factor"] = pickup_factor(geom.v)
        return summary

    # ----------------------------------------------------------------- spectra

    def fit_spectrum(self, path: Path, gamma_natural: float = RB87_NATURAL_LINEWIDTH_MHZ,
                     threshold: float = LINEWIDTH_THRESHOLD
                     ) -> Tuple[LorentzianFit, LinewidthReport]:
        return self.fit_record(read_spectrum_csv(path), gamma_natural, threshold)

    def fit_record(self, record: SpectrumRecord, gamma_natural: float = RB87_NATURAL_LINEWIDTH_MHZ,
                   threshold: float = LINEWIDTH_THRESHOLD
                   ) -> Tuple[LorentzianFit, LinewidthReport]:
        fit = fit_lorentzian(record)
        return fit, natural_linewidth_check(fit, gamma_natural, threshold)

    # ------------------------------------------------------------------ motion

    def motion(self, waists: Sequence[float], f: float, wavelength: float,
               trap: TrapThermalState, model: MotionalModel = MotionalModel.RADIAL,
               samples: int = 0, seed: Optional[int] = None) -> Table:
        """Motional reduction per input waist, with a Monte Carlo column when samples > 0

        reduction_percent follows model; the other transverse model gets its own column.
        """
        other = next(m for m in MotionalModel if m is not model)
        columns = ["w_l_mm", "u", "r_sc", "r_sc_thermal", "reduction_percent",
                   f"reduction_{other.value.replace('-', '_')}_percent"]
        if samples:
            columns += ["r_sc_monte_carlo", "reduction_monte_carlo_percent"]
        rng = np.random.default_rng(seed)
        rows = []
        for w_l in waists:
            geom = FocusGeometry(w_l=w_l, f=f, wavelength=wavelength)
            r_sc = scattering_ratio(geom).r_sc
            thermal = motional_correction(r_sc, geom, trap, model)
            alternative = motional_correction(r_sc, geom, trap, other)
            row: Tuple[Any, ...] = (w_l * 1e3, geom.u, r_sc, thermal,
                                    100.0 * (1.0 - thermal / r_sc),
                                    100.0 * (1.0 - alternative / r_sc))
            if samples:
                sampled = motional_correction_monte_carlo(r_sc, geom, trap, samples, rng, model)
                row += (sampled, 100.0 * (1.0 - sampled / r_sc))
            rows.append(row)
        return columns, rows


def main():
    """Main entry point"""
    from .cli import cli

    cli()


if __name__ == "__main__":
    main()
