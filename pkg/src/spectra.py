"""
Transmission spectra: Lorentzian dip model, least-squares fit and CSV I/O
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union
import csv
import math

import numpy as np
from lmfit import Minimizer, Parameters

from .errors import DomainError, FitError
from .extinction import extinction_fiber
from .logging_config import get_logger
from .models import FocusGeometry, LinewidthReport, LorentzianFit, SpectrumRecord, _Record
from .scattering import scattering_ratio

logger = get_logger(__name__)

LINEWIDTH_THRESHOLD = 1.3
MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-8
MIN_POINTS = 5
# Widest FWHM the fit may reach, in units of the scanned span
FWHM_BOUND_SPANS = 10.0
CSV_COLUMNS = ("detuning_mhz", "transmission", "sigma")

PathLike = Union[str, Path]


def model_transmission(center: float, fwhm: float, t_min: float,
                       detuning: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """1 - (1 - t_min) h^2 / ((delta - center)^2 + h^2) with h = fwhm/2"""
    if not fwhm > 0.0:
        raise DomainError("fwhm must be > 0", module="spectra", context={"fwhm": fwhm})
    half = 0.5 * fwhm
    offset = np.asarray(detuning, dtype=float) - center
    value = 1.0 - (1.0 - t_min) * half ** 2 / (offset ** 2 + half ** 2)
    return float(value) if np.ndim(value) == 0 else value


def _residual(params: Parameters, detuning: np.ndarray, data: np.ndarray,
              weights: np.ndarray) -> np.ndarray:
    model = model_transmission(params["center"].value, params["fwhm"].value,
                               params["t_min"].value, detuning)
    return (model - data) * weights


def _jacobian(params: Parameters, detuning: np.ndarray, data: np.ndarray,
              weights: np.ndarray) -> np.ndarray:
    """Rows d(residual)/d(center, fwhm, t_min), one column per point"""
    center = params["center"].value
    half = 0.5 * params["fwhm"].value
    depth = 1.0 - params["t_min"].value
    offset = detuning - center
    denom = offset ** 2 + half ** 2
    d_center = -depth * 2.0 * half ** 2 * offset / denom ** 2
    # d/dW = (1/2) d/dh
    d_fwhm = -depth * half * offset ** 2 / denom ** 2
    d_tmin = half ** 2 / denom
    return np.array([d_center, d_fwhm, d_tmin]) * weights


def _initial_guess(detuning: np.ndarray, data: np.ndarray) -> Dict[str, float]:
    """Minimum point for center and depth, half-depth crossings for the width"""
    lowest = int(np.argmin(data))
    t_min = float(data[lowest])
    half = 0.5 * (1.0 + t_min)
    above = data >= half
    left = np.flatnonzero(above[:lowest])
    right = np.flatnonzero(above[lowest:])
    lo = detuning[left[-1]] if left.size else detuning[0]
    hi = detuning[lowest + right[0]] if right.size else detuning[-1]
    fwhm = max(float(hi - lo), 2.0 * float(np.min(np.diff(detuning))))
    return {"center": float(detuning[lowest]), "fwhm": fwhm, "t_min": min(max(t_min, 0.0), 1.0)}


def _degenerate(record: SpectrumRecord, bound: float) -> LorentzianFit:
    data = record.transmissions
    logger.warning("spectrum shows no dip; returning a degenerate fit")
    return LorentzianFit(center=float(np.mean(record.detunings)), fwhm=bound, t_min=1.0,
                         residual_rms=float(np.sqrt(np.mean((data - 1.0) ** 2))),
                         degenerate=True)


def fit_lorentzian(record: SpectrumRecord) -> LorentzianFit:
    """Weighted Levenberg-Marquardt fit of center, FWHM and T_min (baseline fixed at 1)"""
    detuning, data = record.detunings, record.transmissions
    if detuning.size < MIN_POINTS:
        raise DomainError("at least 5 points are needed to fit a dip", module="spectra",
                          context={"points": int(detuning.size)})
    span = float(detuning[-1] - detuning[0])
    bound = FWHM_BOUND_SPANS * span
    noise = float(np.median(record.sigmas)) if record.sigmas is not None else 0.0
    if 1.0 - float(np.min(data)) <= max(2.0 * noise, 1e-12):
        return _degenerate(record, bound)

    weighted = record.sigmas is not None
    weights = 1.0 / record.sigmas if weighted else np.ones_like(data)
    guess = _initial_guess(detuning, data)
    params = Parameters()
    params.add("center", value=guess["center"], min=detuning[0] - span, max=detuning[-1] + span)
    params.add("fwhm", value=guess["fwhm"], min=1e-9 * span, max=bound)
    params.add("t_min", value=guess["t_min"], min=0.0, max=1.0)

    minimizer = Minimizer(_residual, params, fcn_args=(detuning, data, weights),
                          scale_covar=not weighted, max_nfev=MAX_ITERATIONS)
    result = minimizer.minimize(method="leastsq", Dfun=_jacobian, col_deriv=True,
                                xtol=STEP_TOLERANCE)
    if not result.success:
        raise FitError("Lorentzian fit did not converge", module="spectra",
                       estimate={name: p.value for name, p in result.params.items()},
                       context={"message": result.message, "nfev": result.nfev})

    best = result.params
    fit_params = (best["center"].value, best["fwhm"].value, best["t_min"].value)
    residuals = model_transmission(*fit_params, detuning) - data
    covariance = np.asarray(result.covar) if result.covar is not None \
        else np.full((3, 3), np.nan)
    logger.debug("Lorentzian fit: center=%.6g fwhm=%.6g t_min=%.6g in %d evaluations",
                 *fit_params, result.nfev)
    return LorentzianFit(center=fit_params[0], fwhm=fit_params[1], t_min=fit_params[2],
                         residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
                         covariance=covariance,
                         degenerate=math.isclose(fit_params[1], bound, rel_tol=1e-6),
                         iterations=int(result.nfev))


def natural_linewidth_check(fit: LorentzianFit, gamma_natural: float,
                            threshold: float = LINEWIDTH_THRESHOLD) -> LinewidthReport:
    """Compare the fitted width to the natural linewidth (both MHz)"""
    if not gamma_natural > 0.0:
        raise DomainError("natural linewidth must be > 0", module="spectra",
                          context={"gamma_natural": gamma_natural})
    ratio = fit.fwhm / gamma_natural
    consistent = ratio <= threshold
    if not consistent:
        logger.warning("fitted width %.3g MHz is %.3g natural linewidths", fit.fwhm, ratio)
    return LinewidthReport(fwhm=fit.fwhm, gamma_natural=gamma_natural, ratio=ratio,
                           threshold=threshold, consistent=consistent)


def synthetic_spectrum(center: float, fwhm: float, t_min: float, detunings: Sequence[float],
                       noise: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> SpectrumRecord:
    """Lorentzian dip sampled at the detunings, with optional Gaussian noise"""
    grid = np.asarray(detunings, dtype=float)
    values = np.asarray(model_transmission(center, fwhm, t_min, grid), dtype=float)
    if noise <= 0.0:
        return SpectrumRecord(detunings=grid, transmissions=values)
    rng = rng if rng is not None else np.random.default_rng()
    noisy = values + rng.normal(0.0, noise, grid.size)
    return SpectrumRecord(detunings=grid, transmissions=noisy, sigmas=np.full(grid.size, noise))


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def read_spectrum_csv(path: PathLike) -> SpectrumRecord:
    """Load `detuning_mhz,transmission[,sigma]` with '#' comment lines"""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip() and not line.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise DomainError("spectrum file is empty", module="spectra", context={"path": str(path)})
    header = tuple(cell.strip() for cell in rows[0])
    if header not in (CSV_COLUMNS[:2], CSV_COLUMNS):
        raise DomainError("unexpected spectrum header", module="spectra",
                          context={"header": ",".join(header)})
    try:
        points = [tuple(float(cell) for cell in row) for row in rows[1:]]
    except ValueError as e:
        raise DomainError("non-numeric value in spectrum file", module="spectra",
                          context={"path": str(path)}) from e
    if any(len(point) != len(header) for point in points):
        raise DomainError("row width does not match the header", module="spectra")
    return SpectrumRecord.create(points)


def write_spectrum_csv(record: SpectrumRecord, path: PathLike,
                       comments: Iterable[str] = ()) -> None:
    """Write a spectrum in the format read_spectrum_csv accepts"""
    columns = CSV_COLUMNS if record.sigmas is not None else CSV_COLUMNS[:2]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for comment in comments:
            handle.write(f"# {comment}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for point in record.points:
            writer.writerow([f"{value:.10g}" for value in point])


# --------------------------------------------------------------------------
# measured reference data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasuredSpectrum(_Record):
    """One measured transmission spectrum (f = 4.5 mm, 780 nm probe)"""
    w_l_mm: float
    u: float
    w_f_um: float
    w_d_um: float
    epsilon_percent: float
    epsilon_error: float
    fwhm_mhz: float
    fwhm_error: float


MEASURED_SPECTRA = (
    MeasuredSpectrum(0.5, 0.11, 2.23, 2.0, 2.38, 0.03, 7.1, 0.2),
    MeasuredSpectrum(1.1, 0.24, 1.01, 2.0, 7.2, 0.1, 7.4, 0.2),
    MeasuredSpectrum(1.3, 0.29, 0.86, 1.4, 9.8, 0.2, 7.5, 0.2),
    MeasuredSpectrum(1.4, 0.31, 0.80, 1.4, 10.4, 0.1, 7.7, 0.2),
)


def discrepancy_report(rows: Sequence[MeasuredSpectrum] = MEASURED_SPECTRA,
                       f: float = 4.5e-3, wavelength: float = 780e-9) -> List[Dict[str, Any]]:
    """Theory next to measurement for each row; u recomputed from w_L/f"""
    report = []
    for row in rows:
        geom = FocusGeometry(w_l=row.w_l_mm * 1e-3, f=f, wavelength=wavelength)
        r_sc = scattering_ratio(geom).r_sc
        theory = 100.0 * extinction_fiber(r_sc).epsilon
        report.append({
            "w_l_mm": row.w_l_mm,
            "u": geom.u,
            "r_sc": r_sc,
            "epsilon_theory_percent": theory,
            "epsilon_measured_percent": row.epsilon_percent,
            "measured_over_theory": row.epsilon_percent / theory,
            "theory_exceeds_measurement": theory >= row.epsilon_percent,
        })
    return report
