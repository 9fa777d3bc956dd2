"""
CLI interface for AtomLens
"""
import asyncio
import functools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import click
from pydantic import ValidationError

from . import __version__
from .datasets import DatasetWriter
from .errors import AtomLensError, ConfigError
from .logging_config import configure_logging
from .main import RB87_NATURAL_LINEWIDTH_MHZ, AtomLens
from .models import FocusGeometry, LensModel, MotionalModel, TrapThermalState
from .run_config import Command, GridRange, OutputFormat, Quantity, RunConfig
from .spectra import LINEWIDTH_THRESHOLD

NUMERIC_FAILURE = 3

LENGTH = Quantity("length")
FREQUENCY = Quantity("frequency")
TEMPERATURE = Quantity("temperature")


def geometry_options(func: Callable) -> Callable:
    """Options shared by every command that needs a focusing geometry"""
    func = click.option("--na", type=float, default=None,
                        help="Aperture numerical aperture")(func)
    func = click.option("--rho0", type=LENGTH, default=None, help="Aperture radius")(func)
    func = click.option("--lambda", "wavelength", type=LENGTH, default="780nm",
                        show_default=True, help="Wavelength")(func)
    func = click.option("--f", "focal_length", type=LENGTH, default="4.5mm",
                        show_default=True, help="Focal length")(func)
    return func


def output_options(func: Callable) -> Callable:
    func = click.option("--format", "output_format",
                        type=click.Choice([f.value for f in OutputFormat]),
                        default="csv", show_default=True)(func)
    func = click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path),
                        default=None, help="Write the dataset here instead of stdout")(func)
    return func


def numeric_options(func: Callable) -> Callable:
    func = click.option("--lens-model", type=click.Choice([m.value for m in LensModel]),
                        default=LensModel.SPHERICAL.value, show_default=True)(func)
    func = click.option("--workers", type=int, default=1, show_default=True,
                        help="Threads for node-parallel work")(func)
    func = click.option("--tolerance", "relative_tolerance", type=float, default=1e-8,
                        show_default=True, help="Relative quadrature tolerance")(func)
    func = click.option("--grid-size", type=int, default=512, show_default=True,
                        help="Gauss-Legendre nodes in k_t")(func)
    return func


def build_config(command: Command, **values: Any) -> RunConfig:
    """RunConfig from CLI values; invalid input becomes a usage error (exit 2)"""
    try:
        return RunConfig(command=command, **{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise click.UsageError(f"invalid configuration: {e}") from e
    except ConfigError as e:
        raise click.UsageError(e.describe()) from e


def emit(config: RunConfig, columns: Sequence[str], rows: Sequence[Tuple[Any, ...]],
         extra: Optional[Dict[str, Any]] = None) -> None:
    text = DatasetWriter(config).store(columns, rows, extra)
    if config.output is None:
        click.echo(text, nl=False)
    else:
        click.echo(f"✅ Wrote {len(rows)} rows to {config.output}", err=True)


def numeric_command(func: Callable) -> Callable:
    """Report library failures with module and parameters, exit 3"""
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            raise click.UsageError(e.describe()) from e
        except AtomLensError as e:
            click.echo(f"❌ {e.describe()}", err=True)
            click.get_current_context().exit(NUMERIC_FAILURE)
    return wrapper


def _orchestrator(config: RunConfig, lens_model: str = LensModel.SPHERICAL.value) -> AtomLens:
    return AtomLens(grid_size=config.grid_size, workers=config.workers,
                    relative_tolerance=config.relative_tolerance,
                    lens_model=LensModel(lens_model))


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging from the library")
def cli(verbose: bool):
    """
    🔬 AtomLens - Strong Focusing onto a Single Atom

    Vectorial focal fields, scattering ratio and extinction of one atom at the
    focus of an ideal lens.
    """
    configure_logging(logging.DEBUG if verbose else logging.WARNING)


@cli.command("field-axial")
@click.option("--w-l", "w_l", type=LENGTH, required=True, help="Input beam waist")
@geometry_options
@click.option("--z-min", type=LENGTH, default="-15um", show_default=True)
@click.option("--z-max", type=LENGTH, default="15um", show_default=True)
@click.option("--samples", type=int, default=121, show_default=True)
@numeric_options
@output_options
@numeric_command
def field_axial(w_l, focal_length, wavelength, rho0, na, z_min, z_max, samples, grid_size,
                relative_tolerance, workers, lens_model, output, output_format):
    """On-axis intensity |f_plus|^2 and its depth of field"""
    config = build_config(Command.FIELD_AXIAL, w_l=w_l, f=focal_length, wavelength=wavelength,
                          rho0=rho0, na=na, output=output, output_format=output_format,
                          grid_size=grid_size, relative_tolerance=relative_tolerance,
                          workers=workers, parameters={"z_min": z_min, "z_max": z_max,
                                                       "samples": samples,
                                                       "lens_model": lens_model})
    lens = _orchestrator(config, lens_model)
    geom = config.geometry()
    profile = lens.axial_profile(geom, (z_min, z_max), samples)
    click.echo(f"📊 FWHM {profile.fwhm * 1e6:.4g} um "
               f"(paraxial {lens.depth_of_field(geom) * 1e6:.4g} um), "
               f"peak at z = {profile.peak_z * 1e6:.4g} um", err=True)
    emit(config, ["z", "intensity", "paraxial"], profile.rows(),
         {"fwhm": profile.fwhm, "peak_z": profile.peak_z})


@cli.command("field-focal-plane")
@click.option("--w-l", "w_l", type=LENGTH, required=True, help="Input beam waist")
@geometry_options
@click.option("--rho-max", type=LENGTH, default="3um", show_default=True)
@click.option("--samples", type=int, default=61, show_default=True)
@numeric_options
@output_options
@numeric_command
def field_focal_plane(w_l, focal_length, wavelength, rho0, na, rho_max, samples, grid_size,
                      relative_tolerance, workers, lens_model, output, output_format):
    """Component magnitudes |f_plus|, |f_z|, |f_minus| across the focal plane"""
    config = build_config(Command.FIELD_FOCAL_PLANE, w_l=w_l, f=focal_length,
                          wavelength=wavelength, rho0=rho0, na=na, output=output,
                          output_format=output_format, grid_size=grid_size,
                          relative_tolerance=relative_tolerance, workers=workers,
                          parameters={"rho_max": rho_max, "samples": samples,
                                      "lens_model": lens_model})
    profile = _orchestrator(config, lens_model).focal_plane(config.geometry(), (0.0, rho_max),
                                                            samples)
    emit(config, ["rho", "plus", "z_component", "minus"], profile.rows())


@cli.command("field-map")
@click.option("--w-l", "w_l", type=LENGTH, required=True, help="Input beam waist")
@geometry_options
@click.option("--rho-max", type=LENGTH, default="3um", show_default=True)
@click.option("--z-min", type=LENGTH, default="-5um", show_default=True)
@click.option("--z-max", type=LENGTH, default="5um", show_default=True)
@click.option("--rho-samples", type=int, default=31, show_default=True)
@click.option("--z-samples", type=int, default=51, show_default=True)
@numeric_options
@output_options
@numeric_command
def field_map(w_l, focal_length, wavelength, rho0, na, rho_max, z_min, z_max, rho_samples,
              z_samples, grid_size, relative_tolerance, workers, lens_model, output,
              output_format):
    """Total intensity over the (rho, z) focal region"""
    config = build_config(Command.FIELD_MAP, w_l=w_l, f=focal_length, wavelength=wavelength,
                          rho0=rho0, na=na, output=output, output_format=output_format,
                          grid_size=grid_size, relative_tolerance=relative_tolerance,
                          workers=workers,
                          parameters={"rho_max": rho_max, "z_min": z_min, "z_max": z_max,
                                      "rho_samples": rho_samples, "z_samples": z_samples,
                                      "lens_model": lens_model})
    field = _orchestrator(config, lens_model).field_map(config.geometry(), (0.0, rho_max),
                                                        (z_min, z_max), rho_samples, z_samples)
    emit(config, ["z", "rho", "intensity"], field.rows())


def _aperture_v(config: RunConfig) -> float:
    """Collection aperture v from --rho0/--na, infinite when neither is given"""
    if config.rho0 is None and config.na is None:
        return float("inf")
    return FocusGeometry.create(w_l=config.f, f=config.f, wavelength=config.wavelength,
                                rho0=config.rho0, na=config.na).v


@cli.command("rsc-scan")
@click.option("--u", "us", type=GridRange(), default="0.01:5:0.01", show_default=True,
              help="Focusing strengths start:stop:step")
@geometry_options
@click.option("--workers", type=int, default=1, show_default=True)
@output_options
@numeric_command
def rsc_scan(us, focal_length, wavelength, rho0, na, workers, output, output_format):
    """Scattering ratio and extinction against the focusing strength u"""
    config = build_config(Command.RSC_SCAN, f=focal_length, wavelength=wavelength, rho0=rho0,
                          na=na, output=output, output_format=output_format, workers=workers,
                          parameters={"u": us})
    columns, rows = _orchestrator(config).rsc_scan(us, config.f, config.wavelength,
                                                   _aperture_v(config))
    emit(config, columns, rows)


@cli.command("extinction-scan")
@click.option("--u", "us", type=GridRange(), default="0.01:5:0.01", show_default=True,
              help="Focusing strengths start:stop:step")
@geometry_options
@click.option("--workers", type=int, default=1, show_default=True)
@output_options
@numeric_command
def extinction_scan(us, focal_length, wavelength, rho0, na, workers, output, output_format):
    """Extinction and reflectivity for every collection geometry against u"""
    if rho0 is None and na is None:
        na = 0.55
    config = build_config(Command.EXTINCTION_SCAN, f=focal_length, wavelength=wavelength,
                          rho0=rho0, na=na, output=output, output_format=output_format,
                          workers=workers, parameters={"u": us})
    columns, rows = _orchestrator(config).extinction_scan(us, config.f, config.wavelength,
                                                          _aperture_v(config))
    emit(config, columns, rows)


@cli.command("table1")
@click.option("--f", "focal_length", type=LENGTH, default="4.5mm", show_default=True)
@click.option("--lambda", "wavelength", type=LENGTH, default="780nm", show_default=True)
@output_options
@numeric_command
def table1(focal_length, wavelength, output, output_format):
    """Theory columns of the measured transmission spectra"""
    config = build_config(Command.TABLE1, f=focal_length, wavelength=wavelength,
                          output=output, output_format=output_format)
    columns, rows = _orchestrator(config).table1(config.f, config.wavelength)
    for row in rows:
        if row[4] < row[5]:
            click.echo(f"⚠️  w_L = {row[0]} mm: measurement exceeds theory", err=True)
    emit(config, columns, rows)


@cli.command("fit-spectrum")
@click.argument("spectrum_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--gamma", "gamma_natural", type=FREQUENCY,
              default=f"{RB87_NATURAL_LINEWIDTH_MHZ}MHz", show_default=True,
              help="Natural linewidth")
@click.option("--threshold", type=float, default=LINEWIDTH_THRESHOLD, show_default=True)
@output_options
@numeric_command
def fit_spectrum(spectrum_file, gamma_natural, threshold, output, output_format):
    """Fit a Lorentzian dip to a transmission spectrum CSV"""
    config = build_config(Command.FIT_SPECTRUM, output=output, output_format=output_format,
                          parameters={"spectrum_file": str(spectrum_file),
                                      "gamma_natural": gamma_natural, "threshold": threshold})
    fit, report = _orchestrator(config).fit_spectrum(spectrum_file, gamma_natural / 1e6,
                                                     threshold)
    fitted = fit.to_dict()
    mark = "✅" if report.consistent else "⚠️ "
    click.echo(f"{mark} FWHM {fit.fwhm:.4g} MHz = {report.ratio:.3g} natural linewidths", err=True)
    columns = ["center_mhz", "fwhm_mhz", "t_min", "epsilon_max", "residual_rms"]
    emit(config, columns, [tuple(fitted[name] for name in columns)],
         {"fit": fitted, "linewidth": report.to_dict()})


@cli.command("optimum")
@click.option("--u-min", type=float, default=0.5, show_default=True)
@click.option("--u-max", type=float, default=5.0, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@output_options
@numeric_command
def optimum(u_min, u_max, tolerance, output, output_format):
    """Focusing strength that maximizes the scattering ratio"""
    config = build_config(Command.OPTIMUM, output=output, output_format=output_format,
                          parameters={"u_min": u_min, "u_max": u_max, "tolerance": tolerance})
    best = _orchestrator(config).optimum((u_min, u_max), tolerance)
    if best.at_boundary:
        click.echo(f"⚠️  maximum sits on the interval boundary u = {best.u_star:.4g}", err=True)
    click.echo(f"📊 u* = {best.u_star:.4f}  R_sc* = {best.r_star:.4f}  "
               f"epsilon* = {best.epsilon_fiber:.4f}", err=True)
    emit(config, ["u_star", "r_star", "epsilon_fiber", "at_boundary"],
         [(best.u_star, best.r_star, best.epsilon_fiber, best.at_boundary)])


@cli.command("motion")
@click.option("--w-l", "waists", type=LENGTH, multiple=True, default=("0.5mm", "1.4mm"),
              show_default=True, help="Input waists (repeatable)")
@click.option("--f", "focal_length", type=LENGTH, default="4.5mm", show_default=True)
@click.option("--lambda", "wavelength", type=LENGTH, default="780nm", show_default=True)
@click.option("--temperature", type=TEMPERATURE, default="100uK", show_default=True)
@click.option("--nu-rho", type=FREQUENCY, default="70kHz", show_default=True)
@click.option("--nu-z", type=FREQUENCY, default="20kHz", show_default=True)
@click.option("--model", type=click.Choice([m.value for m in MotionalModel]),
              default=MotionalModel.RADIAL.value, show_default=True,
              help="Transverse factor behind reduction_percent: radial squares the "
                   "one-axis factor, single-axis keeps one power. The other model is "
                   "always written as an extra column")
@click.option("--monte-carlo", "samples", type=int, default=0,
              help="Also average over this many sampled positions")
@click.option("--seed", type=int, default=None, help="Random seed (required with --monte-carlo)")
@output_options
@numeric_command
def motion(waists, focal_length, wavelength, temperature, nu_rho, nu_z, model, samples, seed,
           output, output_format):
    """Reduction of R_sc from the thermal motion of the trapped atom"""
    if samples and seed is None:
        raise click.UsageError("--monte-carlo needs an explicit --seed")
    config = build_config(Command.MOTION, f=focal_length, wavelength=wavelength, output=output,
                          output_format=output_format, seed=seed,
                          parameters={"waists": list(waists), "temperature": temperature,
                                      "nu_rho": nu_rho, "nu_z": nu_z, "model": model,
                                      "samples": samples})
    trap = TrapThermalState.rubidium87(temperature, nu_rho, nu_z)
    click.echo(f"📊 sigma_rho = {trap.sigma_rho * 1e9:.1f} nm, "
               f"sigma_z = {trap.sigma_z * 1e9:.1f} nm, "
               f"reduction_percent from the {model} model", err=True)
    columns, rows = _orchestrator(config).motion(waists, config.f, config.wavelength, trap,
                                                 MotionalModel(model), samples, seed)
    emit(config, columns, rows)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, help="Port for the HTTP service")
def serve(host: str, port: int):
    """Start the read-only HTTP compute service"""
    from .api_server import AtomLensServer

    click.echo(f"🚀 Starting AtomLens service on http://{host}:{port}")
    try:
        asyncio.run(AtomLensServer(host=host, port=port).run_server())
    except KeyboardInterrupt:
        click.echo("\n👋 AtomLens service stopped")


if __name__ == "__main__":
    cli()
