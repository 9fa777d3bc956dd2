"""
Test the cylindrical-mode decomposition and field reconstruction
"""
import functools
import math

import numpy as np
import pytest

from src.errors import DomainError, PreconditionError
from src.green_focus import focal_field_infinite
from src.lens_field import paraxial_field
from src.mode_propagator import (
    axial_intensity_profile, decompose, divergence_ratio, focal_plane_profile,
    full_width_half_maximum, intensity_map, kt_nodes, lens_plane_power, mirror_helicity,
    mode_power, paraxial_depth_of_field, reconstruct, reconstruct_many, reconstruction_error,
)
from src.models import CylPoint, FocusGeometry, LensModel, ModeIndex

SHORT = FocusGeometry.from_u(0.5, f=1e-3, wavelength=780e-9)
COMPACT_FOCAL_LENGTH = 0.5e-3


@functools.lru_cache(maxsize=None)
def compact_spectrum(u):
    """Geometry at f = 0.5 mm and its 256-node decomposition, shared across tests"""
    geom = FocusGeometry.from_u(u, f=COMPACT_FOCAL_LENGTH, wavelength=780e-9)
    return geom, decompose(geom, 256)


@pytest.fixture(scope="module")
def spectrum():
    """u = 0.5 at f = 1 mm; the most expensive fixture of the fast suite"""
    return decompose(SHORT, 256)


@pytest.fixture(scope="module")
def paraxial_spectrum():
    return decompose(FocusGeometry.from_u(0.022, f=1e-3, wavelength=780e-9), 512)


class TestDecompose:

    def test_nodes_inside_open_interval(self):
        k_t, weights = kt_nodes(10.0, 64)
        assert k_t[0] > 0.0 and k_t[-1] < 10.0
        assert weights.sum() == pytest.approx(10.0, rel=1e-13)

    def test_grid_too_small(self):
        with pytest.raises(DomainError):
            decompose(SHORT, 32)

    def test_workers_must_be_positive(self):
        with pytest.raises(DomainError):
            decompose(SHORT, 64, workers=0)

    def test_threaded_projection_matches_serial(self):
        geom = FocusGeometry.from_u(0.1, f=1e-3, wavelength=780e-9)
        serial = decompose(geom, 64)
        threaded = decompose(geom, 64, workers=3)
        np.testing.assert_array_equal(serial.kappa_plus, threaded.kappa_plus)
        np.testing.assert_array_equal(serial.kappa_minus, threaded.kappa_minus)

    def test_only_unit_angular_momentum(self, spectrum):
        k_t = float(spectrum.k_t[10])
        assert spectrum.coefficient(ModeIndex(k_t, 1, spectrum.wavenumber, m=2)) == 0j
        assert spectrum.coefficient(ModeIndex(k_t, -1, spectrum.wavenumber, m=0)) == 0j
        assert spectrum.coefficient(ModeIndex(k_t, 1, spectrum.wavenumber)) == \
            spectrum.kappa_plus[10]

    def test_coefficient_off_grid(self, spectrum):
        k_t = 0.5 * float(spectrum.k_t[10] + spectrum.k_t[11])
        with pytest.raises(DomainError):
            spectrum.coefficient(ModeIndex(k_t, 1, spectrum.wavenumber))

    def test_mode_power_matches_lens_plane(self, spectrum):
        assert mode_power(spectrum) == pytest.approx(lens_plane_power(SHORT), rel=5e-3)

    @pytest.mark.parametrize("u", [0.1, 0.5, 1.0, 2.0])
    def test_power_conserved_across_focusing_strength(self, u):
        geom, spectrum = compact_spectrum(u)
        assert mode_power(spectrum) == pytest.approx(lens_plane_power(geom), rel=5e-3)


class TestReconstruct:

    def test_focus_matches_closed_form(self, spectrum):
        got = reconstruct(spectrum, CylPoint(rho=0.0)).f_plus
        want = focal_field_infinite(SHORT).ratio
        assert abs(got - want) < 1e-3 * abs(want)

    @pytest.mark.parametrize("u", [0.1, 1.0, 2.239])
    def test_focus_matches_closed_form_across_strength(self, u):
        geom, spectrum = compact_spectrum(u)
        got = reconstruct(spectrum, CylPoint(rho=0.0)).f_plus
        want = focal_field_infinite(geom).ratio
        assert abs(got - want) < 1e-3 * abs(want)

    def test_focus_is_pure_plus(self, spectrum):
        field = reconstruct(spectrum, CylPoint(rho=0.0, z=0.4e-6))
        assert field.f_z == 0 and field.f_minus == 0

    def test_lens_plane_recovered(self, spectrum):
        assert reconstruction_error(spectrum, SHORT) < 1e-3

    def test_divergence_free(self, spectrum):
        rng = np.random.default_rng(17)
        for rho, phi, z in zip(rng.uniform(0.05e-6, 1e-6, 5), rng.uniform(0, 2 * math.pi, 5),
                               rng.uniform(-1e-6, 1e-6, 5)):
            assert divergence_ratio(spectrum, CylPoint(rho=rho, phi=phi, z=z)) < 1e-4

    def test_before_the_lens_rejected(self, spectrum):
        with pytest.raises(DomainError):
            reconstruct(spectrum, CylPoint(rho=0.0, z=-2 * SHORT.f))

    def test_batch_matches_single(self, spectrum):
        points = [CylPoint(rho=0.3e-6, phi=0.4, z=0.1e-6), CylPoint(rho=0.0, z=-0.2e-6)]
        batch = reconstruct_many(spectrum, points)
        for point, field in zip(points, batch):
            single = reconstruct(spectrum, point)
            assert field.f_plus == pytest.approx(single.f_plus, rel=1e-12)
        assert reconstruct_many(spectrum, []) == []

    def test_azimuthal_phase(self, spectrum):
        base = reconstruct(spectrum, CylPoint(rho=0.4e-6, phi=0.0, z=0.2e-6))
        turned = reconstruct(spectrum, CylPoint(rho=0.4e-6, phi=0.7, z=0.2e-6))
        assert turned.f_plus == pytest.approx(base.f_plus, rel=1e-12)
        assert turned.f_z == pytest.approx(base.f_z * np.exp(0.7j), rel=1e-12)
        assert turned.f_minus == pytest.approx(base.f_minus * np.exp(1.4j), rel=1e-12)

    def test_mirrored_helicity(self, spectrum):
        mirrored = mirror_helicity(lambda p: reconstruct(spectrum, p))
        on_axis = mirrored(CylPoint(rho=0.0, z=0.1e-6))
        assert on_axis.f_plus == 0
        assert abs(on_axis.f_minus) > 0
        point = CylPoint(rho=0.5e-6, phi=1.2, z=-0.3e-6)
        assert mirrored(point).intensity == pytest.approx(
            reconstruct(spectrum, point).intensity, rel=1e-12)

    def test_paraxial_focal_plane(self, paraxial_spectrum):
        geom = FocusGeometry.from_u(0.022, f=1e-3, wavelength=780e-9)
        rho = np.linspace(0.0, 2 * geom.w_f, 21)
        fields = reconstruct_many(paraxial_spectrum, [CylPoint(rho=float(r)) for r in rho])
        got = np.array([abs(f.f_plus) for f in fields])
        want = np.array([abs(paraxial_field(geom, CylPoint(rho=float(r))).f_plus) for r in rho])
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-2 * want[0])
        peak = got.max()
        assert max(max(abs(f.f_z), abs(f.f_minus)) for f in fields) < 0.05 * peak


class TestProfiles:

    def test_axial_profile(self, spectrum):
        profile = axial_intensity_profile(spectrum, (-6e-6, 6e-6), 61, comparison=SHORT)
        paraxial = paraxial_depth_of_field(SHORT)
        assert abs(profile.peak_z) < 0.5e-6
        assert 1.0 < profile.fwhm / paraxial < 2.0
        rows = profile.rows()
        assert len(rows) == 61 and len(rows[0]) == 3
        assert profile.paraxial[30] == pytest.approx((SHORT.w_l / SHORT.w_f) ** 2, rel=1e-12)
        assert profile.paraxial.max() == profile.paraxial[30]

    def test_axial_profile_without_comparison(self, spectrum):
        profile = axial_intensity_profile(spectrum, (-1e-6, 1e-6), 5)
        assert profile.paraxial is None
        assert len(profile.rows()[0]) == 2

    def test_focal_plane_profile(self, spectrum):
        profile = focal_plane_profile(spectrum, (0.0, 2e-6), 21)
        assert profile.plus[0] == pytest.approx(profile.plus.max())
        assert profile.z_component[0] == 0 and profile.minus[0] == 0
        assert profile.z_component.max() > 0.0

    def test_intensity_map_peaks_at_focus(self, spectrum):
        field_map = intensity_map(spectrum, (0.0, 2e-6), (-2e-6, 2e-6), 5, 9)
        assert field_map.intensity.shape == (9, 5)
        assert np.unravel_index(np.argmax(field_map.intensity), (9, 5)) == (4, 0)

    def test_too_few_samples(self, spectrum):
        with pytest.raises(DomainError):
            axial_intensity_profile(spectrum, (-1e-6, 1e-6), 2)

    def test_depth_of_field(self, table_geometry):
        assert paraxial_depth_of_field(table_geometry) == pytest.approx(8.31e-6, rel=1e-3)


class TestFullWidthHalfMaximum:

    def test_triangle(self):
        x = np.linspace(-2.0, 2.0, 401)
        y = np.maximum(1.0 - np.abs(x), 0.0)
        fwhm, peak = full_width_half_maximum(x, y)
        assert fwhm == pytest.approx(1.0, rel=1e-9)
        assert peak == pytest.approx(0.0, abs=1e-12)

    def test_peak_at_edge(self):
        x = np.linspace(0.0, 1.0, 11)
        with pytest.raises(PreconditionError):
            full_width_half_maximum(x, 1.0 - x)

    def test_never_reaches_half(self):
        x = np.linspace(-1.0, 1.0, 21)
        with pytest.raises(PreconditionError):
            full_width_half_maximum(x, 1.0 - 0.1 * x * x)


@pytest.mark.slow
class TestStrongFocusing:

    @pytest.mark.parametrize("u", [0.1, 1.0, 2.239])
    def test_focus_matches_closed_form(self, u):
        geom = FocusGeometry.from_u(u, f=1e-3, wavelength=780e-9)
        got = reconstruct(decompose(geom, 512), CylPoint(rho=0.0)).f_plus
        want = focal_field_infinite(geom).ratio
        assert abs(got - want) < 1e-3 * abs(want)

    def test_grid_convergence(self, spectrum):
        finer = decompose(SHORT, 512)
        coarse = reconstruct(spectrum, CylPoint(rho=0.0)).f_plus
        fine = reconstruct(finer, CylPoint(rho=0.0)).f_plus
        assert abs(fine - coarse) < 5e-4 * abs(fine)

    def test_lens_plane_recovered_at_strong_focusing(self):
        geom = FocusGeometry.from_u(1.56, f=1e-3, wavelength=780e-9)
        assert reconstruction_error(decompose(geom, 512), geom) < 1e-3

    def test_lens_plane_recovered_for_wide_beam_at_table_focal_length(self):
        geom = FocusGeometry(w_l=7e-3, f=4.5e-3, wavelength=780e-9)
        assert geom.u == pytest.approx(1.56, abs=1e-2)
        assert reconstruction_error(decompose(geom, 512, workers=4), geom) < 1e-3

    def test_axial_width_and_lens_model(self, table_geometry):
        z_range = (-15e-6, 15e-6)
        spherical = axial_intensity_profile(decompose(table_geometry), z_range, 121)
        assert spherical.fwhm == pytest.approx(9.5e-6, abs=0.2e-6)
        assert spherical.fwhm > paraxial_depth_of_field(table_geometry)

        parabolic = axial_intensity_profile(
            decompose(table_geometry, model=LensModel.PARABOLIC), z_range, 121)
        assert parabolic.intensity.max() < spherical.intensity.max()

        def centroid(profile):
            return np.sum(profile.z * profile.intensity) / np.sum(profile.intensity)

        assert centroid(parabolic) < centroid(spherical)
