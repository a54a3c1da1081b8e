"""Closed-form model quantities and the susceptibility profile."""

import numpy as np
import pytest

import lightcrystal as lc
from lightcrystal.errors import ConfigurationError
from lightcrystal.model import FIELD_SCALE_PER_ZETA, K0
from lightcrystal.spectrum import homogeneous_dispersion


def params(**kw):
    defaults = dict(zeta=0.1, box_length=100.0, g_interaction=1.0)
    defaults.update(kw)
    return lc.ModelParams(**defaults)


class TestModelParams:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            lc.ModelParams(zeta=-0.1, box_length=10.0)
        with pytest.raises(ConfigurationError):
            lc.ModelParams(zeta=0.1, box_length=0.0)
        with pytest.raises(ConfigurationError):
            lc.ModelParams(zeta=0.1, box_length=10.0, intensity_left=-1.0)
        with pytest.raises(ConfigurationError):
            lc.ModelParams(zeta=0.1, box_length=10.0, grid_points_per_wavelength=16)

    def test_grids(self):
        p = params(box_length=10.0)
        assert p.num_points == 320
        assert p.dx == pytest.approx(1.0 / 32.0)
        x = p.box_grid()
        assert x[0] == 0.0 and x[-1] == pytest.approx(10.0 - p.dx)
        xp = p.padded_grid()
        assert xp[0] == pytest.approx(-2.0)
        assert xp[-1] == pytest.approx(12.0)

    def test_drive_intensity_scale(self):
        p = params(intensity_left=50.0, intensity_right=25.0)
        il, ir = lc.drive_field_intensities(p)
        assert il == pytest.approx(FIELD_SCALE_PER_ZETA * 0.1 * 50.0)
        assert ir == pytest.approx(FIELD_SCALE_PER_ZETA * 0.1 * 25.0)


class TestEffectiveWavenumber:
    def test_vacuum(self):
        assert lc.effective_wavenumber(params(zeta=0.0), 0.01) == pytest.approx(K0)

    def test_direct_evaluation(self):
        # k_eff = 2*pi*sqrt(1 + zeta/L) evaluated independently
        assert lc.effective_wavenumber(params(), 1.0 / 100.0) == pytest.approx(
            2.0 * np.pi * np.sqrt(1.001), rel=1e-14)
        assert lc.effective_wavenumber(params(zeta=0.2), 1.0 / 100.0) == pytest.approx(
            2.0 * np.pi * np.sqrt(1.002), rel=1e-14)

    def test_negative_density(self):
        with pytest.raises(ValueError):
            lc.effective_wavenumber(params(), -1e-3)


class TestLatticeSpacing:
    def test_vacuum_is_half_wavelength(self):
        assert lc.lattice_spacing(params(zeta=0.0)) == pytest.approx(0.5, abs=1e-15)

    def test_direct_evaluation(self):
        assert lc.lattice_spacing(params()) == pytest.approx(
            0.5 / np.sqrt(1.001), rel=1e-14)
        assert lc.lattice_spacing(params(box_length=10.0)) == pytest.approx(
            0.5 / np.sqrt(1.01), rel=1e-14)

    def test_monotone_decreasing_in_zeta(self):
        zetas = np.linspace(0.0, 0.5, 11)
        spacings = [lc.lattice_spacing(params(zeta=z)) for z in zetas]
        assert np.all(np.diff(spacings) < 0)
        assert all(s < 0.5 for s in spacings[1:])

    def test_spacing_wavenumber_identity(self):
        for zeta in (0.05, 0.1, 0.3):
            p = params(zeta=zeta, box_length=37.0)
            k_eff = lc.effective_wavenumber(p, 1.0 / 37.0)
            assert lc.lattice_spacing(p) * k_eff == pytest.approx(np.pi, rel=1e-14)


class TestCriticalIntensity:
    def test_zeta_zero_has_no_threshold(self):
        with pytest.raises(ConfigurationError):
            lc.critical_intensity_closed_form(params(zeta=0.0))

    def test_inverse_square_zeta_scaling(self):
        # doubling zeta divides the threshold by 4; finite-size corrections
        # decay as 1/L, so "fixed large L" means very large here
        p1 = params(zeta=0.1, box_length=1e7)
        p2 = params(zeta=0.2, box_length=1e7)
        ratio = lc.critical_intensity_closed_form(p1) / lc.critical_intensity_closed_form(p2)
        assert ratio == pytest.approx(4.0, rel=1e-6)

    def test_roton_mode_energy_vanishes_at_threshold(self):
        from dataclasses import replace
        p = params(box_length=120.0)
        ic = lc.critical_intensity_closed_form(p)
        pc = replace(p, intensity_left=ic, intensity_right=ic)
        omega = homogeneous_dispersion(pc, lc.roton_momentum(pc))
        # defining condition is on omega^2; sqrt amplifies roundoff
        assert abs(omega) ** 2 < 1e-10

    def test_matches_bisection_on_dispersion_sign(self):
        # independent oracle: bisect the sign change of omega^2(q*) in intensity
        from dataclasses import replace
        p = params(zeta=0.1, box_length=120.0, g_interaction=1.0)
        qstar = lc.roton_momentum(p)

        def omega_sq(intensity):
            pi = replace(p, intensity_left=intensity, intensity_right=intensity)
            w = homogeneous_dispersion(pi, qstar)
            return (w.real ** 2 - w.imag ** 2)

        lo, hi = 1.0, 1000.0
        assert omega_sq(lo) > 0 > omega_sq(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if omega_sq(mid) > 0:
                lo = mid
            else:
                hi = mid
        bisected = 0.5 * (lo + hi)
        assert lc.critical_intensity_closed_form(p) == pytest.approx(bisected, rel=1e-8)

    def test_loglog_slope(self):
        zetas = np.array([0.05, 0.1, 0.2, 0.4])
        ics = [lc.critical_intensity_closed_form(params(zeta=z, box_length=120.0))
               for z in zetas]
        slope = np.polyfit(np.log(zetas), np.log(ics), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.04)


class TestSusceptibility:
    def test_homogeneous_value(self):
        p = params()
        chi = lc.susceptibility_profile(lc.homogeneous_state(p), p)
        box = chi.values[chi.box_slice()]
        assert box == pytest.approx(1e-3, rel=1e-12)
        # vacuum padding is exactly zero
        assert np.all(chi.values[:chi.pad_points] == 0.0)
        assert np.all(chi.values[chi.pad_points + chi.num_cells + 1:] == 0.0)

    def test_zeta_zero_decouples(self):
        p = params(zeta=0.0)
        chi = lc.susceptibility_profile(lc.homogeneous_state(p), p)
        assert np.all(chi.values == 0.0)

    def test_integral_equals_zeta_for_modulated_state(self):
        p = params(box_length=20.0)
        x = p.box_grid()
        psi = (1.0 + 0.3 * np.cos(2.0 * np.pi * 5 * x / 20.0)).astype(complex)
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * p.dx)
        state = lc.CondensateState(psi=psi, dx=p.dx)
        chi = lc.susceptibility_profile(state, p)
        assert chi.integral() == pytest.approx(p.zeta, abs=1e-10)

    def test_grid_mismatch_rejected(self):
        p = params()
        other = lc.ModelParams(zeta=0.1, box_length=50.0)
        with pytest.raises(ConfigurationError):
            lc.susceptibility_profile(lc.homogeneous_state(other), p)


class TestOpticalPotential:
    def test_plane_wave_value(self):
        # synthetic plane-wave fields of unit intensity each -> V = -2
        p = params(box_length=10.0)
        from lightcrystal.helmholtz import FieldState, ScatteringCoefficients
        x = p.padded_grid()
        e = np.exp(1j * K0 * x)
        fields = FieldState(grid=x, e_left=e, e_right=np.conj(e),
                            scattering=ScatteringCoefficients(0.0, 1.0),
                            drive_left=1.0, drive_right=1.0, dx=p.dx,
                            pad_points=p.num_padding_points)
        v = lc.optical_potential(fields, p)
        assert v == pytest.approx(-2.0, rel=1e-12)
        assert np.all(v <= 0.0)

    def test_zero_fields(self):
        p = params(box_length=10.0, intensity_left=0.0, intensity_right=0.0)
        chi = lc.susceptibility_profile(lc.homogeneous_state(p), p)
        fields = lc.solve_driven_fields(chi, p)
        assert lc.optical_potential(fields, p) == pytest.approx(0.0, abs=1e-30)
