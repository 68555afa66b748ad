"""Tests for the noise spectral density, spectrograms and the
improvement map."""

import math

import numpy as np
import pytest

from eprsqueeze import (
    FilterCavityParams,
    FrequencyGrid,
    InterferometerParams,
    ReadoutParams,
    SqueezerParams,
    ValidationError,
    coefficient_c,
    coefficient_d,
    coupling_k1,
    coupling_k2,
    epr_noise_spectrum,
    inference_fidelity,
    interferometer_noise_map,
    minimum_noise_over_angle,
    spectrogram,
    squeeze_angle_trajectory,
)

TWO_PI = 2.0 * math.pi
GAMMA = TWO_PI * 150e3
DELTA = TWO_PI * 460e3


def cavity(d1, d2, gamma=GAMMA):
    return FilterCavityParams(gamma, d1, d2)


def random_draws(n, seed=0):
    """Physically-scaled random (gamma, d1, d2, omega) tuples."""
    rng = np.random.default_rng(seed)
    gammas = TWO_PI * 10 ** rng.uniform(np.log10(50e3), np.log10(500e3), n)
    d1 = rng.uniform(-1.0, 1.0, n) * TWO_PI * 2e6
    d2 = rng.uniform(-1.0, 1.0, n) * TWO_PI * 2e6
    omegas = TWO_PI * 10 ** rng.uniform(4, np.log10(30e6), n)
    return gammas, d1, d2, omegas


class TestCoefficients:
    def test_untuned_cavity_closed_forms(self):
        g = GAMMA
        for w in (0.1 * g, g, 5.0 * g):
            lorentz = g**2 + w**2
            assert coefficient_c(g, 0.0, 0.0, w) == pytest.approx(lorentz**2, rel=1e-12)
            assert coefficient_d(g, 0.0, 0.0, w) == pytest.approx(lorentz**4, rel=1e-12)

    def test_single_detuning_at_zero_frequency(self):
        g = GAMMA
        assert coefficient_c(g, g, 0.0, 0.0) == pytest.approx(2.0 * g**4, rel=1e-12)
        assert coefficient_d(g, g, 0.0, 0.0) == pytest.approx(4.0 * g**8, rel=1e-12)

    def test_mirror_detunings_square_identity(self):
        gs, d1, _, ws = random_draws(2000)
        c = coefficient_c(gs, d1, -d1, ws)
        d = coefficient_d(gs, d1, -d1, ws)
        np.testing.assert_allclose(c**2, d, rtol=1e-11)

    def test_equal_detunings_square_identity(self):
        gs, d1, _, ws = random_draws(2000, seed=1)
        c = coefficient_c(gs, d1, d1, ws)
        d = coefficient_d(gs, d1, d1, ws)
        np.testing.assert_allclose(c**2, d, rtol=1e-11)

    def test_denominator_positive(self):
        gs, d1, d2, ws = random_draws(5000, seed=2)
        assert np.all(coefficient_d(gs, d1, d2, ws) > 0)


class TestCouplingCoefficients:
    def test_untuned_cavity(self):
        for w in (0.3 * GAMMA, GAMMA, 10 * GAMMA):
            assert coupling_k1(GAMMA, 0.0, 0.0, w) == pytest.approx(1.0, rel=1e-12)
            assert coupling_k2(GAMMA, 0.0, 0.0, w) == pytest.approx(0.0, abs=1e-15)

    def test_mirror_detunings_restore_unit_coupling(self):
        for w in np.geomspace(0.01 * GAMMA, 100 * GAMMA, 25):
            assert coupling_k1(GAMMA, DELTA, -DELTA, w) == pytest.approx(1.0, rel=1e-11)
            assert coupling_k2(GAMMA, DELTA, -DELTA, w) == pytest.approx(0.0, abs=1e-15)

    def test_equal_detunings_at_linewidth(self):
        g = GAMMA
        assert coupling_k1(g, g, g, 0.0) == pytest.approx(-1.0, rel=1e-12)
        assert coupling_k2(g, g, g, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_single_detuning_operating_point(self):
        g = GAMMA
        assert coupling_k1(g, g, 0.0, g) == pytest.approx(0.4, rel=1e-12)
        assert coupling_k2(g, g, 0.0, g) == pytest.approx(0.8, rel=1e-12)

    def test_magnitude_identity(self):
        gs, d1, d2, ws = random_draws(5000, seed=3)
        k1 = coupling_k1(gs, d1, d2, ws)
        k2 = coupling_k2(gs, d1, d2, ws)
        ratio = coefficient_c(gs, d1, d2, ws) ** 2 / coefficient_d(gs, d1, d2, ws)
        np.testing.assert_allclose(k1**2 + k2**2, ratio, rtol=1e-9)

    def test_magnitude_bounded_by_one(self):
        gs, d1, d2, ws = random_draws(5000, seed=4)
        k1 = coupling_k1(gs, d1, d2, ws)
        k2 = coupling_k2(gs, d1, d2, ws)
        assert np.all(k1**2 + k2**2 <= 1.0 + 1e-12)


class TestInferenceFidelity:
    def test_mirror_detunings_are_lossless(self):
        for w in np.geomspace(0.01 * GAMMA, 100 * GAMMA, 25):
            assert inference_fidelity(cavity(DELTA, -DELTA), w) == pytest.approx(
                1.0, rel=1e-11
            )

    def test_single_detuning_operating_point(self):
        assert inference_fidelity(cavity(GAMMA, 0.0), GAMMA) == pytest.approx(
            math.sqrt(0.8), rel=1e-12
        )

    def test_returns_to_one_at_high_frequency(self):
        cav = cavity(DELTA, 0.0)
        fid = inference_fidelity(cav, np.geomspace(10 * DELTA, 1000 * DELTA, 40))
        # Saturates to 1.0 within float resolution at the top of the band.
        assert np.all(np.diff(fid) >= -1e-12)
        assert fid[0] < fid[-1]
        assert fid[-1] > 1 - 1e-9

    def test_dips_around_the_detuning(self):
        cav = cavity(DELTA, 0.0)
        near = inference_fidelity(cav, np.geomspace(0.5 * DELTA, 2.0 * DELTA, 33))
        assert np.all(near < 1.0)
        assert near.min() < 0.5


def preset_like_readout(zeta=0.5 * math.pi, eta=1.0, alpha=1.0, beta=1.0):
    return ReadoutParams(zeta, eta, alpha, beta)


GRID = FrequencyGrid.logarithmic(10e3, 30e6, 257)


class TestNoiseSpectrum:
    def test_vacuum_in_vacuum_out(self):
        for zeta in (0.0, 0.7, 2.0):
            for eta in (0.3, 1.0):
                spec = epr_noise_spectrum(
                    cavity(DELTA, 0.0), SqueezerParams(0.0), preset_like_readout(zeta, eta), GRID
                )
                np.testing.assert_allclose(spec.values, 1.0, rtol=1e-14)

    def test_mirror_detunings_flat_at_best_angle(self):
        r = 0.8
        spec = epr_noise_spectrum(
            cavity(DELTA, -DELTA), SqueezerParams(r), preset_like_readout(), GRID
        )
        np.testing.assert_allclose(spec.values, math.exp(-2 * r), rtol=1e-11)

    def test_unbalanced_oscillators_cost_squeezing(self):
        r = 0.8
        unbalanced = preset_like_readout(alpha=2.0, beta=0.5)
        spec = epr_noise_spectrum(
            cavity(DELTA, -DELTA), SqueezerParams(r), unbalanced, GRID
        )
        balance = 2.0 * math.sqrt(2.0 * 0.5) / 2.5
        expected = math.cosh(2 * r) - balance * math.sinh(2 * r)
        np.testing.assert_allclose(spec.values, expected, rtol=1e-11)
        assert np.all(spec.values > math.exp(-2 * r))

    def test_symmetric_under_detuning_exchange(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            d1, d2 = rng.uniform(-1, 1, 2) * TWO_PI * 1.5e6
            zeta = rng.uniform(0, TWO_PI)
            rd = preset_like_readout(zeta, 0.8)
            a = epr_noise_spectrum(cavity(d1, d2), SqueezerParams(0.9), rd, GRID)
            b = epr_noise_spectrum(cavity(d2, d1), SqueezerParams(0.9), rd, GRID)
            np.testing.assert_allclose(a.values, b.values, rtol=1e-12)

    def test_periodic_in_readout_angle(self):
        for zeta in (0.0, 0.4, 1.3):
            a = epr_noise_spectrum(
                cavity(DELTA, 0.0), SqueezerParams(0.7), preset_like_readout(zeta), GRID
            )
            b = epr_noise_spectrum(
                cavity(DELTA, 0.0), SqueezerParams(0.7), preset_like_readout(zeta + math.pi), GRID
            )
            np.testing.assert_allclose(a.values, b.values, rtol=1e-12)

    def test_bounds_for_balanced_oscillators(self):
        r, eta = 0.9, 0.75
        lo = 1 - eta + eta * math.exp(-2 * r)
        hi = 1 - eta + eta * math.exp(2 * r)
        for zeta in np.linspace(0, math.pi, 9):
            spec = epr_noise_spectrum(
                cavity(DELTA, 0.4 * DELTA), SqueezerParams(r), preset_like_readout(zeta, eta), GRID
            )
            assert np.all(spec.values >= lo - 1e-12)
            assert np.all(spec.values <= hi + 1e-12)

    def test_lo_power_gauge(self):
        r = 0.8
        base = epr_noise_spectrum(
            cavity(DELTA, 0.0), SqueezerParams(r), preset_like_readout(0.3, 0.9, 1.4, 0.6), GRID
        )
        scaled = epr_noise_spectrum(
            cavity(DELTA, 0.0), SqueezerParams(r),
            preset_like_readout(0.3, 0.9, 1.4 * 37.0, 0.6 * 37.0), GRID,
        )
        np.testing.assert_allclose(base.values, scaled.values, rtol=1e-12)

    def test_extreme_angles_quarter_turn_apart(self):
        # The angle dependence is A + B cos(2 zeta - psi): minima and
        # maxima over zeta sit pi/2 apart (mod pi).
        cav = cavity(DELTA, 0.3 * DELTA)
        zetas = np.linspace(0, math.pi, 3600, endpoint=False)
        omega = np.array([5.0 * GAMMA])
        grid1 = FrequencyGrid(omega, "linear")
        values = np.array([
            epr_noise_spectrum(cav, SqueezerParams(0.8), preset_like_readout(z), grid1).values[0]
            for z in zetas
        ])
        zmin = zetas[np.argmin(values)]
        zmax = zetas[np.argmax(values)]
        separation = abs(zmin - zmax) % math.pi
        assert min(separation, math.pi - separation) == pytest.approx(
            math.pi / 2, abs=2 * math.pi / 3600
        )

    def test_minimum_envelope_matches_dense_sweep(self):
        cav = cavity(DELTA, 0.0)
        rd = preset_like_readout(eta=0.7)
        sq = SqueezerParams(0.98)
        envelope = minimum_noise_over_angle(cav, sq, rd, GRID)
        spg = spectrogram(cav, sq, rd, GRID, 512)
        sweep_min = spg.values_db.min(axis=1)
        # 512 sampled angles quantize the minimum by up to ~2e-3 dB here.
        np.testing.assert_allclose(envelope.db, sweep_min, atol=3e-3)
        assert np.all(envelope.db <= sweep_min + 1e-12)


class TestSpectrogram:
    def test_rejects_tiny_angle_sweep(self):
        with pytest.raises(ValidationError):
            spectrogram(cavity(DELTA, 0.0), SqueezerParams(0.5), preset_like_readout(), GRID, 3)

    def test_pi_periodic_columns(self):
        spg = spectrogram(
            cavity(DELTA, 0.0), SqueezerParams(0.9), preset_like_readout(eta=0.8), GRID, 64
        )
        np.testing.assert_allclose(
            spg.values_db[:, :32], spg.values_db[:, 32:], atol=1e-9
        )

    def test_threaded_evaluation_is_bit_identical(self):
        args = (cavity(DELTA, DELTA), SqueezerParams(0.9), preset_like_readout(eta=0.8), GRID, 48)
        serial = spectrogram(*args, threads=1)
        threaded = spectrogram(*args, threads=4)
        np.testing.assert_array_equal(serial.values_db, threaded.values_db)

    def test_high_frequency_plateau_with_single_detuning(self):
        # eta = 0.7 with r solved for a -4 dB best-angle plateau.
        eta = 0.7
        r = -0.5 * math.log((10**-0.4 - (1 - eta)) / eta)
        spg = spectrogram(
            cavity(DELTA, 0.0), SqueezerParams(r), preset_like_readout(eta=eta), GRID, 256
        )
        high = GRID.omegas_rad_s >= TWO_PI * 10e6
        plateau = spg.values_db[high].min(axis=1)
        np.testing.assert_allclose(plateau, -4.0, atol=0.02)

    def test_near_resonance_degradation_with_single_detuning(self):
        eta = 0.7
        r = -0.5 * math.log((10**-0.4 - (1 - eta)) / eta)
        spg = spectrogram(
            cavity(DELTA, 0.0), SqueezerParams(r), preset_like_readout(eta=eta), GRID, 256
        )
        best = spg.values_db.min(axis=1)
        near = (GRID.omegas_rad_s > 0.5 * DELTA) & (GRID.omegas_rad_s < 2.0 * DELTA)
        # Around the detuning the squeezing is lost at every readout angle
        # (best-angle noise climbs above shot noise) before recovering to
        # the plateau at the top of the band.
        assert best[near].max() > 0.0
        assert best[-1] < -3.9


class TestSqueezeAngleTrajectory:
    def test_untuned_cavity_has_no_rotation(self):
        traj = squeeze_angle_trajectory(cavity(0.0, 0.0), GRID)
        np.testing.assert_allclose(traj[:, 1], 0.0, atol=1e-12)

    def test_mirror_detunings_cancel_rotation(self):
        traj = squeeze_angle_trajectory(cavity(DELTA, -DELTA), GRID)
        np.testing.assert_allclose(traj[:, 1], 0.0, atol=1e-12)

    def test_branch_at_equal_linewidth_detunings(self):
        # K1 -> -1, K2 -> 0+ towards zero frequency: the continuous branch
        # ends at half a turn.
        g = GAMMA
        assert 0.5 * math.atan2(
            coupling_k2(g, g, g, 0.0), coupling_k1(g, g, g, 0.0)
        ) == pytest.approx(math.pi / 2, rel=1e-12)
        grid = FrequencyGrid.logarithmic(1.0, 30e6, 512)
        traj = squeeze_angle_trajectory(FilterCavityParams(g, g, g), grid)
        assert traj[0, 1] == pytest.approx(math.pi / 2, abs=1e-3)

    def test_equal_detunings_span(self):
        traj = squeeze_angle_trajectory(cavity(DELTA, DELTA), GRID)
        span = traj[:, 1].max() - traj[:, 1].min()
        assert span == pytest.approx(2.511, abs=0.01)
        # The high-frequency anchor sits at the principal value near zero.
        assert abs(traj[-1, 1]) < 1e-3

    def test_trajectory_is_continuous(self):
        traj = squeeze_angle_trajectory(cavity(DELTA, DELTA), GRID)
        assert np.abs(np.diff(traj[:, 1])).max() < 0.2


FIG1_IFO = InterferometerParams(800e3, 40.0, 1064e-9, 4000.0, TWO_PI * 500.0)
FIG1_GRID = FrequencyGrid.logarithmic(10.0, 10e3, 129)


class TestInterferometerNoiseMap:
    def test_reference_mode_is_flat_zero(self):
        spg = interferometer_noise_map(FIG1_IFO, SqueezerParams(1.0), 0.6, FIG1_GRID, 16, "none")
        np.testing.assert_allclose(spg.values_db, 0.0, atol=1e-12)

    def test_no_squeezing_changes_nothing(self):
        spg = interferometer_noise_map(
            FIG1_IFO, SqueezerParams(0.0), 0.6, FIG1_GRID, 16, "fixed-angle"
        )
        np.testing.assert_allclose(spg.values_db, 0.0, atol=1e-12)

    def test_lossless_tracking_gives_uniform_improvement(self):
        r = 1.0
        spg = interferometer_noise_map(
            FIG1_IFO, SqueezerParams(r), 1.0, FIG1_GRID, 16, "frequency-dependent"
        )
        phase_col = np.argmin(np.abs(spg.angles_rad - math.pi / 2))
        expected_db = 10 * math.log10(math.exp(-2 * r))
        np.testing.assert_allclose(spg.values_db[:, phase_col], expected_db, rtol=1e-10)

    def test_fixed_angle_worsens_backaction_regime(self):
        from eprsqueeze import kimble_factor

        r = 1.0
        spg = interferometer_noise_map(
            FIG1_IFO, SqueezerParams(r, 0.0), 0.6, FIG1_GRID, 16, "fixed-angle"
        )
        phase_col = np.argmin(np.abs(spg.angles_rad - math.pi / 2))
        k = kimble_factor(FIG1_IFO, FIG1_GRID.omegas_rad_s)
        strong = k > 1.0
        assert strong.any()
        assert np.all(spg.values_db[strong, phase_col] > 0.0)

    def test_tracking_never_loses_to_fixed_angle(self):
        r = 1.0
        fixed = interferometer_noise_map(
            FIG1_IFO, SqueezerParams(r, 0.0), 0.6, FIG1_GRID, 16, "fixed-angle"
        )
        tracking = interferometer_noise_map(
            FIG1_IFO, SqueezerParams(r), 0.6, FIG1_GRID, 16, "frequency-dependent"
        )
        phase_col = np.argmin(np.abs(fixed.angles_rad - math.pi / 2))
        assert np.all(
            tracking.values_db[:, phase_col] <= fixed.values_db[:, phase_col] + 1e-12
        )

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValidationError):
            interferometer_noise_map(FIG1_IFO, SqueezerParams(1.0), 0.6, FIG1_GRID, 16, "best")
