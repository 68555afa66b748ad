"""Noise spectral density of the entangled-sideband readout.

The detected noise, normalized to the shot noise of both local
oscillators, is

    S(Omega) = 1 - eta + eta cosh 2r
               + 2 eta sqrt(alpha beta) sinh 2r / (alpha + beta)
                 * (K1(Omega) cos 2 zeta + K2(Omega) sin 2 zeta)

with the two cavity coupling coefficients

    K1 = (C / D) (C - 2 gamma^2 (d1 + d2)^2)
    K2 = (C / D) (2 gamma (d1 + d2) (gamma^2 - d1 d2 + Omega^2))
    C  = (d1^2 - Omega^2)(d2^2 - Omega^2)
         + gamma^2 (gamma^2 + d1^2 + d2^2 + 2 Omega^2)
    D  = prod_i (gamma^2 + (d_i - Omega)^2)(gamma^2 + (d_i + Omega)^2)

where d1, d2 are the signal/idler carrier detunings and gamma the cavity
half-linewidth. D is a product of positive factors and therefore never
vanishes; K1^2 + K2^2 = C^2 / D <= 1 with equality exactly when
d2 = +-d1 (and in particular when both detunings vanish).

This module also builds readout-angle spectrograms, the squeeze-angle
trajectory, and the interferometer improvement map obtained by sweeping
the back-action coupling instead of a cavity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import (
    FilterCavityParams,
    FrequencyGrid,
    InterferometerParams,
    ReadoutParams,
    SqueezerParams,
    _readonly,
)
from .transfer import kimble_factor, optimal_squeeze_angle

MAP_MODES = ("none", "fixed-angle", "frequency-dependent")


# ---------------------------------------------------------------------------
# result containers


@dataclass(frozen=True)
class NoiseSpectrum:
    """Noise values S(Omega) on a frequency grid, vacuum = 1."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (len(self.grid),):
            raise ValidationError(
                f"spectrum has {self.values.shape} values for a "
                f"{len(self.grid)}-point grid"
            )
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise ValidationError("spectrum values must be finite and > 0")

    @property
    def db(self) -> np.ndarray:
        """Noise relative to vacuum in decibels, 10 log10 S."""
        return 10.0 * np.log10(self.values)


@dataclass(frozen=True)
class Spectrogram:
    """Noise map in dB over (sideband frequency, readout angle).

    ``values[i, j]`` is the noise at ``grid.omegas_rad_s[i]`` and
    readout angle ``angles_rad[j]``; the angles cover [0, 2 pi) so the
    map contains each physical quadrature twice and must be pi-periodic.
    """

    grid: FrequencyGrid
    angles_rad: np.ndarray
    values_db: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "angles_rad", _readonly(self.angles_rad))
        object.__setattr__(self, "values_db", _readonly(self.values_db))
        n_omega, n_zeta = len(self.grid), self.angles_rad.size
        if self.values_db.shape != (n_omega, n_zeta):
            raise ValidationError(
                f"spectrogram shape {self.values_db.shape} does not match "
                f"{n_omega} frequencies x {n_zeta} angles"
            )
        if not np.all(np.isfinite(self.values_db)):
            raise ValidationError("spectrogram values must be finite")
        if n_zeta % 2 == 0 and n_zeta >= 2:
            half = n_zeta // 2
            mismatch = np.abs(self.values_db[:, :half] - self.values_db[:, half:]).max()
            if mismatch > 1e-9:
                raise ValidationError(
                    f"spectrogram is not pi-periodic in the readout angle "
                    f"(max mismatch {mismatch!r} dB)"
                )


# ---------------------------------------------------------------------------
# coupling coefficients


def coefficient_c(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s):
    """Numerator polynomial C(Omega) of the coupling coefficients."""
    g2 = halfwidth_rad_s**2
    d1, d2 = detuning1_rad_s, detuning2_rad_s
    w2 = np.asarray(omega_rad_s, dtype=float) ** 2
    value = (d1**2 - w2) * (d2**2 - w2) + g2 * (g2 + d1**2 + d2**2 + 2.0 * w2)
    return value if np.ndim(value) else float(value)


def coefficient_d(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s):
    """Denominator polynomial D(Omega); strictly positive."""
    g2 = halfwidth_rad_s**2
    w = np.asarray(omega_rad_s, dtype=float)
    value = (
        (g2 + (detuning1_rad_s - w) ** 2)
        * (g2 + (detuning1_rad_s + w) ** 2)
        * (g2 + (detuning2_rad_s - w) ** 2)
        * (g2 + (detuning2_rad_s + w) ** 2)
    )
    return value if np.ndim(value) else float(value)


def _validated_cavity_args(halfwidth_rad_s):
    h = np.asarray(halfwidth_rad_s)
    if not np.all(np.isfinite(h)) or np.any(h <= 0):
        raise ValidationError(f"cavity halfwidth must be > 0, got {halfwidth_rad_s!r}")


def coupling_k1(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s):
    """cos(2 zeta) coupling coefficient K1(Omega)."""
    _validated_cavity_args(halfwidth_rad_s)
    c = coefficient_c(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s)
    d = coefficient_d(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s)
    sigma = detuning1_rad_s + detuning2_rad_s
    value = c / d * (c - 2.0 * halfwidth_rad_s**2 * sigma**2)
    return value if np.ndim(value) else float(value)


def coupling_k2(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s):
    """sin(2 zeta) coupling coefficient K2(Omega)."""
    _validated_cavity_args(halfwidth_rad_s)
    c = coefficient_c(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s)
    d = coefficient_d(halfwidth_rad_s, detuning1_rad_s, detuning2_rad_s, omega_rad_s)
    sigma = detuning1_rad_s + detuning2_rad_s
    w2 = np.asarray(omega_rad_s, dtype=float) ** 2
    value = c / d * (
        2.0 * halfwidth_rad_s * sigma
        * (halfwidth_rad_s**2 - detuning1_rad_s * detuning2_rad_s + w2)
    )
    return value if np.ndim(value) else float(value)


def inference_fidelity(cavity: FilterCavityParams, omega_rad_s):
    """Fraction of the squeezing recoverable at the best readout angle.

    sqrt(K1^2 + K2^2) = |C| / sqrt(D), in [0, 1]. It equals 1 exactly
    when the two carriers see mirror-image (or identical) detunings, so
    the sideband correlations stay aligned at every frequency; values
    below 1 quantify correlation loss that no readout angle of this
    detection scheme can undo. For a single detuned carrier the
    fidelity dips around Omega ~ |detuning| and returns to 1 well above
    it.
    """
    omega = np.asarray(omega_rad_s, dtype=float)
    if np.any(omega <= 0):
        raise ValidationError("inference_fidelity requires omega > 0")
    g = cavity.halfwidth_rad_s
    d1 = cavity.detuning_signal_rad_s
    d2 = cavity.detuning_idler_rad_s
    value = np.abs(coefficient_c(g, d1, d2, omega)) / np.sqrt(
        coefficient_d(g, d1, d2, omega)
    )
    return value if np.ndim(value) else float(value)


# ---------------------------------------------------------------------------
# spectra


def _spectrum_values(cavity, squeezer, readout, omegas, zeta):
    g = cavity.halfwidth_rad_s
    d1 = cavity.detuning_signal_rad_s
    d2 = cavity.detuning_idler_rad_s
    eta = readout.efficiency
    r = squeezer.squeeze_factor
    k1 = coupling_k1(g, d1, d2, omegas)
    k2 = coupling_k2(g, d1, d2, omegas)
    projection = k1 * math.cos(2.0 * zeta) + k2 * math.sin(2.0 * zeta)
    return (
        1.0
        - eta
        + eta * math.cosh(2.0 * r)
        + eta * readout.lo_balance * math.sinh(2.0 * r) * projection
    )


def epr_noise_spectrum(
    cavity: FilterCavityParams,
    squeezer: SqueezerParams,
    readout: ReadoutParams,
    grid: FrequencyGrid,
) -> NoiseSpectrum:
    """Detected noise spectrum at the configured readout angle.

    S is identically 1 for r = 0 and bounded between
    1 - eta + eta e^{-2r} and 1 - eta + eta e^{+2r} for balanced local
    oscillators.
    """
    values = _spectrum_values(
        cavity, squeezer, readout, grid.omegas_rad_s, readout.readout_angle_rad
    )
    return NoiseSpectrum(grid, values)


def minimum_noise_over_angle(
    cavity: FilterCavityParams,
    squeezer: SqueezerParams,
    readout: ReadoutParams,
    grid: FrequencyGrid,
) -> NoiseSpectrum:
    """Envelope of the spectrum over all readout angles.

    The angle-dependent term has amplitude sqrt(K1^2 + K2^2), so the
    minimum is 1 - eta + eta (cosh 2r - lo_balance sinh 2r |C|/sqrt(D)).
    """
    eta = readout.efficiency
    r = squeezer.squeeze_factor
    fid = inference_fidelity(cavity, grid.omegas_rad_s)
    values = 1.0 - eta + eta * (
        math.cosh(2.0 * r) - readout.lo_balance * math.sinh(2.0 * r) * fid
    )
    return NoiseSpectrum(grid, np.broadcast_to(values, (len(grid),)).copy())


def _angle_sweep(count: int) -> np.ndarray:
    if count < 4:
        raise ValidationError(f"angle sweep needs at least 4 angles, got {count}")
    return np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)


def spectrogram(
    cavity: FilterCavityParams,
    squeezer: SqueezerParams,
    readout: ReadoutParams,
    grid: FrequencyGrid,
    angle_count: int,
    threads: int = 1,
) -> Spectrogram:
    """Noise map over a full readout-angle sweep, in dB relative to vacuum.

    Cells are independent of one another; with ``threads > 1`` the angle
    columns are evaluated in a thread pool, which cannot change the
    result because each column is written into its own slot.
"""
    angles = _angle_sweep(angle_count)
    omegas = grid.omegas_rad_s
    values = np.empty((omegas.size, angles.size))

    def fill(j):
        values[:, j] = _spectrum_values(cavity, squeezer, readout, omegas, angles[j])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(angles.size)))
    else:
        for j in range(angles.size):
            fill(j)
    return Spectrogram(grid, angles, 10.0 * np.log10(values))


def squeeze_angle_trajectory(cavity: FilterCavityParams, grid: FrequencyGrid) -> np.ndarray:
    """Frequency-dependent squeeze angle imprinted by the cavity.

    theta(Omega) = atan2(K2, K1) / 2, unwrapped (period pi) along the
    grid and anchored so the highest-frequency point carries its
    principal value, which tends to 0 as the couplings decay. Returns
    an (n, 2) array of (omega_rad_s, theta_rad) rows; the spanned range
    is max(theta) - min(theta).
    """
    g = cavity.halfwidth_rad_s
    d1 = cavity.detuning_signal_rad_s
    d2 = cavity.detuning_idler_rad_s
    k1 = coupling_k1(g, d1, d2, grid.omegas_rad_s)
    k2 = coupling_k2(g, d1, d2, grid.omegas_rad_s)
    # K1 and K2 only vanish together where C does; a grid point exactly on
    # such a root has no defined angle.
    assert np.all(k1 * k1 + k2 * k2 > 0.0), "squeeze angle undefined where C = 0"
    theta = 0.5 * np.unwrap(np.arctan2(k2, k1), period=2.0 * math.pi)
    theta -= math.pi * np.round(theta[-1] / math.pi)
    return np.column_stack([grid.omegas_rad_s, theta])


# ---------------------------------------------------------------------------
# interferometer improvement map


def _ponderomotive_variance(k, r, phi, eta, zeta):
    """Phase-space readout variance after back-action, squeezing at angle
    phi (from the phase quadrature), and detection loss eta."""
    c2r, s2r = math.cosh(2.0 * r), math.sinh(2.0 * r)
    c2p, s2p = np.cos(2.0 * phi), np.sin(2.0 * phi)
    # Input covariance entries (amplitude, phase).
    saa = c2r + s2r * c2p
    spp = c2r - s2r * c2p
    sap = s2r * s2p
    # Through the input-output map [[1, 0], [-k, 1]].
    taa = saa
    tap = sap - k * saa
    tpp = spp - 2.0 * k * sap + k * k * saa
    # Detection loss, then projection on the readout angle.
    cz, sz = np.cos(zeta), np.sin(zeta)
    out = (
        (eta * taa + (1.0 - eta)) * cz * cz
        + 2.0 * eta * tap * cz * sz
        + (eta * tpp + (1.0 - eta)) * sz * sz
    )
    return out


def interferometer_noise_map(
    ifo: InterferometerParams,
    squeezer: SqueezerParams,
    efficiency: float,
    grid: FrequencyGrid,
    angle_count: int,
    mode: str,
) -> Spectrogram:
    """Readout-noise change of a squeezed interferometer, relative to the
    same interferometer without squeezing.

    ``mode`` selects the injected squeeze angle: ``none`` disables the
    squeezer (a flat 0 dB reference), ``fixed-angle`` uses the
    squeezer's frequency-independent injection angle, and
    ``frequency-dependent`` follows the back-action-cancelling angle
    arctan K(Omega). Each cell is 10 log10 of the ratio of the squeezed
    to the unsqueezed readout variance, so improvements are negative.
    """
    if mode not in MAP_MODES:
        raise ValidationError(f"map mode must be one of {MAP_MODES}, got {mode!r}")
    if not (0.0 <= efficiency <= 1.0):
        raise ValidationError(f"efficiency must lie in [0, 1], got {efficiency!r}")
    angles = _angle_sweep(angle_count)
    k = kimble_factor(ifo, grid.omegas_rad_s)[:, None]
    zeta = angles[None, :]
    reference = _ponderomotive_variance(k, 0.0, 0.0, efficiency, zeta)
    if mode == "none":
        squeezed = reference
    elif mode == "fixed-angle":
        squeezed = _ponderomotive_variance(
            k, squeezer.squeeze_factor, squeezer.injection_angle_rad, efficiency, zeta
        )
    else:
        phi = optimal_squeeze_angle(k)
        squeezed = _ponderomotive_variance(
            k, squeezer.squeeze_factor, phi, efficiency, zeta
        )
    return Spectrogram(grid, angles, 10.0 * np.log10(squeezed / reference))
