"""Elementary transfer and coupling functions of the quantum-noise model.

These are the single-frequency building blocks: the back-action (Kimble)
coupling of a tuned interferometer, the analogous coupling of a detuned
cavity, the symplectic input-output map, squeezed-state covariances and
homodyne projections. All functions are pure and accept scalars or numpy
arrays for the sideband frequency.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SingularityError, ValidationError
from .params import InterferometerParams, QuadCovariance, SqueezerParams

# Relative margin around the detuned-cavity pole that is reported as a
# singularity rather than returned as a huge number.
_POLE_MARGIN = 1e-12


def kimble_factor(ifo: InterferometerParams, omega_rad_s):
    """Back-action coupling strength of a tuned interferometer.

    K(Omega) = 2 J gamma / (Omega^2 (gamma^2 + Omega^2)) with the
    coupling rate J = 8 pi I_c / (M lambda L). The 1/Omega^2 factor is
    the free-mass mechanical response, the Lorentzian the detector
    cavity profile; K grows without bound towards low sideband
    frequencies and falls off as Omega^-4 well above the linewidth.

    Parameters
    ----------
    ifo : InterferometerParams
    omega_rad_s : float or ndarray
        Sideband angular frequency [rad/s], > 0.

    Returns
    -------
    float or ndarray
        Dimensionless coupling, strictly positive.
    """
    omega = np.asarray(omega_rad_s, dtype=float)
    if not np.all(np.isfinite(omega)) or np.any(omega <= 0):
        raise ValidationError("kimble_factor requires finite omega > 0")
    gamma = ifo.detector_halfwidth_rad_s
    j = ifo.coupling_rate
    value = 2.0 * j * gamma / (omega**2 * (gamma**2 + omega**2))
    return value if value.ndim else float(value)


def cavity_coupling(halfwidth_rad_s: float, detuning_rad_s: float, omega_rad_s):
    """Quadrature-rotation coupling of a detuned, mirror-fixed cavity.

    K_cav(Omega, delta) = 2 gamma delta / (gamma^2 - delta^2 + Omega^2).
    Odd in the detuning and vanishing as Omega -> infinity. For
    |delta| > gamma the denominator has a real root at
    Omega^2 = delta^2 - gamma^2; evaluations at (or numerically on) that
    pole raise SingularityError instead of returning a number.
    """
    gamma = float(halfwidth_rad_s)
    delta = float(detuning_rad_s)
    if not (math.isfinite(gamma) and gamma > 0):
        raise ValidationError(f"cavity halfwidth must be > 0, got {gamma!r}")
    if not math.isfinite(delta):
        raise ValidationError("detuning must be finite")
    omega = np.asarray(omega_rad_s, dtype=float)
    if not np.all(np.isfinite(omega)):
        raise ValidationError("omega must be finite")
    denom = gamma**2 - delta**2 + omega**2
    scale = gamma**2 + delta**2 + omega**2
    on_pole = np.abs(denom) <= _POLE_MARGIN * scale
    if np.any(on_pole):
        bad = np.atleast_1d(omega)[np.atleast_1d(on_pole)][0]
        raise SingularityError(
            f"cavity coupling pole at omega = {bad!r} rad/s "
            f"(gamma = {gamma!r}, delta = {delta!r})"
        )
    value = 2.0 * gamma * delta / denom
    return value if value.ndim else float(value)


def kimble_cavity_equivalence_error(ifo: InterferometerParams, halfwidth_rad_s: float, omega_rad_s):
    """Relative mismatch between the interferometer coupling and its
    detuned-cavity emulation.

    At optimal detuning delta = gamma and well inside the linewidth the
    two couplings agree up to the scale J / gamma^3; the residual
    relative error |K - K_cav J/gamma^3| / K falls off as (Omega/gamma)^2.
    """
    omega = np.asarray(omega_rad_s, dtype=float)
    if np.any(omega <= 0):
        raise ValidationError("equivalence error requires omega > 0")
    gamma = float(halfwidth_rad_s)
    exact = kimble_factor(ifo, omega_rad_s)
    emulated = (
        cavity_coupling(gamma, gamma, omega_rad_s) * ifo.coupling_rate / gamma**3
    )
    value = np.abs(exact - emulated) / exact
    return value if np.ndim(value) else float(value)


def ponderomotive_transfer(coupling: float) -> np.ndarray:
    """Symplectic input-output map of the back-action interaction.

    Amplitude passes through unchanged; the phase quadrature picks up
    -K times the amplitude fluctuation. The map has determinant one for
    every K.
    """
    return np.array([[1.0, 0.0], [-float(coupling), 1.0]])


def squeezed_input_covariance(squeezer: SqueezerParams) -> QuadCovariance:
    """Covariance of the injected squeezed vacuum.

    The injection angle follows the package convention (see params):
    it is measured from the phase quadrature, so phi = 0 yields
    diag(e^{+2r}, e^{-2r}) with the squeezed (minor) axis along the
    phase quadrature. Eigenvalues are e^{-2r} and e^{+2r}; the
    determinant is one; phi and phi + pi give the same state.
    """
    r = squeezer.squeeze_factor
    phi = squeezer.injection_angle_rad
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    principal = np.diag([math.exp(2.0 * r), math.exp(-2.0 * r)])
    return QuadCovariance(rot @ principal @ rot.T)


def transform_covariance(cov: QuadCovariance, transfer: np.ndarray) -> QuadCovariance:
    """Propagate a covariance through a linear quadrature map T: T Sigma T^t."""
    return QuadCovariance(transfer @ cov.matrix @ transfer.T)


def apply_readout_loss(cov: QuadCovariance, efficiency: float) -> QuadCovariance:
    """Mix the state with vacuum at the detection port.

    Returns eta Sigma + (1 - eta) I; eta = 1 leaves the state unchanged,
    eta = 0 returns vacuum.
    """
    eta = float(efficiency)
    if not (math.isfinite(eta) and 0.0 <= eta <= 1.0):
        raise ValidationError(f"efficiency must lie in [0, 1], got {eta!r}")
    return QuadCovariance(eta * cov.matrix + (1.0 - eta) * np.eye(2))


def readout_variance(cov: QuadCovariance, zeta_rad: float) -> float:
    """Noise variance seen by a homodyne detector at readout angle zeta.

    Projects the covariance onto the unit quadrature vector
    (cos zeta, sin zeta); vacuum gives 1 at every angle and the result
    is pi-periodic in zeta.
    """
    c, s = math.cos(zeta_rad), math.sin(zeta_rad)
    v = np.array([c, s])
    return float(v @ cov.matrix @ v)


def optimal_squeeze_angle(coupling) -> float:
    """Squeeze angle that cancels the back-action rotation.

    arctan K, in (-pi/2, pi/2). Injecting squeezing at this angle turns
    the phase-readout noise into e^{-2r} (1 + K^2), i.e. the unsqueezed
    noise scaled down uniformly at every frequency.
    """
    value = np.arctan(coupling)
    return value if np.ndim(value) else float(value)


def phase_quadrature_noise(ifo: InterferometerParams, squeezer: SqueezerParams, omega_rad_s):
    """Phase-readout noise of the squeezed interferometer, evaluated
    directly from the two-term input-output relation.

    The output phase quadrature is a linear combination of the input
    phase and amplitude quadratures; with uncorrelated vacuum-normalized
    inputs the variance is the sum of the two squared coefficients:

        [cosh r - sinh r (cos 2phi + K sin 2phi)]^2
      + [K cosh r + sinh r (K cos 2phi - sin 2phi)]^2

    This must (and does, see the test suite) agree with propagating the
    squeezed covariance through the symplectic map and projecting on the
    phase quadrature.
    """
    k = kimble_factor(ifo, omega_rad_s)
    r = squeezer.squeeze_factor
    phi = squeezer.injection_angle_rad
    ch, sh = math.cosh(r), math.sinh(r)
    c2, s2 = math.cos(2.0 * phi), math.sin(2.0 * phi)
    phase_coeff = ch - sh * (c2 + k * s2)
    ampl_coeff = k * ch + sh * (k * c2 - s2)
    value = phase_coeff**2 + ampl_coeff**2
    return value if np.ndim(value) else float(value)


def wrap_detuning(offset_rad_s: float, fsr_hz: float) -> float:
    """Reduce a frequency offset to the nearest cavity resonance.

    Maps the signed offset modulo one free spectral range into
    (-pi fsr, +pi fsr] rad/s.
    """
    period = 2.0 * math.pi * fsr_hz
    wrapped = math.remainder(offset_rad_s, period)
    if wrapped <= -0.5 * period:
        wrapped += period
    return wrapped


def detunings_from_layout(layout, cavity, resonance_rad_s: float):
    """Detunings of the two carriers from their nearest cavity resonance.

    Parameters
    ----------
    layout : CarrierLayout
    cavity : FilterCavityParams
        Must carry the free spectral range.
    resonance_rad_s : float
        Absolute angular frequency of any one cavity resonance, anchoring
        the resonance comb.

    Returns
    -------
    (float, float)
        Signed signal and idler detunings in (-pi fsr, +pi fsr] rad/s.
    """
    if cavity.fsr_hz is None:
        raise ValidationError("detunings_from_layout requires the cavity fsr")
    d_signal = wrap_detuning(layout.signal_rad_s - resonance_rad_s, cavity.fsr_hz)
    d_idler = wrap_detuning(layout.idler_rad_s - resonance_rad_s, cavity.fsr_hz)
    return d_signal, d_idler
