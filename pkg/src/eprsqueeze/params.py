"""Physical parameter containers.

All quantities are SI: angular frequencies in rad/s, powers in W, masses
in kg, lengths in m. Every type is an immutable value object that
validates its invariants on construction, so downstream code can assume
well-formed inputs.

Angle conventions used throughout the package:

* quadrature angles have period pi; the amplitude quadrature sits at 0
  and the phase quadrature at pi/2,
* the homodyne readout angle ``zeta`` is measured from the amplitude
  quadrature (``zeta = pi/2`` reads the phase quadrature),
* the squeeze angle ``phi`` is measured from the phase quadrature:
  ``phi = 0`` squeezes the phase quadrature (the standard shot-noise
  injection) and ``phi = pi/2`` squeezes the amplitude quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

# Smallest eigenvalue tolerated after symmetrization when checking
# positive definiteness of covariance matrices.
EIGENVALUE_TOLERANCE = 1e-10
# Slack on determinant and uncertainty-relation checks.
PHYSICALITY_TOLERANCE = 1e-9


def _require(condition, message):
    if not condition:
        raise ValidationError(message)


@dataclass(frozen=True)
class InterferometerParams:
    """Interferometer constants entering the back-action coupling.

    Attributes
    ----------
    circulating_power_w : float
        Light power circulating in the arms [W].
    mirror_mass_kg : float
        Test-mass mirror mass [kg].
    wavelength_m : float
        Carrier wavelength [m].
    arm_length_m : float
        Arm length [m].
    detector_halfwidth_rad_s : float
        Detector optical half-linewidth (HWHM) [rad/s].
    """

    circulating_power_w: float
    mirror_mass_kg: float
    wavelength_m: float
    arm_length_m: float
    detector_halfwidth_rad_s: float

    def __post_init__(self):
        for name in (
            "circulating_power_w",
            "mirror_mass_kg",
            "wavelength_m",
            "arm_length_m",
            "detector_halfwidth_rad_s",
        ):
            value = getattr(self, name)
            _require(
                math.isfinite(value) and value > 0,
                f"InterferometerParams.{name} must be finite and > 0, got {value!r}",
            )

    @property
    def coupling_rate(self) -> float:
        """Optomechanical coupling rate J = 8 pi I_c / (M lambda L) [s^-3]."""
        return (
            8.0
            * math.pi
            * self.circulating_power_w
            / (self.mirror_mass_kg * self.wavelength_m * self.arm_length_m)
        )


@dataclass(frozen=True)
class FilterCavityParams:
    """Detuned filter cavity seen by the entangled sidebands.

    ``detuning_signal_rad_s`` / ``detuning_idler_rad_s`` are the signed
    offsets of the two carriers from their nearest cavity resonance;
    positive means the carrier sits above the resonance. Only relative
    signs are observable. ``fsr_hz`` and ``length_m`` are metadata used
    for detuning bookkeeping, not by the spectrum formulas.
    """

    halfwidth_rad_s: float
    detuning_signal_rad_s: float
    detuning_idler_rad_s: float
    fsr_hz: float | None = None
    length_m: float | None = None

    def __post_init__(self):
        _require(
            math.isfinite(self.halfwidth_rad_s) and self.halfwidth_rad_s > 0,
            f"cavity halfwidth must be > 0, got {self.halfwidth_rad_s!r}",
        )
        for name in ("detuning_signal_rad_s", "detuning_idler_rad_s"):
            value = getattr(self, name)
            _require(math.isfinite(value), f"FilterCavityParams.{name} must be finite")
        if self.fsr_hz is not None:
            _require(self.fsr_hz > 0, f"cavity fsr_hz must be > 0, got {self.fsr_hz!r}")
            half_range = math.pi * self.fsr_hz
            for name in ("detuning_signal_rad_s", "detuning_idler_rad_s"):
                value = getattr(self, name)
                _require(
                    abs(value) < half_range,
                    f"{name} = {value!r} rad/s exceeds half a free spectral "
                    f"range ({half_range!r} rad/s); detunings are measured "
                    "from the nearest resonance",
                )
        if self.length_m is not None:
            _require(self.length_m > 0, "cavity length_m must be > 0")


@dataclass(frozen=True)
class CarrierLayout:
    """Absolute frequencies of the pump and the two entangled carriers.

    The parametric source emits pairwise-entangled fields symmetric
    about half the pump frequency, so energy conservation requires
    ``signal + idler == pump``. The signal carrier is the lower one.
    """

    pump_rad_s: float
    signal_rad_s: float
    idler_rad_s: float

    def __post_init__(self):
        for name in ("pump_rad_s", "signal_rad_s", "idler_rad_s"):
            value = getattr(self, name)
            _require(
                math.isfinite(value) and value > 0,
                f"CarrierLayout.{name} must be finite and > 0",
            )
        _require(
            self.signal_rad_s < self.idler_rad_s,
            "signal carrier must lie below the idler carrier",
        )
        mismatch = abs(self.signal_rad_s + self.idler_rad_s - self.pump_rad_s)
        _require(
            mismatch <= 1e-9 * self.pump_rad_s,
            "carriers do not satisfy signal + idler = pump "
            f"(mismatch {mismatch!r} rad/s)",
        )


@dataclass(frozen=True)
class SqueezerParams:
    """Squeeze factor and injection angle of the squeezed field.

    ``injection_angle_rad`` is measured from the phase quadrature
    (period pi): 0 squeezes the phase quadrature, pi/2 the amplitude
    quadrature.
    """

    squeeze_factor: float
    injection_angle_rad: float = 0.0

    def __post_init__(self):
        _require(
            math.isfinite(self.squeeze_factor) and self.squeeze_factor >= 0,
            f"squeeze_factor must be >= 0, got {self.squeeze_factor!r}",
        )
        _require(math.isfinite(self.injection_angle_rad), "injection_angle_rad must be finite")

    @property
    def angle_mod_pi(self) -> float:
        """Injection angle reduced into [0, pi) for comparisons."""
        return self.injection_angle_rad % math.pi


@dataclass(frozen=True)
class ReadoutParams:
    """Bichromatic balanced-homodyne readout settings.

    Only the ratio of the two local-oscillator powers is observable;
    scaling both by a common factor leaves every output unchanged.
    """

    readout_angle_rad: float
    efficiency: float
    lo_power_signal: float = 1.0
    lo_power_idler: float = 1.0
    conditioning_gain: float | None = None

    def __post_init__(self):
        _require(math.isfinite(self.readout_angle_rad), "readout_angle_rad must be finite")
        _require(
            math.isfinite(self.efficiency) and 0.0 <= self.efficiency <= 1.0,
            f"efficiency must lie in [0, 1], got {self.efficiency!r}",
        )
        for name in ("lo_power_signal", "lo_power_idler"):
            value = getattr(self, name)
            _require(
                math.isfinite(value) and value > 0,
                f"ReadoutParams.{name} must be > 0, got {value!r}",
            )
        if self.conditioning_gain is not None:
            _require(math.isfinite(self.conditioning_gain), "conditioning_gain must be finite")

    @property
    def lo_balance(self) -> float:
        """2 sqrt(alpha beta) / (alpha + beta), the gauge-invariant LO weight."""
        a, b = self.lo_power_signal, self.lo_power_idler
        return 2.0 * math.sqrt(a * b) / (a + b)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing grid of sideband angular frequencies [rad/s]."""

    omegas_rad_s: np.ndarray
    spacing: str = "logarithmic"

    def __post_init__(self):
        object.__setattr__(self, "omegas_rad_s", _readonly(self.omegas_rad_s))
        w = self.omegas_rad_s
        _require(w.ndim == 1 and w.size > 0, "frequency grid must be a non-empty 1-d array")
        _require(np.all(np.isfinite(w)) and np.all(w > 0), "grid frequencies must be finite and > 0")
        _require(np.all(np.diff(w) > 0), "grid frequencies must be strictly increasing")
        _require(
            self.spacing in ("linear", "logarithmic"),
            f"spacing must be 'linear' or 'logarithmic', got {self.spacing!r}",
        )

    def __len__(self):
        return self.omegas_rad_s.size

    @property
    def frequencies_hz(self) -> np.ndarray:
        return self.omegas_rad_s / TWO_PI

    @classmethod
    def linear(cls, min_hz: float, max_hz: float, points: int) -> "FrequencyGrid":
        _require(points >= 1, "grid needs at least one point")
        _require(0 < min_hz <= max_hz, "grid bounds must satisfy 0 < min <= max")
        return cls(TWO_PI * np.linspace(min_hz, max_hz, points), "linear")

    @classmethod
    def logarithmic(cls, min_hz: float, max_hz: float, points: int) -> "FrequencyGrid":
        _require(points >= 1, "grid needs at least one point")
        _require(0 < min_hz <= max_hz, "grid bounds must satisfy 0 < min <= max")
        return cls(TWO_PI * np.geomspace(min_hz, max_hz, points), "logarithmic")

    @classmethod
    def from_spec(cls, spec: str) -> "FrequencyGrid":
        """Parse ``min_hz:max_hz:points:lin|log`` as used by the CLI."""
        parts = spec.split(":")
        if len(parts) != 4 or parts[3] not in ("lin", "log"):
            raise ValidationError(
                f"grid spec {spec!r} is not of the form min_hz:max_hz:points:lin|log"
            )
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValidationError(f"grid spec {spec!r}: {exc}") from exc
        maker = cls.linear if parts[3] == "lin" else cls.logarithmic
        return maker(lo, hi, n)


@dataclass(frozen=True)
class QuadCovariance:
    """2x2 covariance of (amplitude, phase) quadratures, vacuum = identity.

    Physical Gaussian states satisfy det >= 1, with equality for pure
    states.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        _require(m.shape == (2, 2), f"covariance must be 2x2, got shape {m.shape}")
        _require(np.all(np.isfinite(m)), "covariance entries must be finite")
        scale = max(np.abs(m).max(), 1.0)
        _require(
            abs(m[0, 1] - m[1, 0]) <= 1e-12 * scale,
            "covariance must be symmetric",
        )
        m = 0.5 * (m + m.T)
        eigs = np.linalg.eigvalsh(m)
        # Rounding of extreme (large-coupling) states grows with the matrix
        # norm; the tolerances track that so legitimate physics is never
        # rejected for float noise.
        eig_tol = max(EIGENVALUE_TOLERANCE, 64.0 * np.finfo(float).eps * scale)
        _require(
            eigs.min() > -eig_tol,
            f"covariance is not positive definite (min eigenvalue {eigs.min()!r})",
        )
        det = float(np.linalg.det(m))
        det_tol = max(PHYSICALITY_TOLERANCE, 64.0 * np.finfo(float).eps * scale**2)
        _require(
            det >= 1.0 - det_tol,
            f"covariance violates the uncertainty relation (det = {det!r} < 1)",
        )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def vacuum(cls) -> "QuadCovariance":
        return cls(np.eye(2))

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))
