"""Two-mode entanglement analysis: conditional variances and the Reid
product.

Measuring one sideband of a two-mode squeezed field alone shows excess
noise (marginal variance cosh 2r), but subtracting g times the partner
measurement in post-processing can push the residual below vacuum. With
the optimal gain the conditional variance of an ideal pair is
1 / cosh 2r; when both conjugate quadrature pairs beat vacuum the state
is EPR entangled (conditional-variance product < 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError, ValidationError
from .params import _readonly

# Quadrature ordering of the 4x4 covariance.
AMPLITUDE = "amplitude"
PHASE = "phase"
_QUAD_INDEX = {AMPLITUDE: (0, 2), PHASE: (1, 3)}

# Symplectic form for (ampl_s, phase_s, ampl_i, phase_i).
_SYMPLECTIC_FORM = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)


@dataclass(frozen=True)
class TwoModeCovariance:
    """4x4 covariance over (ampl_s, phase_s, ampl_i, phase_i), vacuum = I."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        if m.shape != (4, 4):
            raise ValidationError(f"two-mode covariance must be 4x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("covariance entries must be finite")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > 1e-12 * scale:
            raise ValidationError("two-mode covariance must be symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m).min() <= 0.0:
            raise ValidationError("two-mode covariance must be positive definite")
        # Physicality: sigma + i Omega >= 0 in vacuum-normalized units.
        bound = np.linalg.eigvalsh(m + 1j * _SYMPLECTIC_FORM).min()
        if bound < -1e-9:
            raise ValidationError(
                f"two-mode covariance violates the uncertainty bound ({bound!r})"
            )
        object.__setattr__(self, "matrix", _readonly(m))


def two_mode_squeezed_covariance(squeeze_factor: float, efficiency: float = 1.0) -> TwoModeCovariance:
    """Symmetric two-mode squeezed state, optionally with detection loss.

    Both marginals have variance cosh 2r; amplitude quadratures are
    correlated (+sinh 2r) and phase quadratures anticorrelated
    (-sinh 2r). Loss mixes both modes with vacuum:
    eta Sigma + (1 - eta) I.
    """
    if squeeze_factor < 0:
        raise ValidationError(f"squeeze factor must be >= 0, got {squeeze_factor!r}")
    if not (0.0 <= efficiency <= 1.0):
        raise ValidationError(f"efficiency must lie in [0, 1], got {efficiency!r}")
    c = math.cosh(2.0 * squeeze_factor)
    s = math.sinh(2.0 * squeeze_factor)
    ideal = np.array(
        [
            [c, 0.0, s, 0.0],
            [0.0, c, 0.0, -s],
            [s, 0.0, c, 0.0],
            [0.0, -s, 0.0, c],
        ]
    )
    return TwoModeCovariance(efficiency * ideal + (1.0 - efficiency) * np.eye(4))


def _pair_moments(state: TwoModeCovariance, quadrature: str):
    try:
        i, j = _QUAD_INDEX[quadrature]
    except KeyError:
        raise ValidationError(
            f"quadrature must be 'amplitude' or 'phase', got {quadrature!r}"
        ) from None
    m = state.matrix
    return m[i, i], m[j, j], m[i, j]


def conditional_variance(state: TwoModeCovariance, quadrature: str, gain: float) -> float:
    """Variance of x_signal + g x_idler for the chosen quadrature pair.

    Var = Var_s + 2 g Cov + g^2 Var_i. At g = 0 this is the marginal
    variance; the optimal gain -Cov/Var_i leaves Var_s - Cov^2/Var_i.
    """
    var_s, var_i, cov = _pair_moments(state, quadrature)
    if not math.isfinite(gain):
        raise ValidationError("conditioning gain must be finite")
    if var_i <= 0.0:
        raise DegenerateStateError("idler quadrature variance vanishes; cannot condition")
    return float(var_s + 2.0 * gain * cov + gain**2 * var_i)


def optimal_conditioning_gain(state: TwoModeCovariance, quadrature: str) -> float:
    """Gain minimizing the conditional variance, -Cov / Var_idler."""
    _, var_i, cov = _pair_moments(state, quadrature)
    if var_i <= 0.0:
        raise DegenerateStateError("idler quadrature variance vanishes; cannot condition")
    return float(-cov / var_i)


def minimum_conditional_variance(state: TwoModeCovariance, quadrature: str) -> float:
    """Conditional variance at the optimal gain, Var_s - Cov^2 / Var_i."""
    gain = optimal_conditioning_gain(state, quadrature)
    return conditional_variance(state, quadrature, gain)


def reid_epr_criterion(state: TwoModeCovariance) -> tuple[float, bool]:
    """Conditional-variance product certifying EPR entanglement.

    Returns (product, entangled) where product multiplies the minimal
    amplitude and phase conditional variances and entangled is True iff
    the product drops below the vacuum value 1.
    """
    product = minimum_conditional_variance(state, AMPLITUDE) * minimum_conditional_variance(
        state, PHASE
    )
    return product, product < 1.0


def conditioning_report(squeeze_factor: float, efficiency: float = 1.0) -> dict:
    """Summary of the conditioning performance of a (lossy) entangled pair.

    Collects the marginal variance, the optimal gains, both minimal
    conditional variances and the Reid product for the symmetric state.
    """
    state = two_mode_squeezed_covariance(squeeze_factor, efficiency)
    product, entangled = reid_epr_criterion(state)
    return {
        "squeeze_factor": squeeze_factor,
        "efficiency": efficiency,
        "marginal_variance": float(state.matrix[0, 0]),
        "optimal_gain_amplitude": optimal_conditioning_gain(state, AMPLITUDE),
        "optimal_gain_phase": optimal_conditioning_gain(state, PHASE),
        "conditional_variance_amplitude": minimum_conditional_variance(state, AMPLITUDE),
        "conditional_variance_phase": minimum_conditional_variance(state, PHASE),
        "reid_product": product,
        "entangled": entangled,
    }
