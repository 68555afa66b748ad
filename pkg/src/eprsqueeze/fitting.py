"""Joint nonlinear least-squares estimation of model parameters from
measured noise spectra.

Several traces taken at different readout angles share one model; the
objective is the weighted sum of squared dB residuals. The optimizer is
a bounded derivative-free simplex (parameters are mapped to an
unconstrained or box space first: logistic for the efficiency, log for
scale parameters, identity for detunings and angles), run in cycles
until the residual stops improving, with an optional finite-difference
gradient polish.

Identifiability notes baked into the interface:

* only the local-oscillator power ratio is observable, so the free
  parameter is ``lo_ratio``; asking to float either power alone is
  rejected,
* flipping the sign of both detunings while negating the readout angles
  leaves the model invariant; the fitter pins ``delta1_rad_s >= 0`` and
  reports that gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError
from .params import FilterCavityParams, FrequencyGrid, ReadoutParams, SqueezerParams
from .spectra import epr_noise_spectrum

LABEL_ANGLES = {"phase": 0.5 * math.pi, "intermediate": 0.25 * math.pi, "amplitude": 0.0}

GAUGE_NOTE = (
    "delta1_rad_s is pinned >= 0; (delta1, delta2, zeta) -> (-delta1, -delta2, -zeta) "
    "is an equivalent solution"
)

_LOG_PARAMS = ("r", "gamma_rad_s", "lo_ratio")
_LOGISTIC_PARAMS = ("eta",)
_FORBIDDEN_FREE = ("alpha", "beta", "lo_power_signal", "lo_power_idler")

CONVERGENCE_RTOL = 1e-9
DEFAULT_MAX_EVALS = 10_000
_BOUND_SNAP = 1e-6


@dataclass(frozen=True)
class MeasuredTrace:
    """One measured noise trace at a fixed readout quadrature.

    ``label`` tags the quadrature (phase | intermediate | amplitude, or
    anything descriptive when ``zeta_rad`` is given explicitly).
    """

    label: str
    zeta_rad: float
    frequencies_hz: np.ndarray
    noise_db: np.ndarray
    weight: float = 1.0
    source: str | None = None

    def __post_init__(self):
        freqs = np.array(self.frequencies_hz, dtype=float, copy=True)
        noise = np.array(self.noise_db, dtype=float, copy=True)
        where = f" in {self.source}" if self.source else ""
        if freqs.ndim != 1 or freqs.size == 0 or noise.shape != freqs.shape:
            raise ValidationError(f"trace {self.label!r}{where}: need matching 1-d samples")
        if not np.all(np.isfinite(freqs)) or not np.all(np.isfinite(noise)):
            raise ValidationError(f"trace {self.label!r}{where}: non-finite samples")
        steps = np.diff(freqs)
        if np.any(steps <= 0):
            row = int(np.argmax(steps <= 0)) + 1
            raise ValidationError(
                f"trace {self.label!r}{where}: frequencies not strictly "
                f"increasing at row {row}"
            )
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise ValidationError(f"trace {self.label!r}{where}: weight must be > 0")
        if not math.isfinite(self.zeta_rad):
            raise ValidationError(f"trace {self.label!r}{where}: zeta must be finite")
        freqs.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "frequencies_hz", freqs)
        object.__setattr__(self, "noise_db", noise)

    @classmethod
    def from_label(cls, label, frequencies_hz, noise_db, weight=1.0, source=None):
        if label not in LABEL_ANGLES:
            raise ValidationError(
                f"unknown quadrature label {label!r}; use one of {sorted(LABEL_ANGLES)} "
                "or give zeta_rad explicitly"
            )
        return cls(label, LABEL_ANGLES[label], frequencies_hz, noise_db, weight, source)


@dataclass(frozen=True)
class FitProblem:
    """Traces plus the shared model, the free-parameter set and bounds.

    ``free`` maps canonical parameter names (r, eta, gamma_rad_s,
    delta1_rad_s, delta2_rad_s, lo_ratio, zeta<i>_rad) to (lower, upper)
    bounds; ``initial`` gives a starting value strictly inside the
    bounds for each free parameter. Parameters not in ``free`` are held
    at the base-model values.
    """

    traces: tuple
    cavity: FilterCavityParams
    squeezer: SqueezerParams
    readout: ReadoutParams
    free: dict
    initial: dict

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        if not self.traces:
            raise ValidationError("fit problem needs at least one trace")
        if not self.free:
            raise ValidationError("fit problem needs at least one free parameter")
        valid = set(self.parameter_names())
        for name in self.free:
            if name in _FORBIDDEN_FREE:
                raise ValidationError(
                    f"parameter {name!r} is not identifiable; only the power "
                    "ratio 'lo_ratio' may float"
                )
            if name not in valid:
                raise ValidationError(f"unknown free parameter {name!r}; valid: {sorted(valid)}")
            lo, hi = self.free[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"bounds for {name!r} must be finite with lo < hi")
            if name in _LOG_PARAMS and lo <= 0:
                raise ValidationError(f"{name!r} is log-scaled; lower bound must be > 0")
            if name == "eta" and not (0.0 <= lo and hi <= 1.0):
                raise ValidationError("bounds for 'eta' must lie within [0, 1]")
            if name == "delta1_rad_s" and lo < 0:
                raise ValidationError(
                    "sign gauge: delta1_rad_s is pinned >= 0, use a non-negative lower bound"
                )
            if name not in self.initial:
                raise ValidationError(f"free parameter {name!r} has no initial guess")
            init = self.initial[name]
            if not (lo < init < hi):
                raise ValidationError(
                    f"initial guess {init!r} for {name!r} is not strictly inside "
                    f"bounds ({lo!r}, {hi!r})"
                )
        for name in self.initial:
            if name not in self.free:
                raise ValidationError(f"initial guess given for non-free parameter {name!r}")

    def parameter_names(self):
        names = ["r", "eta", "gamma_rad_s", "delta1_rad_s", "delta2_rad_s", "lo_ratio"]
        names += [f"zeta{i}_rad" for i in range(len(self.traces))]
        return names

    def base_parameters(self) -> dict:
        """Full parameter vector of the base model."""
        params = {
            "r": self.squeezer.squeeze_factor,
            "eta": self.readout.efficiency,
            "gamma_rad_s": self.cavity.halfwidth_rad_s,
            "delta1_rad_s": self.cavity.detuning_signal_rad_s,
            "delta2_rad_s": self.cavity.detuning_idler_rad_s,
            "lo_ratio": self.readout.lo_power_signal / self.readout.lo_power_idler,
        }
        for i, trace in enumerate(self.traces):
            params[f"zeta{i}_rad"] = trace.zeta_rad
        return params


@dataclass(frozen=True)
class FitResult:
    """Estimated parameters with residual diagnostics."""

    parameters: dict
    free_names: tuple
    residual: float
    per_trace_residuals: tuple
    converged: bool
    iterations: int
    history: np.ndarray
    at_bounds: tuple
    gauge_note: str = GAUGE_NOTE

    def to_dict(self) -> dict:
        return {
            "parameters": dict(self.parameters),
            "free_parameters": list(self.free_names),
            "residual_db2": self.residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "at_bounds": list(self.at_bounds),
            "gauge_note": self.gauge_note,
            "per_trace_rms_db": [
                float(np.sqrt(np.mean(res**2))) for res in self.per_trace_residuals
            ],
        }


def _model_db(params: dict, trace_index: int, trace: MeasuredTrace) -> np.ndarray:
    cavity = FilterCavityParams(
        halfwidth_rad_s=params["gamma_rad_s"],
        detuning_signal_rad_s=params["delta1_rad_s"],
        detuning_idler_rad_s=params["delta2_rad_s"],
    )
    squeezer = SqueezerParams(squeeze_factor=params["r"])
    readout = ReadoutParams(
        readout_angle_rad=params[f"zeta{trace_index}_rad"],
        efficiency=params["eta"],
        lo_power_signal=params["lo_ratio"],
        lo_power_idler=1.0,
    )
    grid = FrequencyGrid(2.0 * math.pi * trace.frequencies_hz, "linear")
    return epr_noise_spectrum(cavity, squeezer, readout, grid).db


def _trace_residuals(problem: FitProblem, params: dict):
    residuals = []
    for i, trace in enumerate(problem.traces):
        try:
            model = _model_db(params, i, trace)
        except Exception as exc:
            where = trace.source or trace.label
            raise type(exc)(f"model evaluation failed for trace {where!r}: {exc}") from exc
        residuals.append(model - trace.noise_db)
    return residuals


def evaluate_residual(problem: FitProblem, params: dict) -> float:
    """Weighted sum of squared dB residuals over all traces.

    ``params`` may override any subset of the canonical parameters; the
    rest are taken from the problem's base model. Overridden free
    parameters must respect their bounds.
    """
    full = problem.base_parameters()
    for name, value in params.items():
        if name not in full:
            raise ValidationError(f"unknown parameter {name!r}")
        full[name] = value
        if name in problem.free:
            lo, hi = problem.free[name]
            if not (lo <= value <= hi):
                raise ValidationError(
                    f"parameter {name!r} = {value!r} outside bounds ({lo!r}, {hi!r})"
                )
    total = 0.0
    for trace, res in zip(problem.traces, _trace_residuals(problem, full)):
        total += trace.weight * float(np.dot(res, res))
    return total


# ---------------------------------------------------------------------------
# bounded-parameter transforms


def _encode(name, value, lo, hi):
    if name in _LOGISTIC_PARAMS:
        return math.log((value - lo) / (hi - value))
    if name in _LOG_PARAMS:
        return math.log(value)
    return value


def _decode(name, u, lo, hi):
    if name in _LOGISTIC_PARAMS:
        return lo + (hi - lo) / (1.0 + math.exp(-u))
    if name in _LOG_PARAMS:
        return math.exp(min(u, 700.0))
    return u


def _scipy_bounds(name, lo, hi):
    if name in _LOGISTIC_PARAMS:
        return (None, None)
    if name in _LOG_PARAMS:
        return (math.log(lo), math.log(hi))
    return (lo, hi)


def fit(problem: FitProblem, max_evals: int = DEFAULT_MAX_EVALS, polish: bool = True) -> FitResult:
    """Minimize the joint residual over the free parameters.

    Runs bounded Nelder-Mead cycles restarted from the incumbent until
    the residual changes by less than ``CONVERGENCE_RTOL`` relatively
    over a full cycle, or the evaluation cap is hit (then the result is
    flagged unconverged). ``polish`` appends, and keeps only if it
    improves, a finite-difference L-BFGS-B refinement. Deterministic:
    identical problems give bit-identical results.
    """
    names = sorted(problem.free)
    base = problem.base_parameters()

    def unpack(u):
        params = dict(base)
        for name, value in zip(names, u):
            lo, hi = problem.free[name]
            params[name] = _decode(name, value, lo, hi)
        return params

    best_seen = [math.inf]

    def objective(u):
        params = unpack(u)
        try:
            residuals = _trace_residuals(problem, params)
        except ValidationError:
            return math.inf
        total = 0.0
        for trace, res in zip(problem.traces, residuals):
            total += trace.weight * float(np.dot(res, res))
        if not math.isfinite(total):
            return math.inf
        best_seen[0] = min(best_seen[0], total)
        return total

    u0 = np.array(
        [_encode(n, problem.initial[n], *problem.free[n]) for n in names]
    )
    bounds = [_scipy_bounds(n, *problem.free[n]) for n in names]
    f0 = objective(u0)
    if not math.isfinite(f0):
        raise ValidationError("residual is not finite at the initial guess")

    history = [f0]

    def track(u):
        # Called once per accepted simplex step; best_seen is the incumbent.
        history.append(best_seen[0])

    cycle_evals = max(400, 200 * (len(names) + 1))
    u, f_prev = u0, f0
    evals = 1
    converged = False
    while evals < max_evals:
        budget = min(cycle_evals, max_evals - evals)
        result = minimize(
            objective,
            u,
            method="Nelder-Mead",
            bounds=bounds,
            callback=track,
            options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-15},
        )
        evals += result.nfev
        u = result.x
        change = abs(f_prev - result.fun) / max(abs(f_prev), 1e-300)
        f_prev = result.fun
        if change < CONVERGENCE_RTOL:
            converged = True
            break

    if polish:
        refined = minimize(
            objective,
            u,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200},
        )
        evals += refined.nfev
        if refined.fun < f_prev:
            u, f_prev = refined.x, refined.fun
            history.append(f_prev)

    fitted = unpack(u)
    residuals = _trace_residuals(problem, fitted)
    total = 0.0
    for trace, res in zip(problem.traces, residuals):
        total += trace.weight * float(np.dot(res, res))

    at_bounds = []
    for name in names:
        lo, hi = problem.free[name]
        snap = _BOUND_SNAP * (hi - lo)
        if fitted[name] - lo <= snap or hi - fitted[name] <= snap:
            at_bounds.append(name)

    return FitResult(
        parameters=fitted,
        free_names=tuple(names),
        residual=total,
        per_trace_residuals=tuple(residuals),
        converged=converged,
        iterations=evals,
        history=np.minimum.accumulate(np.array(history)),
        at_bounds=tuple(at_bounds),
    )


def profile_parameter(
    problem: FitProblem,
    name: str,
    values,
    initial: dict | None = None,
    max_evals: int = DEFAULT_MAX_EVALS,
):
    """Profile the residual along one free parameter.

    For each grid value the parameter is fixed and the remaining free
    parameters are re-fit; returns a list of (value, minimized residual).
    Residuals are bounded below by the joint optimum. ``initial``
    optionally replaces the sub-fit starting point (e.g. with the joint
    solution).
    """
    if name not in problem.free:
        raise ValidationError(f"{name!r} is not a free parameter of this problem")
    if len(problem.free) < 2:
        raise ValidationError("profiling needs at least one other free parameter")
    start = dict(problem.initial if initial is None else initial)
    out = []
    for value in values:
        lo, hi = problem.free[name]
        if not (lo <= value <= hi):
            raise ValidationError(f"profile value {value!r} outside bounds of {name!r}")
        reduced_free = {k: v for k, v in problem.free.items() if k != name}
        reduced_init = {k: v for k, v in start.items() if k != name}
        base = _with_parameter(problem, name, value)
        sub = FitProblem(
            traces=problem.traces,
            cavity=base["cavity"],
            squeezer=base["squeezer"],
            readout=base["readout"],
            free=reduced_free,
            initial=reduced_init,
        )
        result = fit(sub, max_evals=max_evals)
        out.append((float(value), result.residual))
    return out


def _with_parameter(problem: FitProblem, name: str, value: float) -> dict:
    """Base model pieces with one canonical parameter replaced."""
    cavity = problem.cavity
    squeezer = problem.squeezer
    readout = problem.readout
    if name == "r":
        squeezer = SqueezerParams(value, squeezer.injection_angle_rad)
    elif name == "eta":
        readout = ReadoutParams(
            readout.readout_angle_rad, value, readout.lo_power_signal, readout.lo_power_idler
        )
    elif name == "lo_ratio":
        readout = ReadoutParams(readout.readout_angle_rad, readout.efficiency, value, 1.0)
    elif name == "gamma_rad_s":
        cavity = FilterCavityParams(
            value, cavity.detuning_signal_rad_s, cavity.detuning_idler_rad_s,
            cavity.fsr_hz, cavity.length_m,
        )
    elif name == "delta1_rad_s":
        cavity = FilterCavityParams(
            cavity.halfwidth_rad_s, value, cavity.detuning_idler_rad_s,
            cavity.fsr_hz, cavity.length_m,
        )
    elif name == "delta2_rad_s":
        cavity = FilterCavityParams(
            cavity.halfwidth_rad_s, cavity.detuning_signal_rad_s, value,
            cavity.fsr_hz, cavity.length_m,
        )
    else:
        raise ValidationError(f"cannot profile per-trace parameter {name!r}")
    return {"cavity": cavity, "squeezer": squeezer, "readout": readout}
