"""Scenario configuration: JSON ingestion and named presets.

Config files are plain JSON with units spelled out in the key names
(``*_rad_s``, ``*_hz``, ``*_w``, ``*_kg``, ``*_m``); unit mistakes are
the dominant failure mode of this kind of model, so nothing is inferred.
Unknown keys are rejected with the offending key named.

Presets:

``fig3a``, ``fig3b``, ``fig4``
    Table-top filter-cavity scenarios sharing gamma = 2 pi x 150 kHz,
    balanced local oscillators and one (r, eta) pair; they differ only
    in the two carrier detunings: (+2 pi x 460 kHz, 0),
    (+2 pi x 460 kHz, -2 pi x 460 kHz) and
    (+2 pi x 460 kHz, +2 pi x 460 kHz). The (r, eta) pair is eta = 0.7
    with r chosen so the best-angle high-frequency noise sits at
    exactly -4.0 dB.

``fig1-fi``, ``fig1-fd``
    Interferometer improvement maps (fixed squeeze angle vs the
    back-action-cancelling frequency-dependent angle) for a km-scale
    detector with 40 % readout loss.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import DataFormatError, ValidationError
from .params import (
    CarrierLayout,
    FilterCavityParams,
    FrequencyGrid,
    InterferometerParams,
    ReadoutParams,
    SqueezerParams,
)

TWO_PI = 2.0 * math.pi
SPEED_OF_LIGHT_M_S = 299792458.0

SCENARIOS = ("fig3a", "fig3b", "fig4", "fig1-fi", "fig1-fd", "custom")

# Shared filter-cavity preset numbers.
_CAVITY_HALFWIDTH = TWO_PI * 150e3
_CAVITY_DETUNING = TWO_PI * 460e3
_CAVITY_FSR_HZ = 58.73e6
_CAVITY_LENGTH_M = 2.5
_PRESET_ETA = 0.7
# Squeeze factor pinning the best-angle high-frequency plateau to -4.0 dB:
# 1 - eta + eta e^{-2r} = 10^{-0.4}.
_PRESET_R = -0.5 * math.log((10.0**-0.4 - (1.0 - _PRESET_ETA)) / _PRESET_ETA)

_PUMP_RAD_S = TWO_PI * SPEED_OF_LIGHT_M_S / 532e-9
_HALF_GAP_RAD_S = math.pi * _CAVITY_FSR_HZ

_DETUNINGS = {
    "fig3a": (_CAVITY_DETUNING, 0.0),
    "fig3b": (_CAVITY_DETUNING, -_CAVITY_DETUNING),
    "fig4": (_CAVITY_DETUNING, _CAVITY_DETUNING),
}

_SCHEMA = {
    "scenario": str,
    "interferometer": {
        "circulating_power_w": float,
        "mirror_mass_kg": float,
        "wavelength_m": float,
        "arm_length_m": float,
        "detector_halfwidth_rad_s": float,
    },
    "cavity": {
        "halfwidth_rad_s": float,
        "detuning_signal_rad_s": float,
        "detuning_idler_rad_s": float,
        "fsr_hz": float,
        "length_m": float,
    },
    "carriers": {
        "pump_rad_s": float,
        "signal_rad_s": float,
        "idler_rad_s": float,
    },
    "squeezer": {
        "squeeze_factor": float,
        "injection_angle_rad": float,
    },
    "readout": {
        "readout_angle_rad": float,
        "efficiency": float,
        "lo_power_signal": float,
        "lo_power_idler": float,
        "conditioning_gain": float,
    },
    "grid": {
        "min_hz": float,
        "max_hz": float,
        "points": int,
        "spacing": str,
    },
    "angles": int,
    "map_mode": str,
}

@dataclass(frozen=True)
class ScenarioConfig:
    """Validated bundle of model parameters for one CLI run."""

    scenario: str
    cavity: FilterCavityParams
    squeezer: SqueezerParams
    readout: ReadoutParams
    grid: FrequencyGrid
    angles: int
    interferometer: InterferometerParams | None = None
    carriers: CarrierLayout | None = None
    map_mode: str = "frequency-dependent"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(
                f"unknown scenario {self.scenario!r}; valid: {SCENARIOS}"
            )
        if self.angles < 4:
            raise ValidationError(f"angles must be >= 4, got {self.angles}")

    def require_interferometer(self) -> InterferometerParams:
        if self.interferometer is None:
            raise ValidationError(
                "this command needs an 'interferometer' section in the config"
            )
        return self.interferometer


def _check_keys(data: dict, source: str):
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ValidationError(f"{source}: unknown config key {key!r}")
        section = _SCHEMA[key]
        if isinstance(section, dict):
            if not isinstance(value, dict):
                raise ValidationError(f"{source}: section {key!r} must be an object")
            for sub in value:
                if sub not in section:
                    raise ValidationError(
                        f"{source}: unknown config key {key!r}.{sub!r}"
                    )


def _number(data: dict, section: str, key: str, source: str, optional=False):
    if key not in data:
        if optional:
            return None
        raise ValidationError(f"{source}: missing config key {section!r}.{key!r}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(
            f"{source}: config key {section!r}.{key!r} must be a number"
        )
    return float(value)


def config_from_dict(data: dict, source: str = "config") -> ScenarioConfig:
    """Build a validated ScenarioConfig from parsed JSON."""
    if not isinstance(data, dict):
        raise ValidationError(f"{source}: config root must be an object")
    _check_keys(data, source)
    scenario = data.get("scenario", "custom")

    if "cavity" not in data:
        raise ValidationError(f"{source}: missing config section 'cavity'")
    cav = data["cavity"]
    cavity = FilterCavityParams(
        halfwidth_rad_s=_number(cav, "cavity", "halfwidth_rad_s", source),
        detuning_signal_rad_s=_number(cav, "cavity", "detuning_signal_rad_s", source),
        detuning_idler_rad_s=_number(cav, "cavity", "detuning_idler_rad_s", source),
        fsr_hz=_number(cav, "cavity", "fsr_hz", source, optional=True),
        length_m=_number(cav, "cavity", "length_m", source, optional=True),
    )

    if "squeezer" not in data:
        raise ValidationError(f"{source}: missing config section 'squeezer'")
    sq = data["squeezer"]
    squeezer = SqueezerParams(
        squeeze_factor=_number(sq, "squeezer", "squeeze_factor", source),
        injection_angle_rad=_number(sq, "squeezer", "injection_angle_rad", source),
    )

    if "readout" not in data:
        raise ValidationError(f"{source}: missing config section 'readout'")
    rd = data["readout"]
    readout = ReadoutParams(
        readout_angle_rad=_number(rd, "readout", "readout_angle_rad", source),
        efficiency=_number(rd, "readout", "efficiency", source),
        lo_power_signal=_number(rd, "readout", "lo_power_signal", source),
        lo_power_idler=_number(rd, "readout", "lo_power_idler", source),
        conditioning_gain=_number(rd, "readout", "conditioning_gain", source, optional=True),
    )

    if "grid" not in data:
        raise ValidationError(f"{source}: missing config section 'grid'")
    gr = data["grid"]
    spacing = gr.get("spacing", "logarithmic")
    if spacing not in ("linear", "logarithmic"):
        raise ValidationError(
            f"{source}: config key 'grid'.'spacing' must be 'linear' or 'logarithmic'"
        )
    points = gr.get("points")
    if not isinstance(points, int) or isinstance(points, bool):
        raise ValidationError(f"{source}: config key 'grid'.'points' must be an integer")
    maker = FrequencyGrid.linear if spacing == "linear" else FrequencyGrid.logarithmic
    grid = maker(
        _number(gr, "grid", "min_hz", source),
        _number(gr, "grid", "max_hz", source),
        points,
    )

    interferometer = None
    if "interferometer" in data:
        ifo = data["interferometer"]
        interferometer = InterferometerParams(
            circulating_power_w=_number(ifo, "interferometer", "circulating_power_w", source),
            mirror_mass_kg=_number(ifo, "interferometer", "mirror_mass_kg", source),
            wavelength_m=_number(ifo, "interferometer", "wavelength_m", source),
            arm_length_m=_number(ifo, "interferometer", "arm_length_m", source),
            detector_halfwidth_rad_s=_number(
                ifo, "interferometer", "detector_halfwidth_rad_s", source
            ),
        )

    carriers = None
    if "carriers" in data:
        car = data["carriers"]
        carriers = CarrierLayout(
            pump_rad_s=_number(car, "carriers", "pump_rad_s", source),
            signal_rad_s=_number(car, "carriers", "signal_rad_s", source),
            idler_rad_s=_number(car, "carriers", "idler_rad_s", source),
        )

    angles = data.get("angles", 128)
    if not isinstance(angles, int) or isinstance(angles, bool):
        raise ValidationError(f"{source}: config key 'angles' must be an integer")

    map_mode = data.get("map_mode", "frequency-dependent")
    if not isinstance(map_mode, str):
        raise ValidationError(f"{source}: config key 'map_mode' must be a string")

    return ScenarioConfig(
        scenario=scenario,
        cavity=cavity,
        squeezer=squeezer,
        readout=readout,
        grid=grid,
        angles=angles,
        interferometer=interferometer,
        carriers=carriers,
        map_mode=map_mode,
    )


def load_config(path) -> ScenarioConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise DataFormatError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data, source=str(path))


def _filter_cavity_preset(scenario: str) -> ScenarioConfig:
    d1, d2 = _DETUNINGS[scenario]
    return ScenarioConfig(
        scenario=scenario,
        cavity=FilterCavityParams(
            halfwidth_rad_s=_CAVITY_HALFWIDTH,
            detuning_signal_rad_s=d1,
            detuning_idler_rad_s=d2,
            fsr_hz=_CAVITY_FSR_HZ,
            length_m=_CAVITY_LENGTH_M,
        ),
        squeezer=SqueezerParams(squeeze_factor=_PRESET_R, injection_angle_rad=0.0),
        readout=ReadoutParams(
            readout_angle_rad=0.5 * math.pi,
            efficiency=_PRESET_ETA,
            lo_power_signal=1.0,
            lo_power_idler=1.0,
        ),
        grid=FrequencyGrid.logarithmic(10e3, 30e6, 512),
        angles=128,
        carriers=CarrierLayout(
            pump_rad_s=_PUMP_RAD_S,
            signal_rad_s=0.5 * _PUMP_RAD_S - _HALF_GAP_RAD_S,
            idler_rad_s=0.5 * _PUMP_RAD_S + _HALF_GAP_RAD_S,
        ),
    )


def _interferometer_preset(scenario: str) -> ScenarioConfig:
    mode = "fixed-angle" if scenario == "fig1-fi" else "frequency-dependent"
    return ScenarioConfig(
        scenario=scenario,
        cavity=FilterCavityParams(
            halfwidth_rad_s=_CAVITY_HALFWIDTH,
            detuning_signal_rad_s=0.0,
            detuning_idler_rad_s=0.0,
            fsr_hz=_CAVITY_FSR_HZ,
            length_m=_CAVITY_LENGTH_M,
        ),
        squeezer=SqueezerParams(squeeze_factor=1.0, injection_angle_rad=0.0),
        readout=ReadoutParams(
            readout_angle_rad=0.5 * math.pi,
            efficiency=0.6,
            lo_power_signal=1.0,
            lo_power_idler=1.0,
        ),
        grid=FrequencyGrid.logarithmic(10.0, 10e3, 512),
        angles=128,
        interferometer=InterferometerParams(
            circulating_power_w=800e3,
            mirror_mass_kg=40.0,
            wavelength_m=1064e-9,
            arm_length_m=4000.0,
            detector_halfwidth_rad_s=TWO_PI * 500.0,
        ),
        map_mode=mode,
    )


def preset(name: str) -> ScenarioConfig:
    """Return the named scenario preset."""
    if name in _DETUNINGS:
        return _filter_cavity_preset(name)
    if name in ("fig1-fi", "fig1-fd"):
        return _interferometer_preset(name)
    raise ValidationError(
        f"unknown preset {name!r}; valid presets: fig3a, fig3b, fig4, fig1-fi, fig1-fd"
    )
