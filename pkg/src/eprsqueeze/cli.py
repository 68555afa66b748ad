"""Command-line front end.

Subcommands: ``spectrum``, ``spectrogram``, ``map``, ``fit``, ``epr``.
Each run reads a scenario (preset or JSON config), writes delimited
output and, unless ``--no-plot`` is given, a rendered figure next to it.

Exit codes: 0 success, 2 validation (bad config/parameters/usage),
3 numerical failure, 4 I/O or data-format failure. ``EPRSQUEEZE_THREADS``
sets the thread count used for spectrogram evaluation; it never changes
results.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

from . import io, plots
from .config import load_config, preset
from .epr import conditioning_report
from .errors import (
    DataFormatError,
    DegenerateStateError,
    SingularityError,
    ValidationError,
)
from .fitting import FitProblem, fit as run_fit_problem
from .params import FrequencyGrid, ReadoutParams, SqueezerParams, FilterCavityParams
from .spectra import epr_noise_spectrum, interferometer_noise_map, spectrogram

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICS = 3
EXIT_IO = 4

THREADS_ENV = "EPRSQUEEZE_THREADS"


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if count < 1:
        raise ValidationError(f"{THREADS_ENV} must be >= 1, got {count}")
    return count


def _resolve_config(args):
    if args.preset and args.config:
        raise ValidationError("give either --preset or --config, not both")
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ValidationError("a scenario is required: pass --preset or --config")
    if getattr(args, "grid", None):
        cfg = dataclasses.replace(cfg, grid=FrequencyGrid.from_spec(args.grid))
    if getattr(args, "angles", None):
        cfg = dataclasses.replace(cfg, angles=args.angles)
    return cfg


def _plot_path(out_path) -> Path:
    return Path(out_path).with_suffix(".png")


def cmd_spectrum(args) -> int:
    cfg = _resolve_config(args)
    spectrum = epr_noise_spectrum(cfg.cavity, cfg.squeezer, cfg.readout, cfg.grid)
    metadata = {
        "scenario": cfg.scenario,
        "zeta_rad": repr(cfg.readout.readout_angle_rad),
        "spacing": cfg.grid.spacing,
    }
    io.write_spectrum_csv(args.out, spectrum, metadata)
    print(f"wrote {args.out}")
    if not args.no_plot:
        figure = _plot_path(args.out)
        plots.save_spectrum_plot(figure, spectrum, title=f"scenario {cfg.scenario}")
        print(f"wrote {figure}")
    return EXIT_OK


def cmd_spectrogram(args) -> int:
    cfg = _resolve_config(args)
    spg = spectrogram(
        cfg.cavity, cfg.squeezer, cfg.readout, cfg.grid, cfg.angles,
        threads=_thread_count(),
    )
    metadata = {"scenario": cfg.scenario, "spacing": cfg.grid.spacing}
    io.write_spectrogram_csv(args.out, spg, metadata)
    print(f"wrote {args.out}")
    if not args.no_plot:
        figure = _plot_path(args.out)
        plots.save_spectrogram_plot(figure, spg, title=f"scenario {cfg.scenario}")
        print(f"wrote {figure}")
    return EXIT_OK


def cmd_map(args) -> int:
    cfg = _resolve_config(args)
    ifo = cfg.require_interferometer()
    spg = interferometer_noise_map(
        ifo, cfg.squeezer, cfg.readout.efficiency, cfg.grid, cfg.angles, cfg.map_mode
    )
    metadata = {
        "scenario": cfg.scenario,
        "spacing": cfg.grid.spacing,
        "map_mode": cfg.map_mode,
    }
    io.write_spectrogram_csv(args.out, spg, metadata)
    print(f"wrote {args.out}")
    if not args.no_plot:
        figure = _plot_path(args.out)
        plots.save_spectrogram_plot(
            figure, spg,
            title=f"scenario {cfg.scenario} ({cfg.map_mode})",
            label="change vs unsqueezed [dB]",
        )
        print(f"wrote {figure}")
    return EXIT_OK


def _load_fit_config(path):
    import json

    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise DataFormatError(f"cannot read fit config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"fit config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: fit config root must be an object")
    known = {"cavity", "squeezer", "readout", "free"}
    for key in data:
        if key not in known:
            raise ValidationError(f"{path}: unknown fit config key {key!r}")

    def section(name, required_keys, defaults=None):
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ValidationError(f"{path}: section {name!r} must be an object")
        merged = dict(defaults or {})
        for key, value in raw.items():
            if key not in required_keys:
                raise ValidationError(f"{path}: unknown fit config key {name!r}.{key!r}")
            merged[key] = value
        return merged

    cav = section(
        "cavity",
        {"halfwidth_rad_s", "detuning_signal_rad_s", "detuning_idler_rad_s"},
    )
    try:
        cavity = FilterCavityParams(**cav)
    except TypeError as exc:
        raise ValidationError(f"{path}: cavity section incomplete: {exc}") from exc
    sq = section("squeezer", {"squeeze_factor", "injection_angle_rad"},
                 {"injection_angle_rad": 0.0})
    try:
        squeezer = SqueezerParams(**sq)
    except TypeError as exc:
        raise ValidationError(f"{path}: squeezer section incomplete: {exc}") from exc
    rd = section(
        "readout",
        {"efficiency", "lo_power_signal", "lo_power_idler"},
        {"lo_power_signal": 1.0, "lo_power_idler": 1.0},
    )
    try:
        readout = ReadoutParams(readout_angle_rad=0.5 * math.pi, **rd)
    except TypeError as exc:
        raise ValidationError(f"{path}: readout section incomplete: {exc}") from exc

    raw_free = data.get("free")
    if not isinstance(raw_free, dict) or not raw_free:
        raise ValidationError(f"{path}: fit config needs a non-empty 'free' section")
    free, initial = {}, {}
    for name, spec in raw_free.items():
        if not isinstance(spec, dict) or not {"min", "max", "init"} <= set(spec):
            raise ValidationError(
                f"{path}: free parameter {name!r} needs 'min', 'max' and 'init'"
            )
        extra = set(spec) - {"min", "max", "init"}
        if extra:
            raise ValidationError(
                f"{path}: unknown key {extra.pop()!r} in free parameter {name!r}"
            )
        free[name] = (float(spec["min"]), float(spec["max"]))
        initial[name] = float(spec["init"])
    return cavity, squeezer, readout, free, initial


def cmd_fit(args) -> int:
    data_dir = Path(args.data_dir)
    if not data_dir.is_dir():
        raise DataFormatError(f"data directory {data_dir} does not exist")
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise DataFormatError(f"data directory {data_dir} contains no trace CSV files")
    traces, problems = [], []
    for file in files:
        try:
            traces.append(io.read_trace_csv(file))
        except DataFormatError as exc:
            problems.append(str(exc))
    if problems:
        raise DataFormatError("unreadable trace files:\n  " + "\n  ".join(problems))

    cavity, squeezer, readout, free, initial = _load_fit_config(args.config)
    problem = FitProblem(
        traces=tuple(traces),
        cavity=cavity,
        squeezer=squeezer,
        readout=readout,
        free=free,
        initial=initial,
    )
    result = run_fit_problem(problem)

    out = Path(args.out)
    payload = result.to_dict()
    residual_paths = []
    for trace, res in zip(problem.traces, result.per_trace_residuals):
        res_path = out.with_name(f"{out.stem}_residuals_{trace.label}.csv")
        io.write_residuals_csv(res_path, trace.frequencies_hz, res)
        residual_paths.append(str(res_path))
    payload["per_trace_residual_paths"] = residual_paths
    payload["trace_files"] = [str(f) for f in files]
    io.write_json(out, payload)
    print(f"wrote {out}")
    if not result.converged:
        print("warning: fit did not converge within the evaluation cap", file=sys.stderr)
    if not args.no_plot:
        fitted_db = [
            trace.noise_db + res
            for trace, res in zip(problem.traces, result.per_trace_residuals)
        ]
        figure = _plot_path(out)
        plots.save_fit_plot(figure, problem.traces, fitted_db, title="joint fit")
        print(f"wrote {figure}")
    return EXIT_OK


def cmd_epr(args) -> int:
    if args.r < 0:
        raise ValidationError(f"squeeze factor must be >= 0, got {args.r}")
    if not (0.0 <= args.eta <= 1.0):
        raise ValidationError(f"efficiency must lie in [0, 1], got {args.eta}")
    report = conditioning_report(args.r, args.eta)
    io.write_json(args.out, report)
    print(f"wrote {args.out}")
    if not args.no_plot:
        figure = _plot_path(args.out)
        plots.save_epr_plot(
            figure, args.r, args.eta,
            title=f"conditioning at r={args.r}, eta={args.eta}",
        )
        print(f"wrote {figure}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprsqueeze",
        description="Quantum-noise spectra of cavity-filtered entangled sidebands: "
        "simulation, spectrograms, improvement maps and joint spectrum fits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_flags(p, angles=False):
        p.add_argument("--preset", help="named scenario (fig3a, fig3b, fig4, fig1-fi, fig1-fd)")
        p.add_argument("--config", help="JSON scenario config")
        p.add_argument("--grid", help="override grid: min_hz:max_hz:points:lin|log")
        if angles:
            p.add_argument("--angles", type=int, help="readout angles in the sweep")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--no-plot", action="store_true", help="skip the rendered figure")

    p = sub.add_parser("spectrum", help="noise spectrum at the configured readout angle")
    add_scenario_flags(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("spectrogram", help="noise map over a full readout-angle sweep")
    add_scenario_flags(p, angles=True)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("map", help="interferometer improvement map over (frequency, angle)")
    add_scenario_flags(p, angles=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("fit", help="joint fit of measured traces")
    p.add_argument("data_dir", help="directory of trace CSV files")
    p.add_argument("--config", required=True, help="fit config JSON (model base, free parameters)")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--no-plot", action="store_true", help="skip the rendered figure")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("epr", help="conditional-squeezing report for an entangled pair")
    p.add_argument("r", type=float, help="squeeze factor")
    p.add_argument("eta", type=float, help="detection efficiency in [0, 1]")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--no-plot", action="store_true", help="skip the rendered figure")
    p.set_defaults(func=cmd_epr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error (validation): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SingularityError, DegenerateStateError, FloatingPointError, ArithmeticError) as exc:
        print(f"error (numerics): {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except (DataFormatError, OSError) as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
