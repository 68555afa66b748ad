"""Delimited-file emission and ingestion.

All files are comma-separated with '.' decimal points and no locale
dependence; floats are written with shortest round-trip precision so a
re-parse reproduces the exact values. Metadata rides on '#'-prefixed
lines of the form ``# key=value``. Writes go through a temporary file in
the target directory followed by an atomic rename.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataFormatError, ValidationError
from .fitting import MeasuredTrace
from .params import TWO_PI, FrequencyGrid
from .spectra import NoiseSpectrum, Spectrogram


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path, text: str):
    """Write text to ``path`` via a temp file + rename in one directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        # mkstemp creates 0600; give the final file normal umask permissions.
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload: dict):
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def _read_lines(path):
    try:
        with open(path) as handle:
            return handle.read().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc


def _split_metadata(lines):
    """Split '# key=value' metadata from data lines; data lines keep their
    1-based file line number for diagnostics."""
    meta, body = {}, []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            entry = stripped.lstrip("#").strip()
            if "=" in entry:
                key, _, value = entry.partition("=")
                meta[key.strip()] = value.strip()
        else:
            body.append((lineno, stripped))
    return meta, body


# ---------------------------------------------------------------------------
# spectra

SPECTRUM_HEADER = "omega_rad_s,S,dB"


def write_spectrum_csv(path, spectrum: NoiseSpectrum, metadata: dict | None = None):
    lines = [f"# {key}={value}" for key, value in (metadata or {}).items()]
    lines.append(SPECTRUM_HEADER)
    db = spectrum.db
    for w, s, d in zip(spectrum.grid.omegas_rad_s, spectrum.values, db):
        lines.append(f"{_fmt(w)},{_fmt(s)},{_fmt(d)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_spectrum_csv(path):
    """Parse a spectrum CSV back into (NoiseSpectrum, metadata)."""
    meta, body = _split_metadata(_read_lines(path))
    if not body or body[0][1] != SPECTRUM_HEADER:
        raise DataFormatError(f"{path}: expected header {SPECTRUM_HEADER!r}")
    rows = []
    for lineno, line in body[1:]:
        parts = line.split(",")
        if len(parts) != 3:
            raise DataFormatError(f"{path}: malformed row {lineno}: {line!r}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DataFormatError(f"{path}: malformed row {lineno}: {exc}") from exc
    data = np.array(rows)
    if data.size == 0:
        raise DataFormatError(f"{path}: no data rows")
    grid = FrequencyGrid(data[:, 0], meta.get("spacing", "logarithmic"))
    return NoiseSpectrum(grid, data[:, 1]), meta


# ---------------------------------------------------------------------------
# spectrograms

SPECTROGRAM_CORNER = "omega_rad_s"


def write_spectrogram_csv(path, spg: Spectrogram, metadata: dict | None = None):
    """Matrix layout: first row readout angles [rad], first column
    omega [rad/s], cells in dB."""
    lines = [f"# {key}={value}" for key, value in (metadata or {}).items()]
    lines.append(",".join([SPECTROGRAM_CORNER] + [_fmt(z) for z in spg.angles_rad]))
    for i, w in enumerate(spg.grid.omegas_rad_s):
        lines.append(",".join([_fmt(w)] + [_fmt(v) for v in spg.values_db[i]]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_spectrogram_csv(path):
    meta, body = _split_metadata(_read_lines(path))
    if not body or not body[0][1].startswith(SPECTROGRAM_CORNER + ","):
        raise DataFormatError(f"{path}: expected a {SPECTROGRAM_CORNER!r} matrix header")
    try:
        angles = np.array([float(p) for p in body[0][1].split(",")[1:]])
        rows = [[float(p) for p in line.split(",")] for _, line in body[1:]]
    except ValueError as exc:
        raise DataFormatError(f"{path}: malformed matrix: {exc}") from exc
    data = np.array(rows)
    if data.size == 0:
        raise DataFormatError(f"{path}: no data rows")
    grid = FrequencyGrid(data[:, 0], meta.get("spacing", "logarithmic"))
    return Spectrogram(grid, angles, data[:, 1:]), meta


# ---------------------------------------------------------------------------
# measured traces

TRACE_HEADER = "frequency_hz,noise_db"


def write_trace_csv(path, trace: MeasuredTrace):
    lines = [f"# zeta_rad={_fmt(trace.zeta_rad)}", f"# label={trace.label}"]
    if trace.weight != 1.0:
        lines.append(f"# weight={_fmt(trace.weight)}")
    lines.append(TRACE_HEADER)
    for f, n in zip(trace.frequencies_hz, trace.noise_db):
        lines.append(f"{_fmt(f)},{_fmt(n)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace_csv(path) -> MeasuredTrace:
    """Parse a measured trace.

    Accepts the native ``frequency_hz,noise_db`` layout and, for
    round-tripping model output, the spectrum layout
    ``omega_rad_s,S,dB``. The readout angle must be present as a
    ``# zeta_rad=<value>`` metadata line.
    """
    meta, body = _split_metadata(_read_lines(path))
    if "zeta_rad" not in meta:
        raise DataFormatError(f"{path}: missing '# zeta_rad=<value>' metadata line")
    try:
        zeta = float(meta["zeta_rad"])
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad zeta_rad: {exc}") from exc
    if not body:
        raise DataFormatError(f"{path}: empty trace file")
    header = body[0][1]
    if header == TRACE_HEADER:
        freq_col, db_col, ncol, scale = 0, 1, 2, 1.0
    elif header == SPECTRUM_HEADER:
        freq_col, db_col, ncol, scale = 0, 2, 3, 1.0 / TWO_PI
    else:
        raise DataFormatError(
            f"{path}: expected header {TRACE_HEADER!r} or {SPECTRUM_HEADER!r}, "
            f"got {header!r}"
        )
    freqs, noise, linenos = [], [], []
    for lineno, line in body[1:]:
        parts = line.split(",")
        if len(parts) != ncol:
            raise DataFormatError(f"{path}: malformed row {lineno}: {line!r}")
        try:
            freqs.append(float(parts[freq_col]) * scale)
            noise.append(float(parts[db_col]))
        except ValueError as exc:
            raise DataFormatError(f"{path}: malformed row {lineno}: {exc}") from exc
        linenos.append(lineno)
    if not freqs:
        raise DataFormatError(f"{path}: no data rows")
    steps = np.diff(freqs)
    if np.any(steps <= 0):
        row = linenos[int(np.argmax(steps <= 0)) + 1]
        raise DataFormatError(
            f"{path}: frequencies not strictly increasing at row {row}"
        )
    weight = float(meta.get("weight", 1.0))
    if not (math.isfinite(weight) and weight > 0):
        raise DataFormatError(f"{path}: weight must be finite and > 0")
    label = meta.get("label", Path(path).stem)
    try:
        return MeasuredTrace(
            label=label,
            zeta_rad=zeta,
            frequencies_hz=np.array(freqs),
            noise_db=np.array(noise),
            weight=weight,
            source=str(path),
        )
    except ValidationError as exc:
        raise DataFormatError(str(exc)) from exc


def write_residuals_csv(path, frequencies_hz, residual_db):
    lines = ["frequency_hz,residual_db"]
    for f, rdb in zip(frequencies_hz, residual_db):
        lines.append(f"{_fmt(f)},{_fmt(rdb)}")
    atomic_write_text(path, "\n".join(lines) + "\n")
