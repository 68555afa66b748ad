"""Figure rendering for the CLI report path.

Every CLI command that emits delimited output also renders a matplotlib
figure next to it (same stem, ``.png``). The CSV/JSON stays the
canonical machine-readable product; figures are for eyeballing runs.
Displayed dB values are clipped at the floor below, stored data never
is.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .epr import two_mode_squeezed_covariance, conditional_variance
from .spectra import NoiseSpectrum, Spectrogram

DB_DISPLAY_FLOOR = -60.0


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spectrum_plot(path, spectrum: NoiseSpectrum, title: str = ""):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogx(spectrum.grid.frequencies_hz, np.maximum(spectrum.db, DB_DISPLAY_FLOOR))
    ax.axhline(0.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("sideband frequency [Hz]")
    ax.set_ylabel("noise rel. vacuum [dB]")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_spectrogram_plot(path, spg: Spectrogram, title: str = "", label: str = "noise rel. vacuum [dB]"):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(
        spg.grid.frequencies_hz,
        spg.angles_rad,
        np.maximum(spg.values_db.T, DB_DISPLAY_FLOOR),
        shading="nearest",
        cmap="RdBu_r",
    )
    ax.set_xscale("log")
    ax.set_xlabel("sideband frequency [Hz]")
    ax.set_ylabel("readout angle [rad]")
    fig.colorbar(mesh, ax=ax, label=label)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_fit_plot(path, traces, fitted_db, title: str = ""):
    """Measured traces (light) against the fitted model (dark)."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (trace, model) in enumerate(zip(traces, fitted_db)):
        color = colors[i % len(colors)]
        ax.semilogx(trace.frequencies_hz, trace.noise_db, color=color, alpha=0.35, lw=1.0)
        ax.semilogx(
            trace.frequencies_hz, model, color=color, lw=1.8,
            label=f"{trace.label} (zeta={trace.zeta_rad:.3f} rad)",
        )
    ax.axhline(0.0, color="0.6", lw=0.8, ls="--")
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel("noise rel. vacuum [dB]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_epr_plot(path, squeeze_factor: float, efficiency: float, title: str = ""):
    """Conditional variance against the conditioning gain for both
    quadrature pairs."""
    state = two_mode_squeezed_covariance(squeeze_factor, efficiency)
    gains = np.linspace(-2.0, 2.0, 401)
    fig, ax = plt.subplots(figsize=(7, 4))
    for quad, style in (("amplitude", "-"), ("phase", "--")):
        var = [conditional_variance(state, quad, g) for g in gains]
        ax.plot(gains, var, style, label=quad)
    ax.axhline(1.0, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("conditioning gain g")
    ax.set_ylabel("conditional variance (vacuum = 1)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    _finish(fig, path)
