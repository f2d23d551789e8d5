"""Static SVG figures: magnetization heatmaps, observable series with error
bars, sweep summaries, and difference spectra."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_heatmap(times, magnetization, path, title: str | None = None) -> Path:
    """Space-time map of <sigma_i^z> with the color scale fixed to [-1, 1]."""
    path = Path(path)
    n_sites = magnetization.shape[1]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    im = ax.imshow(
        magnetization.T,
        aspect="auto",
        origin="lower",
        extent=(times[0], times[-1], -0.5, n_sites - 0.5),
        vmin=-1.0,
        vmax=1.0,
        cmap="RdBu_r",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label=r"$\langle\sigma_i^z\rangle$")
    ax.set_xlabel(r"$tJ$")
    ax.set_ylabel("site")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def save_series(times, curves, path, ylabel: str, title: str | None = None) -> Path:
    """Observable-vs-time lines; ``curves`` is a list of (label, mean, se)."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    stride = max(1, len(times) // 40)
    for label, mean, se in curves:
        (line,) = ax.plot(times, mean, label=label, lw=1.0)
        if se is not None:
            ax.errorbar(
                times[::stride],
                mean[::stride],
                yerr=se[::stride],
                fmt="none",
                ecolor=line.get_color(),
                elinewidth=0.8,
                capsize=2,
            )
    ax.set_xlabel(r"$tJ$")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def save_summary(rows, path, ylabel: str, title: str | None = None) -> Path:
    """Readout value vs collision rate, one line per shape parameter.

    ``rows`` is a list of (nu, rc, value, se).
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    nus = sorted({r[0] for r in rows})
    for nu in nus:
        pts = sorted((rc, v, se) for n, rc, v, se in rows if n == nu)
        rcs = [p[0] for p in pts]
        vals = [p[1] for p in pts]
        ses = [p[2] for p in pts]
        ax.errorbar(rcs, vals, yerr=ses, marker="o", ms=4, capsize=2, label=f"$\\nu={nu:g}$")
    ax.set_xscale("log")
    ax.set_xlabel(r"$r_c$")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def save_spectrum(frequencies, spectra, path, mark: float | None = None, title: str | None = None) -> Path:
    """Amplitude spectra; ``spectra`` is a list of (label, amplitudes).

    ``mark`` draws a vertical guide (e.g. at the collision rate).
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for label, amps in spectra:
        ax.plot(frequencies, amps, lw=1.0, label=label)
    if mark is not None:
        ax.axvline(mark, color="k", ls="--", lw=0.8)
    ax.set_xlabel("frequency (cycles per unit time)")
    ax.set_ylabel("amplitude")
    if title:
        ax.set_title(title)
    if len(spectra) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
