"""Transport observables: magnetization profiles, IPR/IER, spreading width,
and the FFT differencing analysis of trajectory-averaged time series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SectorBasis, sigma_z_matrix


@dataclass(frozen=True, eq=False)
class ObservableRecord:
    """Per-trajectory observable time series on the sampling grid.

    ``ipr`` is present only in the single-excitation sector (it equals
    ``ier`` there and is undefined otherwise).
    """

    times: np.ndarray  # (T,)
    magnetization: np.ndarray  # (T, n_sites), <sigma_i^z>
    ier: np.ndarray  # (T,)
    width: np.ndarray  # (T,) occupation variance, site^2
    ipr: np.ndarray | None = None  # (T,) only when q == 1


def local_magnetization(basis: SectorBasis, rho: np.ndarray) -> np.ndarray:
    """Per-site <sigma_i^z> from the diagonal of the density matrix."""
    diag = np.diagonal(rho).real
    return sigma_z_matrix(basis) @ diag


def ipr(basis: SectorBasis, rho: np.ndarray) -> float:
    """Inverse participation ratio over single-excitation localized states.

    1 means the excitation sits on one site, 1/N means complete
    delocalization over the chain.
    """
    if basis.n_excitations != 1:
        raise ValueError(
            f"IPR is defined for the single-excitation sector, got q={basis.n_excitations}"
        )
    diag = np.diagonal(rho).real
    return float(np.sum(diag**2))


def ier(basis: SectorBasis, rho: np.ndarray) -> float:
    """Inverse ergodicity ratio: sum of squared diagonal weights over the sector basis.

    The squared form is what makes the bounds work out: 1 for a single basis
    configuration, 1/dim for an even spread over the sector (an unsquared
    diagonal sum would be the trace, identically 1).  Coincides with the IPR
    in the single-excitation sector.
    """
    diag = np.diagonal(rho).real
    return float(np.sum(diag**2))


def spread_width(magnetization: np.ndarray, sites: np.ndarray | None = None) -> float:
    """Variance of the excitation occupation distribution (site^2 units).

    Occupations are n_i = (<sigma_i^z> + 1)/2, normalized by their sum (the
    excitation number), so a single localized excitation has width 0 and
    ballistic spreading gives width growing like t^2.
    """
    magnetization = np.asarray(magnetization, dtype=float)
    if sites is None:
        sites = np.arange(len(magnetization))
    occupation = (magnetization + 1.0) / 2.0
    q = occupation.sum()
    if q <= 0:
        raise ValueError("occupation sums to zero; no excitations present")
    center = np.sum(occupation * sites) / q
    return float(np.sum(occupation * (sites - center) ** 2) / q)


def fft_difference_spectrum(
    series_a: np.ndarray,
    series_b: np.ndarray,
    grid_dt: float,
    angular: bool = False,
    window: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """One-sided amplitude spectrum of the difference of two time series.

    The mean of the difference is removed before transforming (DC removal).
    Frequencies are returned in cycles per unit time by default, so a
    modulation with period p peaks at 1/p; near-periodic collision noise at
    rate r therefore shows its main peak at frequency r.  Pass
    ``angular=True`` for a 2*pi-scaled axis.  ``window="hann"`` applies a
    Hann window for strongly damped signals; default is rectangular.
    """
    series_a = np.asarray(series_a, dtype=float)
    series_b = np.asarray(series_b, dtype=float)
    if series_a.shape != series_b.shape or series_a.ndim != 1:
        raise ValueError(
            f"series must be equal-length 1-d arrays, got {series_a.shape} and {series_b.shape}"
        )
    n = len(series_a)
    if n < 8:
        raise ValueError(f"need at least 8 samples, got {n}")
    if grid_dt <= 0:
        raise ValueError(f"grid_dt must be > 0, got {grid_dt}")

    diff = series_a - series_b
    diff = diff - diff.mean()
    if window == "hann":
        diff = diff * np.hanning(n)
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")

    amplitudes = np.abs(np.fft.rfft(diff)) * (2.0 / n)
    frequencies = np.fft.rfftfreq(n, d=grid_dt)
    if angular:
        frequencies = 2.0 * np.pi * frequencies
    return frequencies, amplitudes
