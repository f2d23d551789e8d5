"""Trajectory ensembles: deterministic parallel execution and aggregation.

Per-trajectory random streams are derived from (master seed, trajectory
index), tasks are cut into fixed-size chunks, and every reduction runs in
trajectory/chunk order, so the aggregated result is bit-identical for any
worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import TrajectoryConfig, TrajectoryResult, run_trajectory, sample_times
from .model import SpectralHamiltonian
from .noise import NoiseConfig, trajectory_seed

# fixed chunk size keeps partial-sum groupings independent of the worker count
CHUNK = 16


@dataclass(frozen=True)
class EnsembleConfig:
    n_trajectories: int
    master_seed: int
    workers: int | None = None  # None -> os.cpu_count()

    def __post_init__(self) -> None:
        if self.n_trajectories < 1:
            raise ValueError(
                f"n_trajectories must be >= 1, got {self.n_trajectories}"
            )
        if self.workers is not None and self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(eq=False)
class EnsembleSeries:
    """Trajectory-averaged observable series with standard errors."""

    times: np.ndarray
    mean: dict[str, np.ndarray]
    std_error: dict[str, np.ndarray]
    effective_t_final: float  # minimum boundary stop time across trajectories
    n_trajectories: int
    metadata: dict = field(default_factory=dict)
    average_state: np.ndarray | None = None  # (T, d, d) when requested


@dataclass(frozen=True)
class RunComparison:
    observable: str
    time: float
    mean_a: float
    mean_b: float
    difference: float
    combined_se: float
    significant: bool  # |difference| > 3 * combined_se


def _limit_blas_threads():
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:  # pragma: no cover
        import contextlib

        return contextlib.nullcontext()


def _run_chunk(payload):
    H, noise, config, master_seed, lo, hi, keep_states = payload
    state_sum = None
    if keep_states:
        d = H.dimension
        state_sum = np.zeros((len(sample_times(config)), d, d), dtype=complex)
    results = []
    with _limit_blas_threads():
        for idx in range(lo, hi):
            results.append(
                run_trajectory(
                    H, noise, config, trajectory_seed(master_seed, idx), state_sum
                )
            )
    return results, state_sum


def collect_records(
    H: SpectralHamiltonian,
    noise: NoiseConfig,
    traj_config: TrajectoryConfig,
    ens_config: EnsembleConfig,
    keep_average_state: bool = False,
) -> tuple[list[TrajectoryResult], np.ndarray | None]:
    """Run all trajectories, ordered by index; optionally accumulate the mean state."""
    M = ens_config.n_trajectories
    payloads = [
        (H, noise, traj_config, ens_config.master_seed, lo, min(lo + CHUNK, M), keep_average_state)
        for lo in range(0, M, CHUNK)
    ]
    workers = ens_config.workers or os.cpu_count() or 1
    workers = min(workers, len(payloads))

    if workers == 1:
        chunk_outputs = [_run_chunk(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk_outputs = list(pool.map(_run_chunk, payloads))

    results: list[TrajectoryResult] = []
    for chunk_results, _ in chunk_outputs:
        results.extend(chunk_results)
    average_state = None
    if keep_average_state:
        average_state = chunk_outputs[0][1].copy()
        for _, state_sum in chunk_outputs[1:]:
            average_state += state_sum
        average_state /= M
    return results, average_state


def aggregate(
    results: list[TrajectoryResult], average_state: np.ndarray | None = None
) -> EnsembleSeries:
    """Reduce per-trajectory records to means and standard errors (fixed order)."""
    if not results:
        raise ValueError("no trajectory results to aggregate")
    M = len(results)
    times = results[0].record.times

    stacks = {
        "magnetization": np.stack([r.record.magnetization for r in results]),
        "ier": np.stack([r.record.ier for r in results]),
        "width": np.stack([r.record.width for r in results]),
    }
    if results[0].record.ipr is not None:
        stacks["ipr"] = np.stack([r.record.ipr for r in results])

    # centered reduction: deviations from trajectory 0 keep identical
    # trajectories bit-exact (mean == the trajectory, SE == 0) and lose no
    # precision for scattered ones
    mean = {}
    std_error = {}
    for k, v in stacks.items():
        dev = v - v[0]
        mean[k] = v[0] + dev.mean(axis=0)
        if M > 1:
            std_error[k] = dev.std(axis=0, ddof=1) / math.sqrt(M)
        else:
            std_error[k] = np.zeros_like(mean[k])

    conservation = {
        "max_trace_error": max(r.conservation.max_trace_error for r in results),
        "max_hermiticity_error": max(
            r.conservation.max_hermiticity_error for r in results
        ),
        "min_eigenvalue": min(r.conservation.min_eigenvalue for r in results),
        "max_magnetization_drift": max(
            r.conservation.max_magnetization_drift for r in results
        ),
    }
    return EnsembleSeries(
        times=times,
        mean=mean,
        std_error=std_error,
        effective_t_final=min(r.stop_time for r in results),
        n_trajectories=M,
        metadata={"conservation": conservation},
        average_state=average_state,
    )


def run_ensemble(
    H: SpectralHamiltonian,
    noise: NoiseConfig,
    traj_config: TrajectoryConfig,
    ens_config: EnsembleConfig,
    keep_average_state: bool = False,
) -> EnsembleSeries:
    """Run M trajectories with seeds (master_seed, index) and aggregate them."""
    t0 = time.perf_counter()
    results, average_state = collect_records(
        H, noise, traj_config, ens_config, keep_average_state
    )
    series = aggregate(results, average_state)
    series.metadata.update(
        {
            "n_trajectories": ens_config.n_trajectories,
            "master_seed": ens_config.master_seed,
            "workers": ens_config.workers,
            "sample_dt": traj_config.sample_dt,
            "t_final": traj_config.t_final,
            "boundary_epsilon": traj_config.boundary_epsilon,
            "initial_sites": list(traj_config.initial_sites),
            "wall_time_s": time.perf_counter() - t0,
            "code_version": _code_version(),
        }
    )
    return series


def _series_at(series: EnsembleSeries, observable: str, time_point: float, site: int | None):
    if observable == "magnetization":
        if site is None:
            raise ValueError("magnetization comparison needs a site index")
        mean = series.mean["magnetization"][:, site]
        se = series.std_error["magnetization"][:, site]
    else:
        if observable not in series.mean:
            raise ValueError(f"observable {observable!r} not present in series")
        mean = series.mean[observable]
        se = series.std_error[observable]
    idx = int(np.argmin(np.abs(series.times - time_point)))
    return float(mean[idx]), float(se[idx]), float(series.times[idx])


def compare_runs(
    a: EnsembleSeries,
    b: EnsembleSeries,
    observable: str,
    time_point: float,
    site: int | None = None,
) -> RunComparison:
    """Mean difference of one observable at a grid time, with 3-SE significance."""
    if len(a.times) != len(b.times) or not np.array_equal(a.times, b.times):
        raise ValueError("ensemble series are not on the same sampling grid")
    mean_a, se_a, t_used = _series_at(a, observable, time_point, site)
    mean_b, se_b, _ = _series_at(b, observable, time_point, site)
    difference = mean_a - mean_b
    combined_se = math.hypot(se_a, se_b)
    return RunComparison(
        observable=observable,
        time=t_used,
        mean_a=mean_a,
        mean_b=mean_b,
        difference=difference,
        combined_se=combined_se,
        significant=abs(difference) > 3.0 * combined_se,
    )


def _code_version() -> str:
    from xxzsim import __version__

    return __version__
