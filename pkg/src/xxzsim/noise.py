"""Weibull-renewal collision noise: interval sampling and the per-site event queue.

Each site carries an independent renewal process whose inter-collision
times are Weibull distributed.  The shape parameter controls temporal
heterogeneity (shape=1 is Poisson, shape>>1 near-periodic) and the scale
sets the mean interval; runs are usually specified by (shape, rate) pairs
with rate = 1/(scale * Gamma(1 + 1/shape)).

Each site's renewal process starts at t=0 with a fresh draw, so in the
near-periodic regime (large shape) the first collisions of all sites line
up: collisions arrive in chain-wide waves whose rate imprints coherent
modulations on ensemble-averaged observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class WeibullParams:
    """Weibull inter-collision time distribution (shape nu, scale mu)."""

    shape: float
    scale: float

    def __post_init__(self) -> None:
        # the density requires shape > 0 even though shape >= 0 is sometimes quoted
        if not (math.isfinite(self.shape) and self.shape > 0):
            raise ValueError(f"shape must be > 0, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class NoiseConfig:
    """Per-site Weibull parameters; disabled noise never fires a collision."""

    per_site: tuple[WeibullParams, ...]
    enabled: bool = True

    def __post_init__(self) -> None:
        if len(self.per_site) == 0:
            raise ValueError("per_site must not be empty")

    @property
    def n_sites(self) -> int:
        return len(self.per_site)

    @classmethod
    def uniform(cls, n_sites: int, shape: float, rate: float) -> "NoiseConfig":
        """Identical (shape, rate) on every site."""
        return cls(per_site=(params_for_rate(shape, rate),) * n_sites)

    @classmethod
    def disabled(cls, n_sites: int) -> "NoiseConfig":
        return cls(per_site=(WeibullParams(1.0, 1.0),) * n_sites, enabled=False)


@dataclass
class CollisionSchedule:
    """Live event queue: next absolute collision time of each site."""

    next_time: np.ndarray  # (n_sites,) absolute times
    rng: np.random.Generator


def interval_from_uniform(params: WeibullParams, u: float) -> float:
    """Inverse CDF: map u in (0, 1] to an inter-collision time."""
    return params.scale * (-math.log(u)) ** (1.0 / params.shape)


def sample_interval(params: WeibullParams, rng: np.random.Generator) -> float:
    """Draw one Weibull inter-collision time (strictly positive)."""
    r = rng.random()
    while r == 0.0:  # u=1 would give a zero interval
        r = rng.random()
    return interval_from_uniform(params, 1.0 - r)


def collision_rate(params: WeibullParams) -> float:
    """Mean collision rate 1/(scale * Gamma(1 + 1/shape))."""
    return 1.0 / (params.scale * math.gamma(1.0 + 1.0 / params.shape))


def params_for_rate(shape: float, target_rate: float) -> WeibullParams:
    """Solve for the scale that realizes ``target_rate`` at the given shape."""
    if not (math.isfinite(shape) and shape > 0):
        raise ValueError(f"shape must be > 0, got {shape}")
    if not (math.isfinite(target_rate) and target_rate > 0):
        raise ValueError(f"target_rate must be > 0, got {target_rate}")
    return WeibullParams(shape=shape, scale=1.0 / (target_rate * math.gamma(1.0 + 1.0 / shape)))


def trajectory_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Independent per-trajectory stream: (master seed, trajectory index).

    Streams are derived by spawn key, so an ensemble is reproducible and
    independent of how trajectories are distributed across workers.
    """
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def init_schedule(config: NoiseConfig, seed) -> CollisionSchedule:
    """Draw the first collision time of every site (fresh draws at t=0)."""
    rng = np.random.default_rng(seed)
    if not config.enabled:
        next_time = np.full(config.n_sites, np.inf)
    else:
        next_time = np.array(
            [sample_interval(p, rng) for p in config.per_site], dtype=float
        )
    return CollisionSchedule(next_time=next_time, rng=rng)


def pop_next(schedule: CollisionSchedule, config: NoiseConfig) -> tuple[int, float]:
    """Extract the earliest pending collision and redraw that site's next time.

    Ties resolve to the lowest site index (np.argmin convention).
    """
    site = int(np.argmin(schedule.next_time))
    t = float(schedule.next_time[site])
    schedule.next_time[site] = t + sample_interval(config.per_site[site], schedule.rng)
    return site, t
