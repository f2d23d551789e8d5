"""Single-trajectory evolution of the density matrix.

Between collision events the state evolves exactly with the spectral
propagator; at each event the colliding site's dephasing channel is
applied.  Observables are recorded on a fixed sampling grid, and a
boundary-magnetization stop time guards against finite-size effects.

A collision is the non-selective sigma^z measurement of the collided site:
ancilla in, full-strength dephasing interaction, ancilla traced out.  The
reduced channel is rho -> (rho + Z_i rho Z_i)/2, which zeroes every
coherence between configurations that differ in the occupation of site i
and leaves the diagonal untouched.  It is idempotent (a second collision
on a site whose coherences are already gone does nothing), which is what
makes temporally bunched collisions less effective than evenly spread
ones.  ``apply_collision`` implements the reduced form; the brute-force
ancilla trace lives in the test suite as an independent oracle.

Internally the trajectory loop keeps the state in the Hamiltonian
eigenbasis, where propagation is an elementwise phase multiplication and
the measurement channel is a low-rank projector update (rank = number of
sector states occupying the collided site).  This is a plain similarity
transform of the site-basis procedure and is checked against it in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SectorBasis, occupied_indices, sigma_z_diagonal, sigma_z_matrix
from .model import SpectralHamiltonian
from .noise import NoiseConfig, init_schedule, pop_next
from .observables import ObservableRecord, spread_width

# per-sample abort threshold; the spot-check cadence for the O(d^3) checks
TRACE_ABORT = 1e-8
SPOT_CHECK_STRIDE = 50


@dataclass(frozen=True)
class TrajectoryConfig:
    """Sampling grid, horizon and initial configuration of one trajectory."""

    initial_sites: tuple[int, ...]
    t_final: float
    sample_dt: float = 0.02
    boundary_epsilon: float = 1e-3

    def __post_init__(self) -> None:
        if self.sample_dt <= 0:
            raise ValueError(f"sample_dt must be > 0, got {self.sample_dt}")
        if self.t_final <= 0:
            raise ValueError(f"t_final must be > 0, got {self.t_final}")
        if self.boundary_epsilon <= 0:
            raise ValueError(
                f"boundary_epsilon must be > 0, got {self.boundary_epsilon}"
            )
        if len(set(self.initial_sites)) != len(self.initial_sites):
            raise ValueError(f"initial_sites must be distinct, got {self.initial_sites}")


@dataclass(frozen=True)
class ConservationReport:
    """Worst-case invariant violations observed along one trajectory."""

    max_trace_error: float
    max_hermiticity_error: float
    min_eigenvalue: float
    max_magnetization_drift: float


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    record: ObservableRecord
    stop_time: float
    conservation: ConservationReport


def sample_times(config: TrajectoryConfig) -> np.ndarray:
    """Observable grid: every multiple of sample_dt from 0 up to t_final."""
    n_steps = int(math.floor(config.t_final / config.sample_dt + 1e-9))
    return np.arange(n_steps + 1) * config.sample_dt


def initial_state(basis: SectorBasis, sites) -> np.ndarray:
    """Pure product state with excitations exactly on ``sites``, spins down elsewhere."""
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise ValueError(f"initial sites must be distinct, got {sites}")
    if len(sites) != basis.n_excitations:
        raise ValueError(
            f"{len(sites)} initial sites inconsistent with q={basis.n_excitations}"
        )
    for s in sites:
        if not 0 <= s < basis.n_sites:
            raise ValueError(f"site {s} out of range for {basis.n_sites} sites")
    mask = sum(1 << s for s in sites)
    k = basis.index_of[mask]
    rho = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    rho[k, k] = 1.0
    return rho


def apply_collision(basis: SectorBasis, rho: np.ndarray, site: int) -> np.ndarray:
    """Dephasing collision at ``site``: rho -> (rho + Z_i rho Z_i)/2.

    Elementwise this multiplies entry (k, l) by (1 + z_k z_l)/2, i.e. it
    kills the coherences between states of opposite site-``site`` occupation
    and preserves everything else.
    """
    z = sigma_z_diagonal(basis, site)
    if rho.shape != (basis.dimension, basis.dimension):
        raise ValueError(
            f"state shape {rho.shape} does not match sector dim {basis.dimension}"
        )
    return rho * (0.5 * (1.0 + np.outer(z, z)))


def boundary_stop_time(record: ObservableRecord, epsilon: float = 1e-3) -> float:
    """First grid time at which either edge magnetization leaves -1 by more
    than ``epsilon``; the last grid time if that never happens."""
    edges = np.maximum(
        np.abs(record.magnetization[:, 0] + 1.0),
        np.abs(record.magnetization[:, -1] + 1.0),
    )
    hit = np.flatnonzero(edges > epsilon)
    if hit.size == 0:
        return float(record.times[-1])
    return float(record.times[hit[0]])


def _collision_rows(H: SpectralHamiltonian) -> list[np.ndarray]:
    """Eigenbasis rows of the occupation projector for each site.

    Z_i = +-(1 - 2P) with P projecting on the smaller of the occupied/empty
    state classes; the sign cancels in the conjugation, so rank stays
    <= d/2 (rank d*q/N for q <= N/2).
    """
    basis = H.basis
    d = basis.dimension
    rows = []
    for i in range(basis.n_sites):
        occ = occupied_indices(basis, i)
        if 2 * len(occ) > d:
            occ = np.setdiff1d(np.arange(d), occ, assume_unique=True)
        rows.append(np.ascontiguousarray(H.eigenvectors[occ, :]))
    return rows


def _phase_evolve(rho_e: np.ndarray, eigenvalues: np.ndarray, duration: float) -> None:
    if duration == 0.0:
        return
    p = np.exp(-1j * eigenvalues * duration)
    rho_e *= p[:, None]
    rho_e *= p.conj()[None, :]


def _collide(rho_e: np.ndarray, U: np.ndarray) -> None:
    # (rho + Z rho Z)/2 = rho - P rho - rho P + 2 P rho P  with P = U^T U
    # (U: (r, d) rows).  rho P is formed explicitly rather than as
    # (P rho)^dagger: the update is then exact for any matrix, so
    # anti-Hermitian roundoff is carried along instead of amplified.
    B = U @ rho_e
    Bt = rho_e @ U.T
    C = B @ U.T
    rho_e -= U.T @ B
    rho_e -= Bt @ U
    rho_e += 2.0 * (U.T @ (C @ U))


def run_trajectory(
    H: SpectralHamiltonian,
    noise: NoiseConfig,
    config: TrajectoryConfig,
    seed,
    state_sum: np.ndarray | None = None,
) -> TrajectoryResult:
    """Evolve one stochastic realization and record observables on the grid.

    Collisions that land exactly on a grid point are applied before the
    sample is recorded.  If ``state_sum`` is given (shape (T, d, d)), the
    site-basis density matrix at every grid point is accumulated into it,
    which lets an ensemble form the trajectory-averaged state.
    """
    basis = H.basis
    N, d, q = basis.n_sites, basis.dimension, basis.n_excitations
    if noise.n_sites != N:
        raise ValueError(
            f"noise config has {noise.n_sites} sites, Hamiltonian has {N}"
        )
    times = sample_times(config)
    n_samples = len(times)
    V, lam = H.eigenvectors, H.eigenvalues

    rho_e = V.T @ initial_state(basis, config.initial_sites) @ V
    rho_e = np.ascontiguousarray(rho_e, dtype=complex)
    rows = _collision_rows(H)
    zmat = sigma_z_matrix(basis)
    schedule = init_schedule(noise, seed)

    magnetization = np.empty((n_samples, N))
    ier_series = np.empty(n_samples)
    width_series = np.empty(n_samples)
    target_total = float(2 * q - N)

    max_trace_err = 0.0
    max_herm_err = 0.0
    min_eig = math.inf
    max_mag_drift = 0.0

    def record_sample(g: int) -> None:
        nonlocal max_trace_err, max_herm_err, min_eig, max_mag_drift
        W = V @ rho_e
        diag = np.einsum("ik,ik->i", W, V).real
        if state_sum is not None:
            state_sum[g] += W @ V.T
        mag = zmat @ diag
        magnetization[g] = mag
        ier_series[g] = np.sum(diag**2)
        width_series[g] = spread_width(mag)
        trace_err = abs(np.trace(rho_e).real - 1.0)
        max_trace_err = max(max_trace_err, trace_err)
        max_mag_drift = max(max_mag_drift, abs(mag.sum() - target_total))
        if trace_err > TRACE_ABORT:
            raise RuntimeError(
                f"trace drift {trace_err:.3e} exceeds {TRACE_ABORT:.0e} "
                f"at t={times[g]:.4f} (seed={seed!r})"
            )
        if g % SPOT_CHECK_STRIDE == 0:
            # hermiticity and spectrum are invariant under the eigenbasis transform
            herm = float(np.abs(rho_e - rho_e.conj().T).max())
            max_herm_err = max(max_herm_err, herm)
            min_eig = min(min_eig, float(np.linalg.eigvalsh(rho_e)[0]))

    record_sample(0)
    t = 0.0
    for g in range(1, n_samples):
        t_grid = float(times[g])
        while True:
            t_next = float(schedule.next_time.min())
            if t_next > t_grid:
                break
            site, t_event = pop_next(schedule, noise)
            _phase_evolve(rho_e, lam, t_event - t)
            _collide(rho_e, rows[site])
            t = t_event
        _phase_evolve(rho_e, lam, t_grid - t)
        t = t_grid
        record_sample(g)

    record = ObservableRecord(
        times=times,
        magnetization=magnetization,
        ier=ier_series,
        width=width_series,
        ipr=ier_series.copy() if q == 1 else None,
    )
    return TrajectoryResult(
        record=record,
        stop_time=boundary_stop_time(record, config.boundary_epsilon),
        conservation=ConservationReport(
            max_trace_error=max_trace_err,
            max_hermiticity_error=max_herm_err,
            min_eigenvalue=min_eig,
            max_magnetization_drift=max_mag_drift,
        ),
    )
