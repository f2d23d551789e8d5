"""Fixed-magnetization sector basis of a spin-1/2 chain.

The total z-magnetization commutes with the chain Hamiltonian, so the
dynamics never leave the subspace with a fixed number q of excitations
(up spins).  This module enumerates that subspace and provides the matrix
elements of the local operators needed to assemble Hamiltonians and
collision channels inside it.

Bit convention: bit i of a state bitmask (least significant bit = site 0)
is set iff site i carries an excitation.  States are ordered by ascending
bitmask value, which makes the q=1 sector index coincide with the site
index of the excitation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Ordered basis of the sector with ``n_excitations`` up spins."""

    n_sites: int
    n_excitations: int
    states: np.ndarray  # int64 bitmasks, ascending
    index_of: dict[int, int]  # bitmask -> sector index (exact inverse of states)

    @property
    def dimension(self) -> int:
        return len(self.states)


def build_sector(n_sites: int, n_excitations: int) -> SectorBasis:
    """Enumerate all ``n_sites``-bit states with exactly ``n_excitations`` bits set."""
    if n_sites < 2:
        raise ValueError(f"n_sites must be >= 2, got {n_sites}")
    if not 0 <= n_excitations <= n_sites:
        raise ValueError(
            f"n_excitations must be in [0, {n_sites}], got {n_excitations}"
        )
    masks = sorted(
        sum(1 << s for s in sites)
        for sites in combinations(range(n_sites), n_excitations)
    )
    states = np.asarray(masks, dtype=np.int64)
    return SectorBasis(
        n_sites=n_sites,
        n_excitations=n_excitations,
        states=states,
        index_of={m: k for k, m in enumerate(masks)},
    )


def _check_site(basis: SectorBasis, site: int) -> None:
    if not 0 <= site < basis.n_sites:
        raise IndexError(f"site {site} out of range for {basis.n_sites} sites")


def sigma_z_diagonal(basis: SectorBasis, site: int) -> np.ndarray:
    """Diagonal of the Pauli sigma^z operator at ``site``: +1 occupied, -1 empty."""
    _check_site(basis, site)
    return np.where((basis.states >> site) & 1 == 1, 1.0, -1.0)


def sigma_z_matrix(basis: SectorBasis) -> np.ndarray:
    """All sigma^z diagonals stacked as an (n_sites, dimension) array of +-1."""
    return np.stack([sigma_z_diagonal(basis, i) for i in range(basis.n_sites)])


def occupied_indices(basis: SectorBasis, site: int) -> np.ndarray:
    """Sector indices of the basis states in which ``site`` is occupied."""
    _check_site(basis, site)
    return np.flatnonzero((basis.states >> site) & 1 == 1)


def hop_elements(basis: SectorBasis, bond: tuple[int, int]) -> list[tuple[int, int]]:
    """Ordered index pairs coupled by the XX exchange on a nearest-neighbour bond.

    Returns every ordered pair (k, l), k != l, such that states k and l differ
    exactly by one excitation moved between the two bond sites.  Each pair
    carries matrix element 2 in Pauli convention.
    """
    i, j = bond
    if j != i + 1:
        raise ValueError(f"bond must be nearest-neighbour (i, i+1), got {bond}")
    if not 0 <= i < basis.n_sites - 1:
        raise IndexError(f"bond {bond} out of range for {basis.n_sites} sites")
    flip = (1 << i) | (1 << j)
    pairs: list[tuple[int, int]] = []
    for k, mask in enumerate(basis.states):
        # count the pair once, from the state with site i occupied and j empty
        if (mask >> i) & 1 == 1 and (mask >> j) & 1 == 0:
            l = basis.index_of[int(mask) ^ flip]
            pairs.append((k, l))
            pairs.append((l, k))
    return pairs
