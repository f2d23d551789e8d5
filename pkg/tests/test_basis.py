import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzsim.basis import (
    build_sector,
    hop_elements,
    occupied_indices,
    sigma_z_diagonal,
    sigma_z_matrix,
)

sectors = st.integers(2, 10).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, n))
)


def test_dimensions():
    assert build_sector(41, 1).dimension == 41
    assert build_sector(20, 2).dimension == 190
    assert build_sector(2, 1).dimension == 2


def test_two_site_states():
    b = build_sector(2, 1)
    assert list(b.states) == [0b01, 0b10]


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_sector(3, 4)
    with pytest.raises(ValueError):
        build_sector(1, 0)
    with pytest.raises(ValueError):
        build_sector(5, -1)


def test_sigma_z_two_site():
    # states ascending: 0b01 (site 0 up), 0b10 (site 1 up)
    b = build_sector(2, 1)
    assert list(sigma_z_diagonal(b, 0)) == [1.0, -1.0]
    assert list(sigma_z_diagonal(b, 1)) == [-1.0, 1.0]


def test_sigma_z_saturated():
    b = build_sector(3, 3)
    assert list(sigma_z_diagonal(b, 1)) == [1.0]


def test_sigma_z_out_of_range():
    b = build_sector(3, 1)
    with pytest.raises(IndexError):
        sigma_z_diagonal(b, 3)
    with pytest.raises(IndexError):
        sigma_z_diagonal(b, -1)


def test_hop_two_site():
    b = build_sector(2, 1)
    assert sorted(hop_elements(b, (0, 1))) == [(0, 1), (1, 0)]


def test_hop_saturated_empty():
    b = build_sector(3, 3)
    for i in range(2):
        assert hop_elements(b, (i, i + 1)) == []


def test_hop_three_site_single_excitation():
    b = build_sector(3, 1)
    assert len(hop_elements(b, (0, 1))) == 2


def test_hop_bad_bond():
    b = build_sector(4, 2)
    with pytest.raises(ValueError):
        hop_elements(b, (0, 2))
    with pytest.raises(IndexError):
        hop_elements(b, (3, 4))


@given(sectors)
@settings(max_examples=40, deadline=None)
def test_states_sorted_and_invertible(nq):
    n, q = nq
    b = build_sector(n, q)
    assert b.dimension == len(set(b.states))
    assert all(int(m).bit_count() == q for m in b.states)
    assert list(b.states) == sorted(b.states)
    for k, m in enumerate(b.states):
        assert b.index_of[int(m)] == k


@given(sectors)
@settings(max_examples=40, deadline=None)
def test_sigma_z_entries_and_total(nq):
    n, q = nq
    b = build_sector(n, q)
    z = sigma_z_matrix(b)
    assert set(np.unique(z)) <= {-1.0, 1.0}
    # fixed magnetization: sum_i z_i = 2q - N in every state
    np.testing.assert_array_equal(z.sum(axis=0), np.full(b.dimension, 2 * q - n))


@given(sectors)
@settings(max_examples=40, deadline=None)
def test_hop_pairs_symmetric(nq):
    n, q = nq
    b = build_sector(n, q)
    for i in range(n - 1):
        pairs = set(hop_elements(b, (i, i + 1)))
        assert {(l, k) for k, l in pairs} == pairs
        assert all(k != l for k, l in pairs)


@given(sectors)
@settings(max_examples=30, deadline=None)
def test_occupied_indices_match_sigma_z(nq):
    n, q = nq
    b = build_sector(n, q)
    for i in range(n):
        occ = occupied_indices(b, i)
        z = sigma_z_diagonal(b, i)
        np.testing.assert_array_equal(occ, np.flatnonzero(z > 0))
