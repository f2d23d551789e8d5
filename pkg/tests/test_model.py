import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzsim.basis import build_sector
from xxzsim.model import ModelParams, build_hamiltonian, propagate
from xxzsim.dynamics import initial_state
from xxzsim.observables import local_magnetization


def random_density(d, rng):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def taylor_expm(A, scaling=20, order=24):
    """Independent scaling-and-squaring Taylor-series matrix exponential."""
    B = A / 2**scaling
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, order + 1):
        term = term @ B / k
        out = out + term
    for _ in range(scaling):
        out = out @ out
    return out


def test_two_site_xx_matrix():
    b = build_sector(2, 1)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=0.0, h=0.0))
    np.testing.assert_allclose(H.matrix, [[0.0, 2.0], [2.0, 0.0]])
    np.testing.assert_allclose(sorted(H.eigenvalues), [-2.0, 2.0], atol=1e-14)


def test_two_site_anisotropy_diagonal():
    b = build_sector(2, 1)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=1.0, h=0.0))
    np.testing.assert_allclose(np.diag(H.matrix), [-1.0, -1.0])
    assert H.matrix[0, 1] == H.matrix[1, 0] == 2.0


def test_saturated_sector_scalar():
    b = build_sector(3, 3)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=1.0, h=0.0))
    np.testing.assert_allclose(H.matrix, [[2.0]])


def test_field_term():
    b = build_sector(2, 1)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=0.0, h=0.5))
    # sum_i z_i = 0 in the one-excitation two-site sector
    np.testing.assert_allclose(np.diag(H.matrix), [0.0, 0.0])
    b3 = build_sector(3, 1)
    H3 = build_hamiltonian(b3, ModelParams(J=1.0, Delta=0.0, h=0.5))
    np.testing.assert_allclose(np.diag(H3.matrix), [-0.5, -0.5, -0.5])


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(J=float("nan"))
    with pytest.raises(ValueError):
        ModelParams(Delta=float("inf"))


def test_propagate_zero_duration():
    b = build_sector(4, 2)
    H = build_hamiltonian(b, ModelParams(Delta=0.7))
    rho = random_density(b.dimension, np.random.default_rng(0))
    np.testing.assert_allclose(propagate(H, rho, 0.0), rho, atol=1e-15)


def test_propagate_two_site_oracle():
    # <sigma^z> on the initial site follows cos(4Jt) in the free two-site chain
    b = build_sector(2, 1)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=0.0))
    rho = initial_state(b, [1])
    for t in np.linspace(0.0, 2.0, 17):
        mag = local_magnetization(b, propagate(H, rho, t))
        assert abs(mag[1] - np.cos(4 * t)) < 1e-12
        # population of the initial site is cos^2(2t)
        assert abs((mag[1] + 1) / 2 - np.cos(2 * t) ** 2) < 1e-12


def test_propagate_maximally_mixed_invariant():
    b = build_sector(4, 1)
    H = build_hamiltonian(b, ModelParams(Delta=1.3))
    rho = np.eye(4, dtype=complex) / 4
    np.testing.assert_allclose(propagate(H, rho, 0.9), rho, atol=1e-14)


def test_propagate_dimension_mismatch():
    b = build_sector(4, 1)
    H = build_hamiltonian(b, ModelParams())
    with pytest.raises(ValueError):
        propagate(H, np.eye(3, dtype=complex) / 3, 0.1)
    with pytest.raises(ValueError):
        propagate(H, np.eye(4, dtype=complex) / 4, -0.1)


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_propagate_unitarity_invariants(seed):
    rng = np.random.default_rng(seed)
    b = build_sector(5, 2)
    H = build_hamiltonian(b, ModelParams(Delta=rng.uniform(-2, 2), h=rng.uniform(-1, 1)))
    rho = random_density(b.dimension, rng)
    t = rng.uniform(0, 5)
    out = propagate(H, rho, t)
    assert abs(np.trace(out).real - 1.0) < 1e-9
    assert abs(np.trace(out @ out) - np.trace(rho @ rho)) < 1e-9
    np.testing.assert_allclose(
        np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-9
    )
    # energy conservation
    assert abs(np.trace(H.matrix @ out) - np.trace(H.matrix @ rho)) < 1e-9


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_propagate_semigroup(seed):
    rng = np.random.default_rng(seed)
    b = build_sector(4, 2)
    H = build_hamiltonian(b, ModelParams(Delta=rng.uniform(-2, 2)))
    rho = random_density(b.dimension, rng)
    t1, t2 = rng.uniform(0, 2, size=2)
    a = propagate(H, propagate(H, rho, t1), t2)
    bb = propagate(H, rho, t1 + t2)
    assert np.linalg.norm(a - bb) < 1e-9


@pytest.mark.parametrize("n,q", [(4, 1), (5, 2), (4, 2)])
def test_propagate_against_taylor_expm(n, q):
    rng = np.random.default_rng(7)
    b = build_sector(n, q)
    assert b.dimension <= 10
    H = build_hamiltonian(b, ModelParams(Delta=0.8, h=0.2))
    rho = random_density(b.dimension, rng)
    for t in (0.3, 1.7):
        U = taylor_expm(-1j * H.matrix * t)
        ref = U @ rho @ U.conj().T
        assert np.abs(propagate(H, rho, t) - ref).max() < 1e-8
