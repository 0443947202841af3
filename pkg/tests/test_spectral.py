import math

import numpy as np
import pytest

from projpair.errors import ValidationError
from projpair.rng import SplitMix64
from projpair.spectral import givens_rotation, hermitian_eigen, nullspace_dim

SQRT_HALF = math.sqrt(0.5)


def jacobi_eigenvalues(a, tol=1e-12, max_sweeps=80):
    """Cyclic Jacobi for complex Hermitian matrices; independent oracle for
    the LAPACK-backed production path."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(abs(a[i, j]) ** 2
                            for i in range(n) for j in range(n) if i != j))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                phi = a[p, q] / abs(a[p, q])
                theta = 0.5 * math.atan2(2 * abs(a[p, q]),
                                         (a[p, p] - a[q, q]).real)
                c, s = math.cos(theta), math.sin(theta)
                j = np.eye(n, dtype=complex)
                j[p, p] = c
                j[q, q] = c
                j[p, q] = -s * phi
                j[q, p] = s * np.conj(phi)
                a = j.conj().T @ a @ j
    return np.sort(a.diagonal().real)


def test_identity_eigenvalues():
    es = hermitian_eigen(np.eye(3))
    assert np.allclose(es.values, [1.0, 1.0, 1.0])


def test_symmetry_forced_two_by_two():
    es = hermitian_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(es.values, [-1.0, 1.0])
    # eigenvectors are (1, -1)/sqrt(2) and (1, 1)/sqrt(2) up to phase
    for k, sign in ((0, -1.0), (1, 1.0)):
        v = es.vectors[:, k]
        v = v / v[0]
        assert np.allclose(v, [1.0, sign], atol=1e-10)


def test_projection_difference_eigenvalues():
    # characteristic polynomial of p - q is x^2 - 1/2, solved by hand
    p = np.array([[0.5, 0.5], [0.5, 0.5]])
    q = np.diag([1.0, 0.0])
    es = hermitian_eigen(p - q)
    assert np.allclose(es.values, [-SQRT_HALF, SQRT_HALF], atol=1e-12)


def test_reconstruction_bound():
    rng = SplitMix64(41)
    for n in (1, 3, 8, 17):
        m = rng.complex_matrix(n, n)
        a = (m + m.conj().T) / 2.0
        es = hermitian_eigen(a)
        err = np.linalg.norm(a - (es.vectors * es.values) @ es.vectors.conj().T, 2)
        assert err <= 1e-9 * max(1.0, np.linalg.norm(a, 2))
        ortho = np.linalg.norm(es.vectors.conj().T @ es.vectors - np.eye(n), 2)
        assert ortho <= 1e-10


def test_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        hermitian_eigen(np.ones((2, 3)))


def test_nullspace_dim_examples():
    assert nullspace_dim(np.zeros((4, 4)), 1e-8) == 4
    assert nullspace_dim(np.eye(3), 1e-8) == 0
    assert nullspace_dim(np.diag([1e-12, 1.0]), 1e-8) == 1


def test_nullspace_dim_monotone_in_tol():
    rng = SplitMix64(99)
    m = rng.complex_matrix(6, 6)
    a = (m + m.conj().T) / 2.0
    dims = [nullspace_dim(a, t) for t in (0.0, 1e-8, 1e-2, 0.5, 10.0)]
    assert dims == sorted(dims)
    assert dims[-1] == 6


def test_eigenvalues_conjugation_invariant():
    rng = SplitMix64(7)
    for _ in range(20):
        n = rng.randint(2, 12)
        m = rng.complex_matrix(n, n)
        a = (m + m.conj().T) / 2.0
        u = rng.unitary(n)
        b = u @ a @ u.conj().T
        b = (b + b.conj().T) / 2.0
        assert np.max(np.abs(hermitian_eigen(a).values
                             - hermitian_eigen(b).values)) <= 1e-8


def test_matches_jacobi_oracle():
    rng = SplitMix64(12345)
    for _ in range(10):
        n = rng.randint(2, 10)
        m = rng.complex_matrix(n, n)
        a = (m + m.conj().T) / 2.0
        assert np.max(np.abs(hermitian_eigen(a).values
                             - jacobi_eigenvalues(a))) <= 1e-9


def test_givens_identity_at_zero_angle():
    assert np.allclose(givens_rotation(0, 2, 0.0, 4), np.eye(4))


def test_givens_basis_swap():
    g = givens_rotation(0, 1, math.pi / 2, 2)
    assert np.allclose(g @ np.diag([1.0, 0.0]) @ g.conj().T, np.diag([0.0, 1.0]),
                       atol=1e-12)


def test_givens_quarter_turn_conjugation():
    # hand product: G diag(1,0) G* with G = [[c, s], [-s, c]] at pi/4
    g = givens_rotation(0, 1, math.pi / 4, 2)
    got = g @ np.diag([1.0, 0.0]) @ g.conj().T
    assert np.allclose(got, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)


def test_givens_index_validation():
    with pytest.raises(ValidationError):
        givens_rotation(1, 1, 0.3, 3)
    with pytest.raises(ValidationError):
        givens_rotation(0, 3, 0.3, 3)


def test_givens_products_stay_unitary():
    rng = SplitMix64(2)
    n = 9
    prod = np.eye(n, dtype=complex)
    for _ in range(40):
        i = rng.randint(0, n - 2)
        j = rng.randint(i + 1, n - 1)
        prod = prod @ givens_rotation(i, j, rng.uniform(0, 2 * math.pi), n)
    assert np.linalg.norm(prod.conj().T @ prod - np.eye(n), 2) <= 1e-10
