"""Self-contained numeric primitives consumed by every other module.

Hermitian eigendecomposition, nullspace dimension counting, and plane
rotations.  Scalars are complex double precision throughout; real
symmetric inputs are the special case with zero imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tolerances import HERMITIAN_TOL, RANK_TOL


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return ``a`` as a square complex Hermitian array.

    Raises ValidationError if any entry differs from the conjugate of its
    transpose partner by more than ``tol`` (absolute).
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > tol:
        raise ValidationError("matrix is not Hermitian within tolerance "
                              f"{tol:g} (defect {np.max(np.abs(m - m.conj().T)):g})")
    return m


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition: ascending real values, orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eigen(a, tol: float = HERMITIAN_TOL) -> EigenSystem:
    """Full spectral decomposition of a Hermitian matrix.

    Reconstruction satisfies ``||A - V diag(w) V*|| <= 1e-9 * max(1, ||A||)``.
    """
    m = as_hermitian(a, tol)
    # exact symmetrization removes tolerance-level asymmetry before LAPACK
    m = (m + m.conj().T) / 2.0
    values, vectors = np.linalg.eigh(m)
    return EigenSystem(values=values, vectors=vectors)


def nullspace_dim(a, tol: float) -> int:
    """Number of eigenvalues with ``|lambda| <= tol``."""
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    values = hermitian_eigen(a).values
    return int(np.count_nonzero(np.abs(values) <= tol))


def rank_tolerance(a, rel: float = RANK_TOL) -> float:
    """Ledger nullspace/rank tolerance: ``rel`` relative to ``||A||``."""
    m = np.asarray(a)
    if m.size == 0:
        return rel
    return rel * max(1.0, float(np.linalg.norm(m, 2)))


def givens_rotation(i: int, j: int, theta: float, n: int) -> np.ndarray:
    """Plane rotation by ``theta`` in coordinates (i, j), identity elsewhere.

    Convention: G[i,i] = G[j,j] = cos, G[i,j] = sin, G[j,i] = -sin, so that
    conjugating diag(1, 0) by G(0, 1, pi/4, 2) yields [[1/2, -1/2], [-1/2, 1/2]].
    """
    if not (0 <= i < j < n):
        raise ValidationError(f"rotation indices must satisfy 0 <= i < j < n, got ({i}, {j}, n={n})")
    g = np.eye(n, dtype=np.complex128)
    c, s = np.cos(theta), np.sin(theta)
    g[i, i] = c
    g[j, j] = c
    g[i, j] = s
    g[j, i] = -s
    return g


def eig_multiplicity(values: np.ndarray, target: float, tol: float) -> int:
    """Count eigenvalues within ``tol`` of ``target``."""
    return int(np.count_nonzero(np.abs(values - target) <= tol))
