"""Dense numeric kernel shared by every estimator.

Sample moments use the ``E_n`` convention (divisor ``n``, not ``n - 1``).
Eigendecompositions are returned with eigenvalues in non-increasing order
(stable tie-break on the original LAPACK ordering) and a fixed sign
convention: in each eigenvector the entry of largest absolute value is
positive, ties broken by lowest index.  All functions are pure and never
mutate their inputs, so they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyData, SingularCovariance, SingularSystem

__all__ = [
    "EigenDecomposition",
    "default_ridge",
    "sample_covariance",
    "sample_mean",
    "solve_linear_system",
    "sym_eigen",
    "symmetrize",
    "whitening_transform",
]


def symmetrize(A):
    """Return the exactly symmetric part 0.5 * (A + A^T)."""
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def default_ridge(A):
    """Scale-aware default ridge: 1e-8 * trace(A) / dim."""
    A = np.asarray(A, dtype=float)
    return 1e-8 * abs(float(np.trace(A))) / A.shape[0]


def sample_mean(data):
    """Column-wise mean of an n-by-p data matrix.

    Raises
    ------
    EmptyData
        If the matrix has no rows.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"expected a 2-d data matrix, got ndim={data.ndim}")
    if data.shape[0] == 0:
        raise EmptyData("cannot average a data matrix with zero rows")
    return data.mean(axis=0)


def sample_covariance(data, mean):
    """Covariance about ``mean`` with divisor ``n`` (the E_n convention).

    The result is exactly symmetric and positive semidefinite up to
    round-off.
    """
    data = np.asarray(data, dtype=float)
    mean = np.asarray(mean, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"expected a 2-d data matrix, got ndim={data.ndim}")
    if data.shape[0] == 0:
        raise EmptyData("cannot form a covariance from zero rows")
    if mean.shape != (data.shape[1],):
        raise ValueError(
            f"mean has shape {mean.shape}, expected ({data.shape[1]},)"
        )
    centered = data - mean
    return symmetrize(centered.T @ centered / data.shape[0])


@dataclass(frozen=True)
class EigenDecomposition:
    """Full symmetric eigendecomposition with deterministic conventions.

    ``values`` are non-increasing; ``vectors`` has the eigenvectors as
    columns, each with its largest-magnitude entry positive.
    """

    values: np.ndarray
    vectors: np.ndarray


def sym_eigen(A):
    """Eigendecomposition of a symmetric matrix with fixed conventions.

    Eigenvalues come back sorted in non-increasing order; equal values keep
    the order LAPACK produced them in (so ``sym_eigen(I)`` returns the
    standard basis in index order).  Each eigenvector is sign-fixed so its
    largest-magnitude entry (lowest index on ties) is positive.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError("matrix has non-finite entries")
    scale = max(float(np.abs(A).max()), 1.0)
    if np.abs(A - A.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(symmetrize(A))
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = np.ascontiguousarray(vectors[:, order])
    for j in range(vectors.shape[1]):
        i = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[i, j] < 0.0:
            vectors[:, j] = -vectors[:, j]
    return EigenDecomposition(values=values, vectors=vectors)


def whitening_transform(Sigma, ridge=0.0):
    """Symmetric inverse square root of ``Sigma + ridge * I`` and its inverse.

    Returns ``(W, W_inv)`` with ``W = (Sigma + ridge I)^(-1/2)`` and
    ``W_inv = (Sigma + ridge I)^(+1/2)``, both symmetric.

    Raises
    ------
    SingularCovariance
        If ``Sigma + ridge * I`` has an eigenvalue <= 0.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    p = Sigma.shape[0]
    eig = sym_eigen(Sigma + ridge * np.eye(p))
    if eig.values.min() <= 0.0:
        raise SingularCovariance(
            f"smallest eigenvalue {eig.values.min():.3e} is not positive"
        )
    V = eig.vectors
    inv_root = V @ np.diag(eig.values**-0.5) @ V.T
    root = V @ np.diag(eig.values**0.5) @ V.T
    return symmetrize(inv_root), symmetrize(root)


def solve_linear_system(A, b, ridge=0.0):
    """Solve ``(A + ridge * I) x = b`` with a residual guarantee.

    Raises
    ------
    SingularSystem
        If the factorization fails or the residual exceeds
        ``1e-8 * (||A||_F ||x|| + ||b||)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"rhs has shape {b.shape}, expected ({A.shape[0]},)")
    M = A + ridge * np.eye(A.shape[0])
    try:
        x = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.isfinite(x).all():
        raise SingularSystem("solution has non-finite entries")
    residual = float(np.linalg.norm(M @ x - b))
    bound = 1e-8 * (
        float(np.linalg.norm(A)) * float(np.linalg.norm(x))
        + float(np.linalg.norm(b))
    )
    if residual > max(bound, 1e-300):
        raise SingularSystem(
            f"residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    return x
