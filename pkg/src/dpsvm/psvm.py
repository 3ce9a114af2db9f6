"""Full-data central-subspace estimators.

A continuous response is cut into ``R`` equal-frequency slices; each
dividing point ``q`` yields binary labels ``+1 if y > q else -1`` and one
SVM direction.  The candidate matrix is the sum of the outer products of
the fitted normals and its top ``d`` eigenvectors span the estimated
central subspace.  For a binary response the weighted variant skips the
slicing and fits ``R`` class-weighted problems on the raw labels instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSlicing
from .linalg import sample_covariance, sample_mean, sym_eigen
from .solver import (
    DirectionEstimate,
    SolverConfig,
    psvm_direction,
    wpsvm_direction,
)

__all__ = [
    "SdrFit",
    "SliceSpec",
    "WeightSpec",
    "candidate_matrix",
    "central_subspace",
    "default_lambda",
    "dividing_points",
    "fit_full",
    "sliced_label",
    "weight_grid",
]

PSVM = "PSVM"
WPSVM = "WPSVM"


def default_lambda(n):
    """Hinge cost used throughout the simulations: ``2 n^(2/3)``."""
    return 2.0 * float(n) ** (2.0 / 3.0)


def canonical_variant(variant):
    v = str(variant).upper()
    if v not in (PSVM, WPSVM):
        raise ValueError(f"unknown variant {variant!r}; expected PSVM or WPSVM")
    return v


@dataclass(frozen=True)
class SliceSpec:
    """Dividing points ``q_1 < ... < q_(R-1)`` for ``R`` response slices."""

    dividing: np.ndarray
    R: int


@dataclass(frozen=True)
class WeightSpec:
    """Class weights ``pi_1 < ... < pi_R``, each strictly inside (0, 1)."""

    weights: np.ndarray


@dataclass
class SdrFit:
    """A fitted central-subspace estimate.

    ``M`` is the candidate matrix, ``V`` its top-``d`` eigenvectors (the
    subspace basis), ``eigenvalues`` the full spectrum for gap
    diagnostics.  ``critical_path_seconds`` is only set by the distributed
    engines: the longest single-worker time plus aggregation, i.e. the
    wall-clock a real cluster would see.
    """

    M: np.ndarray
    V: np.ndarray
    eigenvalues: np.ndarray
    directions: list[DirectionEstimate]
    variant: str
    engine: str
    timing_seconds: float
    critical_path_seconds: float | None = None
    extras: dict = field(default_factory=dict)


def dividing_points(responses, R):
    """Equal-frequency dividing points: the l/R quantiles, l = 1..R-1.

    Uses the linear-interpolation quantile definition.  Heavily tied
    responses that collapse two dividing points raise
    :class:`DegenerateSlicing`.
    """
    responses = np.asarray(responses, dtype=float).ravel()
    n = responses.shape[0]
    if R < 2:
        raise ValueError(f"need at least two slices, got R={R}")
    if n < R:
        raise ValueError(f"need n >= R responses, got n={n}, R={R}")
    levels = np.arange(1, R) / R
    q = np.quantile(responses, levels, method="linear")
    if np.any(np.diff(q) <= 0.0):
        raise DegenerateSlicing(
            f"dividing points {q} are not strictly increasing"
        )
    return SliceSpec(dividing=q, R=R)


def sliced_label(y, q):
    """Binary slice label: +1 iff ``y > q`` (boundary goes to -1)."""
    out = np.where(np.asarray(y, dtype=float) > q, 1.0, -1.0)
    return float(out) if out.ndim == 0 else out


def weight_grid(R):
    """Interior equally spaced weights ``l / (R + 1)``, l = 1..R."""
    if R < 1:
        raise ValueError(f"need R >= 1 weights, got R={R}")
    return WeightSpec(weights=np.arange(1, R + 1) / (R + 1))


def candidate_matrix(directions):
    """Sum of outer products of the fitted normals (symmetric PSD)."""
    if len(directions) == 0:
        raise ValueError("need at least one direction")
    p = np.asarray(directions[0].psi).shape[0]
    M = np.zeros((p, p))
    for est in directions:
        psi = np.asarray(est.psi, dtype=float)
        if psi.shape[0] != p:
            raise ValueError("directions disagree on p")
        M += np.outer(psi, psi)
    return M


def central_subspace(M, d):
    """Top-``d`` eigenvectors of the candidate matrix plus the full spectrum."""
    M = np.asarray(M, dtype=float)
    p = M.shape[0]
    if not 1 <= d <= p:
        raise ValueError(f"d must be in [1, {p}], got {d}")
    eig = sym_eigen(M)
    return eig.vectors[:, :d].copy(), eig.values


def _fit_directions(X, y, R, lam, variant, config, mu, Sigma):
    """Solve the R-1 sliced problems (PSVM) or R weighted ones (WPSVM)."""
    cfg = SolverConfig(
        lam=lam,
        max_passes=None if config is None else config.max_passes,
        kkt_tol=1e-6 if config is None else config.kkt_tol,
        ridge=None if config is None else config.ridge,
    )
    directions = []
    if variant == PSVM:
        spec = dividing_points(y, R)
        for ell, q in enumerate(spec.dividing, start=1):
            labels = sliced_label(y, q)
            directions.append(
                psvm_direction(X, labels, mu, Sigma, cfg, slice_index=ell)
            )
    else:
        if not np.all(np.abs(np.asarray(y, dtype=float)) == 1.0):
            raise ValueError("WPSVM requires a binary response in {-1, +1}")
        for ell, pi in enumerate(weight_grid(R).weights, start=1):
            directions.append(
                wpsvm_direction(X, y, mu, Sigma, cfg, pi, slice_index=ell)
            )
    return directions


def fit_full(X, y, R, d, lam=None, variant=PSVM, config=None):
    """Fit the central subspace on the pooled sample.

    Parameters
    ----------
    X : (n, p) array
        Predictors.
    y : (n,) array
        Response; numeric for ``PSVM``, in {-1, +1} for ``WPSVM``.
    R : int
        Number of slices (PSVM solves R-1 problems, WPSVM solves R).
    d : int
        Target subspace dimension.
    lam : float, optional
        Hinge cost; defaults to ``2 n^(2/3)``.
    config : SolverConfig, optional
        Solver tolerances; ``config.lam`` is ignored in favour of ``lam``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    variant = canonical_variant(variant)
    n = X.shape[0]
    if lam is None:
        lam = default_lambda(n)
    start = time.perf_counter()
    mu = sample_mean(X)
    Sigma = sample_covariance(X, mu)
    directions = _fit_directions(X, y, R, lam, variant, config, mu, Sigma)
    M = candidate_matrix(directions)
    V, eigenvalues = central_subspace(M, d)
    return SdrFit(
        M=M,
        V=V,
        eigenvalues=eigenvalues,
        directions=directions,
        variant=variant,
        engine="full",
        timing_seconds=time.perf_counter() - start,
    )
