"""Per-slice principal (weighted) SVM programs.

Each slice problem minimizes

    psi^T Sigma psi + lambda * E_n[ w(y) * [1 - ytil (psi^T (x - mu) - t)]_+ ]

over ``theta = (psi, t)``; the unweighted program has ``w = 1`` and the
weighted one uses class weights ``1 - pi`` / ``pi``.  Solving substitutes
``eta = W^{-1} psi`` with ``W = (Sigma + ridge I)^{-1/2}``, which turns the
quadratic penalty into ``||eta||^2`` and the program into a standard
soft-margin linear SVM with per-example cost ``lambda * w_i / (2 n)``; the
dual is solved to a KKT tolerance by pairwise coordinate descent
(:mod:`dpsvm._smo`) and mapped back via ``psi = W eta``, ``t = -b``.

``hinge_objective`` / ``smoothed_objective`` evaluate the exact and the
mollified losses, and ``brute_force_oracle`` is an exhaustive grid
minimizer used only for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._smo import smo_solve
from .errors import OracleTooLarge
from .linalg import default_ridge, whitening_transform
from .smoothing import smooth_H

__all__ = [
    "DirectionEstimate",
    "SolverConfig",
    "brute_force_oracle",
    "hinge_objective",
    "psvm_direction",
    "smoothed_objective",
    "wpsvm_direction",
]

# fixed shuffle seed for the dual solver; solves are deterministic in
# their inputs
_SOLVER_SEED = 20230817


@dataclass
class SolverConfig:
    """Tuning knobs for one slice solve.

    ``lam`` is the hinge cost; ``max_passes`` caps the number of O(n)
    sweeps (default ``10 * n``); ``kkt_tol`` is the dual stopping gap;
    ``ridge`` stabilizes the whitening (default ``1e-8 trace(Sigma)/p``).
    """

    lam: float | None = None
    max_passes: int | None = None
    kkt_tol: float = 1e-6
    ridge: float | None = None


@dataclass
class DirectionEstimate:
    """One fitted direction: SVM normal ``psi``, intercept ``t``."""

    psi: np.ndarray
    t: float
    objective_value: float | None
    slice_index: int = -1
    degenerate: bool = False

    @property
    def theta(self):
        """The augmented coefficient vector (psi, t)."""
        return np.append(self.psi, self.t)


def _unpack_theta(theta):
    if isinstance(theta, DirectionEstimate):
        return np.asarray(theta.psi, dtype=float), float(theta.t)
    psi, t = theta
    return np.asarray(psi, dtype=float), float(t)


def _check_labels(labels):
    labels = np.asarray(labels, dtype=float)
    if not np.all(np.abs(labels) == 1.0):
        raise ValueError("labels must all be +1 or -1")
    return labels


def _margins(psi, t, data, labels, mu):
    data = np.asarray(data, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if data.shape[1] != psi.shape[0] or mu.shape[0] != psi.shape[0]:
        raise ValueError(
            f"dimension mismatch: data p={data.shape[1]}, "
            f"mu p={mu.shape[0]}, psi p={psi.shape[0]}"
        )
    if data.shape[0] != labels.shape[0]:
        raise ValueError("data and labels disagree on n")
    return labels * ((data - mu) @ psi - t)


def hinge_objective(theta, data, labels, mu, Sigma, lam, weights=None):
    """Exact value of the (optionally weighted) hinge objective."""
    psi, t = _unpack_theta(theta)
    labels = _check_labels(labels)
    hinge = np.maximum(1.0 - _margins(psi, t, data, labels, mu), 0.0)
    if weights is not None:
        hinge = hinge * np.asarray(weights, dtype=float)
    return float(psi @ np.asarray(Sigma, dtype=float) @ psi + lam * hinge.mean())


def smoothed_objective(theta, data, labels, mu, Sigma, lam, h, weights=None):
    """Objective with the hinge replaced by ``u H(u/h)``.

    Coincides with :func:`hinge_objective` whenever every margin argument
    ``1 - ytil theta^T xhat`` has magnitude at least ``h``.
    """
    if h <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    psi, t = _unpack_theta(theta)
    labels = _check_labels(labels)
    u = 1.0 - _margins(psi, t, data, labels, mu)
    terms = u * smooth_H(u / h)
    if weights is not None:
        terms = terms * np.asarray(weights, dtype=float)
    return float(psi @ np.asarray(Sigma, dtype=float) @ psi + lam * terms.mean())


def _solve_direction(data, labels, mu, Sigma, config, weights, slice_index):
    data = np.asarray(data, dtype=float)
    labels = _check_labels(labels)
    mu = np.asarray(mu, dtype=float)
    Sigma = np.asarray(Sigma, dtype=float)
    n, p = data.shape
    if labels.shape[0] != n:
        raise ValueError("data and labels disagree on n")

    if config is None:
        config = SolverConfig()
    lam = config.lam
    if lam is None or lam <= 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if config.kkt_tol <= 0.0:
        raise ValueError("kkt_tol must be positive")
    max_passes = config.max_passes if config.max_passes is not None else 10 * n
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")

    if np.all(labels == labels[0]):
        # one-class slice: psi = 0 with t = -class zeroes every hinge term,
        # the exact minimizer; it contributes nothing to the candidate matrix
        cls = float(labels[0])
        return DirectionEstimate(
            psi=np.zeros(p),
            t=-cls,
            objective_value=0.0,
            slice_index=slice_index,
            degenerate=True,
        )

    ridge = config.ridge if config.ridge is not None else default_ridge(Sigma)
    W, _ = whitening_transform(Sigma, ridge)
    Z = np.ascontiguousarray((data - mu) @ W)
    if weights is None:
        Cvec = np.full(n, lam / (2.0 * n))
    else:
        Cvec = lam * np.asarray(weights, dtype=float) / (2.0 * n)
    _, w, b, _, _ = smo_solve(
        Z, labels, Cvec, config.kkt_tol, max_passes, _SOLVER_SEED
    )
    psi = W @ w
    t = -b
    obj = hinge_objective((psi, t), data, labels, mu, Sigma, lam, weights)
    return DirectionEstimate(
        psi=psi, t=t, objective_value=obj, slice_index=slice_index
    )


def psvm_direction(data, labels, mu, Sigma, config, slice_index=-1):
    """Minimize the per-slice hinge program; see the module docstring.

    A one-class slice returns the degenerate minimizer ``psi = 0`` with
    ``degenerate=True`` instead of raising.
    """
    return _solve_direction(data, labels, mu, Sigma, config, None, slice_index)


def wpsvm_direction(data, labels, mu, Sigma, config, pi, slice_index=-1):
    """Weighted variant: class +1 gets weight ``1 - pi``, class -1 gets ``pi``."""
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi must be in (0, 1), got {pi}")
    labels = _check_labels(labels)
    weights = np.where(labels > 0.0, 1.0 - pi, pi)
    return _solve_direction(data, labels, mu, Sigma, config, weights, slice_index)


@njit(cache=True)
def _oracle_scan_1d(xc, yw, w, Sigma00, lam, grid):
    g = grid.shape[0]
    n = xc.shape[0]
    best = 1e300
    bi = 0
    bj = 0
    for i in range(g):
        psi = grid[i]
        quad = psi * Sigma00 * psi
        for j in range(g):
            t = grid[j]
            acc = 0.0
            for r in range(n):
                u = 1.0 - yw[r] * (psi * xc[r, 0] - t)
                if u > 0.0:
                    acc += u * w[r]
            val = quad + lam * acc / n
            if val < best:
                best = val
                bi = i
                bj = j
    return best, bi, bj


@njit(cache=True)
def _oracle_scan_2d(xc, yw, w, Sigma, lam, grid):
    g = grid.shape[0]
    n = xc.shape[0]
    best = 1e300
    bi = 0
    bj = 0
    bk = 0
    for i in range(g):
        p0 = grid[i]
        for j in range(g):
            p1 = grid[j]
            quad = (
                p0 * Sigma[0, 0] * p0
                + 2.0 * p0 * Sigma[0, 1] * p1
                + p1 * Sigma[1, 1] * p1
            )
            for k in range(g):
                t = grid[k]
                acc = 0.0
                for r in range(n):
                    u = 1.0 - yw[r] * (p0 * xc[r, 0] + p1 * xc[r, 1] - t)
                    if u > 0.0:
                        acc += u * w[r]
                val = quad + lam * acc / n
                if val < best:
                    best = val
                    bi = i
                    bj = j
                    bk = k
    return best, bi, bj, bk


def brute_force_oracle(
    data, labels, mu, Sigma, lam, weights=None, grid_bounds=(-3.0, 3.0), grid_step=1e-2
):
    """Exhaustive grid minimizer of the exact hinge objective (tests only).

    Enumerates ``(psi, t)`` on a regular grid over ``grid_bounds`` in each
    coordinate; cost grows like ``g^(p+1)`` so only ``p <= 2`` is allowed.
    """
    data = np.asarray(data, dtype=float)
    labels = _check_labels(labels)
    p = data.shape[1]
    if p > 2:
        raise OracleTooLarge(f"grid oracle limited to p <= 2, got p={p}")
    lo, hi = grid_bounds
    count = int(round((hi - lo) / grid_step)) + 1
    grid = np.linspace(lo, hi, count)
    xc = np.ascontiguousarray(data - np.asarray(mu, dtype=float))
    w = (
        np.ones(data.shape[0])
        if weights is None
        else np.asarray(weights, dtype=float)
    )
    Sigma = np.asarray(Sigma, dtype=float)
    if p == 1:
        best, bi, bj = _oracle_scan_1d(xc, labels, w, Sigma[0, 0], lam, grid)
        psi = np.array([grid[bi]])
        t = grid[bj]
    else:
        best, bi, bj, bk = _oracle_scan_2d(xc, labels, w, Sigma, lam, grid)
        psi = np.array([grid[bi], grid[bj]])
        t = grid[bk]
    return DirectionEstimate(psi=psi, t=float(t), objective_value=float(best))
