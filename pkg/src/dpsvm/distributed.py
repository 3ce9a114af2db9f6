"""Distributed fitting engines.

Two strategies over a row partition of the sample into ``k`` batches:

* **naive**: every batch runs the full estimator on its own rows (local
  moments, local dividing points) and the ``k`` candidate matrices are
  averaged.

* **refined**: one batch supplies a cheap initial direction per slice;
  the hinge is then replaced by the smoothed loss ``u H(u/h)`` whose
  stationarity condition rearranges into a linear fixed point.  Each
  round every worker ships three fixed-size aggregates per slice,

      U_base = n^-1 sum xhat xhat^T
      U_curv = n^-1 sum xhat xhat^T H'(g/h) / h
      V_grad = n^-1 sum xhat ytil [H(g/h) + H'(g/h)/h]

  with ``xhat = (x - mu, -1)`` and ``g = 1 - ytil theta^T xhat``, and the
  coordinator solves

      [sum_j U_curv_j + (2/lam) diag(sum_j U_base_j, 0)] theta = sum_j V_grad_j

  where ``diag(A, 0)`` zeroes the last row and column (so the pooled term
  is exactly ``(2/lam) diag(Sigma_hat, 0)``).  The bandwidth shrinks on a
  per-round schedule.  Workers are simulated in-process; summaries are
  reduced in ascending batch order so results are reproducible.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSlicing, RefinementSingular, SingularSystem
from .linalg import (
    default_ridge,
    sample_covariance,
    sample_mean,
    solve_linear_system,
    symmetrize,
)
from .psvm import (
    PSVM,
    SdrFit,
    _fit_directions,
    candidate_matrix,
    canonical_variant,
    central_subspace,
    default_lambda,
    dividing_points,
    sliced_label,
    weight_grid,
)
from .smoothing import smooth_H, smooth_H_prime
from .solver import DirectionEstimate, SolverConfig, hinge_objective

__all__ = [
    "Partition",
    "RefinedConfig",
    "WorkerSummary",
    "bandwidth_schedule",
    "naive_fit",
    "partition",
    "refined_fit",
    "refined_update",
    "smooth_H",
    "smooth_H_prime",
    "worker_summary",
]


@dataclass(frozen=True)
class Partition:
    """Disjoint index batches covering ``0..n-1``; sizes differ by <= 1.

    Indices inside each batch are kept in ascending order so that batch
    computations are reproducible and ``k = 1`` reproduces the full-sample
    row order exactly.
    """

    batch_indices: list
    k: int
    m: int


@dataclass
class RefinedConfig:
    """Controls for the refined engine.

    ``B`` refinement rounds; ``lam`` defaults to ``2 m^(2/3)``;
    ``bandwidth_rule`` is ``"sec6"`` (aggressive constants with a 0.3
    floor) or ``"assumption7"``; ``init_batch`` is the 1-based batch the
    initializer is fitted on.
    """

    B: int = 3
    lam: float | None = None
    bandwidth_rule: str = "sec6"
    init_batch: int = 1
    solver: SolverConfig | None = None


@dataclass(frozen=True)
class WorkerSummary:
    """Per-batch aggregates shipped to the coordinator each round.

    All three blocks are scaled by the *global* ``1/n`` so that summing
    over batches reproduces the full-sample quantities exactly.
    """

    U_base: np.ndarray
    U_curv: np.ndarray
    V_grad: np.ndarray
    batch_id: int = -1
    slice_id: int = -1


def partition(n, k, seed):
    """Random even split of ``0..n-1`` into ``k`` batches (seeded Philox)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    perm = rng.permutation(n)
    base, rem = divmod(n, k)
    batches = []
    start = 0
    for j in range(k):
        size = base + (1 if j < rem else 0)
        batches.append(np.sort(perm[start : start + size]))
        start += size
    return Partition(batch_indices=batches, k=k, m=base)


def bandwidth_schedule(b, n, m, p, rule="sec6"):
    """Smoothing bandwidth for refinement round ``b`` (1-based).

    ``"sec6"``: max(10 sqrt(p/n), 10 (p/m)^(2^(b-2)), 0.3).
    ``"assumption7"``: max(n^(-1/2), m^(-2^(b-2))).
    """
    if b < 1:
        raise ValueError(f"round index must be >= 1, got {b}")
    expo = 2.0 ** (b - 2)
    if rule in ("sec6", "paper_sec6"):
        return max(10.0 * (p / n) ** 0.5, 10.0 * (p / m) ** expo, 0.3)
    if rule == "assumption7":
        return max(float(n) ** -0.5, float(m) ** -expo)
    raise ValueError(f"unknown bandwidth rule {rule!r}")


def _augment(batch_data, mu_global):
    centered = np.asarray(batch_data, dtype=float) - np.asarray(mu_global, dtype=float)
    return np.hstack([centered, -np.ones((centered.shape[0], 1))])


def worker_summary(
    batch_data,
    batch_labels,
    mu_global,
    theta_prev,
    h,
    n_total,
    weights=None,
    batch_id=-1,
    slice_id=-1,
):
    """Compute one batch's (U_base, U_curv, V_grad) at ``theta_prev``.

    ``mu_global`` must be the pooled mean and ``n_total`` the full sample
    size.  If ``weights`` is given, the curvature and gradient summands
    are multiplied row-wise by it (the weighted-variant recursion); the
    raw second moment ``U_base`` stays unweighted because it stands in for
    the covariance block of the fixed-point system.
    """
    if h <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    ytil = np.asarray(batch_labels, dtype=float)
    if isinstance(theta_prev, DirectionEstimate):
        theta = theta_prev.theta
    else:
        theta = np.asarray(theta_prev, dtype=float)
    Xhat = _augment(batch_data, mu_global)
    g = 1.0 - ytil * (Xhat @ theta)
    v = g / h
    Hv = smooth_H(v)
    Hp = smooth_H_prime(v)
    cu = Hp / h
    cv = ytil * (Hv + Hp / h)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        cu = cu * w
        cv = cv * w
    U_base = symmetrize(Xhat.T @ Xhat / n_total)
    U_curv = symmetrize((Xhat * cu[:, None]).T @ Xhat / n_total)
    V_grad = Xhat.T @ cv / n_total
    return WorkerSummary(
        U_base=U_base,
        U_curv=U_curv,
        V_grad=V_grad,
        batch_id=batch_id,
        slice_id=slice_id,
    )


def refined_update(summaries, lam, ridge=None):
    """Aggregate worker summaries and solve one refinement round.

    Solves ``[sum U_curv + (2/lam) diag(sum U_base, 0)] theta = sum V_grad``
    with a small ridge (the curvature term can vanish on entire batches).
    """
    if len(summaries) == 0:
        raise ValueError("need at least one worker summary")
    A = np.zeros_like(summaries[0].U_curv)
    Ub = np.zeros_like(summaries[0].U_base)
    rhs = np.zeros_like(summaries[0].V_grad)
    for s in sorted(summaries, key=lambda s: s.batch_id):
        A = A + s.U_curv
        Ub = Ub + s.U_base
        rhs = rhs + s.V_grad
    Ub_blocked = Ub.copy()
    Ub_blocked[-1, :] = 0.0
    Ub_blocked[:, -1] = 0.0
    system = A + (2.0 / lam) * Ub_blocked
    if ridge is None:
        ridge = default_ridge(system)
    try:
        theta = solve_linear_system(system, rhs, ridge)
    except SingularSystem as exc:
        raise RefinementSingular(str(exc)) from exc
    return DirectionEstimate(
        psi=theta[:-1],
        t=float(theta[-1]),
        objective_value=None,
        slice_index=summaries[0].slice_id,
    )


def naive_fit(X, y, part, R, d, lam=None, variant=PSVM, config=None):
    """Divide and conquer: average the per-batch candidate matrices.

    Each batch uses its own moments and dividing points.  A batch whose
    response ties make slicing impossible is skipped with a warning; the
    average runs over the surviving batches (all batches degenerate is an
    error).  ``lam`` defaults to ``2 m^(2/3)`` with ``m = n/k``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    variant = canonical_variant(variant)
    start = time.perf_counter()
    n = X.shape[0]
    if lam is None:
        lam = default_lambda(n / part.k)

    matrices = []
    directions = []
    batch_times = []
    for j, idx in enumerate(part.batch_indices):
        t_batch = time.perf_counter()
        Xb = X[idx]
        yb = y[idx]
        try:
            mu_j = sample_mean(Xb)
            Sigma_j = sample_covariance(Xb, mu_j)
            dirs = _fit_directions(Xb, yb, R, lam, variant, config, mu_j, Sigma_j)
        except DegenerateSlicing as exc:
            warnings.warn(f"skipping batch {j}: {exc}", stacklevel=2)
            continue
        matrices.append(candidate_matrix(dirs))
        directions.extend(dirs)
        batch_times.append(time.perf_counter() - t_batch)
    if not matrices:
        raise DegenerateSlicing("every batch failed to slice")

    t_agg = time.perf_counter()
    M = sum(matrices) / len(matrices)
    V, eigenvalues = central_subspace(M, d)
    agg_time = time.perf_counter() - t_agg
    return SdrFit(
        M=M,
        V=V,
        eigenvalues=eigenvalues,
        directions=directions,
        variant=variant,
        engine="naive",
        timing_seconds=time.perf_counter() - start,
        critical_path_seconds=max(batch_times) + agg_time,
    )


def refined_fit(X, y, part, R, d, config=None, variant=PSVM):
    """Smoothed iterative engine (initializer + B aggregation rounds).

    The pooled mean is the average of the batch means.  The initializer
    solves the full per-slice program on batch ``config.init_batch`` with
    cost ``2 m^(2/3)``; its dividing points (PSVM) are broadcast and reused
    for every round's labels.  A slice whose initializer is degenerate
    (one-class on the initial batch) keeps ``psi = 0`` through all rounds.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    variant = canonical_variant(variant)
    if config is None:
        config = RefinedConfig()
    if config.B < 1:
        raise ValueError(f"need B >= 1 refinement rounds, got {config.B}")
    if not 1 <= config.init_batch <= part.k:
        raise ValueError(
            f"init_batch must be in [1, {part.k}], got {config.init_batch}"
        )
    start = time.perf_counter()
    n, p = X.shape
    m_nominal = n / part.k
    lam = config.lam if config.lam is not None else default_lambda(m_nominal)

    # pooled location: average of the k local means
    t0 = time.perf_counter()
    local_means = [sample_mean(X[idx]) for idx in part.batch_indices]
    mu = np.mean(np.asarray(local_means), axis=0)
    mean_time = time.perf_counter() - t0

    # initializer: full per-slice solve on one batch
    t0 = time.perf_counter()
    idx0 = part.batch_indices[config.init_batch - 1]
    Xb, yb = X[idx0], y[idx0]
    lam_init = default_lambda(Xb.shape[0])
    mu_b = sample_mean(Xb)
    Sigma_b = sample_covariance(Xb, mu_b)
    if variant == PSVM:
        spec = dividing_points(yb, R)
        slice_labels = [sliced_label(y, q) for q in spec.dividing]
        slice_weights = [None] * len(slice_labels)
    else:
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("WPSVM requires a binary response in {-1, +1}")
        grid = weight_grid(R).weights
        slice_labels = [y] * len(grid)
        slice_weights = [np.where(y > 0.0, 1.0 - pi, pi) for pi in grid]
    thetas = _fit_directions(
        Xb, yb, R, lam_init, variant, config.solver, mu_b, Sigma_b
    )
    init_time = time.perf_counter() - t0

    critical_path = mean_time + init_time
    U_base_total = None
    for b in range(1, config.B + 1):
        h = bandwidth_schedule(b, n, m_nominal, p, rule=config.bandwidth_rule)
        worker_times = np.zeros(part.k)
        agg_time = 0.0
        for ell, theta in enumerate(thetas):
            if theta.degenerate:
                continue
            labels = slice_labels[ell]
            wts = slice_weights[ell]
            summaries = []
            for j, idx in enumerate(part.batch_indices):
                t0 = time.perf_counter()
                summaries.append(
                    worker_summary(
                        X[idx],
                        labels[idx],
                        mu,
                        theta,
                        h,
                        n,
                        weights=None if wts is None else wts[idx],
                        batch_id=j,
                        slice_id=theta.slice_index,
                    )
                )
                worker_times[j] += time.perf_counter() - t0
            t0 = time.perf_counter()
            if U_base_total is None:
                U_base_total = sum(s.U_base for s in summaries)
            thetas[ell] = refined_update(summaries, lam)
            agg_time += time.perf_counter() - t0
        critical_path += float(worker_times.max()) + agg_time

    # diagnostic objective values at the final directions
    if U_base_total is not None:
        Sigma_pooled = U_base_total[:p, :p]
        for ell, theta in enumerate(thetas):
            if theta.degenerate:
                continue
            theta.objective_value = hinge_objective(
                theta,
                X,
                slice_labels[ell],
                mu,
                Sigma_pooled,
                lam,
                weights=slice_weights[ell],
            )

    t0 = time.perf_counter()
    M = candidate_matrix(thetas)
    V, eigenvalues = central_subspace(M, d)
    critical_path += time.perf_counter() - t0
    return SdrFit(
        M=M,
        V=V,
        eigenvalues=eigenvalues,
        directions=thetas,
        variant=variant,
        engine="refined",
        timing_seconds=time.perf_counter() - start,
        critical_path_seconds=critical_path,
    )
