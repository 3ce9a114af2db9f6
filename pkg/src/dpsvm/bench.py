"""Synthetic models, evaluation metrics and the Monte-Carlo harness.

Four regression designs on standard-normal predictors, all with central
subspace spanned by ``(e1, e2)``:

    I    y = x1 / (0.5 + (x2 + 1)^2) + eps        (continuous)
    II   y = x1 (x1 + x2 + 1) + eps               (continuous)
    III  y = sign(model I argument)               (binary)
    IV   y = sign(model II argument)              (binary)

with ``eps ~ N(0, noise_sd^2)``.  Randomness comes from the counter-based
Philox generator keyed by the seed; normal variates are produced by the
inverse CDF applied to 53-bit uniforms, so identical seeds give identical
datasets on any platform.  Replicate r of an experiment uses
``seed + r``; the partition for the distributed engines uses the replicate
seed offset by ``_PARTITION_SALT``.

Subspace error is the Frobenius distance between orthogonal projectors;
the dependence diagnostic is the (biased, V-statistic) sample distance
correlation.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import distributed, psvm
from .errors import ZeroDistanceVariance
from .solver import SolverConfig

__all__ = [
    "ExperimentConfig",
    "ModelSpec",
    "ReportRow",
    "distance_correlation",
    "fit_loglog_slope",
    "generate_model",
    "model_response",
    "projection_distance",
    "report_rows_to_csv",
    "run_experiment",
    "scaling_study",
    "write_report",
]

CSV_HEADER = (
    "model,engine,variant,n,p,k,B,replicates,"
    "mean_distance,sd_distance,mean_runtime_s"
)

_PARTITION_SALT = 0x5D17
MODELS = ("I", "II", "III", "IV")
ENGINES = ("full", "naive", "refined")


@dataclass(frozen=True)
class ModelSpec:
    """One synthetic dataset: model family, size, noise level, seed."""

    model_id: str
    n: int
    p: int
    noise_sd: float = 0.5
    seed: int = 0


@dataclass
class ExperimentConfig:
    """One benchmark cell: a model crossed with an engine and its knobs.

    ``lambda_rule`` is ``"paper"`` (2 n^(2/3) pooled, 2 m^(2/3)
    distributed) or an explicit number.  ``record_runtime=False`` writes an
    empty runtime column so that repeated runs produce byte-identical CSV;
    ``compute_dcor`` adds the O(n^2) distance-correlation diagnostic.
    """

    model: ModelSpec
    engine: str = "full"
    variant: str = "PSVM"
    R: int = 5
    d: int = 2
    k: int = 1
    B: int = 3
    lambda_rule: object = "paper"
    bandwidth_rule: str = "sec6"
    replicates: int = 1
    seed: int = 0
    compute_dcor: bool = False
    record_runtime: bool = True
    kkt_tol: float = 1e-6


@dataclass
class ReportRow:
    """Aggregated result of one experiment cell."""

    model: str
    engine: str
    variant: str
    n: int
    p: int
    k: int
    B: int
    replicates: int
    mean_distance: float
    sd_distance: float
    mean_runtime_s: float | None
    mean_critical_path_s: float | None = None
    mean_dcor: float | None = None
    distances: list = field(default_factory=list)


def _uniform_open(rng, shape):
    # 53-bit uniforms shifted off 0 so the inverse CDF stays finite
    return (rng.integers(0, 1 << 53, size=shape).astype(np.float64) + 0.5) / float(
        1 << 53
    )


def _standard_normal(rng, shape):
    return ndtri(_uniform_open(rng, shape))


def model_response(model_id, X, eps):
    """Noiseless-plus-error response for one model family."""
    x1 = X[:, 0]
    x2 = X[:, 1]
    if model_id == "I":
        return x1 / (0.5 + (x2 + 1.0) ** 2) + eps
    if model_id == "II":
        return x1 * (x1 + x2 + 1.0) + eps
    if model_id == "III":
        arg = x1 / (0.5 + (x2 + 1.0) ** 2) + eps
        return np.where(arg > 0.0, 1.0, -1.0)
    if model_id == "IV":
        arg = x1 * (x1 + x2 + 1.0) + eps
        return np.where(arg > 0.0, 1.0, -1.0)
    raise ValueError(f"unknown model {model_id!r}; expected one of {MODELS}")


def generate_model(spec):
    """Draw ``(X, y, true_basis)`` for a model spec; deterministic in the seed."""
    if spec.p < 2:
        raise ValueError(f"models need p >= 2 predictors, got p={spec.p}")
    if spec.n < 1:
        raise ValueError(f"need n >= 1 observations, got n={spec.n}")
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    X = _standard_normal(rng, (spec.n, spec.p))
    eps = spec.noise_sd * _standard_normal(rng, spec.n)
    y = model_response(spec.model_id, X, eps)
    basis = np.zeros((spec.p, 2))
    basis[0, 0] = 1.0
    basis[1, 1] = 1.0
    return X, y, basis


def projection_distance(V1, V2):
    """Frobenius distance between the orthogonal projectors onto two spans."""
    P = []
    for V in (V1, V2):
        V = np.asarray(V, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        Q, R = np.linalg.qr(V)
        if np.abs(np.diag(R)).min() <= 1e-12 * max(np.abs(np.diag(R)).max(), 1e-300):
            raise ValueError("basis columns are linearly dependent")
        P.append(Q @ Q.T)
    return float(np.linalg.norm(P[0] - P[1]))


def _pairwise_euclid(a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    sq = np.sum(a * a, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (a @ a.T)
    return np.sqrt(np.maximum(d2, 0.0))


def _double_center(D):
    row = D.mean(axis=1, keepdims=True)
    col = D.mean(axis=0, keepdims=True)
    return D - row - col + D.mean()


def distance_correlation(y, z):
    """Sample distance correlation (biased V-statistic), in [0, 1]."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    n = y.shape[0] if y.ndim else 0
    if y.ndim not in (1, 2) or n < 2:
        raise ValueError("need at least two observations")
    if z.shape[0] != n:
        raise ValueError("arguments disagree on n")
    A = _double_center(_pairwise_euclid(y))
    B = _double_center(_pairwise_euclid(z))
    dvar_a = float((A * A).mean())
    dvar_b = float((B * B).mean())
    if dvar_a <= 0.0 or dvar_b <= 0.0:
        raise ZeroDistanceVariance("an argument has zero distance variance")
    dcov2 = max(float((A * B).mean()), 0.0)
    return float(np.sqrt(dcov2 / np.sqrt(dvar_a * dvar_b)))


def _resolve_lambda(rule):
    if rule == "paper" or rule is None:
        return None  # engines apply their own 2 n^(2/3) / 2 m^(2/3) default
    lam = float(rule)
    if lam <= 0.0:
        raise ValueError(f"explicit lambda must be positive, got {lam}")
    return lam


def _fit_once(config, X, y, replicate):
    lam = _resolve_lambda(config.lambda_rule)
    solver = SolverConfig(kkt_tol=config.kkt_tol)
    if config.engine == "full":
        return psvm.fit_full(
            X, y, config.R, config.d, lam=lam, variant=config.variant, config=solver
        )
    part = distributed.partition(
        X.shape[0], config.k, seed=config.seed + _PARTITION_SALT + replicate
    )
    if config.engine == "naive":
        return distributed.naive_fit(
            X, y, part, config.R, config.d, lam=lam,
            variant=config.variant, config=solver,
        )
    if config.engine == "refined":
        rconf = distributed.RefinedConfig(
            B=config.B,
            lam=lam,
            bandwidth_rule=config.bandwidth_rule,
            solver=solver,
        )
        return distributed.refined_fit(
            X, y, part, config.R, config.d, config=rconf, variant=config.variant
        )
    raise ValueError(f"unknown engine {config.engine!r}; expected one of {ENGINES}")


def run_experiment(config):
    """Run one experiment cell; returns a single aggregated ReportRow.

    Replicate ``r`` draws its dataset with seed ``config.seed + r``, fits
    with the configured engine (only the fit is timed), and records the
    projector distance to the true basis.
    """
    if config.replicates < 1:
        raise ValueError("need at least one replicate")
    distances = []
    runtimes = []
    critical_paths = []
    dcors = []
    for r in range(config.replicates):
        spec = dataclasses.replace(config.model, seed=config.seed + r)
        X, y, basis = generate_model(spec)
        t0 = time.perf_counter()
        fit = _fit_once(config, X, y, r)
        runtimes.append(time.perf_counter() - t0)
        distances.append(projection_distance(fit.V, basis))
        if fit.critical_path_seconds is not None:
            critical_paths.append(fit.critical_path_seconds)
        if config.compute_dcor:
            dcors.append(distance_correlation(y, X @ fit.V))
    distances = np.asarray(distances)
    sd = float(distances.std(ddof=1)) if len(distances) > 1 else 0.0
    return [
        ReportRow(
            model=config.model.model_id,
            engine=config.engine,
            variant=psvm.canonical_variant(config.variant),
            n=config.model.n,
            p=config.model.p,
            k=config.k,
            B=config.B,
            replicates=config.replicates,
            mean_distance=float(distances.mean()),
            sd_distance=sd,
            mean_runtime_s=float(np.mean(runtimes)) if config.record_runtime else None,
            mean_critical_path_s=(
                float(np.mean(critical_paths))
                if critical_paths and config.record_runtime
                else None
            ),
            mean_dcor=float(np.mean(dcors)) if dcors else None,
            distances=[float(v) for v in distances],
        )
    ]


def fit_loglog_slope(ns, values):
    """Least-squares slope of log(values) against log(ns)."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def scaling_study(
    model_id,
    p,
    n_grid,
    engine,
    replicates,
    variant="PSVM",
    R=5,
    d=2,
    k=1,
    B=3,
    seed=0,
    noise_sd=0.5,
    kkt_tol=1e-6,
):
    """Convergence-rate probe: slope of log mean distance vs log n.

    A root-n-consistent estimator yields a slope near -0.5.  ``n_grid``
    needs at least three points spanning a factor of 8.
    """
    n_grid = sorted(int(n) for n in n_grid)
    if len(n_grid) < 3 or n_grid[-1] < 8 * n_grid[0]:
        raise ValueError("n_grid needs >= 3 points spanning at least 8x")
    means = []
    for n in n_grid:
        config = ExperimentConfig(
            model=ModelSpec(model_id=model_id, n=n, p=p, noise_sd=noise_sd, seed=seed),
            engine=engine,
            variant=variant,
            R=R,
            d=d,
            k=k,
            B=B,
            replicates=replicates,
            seed=seed,
            kkt_tol=kkt_tol,
        )
        means.append(run_experiment(config)[0].mean_distance)
    return fit_loglog_slope(n_grid, means)


def _fmt(value):
    return f"{value:.17g}"


def report_rows_to_csv(rows):
    """Render report rows with the fixed CSV header (deterministic text)."""
    lines = [CSV_HEADER]
    for r in rows:
        runtime = "" if r.mean_runtime_s is None else f"{r.mean_runtime_s:.6f}"
        lines.append(
            f"{r.model},{r.engine},{r.variant},{r.n},{r.p},{r.k},{r.B},"
            f"{r.replicates},{_fmt(r.mean_distance)},{_fmt(r.sd_distance)},"
            f"{runtime}"
        )
    return "\n".join(lines) + "\n"


def write_report(rows, csv_path, configs=None, sidecar_path=None):
    """Write the CSV table plus a JSON sidecar with the full config echo."""
    csv_text = report_rows_to_csv(rows)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    if sidecar_path is not None:
        payload = []
        for i, r in enumerate(rows):
            entry = {
                "row": dataclasses.asdict(r),
            }
            if configs is not None and i < len(configs):
                entry["config"] = dataclasses.asdict(configs[i])
            payload.append(entry)
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return csv_text
