"""Command-line interface.

Subcommands: ``simulate`` (write a synthetic dataset), ``fit`` (estimate a
basis from a CSV dataset), ``bench`` (run experiment cells from a JSON
config into a CSV report), ``compare`` (projector distance between two
basis files).  Exit codes: 0 success, 2 invalid configuration or usage,
3 numeric failure (singular or degenerate data); errors are written to
stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import bench, distributed, psvm
from .errors import DPSVMError
from .solver import SolverConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fail(command, error, code):
    payload = {
        "command": command,
        "error": type(error).__name__,
        "message": str(error),
    }
    print(json.dumps(payload), file=sys.stderr)
    return code


def _write_matrix(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        for row in A:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def _read_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def _write_dataset(path, X, y):
    p = X.shape[1]
    header = "y," + ",".join(f"x{j + 1}" for j in range(p))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(X.shape[0]):
            fh.write(f"{y[i]:.17g},")
            fh.write(",".join(f"{v:.17g}" for v in X[i]))
            fh.write("\n")


def _read_dataset(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if len(header) < 2 or header[0] != "y":
        raise ValueError(f"expected header 'y,x1,...', got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1:], data[:, 0]


def _cmd_simulate(args):
    spec = bench.ModelSpec(
        model_id=args.model, n=args.n, p=args.p, seed=args.seed
    )
    X, y, _ = bench.generate_model(spec)
    _write_dataset(args.out, X, y)
    print(f"wrote {args.n} x {args.p} model-{args.model} dataset to {args.out}")
    return EXIT_OK


def _cmd_fit(args):
    X, y = _read_dataset(args.data)
    variant = args.variant.upper()
    solver = SolverConfig()
    if args.engine == "full":
        fit = psvm.fit_full(
            X, y, args.slices, args.dim, variant=variant, config=solver
        )
    else:
        part = distributed.partition(X.shape[0], args.k, seed=args.seed)
        if args.engine == "naive":
            fit = distributed.naive_fit(
                X, y, part, args.slices, args.dim, variant=variant, config=solver
            )
        else:
            rule = "sec6" if args.bandwidth_rule == "sec6" else "assumption7"
            rconf = distributed.RefinedConfig(
                B=args.iters, bandwidth_rule=rule, solver=solver
            )
            fit = distributed.refined_fit(
                X, y, part, args.slices, args.dim, config=rconf, variant=variant
            )
    _write_matrix(args.out_basis, fit.V)
    _write_matrix(args.out_eigs, fit.eigenvalues[:, None])
    top = ", ".join(f"{v:.4g}" for v in fit.eigenvalues[: min(5, len(fit.eigenvalues))])
    print(
        f"{args.engine} {variant} fit in {fit.timing_seconds:.3f}s; "
        f"top eigenvalues: {top}"
    )
    return EXIT_OK


def _experiment_config(raw):
    if "model" not in raw:
        raise ValueError("config entry is missing the 'model' block")
    model_fields = {f.name for f in dataclasses.fields(bench.ModelSpec)}
    unknown = set(raw["model"]) - model_fields
    if unknown:
        raise ValueError(f"unknown model fields: {sorted(unknown)}")
    model = bench.ModelSpec(**raw["model"])
    config_fields = {f.name for f in dataclasses.fields(bench.ExperimentConfig)}
    unknown = set(raw) - config_fields
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    kwargs = {k: v for k, v in raw.items() if k != "model"}
    config = bench.ExperimentConfig(model=model, **kwargs)
    if config.engine not in bench.ENGINES:
        raise ValueError(f"unknown engine {config.engine!r}")
    psvm.canonical_variant(config.variant)
    return config


def _cmd_bench(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = [raw]
    configs = [_experiment_config(entry) for entry in raw]
    rows = []
    for config in configs:
        rows.extend(bench.run_experiment(config))
    sidecar = args.sidecar
    if sidecar is None:
        sidecar = args.out + ".json" if not args.out.endswith(".csv") else args.out[:-4] + ".json"
    bench.write_report(rows, args.out, configs=configs, sidecar_path=sidecar)
    print(f"wrote {len(rows)} row(s) to {args.out} (sidecar {sidecar})")
    return EXIT_OK


def _cmd_compare(args):
    A = _read_matrix(args.basis_a)
    B = _read_matrix(args.basis_b)
    print(f"{bench.projection_distance(A, B):.17g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dpsvm",
        description="Principal (weighted) SVM sufficient dimension reduction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset as CSV")
    p.add_argument("--model", required=True, choices=list(bench.MODELS))
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--p", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a central-subspace basis from a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--engine", required=True, choices=list(bench.ENGINES))
    p.add_argument("--variant", required=True, choices=["psvm", "wpsvm"])
    p.add_argument("--slices", required=True, type=int)
    p.add_argument("--dim", required=True, type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument(
        "--bandwidth-rule", choices=["sec6", "assumption7"], default="sec6"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-basis", required=True)
    p.add_argument("--out-eigs", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("bench", help="run experiment cells from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sidecar", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("compare", help="projector distance between two basis files")
    p.add_argument("--basis-a", required=True)
    p.add_argument("--basis-b", required=True)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DPSVMError as exc:
        return _fail(args.command, exc, EXIT_NUMERIC)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        return _fail(args.command, exc, EXIT_CONFIG)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
