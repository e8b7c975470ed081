"""Command-line entry point: ``dmon-dpr {train,sweep,ttest,inspect}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .data_io import (METRIC_FIELDS, DatasetFormatError, SbmSpec, generate_sbm, load_dataset,
                      summarize, write_results_csv)
from .diversity import feature_richness
from .experiment import (EPSILON_GRID, REFERENCE_SEEDS, SWEEP_PARAMS, WEIGHT_GRID, ConfigError,
                         SeedMismatchError, best_cells, method_name, paired_comparison, run_seeds,
                         sweep_configs)
from .graph import GraphError
from .objective import LossConfig
from .trainer import TrainConfig, TrainingDivergedError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("dmon_dpr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()] if text.strip() else []


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _add_data_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", type=Path, help="dataset directory (edges.tsv, features.tsv, labels.tsv)")
    src.add_argument("--sbm", action="store_true", help="use a generated stochastic block model")
    g = p.add_argument_group("stochastic block model")
    g.add_argument("--sbm-blocks", type=_int_list, default=[100, 100, 100, 100])
    g.add_argument("--sbm-p-in", type=float, default=0.3)
    g.add_argument("--sbm-p-out", type=float, default=0.01)
    g.add_argument("--sbm-features", type=int, default=16)
    g.add_argument("--sbm-mean-sep", type=float, default=2.0)
    g.add_argument("--sbm-noise-sd", type=float, default=1.0)
    g.add_argument("--sbm-seed", type=int, default=0)


def _add_train_args(p: argparse.ArgumentParser) -> None:
    _add_data_args(p)
    p.add_argument("--k", type=int, help="number of clusters (default: number of label classes)")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden", type=int, default=512)
    p.add_argument("--w-dist", type=float, default=0.0)
    p.add_argument("--w-var", type=float, default=0.0)
    p.add_argument("--w-entropy", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-8)
    p.add_argument("--seeds", type=_int_list, default=list(REFERENCE_SEEDS))
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--threads", type=int, default=1, help="parallel seed workers")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmon-dpr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="multi-seed training run")
    _add_train_args(p)

    p = sub.add_parser("sweep", help="one-factor-at-a-time hyperparameter sweep")
    _add_train_args(p)
    p.add_argument("--param", choices=SWEEP_PARAMS + ("all",), default="all")
    p.add_argument("--grid", type=_float_list,
                   help="grid values for --param (default: 10..1e-5 for epsilon, 1,0.1,0.01,0.001 for weights)")

    p = sub.add_parser("ttest", help="seed-paired t-tests between two results CSVs")
    p.add_argument("csv_a", type=Path)
    p.add_argument("csv_b", type=Path)
    p.add_argument("--metric", action="append", choices=METRIC_FIELDS,
                   help="metric to test (repeatable; default: conductance, modularity, nmi, f1)")

    p = sub.add_parser("inspect", help="dataset statistics")
    _add_data_args(p)
    return parser


def _load(args):
    if args.sbm:
        spec = SbmSpec(block_sizes=tuple(args.sbm_blocks), p_in=args.sbm_p_in, p_out=args.sbm_p_out,
                       n_features=args.sbm_features, mean_sep=args.sbm_mean_sep,
                       noise_sd=args.sbm_noise_sd, seed=args.sbm_seed)
        return generate_sbm(spec)
    return load_dataset(args.dataset)


def _train_config(args, dataset) -> TrainConfig:
    k = args.k if args.k is not None else dataset.n_classes
    if k is None:
        raise ConfigError("--k is required when the dataset has no labels")
    if not args.seeds:
        raise ConfigError("--seeds is empty")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    loss = LossConfig(w_dist=args.w_dist, w_var=args.w_var, w_ent=args.w_entropy,
                      epsilon=args.epsilon, delta=args.delta)
    return TrainConfig(n_clusters=k, epochs=args.epochs, lr=args.lr, hidden=args.hidden, loss=loss)


def _fmt(v) -> str:
    return "-" if v is None or (isinstance(v, float) and np.isnan(v)) else f"{v:.4f}"


def cmd_train(args) -> int:
    dataset = _load(args)
    cfg = _train_config(args, dataset)
    results = run_seeds(dataset, cfg, args.seeds, workers=args.threads)
    for r in results:
        loss = " ".join(f"{k}={v:.6f}" for k, v in r.loss.items())
        mets = " ".join(f"{k}={_fmt(r.row[k])}" for k in METRIC_FIELDS)
        print(f"seed={r.row['seed']} method={r.row['method']} loss: {loss}")
        print(f"seed={r.row['seed']} metrics: {mets} sizes={r.cluster_sizes}")
    rows = [r.row for r in results]
    path = args.out / "results.csv"
    write_results_csv(rows, path)
    for m, (mu, sd) in summarize(rows).items():
        print(f"{m}: {mu:.2f} ± {sd:.2f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    dataset = _load(args)
    base = _train_config(args, dataset)
    if args.param == "all":
        if args.grid is not None:
            raise ConfigError("--grid needs a single --param")
        plan = [("epsilon", EPSILON_GRID), ("w_var", WEIGHT_GRID), ("w_entropy", WEIGHT_GRID)]
    else:
        grid = args.grid if args.grid is not None else (EPSILON_GRID if args.param == "epsilon" else WEIGHT_GRID)
        plan = [(args.param, grid)]
    for _, grid in plan:
        if not grid:
            raise ConfigError("sweep grid is empty")

    args.out.mkdir(parents=True, exist_ok=True)
    for param, grid in plan:
        per_seed, cells = [], []
        for value, cfg in sweep_configs(base, param, grid):
            results = run_seeds(dataset, cfg, args.seeds, workers=args.threads)
            rows = [dict(r.row, param=param, value=value) for r in results]
            per_seed += rows
            cell = {"param": param, "value": value, "method": method_name(cfg.loss), "runs": len(rows)}
            for m, (mu, sd) in summarize(rows).items():
                cell[m], cell[m + "_std"] = mu, sd
            cells.append(cell)
            print(f"{param}={value:g}: " + " ".join(f"{m}={_fmt(cell.get(m))}" for m in METRIC_FIELDS[:4]))
        write_results_csv(per_seed, args.out / f"sweep_{param}.csv")
        grid_path = args.out / f"sweep_{param}.grid.csv"
        fields = ["param", "value", "method", "runs"] + [f for m in METRIC_FIELDS for f in (m, m + "_std")]
        with open(grid_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            w.writerows(cells)
        for m, cell in best_cells(cells, METRIC_FIELDS[:4]).items():
            print(f"best {m} for {param}: {cell['value']:g} ({cell[m]:.2f})")
        print(f"wrote {grid_path}")
    return EXIT_OK


def cmd_ttest(args) -> int:
    res = paired_comparison(args.csv_a, args.csv_b, args.metric)
    print("metric\tt\tp")
    for m, (t, p) in res.items():
        print(f"{m}\t{t:.4f}\t{p:.6g}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    ds = _load(args)
    print(f"name\t{ds.name}")
    print(f"nodes\t{ds.graph.n}")
    print(f"edges\t{ds.graph.m}")
    print(f"features\t{ds.X.shape[1]}")
    print(f"classes\t{ds.n_classes if ds.n_classes is not None else '-'}")
    if (ds.X < 0).any():
        print("feature_entropy_bits\t- (negative features)")
    else:
        bits, skipped = feature_richness(ds.X)
        print(f"feature_entropy_bits\t{bits:.4f}")
        if skipped:
            print(f"zero_feature_rows\t{skipped}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "ttest": cmd_ttest, "inspect": cmd_inspect}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SeedMismatchError, GraphError, DatasetFormatError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingDivergedError, ArithmeticError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
