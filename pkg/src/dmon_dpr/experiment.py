"""Multi-seed runs, one-factor-at-a-time sweeps and seed-paired comparisons."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .data_io import Dataset, read_results_csv
from .diversity import diversity_report
from .metrics import evaluate
from .objective import LossConfig
from .stats import paired_ttest
from .trainer import TrainConfig, train

logger = logging.getLogger(__name__)

REFERENCE_SEEDS = (993, 550, 243, 16, 716, 383, 277, 274, 188, 796)
EPSILON_GRID = (10.0, 1.0, 0.1, 0.01, 0.001, 0.0001, 0.00001)
WEIGHT_GRID = (1.0, 0.1, 0.01, 0.001)
SWEEP_PARAMS = ("epsilon", "w_var", "w_entropy")
# conductance is the one metric where lower is better
LOWER_IS_BETTER = {"conductance"}


class ConfigError(ValueError):
    pass


class SeedMismatchError(ValueError):
    pass


def method_name(loss: LossConfig) -> str:
    tags = "".join(t for t, w in (("D", loss.w_dist), ("V", loss.w_var), ("E", loss.w_ent)) if w)
    return f"DMoN-DPR({tags})" if tags else "DMoN"


@dataclass
class SeedResult:
    row: dict
    loss: dict
    cluster_sizes: list


def run_seed(dataset: Dataset, cfg: TrainConfig, threads: int = 1) -> SeedResult:
    with threadpool_limits(limits=threads):
        _, C, history = train(dataset, cfg)
    p = np.argmax(C, axis=1)
    rep = evaluate(p, dataset.graph, dataset.labels)
    div = diversity_report(C, dataset.X, p, seed=cfg.seed)
    row = {"seed": cfg.seed, "method": method_name(cfg.loss)}
    row.update(rep.as_dict())
    row.update(div.as_dict())
    row.update({"k": cfg.n_clusters, "epochs": cfg.epochs, "lr": cfg.lr, "hidden": cfg.hidden,
                "w_dist": cfg.loss.w_dist, "w_var": cfg.loss.w_var, "w_entropy": cfg.loss.w_ent,
                "epsilon": cfg.loss.epsilon, "delta": cfg.loss.delta})
    return SeedResult(row=row, loss=history.losses[-1].as_dict(), cluster_sizes=rep.cluster_sizes)


def _run_one(args):
    dataset, cfg = args
    return run_seed(dataset, cfg)


def run_seeds(dataset: Dataset, cfg: TrainConfig, seeds: Sequence[int], workers: int = 1) -> list[SeedResult]:
    """Train once per seed; results come back in seed-list order."""
    if not seeds:
        raise ConfigError("at least one seed is required")
    jobs = [(dataset, replace(cfg, seed=int(s))) for s in seeds]
    if workers <= 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def sweep_configs(base: TrainConfig, param: str, grid: Sequence[float]) -> list[tuple[float, TrainConfig]]:
    """One-factor-at-a-time cells: the swept term alone, the other two weights zero."""
    if not grid:
        raise ConfigError("sweep grid is empty")
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {SWEEP_PARAMS}")
    cells = []
    for v in grid:
        v = float(v)
        if param == "epsilon":
            loss = LossConfig(w_dist=1.0, epsilon=v, delta=base.loss.delta)
        elif param == "w_var":
            loss = LossConfig(w_var=v, epsilon=base.loss.epsilon, delta=base.loss.delta)
        else:
            loss = LossConfig(w_ent=v, epsilon=base.loss.epsilon, delta=base.loss.delta)
        cells.append((v, replace(base, loss=loss)))
    return cells


def best_cells(grid_rows: Sequence[dict], metrics: Sequence[str]) -> dict[str, dict]:
    """Best grid cell per metric (lowest conductance, highest for the rest)."""
    out = {}
    for m in metrics:
        rows = [r for r in grid_rows if r.get(m) is not None and np.isfinite(r[m])]
        if not rows:
            continue
        pick = min if m in LOWER_IS_BETTER else max
        out[m] = pick(rows, key=lambda r: r[m])
    return out


def paired_comparison(path_a, path_b, metrics: Sequence[str] | None = None) -> dict[str, tuple[float, float]]:
    """Seed-joined paired t-tests between two results CSVs."""
    rows_a = {r["seed"]: r for r in read_results_csv(path_a)}
    rows_b = {r["seed"]: r for r in read_results_csv(path_b)}
    if set(rows_a) != set(rows_b):
        only_a = sorted(set(rows_a) - set(rows_b))
        only_b = sorted(set(rows_b) - set(rows_a))
        raise SeedMismatchError(f"seed sets differ (only in first: {only_a}, only in second: {only_b})")
    seeds = sorted(rows_a)
    if len(seeds) < 2:
        raise SeedMismatchError("need at least 2 paired seeds")
    if metrics is None:
        metrics = [m for m in ("conductance", "modularity", "nmi", "f1")
                   if all(rows_a[s].get(m) is not None and rows_b[s].get(m) is not None for s in seeds)]
    out = {}
    for m in metrics:
        try:
            a = [rows_a[s][m] for s in seeds]
            b = [rows_b[s][m] for s in seeds]
        except KeyError:
            raise ConfigError(f"metric {m!r} missing from a results file") from None
        if any(v is None for v in a + b):
            raise ConfigError(f"metric {m!r} has blank entries")
        out[m] = paired_ttest(a, b)
    return out
