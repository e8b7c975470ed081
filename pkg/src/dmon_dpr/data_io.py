"""Dataset directories, a planted-partition generator and results CSVs.

A dataset directory holds three tab-separated text files:

``edges.tsv``
    one ``u<TAB>v`` pair per line, 0-based node ids;
``features.tsv``
    one node per line, tab-separated decimals (the line count defines n);
``labels.tsv`` (optional)
    one integer class id per line.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import SparseGraph, build_graph


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    graph: SparseGraph
    X: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        if self.X.shape[0] != self.graph.n:
            raise DatasetFormatError(f"feature matrix has {self.X.shape[0]} rows, graph has {self.graph.n} nodes")
        if self.labels is not None:
            if len(self.labels) != self.graph.n:
                raise DatasetFormatError(f"{len(self.labels)} labels for {self.graph.n} nodes")

    @property
    def n_classes(self) -> int | None:
        return None if self.labels is None else int(len(np.unique(self.labels)))

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DatasetFormatError(f"dataset {self.name!r} has no labels")
        return self.labels


@dataclass(frozen=True)
class SbmSpec:
    block_sizes: tuple[int, ...] = (100, 100, 100, 100)
    p_in: float = 0.3
    p_out: float = 0.01
    n_features: int = 16
    mean_sep: float = 2.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))
        if not self.block_sizes or min(self.block_sizes) < 1:
            raise ValueError("block sizes must all be >= 1")
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={self.p_in}, p_out={self.p_out}")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")


def generate_sbm(spec: SbmSpec) -> Dataset:
    """Sample a stochastic block model with Gaussian node features.

    Block ``b`` gets mean ``mean_sep * e_(b mod F)``; features are that mean
    plus i.i.d. ``N(0, noise_sd^2)`` noise. Labels are block ids.
    """
    rng = np.random.default_rng(spec.seed)
    sizes = np.asarray(spec.block_sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = int(sizes.sum())

    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, spec.p_in, spec.p_out)
    keep = rng.random(len(iu)) < prob
    graph = build_graph(np.column_stack([iu[keep], ju[keep]]), n)

    means = np.zeros((len(sizes), spec.n_features))
    means[np.arange(len(sizes)), np.arange(len(sizes)) % spec.n_features] = spec.mean_sep
    X = means[labels] + rng.normal(0.0, spec.noise_sd, size=(n, spec.n_features))
    return Dataset(graph=graph, X=X, labels=labels, name=f"sbm-{spec.seed}")


def expected_sbm_edges(spec: SbmSpec) -> tuple[float, float]:
    """Mean and standard deviation of the SBM edge count."""
    s = np.asarray(spec.block_sizes, dtype=float)
    n_in = float((s * (s - 1) / 2).sum())
    n_out = float((s.sum() ** 2 - (s ** 2).sum()) / 2)
    mean = n_in * spec.p_in + n_out * spec.p_out
    var = n_in * spec.p_in * (1 - spec.p_in) + n_out * spec.p_out * (1 - spec.p_out)
    return mean, math.sqrt(var)


def _read_rows(path: Path) -> Iterable[tuple[int, list[str]]]:
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line and not line.startswith("#"):
                yield lineno, line.split("\t")


def load_dataset(directory: str | Path) -> Dataset:
    d = Path(directory)
    for required in ("edges.tsv", "features.tsv"):
        if not (d / required).is_file():
            raise FileNotFoundError(f"{d / required} not found")

    rows = []
    width = None
    for lineno, parts in _read_rows(d / "features.tsv"):
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DatasetFormatError(f"features.tsv:{lineno}: non-numeric value") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise DatasetFormatError(f"features.tsv:{lineno}: expected {width} values, got {len(vals)}")
        rows.append(vals)
    n = len(rows)
    X = np.array(rows, dtype=np.float64).reshape(n, width or 0)

    edges = []
    for lineno, parts in _read_rows(d / "edges.tsv"):
        if len(parts) != 2:
            raise DatasetFormatError(f"edges.tsv:{lineno}: expected 2 fields, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise DatasetFormatError(f"edges.tsv:{lineno}: node ids must be integers") from None
        if not (0 <= u < n and 0 <= v < n):
            raise DatasetFormatError(f"edges.tsv:{lineno}: node id out of range [0, {n})")
        if u == v:
            raise DatasetFormatError(f"edges.tsv:{lineno}: self-loop on node {u}")
        edges.append((u, v))
    graph = build_graph(np.array(edges, dtype=np.int64).reshape(-1, 2), n)

    labels = None
    if (d / "labels.tsv").is_file():
        lab = []
        for lineno, parts in _read_rows(d / "labels.tsv"):
            try:
                lab.append(int(parts[0]))
            except ValueError:
                raise DatasetFormatError(f"labels.tsv:{lineno}: label must be an integer") from None
        if len(lab) != n:
            raise DatasetFormatError(f"labels.tsv has {len(lab)} entries, features.tsv has {n} rows")
        labels = np.array(lab, dtype=np.int64)
        if labels.min() < 0 or len(np.unique(labels)) != labels.max() + 1:
            raise DatasetFormatError("label ids must be dense in [0, |Y|)")
    return Dataset(graph=graph, X=X, labels=labels, name=d.name)


def save_dataset(ds: Dataset, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    np.savetxt(d / "edges.tsv", ds.graph.edges(), fmt="%d", delimiter="\t")
    np.savetxt(d / "features.tsv", ds.X, fmt="%.17g", delimiter="\t")
    if ds.labels is not None:
        np.savetxt(d / "labels.tsv", ds.labels, fmt="%d")
    elif (d / "labels.tsv").exists():
        (d / "labels.tsv").unlink()


RESULT_FIELDS = ("seed", "method", "conductance", "modularity", "nmi", "f1",
                 "aicd", "micd", "aicv", "silhouette")
METRIC_FIELDS = RESULT_FIELDS[2:]


def _fmt(value, digits: int | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{value:.{digits}f}" if digits is not None else repr(float(value))
    return str(value)


def _write(path: Path, rows: Sequence[dict], fields: Sequence[str], digits: int | None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(f), digits if f in METRIC_FIELDS else None) for f in fields])


def full_precision_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".full.csv")


def summary_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".summary.csv")


def summarize(rows: Sequence[dict], fields: Sequence[str] = METRIC_FIELDS) -> dict[str, tuple[float, float]]:
    """Mean and sample standard deviation per metric column."""
    out = {}
    for f in fields:
        vals = np.array([r[f] for r in rows if r.get(f) is not None], dtype=float)
        vals = vals[~np.isnan(vals)]
        if len(vals) == 0:
            continue
        sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out[f] = (float(vals.mean()), sd)
    return out


def write_results_csv(rows: Sequence[dict], path: str | Path) -> list[str]:
    """Write per-seed results three ways.

    ``path`` gets metrics at two decimals (header plus one line per row);
    ``<stem>.full.csv`` holds the same rows at full precision and
    ``<stem>.summary.csv`` holds mean and sample std per metric.
    Config columns are any keys beyond the fixed result fields.
    Returns the column list used.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    extra = []
    for r in rows:
        extra += [k for k in r if k not in RESULT_FIELDS and k not in extra]
    fields = list(RESULT_FIELDS) + extra
    _write(path, rows, fields, 2)
    _write(full_precision_path(path), rows, fields, None)

    summ = summarize(rows)
    with open(summary_path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "mean", "std", "mean_pm_std"])
        for f, (mu, sd) in summ.items():
            w.writerow([f, repr(mu), repr(sd), f"{mu:.2f} ± {sd:.2f}"])
    return fields


def read_results_csv(path: str | Path) -> list[dict]:
    """Read a results CSV; numeric metric columns become floats (blank -> None)."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec: dict = {}
            for k, v in row.items():
                if k == "seed":
                    rec[k] = int(v)
                elif k in METRIC_FIELDS:
                    rec[k] = float(v) if v not in ("", None) else None
                else:
                    rec[k] = v
            out.append(rec)
    return out
