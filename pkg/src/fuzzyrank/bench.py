"""Index-time scaling benchmark over synthetic corpora."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .pipeline import Pipeline
from .rank import bm25_build
from .synth import synthetic_corpus

log = logging.getLogger(__name__)

BENCH_COLUMNS = ("size", "wall_time_s", "tag_s", "associate_s", "score_s", "aggregate_s", "bm25_s", "workers")


@dataclass(frozen=True)
class BenchRow:
    size: int
    wall_time_s: float
    tag_s: float
    associate_s: float
    score_s: float
    aggregate_s: float
    bm25_s: float
    workers: int


@dataclass(frozen=True)
class BenchResult:
    rows: tuple[BenchRow, ...]
    slope: float
    intercept: float
    r2: float | None


def linear_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float | None]:
    """Least-squares line through (x, y) and its coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.ptp(x) == 0:
        return 0.0, float(y.mean()) if len(y) else 0.0, None
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _time_index(pipeline: Pipeline, corpus, threads: int) -> BenchRow:
    t0 = time.perf_counter()
    res = pipeline.index_corpus(corpus, threads=threads)
    t1 = time.perf_counter()
    docs = sorted(corpus.entity_texts().items())
    if docs:
        bm25_build(docs)
    t2 = time.perf_counter()
    tm = res.timings
    return BenchRow(len(corpus), t2 - t0, tm["tag"], tm["associate"], tm["score"], tm["aggregate"],
                    t2 - t1, min(threads, len(corpus)))


def run_bench(
    pipeline: Pipeline,
    sizes: Sequence[int],
    *,
    seed: int = 0,
    threads: int = 1,
    repeats: int = 3,
    max_size: int = 200_000,
    n_entities: int = 20,
) -> BenchResult:
    """Time indexing at each corpus size; each row keeps the fastest of ``repeats`` runs."""
    # compile kernels before timing
    pipeline.index_corpus(synthetic_corpus(5, n_entities=2, seed=seed))
    rows = []
    for size in sizes:
        if size > max_size:
            log.warning("skipping size %d above cap %d", size, max_size)
            continue
        corpus = synthetic_corpus(size, n_entities=n_entities, seed=seed + size)
        best = min((_time_index(pipeline, corpus, threads) for _ in range(max(1, repeats))),
                   key=lambda r: r.wall_time_s)
        log.info("size %d: %.3fs", size, best.wall_time_s)
        rows.append(best)
    slope, intercept, r2 = linear_fit([r.size for r in rows], [r.wall_time_s for r in rows])
    return BenchResult(tuple(rows), slope, intercept, r2)


def write_bench_csv(result: BenchResult, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in result.rows:
            w.writerow([r.size] + [f"{getattr(r, c):.6f}" for c in BENCH_COLUMNS[1:-1]] + [r.workers])
