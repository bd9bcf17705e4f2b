"""Runtime scaling harness: time ``evolve`` on homogeneous random graphs."""
from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .core import RunConfig, evolve
from .synth import homogeneous_random_graph

logger = logging.getLogger(__name__)


@dataclass
class BenchResult:
    rows: list[dict] = field(default_factory=list)
    slope: float = float("nan")
    intercept: float = float("nan")
    r_squared: float = float("nan")

    def to_csv(self) -> str:
        out = ["n,m,seed,seconds,status"]
        for row in self.rows:
            secs = "" if row["seconds"] is None else f"{row['seconds']:.6f}"
            out.append(f"{row['n']},{row['m']},{row['seed']},{secs},{row['status']}")
        return "\n".join(out) + "\n"

    def summary(self) -> str:
        return (
            f"fit seconds = {self.slope:.6e} * m + {self.intercept:.6e}; "
            f"R^2 = {self.r_squared:.4f} over {len(self.rungs())} rungs"
        )

    def rungs(self) -> list[tuple[int, float]]:
        """Median seconds per edge count over successful runs."""
        by_m: dict[int, list[float]] = {}
        for row in self.rows:
            if row["status"] == "ok":
                by_m.setdefault(row["m"], []).append(row["seconds"])
        return [(m, statistics.median(v)) for m, v in sorted(by_m.items())]


def _warm_up() -> None:
    evolve(homogeneous_random_graph(50, 4, seed=0), RunConfig(2, 0))


def time_evolve(n: int, mean_degree: float, T: int, seed: int) -> tuple[int, float]:
    """Generate one graph and return ``(m, wall seconds of evolve alone)``."""
    graph = homogeneous_random_graph(n, mean_degree, seed=seed)
    start = time.perf_counter()
    evolve(graph, RunConfig(T, seed))
    return graph.m, time.perf_counter() - start


def run_bench(
    sizes: Sequence[int], mean_degree: float = 10.0, T: int = 100, seeds: Sequence[int] = (0,)
) -> BenchResult:
    """Time every ``(n, seed)`` rung and fit seconds against edge count.

    A rung that runs out of memory is recorded as failed and skipped.
    """
    if len(sizes) < 4:
        raise ValueError("the size ladder needs at least 4 rungs")
    _warm_up()
    result = BenchResult()
    for n in sizes:
        for seed in seeds:
            m = int(round(n * mean_degree / 2))
            try:
                m, secs = time_evolve(n, mean_degree, T, seed)
                result.rows.append(dict(n=n, m=m, seed=seed, seconds=secs, status="ok"))
                logger.info("n=%d m=%d seed=%d: %.3fs", n, m, seed, secs)
            except MemoryError:
                result.rows.append(dict(n=n, m=m, seed=seed, seconds=None, status="out-of-memory"))
                logger.warning("n=%d: out of memory, rung skipped", n)
    pts = result.rungs()
    if len(pts) >= 2:
        ms, secs = np.array(pts, dtype=float).T
        fit = stats.linregress(ms, secs)
        result.slope, result.intercept, result.r_squared = fit.slope, fit.intercept, fit.rvalue**2
    return result


def sizes_for_edges(edge_counts: Sequence[int], mean_degree: float) -> list[int]:
    return [int(round(2 * m / mean_degree)) for m in edge_counts]
