"""Timing workload for the reversible 5N construction."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd
from loguru import logger

from .augment import SplitChoice, solve_p1d
from .errors import PreconditionError
from .netgraph import random_reversible_graph, to_matrix

DEFAULT_SIZES = (16, 32, 64, 128, 256, 512)


@dataclass
class BenchConfig:
    sizes: tuple[int, ...] = DEFAULT_SIZES
    seed: int = 0
    repeats: int = 3

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        if not self.sizes:
            raise ValueError("bench needs at least one size")
        if min(self.sizes) < 3:
            raise PreconditionError("A2: at least three agents", f"size {min(self.sizes)} below 3")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


@dataclass
class BenchResult:
    table: pd.DataFrame  # columns: N, edges, seconds
    slope: float | None = None
    config: BenchConfig = field(default_factory=BenchConfig)

    def summary(self) -> str:
        lines = [f"{int(r.N):>6}  {r.seconds:.4f}s" for r in self.table.itertuples()]
        if self.slope is None:
            lines.append("slope: n/a (single size)")
        else:
            lines.append(f"log-log slope: {self.slope:.3f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "seed": self.config.seed,
            "rows": self.table.to_dict(orient="records"),
            "slope": self.slope,
        }


def fit_slope(sizes, seconds) -> float | None:
    """Slope of ``log(seconds)`` against ``log(N)``; ``None`` below two sizes."""
    if len(set(sizes)) < 2:
        return None
    coeffs = np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(np.asarray(seconds, dtype=float)), 1)
    return float(coeffs[0])


def run_bench(config: BenchConfig | None = None) -> BenchResult:
    config = config or BenchConfig()
    rows = []
    for n in config.sizes:
        rng = np.random.default_rng([config.seed, n])
        g = random_reversible_graph(n, rng)
        a = to_matrix(g)
        x0 = [Fraction(int(v), 100) for v in rng.integers(1, 100, size=n)]
        split = SplitChoice.default(n, 4)
        best = float("inf")
        for _ in range(config.repeats):
            t0 = time.perf_counter()
            solve_p1d(a, x0, split)
            best = min(best, time.perf_counter() - t0)
        rows.append({"N": n, "edges": len(g.edges), "seconds": best})
        logger.debug(f"bench N={n}: {best:.4f}s")
    table = pd.DataFrame(rows, columns=["N", "edges", "seconds"])
    slope = fit_slope(table["N"].tolist(), table["seconds"].tolist())
    logger.info(f"bench sizes={list(config.sizes)} slope={slope}")
    return BenchResult(table, slope, config)
