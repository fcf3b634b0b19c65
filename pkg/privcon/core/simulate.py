"""Centralized consensus iteration ``x[k+1] = A x[k]`` and trace utilities."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from loguru import logger

from .constants import TRACE_MAX_ROWS
from .errors import DimensionError
from .exactla import RationalMatrix, RationalVector, vector

EPSILONS = (1e-3, 1e-6, 1e-9)


@dataclass(frozen=True)
class SimulationTrace:
    states: np.ndarray  # (rounds + 1, dim), read-only
    converged: bool
    rounds: int
    final_spread: float
    consensus_value: float | None
    tolerance: float
    mode: str = "matrix"
    exact_states: tuple[RationalVector, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.states.flags.writeable = False
        if self.rounds != len(self.states) - 1:
            raise ValueError("rounds must equal len(states) - 1")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def oscillation_suspected(self) -> bool:
        """Spread stays open while every second state repeats (period 2)."""
        if self.converged or len(self.states) < 3:
            return False
        parity = float(np.max(np.abs(self.states[-1] - self.states[-3])))
        return parity <= self.tolerance and self.final_spread > self.tolerance

    def summary(self) -> str:
        if self.converged:
            return (
                f"[{self.mode}] converged: consensus {self.consensus_value:.6f} "
                f"after {self.rounds} rounds, spread {self.final_spread:.3e}"
            )
        line = f"[{self.mode}] NOT converged after {self.rounds} rounds, spread {self.final_spread:.3e}"
        if self.oscillation_suspected():
            line += " - period-2 oscillation suspected"
        return line

    # ---- export ----
    def _stride(self, max_rows: int | None) -> int:
        if not max_rows:
            return 1
        return max(1, math.ceil(len(self.states) / max_rows))

    def _row_indices(self, max_rows: int | None) -> list[int]:
        idx = list(range(0, len(self.states), self._stride(max_rows)))
        if idx[-1] != len(self.states) - 1:
            idx.append(len(self.states) - 1)
        return idx

    def to_frame(self, max_rows: int | None = TRACE_MAX_ROWS) -> pd.DataFrame:
        idx = self._row_indices(max_rows)
        frame = pd.DataFrame(self.states[idx], columns=[f"state_{i}" for i in range(self.dim)])
        frame.insert(0, "round", idx)
        return frame

    def export_csv(self, path: str | Path, max_rows: int | None = TRACE_MAX_ROWS) -> Path:
        path = Path(path)
        self.to_frame(max_rows).to_csv(path, index=False)
        return path

    def to_dict(self, max_rows: int | None = TRACE_MAX_ROWS) -> dict:
        idx = self._row_indices(max_rows)
        return {
            "mode": self.mode,
            "rounds": self.rounds,
            "converged": self.converged,
            "final_spread": self.final_spread,
            "consensus_value": self.consensus_value,
            "tolerance": self.tolerance,
            "stride": self._stride(max_rows),
            "rows": idx,
            "states": self.states[idx].tolist(),
        }

    def export_json(self, path: str | Path, max_rows: int | None = TRACE_MAX_ROWS) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(max_rows), indent=2) + "\n")
        return path


def spread(x: np.ndarray) -> float:
    return float(np.max(x) - np.min(x))


def make_trace(states: list[np.ndarray], tol: float, mode: str, exact_states=None) -> SimulationTrace:
    arr = np.array(states, dtype=float)
    final = spread(arr[-1])
    converged = final <= tol
    return SimulationTrace(
        states=arr,
        converged=converged,
        rounds=len(arr) - 1,
        final_spread=final,
        consensus_value=float(np.mean(arr[-1])) if converged else None,
        tolerance=tol,
        mode=mode,
        exact_states=exact_states,
    )


def _check_run_args(tol: float, max_rounds: int) -> None:
    if not tol > 0:
        raise ValueError("tolerance must be > 0")
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")


def run_matrix(
    a: RationalMatrix | np.ndarray,
    x0: Sequence,
    tol: float,
    max_rounds: int,
    *,
    exact: bool = False,
) -> SimulationTrace:
    """Iterate until ``max - min <= tol`` or ``max_rounds``.

    ``exact=True`` (rational ``a`` only) steps in Fractions and keeps the
    rational states next to their float images.
    """
    _check_run_args(tol, max_rounds)
    if exact:
        if not isinstance(a, RationalMatrix):
            raise TypeError("exact mode needs a RationalMatrix")
        x_q = vector(x0)
        if len(x_q) != a.cols:
            raise DimensionError(f"x0 of length {len(x_q)} for {a.cols} states")
        exact_states = [x_q]
        states = [np.array([float(v) for v in x_q])]
        for _ in range(max_rounds):
            if spread(states[-1]) <= tol:
                break
            x_q = a.matvec(x_q)
            exact_states.append(x_q)
            states.append(np.array([float(v) for v in x_q]))
        return make_trace(states, tol, "matrix-exact", tuple(exact_states))

    mat = a.to_numpy() if isinstance(a, RationalMatrix) else np.asarray(a, dtype=float)
    x = np.array([float(v) for v in x0], dtype=float)
    if mat.shape != (len(x), len(x)):
        raise DimensionError(f"matrix {mat.shape} vs x0 of length {len(x)}")
    states = [x]
    for _ in range(max_rounds):
        if spread(x) <= tol:
            break
        x = mat @ x
        states.append(x)
    trace = make_trace(states, tol, "matrix")
    logger.debug(trace.summary())
    return trace


@dataclass(frozen=True)
class ConvergenceStats:
    rounds_to: dict[float, int | None]
    max_abs_error: float  # at the last recorded round


def convergence_stats(trace: SimulationTrace, target: float, epsilons: Sequence[float] = EPSILONS) -> ConvergenceStats:
    """First round with every coordinate within ``eps`` of ``target``."""
    if len(trace.states) == 0:
        raise ValueError("empty trace")
    err = np.max(np.abs(trace.states - target), axis=1)
    rounds_to: dict[float, int | None] = {}
    for eps in epsilons:
        hits = np.nonzero(err <= eps)[0]
        rounds_to[eps] = int(hits[0]) if len(hits) else None
    return ConvergenceStats(rounds_to, float(err[-1]))


def compare_traces(t1: SimulationTrace, t2: SimulationTrace) -> float:
    """Max coordinate deviation over the rounds both traces cover."""
    k = min(len(t1.states), len(t2.states))
    return float(np.max(np.abs(t1.states[:k] - t2.states[:k])))


def conserved_quantity(trace: SimulationTrace, v_left: Sequence[Fraction]) -> np.ndarray:
    """``v^T x[k]`` per round."""
    v = np.array([float(x) for x in v_left])
    return trace.states @ v
