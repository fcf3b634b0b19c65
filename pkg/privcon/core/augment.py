"""Augmented consensus networks.

Each original agent ``i`` gets a small private gadget of extra states wired
only to itself.  The builders return an :class:`AugmentedSystem` bundling the
augmented matrix ``ap``, the index map (agent -> gadget state indices), the
left unit eigenvector and the encoded initial state.

Layout: original agents keep indices ``0..N-1``; agent ``i``'s gadget occupies
``N + d*i .. N + d*i + d - 1`` where ``d`` is the gadget width of the kind.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from .constants import ALG1_DENOMINATOR, ALG1_MAX_RETRIES, ALG1_NUMERATOR_MAX, SPLIT_MAX_DENOMINATOR
from .errors import DimensionError, EigenError, FormatError, PreconditionError, PrivconError, SplitError
from .exactla import (
    RationalMatrix,
    RationalVector,
    format_rational,
    left_eigenvector_unit,
    parse_rational,
    rationalize,
    to_rational,
    vector,
)
from .netgraph import (
    WeightedDigraph,
    from_matrix,
    graph_from_dict,
    graph_to_dict,
    is_bidirected,
    is_row_stochastic,
    is_strongly_connected,
    reversibility_vector,
    to_matrix,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class AugmentationKind(str, Enum):
    RAW = "raw"
    ALG1_3N = "alg1"
    ALG2_4N = "alg2"
    ALG3_5N = "p1d"

    @property
    def aug_per_agent(self) -> int:
        return {"raw": 0, "alg1": 2, "alg2": 3, "p1d": 4}[self.value]


# 4-state reversible gadget: agent row, then rows z1..z4 (columns: agent, z1..z4)
P1D_AGENT_ROW = (Fraction(1, 12), Fraction(1, 8), Fraction(1, 4), Fraction(1, 24))
P1D_GADGET_ROWS = (
    (Fraction(1, 11), _ZERO, Fraction(3, 22), Fraction(1, 11), Fraction(15, 22)),
    (Fraction(1, 2), Fraction(1, 2), _ZERO, _ZERO, _ZERO),
    (Fraction(3, 4), Fraction(1, 4), _ZERO, _ZERO, _ZERO),
    (Fraction(1, 16), Fraction(15, 16), _ZERO, _ZERO, _ZERO),
)
# s_z / s_i for z1..z4
P1D_S_RATIOS = (Fraction(11, 12), Fraction(1, 4), Fraction(1, 3), Fraction(2, 3))


# ---------------- split ---------------- #


@dataclass(frozen=True)
class SplitChoice:
    """Per-agent positive weights an agent spreads its value over its gadget."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        clean = tuple(tuple(to_rational(x) for x in agent) for agent in self.values)
        if not clean or any(len(agent) != len(clean[0]) for agent in clean):
            raise SplitError("split needs the same number of entries for every agent")
        if any(x <= 0 for agent in clean for x in agent):
            raise SplitError("split not positive")
        object.__setattr__(self, "values", clean)

    @property
    def width(self) -> int:
        return len(self.values[0])

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> tuple[Fraction, ...]:
        return self.values[i]

    @classmethod
    def default(cls, n: int, width: int) -> "SplitChoice":
        # proportional to 1, 2, ..., width: unequal and strictly positive
        return cls(tuple(tuple(Fraction(k) for k in range(1, width + 1)) for _ in range(n)))

    @classmethod
    def from_text(cls, text: str) -> "SplitChoice":
        """``"1,2,3;2,3,4"`` - agents separated by ``;``."""
        try:
            return cls(tuple(
                tuple(parse_rational(x) for x in chunk.split(","))
                for chunk in text.strip().split(";") if chunk.strip()
            ))
        except FormatError as exc:
            raise SplitError(f"bad split spec {text!r}: {exc}") from exc

    def check(self, n: int, width: int) -> None:
        if len(self) != n:
            raise SplitError(f"split covers {len(self)} agents, graph has {n}")
        if self.width != width:
            raise SplitError(f"split width {self.width}, gadget needs {width}")


# ---------------- system ---------------- #


@dataclass(frozen=True)
class AugmentedSystem:
    original: WeightedDigraph
    kind: AugmentationKind
    ap: RationalMatrix
    index_map: tuple[tuple[int, ...], ...]
    v_left: RationalVector | None = None
    x_tilde0: RationalVector | None = None
    nonpositive_agents: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        kind = AugmentationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        n = self.original.node_count
        dim = (1 + kind.aug_per_agent) * n
        if self.ap.shape != (dim, dim):
            raise DimensionError(f"{kind.value}: ap is {self.ap.shape}, expected {dim}x{dim}")
        if len(self.index_map) != n or any(len(ix) != kind.aug_per_agent for ix in self.index_map):
            raise DimensionError("index_map does not match the gadget width")
        flat = sorted(k for ix in self.index_map for k in ix)
        if flat != list(range(n, dim)):
            raise DimensionError("index_map must partition the gadget indices")
        for name in ("v_left", "x_tilde0"):
            vec = getattr(self, name)
            if vec is not None:
                if len(vec) != dim:
                    raise DimensionError(f"{name} has length {len(vec)}, expected {dim}")
                object.__setattr__(self, name, vector(vec))
        if kind in (AugmentationKind.ALG2_4N, AugmentationKind.ALG3_5N) and not is_row_stochastic(self.ap):
            raise PrivconError(f"{kind.value}: ap is not row-stochastic")
        if kind is AugmentationKind.ALG3_5N and self.v_left is not None:
            rows = self.ap.nonzero_rows
            v = self.v_left
            for i, j, a in self.ap.nonzero_items():
                if v[i] * a != v[j] * rows[j][i]:
                    raise PrivconError(f"p1d: detailed balance fails on ({i}, {j})")

    @property
    def n_original(self) -> int:
        return self.original.node_count

    @property
    def dim(self) -> int:
        return self.ap.rows

    def state_indices(self, agent: int) -> tuple[int, ...]:
        """Agent's original index followed by its gadget indices."""
        return (agent, *self.index_map[agent])

    def owner_of(self, index: int) -> int:
        if index < self.n_original:
            return index
        return (index - self.n_original) // self.kind.aug_per_agent

    # ---- JSON ----
    def to_dict(self) -> dict:
        def fmt(vec):
            return None if vec is None else [format_rational(x) for x in vec]

        return {
            "kind": self.kind.value,
            "N": self.n_original,
            "dim": self.dim,
            "index_map": [list(ix) for ix in self.index_map],
            "ap": [[format_rational(x) for x in self.ap.row(i)] for i in range(self.dim)],
            "v_left": fmt(self.v_left),
            "x_tilde0": fmt(self.x_tilde0),
            "original": graph_to_dict(self.original),
            "nonpositive_agents": list(self.nonpositive_agents),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentedSystem":
        try:
            ap = RationalMatrix.from_rows([[parse_rational(x) for x in row] for row in data["ap"]])
            system = cls(
                original=graph_from_dict(data["original"]),
                kind=AugmentationKind(data["kind"]),
                ap=ap,
                index_map=tuple(tuple(int(k) for k in ix) for ix in data["index_map"]),
                v_left=None if data.get("v_left") is None else vector(data["v_left"]),
                x_tilde0=None if data.get("x_tilde0") is None else vector(data["x_tilde0"]),
                nonpositive_agents=tuple(data.get("nonpositive_agents", ())),
            )
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            # PrivconError is a ValueError: a ragged ``ap`` is a file problem too
            raise FormatError(f"bad system JSON: {exc}") from exc
        if int(data.get("N", system.n_original)) != system.n_original:
            raise FormatError("N does not match the original graph")
        return system

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path: str | Path) -> "AugmentedSystem":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        return cls.from_dict(data)


def _index_map(n: int, width: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(n + width * i + k for k in range(width)) for i in range(n))


def check_network(g: WeightedDigraph, min_agents: int = 3) -> None:
    """Raise the algorithm preconditions on agent count and strong connectivity."""
    if g.node_count < min_agents:
        raise PreconditionError("A2: at least three agents", f"fewer than {min_agents} agents")
    if not is_strongly_connected(g):
        raise PreconditionError("A2: strongly connected", "not strongly connected")


def _check_x0(x0, n: int) -> RationalVector:
    x0 = vector(x0)
    if len(x0) != n:
        raise DimensionError(f"x0 has {len(x0)} entries, network has {n} agents")
    return x0


def _normalize_rows(values: dict[tuple[int, int], Fraction], dim: int) -> dict[tuple[int, int], Fraction]:
    totals = [_ZERO] * dim
    for (i, _), v in values.items():
        totals[i] += v
    return {(i, j): v / totals[i] for (i, j), v in values.items()}


def wrap_raw(g: WeightedDigraph, x0=None) -> AugmentedSystem:
    """The un-augmented network as a system (no gadget)."""
    a = to_matrix(g)
    try:
        v_left = left_eigenvector_unit(a)
    except EigenError:
        v_left = None
    x = None if x0 is None else _check_x0(x0, g.node_count)
    return AugmentedSystem(g, AugmentationKind.RAW, a, tuple(() for _ in range(g.node_count)), v_left, x)


# ---------------- Alg1: two states per agent ---------------- #


def _sample_weight(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(1, ALG1_NUMERATOR_MAX + 1)), ALG1_DENOMINATOR)


def _sample_distinct_pair(rng: np.random.Generator) -> tuple[Fraction, Fraction]:
    for _ in range(ALG1_MAX_RETRIES):
        a, b = _sample_weight(rng), _sample_weight(rng)
        if a != b:
            return a, b
    raise PreconditionError("distinct gadget weights", "duplicate gadget weights")


def build_alg1(
    g: WeightedDigraph,
    rng: np.random.Generator,
    *,
    stochastic: bool = False,
    min_agents: int = 3,
    x0=None,
) -> AugmentedSystem:
    """Two extra states per agent wired both ways to it: ``[[A, R], [L, 0]]``.

    ``R`` puts two distinct weights on agent ``i``'s row, ``L`` lets each gadget
    state read agent ``i``. Gadget states never talk to each other.
    ``stochastic`` row-normalizes the result; ``x0`` (optional) is copied into
    both gadget states of each agent.
    """
    check_network(g, min_agents)
    n = g.node_count
    dim = 3 * n
    values: dict[tuple[int, int], Fraction] = {(e.dst, e.src): e.weight for e in g.edges}
    index_map = _index_map(n, 2)
    for i, (z1, z2) in enumerate(index_map):
        r1, r2 = _sample_distinct_pair(rng)
        values[(i, z1)] = r1
        values[(i, z2)] = r2
        values[(z1, i)] = _sample_weight(rng)
        values[(z2, i)] = _sample_weight(rng)
    if stochastic:
        values = _normalize_rows(values, dim)
    ap = RationalMatrix.from_sparse(dim, dim, values)
    x_tilde = None
    if x0 is not None:
        x = _check_x0(x0, n)
        x_tilde = list(x) + [_ZERO] * (2 * n)
        for i, ix in enumerate(index_map):
            for k in ix:
                x_tilde[k] = x[i]
    logger.debug(f"alg1: {n} agents -> {dim} states (stochastic={stochastic})")
    return AugmentedSystem(g, AugmentationKind.ALG1_3N, ap, index_map, None, x_tilde)


# ---------------- Alg2: three states per agent ---------------- #


def build_alg2(
    g: WeightedDigraph,
    x0,
    split: SplitChoice | None = None,
    *,
    weighted: bool = False,
) -> AugmentedSystem:
    """Three-state gadget: agent -> z1 -> agent, agent -> z2 -> z3 -> agent.

    Unnormalized entries: agent row gets 2 at z1 and 1 at z3, z1 and z2 read the
    agent with 1, z3 reads z2 with 1; the original block is the adjacency of
    ``g`` (its weights when ``weighted``). Rows are then normalized.
    """
    check_network(g)
    n = g.node_count
    x0 = _check_x0(x0, n)
    split = split or SplitChoice.default(n, 3)
    split.check(n, 3)
    dim = 4 * n
    values: dict[tuple[int, int], Fraction] = {
        (e.dst, e.src): (e.weight if weighted else _ONE) for e in g.edges
    }
    index_map = _index_map(n, 3)
    for i, (z1, z2, z3) in enumerate(index_map):
        values[(i, z1)] = Fraction(2)
        values[(i, z3)] = _ONE
        values[(z1, i)] = _ONE
        values[(z2, i)] = _ONE
        values[(z3, z2)] = _ONE
    ap = RationalMatrix.from_sparse(dim, dim, _normalize_rows(values, dim))
    v_left = left_eigenvector_unit(ap)

    total_v = sum(v_left, _ZERO)
    pre = [_ZERO] * dim
    for i, ix in enumerate(index_map):
        weights = split[i]
        scale = 4 * x0[i] / sum(weights, _ZERO)
        for k, w in zip(ix, weights):
            pre[k] = scale * w
    x_tilde = tuple(pre[j] * total_v / (4 * n * v_left[j]) for j in range(dim))
    nonpositive = tuple(i for i, x in enumerate(x0) if x <= 0)
    if nonpositive:
        logger.warning(f"alg2: agents {list(nonpositive)} have non-positive x0; gadget signs follow x0")
    logger.debug(f"alg2: {n} agents -> {dim} states")
    return AugmentedSystem(g, AugmentationKind.ALG2_4N, ap, index_map, v_left, x_tilde, nonpositive)


# ---------------- Alg3 / Alg4: four-state reversible gadget ---------------- #


def build_alg3(a: RationalMatrix) -> RationalMatrix:
    """``5N x 5N`` matrix: original block halved plus the four-state gadget."""
    if not a.is_square:
        raise DimensionError(f"square matrix required, got {a.shape}")
    if not is_row_stochastic(a):
        raise PreconditionError("row-stochastic", "input not row-stochastic")
    if not is_bidirected(from_matrix(a)):
        raise PreconditionError("bidirected", "structure not bidirected")
    reversibility_vector(a)  # raises when the input is not reversible

    n = a.rows
    dim = 5 * n
    half = Fraction(1, 2)
    values: dict[tuple[int, int], Fraction] = {(i, j): v * half for i, j, v in a.nonzero_items()}
    for i, gadget in enumerate(_index_map(n, 4)):
        cols = (i, *gadget)
        for z, w in zip(gadget, P1D_AGENT_ROW):
            values[(i, z)] = w
        for z, row in zip(gadget, P1D_GADGET_ROWS):
            for c, w in zip(cols, row):
                if w:
                    values[(z, c)] = w
    ap = RationalMatrix.from_sparse(dim, dim, values)
    if not is_row_stochastic(ap):
        raise PrivconError("alg3 output is not row-stochastic")
    reversibility_vector(ap)
    logger.debug(f"alg3: {n} agents -> {dim} states")
    return ap


def _propagate_s(ap: RationalMatrix, n: int) -> list[Fraction]:
    """Unnormalized ``s``: BFS over the original agents from ``s_0 = 1``,
    then the fixed gadget ratios."""
    rows = ap.nonzero_rows
    s: list[Fraction | None] = [None] * ap.rows
    s[0] = _ONE
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for j in rows[i]:
                if j < n and s[j] is None:
                    s[j] = s[i] * rows[i][j] / rows[j][i]
                    nxt.append(j)
        frontier = sorted(nxt)
    for i, gadget in enumerate(_index_map(n, 4)):
        for z, ratio in zip(gadget, P1D_S_RATIOS):
            s[z] = s[i] * ratio
    return s  # type: ignore[return-value]


def solve_p1d(a: RationalMatrix, x0, split: SplitChoice | None = None) -> AugmentedSystem:
    """Build the reversible 5N system and encode ``x0`` in the gadget states.

    Agent ``i`` sends 0 on its original state; gadget state ``k`` starts at
    ``(Z / s_k) * alpha_k`` with the split rescaled so that
    ``sum(alpha) = x_i[0] / N``. Then ``v_left^T x~[0]`` is exactly the average.
    """
    ap = build_alg3(a)
    n = a.rows
    x0 = _check_x0(x0, n)
    split = split or SplitChoice.default(n, 4)
    split.check(n, 4)

    s = _propagate_s(ap, n)
    z_total = sum(s, _ZERO)
    v_left = tuple(x / z_total for x in s)

    index_map = _index_map(n, 4)
    x_tilde = [_ZERO] * ap.rows
    for i, gadget in enumerate(index_map):
        alphas = split[i]
        scale = x0[i] / n / sum(alphas, _ZERO)
        for z, alpha in zip(gadget, alphas):
            x_tilde[z] = z_total / s[z] * alpha * scale
    nonpositive = tuple(i for i, x in enumerate(x0) if x <= 0)
    if nonpositive:
        logger.warning(f"p1d: agents {list(nonpositive)} have non-positive x0; gadget signs follow x0")
    return AugmentedSystem(
        from_matrix(a), AugmentationKind.ALG3_5N, ap, index_map, v_left, tuple(x_tilde), nonpositive
    )


# ---------------- split recovery / decoding ---------------- #


def recover_split(system: AugmentedSystem, rounded_xtilde: Sequence[float]) -> SplitChoice:
    """Invert the encoding: ``alpha_k = v_k * x~_k`` per gadget state."""
    if system.v_left is None:
        raise PreconditionError("v_left", "system has no left eigenvector")
    if len(rounded_xtilde) != system.dim:
        raise DimensionError(f"{len(rounded_xtilde)} values for a {system.dim}-state system")
    out = []
    for i, gadget in enumerate(system.index_map):
        alphas = tuple(
            system.v_left[k] * rationalize(rounded_xtilde[k], SPLIT_MAX_DENOMINATOR) for k in gadget
        )
        if any(a < 0 for a in alphas):
            raise SplitError(f"negative recovered α for agent {i}")
        if any(a == 0 for a in alphas):
            raise SplitError(f"zero recovered α for agent {i} (α must be positive)")
        out.append(alphas)
    return SplitChoice(tuple(out))


def decode_initial_state(system: AugmentedSystem) -> RationalVector:
    """``N * sum_k v_k x~_k`` over each agent's states - the value it hides."""
    if system.v_left is None or system.x_tilde0 is None:
        raise PreconditionError("v_left", "system has no left eigenvector or initial state")
    n = system.n_original
    return tuple(
        n * sum((system.v_left[k] * system.x_tilde0[k] for k in system.state_indices(i)), _ZERO)
        for i in range(n)
    )
