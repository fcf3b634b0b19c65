"""Weighted digraph model and structural predicates.

Adjacency convention: an edge ``i -> j`` with weight ``w_ij`` lands in the
matrix as ``A[j, i] = w_ij`` - row ``j`` receives from ``i``, matching
``x[k+1] = A x[k]``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from loguru import logger

from .errors import DimensionError, FormatError, NotReversibleError, PreconditionError
from .exactla import RationalMatrix, RationalVector, format_rational, to_rational

_ZERO = Fraction(0)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    weight: Fraction


@dataclass(frozen=True)
class WeightedDigraph:
    node_count: int
    edges: tuple[Edge, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.node_count <= 0:
            raise DimensionError("graph needs at least one node")
        seen = set()
        clean = []
        for e in self.edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            w = to_rational(e.weight)
            if not (0 <= e.src < self.node_count and 0 <= e.dst < self.node_count):
                raise DimensionError(f"edge ({e.src}, {e.dst}) outside 0..{self.node_count - 1}")
            if (e.src, e.dst) in seen:
                raise FormatError(f"duplicate edge ({e.src}, {e.dst})")
            if e.src != e.dst and w <= 0:
                raise FormatError(f"edge ({e.src}, {e.dst}) needs a positive weight, got {w}")
            if w == 0:
                raise FormatError(f"self-loop on {e.src} with zero weight")
            seen.add((e.src, e.dst))
            clean.append(Edge(e.src, e.dst, w))
        clean.sort(key=lambda e: (e.src, e.dst))
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_triples(cls, node_count: int, triples: Iterable[tuple]) -> "WeightedDigraph":
        return cls(node_count, tuple(Edge(int(s), int(d), to_rational(w)) for s, d, w in triples))

    def edge_pairs(self) -> set[tuple[int, int]]:
        return {(e.src, e.dst) for e in self.edges}

    def weight(self, src: int, dst: int) -> Fraction:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e.weight
        return _ZERO

    def out_neighbors(self, i: int) -> list[int]:
        return [e.dst for e in self.edges if e.src == i and e.dst != i]

    def in_neighbors(self, i: int) -> list[int]:
        return sorted(e.src for e in self.edges if e.dst == i and e.src != i)


@dataclass(frozen=True)
class NeighborSet:
    """``N_i = {i} ∪ {j : (i, j) ∈ E}``."""

    agent: int
    members: frozenset[int]

    def __post_init__(self):
        if self.agent not in self.members:
            raise ValueError("a neighbour set always contains its agent")


def neighbor_set(g: WeightedDigraph, i: int) -> NeighborSet:
    return NeighborSet(i, frozenset([i, *g.out_neighbors(i)]))


# ---------------- matrix <-> graph ---------------- #


def to_matrix(g: WeightedDigraph) -> RationalMatrix:
    return RationalMatrix.from_sparse(
        g.node_count, g.node_count, {(e.dst, e.src): e.weight for e in g.edges}
    )


def from_matrix(a: RationalMatrix) -> WeightedDigraph:
    """Inverse of :func:`to_matrix`; entries may be any nonzero rational."""
    if not a.is_square:
        raise DimensionError(f"adjacency must be square, got {a.shape}")
    edges = []
    for j, i, v in a.nonzero_items():
        if i != j and v < 0:
            raise FormatError(f"negative off-diagonal entry A[{j},{i}] = {v}")
        edges.append(Edge(i, j, v))
    return WeightedDigraph(a.rows, tuple(edges))


def to_networkx(g: WeightedDigraph) -> nx.DiGraph:
    out = nx.DiGraph()
    out.add_nodes_from(range(g.node_count))
    out.add_edges_from((e.src, e.dst, {"weight": e.weight}) for e in g.edges)
    return out


def in_neighbors(a: RationalMatrix, i: int) -> list[int]:
    """States row ``i`` reads from (excluding itself)."""
    return [j for j in a.nonzero_rows[i] if j != i]


# ---------------- predicates ---------------- #


def is_strongly_connected(g: WeightedDigraph) -> bool:
    return nx.is_strongly_connected(to_networkx(g))


def _bfs_levels(g: WeightedDigraph, root: int = 0) -> dict[int, int]:
    succ: dict[int, list[int]] = {i: [] for i in range(g.node_count)}
    for e in g.edges:
        succ[e.src].append(e.dst)
    level = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def period(g: WeightedDigraph) -> int:
    """gcd of cycle lengths, via BFS levels: gcd over edges of |lvl(u) + 1 - lvl(v)|."""
    if not is_strongly_connected(g):
        raise PreconditionError("A2: strongly connected", "not strongly connected")
    level = _bfs_levels(g)
    d = 0
    for e in g.edges:
        d = gcd(d, abs(level[e.src] + 1 - level[e.dst]))
    if d == 0:
        raise PreconditionError("cycle", "graph has no cycles")
    return d


def is_aperiodic(g: WeightedDigraph) -> bool:
    return period(g) == 1


def is_bidirected(g: WeightedDigraph) -> bool:
    pairs = g.edge_pairs()
    return all((d, s) in pairs for s, d in pairs)


def is_row_stochastic(a: RationalMatrix) -> bool:
    if not a.is_square:
        return False
    for row in a.nonzero_rows:
        if any(v < 0 for v in row.values()):
            return False
        if sum(row.values(), _ZERO) != 1:
            return False
    return True


def _is_bidirected_structure(a: RationalMatrix) -> bool:
    rows = a.nonzero_rows
    return all(i in rows[j] for i, row in enumerate(rows) for j in row if j != i)


def _matrix_strongly_connected(a: RationalMatrix) -> bool:
    return is_strongly_connected(from_matrix(a))


def reversibility_vector(a: RationalMatrix) -> RationalVector:
    """Normalized ``s`` with ``s_i A_ij = s_j A_ji`` for all ``i, j``.

    ``s_0 = 1`` is propagated along a BFS tree (lowest index first), then every
    nonzero pair is checked; raises :class:`NotReversibleError` on a violation.
    """
    if not a.is_square:
        raise DimensionError(f"square matrix required, got {a.shape}")
    if not _is_bidirected_structure(a):
        raise PreconditionError("bidirected", "structure not bidirected")
    if not _matrix_strongly_connected(a):
        raise PreconditionError("A2: strongly connected", "not strongly connected")
    rows = a.nonzero_rows
    s: dict[int, Fraction] = {0: Fraction(1)}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in sorted(rows[i]):
            if j not in s:
                s[j] = s[i] * rows[i][j] / rows[j][i]
                queue.append(j)
    for i, j, v in a.nonzero_items():
        if s[i] * v != s[j] * rows[j][i]:
            raise NotReversibleError(f"not reversible: detailed balance fails on ({i}, {j})")
    total = sum(s.values(), _ZERO)
    return tuple(s[i] / total for i in range(a.rows))


def enumerate_cycles(g: WeightedDigraph, max_len: int) -> list[list[int]]:
    """Simple cycles up to ``max_len`` nodes (small graphs only)."""
    return [list(c) for c in nx.simple_cycles(to_networkx(g), length_bound=max_len)]


# ---------------- random workload ---------------- #


def random_reversible_graph(n: int, rng: np.random.Generator, extra_edges: int | None = None) -> WeightedDigraph:
    """Connected bidirected graph whose matrix is a reversible random walk.

    A ring keeps it connected; ``extra_edges`` random chords are added (default
    ``n``). Symmetric integer conductances ``c_ij`` give weights
    ``A_ij = c_ij / sum_k c_ik``, so the matrix is row-stochastic with
    stationary vector proportional to the row totals.
    """
    if n < 2:
        raise PreconditionError("A2: at least three agents", f"cannot build a graph on {n} nodes")
    conductance: dict[tuple[int, int], int] = {}

    def connect(i: int, j: int) -> None:
        key = (min(i, j), max(i, j))
        if i != j and key not in conductance:
            conductance[key] = int(rng.integers(1, 10))

    for i in range(n):
        connect(i, (i + 1) % n)
    for _ in range(n if extra_edges is None else extra_edges):
        i, j = (int(x) for x in rng.integers(0, n, size=2))
        connect(i, j)
    totals = [0] * n
    for (i, j), c in conductance.items():
        totals[i] += c
        totals[j] += c
    values = {}
    for (i, j), c in conductance.items():
        values[(i, j)] = Fraction(c, totals[i])
        values[(j, i)] = Fraction(c, totals[j])
    return from_matrix(RationalMatrix.from_sparse(n, n, values))


# ---------------- I/O ---------------- #


def graph_to_dict(g: WeightedDigraph) -> dict:
    return {
        "nodes": g.node_count,
        "edges": [{"src": e.src, "dst": e.dst, "w": format_rational(e.weight)} for e in g.edges],
    }


def graph_from_dict(data: dict) -> WeightedDigraph:
    try:
        n = int(data["nodes"])
        triples = [(int(e["src"]), int(e["dst"]), str(e["w"])) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad graph JSON: {exc}") from exc
    return WeightedDigraph.from_triples(n, triples)


def parse_edge_list(text: str, node_count: int | None = None) -> WeightedDigraph:
    """Whitespace separated ``i j p/q`` per line; ``#`` starts a comment."""
    triples = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 'i j w', got {line!r}")
        try:
            triples.append((int(parts[0]), int(parts[1]), parts[2]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if node_count is None:
        if not triples:
            raise FormatError("empty edge list")
        node_count = 1 + max(max(s, d) for s, d, _ in triples)
    return WeightedDigraph.from_triples(node_count, triples)


def read_graph(path: str | Path) -> WeightedDigraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        g = graph_from_dict(data)
    else:
        g = parse_edge_list(text)
    logger.debug(f"loaded graph {path}: {g.node_count} nodes, {len(g.edges)} edges")
    return g


def write_graph(g: WeightedDigraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=2) + "\n")
