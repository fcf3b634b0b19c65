"""Brute-force catalog of admissible gadget topologies.

Node 0 is the agent, the rest are its hidden states.  Every labelled edge set
is pushed through four filters: strongly connected, aperiodic, unobservable
from node 0 alone, and some gadget state unrecoverable.  Survivors are then
grouped into unlabelled isomorphism classes; each class keeps the node-0-fixed
labellings (``variants``) that passed.

Weights: directed candidates get generic random weights and must be
unobservable in every trial (structural unobservability).  Bidirected ones get
reversible random walks with conductances (trial 0 uses unit conductances) and
need one trial that is unobservable.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from loguru import logger
from tqdm import tqdm

from .constants import ALG1_DENOMINATOR, ALG1_NUMERATOR_MAX, DEFAULT_TRIALS
from .errors import DimensionError, FormatError
from .exactla import RationalMatrix, krylov_rowspace, unit_vector
from .netgraph import WeightedDigraph, is_aperiodic, is_strongly_connected

DIRECTED_NODES = 4
BIDIRECTED_NODES = 5

Edges = tuple[tuple[int, int], ...]


# ---------------- canonical forms ---------------- #


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _bits(n: int, edges: Iterable[tuple[int, int]]) -> str:
    present = set(edges)
    return "".join("1" if p in present else "0" for p in _pairs(n))


def _relabel(edges: Iterable[tuple[int, int]], perm: Sequence[int]) -> list[tuple[int, int]]:
    return [(perm[i], perm[j]) for i, j in edges]


def canonical_form(n: int, edges: Iterable[tuple[int, int]], fix_zero: bool = True) -> str:
    """Smallest adjacency bitstring over relabellings (node 0 fixed by default)."""
    edges = list(edges)
    perms = itertools.permutations(range(n))
    return min(_bits(n, _relabel(edges, p)) for p in perms if not fix_zero or p[0] == 0)


def class_form(n: int, edges: Iterable[tuple[int, int]]) -> str:
    return canonical_form(n, edges, fix_zero=False)


def edges_from_bits(n: int, bits: str) -> Edges:
    return tuple(p for p, b in zip(_pairs(n), bits) if b == "1")


def find_isomorphism(n: int, e1: Iterable[tuple[int, int]], e2: Iterable[tuple[int, int]], fix_zero: bool = True) -> dict[int, int] | None:
    """Permutation mapping ``e1`` onto ``e2`` (node 0 -> node 0 when ``fix_zero``)."""
    g1, g2 = nx.DiGraph(), nx.DiGraph()
    for g, edges in ((g1, e1), (g2, e2)):
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        nx.set_node_attributes(g, {k: k == 0 and fix_zero for k in range(n)}, "root")
    matcher = nx.algorithms.isomorphism.DiGraphMatcher(
        g1, g2, node_match=lambda a, b: a["root"] == b["root"]
    )
    if not matcher.is_isomorphic():
        return None
    return dict(matcher.mapping)


# ---------------- candidates ---------------- #


@dataclass(frozen=True)
class FilterResults:
    strongly_connected: bool
    aperiodic: bool
    unobservable_from_node1: bool
    privacy_parameterizable: bool
    protected_coordinates: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return (
            self.strongly_connected
            and self.aperiodic
            and self.unobservable_from_node1
            and self.privacy_parameterizable
        )

    def to_dict(self) -> dict:
        return {
            "strongly_connected": self.strongly_connected,
            "aperiodic": self.aperiodic,
            "unobservable_from_node1": self.unobservable_from_node1,
            "privacy_parameterizable": self.privacy_parameterizable,
            "protected_coordinates": list(self.protected_coordinates),
        }


@dataclass(frozen=True)
class GadgetCandidate:
    node_count: int
    edges: Edges
    bidirected: bool = False
    filter_results: FilterResults | None = None
    variants: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.node_count not in (DIRECTED_NODES, BIDIRECTED_NODES):
            raise DimensionError(f"gadget candidates have 4 or 5 nodes, got {self.node_count}")
        clean = sorted({(int(i), int(j)) for i, j in self.edges})
        for i, j in clean:
            if i == j:
                raise FormatError("self-loops are not part of the enumeration")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise DimensionError(f"edge ({i}, {j}) outside the candidate")
        if self.bidirected and any((j, i) not in clean for i, j in clean):
            raise FormatError("bidirected candidate with a one-way edge")
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def canonical_form(self) -> str:
        return canonical_form(self.node_count, self.edges)

    @property
    def class_form(self) -> str:
        return class_form(self.node_count, self.edges)

    def to_dict(self) -> dict:
        return {
            "nodes": self.node_count,
            "edges": [list(e) for e in self.edges],
            "bidirected": self.bidirected,
            "canonical_form": self.canonical_form,
            "class_form": self.class_form,
            "variants": list(self.variants),
            "filter_results": None if self.filter_results is None else self.filter_results.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GadgetCandidate":
        try:
            fr = data.get("filter_results")
            results = None
            if fr is not None:
                results = FilterResults(
                    fr["strongly_connected"],
                    fr["aperiodic"],
                    fr["unobservable_from_node1"],
                    fr["privacy_parameterizable"],
                    tuple(fr.get("protected_coordinates", ())),
                )
            return cls(
                int(data["nodes"]),
                tuple(tuple(e) for e in data["edges"]),
                bool(data.get("bidirected", False)),
                results,
                tuple(data.get("variants", ())),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad catalog entry: {exc}") from exc


# ---------------- parameterizations ---------------- #


def _weight(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(1, ALG1_NUMERATOR_MAX + 1)), ALG1_DENOMINATOR)


def _generic_matrix(n: int, edges: Edges, rng: np.random.Generator) -> RationalMatrix:
    return RationalMatrix.from_sparse(n, n, {(j, i): _weight(rng) for i, j in edges})


def _reversible_matrix(n: int, edges: Edges, rng: np.random.Generator, unit: bool) -> RationalMatrix:
    conductance = {}
    for i, j in edges:
        key = (min(i, j), max(i, j))
        if key not in conductance:
            conductance[key] = Fraction(1) if unit else _weight(rng)
    totals = [Fraction(0)] * n
    for (i, j), c in conductance.items():
        totals[i] += c
        totals[j] += c
    values = {}
    for (i, j), c in conductance.items():
        values[(i, j)] = c / totals[i]
        values[(j, i)] = c / totals[j]
    return RationalMatrix.from_sparse(n, n, values)


def _observe_from_agent(a: RationalMatrix) -> tuple[bool, tuple[int, ...]]:
    """(unobservable from node 0, gadget coordinates it cannot recover)."""
    n = a.rows
    space = krylov_rowspace(a, RationalMatrix.from_sparse(1, n, {(0, 0): 1}))
    protected = tuple(k for k in range(1, n) if not space.contains(unit_vector(n, k)))
    return space.rank < n, protected


def evaluate_filters(
    node_count: int,
    edges: Edges,
    bidirected: bool,
    trials: int,
    seed: int,
) -> FilterResults:
    if trials < 1:
        raise ValueError("need at least one trial")
    g = WeightedDigraph.from_triples(node_count, ((i, j, 1) for i, j in edges))
    if not edges or not is_strongly_connected(g):
        return FilterResults(False, False, False, False)
    if not is_aperiodic(g):
        return FilterResults(True, False, False, False)
    rng = np.random.default_rng([seed, int(_bits(node_count, edges), 2)])
    seen: list[tuple[bool, tuple[int, ...]]] = []
    for t in range(trials):
        if bidirected:
            a = _reversible_matrix(node_count, edges, rng, unit=(t == 0))
        else:
            a = _generic_matrix(node_count, edges, rng)
        unobservable, protected = _observe_from_agent(a)
        seen.append((unobservable, protected))
        if bidirected and unobservable:
            break
        if not bidirected and not unobservable:
            break
    if bidirected:
        unobservable = any(u for u, _ in seen)
    else:
        unobservable = all(u for u, _ in seen)
    protected = next((p for _, p in seen if p), ())
    return FilterResults(True, True, unobservable, bool(protected), protected)


def verify_catalog_entry(c: GadgetCandidate, trials: int = DEFAULT_TRIALS, seed: int = 0) -> FilterResults:
    return evaluate_filters(c.node_count, c.edges, c.bidirected, trials, seed)


# ---------------- enumeration ---------------- #


@dataclass
class CatalogConfig:
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    progress: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def _labelled(n: int, bidirected: bool):
    if bidirected:
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        slots = _pairs(n)
    for mask in range(1 << len(slots)):
        chosen = [p for b, p in enumerate(slots) if mask >> b & 1]
        if bidirected:
            chosen = chosen + [(j, i) for i, j in chosen]
        yield tuple(sorted(chosen))


def _enumerate(n: int, bidirected: bool, config: CatalogConfig) -> list[GadgetCandidate]:
    total = 1 << (n * (n - 1) // (2 if bidirected else 1))
    classes: dict[str, dict[str, tuple[Edges, FilterResults]]] = {}
    for edges in tqdm(_labelled(n, bidirected), total=total, disable=not config.progress, desc="catalog"):
        results = evaluate_filters(n, edges, bidirected, config.trials, config.seed)
        if not results.passed:
            continue
        form = canonical_form(n, edges)
        classes.setdefault(class_form(n, edges), {}).setdefault(form, (edges, results))
    out = []
    for cform in sorted(classes):
        variants = classes[cform]
        rep = min(variants)
        edges, results = variants[rep]
        out.append(GadgetCandidate(n, edges, bidirected, results, tuple(sorted(variants))))
    logger.info(f"catalog ({'bidirected' if bidirected else 'directed'}, {n} nodes): {len(out)} classes")
    return out


def enumerate_3aug(config: CatalogConfig | None = None) -> list[GadgetCandidate]:
    """Agent plus three hidden states, all 2^12 directed edge sets."""
    return _enumerate(DIRECTED_NODES, False, config or CatalogConfig())


def enumerate_4aug_bidirected(config: CatalogConfig | None = None) -> list[GadgetCandidate]:
    """Agent plus four hidden states, all 2^10 undirected edge sets."""
    return _enumerate(BIDIRECTED_NODES, True, config or CatalogConfig())


def write_catalog(candidates: Sequence[GadgetCandidate], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps([c.to_dict() for c in candidates], indent=2) + "\n")
    return path


def load_catalog(path: str | Path) -> list[GadgetCandidate]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return [GadgetCandidate.from_dict(d) for d in data]
