"""Agent-level consensus: every original agent is a small state machine.

Per round an agent broadcasts one scalar (its original-state coordinate),
reads its in-neighbours' broadcasts from the previous round and updates its
own states with its local rows of ``ap``.  Gadget states never leave the
agent.  Rounds are barriers; all agents read the same snapshot.
"""
from __future__ import annotations

import asyncio
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from loguru import logger

from .augment import AugmentedSystem
from .errors import DetailedBalanceViolation, LocalityViolation, PreconditionError
from .exactla import RationalMatrix, RationalVector
from .netgraph import WeightedDigraph, is_bidirected, is_strongly_connected
from .simulate import SimulationTrace, _check_run_args, make_trace, spread

_ZERO = Fraction(0)


class NeighborhoodView:
    """Read access to the broadcasts one agent is allowed to hear."""

    def __init__(self, owner: int, allowed: frozenset[int], broadcasts: Mapping[int, float]):
        self.owner = owner
        self._allowed = allowed
        self._broadcasts = broadcasts
        self.reads = 0

    def __getitem__(self, agent: int) -> float:
        if agent not in self._allowed:
            raise LocalityViolation(self.owner, agent)
        self.reads += 1
        return self._broadcasts[agent]


@dataclass
class AgentMachine:
    id: int
    indices: tuple[int, ...]  # own state indices, original first
    values: list[float]
    # per own state: local (position, weight) and remote (agent, weight)
    local_weights: list[list[tuple[int, float]]]
    remote_weights: list[list[tuple[int, float]]]
    neighbors: frozenset[int] = field(default_factory=frozenset)
    sent: int = 0

    @classmethod
    def from_system(cls, system: AugmentedSystem, agent: int, x0: Sequence[float]) -> "AgentMachine":
        indices = system.state_indices(agent)
        position = {k: p for p, k in enumerate(indices)}
        n = system.n_original
        local, remote = [], []
        neighbors: set[int] = set()
        for k in indices:
            row_local, row_remote = [], []
            for j, w in system.ap.nonzero_rows[k].items():
                if j in position:
                    row_local.append((position[j], float(w)))
                elif j < n:
                    row_remote.append((j, float(w)))
                    neighbors.add(j)
                else:
                    # another agent's hidden state
                    raise LocalityViolation(agent, j)
            local.append(row_local)
            remote.append(row_remote)
        return cls(agent, indices, [float(x0[k]) for k in indices], local, remote, frozenset(neighbors))

    def broadcast(self) -> float:
        self.sent += 1
        return self.values[0]

    async def step(self, view: NeighborhoodView) -> list[float]:
        old = self.values
        new = []
        for row_local, row_remote in zip(self.local_weights, self.remote_weights):
            acc = 0.0
            for p, w in row_local:
                acc += w * old[p]
            for j, w in row_remote:
                acc += w * view[j]
            new.append(acc)
        return new

    def commit(self, values: list[float]) -> None:
        self.values = values


class AgentNetwork:
    def __init__(self, system: AugmentedSystem, x0: Sequence | None = None):
        if x0 is None:
            x0 = system.x_tilde0
        if x0 is None:
            raise PreconditionError("initial state", "system has no encoded initial state")
        if len(x0) != system.dim:
            raise ValueError(f"x0 of length {len(x0)} for {system.dim} states")
        self.system = system
        x = [float(v) for v in x0]
        self.agents = [AgentMachine.from_system(system, i, x) for i in range(system.n_original)]

    def snapshot(self) -> np.ndarray:
        out = np.zeros(self.system.dim)
        for m in self.agents:
            out[list(m.indices)] = m.values
        return out

    async def round(self) -> None:
        broadcasts = {m.id: m.broadcast() for m in self.agents}
        views = [NeighborhoodView(m.id, m.neighbors, broadcasts) for m in self.agents]
        updates = await asyncio.gather(*(m.step(v) for m, v in zip(self.agents, views)))
        for m, values in zip(self.agents, updates):
            m.commit(values)

    async def run(self, tol: float, max_rounds: int) -> SimulationTrace:
        _check_run_args(tol, max_rounds)
        states = [self.snapshot()]
        for _ in range(max_rounds):
            if spread(states[-1]) <= tol:
                break
            await self.round()
            states.append(self.snapshot())
        trace = make_trace(states, tol, "agents")
        logger.debug(trace.summary())
        return trace


def run_agents(system: AugmentedSystem, tol: float, max_rounds: int, x0: Sequence | None = None) -> SimulationTrace:
    return asyncio.run(AgentNetwork(system, x0).run(tol, max_rounds))


# ---------------- distributed s ---------------- #


@dataclass
class _SNode:
    id: int
    owned: tuple[int, ...]
    s: Fraction | None = None
    parent: int | None = None
    children: set[int] = field(default_factory=set)
    local_s: dict[int, Fraction] = field(default_factory=dict)
    reported: dict[int, Fraction] = field(default_factory=dict)
    total: Fraction | None = None
    z: Fraction | None = None


class DistributedSProtocol:
    """Synchronous flood of ``s`` over the agent graph, then a convergecast of Z.

    Phase 1: agent ``i`` holding ``s_i`` offers ``s_i * ap[i, j]`` to each
    neighbour ``j`` once; ``j`` adopts the lowest-id offer of the first round
    it hears from anyone (``s_j = offer / ap[j, i]``) and checks every other
    offer against its value.  Each agent then extends ``s`` over its own
    gadget through its local rows.
    Phase 2: subtotals climb the BFS tree, the root learns ``Z`` and floods it
    back down; everyone divides.
    """

    def __init__(self, graph: WeightedDigraph, ap: RationalMatrix, index_map: Sequence[Sequence[int]] = ()):
        n = graph.node_count
        if not is_bidirected(graph):
            raise PreconditionError("bidirected", "structure not bidirected")
        if not is_strongly_connected(graph):
            raise PreconditionError("A2: strongly connected", "not strongly connected")
        index_map = tuple(tuple(ix) for ix in index_map) or tuple(() for _ in range(n))
        if len(index_map) != n:
            raise ValueError("index_map must list one gadget per agent")
        self.ap = ap
        self.rows = ap.nonzero_rows
        self.n = n
        self.nodes = [_SNode(i, (i, *index_map[i])) for i in range(n)]
        self.links = {i: sorted(j for j in self.rows[i] if j < n and j != i) for i in range(n)}
        self.rounds = 0
        self.messages = 0

    def _flood(self) -> None:
        root = self.nodes[0]
        root.s = Fraction(1)
        pending = [0]  # agents that learned s last round and have not offered yet
        while pending:
            self.rounds += 1
            inbox: dict[int, list[tuple[int, Fraction]]] = defaultdict(list)
            for i in pending:
                for j in self.links[i]:
                    inbox[j].append((i, self.nodes[i].s * self.rows[i][j]))
                    self.messages += 1
            pending = []
            for j in sorted(inbox):
                node = self.nodes[j]
                offers = sorted(inbox[j])
                if node.s is None:
                    sender, value = offers[0]
                    node.s = value / self.rows[j][sender]
                    node.parent = sender
                    self.nodes[sender].children.add(j)
                    pending.append(j)
                for sender, value in offers:
                    if value != node.s * self.rows[j][sender]:
                        raise DetailedBalanceViolation(j, sender)

    def _extend_local(self, node: _SNode) -> None:
        owned = set(node.owned)
        node.local_s = {node.id: node.s}
        queue = [node.id]
        while queue:
            k = queue.pop(0)
            for z, w in sorted(self.rows[k].items()):
                if z in owned and z not in node.local_s:
                    node.local_s[z] = node.local_s[k] * w / self.rows[z][k]
                    queue.append(z)
        if set(node.local_s) != owned:
            raise PreconditionError("gadget connected", f"agent {node.id} gadget not reachable from the agent")
        for k in node.owned:
            for z, w in self.rows[k].items():
                if z in owned and node.local_s[k] * w != node.local_s[z] * self.rows[z].get(k, _ZERO):
                    raise DetailedBalanceViolation(node.id, node.id, f"agent {node.id}: gadget breaks detailed balance on ({k}, {z})")

    def _convergecast(self) -> None:
        for node in self.nodes:
            node.total = sum(node.local_s.values(), _ZERO)
        waiting = {node.id for node in self.nodes}
        while waiting:
            self.rounds += 1
            ready = [i for i in sorted(waiting) if set(self.nodes[i].reported) == self.nodes[i].children]
            for i in ready:
                node = self.nodes[i]
                subtotal = node.total + sum(node.reported.values(), _ZERO)
                waiting.discard(i)
                if node.parent is None:
                    node.z = subtotal
                else:
                    self.nodes[node.parent].reported[i] = subtotal
                    self.messages += 1
        # Z travels back down the tree
        frontier = [0]
        while frontier:
            self.rounds += 1
            nxt = []
            for i in frontier:
                for c in sorted(self.nodes[i].children):
                    self.nodes[c].z = self.nodes[i].z
                    self.messages += 1
                    nxt.append(c)
            frontier = nxt

    def run(self) -> RationalVector:
        self._flood()
        for node in self.nodes:
            self._extend_local(node)
        self._convergecast()
        out = [_ZERO] * self.ap.rows
        for node in self.nodes:
            for k, s in node.local_s.items():
                out[k] = s / node.z
        logger.debug(f"distributed s: {self.rounds} rounds, {self.messages} messages")
        return tuple(out)


def run_distributed_s(graph: WeightedDigraph, ap: RationalMatrix, index_map: Sequence[Sequence[int]] = ()) -> RationalVector:
    return DistributedSProtocol(graph, ap, index_map).run()


def distributed_s_for(system: AugmentedSystem) -> RationalVector:
    return run_distributed_s(system.original, system.ap, system.index_map)
