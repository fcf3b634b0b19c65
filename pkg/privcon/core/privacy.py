"""Observability-based privacy audit.

An observer sees a fixed set of state coordinates every round (``y = C x``).
A functional ``t^T x[0]`` is recoverable from that stream iff ``t`` lies in
the row space of the Kalman matrix ``[C; CA; ...; CA^{n-1}]``; an agent's
initial value is private when neither its individual states, their plain
sum nor their ``1/v``-weighted sum are recoverable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from loguru import logger

from .augment import AugmentedSystem
from .errors import DimensionError, PreconditionError
from .exactla import (
    RationalMatrix,
    RationalVector,
    RowSpace,
    krylov_rowspace,
    rowspace_contains,
    to_rational,
    unit_vector,
    vstack,
)
from .netgraph import in_neighbors

_ZERO = Fraction(0)

OBSERVER_MODES = ("proof", "minimal")


# ---------------- primitives ---------------- #


def output_matrix(observed: Iterable[int], dim: int) -> RationalMatrix:
    """One row ``e_k^T`` per observed coordinate, ascending."""
    rows = sorted(set(observed))
    if not rows:
        raise DimensionError("observer sees nothing")
    if rows[0] < 0 or rows[-1] >= dim:
        raise DimensionError(f"observed index outside 0..{dim - 1}")
    return RationalMatrix.from_sparse(len(rows), dim, {(r, k): 1 for r, k in enumerate(rows)})


def pbh_matrix(a: RationalMatrix, c: RationalMatrix, lam) -> RationalMatrix:
    """``[C; lam*I - A]``."""
    if not a.is_square or c.cols != a.rows:
        raise DimensionError(f"incompatible A {a.shape} and C {c.shape}")
    shifted = RationalMatrix.identity(a.rows).scale(to_rational(lam)) - a
    return vstack(c, shifted)


def observability_rowspace(a: RationalMatrix, c: RationalMatrix) -> RowSpace:
    return krylov_rowspace(a, c)


def is_observable(a: RationalMatrix, c: RationalMatrix) -> bool:
    return observability_rowspace(a, c).rank == a.rows


def can_recover(a: RationalMatrix, c: RationalMatrix, target: Sequence) -> bool:
    if len(target) != a.cols:
        raise DimensionError(f"target of length {len(target)} for {a.cols} states")
    return observability_rowspace(a, c).contains(target)


def can_recover_at(a: RationalMatrix, c: RationalMatrix, target: Sequence, lam) -> bool:
    """Membership in the row space of the PBH matrix at a single ``lam``."""
    if len(target) != a.cols:
        raise DimensionError(f"target of length {len(target)} for {a.cols} states")
    return rowspace_contains(pbh_matrix(a, c, lam), target)


# ---------------- observer ---------------- #


@dataclass(frozen=True)
class ObserverSpec:
    observer: int
    observed: tuple[int, ...]
    coalition: tuple[int, ...] = ()
    mode: str = "proof"

    @property
    def members(self) -> tuple[int, ...]:
        """Observer plus coalition, sorted."""
        return tuple(sorted({self.observer, *self.coalition}))

    @classmethod
    def build(
        cls,
        system: AugmentedSystem,
        observer: int,
        coalition: Iterable[int] = (),
        mode: str = "proof",
    ) -> "ObserverSpec":
        """``proof``: every original state plus the members' own gadgets.
        ``minimal``: members' own states plus the original states they read."""
        n = system.n_original
        coalition = tuple(sorted(set(coalition) - {observer}))
        for agent in (observer, *coalition):
            if not 0 <= agent < n:
                raise PreconditionError("observer", f"observer out of range: {agent} not in 0..{n - 1}")
        if mode not in OBSERVER_MODES:
            raise ValueError(f"unknown observer mode {mode!r}")
        observed: set[int] = set()
        for agent in (observer, *coalition):
            observed.update(system.state_indices(agent))
            if mode == "proof":
                observed.update(range(n))
            else:
                observed.update(j for j in in_neighbors(system.ap, agent) if j < n)
        return cls(observer, tuple(sorted(observed)), coalition, mode)

    def output_matrix(self, dim: int) -> RationalMatrix:
        return output_matrix(self.observed, dim)


# ---------------- report ---------------- #


@dataclass(frozen=True)
class TargetFinding:
    agent: int
    coordinates: tuple[tuple[int, bool], ...]
    sum_recoverable: bool
    weighted_recoverable: bool | None

    @property
    def block_recoverable(self) -> bool:
        """Every state of the agent is individually recoverable."""
        return all(flag for _, flag in self.coordinates)

    @property
    def private(self) -> bool:
        return not (self.block_recoverable or self.sum_recoverable or bool(self.weighted_recoverable))

    def protected_coordinates(self) -> list[int]:
        return [k for k, flag in self.coordinates if not flag]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "coordinates": {str(k): flag for k, flag in self.coordinates},
            "block_recoverable": self.block_recoverable,
            "sum_recoverable": self.sum_recoverable,
            "weighted_recoverable": self.weighted_recoverable,
            "private": self.private,
        }


@dataclass(frozen=True)
class PrivacyAuditReport:
    observer: ObserverSpec
    kind: str
    findings: tuple[TargetFinding, ...]
    relaxed_sign_agents: tuple[int, ...] = field(default_factory=tuple)

    @property
    def private(self) -> bool:
        return all(f.private for f in self.findings)

    @property
    def verdict(self) -> str:
        return "private" if self.private else "not-private"

    def finding(self, agent: int) -> TargetFinding:
        for f in self.findings:
            if f.agent == agent:
                return f
        raise KeyError(agent)

    def to_dict(self) -> dict:
        return {
            "observer": self.observer.observer,
            "coalition": list(self.observer.coalition),
            "mode": self.observer.mode,
            "kind": self.kind,
            "observed": list(self.observer.observed),
            "targets": [f.to_dict() for f in self.findings],
            "relaxed_sign_agents": list(self.relaxed_sign_agents),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary(self) -> str:
        exposed = [f.agent for f in self.findings if not f.private]
        head = f"observer {self.observer.observer}"
        if self.observer.coalition:
            head += f" + coalition {list(self.observer.coalition)}"
        if not exposed:
            return f"{head}: private ({len(self.findings)} targets checked)"
        return f"{head}: NOT private, exposed agents {exposed}"


def _indicator(dim: int, indices: Iterable[int], weights: dict[int, Fraction] | None = None) -> RationalVector:
    out = [_ZERO] * dim
    for k in indices:
        out[k] = Fraction(1) if weights is None else weights[k]
    return tuple(out)


def audit(
    system: AugmentedSystem,
    observer: int,
    coalition: Iterable[int] | None = None,
    mode: str = "proof",
) -> PrivacyAuditReport:
    spec = ObserverSpec.build(system, observer, coalition or (), mode)
    dim = system.dim
    space = observability_rowspace(system.ap, spec.output_matrix(dim))
    v = system.v_left
    findings = []
    for j in range(system.n_original):
        if j in spec.members:
            continue
        block = system.state_indices(j)
        coords = tuple((k, space.contains(unit_vector(dim, k))) for k in block)
        sum_rec = space.contains(_indicator(dim, block))
        weighted: bool | None = None
        if v is not None and all(v[k] != 0 for k in block):
            weighted = space.contains(_indicator(dim, block, {k: 1 / v[k] for k in block}))
        findings.append(TargetFinding(j, coords, sum_rec, weighted))
    report = PrivacyAuditReport(spec, system.kind.value, tuple(findings), system.nonpositive_agents)
    logger.info(f"audit {system.kind.value}: {report.summary()} (observable rank {space.rank}/{dim})")
    return report


def audit_all(system: AugmentedSystem, mode: str = "proof") -> list[PrivacyAuditReport]:
    return [audit(system, i, mode=mode) for i in range(system.n_original)]


def reduced_gadget_block(
    system: AugmentedSystem,
    observer: int,
    target: int,
    lam=0,
    mode: str = "proof",
) -> RationalMatrix | None:
    """RREF block of the ``lam``-PBH rows on ``target``'s gadget columns.

    Observed columns are eliminated first (their unit rows are in the span),
    then the rows supported only on the target's gadget are reduced.
    Returns ``None`` when nothing survives.
    """
    spec = ObserverSpec.build(system, observer, mode=mode)
    p = pbh_matrix(system.ap, spec.output_matrix(system.dim), lam)
    observed = set(spec.observed)
    gadget = list(system.index_map[target])
    gadget_set = set(gadget)
    space = RowSpace(len(gadget))
    for row in p.nonzero_rows:
        support = {k: x for k, x in row.items() if k not in observed}
        if support and set(support) <= gadget_set:
            space.add([support.get(k, _ZERO) for k in gadget])
    if space.rank == 0:
        return None
    return RationalMatrix.from_rows(space.basis())
