"""Exception hierarchy shared by all privcon modules.

Every error derives from ``ValueError`` as well, so code written against plain
``ValueError`` keeps catching them.
"""
from __future__ import annotations


class PrivconError(ValueError):
    """Base class for every domain error raised by privcon."""


class DimensionError(PrivconError):
    """Shape or length mismatch between operands."""


class FormatError(PrivconError):
    """Malformed input file or literal (JSON, edge list, rational)."""


class PreconditionError(PrivconError):
    """An algorithm precondition does not hold.

    ``assumption`` names the violated requirement, e.g. ``"A2: strongly connected"``.
    """

    def __init__(self, assumption: str, message: str | None = None):
        self.assumption = assumption
        super().__init__(message or assumption)

    def __str__(self) -> str:
        text = self.args[0] if self.args else ""
        if text == self.assumption:
            return text
        return f"{self.assumption}: {text}"


class EigenError(PrivconError):
    """Unit left eigenvector missing or not simple."""


class NotReversibleError(PrivconError):
    """Detailed balance fails on some edge of the input matrix."""


class DetailedBalanceViolation(NotReversibleError):
    """An agent of the distributed s-protocol saw an inconsistent cross edge."""

    def __init__(self, agent: int, peer: int, message: str | None = None):
        self.agent = agent
        self.peer = peer
        super().__init__(message or f"detailed balance violated on edge ({peer}, {agent})")


class SplitError(PrivconError):
    """Invalid split choice (non-positive entries, zero sum, bad width)."""


class LocalityViolation(PrivconError):
    """An agent tried to read a state it has no access to."""

    def __init__(self, agent: int, index: int):
        self.agent = agent
        self.index = index
        super().__init__(f"agent {agent} read non-local state {index}")
