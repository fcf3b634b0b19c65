"""Exact dense linear algebra over ``fractions.Fraction``.

Rank decisions are discrete, so every construction and every audit runs in
exact arithmetic. numpy only shows up in :func:`eigen_magnitudes` and in the
float conversions used by the simulators.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, EigenError, FormatError

Rational = Fraction
RationalVector = tuple[Fraction, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------- scalars ---------------- #


def parse_rational(text: str) -> Fraction:
    """``"p/q"``, ``"p"`` or a decimal literal -> Fraction."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad rational literal {text!r}") from exc


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rationalize(x: float, max_denominator: int) -> Fraction:
    """Closest fraction to ``x`` with denominator <= ``max_denominator``."""
    return Fraction(float(x)).limit_denominator(max_denominator)


def to_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise FormatError(f"cannot convert {value!r} to a rational")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    raise FormatError(f"cannot convert {value!r} to a rational")


def vector(values: Iterable) -> RationalVector:
    return tuple(to_rational(v) for v in values)


def unit_vector(dim: int, index: int) -> RationalVector:
    out = [_ZERO] * dim
    out[index] = _ONE
    return tuple(out)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise DimensionError(f"dot of vectors with lengths {len(u)} and {len(v)}")
    return sum((a * b for a, b in zip(u, v) if a and b), _ZERO)


# ---------------- matrix ---------------- #


class RationalMatrix:
    """Immutable dense matrix of Fractions, stored row-major.

    ``nonzero_rows`` (per row ``{col: value}``) is cached on first use; the
    constructions build their matrices through :meth:`from_sparse`, which fills
    the cache directly and keeps the 5N x 5N builds O(N^2).
    """

    def __init__(self, rows: int, cols: int, entries: Iterable):
        data = tuple(to_rational(v) for v in entries)
        if rows <= 0 or cols <= 0:
            raise DimensionError("empty matrix")
        if len(data) != rows * cols:
            raise DimensionError(f"{len(data)} entries for a {rows}x{cols} matrix")
        self.rows = rows
        self.cols = cols
        self.entries: tuple[Fraction, ...] = data

    @classmethod
    def _trusted(cls, rows: int, cols: int, entries: tuple, nonzero=None) -> "RationalMatrix":
        if rows <= 0 or cols <= 0:
            raise DimensionError("empty matrix")
        m = cls.__new__(cls)
        m.rows = rows
        m.cols = cols
        m.entries = entries
        if nonzero is not None:
            m.__dict__["nonzero_rows"] = nonzero
        return m

    # ---- constructors ----
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        if not rows or not rows[0]:
            raise DimensionError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), width, (v for r in rows for v in r))

    @classmethod
    def from_sparse(cls, rows: int, cols: int, values: Mapping[tuple[int, int], object]) -> "RationalMatrix":
        flat = [_ZERO] * (rows * cols)
        nonzero: list[dict[int, Fraction]] = [{} for _ in range(rows)]
        for (i, j), raw in values.items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionError(f"index ({i}, {j}) outside {rows}x{cols}")
            q = to_rational(raw)
            if q == 0:
                continue
            flat[i * cols + j] = q
            nonzero[i][j] = q
        ordered = tuple(dict(sorted(d.items())) for d in nonzero)
        return cls._trusted(rows, cols, tuple(flat), ordered)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_sparse(n, n, {(i, i): _ONE for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls.from_sparse(rows, cols, {})

    @classmethod
    def from_numpy(cls, arr, max_denominator: int | None = None) -> "RationalMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-D array")
        if max_denominator is None:
            conv = to_rational
        else:
            def conv(x):
                return rationalize(x, max_denominator)
        return cls(arr.shape[0], arr.shape[1], (conv(x) for x in arr.ravel()))

    # ---- access ----
    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(key)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> RationalVector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> RationalVector:
        return self.entries[j::self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @cached_property
    def nonzero_rows(self) -> tuple[dict[int, Fraction], ...]:
        return tuple(
            {j: v for j, v in enumerate(self.row(i)) if v} for i in range(self.rows)
        )

    def nonzero_items(self):
        """Yield ``(i, j, value)`` for every nonzero entry, row by row."""
        for i, row in enumerate(self.nonzero_rows):
            for j, v in row.items():
                yield i, j, v

    # ---- algebra ----
    def transpose(self) -> "RationalMatrix":
        return RationalMatrix.from_sparse(
            self.cols, self.rows, {(j, i): v for i, j, v in self.nonzero_items()}
        )

    def matvec(self, v: Sequence[Fraction]) -> RationalVector:
        if len(v) != self.cols:
            raise DimensionError(f"matvec: {self.cols} columns, vector of length {len(v)}")
        return tuple(
            sum((a * v[j] for j, a in row.items()), _ZERO) for row in self.nonzero_rows
        )

    def vecmat(self, v: Sequence[Fraction]) -> RationalVector:
        """Row vector times matrix, ``v^T M``."""
        if len(v) != self.rows:
            raise DimensionError(f"vecmat: {self.rows} rows, vector of length {len(v)}")
        out = [_ZERO] * self.cols
        for i, vi in enumerate(v):
            if vi:
                for j, a in self.nonzero_rows[i].items():
                    out[j] += vi * a
        return tuple(out)

    def matmul(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"matmul {self.shape} @ {other.shape}")
        acc: dict[tuple[int, int], Fraction] = {}
        for i, row in enumerate(self.nonzero_rows):
            for k, a in row.items():
                for j, b in other.nonzero_rows[k].items():
                    acc[(i, j)] = acc.get((i, j), _ZERO) + a * b
        return RationalMatrix.from_sparse(self.rows, other.cols, acc)

    def scale(self, q) -> "RationalMatrix":
        q = to_rational(q)
        return RationalMatrix.from_sparse(
            self.rows, self.cols, {(i, j): q * v for i, j, v in self.nonzero_items()}
        )

    def _elementwise(self, other: "RationalMatrix", sign: int) -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        acc = {(i, j): v for i, j, v in self.nonzero_items()}
        for i, j, v in other.nonzero_items():
            acc[(i, j)] = acc.get((i, j), _ZERO) + sign * v
        return RationalMatrix.from_sparse(self.rows, self.cols, acc)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self._elementwise(other, 1)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self._elementwise(other, -1)

    def select_rows(self, indices: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix.from_rows([self.row(i) for i in indices])

    def select_cols(self, indices: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix.from_rows([[r[j] for j in indices] for r in self.to_rows()])

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=float)
        for i, j, v in self.nonzero_items():
            out[i, j] = float(v)
        return out

    # ---- value semantics ----
    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols})"


def vstack(*blocks: RationalMatrix) -> RationalMatrix:
    if not blocks:
        raise DimensionError("nothing to stack")
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise DimensionError("vstack: column counts differ")
    acc: dict[tuple[int, int], Fraction] = {}
    offset = 0
    for b in blocks:
        for i, j, v in b.nonzero_items():
            acc[(offset + i, j)] = v
        offset += b.rows
    return RationalMatrix.from_sparse(offset, cols, acc)


# ---------------- elimination ---------------- #


def _rref_rows(rows: list[list[Fraction]], cols: int) -> tuple[list[list[Fraction]], list[int]]:
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == len(rows):
            break
        # lowest row index with a nonzero in this column
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        if lead != 1:
            rows[r] = [x / lead for x in rows[r]]
        pivot_row = rows[r]
        for i in range(len(rows)):
            if i == r:
                continue
            f = rows[i][c]
            if f != 0:
                rows[i] = [x - f * y for x, y in zip(rows[i], pivot_row)]
        pivots.append(c)
        r += 1
    return rows, pivots


def rref(m: RationalMatrix) -> tuple[RationalMatrix, int, list[int]]:
    """Reduced row-echelon form, rank and pivot columns (exact)."""
    rows, pivots = _rref_rows(m.to_rows(), m.cols)
    return RationalMatrix.from_rows(rows), len(pivots), pivots


def rank(m: RationalMatrix) -> int:
    return rref(m)[1]


def nullspace(m: RationalMatrix) -> list[RationalVector]:
    """Basis of ``{x : m x = 0}``, one vector per free column."""
    rows, pivots = _rref_rows(m.to_rows(), m.cols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = [_ZERO] * m.cols
        vec[free] = _ONE
        for r, p in enumerate(pivots):
            vec[p] = -rows[r][free]
        basis.append(tuple(vec))
    return basis


class RowSpace:
    """Row space grown one vector at a time, kept fully reduced.

    Each stored row has a leading 1 at its pivot and zeros at every other
    pivot, so membership is a single reduction pass in any order.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: dict[int, list[Fraction]] = {}

    @classmethod
    def of(cls, m: RationalMatrix) -> "RowSpace":
        space = cls(m.cols)
        for i in range(m.rows):
            space.add(m.row(i))
        return space

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        if len(v) != self.dim:
            raise DimensionError(f"vector of length {len(v)} in a {self.dim}-dim row space")
        w = [to_rational(x) for x in v]
        for p, row in self._rows.items():
            f = w[p]
            if f:
                w = [x - f * y for x, y in zip(w, row)]
        return w

    def contains(self, v: Sequence[Fraction]) -> bool:
        return not any(self._reduce(v))

    def add(self, v: Sequence[Fraction]) -> bool:
        """Insert ``v``; returns False when it was already in the span."""
        w = self._reduce(v)
        lead = next((j for j, x in enumerate(w) if x), None)
        if lead is None:
            return False
        if w[lead] != 1:
            w = [x / w[lead] for x in w]
        for p, row in self._rows.items():
            f = row[lead]
            if f:
                self._rows[p] = [x - f * y for x, y in zip(row, w)]
        self._rows[lead] = w
        return True

    def basis(self) -> tuple[RationalVector, ...]:
        """Nonzero rows of the RREF of the space, ordered by pivot."""
        return tuple(tuple(self._rows[p]) for p in sorted(self._rows))

    def pivots(self) -> list[int]:
        return sorted(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RowSpace):
            return NotImplemented
        return self.dim == other.dim and self.basis() == other.basis()


def rowspace_contains(m: RationalMatrix, v: Sequence[Fraction]) -> bool:
    """True iff ``v`` is a linear combination of the rows of ``m``."""
    if len(v) != m.cols:
        raise DimensionError(f"vector of length {len(v)} vs {m.cols} columns")
    return RowSpace.of(m).contains(v)


def rowspace_equal(m1: RationalMatrix, m2: RationalMatrix) -> bool:
    if m1.cols != m2.cols:
        raise DimensionError("row spaces of different ambient dimension")
    return RowSpace.of(m1) == RowSpace.of(m2)


def krylov_rowspace(a: RationalMatrix, c: RationalMatrix) -> RowSpace:
    """Row space of ``[C; CA; ...; CA^{n-1}]`` as the A-invariant closure of rows(C)."""
    if not a.is_square or c.cols != a.rows:
        raise DimensionError(f"incompatible A {a.shape} and C {c.shape}")
    space = RowSpace(a.cols)
    frontier = [c.row(i) for i in range(c.rows) if space.add(c.row(i))]
    while frontier:
        images = (a.vecmat(v) for v in frontier)
        frontier = [w for w in images if space.add(w)]
    return space


def observability_matrix(a: RationalMatrix, c: RationalMatrix) -> RationalMatrix:
    """Explicit Kalman stack ``[C; CA; ...; CA^{n-1}]``; small systems only."""
    if not a.is_square or c.cols != a.rows:
        raise DimensionError(f"incompatible A {a.shape} and C {c.shape}")
    blocks = [c]
    for _ in range(a.rows - 1):
        blocks.append(blocks[-1].matmul(a))
    return vstack(*blocks)


# ---------------- spectra ---------------- #


def left_eigenvector_unit(a: RationalMatrix) -> RationalVector:
    """Exact ``v`` with ``v^T a = v^T`` and ``sum(v) = 1``."""
    if not a.is_square:
        raise DimensionError(f"left eigenvector of a non-square {a.shape} matrix")
    basis = nullspace(a.transpose() - RationalMatrix.identity(a.rows))
    if not basis:
        raise EigenError("no unit eigenvalue")
    if len(basis) > 1:
        raise EigenError("eigenvalue 1 not simple for left eigenspace")
    v = basis[0]
    total = sum(v, _ZERO)
    if total == 0:
        raise EigenError("unit left eigenvector sums to zero")
    return tuple(x / total for x in v)


def eigen_magnitudes(a: RationalMatrix) -> list[float]:
    """Float eigenvalue magnitudes, descending. Diagnostics only."""
    if not a.is_square:
        raise DimensionError(f"eigenvalues of a non-square {a.shape} matrix")
    mags = np.abs(np.linalg.eigvals(a.to_numpy()))
    return sorted((float(x) for x in mags), reverse=True)
