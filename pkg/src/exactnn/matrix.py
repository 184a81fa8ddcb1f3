"""Exact scalars and 2-D matrices with interchangeable dense and sparse payloads.

Scalars are arbitrary-precision integers or ``fractions.Fraction`` rationals;
arithmetic never rounds. Matrices are immutable after construction and safe
to share across workers. The sparse payload maps (row, col) index pairs to
nonzero values and reads as 0 everywhere else, including outside the stated
bounds; the dense payload is a row-major array and raises on out-of-bounds
reads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator

Scalar = int | Fraction
Vector = list

DENSE = "dense"
SPARSE = "sparse"
REPRESENTATIONS = (DENSE, SPARSE)


class DimensionError(Exception):
    """Raised when an operation receives incompatibly shaped operands.

    Carries the operation name plus expected/actual shapes so the failing
    call site can be reconstructed from the error alone.
    """

    def __init__(self, operation: str, expected, actual):
        self.operation = operation
        self.expected = expected
        self.actual = actual
        super().__init__(f"{operation}: expected {expected}, actual {actual}")


def parse_scalar(text: str, dtype: str = "rational") -> Scalar:
    """Parse a numeric literal exactly.

    Decimal strings ("0.05374"), integer strings ("-3") and fraction strings
    ("2687/50000") all parse without rounding. dtype "int" insists on an
    integer literal.
    """
    text = text.strip()
    if dtype == "int":
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"not an integer literal: {text!r}") from None
    if dtype != "rational":
        raise ValueError(f"unknown dtype: {dtype!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a numeric literal: {text!r}") from None


def scalar_to_text(value: Scalar) -> str:
    """Render a scalar exactly, preferring decimal notation.

    Integers and rationals whose denominator is 2^a * 5^b render as decimal
    strings with no trailing zeros; anything else falls back to "p/q".
    ``parse_scalar`` inverts both forms.
    """
    if isinstance(value, int):
        return str(value)
    if value.denominator == 1:
        return str(value.numerator)
    rest = value.denominator
    twos = 0
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    fives = 0
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    assert scaled.denominator == 1
    sign = "-" if scaled < 0 else ""
    body = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{body[:-digits]}.{body[-digits:]}"


class Matrix:
    """2-D array of exact scalars behind one interface for both payloads."""

    __slots__ = ("rows", "cols", "_dense", "_map")

    def __init__(self, rows: int, cols: int, *, _dense=None, _map=None):
        if rows < 0 or cols < 0:
            raise ValueError(f"negative dimensions: {(rows, cols)}")
        self.rows = rows
        self.cols = cols
        self._dense = _dense
        self._map = _map

    # -- constructors ------------------------------------------------------

    @staticmethod
    def dense(rows: int, cols: int, values) -> "Matrix":
        values = list(values)
        if len(values) != rows * cols:
            raise ValueError(
                f"dense payload length {len(values)} != {rows}*{cols}"
            )
        return Matrix(rows, cols, _dense=values)

    @staticmethod
    def from_rows(rows_of_values) -> "Matrix":
        rows_of_values = [list(r) for r in rows_of_values]
        nrows = len(rows_of_values)
        ncols = len(rows_of_values[0]) if nrows else 0
        flat = []
        for i, row in enumerate(rows_of_values):
            if len(row) != ncols:
                raise ValueError(f"ragged row {i}: {len(row)} != {ncols}")
            flat.extend(row)
        return Matrix(nrows, ncols, _dense=flat)

    @staticmethod
    def sparse(rows: int, cols: int, mapping=None) -> "Matrix":
        cleaned = {}
        for (i, j), v in dict(mapping or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"sparse key out of bounds: {(i, j)}")
            if v != 0:
                cleaned[(i, j)] = v
        return Matrix(rows, cols, _map=cleaned)

    @staticmethod
    def zeros(rows: int, cols: int, representation: str = DENSE) -> "Matrix":
        if representation == DENSE:
            return Matrix.dense(rows, cols, [0] * (rows * cols))
        return Matrix.sparse(rows, cols, {})

    # -- accessors ---------------------------------------------------------

    @property
    def representation(self) -> str:
        return DENSE if self._dense is not None else SPARSE

    @property
    def shape(self) -> tuple:
        return (self.rows, self.cols)

    def get(self, i: int, j: int) -> Scalar:
        """Element read; sparse matrices read 0 outside their bounds."""
        if self._dense is not None:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise DimensionError("get", f"index within {self.shape}", (i, j))
            return self._dense[i * self.cols + j]
        return self._map.get((i, j), 0)

    def row(self, i: int) -> list:
        if not 0 <= i < self.rows:
            raise DimensionError("row", f"row index within {self.rows}", i)
        if self._dense is not None:
            return self._dense[i * self.cols : (i + 1) * self.cols]
        return [self._map.get((i, j), 0) for j in range(self.cols)]

    def to_rows(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    def nonzero_items(self) -> Iterator[tuple]:
        """Yield ((i, j), value) for nonzero entries in row-major order."""
        if self._dense is not None:
            k = 0
            for i in range(self.rows):
                for j in range(self.cols):
                    v = self._dense[k]
                    k += 1
                    if v != 0:
                        yield (i, j), v
        else:
            for key in sorted(self._map):
                yield key, self._map[key]

    # -- transforms --------------------------------------------------------

    def map_scalars(self, f: Callable[[Scalar], Scalar]) -> "Matrix":
        """Apply f elementwise, keeping shape and representation.

        Sparse matrices require f(0) == 0 so defaults stay implicit.
        """
        if self._dense is not None:
            return Matrix(self.rows, self.cols, _dense=[f(v) for v in self._dense])
        if f(0) != 0:
            raise ValueError("map_scalars on sparse payload needs f(0) == 0")
        return Matrix.sparse(
            self.rows, self.cols, {k: f(v) for k, v in self._map.items()}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(
            self.get(i, j) == other.get(i, j)
            for i in range(self.rows)
            for j in range(self.cols)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols}, {self.representation})"


def convert(m: Matrix, target: str) -> Matrix:
    """Change payload representation, preserving shape and every element."""
    if target not in REPRESENTATIONS:
        raise ValueError(f"unknown representation: {target!r}")
    if target == m.representation:
        return m
    if target == SPARSE:
        return Matrix.sparse(m.rows, m.cols, dict(m.nonzero_items()))
    values = [0] * (m.rows * m.cols)
    for (i, j), v in m.nonzero_items():
        values[i * m.cols + j] = v
    return Matrix(m.rows, m.cols, _dense=values)


def dot_product(a: Vector, b: Vector) -> Scalar:
    """Sum of elementwise products; lengths must match."""
    if len(a) != len(b):
        raise DimensionError("dot_product", f"length {len(a)}", f"length {len(b)}")
    total = 0
    for x, y in zip(a, b):
        total += x * y
    return total


def sub_matrix(m: Matrix, origin: tuple, size: tuple) -> Matrix:
    """The size-(r, c) window of m whose top-left element is m[origin].

    Dense matrices raise when the window leaves their bounds; sparse
    matrices fill out-of-bounds positions with 0.
    """
    i0, j0 = origin
    r, c = size
    if r < 0 or c < 0:
        raise ValueError(f"negative window size: {size}")
    if m.representation == DENSE:
        if not (0 <= i0 and 0 <= j0 and i0 + r <= m.rows and j0 + c <= m.cols):
            raise DimensionError(
                "sub_matrix",
                f"window {size} at {origin} within {m.shape}",
                m.shape,
            )
        values = []
        for i in range(i0, i0 + r):
            values.extend(m._dense[i * m.cols + j0 : i * m.cols + j0 + c])
        return Matrix(r, c, _dense=values)
    mapping = {}
    for (i, j), v in m.nonzero_items():
        if i0 <= i < i0 + r and j0 <= j < j0 + c:
            mapping[(i - i0, j - j0)] = v
    return Matrix.sparse(r, c, mapping)


def map2(f: Callable[[Scalar, Scalar], Scalar], a: Matrix, b: Matrix) -> Matrix:
    """Elementwise combination of two equally shaped matrices."""
    if a.shape != b.shape:
        raise DimensionError("map2", a.shape, b.shape)
    if a.representation == SPARSE and b.representation == SPARSE and f(0, 0) == 0:
        keys = set(a._map) | set(b._map)
        return Matrix.sparse(
            a.rows, a.cols, {k: f(a._map.get(k, 0), b._map.get(k, 0)) for k in keys}
        )
    values = []
    for i in range(a.rows):
        ra, rb = a.row(i), b.row(i)
        values.extend(f(x, y) for x, y in zip(ra, rb))
    return Matrix(a.rows, a.cols, _dense=values)
