"""
Exact sparse matrices over Q and fraction-free elimination.

``LinearOp`` is the matrix realization of every operator in the package: rows
and columns carry basis labels (monomial-form labels, fiber labels, plain
indices) and entries are stored sparsely as ``(row, col) -> Fraction``.
"""

import logging
from fractions import Fraction
from math import lcm

logger = logging.getLogger(__name__)


class LinearOp:
    """Sparse rational matrix between two labelled bases."""

    def __init__(self, rows, cols, entries=None):
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.row_index = {label: i for i, label in enumerate(self.rows)}
        self.col_index = {label: j for j, label in enumerate(self.cols)}
        if len(self.row_index) != len(self.rows) or len(self.col_index) != len(self.cols):
            raise ValueError("Duplicate basis labels in LinearOp")

        clean = {}
        nrows, ncols = len(self.rows), len(self.cols)
        for (i, j), value in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ValueError(f"Entry ({i}, {j}) outside shape {nrows}x{ncols}")
            value = Fraction(value)
            if value:
                clean[(i, j)] = value
        self.entries = clean

    # Constructors

    @classmethod
    def from_labels(cls, rows, cols, entries):
        """Build from a map keyed by (row_label, col_label)"""
        op = cls(rows, cols)
        clean = {}
        for (row, col), value in entries.items():
            try:
                key = (op.row_index[row], op.col_index[col])
            except KeyError as e:
                raise ValueError(f"Unknown basis label {e.args[0]!r}") from e
            value = clean.get(key, 0) + Fraction(value)
            if value:
                clean[key] = value
            else:
                clean.pop(key, None)
        op.entries = clean
        return op

    @classmethod
    def from_dense(cls, matrix, rows=None, cols=None):
        matrix = [list(row) for row in matrix]
        nrows = len(matrix)
        ncols = len(matrix[0]) if matrix else (len(cols) if cols is not None else 0)
        if any(len(row) != ncols for row in matrix):
            raise ValueError("Ragged dense matrix")
        rows = range(nrows) if rows is None else rows
        cols = range(ncols) if cols is None else cols
        entries = {
            (i, j): value
            for i, row in enumerate(matrix)
            for j, value in enumerate(row)
            if value
        }
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, rows, columns, cols=None):
        """Build from column vectors given as dicts row_label -> value"""
        cols = range(len(columns)) if cols is None else cols
        op = cls(rows, cols)
        entries = {}
        for j, column in enumerate(columns):
            for label, value in column.items():
                if value:
                    try:
                        entries[(op.row_index[label], j)] = Fraction(value)
                    except KeyError as e:
                        raise ValueError(f"Unknown row label {label!r}") from e
        op.entries = entries
        return op

    @classmethod
    def identity(cls, labels):
        labels = tuple(labels)
        return cls(labels, labels, {(i, i): 1 for i in range(len(labels))})

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols)

    # Shape and access

    @property
    def shape(self):
        return (len(self.rows), len(self.cols))

    def to_dense(self):
        dense = [[Fraction(0)] * len(self.cols) for _ in self.rows]
        for (i, j), value in self.entries.items():
            dense[i][j] = value
        return dense

    def column(self, label):
        """Column with the given label as a dict row_label -> value"""
        j = self.col_index[label]
        return {self.rows[i]: v for (i, jj), v in self.entries.items() if jj == j}

    def columns(self):
        cols = [dict() for _ in self.cols]
        for (i, j), value in self.entries.items():
            cols[j][self.rows[i]] = value
        return cols

    def is_zero(self):
        return not self.entries

    # Algebra

    def _check_same_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError(
                f"Shape mismatch: {self.shape} vs {other.shape} (or differing labels)"
            )

    def __add__(self, other):
        self._check_same_shape(other)
        entries = dict(self.entries)
        for key, value in other.entries.items():
            entries[key] = entries.get(key, 0) + value
        return LinearOp(self.rows, self.cols, entries)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LinearOp(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, Fraction)):
            return NotImplemented
        return LinearOp(self.rows, self.cols, {k: v * scalar for k, v in self.entries.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, LinearOp):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(
                f"Shape mismatch in product: {self.shape} @ {other.shape}"
            )
        by_row = {}
        for (k, j), value in other.entries.items():
            by_row.setdefault(k, []).append((j, value))
        entries = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                entries[(i, j)] = entries.get((i, j), 0) + a * b
        return LinearOp(self.rows, other.cols, entries)

    def transpose(self):
        return LinearOp(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    @property
    def T(self):  # pylint: disable=invalid-name
        return self.transpose()

    def __eq__(self, other):
        if not isinstance(other, LinearOp):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and self.entries == other.entries

    __hash__ = None

    def __repr__(self):
        return f"LinearOp({len(self.rows)}x{len(self.cols)}, nnz={len(self.entries)})"

    def apply(self, vector):
        """
        Apply to a vector given as dict col_label -> value.

        Values may be Fractions or anything closed under addition and scalar
        multiplication by Fractions (e.g. ``Poly``); zero results are dropped.
        """
        result = {}
        for (i, j), a in self.entries.items():
            value = vector.get(self.cols[j])
            if not value:
                continue
            label = self.rows[i]
            term = a * value
            if label in result:
                result[label] = result[label] + term
            else:
                result[label] = term
        return {label: value for label, value in result.items() if value}

    # Elimination-backed queries

    def rank(self):
        return rank_kernel_image(self)[0]

    def kernel(self):
        return rank_kernel_image(self)[1]

    def image(self):
        return rank_kernel_image(self)[2]

    def pseudo_inverse(self):
        return pseudo_inverse(self)

    def inverse(self):
        return inverse(self)


def _integer_rows(op):
    """Rows of ``op`` as dicts col -> int, each scaled by the lcm of its denominators"""
    rows = [dict() for _ in op.rows]
    for (i, j), value in op.entries.items():
        rows[i][j] = value
    scaled = []
    for row in rows:
        if not row:
            continue
        scale = lcm(*(v.denominator for v in row.values()))
        scaled.append({j: int(v * scale) for j, v in row.items()})
    return scaled


def fraction_free_echelon(rows, ncols):
    """
    Bareiss-style fraction-free row echelon form.

    Args:
        rows: List of sparse integer rows (dict col -> int)
        ncols: Number of columns

    Returns:
        (echelon rows, pivot columns); every division in the update is exact.
    """
    rows = [dict(row) for row in rows if row]
    pivots = []
    prev = 1
    top = 0
    for col in range(ncols):
        if top == len(rows):
            break
        pivot_row = next((k for k in range(top, len(rows)) if rows[k].get(col)), None)
        if pivot_row is None:
            continue
        rows[top], rows[pivot_row] = rows[pivot_row], rows[top]
        prow = rows[top]
        piv = prow[col]
        for k in range(top + 1, len(rows)):
            row = rows[k]
            a = row.get(col, 0)
            keys = set(row) | set(prow) if a else set(row)
            updated = {}
            for j in keys:
                value = piv * row.get(j, 0) - a * prow.get(j, 0)
                if value:
                    quotient, remainder = divmod(value, prev)
                    if remainder:
                        raise ArithmeticError("Inexact division in fraction-free elimination")
                    updated[j] = quotient
            rows[k] = updated
        pivots.append(col)
        prev = piv
        top += 1
    return rows[:top], pivots


def _reduced_rows(op):
    """Reduced row echelon rows (dict col_index -> Fraction) and pivot columns"""
    echelon, pivots = fraction_free_echelon(_integer_rows(op), len(op.cols))
    reduced = [dict(row) for row in echelon]
    for k in range(len(reduced) - 1, -1, -1):
        col = pivots[k]
        piv = reduced[k][col]
        reduced[k] = {j: Fraction(v, 1) / piv for j, v in reduced[k].items()}
        for i in range(k):
            factor = reduced[i].get(col)
            if factor:
                row = reduced[i]
                for j, v in reduced[k].items():
                    value = row.get(j, 0) - factor * v
                    if value:
                        row[j] = value
                    else:
                        row.pop(j, None)
    return reduced, pivots


def rank_kernel_image(m):
    """
    Exact rank, kernel basis and image basis of a LinearOp.

    Returns:
        (rank, kernel_basis, image_basis) where kernel vectors are dicts
        col_label -> Fraction and image vectors are the pivot columns of ``m``
        as dicts row_label -> Fraction.
    """
    reduced, pivots = _reduced_rows(m)
    pivot_set = set(pivots)
    kernel = []
    for free in range(len(m.cols)):
        if free in pivot_set:
            continue
        vector = {m.cols[free]: Fraction(1)}
        for row, col in zip(reduced, pivots):
            value = row.get(free)
            if value:
                vector[m.cols[col]] = -value
        kernel.append(vector)
    columns = m.columns()
    image = [columns[j] for j in pivots]
    return len(pivots), kernel, image


def _dense_inverse(matrix):
    """Gauss-Jordan inverse of a small dense Fraction matrix"""
    size = len(matrix)
    work = [list(row) + [Fraction(int(i == j)) for j in range(size)] for i, row in enumerate(matrix)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if work[r][col]), None)
        if pivot is None:
            raise ValueError("Matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        piv = work[col][col]
        work[col] = [v / piv for v in work[col]]
        for r in range(size):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return [row[size:] for row in work]


def inverse(m):
    """Exact inverse of a square invertible LinearOp (rows and cols swap roles)"""
    if len(m.rows) != len(m.cols):
        raise ValueError(f"Cannot invert non-square matrix of shape {m.shape}")
    if not m.rows:
        return LinearOp(m.cols, m.rows)
    return LinearOp.from_dense(_dense_inverse(m.to_dense()), rows=m.cols, cols=m.rows)


def pseudo_inverse(m):
    """
    Exact Moore-Penrose inverse via the full-rank factorization m = C R.

    C holds the pivot columns of m and R the non-zero rows of its reduced
    echelon form, so m+ = R^T (R R^T)^-1 (C^T C)^-1 C^T.
    """
    reduced, pivots = _reduced_rows(m)
    if not pivots:
        return LinearOp(m.cols, m.rows)
    rank = len(pivots)
    inner = tuple(range(rank))
    position = {col: k for k, col in enumerate(pivots)}
    c = LinearOp(m.rows, inner, {
        (i, position[j]): v for (i, j), v in m.entries.items() if j in position
    })
    r = LinearOp(inner, m.cols, {
        (k, j): v for k, row in enumerate(reduced) for j, v in row.items()
    })
    rrt_inv = inverse(r @ r.T)
    ctc_inv = inverse(c.T @ c)
    return r.T @ rrt_inv @ ctc_inv @ c.T


def in_span(vectors, candidate):
    """True when ``candidate`` lies in the span of ``vectors`` (all dicts label -> value)"""
    labels = sorted({label for v in vectors for label in v} | set(candidate), key=repr)
    base = LinearOp.from_columns(labels, list(vectors))
    augmented = LinearOp.from_columns(labels, list(vectors) + [candidate])
    return base.rank() == augmented.rank()


def span_rank(vectors):
    """Dimension of the span of a list of sparse vectors"""
    if not vectors:
        return 0
    labels = sorted({label for v in vectors for label in v}, key=repr)
    return LinearOp.from_columns(labels, list(vectors)).rank()
