"""Sparse and dense matrix core.

Compressed sparse-column storage for the (usually large) observation
matrix, the matrix-vector / matrix-matrix kernels everything else is
built on, a seeded power-method spectral-norm estimator, and parsers
for whitespace edge lists and the text snapshot format.

All matrices are immutable after construction and every operation here
is a pure function, so they are safe to call from concurrent code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence, TextIO, Union

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseColMatrix",
    "LinearOp",
    "NormEstimate",
    "ParsedEdgeList",
    "build_csc",
    "from_scipy",
    "right_apply",
    "left_apply",
    "column_subset_mean",
    "spectral_norm_est",
    "parse_edge_list",
    "save_matrix_snapshot",
    "load_matrix_snapshot",
    "save_dense_block",
    "load_dense_block",
]

# A triplet is (row, col, value); dense matrices are plain float64 ndarrays.
Triplet = tuple[int, int, float]


@dataclass(frozen=True)
class SparseColMatrix:
    """Immutable d x n matrix in compressed sparse-column form.

    Invariants: ``col_ptr`` is nondecreasing with ``col_ptr[0] == 0`` and
    ``col_ptr[n] == nnz``; row indices are strictly increasing within each
    column and less than ``rows``; no explicitly stored zeros.
    """

    rows: int
    cols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @cached_property
    def _scipy(self) -> sp.csc_array:
        # Zero-copy view used by the product kernels.
        return sp.csc_array(
            (self.values, self.row_idx, self.col_ptr), shape=(self.rows, self.cols)
        )

    def toarray(self) -> np.ndarray:
        return self._scipy.toarray()

    def column_nnz(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def transpose(self) -> "SparseColMatrix":
        return from_scipy(self._scipy.T.tocsc())


def build_csc(triplets: Sequence[Triplet], d: int, n: int) -> SparseColMatrix:
    """Assemble a ``SparseColMatrix`` from (row, col, value) triplets.

    Duplicate entries at the same position are summed and entries that
    end up exactly zero are dropped.  Raises ``ValueError`` naming the
    first offending triplet if an index is out of range.
    """
    if d < 0 or n < 0:
        raise ValueError(f"matrix dimensions must be nonnegative, got {d}x{n}")
    if len(triplets) == 0:
        empty_ptr = np.zeros(n + 1, dtype=np.int64)
        return SparseColMatrix(
            d, n, empty_ptr, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64)
        )
    r = np.asarray([t[0] for t in triplets], dtype=np.int64)
    c = np.asarray([t[1] for t in triplets], dtype=np.int64)
    v = np.asarray([t[2] for t in triplets], dtype=np.float64)
    bad = np.flatnonzero((r < 0) | (r >= d) | (c < 0) | (c >= n))
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"triplet #{i} = ({r[i]}, {c[i]}, {v[i]}) out of range for a {d}x{n} matrix"
        )
    if not np.all(np.isfinite(v)):
        i = int(np.flatnonzero(~np.isfinite(v))[0])
        raise ValueError(f"triplet #{i} has non-finite value {v[i]}")

    order = np.lexsort((r, c))
    r, c, v = r[order], c[order], v[order]
    first = np.empty(r.size, dtype=bool)
    first[0] = True
    first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
    starts = np.flatnonzero(first)
    summed = np.add.reduceat(v, starts)
    r, c = r[starts], c[starts]
    keep = summed != 0.0
    r, c, summed = r[keep], c[keep], summed[keep]

    col_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(c, minlength=n), out=col_ptr[1:])
    return SparseColMatrix(d, n, col_ptr, r, summed)


def from_scipy(m) -> SparseColMatrix:
    """Canonicalize any scipy sparse matrix into a ``SparseColMatrix``."""
    m = sp.csc_array(m)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return SparseColMatrix(
        m.shape[0],
        m.shape[1],
        np.asarray(m.indptr, dtype=np.int64),
        np.asarray(m.indices, dtype=np.int64),
        np.asarray(m.data, dtype=np.float64),
    )


def right_apply(A: SparseColMatrix, X: np.ndarray) -> np.ndarray:
    """Exact product ``A @ X`` in time proportional to nnz(A) * X.shape[1]."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != A.cols:
        raise ValueError(f"inner dimensions mismatch: {A.shape} @ {X.shape}")
    out = A._scipy @ X
    return np.asarray(out)


def left_apply(y: np.ndarray, A: SparseColMatrix) -> np.ndarray:
    """Row-vector product ``y^T A`` in time proportional to nnz(A)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != A.rows:
        raise ValueError(f"expected a length-{A.rows} vector, got shape {y.shape}")
    return np.asarray(y @ A._scipy)


def column_subset_mean(A: SparseColMatrix, S: np.ndarray) -> np.ndarray:
    """Average of the columns of A indexed by S, as a dense d-vector.

    Runtime is proportional to the total nnz of the selected columns.
    """
    S = np.asarray(S, dtype=np.int64).ravel()
    if S.size == 0:
        raise ValueError("column subset must be nonempty")
    if S.min() < 0 or S.max() >= A.cols:
        raise ValueError(f"column index out of range for n={A.cols}")
    counts = A.col_ptr[S + 1] - A.col_ptr[S]
    total = int(counts.sum())
    acc = np.zeros(A.rows, dtype=np.float64)
    if total:
        # Entry ranges of the selected columns, gathered without a python loop.
        offsets = np.repeat(A.col_ptr[S], counts)
        within = np.arange(total) - np.repeat(
            np.concatenate(([0], np.cumsum(counts)[:-1])), counts
        )
        entry = offsets + within
        np.add.at(acc, A.row_idx[entry], A.values[entry])
    acc /= S.size
    return acc


class LinearOp(NamedTuple):
    """Minimal matrix-free operator: shape plus matvec/rmatvec closures."""

    shape: tuple[int, int]
    matvec: Callable[[np.ndarray], np.ndarray]
    rmatvec: Callable[[np.ndarray], np.ndarray]


class NormEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


MatrixLike = Union[SparseColMatrix, np.ndarray, LinearOp]


def _as_linear_op(A: MatrixLike) -> LinearOp:
    if isinstance(A, LinearOp):
        return A
    if isinstance(A, SparseColMatrix):
        return LinearOp(A.shape, lambda x: right_apply(A, x), lambda y: left_apply(y, A))
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("expected a 2-d array")
    return LinearOp(M.shape, lambda x: M @ x, lambda y: y @ M)


def spectral_norm_est(
    A: MatrixLike,
    tol: float = 1e-6,
    max_iter: int = 300,
    seed: int = 0,
) -> NormEstimate:
    """Power-method estimate of the spectral norm ``||A||_2``.

    Iterates x <- A^T (A x) from a seeded random unit vector and returns
    the Rayleigh estimate once its relative change drops below ``tol``.
    If the top eigenvalue is degenerate or ``max_iter`` is exhausted the
    best estimate is returned with ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = _as_linear_op(A)
    d, n = op.shape
    if d == 0 or n == 0:
        return NormEstimate(0.0, True, 0)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    quiet = 0
    for it in range(1, max_iter + 1):
        w = op.matvec(x)
        new_est = float(np.linalg.norm(w))
        if new_est == 0.0:
            return NormEstimate(0.0, True, it)
        x = op.rmatvec(w)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return NormEstimate(new_est, True, it)
        x /= nx
        # two consecutive quiet steps, so a slowly mixing iterate does
        # not stop on one small increment
        if abs(new_est - est) <= tol * max(new_est, np.finfo(float).tiny):
            quiet += 1
            if quiet >= 2:
                return NormEstimate(new_est, True, it)
        else:
            quiet = 0
        est = new_est
    return NormEstimate(est, False, max_iter)


@dataclass(frozen=True)
class ParsedEdgeList:
    """Edge-list parse result: the matrix plus raw node/edge statistics."""

    matrix: SparseColMatrix
    num_nodes: int
    num_edges: int


def _iter_edge_lines(source: Union[str, TextIO, Iterable[str]]):
    lines = source.splitlines() if isinstance(source, str) else source
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two integers, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: expected two integers, got {line!r}") from None
        yield u, v


def parse_edge_list(
    source: Union[str, TextIO, Iterable[str]],
    mode: str = "square",
    d: int | None = None,
    n: int | None = None,
    seed: int = 0,
) -> ParsedEdgeList:
    """Parse a whitespace edge list ('#' lines are comments) into a 0/1 matrix.

    mode="square": symmetric adjacency matrix over the observed node ids,
    remapped densely in sorted order.

    mode="bipartite": the observed node ids are shuffled uniformly with
    ``seed``; the first ``d`` become row-nodes and the next ``n`` become
    column-nodes.  An edge contributes a 1 whenever one endpoint lands on
    each side.  Requires at least d + n observed nodes.
    """
    us, vs = [], []
    for u, v in _iter_edge_lines(source):
        us.append(u)
        vs.append(v)
    if not us:
        raise ValueError("edge list contains no edges (no nodes observed)")
    u = np.asarray(us, dtype=np.int64)
    v = np.asarray(vs, dtype=np.int64)
    ids = np.unique(np.concatenate([u, v]))
    num_nodes = int(ids.size)
    num_edges = int(u.size)

    if mode == "square":
        remap = {int(x): i for i, x in enumerate(ids)}
        ui = np.asarray([remap[int(x)] for x in u], dtype=np.int64)
        vi = np.asarray([remap[int(x)] for x in v], dtype=np.int64)
        rows = np.concatenate([ui, vi])
        cols = np.concatenate([vi, ui])
        pairs = np.unique(np.stack([rows, cols], axis=1), axis=0)
        m = sp.coo_array(
            (np.ones(pairs.shape[0]), (pairs[:, 0], pairs[:, 1])),
            shape=(num_nodes, num_nodes),
        )
        return ParsedEdgeList(from_scipy(m), num_nodes, num_edges)

    if mode == "bipartite":
        if d is None or n is None:
            raise ValueError("bipartite mode requires d and n")
        if num_nodes < d + n:
            raise ValueError(
                f"bipartite split needs at least d+n={d + n} nodes, observed {num_nodes}"
            )
        rng = np.random.default_rng(seed)
        shuffled = ids[rng.permutation(num_nodes)]
        row_of = {int(x): i for i, x in enumerate(shuffled[:d])}
        col_of = {int(x): j for j, x in enumerate(shuffled[d : d + n])}
        rr, cc = [], []
        for a, b in zip(u, v):
            a, b = int(a), int(b)
            if a in row_of and b in col_of:
                rr.append(row_of[a])
                cc.append(col_of[b])
            if b in row_of and a in col_of:
                rr.append(row_of[b])
                cc.append(col_of[a])
        if rr:
            pairs = np.unique(np.stack([rr, cc], axis=1), axis=0)
            m = sp.coo_array(
                (np.ones(pairs.shape[0]), (pairs[:, 0], pairs[:, 1])), shape=(d, n)
            )
        else:
            m = sp.csc_array((d, n))
        return ParsedEdgeList(from_scipy(m), num_nodes, num_edges)

    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Text snapshot formats (fixtures and CLI artifacts).
# ---------------------------------------------------------------------------


def save_matrix_snapshot(A: SparseColMatrix, f: TextIO) -> None:
    """Write the 'd n nnz' header followed by one 'row col value' per line."""
    f.write(f"{A.rows} {A.cols} {A.nnz}\n")
    col_of = np.repeat(np.arange(A.cols), A.column_nnz())
    for r, c, v in zip(A.row_idx, col_of, A.values):
        f.write(f"{r} {c} {v:.17g}\n")


def load_matrix_snapshot(f: TextIO) -> SparseColMatrix:
    header = f.readline().split()
    if len(header) != 3:
        raise ValueError("snapshot header must be 'd n nnz'")
    d, n, nnz = (int(x) for x in header)
    triplets = []
    for _ in range(nnz):
        parts = f.readline().split()
        if len(parts) != 3:
            raise ValueError("snapshot body line must be 'row col value'")
        triplets.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return build_csc(triplets, d, n)


def save_dense_block(name: str, M: np.ndarray, f: TextIO) -> None:
    """Write a named dense block: header '<name> rows cols', one row per line."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    f.write(f"{name} {M.shape[0]} {M.shape[1]}\n")
    for row in M:
        f.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_dense_block(f: TextIO) -> tuple[str, np.ndarray]:
    header = f.readline().split()
    if len(header) != 3:
        raise ValueError("dense block header must be '<name> rows cols'")
    name, rows, cols = header[0], int(header[1]), int(header[2])
    data = np.empty((rows, cols), dtype=np.float64)
    for i in range(rows):
        vals = f.readline().split()
        if len(vals) != cols:
            raise ValueError(f"dense block row {i} has {len(vals)} values, expected {cols}")
        data[i] = [float(x) for x in vals]
    return name, data
