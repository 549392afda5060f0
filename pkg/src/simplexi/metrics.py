"""Evaluation: vertex matching, convex-hull least-squares loss, and the
spectral-residual and subset-smoothing verification checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .learner import VertexEstimates
from .sketch import DENSE_ORACLE_LIMIT, svd_tail_norms
from .sparsemat import (
    LinearOp,
    SparseColMatrix,
    column_subset_mean,
    left_apply,
    right_apply,
    spectral_norm_est,
)
from .subspace import orthonormalize

__all__ = [
    "MatchResult",
    "BenchRecord",
    "ReductionCheck",
    "match_vertices",
    "ls_loss",
    "project_columns_to_simplex",
    "reduction_check",
    "subset_smoothing_check",
]

VertexSource = Union[VertexEstimates, np.ndarray, Sequence[np.ndarray]]


def _vertex_matrix(vertices: VertexSource) -> np.ndarray:
    if isinstance(vertices, VertexEstimates):
        return vertices.vertices
    arr = np.asarray(vertices, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    return np.column_stack([np.asarray(v, dtype=np.float64) for v in vertices])


@dataclass(frozen=True)
class MatchResult:
    """Best pairing of estimated vertices to true vertices.

    ``permutation[t]`` is the true-vertex column matched to estimate t
    under the minimum-total-cost assignment; ``bound`` is the error
    budget 300 k^4 sigma / (alpha sqrt(delta)) when those quantities are
    supplied, else NaN.
    """

    permutation: np.ndarray
    per_vertex_error: np.ndarray
    max_error: float
    bound: float
    within_bound: bool


@dataclass(frozen=True)
class BenchRecord:
    """One benchmark grid cell: phase timings plus optional losses."""

    label: str
    wall_time_sketch: float
    wall_time_topk: float
    loss_sketch: float
    loss_topk: float
    seed: int


@dataclass(frozen=True)
class ReductionCheck:
    """Squared spectral residual of projecting A onto the recovered
    vertex span, against the rank-k tail budget."""

    spectral_residual: float  # ||A - P_B A||_2^2
    lra_bound: float  # ||A - A_k||_2^2 + n^(-1/3) ||A - A_k||_F^2
    passes: bool


def match_vertices(
    est: VertexSource,
    M: np.ndarray,
    sigma: float | None = None,
    alpha: float | None = None,
    delta: float | None = None,
) -> MatchResult:
    """Match estimates to true vertices by exact minimum-cost assignment."""
    V = _vertex_matrix(est)
    M = np.asarray(M, dtype=np.float64)
    if V.shape[0] != M.shape[0] or V.shape[1] != M.shape[1]:
        raise ValueError(f"estimate block {V.shape} does not match vertex block {M.shape}")
    k = M.shape[1]
    cost = np.linalg.norm(V[:, :, None] - M[:, None, :], axis=0)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(k, dtype=np.int64)
    perm[rows] = cols
    errors = cost[rows, cols][np.argsort(rows)]
    max_error = float(errors.max()) if k else 0.0
    if sigma is not None and alpha is not None and delta is not None and alpha > 0:
        bound = 300.0 * float(k) ** 4 * sigma / (alpha * np.sqrt(delta))
    else:
        bound = float("nan")
    within = bool(max_error <= bound) if np.isfinite(bound) else False
    return MatchResult(perm, errors, max_error, bound, within)


def project_columns_to_simplex(W: np.ndarray) -> np.ndarray:
    """Euclidean projection of every column onto the probability simplex.

    Exact sort-based rule: with the column sorted descending, the active
    support is the largest prefix whose shifted average stays below its
    smallest element.
    """
    W = np.asarray(W, dtype=np.float64)
    k, s = W.shape
    U = -np.sort(-W, axis=0)
    css = np.cumsum(U, axis=0) - 1.0
    denom = np.arange(1, k + 1, dtype=np.float64)[:, None]
    cond = U - css / denom > 0
    rho = k - 1 - np.argmax(cond[::-1, :], axis=0)
    tau = css[rho, np.arange(s)] / (rho + 1.0)
    return np.maximum(W - tau[None, :], 0.0)


def ls_loss(
    A: SparseColMatrix,
    vertices: VertexSource,
    sample: int,
    iters: int = 200,
    seed: int = 0,
    span_only: bool = False,
) -> float:
    """Squared residual of fitting sampled columns inside the vertex hull.

    For each sampled column solve min_w ||A_j - V w||^2 over the
    probability simplex by projected gradient (fixed iteration count,
    step 1/||V^T V||_2), then scale the summed residual by n / sample.
    ``span_only`` switches to the unconstrained span projection instead.
    """
    V = _vertex_matrix(vertices)
    d, n = A.shape
    if not 1 <= sample <= n:
        raise ValueError(f"sample={sample} out of range for n={n}")
    if iters < 1:
        raise ValueError("iters must be at least 1")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=sample, replace=False))
    X = A._scipy[:, idx].toarray()

    if span_only:
        basis = orthonormalize(V)
        R = X if basis.is_empty else X - basis.cols @ (basis.cols.T @ X)
        return float(np.sum(R * R) * (n / sample))

    k = V.shape[1]
    G = V.T @ V
    L = float(np.linalg.eigvalsh(G)[-1]) if k else 0.0
    if L == 0.0:
        return float(np.sum(X * X) * (n / sample))
    VtX = V.T @ X
    W = np.full((k, sample), 1.0 / k)
    step = 1.0 / L
    for _ in range(iters):
        grad = G @ W - VtX
        W = project_columns_to_simplex(W - step * grad)
    R = X - V @ W
    return float(np.sum(R * R) * (n / sample))


def reduction_check(A: SparseColMatrix, est: VertexSource, k: int) -> ReductionCheck:
    """Spectral-residual test of the recovered vertex span.

    Passes when the squared spectral norm of A minus its projection onto
    the span of the recovered vertices is at most the rank-k tail budget
    ||A - A_k||_2^2 + n^(-1/3) ||A - A_k||_F^2 (dense oracle)."""
    V = _vertex_matrix(est)
    d, n = A.shape
    basis = orthonormalize(V)
    spec_tail, frob_tail_sq = svd_tail_norms(A, k)
    bound = spec_tail**2 + frob_tail_sq / float(n) ** (1.0 / 3.0)
    floor = 1e-12 * float(np.sum(A.values * A.values))  # rounding allowance

    if basis.is_empty:
        top = spectral_norm_est(A, tol=1e-9, seed=0).value
        residual = top * top
        return ReductionCheck(residual, bound, bool(residual <= bound + floor))

    Q = basis.cols
    if min(d, n) <= DENSE_ORACLE_LIMIT and d * n <= 50_000_000:
        Ad = A.toarray()
        R = Ad - Q @ (Q.T @ Ad)
        residual = float(np.linalg.svd(R, compute_uv=False)[0]) ** 2
    else:
        op = LinearOp(
            A.shape,
            lambda x: (lambda w: w - Q @ (Q.T @ w))(right_apply(A, x)),
            lambda y: left_apply(y - Q @ (Q.T @ y), A),
        )
        top = spectral_norm_est(op, tol=1e-9, seed=0).value
        residual = top * top
    return ReductionCheck(residual, bound, bool(residual <= bound + floor))


def subset_smoothing_check(
    A: SparseColMatrix,
    P: np.ndarray,
    sigma: float,
    trials: int = 1000,
    seed: int = 0,
) -> float:
    """Worst noise-shrinkage ratio over random column subsets.

    For each seeded random subset S, the averaged observation column can
    deviate from the averaged latent column by at most
    sigma sqrt(n / |S|); this returns the largest measured
    ||A_S - P_S|| sqrt(|S| / n) / sigma, which stays at or below 1 when
    sigma is the true spectral norm of (A - P) / sqrt(n).
    """
    P = np.asarray(P, dtype=np.float64)
    d, n = A.shape
    if P.shape != (d, n):
        raise ValueError(f"shape mismatch: A is {A.shape}, P is {P.shape}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        size = int(np.exp(rng.uniform(0.0, np.log(n))))
        size = min(max(size, 1), n)
        S = rng.choice(n, size=size, replace=False)
        diff = column_subset_mean(A, S) - P[:, S].mean(axis=1)
        num = float(np.linalg.norm(diff)) * np.sqrt(size / n)
        if sigma > 0:
            worst = max(worst, num / sigma)
        elif num > 1e-15:
            return float("inf")
    return worst
