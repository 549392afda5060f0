"""Randomized low-rank approximation.

The fast path sketches the columns of a sparse d x n matrix with a
CountSketch (one signed bucket per column), optionally compresses the
sketch image with a small Gaussian test matrix when the bucket count
exceeds what the final rank needs, and extracts the best rank-k factors
of the projected matrix through a small eigendecomposition.  The slow
exact truncated SVD lives here too, as the test oracle, together with
the classical subspace power iteration used as the comparison baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO, Union

import numpy as np
import scipy.sparse as sp

from .sparsemat import (
    LinearOp,
    SparseColMatrix,
    load_dense_block,
    right_apply,
    save_dense_block,
    spectral_norm_est,
)

__all__ = [
    "CountSketch",
    "RankKFactors",
    "SvdTriple",
    "PowerIterationResult",
    "make_countsketch",
    "apply_countsketch",
    "mixed_lra",
    "lra_residual_norm",
    "exact_topk_svd",
    "svd_tail_norms",
    "singular_values",
    "subspace_power",
    "default_power_iters",
    "save_rank_k_factors",
    "load_rank_k_factors",
]

DENSE_ORACLE_LIMIT = 4000  # refuse the exact SVD when min(d, n) exceeds this


@dataclass(frozen=True)
class CountSketch:
    """Signed bucket assignment mapping n input coordinates to c buckets."""

    input_dim: int
    sketch_dim: int
    bucket: np.ndarray  # one bucket index per input coordinate
    sign: np.ndarray  # +-1.0 per input coordinate
    seed: int


@dataclass(frozen=True)
class RankKFactors:
    """Factors of the rank-k approximation B = Y Z^T.

    Y has orthonormal columns.  If the sketched column space cannot
    support the requested rank, the achievable rank is returned instead
    and ``rank_deficient`` is set.
    """

    Y: np.ndarray  # d x k, orthonormal columns
    Z: np.ndarray  # n x k
    k: int
    rank_deficient: bool = False
    basis_rank: int = 0


@dataclass(frozen=True)
class SvdTriple:
    """Truncated SVD factors: U (d x k), nonincreasing S, V (n x k)."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def make_countsketch(n: int, c: int, seed: int) -> CountSketch:
    """Draw a CountSketch: uniform buckets and uniform signs, seeded."""
    if c < 1:
        raise ValueError("sketch dimension c must be at least 1")
    rng = np.random.default_rng(seed)
    bucket = rng.integers(0, c, size=n)
    sign = rng.choice(np.array([-1.0, 1.0]), size=n)
    return CountSketch(n, c, bucket, sign, seed)


def apply_countsketch(A: SparseColMatrix, S: CountSketch) -> np.ndarray:
    """Scatter the columns of A into the sketch buckets: returns d x c dense.

    Column j is added, multiplied by sign_j, into output column
    bucket_j.  Runtime is proportional to nnz(A) plus the output size;
    the scatter walks column blocks so temporaries stay cache-sized.
    """
    if S.input_dim != A.cols:
        raise ValueError(
            f"sketch input dim {S.input_dim} does not match matrix columns {A.cols}"
        )
    d, c = A.rows, S.sketch_dim
    counts = A.column_nnz()
    block_entries = 1 << 18
    if A.nnz <= block_entries:
        if A.nnz == 0:
            return np.zeros((d, c))
        col_of = np.repeat(np.arange(A.cols), counts)
        flat = A.row_idx * c + S.bucket[col_of]
        out = np.bincount(flat, weights=A.values * S.sign[col_of], minlength=d * c)
        return out.reshape(d, c)
    out = np.zeros(d * c)
    j0 = 0
    while j0 < A.cols:
        j1 = j0
        span = 0
        while j1 < A.cols and (span == 0 or span + counts[j1] <= block_entries):
            span += counts[j1]
            j1 += 1
        lo, hi = A.col_ptr[j0], A.col_ptr[j1]
        if hi > lo:
            col_of = np.repeat(np.arange(j0, j1), counts[j0:j1])
            flat = A.row_idx[lo:hi] * c + S.bucket[col_of]
            out += np.bincount(
                flat, weights=A.values[lo:hi] * S.sign[col_of], minlength=d * c
            )
        j0 = j1
    return out.reshape(d, c)


def _cholqr2(X: np.ndarray) -> np.ndarray | None:
    """Two-pass Cholesky QR for well-conditioned tall blocks.

    Runs entirely on BLAS-3 kernels.  Returns None when the Gram matrix
    is not safely positive definite or the first pass left more than a
    trace of non-orthogonality, in which case the caller should fall
    back to a rank-revealing factorization.
    """
    from scipy.linalg import solve_triangular

    for attempt in range(2):
        G = X.T @ X
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            return None
        X = solve_triangular(L, X.T, lower=True, check_finite=False).T
        if attempt == 1 and np.abs(G - np.eye(G.shape[0])).max() > 1e-4:
            return None  # first pass too degraded for the correction
    return np.ascontiguousarray(X)


def _orth_columns(C: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of C with rank detection.

    Cholesky QR covers the (typical) well-conditioned case; a
    rank-revealing SVD handles deficient input.
    """
    if C.shape[1] == 0:
        return np.zeros((C.shape[0], 0))
    if C.shape[0] >= C.shape[1]:
        Q = _cholqr2(C.copy())
        if Q is not None:
            return Q
    U, s, _ = np.linalg.svd(C, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((C.shape[0], 0))
    r = int(np.sum(s > max(C.shape) * np.finfo(float).eps * s[0]))
    return U[:, :r]


def _projected_gram(A: SparseColMatrix, Q: np.ndarray) -> np.ndarray:
    """G = Q^T (A A^T) Q by whichever product order is cheaper.

    The d x d product route wins only for very sparse matrices; the
    pair-count bound on its output size keeps it off dense-ish inputs,
    where assembling a nearly dense matrix in sparse format would
    dominate.
    """
    r = Q.shape[1]
    col_nnz = A.column_nnz().astype(np.float64)
    pair_count = float(np.sum(col_nnz * col_nnz))
    stream_flops = float(A.nnz) * r + float(A.cols) * r * r
    d = A.rows
    if d <= 4096 and pair_count < stream_flops and pair_count < 0.25 * d * d:
        AAt = A._scipy @ A._scipy.T
        G = Q.T @ (AAt @ Q)
    else:
        Wt = np.asarray(A._scipy.T @ Q)  # n x r, one pass over A per column block
        G = Wt.T @ Wt
    return 0.5 * (G + G.T)


def mixed_lra(
    A: SparseColMatrix,
    k: int,
    c: int | None = None,
    seed: int = 0,
    compress_dim: int | None = None,
) -> RankKFactors:
    """Rank-k factors whose product satisfies a mixed spectral-Frobenius bound.

    Pipeline: sketch the columns into ``c`` buckets (default c = k^2);
    if the bucket count exceeds the working-rank cap, compress the sketch
    image with a seeded Gaussian test matrix; orthonormalize to get the
    basis Q; take the top-k directions of the projection of A onto
    span(Q) via the small Gram matrix Q^T A A^T Q; return Y (those
    directions) and Z = A^T Y.

    Total cost is O(nnz(A) * poly(k) + (n + d) * poly(k)); no dense
    object larger than (n + d) times the working rank is formed.
    """
    d, n = A.shape
    if not 1 <= k <= min(d, n):
        raise ValueError(f"k={k} must satisfy 1 <= k <= min(d, n) = {min(d, n)}")
    if c is None:
        c = k * k
    if c < k:
        raise ValueError(f"sketch width c={c} must be at least k={k}")
    s1, s2 = np.random.SeedSequence(seed).generate_state(2)
    S = make_countsketch(n, c, int(s1))

    q_cap = compress_dim if compress_dim is not None else max(2 * k, k + 10)
    if min(d, c) > q_cap:
        # range compression: the sketch image is kept sparse (nnz-sized)
        # and hit with a small Gaussian test matrix, so no d x c dense
        # block is ever formed
        omega = np.random.default_rng(int(s2)).standard_normal((c, q_cap))
        col_of = np.repeat(np.arange(n), A.column_nnz())
        image = sp.coo_array(
            (A.values * S.sign[col_of], (A.row_idx, S.bucket[col_of])), shape=(d, c)
        ).tocsr()
        C = np.asarray(image @ omega)
    else:
        C = apply_countsketch(A, S)

    Q = _orth_columns(C)
    if Q.shape[1] == 0:
        return RankKFactors(np.zeros((d, 0)), np.zeros((n, 0)), 0, True, 0)

    G = _projected_gram(A, Q)
    lam, vecs = np.linalg.eigh(G)
    order = np.argsort(lam)[::-1]
    lam, vecs = lam[order], vecs[:, order]
    positive = int(np.sum(lam > max(lam[0], 0.0) * len(lam) * np.finfo(float).eps))
    kk = min(k, positive)
    if kk == 0:
        return RankKFactors(np.zeros((d, 0)), np.zeros((n, 0)), 0, True, Q.shape[1])
    Y = Q @ vecs[:, :kk]
    Z = np.asarray(A._scipy.T @ Y)  # Z^T = Y^T A, so B = Y Z^T projects A onto span(Y)
    return RankKFactors(Y, Z, kk, kk < k, Q.shape[1])


def lra_residual_norm(A: SparseColMatrix, fac: RankKFactors, seed: int = 0) -> float:
    """Measured spectral norm of A - Y Z^T, applied operator-style."""
    Y, Z = fac.Y, fac.Z

    def matvec(x):
        return right_apply(A, x) - Y @ (Z.T @ x)

    def rmatvec(y):
        return np.asarray(y @ A._scipy) - Z @ (Y.T @ y)

    est = spectral_norm_est(LinearOp(A.shape, matvec, rmatvec), tol=1e-9, seed=seed)
    return est.value


def _gram_eigs(A: Union[SparseColMatrix, np.ndarray]) -> tuple[np.ndarray, np.ndarray, bool]:
    """Spectrum of A via the dense path of the smaller side, descending.

    Returns (squared singular values, singular vectors, left_side) where
    ``left_side`` says the vectors live on the row (d) side.  Small
    inputs use a direct bidiagonal SVD (full eps accuracy on tiny
    singular values); larger ones fall back to the min(d, n)-sized Gram
    matrix, whose small values are only resolved to sqrt(eps).
    """
    d, n = A.shape
    if min(d, n) > DENSE_ORACLE_LIMIT:
        raise ValueError(
            f"exact SVD refused: min(d, n) = {min(d, n)} exceeds {DENSE_ORACLE_LIMIT}"
        )
    left = d <= n
    if d * n <= 4_000_000:
        Ad = A.toarray() if isinstance(A, SparseColMatrix) else np.asarray(A, dtype=np.float64)
        U, s, Vt = np.linalg.svd(Ad, full_matrices=False)
        return s * s, (U if left else Vt.T), left
    if isinstance(A, SparseColMatrix):
        density = A.nnz / max(1, d * n)
        if density >= 0.2 and d * n <= 50_000_000:
            Ad = A.toarray()
            G = Ad @ Ad.T if left else Ad.T @ Ad
        else:
            M = A._scipy
            G = (M @ M.T).toarray() if left else (M.T @ M).toarray()
    else:
        M = np.asarray(A, dtype=np.float64)
        G = M @ M.T if left else M.T @ M
    G = 0.5 * (G + G.T)
    lam, vecs = np.linalg.eigh(G)
    order = np.argsort(lam)[::-1]
    return np.maximum(lam[order], 0.0), vecs[:, order], left


def _other_factor(
    A: Union[SparseColMatrix, np.ndarray], W: np.ndarray, s: np.ndarray, left: bool
) -> np.ndarray:
    """Recover the second SVD factor; degenerate directions are completed
    with a deterministic orthonormal fill (valid for zero singular values)."""
    M = A._scipy if isinstance(A, SparseColMatrix) else np.asarray(A, dtype=np.float64)
    other_dim = M.shape[1] if left else M.shape[0]
    k = s.size
    out = np.zeros((other_dim, k))
    cutoff = (s[0] if k else 0.0) * 1e-13
    good = s > cutoff
    if np.any(good):
        prod = np.asarray(M.T @ W[:, good]) if left else np.asarray(M @ W[:, good])
        out[:, good] = prod / s[good]
    if not np.all(good):
        rng = np.random.default_rng(0)
        for j in np.flatnonzero(~good):
            v = rng.standard_normal(other_dim)
            for _ in range(3):
                v -= out @ (out.T @ v)
            out[:, j] = v / np.linalg.norm(v)
    # polish mild orthogonality loss from the Gram squaring
    err = np.abs(out.T @ out - np.eye(k)).max() if k else 0.0
    if err > 1e-9:
        Qp, Rp = np.linalg.qr(out)
        out = Qp * np.sign(np.diag(Rp))
    return out


def exact_topk_svd(A: Union[SparseColMatrix, np.ndarray], k: int) -> SvdTriple:
    """Exact truncated SVD via the smaller dense Gram matrix.

    This is the test oracle, not the fast path: it refuses inputs whose
    smaller dimension exceeds ``DENSE_ORACLE_LIMIT``.
    """
    shape = A.shape
    if not 1 <= k <= min(shape):
        raise ValueError(f"k={k} out of range for shape {shape}")
    lam, vecs, left = _gram_eigs(A)
    s = np.sqrt(lam[:k])
    W = vecs[:, :k]
    other = _other_factor(A, W, s, left)
    if left:
        return SvdTriple(W, s, other)
    return SvdTriple(other, s, W)


def svd_tail_norms(A: Union[SparseColMatrix, np.ndarray], k: int) -> tuple[float, float]:
    """(sigma_{k+1}, ||A - A_k||_F^2) from the full Gram spectrum."""
    lam, _, _ = _gram_eigs(A)
    spec_tail = float(np.sqrt(lam[k])) if k < lam.size else 0.0
    frob_tail_sq = float(np.sum(lam[k:])) if k < lam.size else 0.0
    return spec_tail, frob_tail_sq


def singular_values(A: Union[SparseColMatrix, np.ndarray]) -> np.ndarray:
    """All min(d, n) singular values, nonincreasing, via the dense Gram side."""
    lam, _, _ = _gram_eigs(A)
    return np.sqrt(lam)


@dataclass(frozen=True)
class PowerIterationResult:
    """Output of the subspace power method.

    ``converged`` is cleared when the iterate was still moving at the
    final step or when the residual probe found no spectral gap below
    the recovered subspace.  ``redraws`` counts rank-deficiency repairs.
    """

    basis: np.ndarray  # d x k, orthonormal columns
    converged: bool
    tail_ratio: float
    redraws: int
    iterates: list[np.ndarray] | None = None


def default_power_iters(d: int, multiplier: int = 3) -> int:
    """Iteration budget ceil(ln d) * multiplier used by the benchmarks."""
    return max(1, int(math.ceil(math.log(max(d, 2)))) * multiplier)


def subspace_power(
    A: SparseColMatrix,
    k: int,
    T: int,
    seed: int = 0,
    probe_iters: int = 6,
    keep_iterates: bool = False,
) -> PowerIterationResult:
    """Orthogonal iteration Q <- orth(A A^T Q) for the top-k left subspace.

    Each iteration costs O(nnz(A) * k) plus a Householder QR of a d x k
    block.  Rank-deficient iterates are repaired by re-randomizing the
    dropped directions.  A short residual probe estimates the first
    singular value below the subspace to report the gap ratio.
    """
    d, n = A.shape
    if not 1 <= k <= d:
        raise ValueError(f"k={k} out of range for d={d}")
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = np.random.default_rng(seed)
    M = A._scipy
    Q = np.linalg.qr(rng.standard_normal((d, k)))[0]
    iterates = [Q] if keep_iterates else None
    redraws = 0
    movement = 1.0
    for _ in range(T):
        Z = np.asarray(M @ (M.T @ Q))
        Qn = _cholqr2(Z)
        if Qn is None:
            # rank-deficient iterate: repair via Householder QR, replacing
            # the collapsed directions with fresh random draws
            Qn, R = np.linalg.qr(Z)
            diag = np.abs(np.diag(R))
            bad = diag <= max(d, k) * np.finfo(float).eps * (
                diag.max() if diag.max() > 0 else 1.0
            )
            tries = 0
            while np.any(bad):
                Z[:, bad] = rng.standard_normal((d, int(bad.sum())))
                Qn, R = np.linalg.qr(Z)
                diag = np.abs(np.diag(R))
                bad = diag <= max(d, k) * np.finfo(float).eps * diag.max()
                redraws += 1
                tries += 1
                if tries > 5:
                    raise RuntimeError(
                        "subspace power iteration could not restore full rank"
                    )
        sv = np.linalg.svd(Q.T @ Qn, compute_uv=False)
        movement = float(np.sqrt(max(0.0, 1.0 - min(1.0, sv.min()) ** 2)))
        Q = Qn
        if keep_iterates:
            iterates.append(Q)

    tail_ratio = 0.0
    if probe_iters > 0:
        W = np.asarray(M.T @ Q)  # n x k
        lam = np.linalg.eigvalsh(W.T @ W)
        sigma_k = math.sqrt(max(lam.min(), 0.0))
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        sigma_next = 0.0
        for _ in range(probe_iters):
            w = np.asarray(M @ x)
            w -= Q @ (Q.T @ w)
            sigma_next = float(np.linalg.norm(w))
            if sigma_next == 0.0:
                break
            x = np.asarray(w @ M)
            nx = np.linalg.norm(x)
            if nx == 0.0:
                break
            x /= nx
        tail_ratio = sigma_next / sigma_k if sigma_k > 0 else 1.0
    # sqrt(1 - c^2) resolves angles only to sqrt(eps), so 1e-6 is the
    # tightest meaningful stillness threshold
    converged = movement <= 1e-6 and tail_ratio < 0.999
    return PowerIterationResult(Q, converged, tail_ratio, redraws, iterates)


def save_rank_k_factors(fac: RankKFactors, f: TextIO) -> None:
    save_dense_block("Y", fac.Y, f)
    save_dense_block("Z", fac.Z, f)


def load_rank_k_factors(f: TextIO) -> RankKFactors:
    name_y, Y = load_dense_block(f)
    name_z, Z = load_dense_block(f)
    if name_y != "Y" or name_z != "Z":
        raise ValueError("expected blocks named Y and Z")
    return RankKFactors(Y, Z, Y.shape[1], False, Y.shape[1])
