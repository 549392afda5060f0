"""Subspace geometry: orthonormal bases, angular distances, projections.

The extremal principal angle between two subspaces F, G with orthonormal
bases is recovered from the smallest singular value of F^T G, so nothing
here ever materializes a d x d projection matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = ["Basis", "orthonormalize", "sin_theta", "proj_distance", "project_out"]


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis stored as the columns of a d x r array."""

    cols: np.ndarray

    @property
    def dim(self) -> int:
        return self.cols.shape[0]

    @property
    def r(self) -> int:
        return self.cols.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.r == 0

    def project(self, v: np.ndarray) -> np.ndarray:
        if self.is_empty:
            return np.zeros_like(v)
        return self.cols @ (self.cols.T @ v)


def _empty_basis(d: int) -> Basis:
    return Basis(np.zeros((d, 0), dtype=np.float64))


def orthonormalize(
    vectors: Union[np.ndarray, Sequence[np.ndarray]], tol: float = 1e-10
) -> Basis:
    """Orthonormal basis for the span of the given d-vectors.

    Gram-Schmidt with a second re-orthogonalization pass; a vector whose
    residual norm falls below ``tol`` times its own norm is treated as
    dependent and dropped.  If every vector is (numerically) zero the
    returned basis is empty.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        vecs = [np.asarray(vectors[:, j], dtype=np.float64) for j in range(vectors.shape[1])]
    else:
        vecs = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
    if not vecs:
        raise ValueError("orthonormalize requires at least one vector")
    d = vecs[0].shape[0]
    cols: list[np.ndarray] = []
    for v in vecs:
        if v.shape[0] != d:
            raise ValueError("all vectors must have the same length")
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        r = v.copy()
        for _ in range(2):  # re-orthogonalize once for numerical safety
            for q in cols:
                r -= q * (q @ r)
        rn = np.linalg.norm(r)
        if rn <= tol * vn:
            continue
        cols.append(r / rn)
    if not cols:
        return _empty_basis(d)
    return Basis(np.column_stack(cols))


def _min_singular(F: Basis, G: Basis) -> float:
    s = np.linalg.svd(F.cols.T @ G.cols, compute_uv=False)
    return float(s.min())


def sin_theta(F: Basis, G: Basis) -> float:
    """Extremal principal-angle sine max_{u in F} min_{v in G} sin(u, v).

    Equals sqrt(1 - smin(F^T G)^2) when dim F <= dim G, and 1 when
    dim F > dim G (some direction of F is then orthogonal to all of G).
    """
    if F.is_empty or G.is_empty:
        raise ValueError("sin_theta requires nonempty bases")
    if F.r > G.r:
        return 1.0
    c = min(1.0, _min_singular(F, G))
    return float(np.sqrt(max(0.0, 1.0 - c * c)))


def proj_distance(F: Basis, G: Basis) -> float:
    """Spectral norm of the difference of the two orthogonal projectors.

    Computed as the larger of the two directed extremal sines, which for
    equal-dimension subspaces coincides with ``sin_theta``.
    """
    if F.is_empty and G.is_empty:
        return 0.0
    if F.is_empty or G.is_empty:
        return 1.0
    c = min(1.0, _min_singular(F, G))
    directed = np.sqrt(max(0.0, 1.0 - c * c))
    if F.r == G.r:
        return float(directed)
    return 1.0  # unequal dimensions force a fully orthogonal direction


def project_out(v: np.ndarray, U: Basis) -> np.ndarray:
    """Component of v orthogonal to span(U), i.e. (I - UU^T) v."""
    v = np.asarray(v, dtype=np.float64)
    if U.is_empty:
        return v.copy()
    if v.shape[0] != U.dim:
        raise ValueError(f"vector length {v.shape[0]} != basis dimension {U.dim}")
    r = v - U.cols @ (U.cols.T @ v)
    r -= U.cols @ (U.cols.T @ r)  # second pass keeps residual below 1e-10 * |v|
    return r
