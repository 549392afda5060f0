"""Iterative recovery of simplex vertices from rank-k factors.

After one pass over the matrix to build the rank-k factors (Y, Z), each
of the k selection rounds works entirely inside the factored form: a
random direction is drawn in the column space of Y, projected away from
the vertices found so far, pushed through Z^T to score every column,
and the best-scoring block of columns is averaged into a new vertex.
Only those selected columns of A are ever read again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .sketch import default_power_iters, mixed_lra, subspace_power
from .sparsemat import SparseColMatrix, column_subset_mean
from .subspace import orthonormalize, project_out

__all__ = [
    "LearnerConfig",
    "VertexEstimates",
    "LearnerError",
    "learn_simplex",
    "compute_factors",
    "select_vertices",
    "select_indices",
    "save_vertex_estimates",
    "load_vertex_estimates",
]

_REDRAW_LIMIT = 20
_DEGENERATE_REL = 1e-12


class LearnerError(RuntimeError):
    """Raised when vertex selection cannot make progress."""


@dataclass(frozen=True)
class LearnerConfig:
    """Settings for one vertex-recovery run.

    ``delta`` is the smoothing fraction: each vertex estimate averages
    floor(delta * n) columns (at least one).  ``selection_mode`` picks
    between the literal largest-|coordinate| rule ("abs") and the
    sign-consistent two-sided rule ("two_sided", default).  ``baseline``
    chooses the factorization: the CountSketch pipeline ("sketch") or
    subspace power iteration plus exact projection ("power_iteration").
    """

    k: int
    delta: float
    sketch_cols: int | None = None
    seed: int = 0
    selection_mode: str = "two_sided"
    baseline: str = "sketch"
    power_multiplier: int = 3

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.selection_mode not in ("abs", "two_sided"):
            raise ValueError(f"unknown selection_mode {self.selection_mode!r}")
        if self.baseline not in ("sketch", "power_iteration"):
            raise ValueError(f"unknown baseline {self.baseline!r}")

    def smoothing_size(self, n: int) -> int:
        return max(1, int(np.floor(self.delta * n)))


@dataclass(frozen=True)
class VertexEstimates:
    """Recovered vertices with the column sets and directions behind them.

    ``vertices[:, t]`` is exactly the mean of the columns of A indexed by
    ``index_sets[t]``; ``directions[t]`` is the score vector whose top
    block produced that set (kept for audit).
    """

    vertices: np.ndarray  # d x k
    index_sets: tuple[np.ndarray, ...]
    directions: np.ndarray  # k x n
    rank_deficient: bool = False

    @property
    def k(self) -> int:
        return self.vertices.shape[1]


def select_indices(u: np.ndarray, s: int, mode: str = "two_sided") -> np.ndarray:
    """Indices of the s most extreme coordinates of u, sorted ascending.

    mode "abs": the s largest |u_j|.  mode "two_sided": the s largest
    and the s smallest coordinates are formed separately and the side
    with the larger |sum| wins, so one set never mixes signs.  Ties are
    broken toward the lower index; the result is scale-invariant under
    u -> c u for any c > 0.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    n = u.size
    if not 1 <= s <= n:
        raise ValueError(f"subset size s={s} out of range for n={n}")
    idx = np.arange(n)
    if mode == "abs":
        order = np.lexsort((idx, -np.abs(u)))
        return np.sort(order[:s])
    if mode == "two_sided":
        top = np.lexsort((idx, -u))[:s]
        bottom = np.lexsort((idx, u))[:s]
        if abs(u[top].sum()) >= abs(u[bottom].sum()):
            return np.sort(top)
        return np.sort(bottom)
    raise ValueError(f"unknown mode {mode!r}")


def _seeds(cfg: LearnerConfig) -> tuple[int, int]:
    s = np.random.SeedSequence(cfg.seed).generate_state(2)
    return int(s[0]), int(s[1])


def compute_factors(A: SparseColMatrix, cfg: LearnerConfig):
    """Factorization phase: returns (Y, Z, rank_deficient)."""
    d, n = A.shape
    seed_fac, _ = _seeds(cfg)
    if cfg.baseline == "power_iteration":
        T = default_power_iters(d, cfg.power_multiplier)
        res = subspace_power(A, cfg.k, T, seed=seed_fac)
        Y = res.basis
        Z = np.asarray(A._scipy.T @ Y)
        return Y, Z, res.redraws > 0
    c = cfg.sketch_cols if cfg.sketch_cols is not None else cfg.k * cfg.k
    fac = mixed_lra(A, cfg.k, c=c, seed=seed_fac)
    return fac.Y, fac.Z, fac.rank_deficient


def select_vertices(
    A: SparseColMatrix, Y: np.ndarray, Z: np.ndarray, cfg: LearnerConfig
) -> VertexEstimates:
    """Selection phase: k rounds of project-score-average.

    Reads A only through ``column_subset_mean`` on the selected column
    sets; everything else happens on the factors.
    """
    d, n = A.shape
    s = cfg.smoothing_size(n)
    _, seed_sel = _seeds(cfg)
    rng = np.random.default_rng(seed_sel)
    kf = Y.shape[1]
    rank_deficient = kf < cfg.k

    vertices: list[np.ndarray] = []
    index_sets: list[np.ndarray] = []
    directions: list[np.ndarray] = []
    for t in range(cfg.k):
        if vertices:
            U_t = orthonormalize(vertices)
        else:
            U_t = orthonormalize([np.zeros(d)])  # empty basis
        h_prime = None
        for _ in range(_REDRAW_LIMIT):
            g = rng.standard_normal(kf)
            h = Y @ g
            hn = np.linalg.norm(h)
            if hn == 0.0:
                continue
            cand = project_out(h, U_t)
            if np.linalg.norm(cand) > _DEGENERATE_REL * hn:
                h_prime = cand
                break
        if h_prime is None:
            if rank_deficient:
                break  # the factor space is exhausted; return what we have
            raise LearnerError(
                f"round {t}: random direction collapsed into the span of the "
                f"{len(vertices)} selected vertices after {_REDRAW_LIMIT} redraws"
            )
        h_prime = h_prime / np.linalg.norm(h_prime)
        u = (h_prime @ Y) @ Z.T  # n-vector, O((n + d) k) per round
        R_t = select_indices(u, s, cfg.selection_mode)
        vertices.append(column_subset_mean(A, R_t))
        index_sets.append(R_t)
        directions.append(u)

    V = np.column_stack(vertices) if vertices else np.zeros((d, 0))
    D = np.vstack(directions) if directions else np.zeros((0, n))
    return VertexEstimates(V, tuple(index_sets), D, rank_deficient)


def learn_simplex(A: SparseColMatrix, cfg: LearnerConfig) -> VertexEstimates:
    """Recover k vertex estimates from a sparse observation matrix.

    Runs the factorization phase (one pass over A) followed by the
    selection phase; deterministic given (A, cfg).
    """
    d, n = A.shape
    if cfg.k > min(d, n):
        raise ValueError(f"k={cfg.k} exceeds min(d, n) = {min(d, n)}")
    Y, Z, flag = compute_factors(A, cfg)
    est = select_vertices(A, Y, Z, cfg)
    if flag and not est.rank_deficient:
        est = VertexEstimates(est.vertices, est.index_sets, est.directions, True)
    return est


def save_vertex_estimates(est: VertexEstimates, f: TextIO) -> None:
    """Text block: header 'k d s', k index lines, then k vertex vectors."""
    k = est.k
    d = est.vertices.shape[0]
    s = est.index_sets[0].size if est.index_sets else 0
    f.write(f"{k} {d} {s}\n")
    for R in est.index_sets:
        f.write(" ".join(str(int(i)) for i in R) + "\n")
    for t in range(k):
        f.write(" ".join(f"{x:.17g}" for x in est.vertices[:, t]) + "\n")


def load_vertex_estimates(f: TextIO) -> VertexEstimates:
    header = f.readline().split()
    if len(header) != 3:
        raise ValueError("estimates header must be 'k d s'")
    k, d, s = (int(x) for x in header)
    sets = []
    for _ in range(k):
        row = [int(x) for x in f.readline().split()]
        if len(row) != s:
            raise ValueError("index set size does not match header")
        sets.append(np.asarray(row, dtype=np.int64))
    vertices = np.empty((d, k))
    for t in range(k):
        vals = [float(x) for x in f.readline().split()]
        if len(vals) != d:
            raise ValueError("vertex vector length does not match header")
        vertices[:, t] = vals
    return VertexEstimates(vertices, tuple(sets), np.zeros((k, 0)))
