"""Shrinkage metrics and projectors.

For a centered n x J matrix X and shrinkage constant tau in [0, 1], the
metric is M = tau*I + (1 - tau)*(1/n) X'X. tau = 1 (Mode A) normalizes the
weight vector, tau = 0 (Mode B) normalizes the component variance, and
intermediate values interpolate between the two (Ledoit-Wolf style
shrinkage of the block covariance).

M, its inverse and inverse square root all come from one symmetric
eigendecomposition, cached on the metric object. At tau = 0 a rank-deficient
matrix gets Moore-Penrose semantics: eigenvalues below the rank tolerance
are treated as exact zeros and the corresponding directions annihilated.
Metrics are immutable; building metrics for distinct blocks is a pure
function of the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Block, BlockSet
from .errors import DataError, DimensionError, ModeBInfeasibleError

DEFAULT_RANK_TOLERANCE = 1e-10

_MODE_TAUS = {"A": 1.0, "a": 1.0, "B": 0.0, "b": 0.0}


def mode_tau(mode) -> float:
    """Translate 'A'/'B' (or a numeric shrinkage value) into tau."""
    if isinstance(mode, str):
        try:
            return _MODE_TAUS[mode]
        except KeyError:
            raise ValueError(f"unknown mode {mode!r}; expected 'A', 'B' or a number") from None
    tau = float(mode)
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    return tau


@dataclass(frozen=True)
class ModeSelector:
    """Per-block shrinkage constants plus the superblock one."""

    block_taus: tuple[float, ...]
    superblock_tau: float

    def __post_init__(self):
        for tau in (*self.block_taus, self.superblock_tau):
            if not 0.0 <= tau <= 1.0:
                raise ValueError(f"tau must lie in [0, 1], got {tau}")

    @staticmethod
    def uniform(blocks, superblock, n_blocks: int) -> "ModeSelector":
        tau = mode_tau(blocks)
        return ModeSelector((tau,) * n_blocks, mode_tau(superblock))

    @staticmethod
    def from_taus(block_taus: Sequence, superblock) -> "ModeSelector":
        return ModeSelector(tuple(mode_tau(t) for t in block_taus), mode_tau(superblock))


@dataclass(frozen=True, eq=False)
class ShrinkageMetric:
    """M = tau*I + (1-tau)*(1/n) X'X with cached inverse and inverse root."""

    tau: float
    m_matrix: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns aligned with eigenvalues
    inv: np.ndarray
    inv_sqrt: np.ndarray
    rank_tolerance: float
    rank: int
    pseudo: bool  # True when tau = 0 dropped null directions

    @property
    def dim(self) -> int:
        return self.m_matrix.shape[0]


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, Block):
        return data.matrix
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise DimensionError("expected an n x J matrix")
    return x


def build_metric(
    data,
    tau: float,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> ShrinkageMetric:
    """Construct the shrinkage metric of a block (or raw matrix).

    tau = 0 requires rank(X) < n: with full row rank every centered vector
    lies in the column space and Mode B degenerates, so regularization is
    rejected with a pointer toward tau > 0. Column-rank deficiency at
    tau = 0 switches to pseudo-inverse semantics.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    x = _as_matrix(data)
    n, j = x.shape
    m = (x.T @ x) / n
    if tau > 0.0:
        m = tau * np.eye(j) + (1.0 - tau) * m
    m = (m + m.T) / 2.0  # enforce exact symmetry before eigh
    vals, vecs = np.linalg.eigh(m)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    top = vals[0]
    if top <= 0.0:
        raise DataError("metric is identically zero (zero block with tau = 0)")

    if tau > 0.0:
        # strictly positive definite: smallest eigenvalue >= tau
        inv_vals = 1.0 / vals
        rank = j
        pseudo = False
    else:
        cutoff = rank_tolerance * top
        keep = vals > cutoff
        rank = int(keep.sum())
        if rank == n:
            raise ModeBInfeasibleError(
                f"Mode B is infeasible: rank(X) = {rank} equals the number of "
                "rows; use tau > 0 instead"
            )
        inv_vals = np.where(keep, 1.0 / np.where(keep, vals, 1.0), 0.0)
        pseudo = rank < j
    inv = (vecs * inv_vals) @ vecs.T
    inv_sqrt = (vecs * np.sqrt(inv_vals)) @ vecs.T
    return ShrinkageMetric(
        tau=tau,
        m_matrix=m,
        eigenvalues=vals,
        eigenvectors=vecs,
        inv=(inv + inv.T) / 2.0,
        inv_sqrt=(inv_sqrt + inv_sqrt.T) / 2.0,
        rank_tolerance=rank_tolerance,
        rank=rank,
        pseudo=pseudo,
    )


def build_metrics(
    blockset: BlockSet,
    modes: ModeSelector,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> list[ShrinkageMetric]:
    """Metrics for every block plus the superblock, in that order."""
    if len(modes.block_taus) != blockset.n_blocks:
        raise DimensionError(
            f"{len(modes.block_taus)} block taus for {blockset.n_blocks} blocks"
        )
    out = [
        build_metric(b.matrix, tau, rank_tolerance)
        for b, tau in zip(blockset.blocks, modes.block_taus)
    ]
    out.append(build_metric(blockset.superblock, modes.superblock_tau, rank_tolerance))
    return out


def inv_sqrt_apply(metric: ShrinkageMetric, w: np.ndarray) -> np.ndarray:
    """Apply M^(-1/2) to a vector or J x k matrix of columns."""
    w = np.asarray(w, dtype=float)
    if w.shape[0] != metric.dim:
        raise DimensionError(f"expected {metric.dim} rows, got {w.shape[0]}")
    return metric.inv_sqrt @ w


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector onto the column space of a matrix."""

    basis: np.ndarray  # n x r, orthonormal columns

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.basis.shape[0]:
            raise DimensionError(
                f"expected {self.basis.shape[0]} rows, got {v.shape[0]}"
            )
        return self.basis @ (self.basis.T @ v)

    def as_matrix(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def projection_operator(
    data,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> Projector:
    """Projector X (X'X)^+ X' onto the column space of X.

    The result is invariant to the choice of generalized inverse, which is
    what makes Mode B usable on column-rank-deficient blocks. Full row rank
    is rejected: the projector would be the identity and Mode B meaningless.
    """
    x = _as_matrix(data)
    n = x.shape[0]
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise DataError("cannot project onto the column space of a zero matrix")
    rank = int((s > rank_tolerance * s[0]).sum())
    if rank == n:
        raise ModeBInfeasibleError(
            f"rank(X) = {rank} equals the number of rows; the projector is the "
            "identity and Mode B is meaningless, use shrinkage (tau > 0)"
        )
    return Projector(basis=u[:, :rank].copy())
