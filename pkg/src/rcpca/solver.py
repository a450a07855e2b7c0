"""Transformed problem and the normalized-gradient maximizer.

With P_b = X_b M_b^(-1/2) and Q_b = P_b' P_(B+1), maximizing the sum of
m-th powers of block/superblock covariances under the metric constraints
reduces to maximizing

    psi(v) = sum_b ||Q_b v||^m

over unit vectors v. psi is convex and continuously differentiable for
m >= 1, so the normalized-gradient iteration v <- grad(v)/||grad(v)||
ascends psi monotonically (it maximizes the linear minorizer
G(u, v) = psi(v) + grad(v)'(u - v) on the sphere at each step) and every
limit point is a fixed point of the iteration, i.e. a stationary point of
the constrained problem.

The iteration itself is scale-invariant, so the solver runs on Q_b / n:
this keeps tracked criterion values on the covariance scale (the scale of
cov(y_b, y_super)^m), which is also where the tight convergence tolerances
are numerically meaningful. `criterion`/`gradient` keep the raw transformed
scale; `covariance_criterion` reports the 1/n^m one.

A solve is deterministic given its configuration; solutions, traces and
problems are plain immutable data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import BlockSet, sample_cov
from .errors import (
    AllStartsFailedError,
    BadStartError,
    DimensionError,
    InternalAssertionError,
    NonContributingBlockError,
    SingularGradientError,
    UndefinedContributionsError,
)
from .metrics import ModeSelector, ShrinkageMetric, build_metric

# absolute slack for "the criterion never decreased" checks
_MONOTONE_TOL = 1e-12
# roundoff slack for step/sandwich inequalities near machine precision
_ROUNDOFF_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class TransformedProblem:
    """Matrices P_b, Q_b and the exponent m of the sphere problem."""

    p_matrices: tuple[np.ndarray, ...]  # B + 1 entries, superblock last
    q_matrices: tuple[np.ndarray, ...]  # B entries
    m: float
    n: int

    def __post_init__(self):
        if self.m < 1.0:
            raise ValueError(f"exponent m must be >= 1, got {self.m}")
        dims = {q.shape[1] for q in self.q_matrices}
        if len(dims) > 1:
            raise DimensionError("Q matrices disagree on the superblock dimension")

    @property
    def dim(self) -> int:
        return self.q_matrices[0].shape[1]

    @property
    def n_blocks(self) -> int:
        return len(self.q_matrices)


@dataclass
class SolverConfig:
    """Knobs of one solve.

    init is "eigen" (dominant eigenvector of sum(Q_b'Q_b)), "random"
    (seeded draw, uniform on the sphere) or an explicit start vector.
    Additional starts beyond the first are random with seeds seed+1,
    seed+2, ... and the winner is the largest criterion value (ties keep
    the earliest start).

    assert_level controls runtime verification: monotonicity of the
    criterion is always enforced; "cheap" also enforces the ascent step
    bound, "full" additionally checks the minorizer sandwich at every
    iteration.
    """

    m: float = 2.0
    epsilon: float = 1e-10
    max_iter: int = 10_000
    init: str | np.ndarray = "eigen"
    seed: int = 0
    n_starts: int = 1
    assert_level: str = "cheap"

    def __post_init__(self):
        if self.m < 1.0:
            raise ValueError(f"exponent m must be >= 1, got {self.m}")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if isinstance(self.init, str) and self.init not in ("eigen", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.assert_level not in ("off", "cheap", "full"):
            raise ValueError(f"unknown assert_level {self.assert_level!r}")


@dataclass
class SolverTrace:
    """Per-iteration record of one maximizer run.

    psi[0] is the start value and psi[s+1] the value after iteration s;
    bound[s] is the ascent bound 2*(psi[s+1]-psi[s])/delta that dominates
    step_norm[s]**2, with delta = m*psi[0] for criterion solves.
    """

    psi: list[float]
    step_norm: list[float]
    bound: list[float]
    sandwich_ok: list[bool]
    iterations: int
    converged: bool
    fixed_point_residual: float
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class GradientOracle:
    """Value/gradient pair of a convex differentiable objective."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Solution:
    """Converged weights, components and diagnostics of one rank."""

    v_super: np.ndarray
    w_super: np.ndarray
    y_super: np.ndarray
    w_blocks: list[np.ndarray]
    y_blocks: list[np.ndarray]
    covs: np.ndarray
    contributions: np.ndarray
    psi_final: float
    fixed_point_residual: float
    trace: SolverTrace

    @property
    def component_matrix(self) -> np.ndarray:
        """Block components side by side (n x B)."""
        return np.column_stack(self.y_blocks)


# ---------------------------------------------------------------------------
# criterion and gradient


def _block_norms(qs: Sequence[np.ndarray], v: np.ndarray) -> list[tuple[np.ndarray, float]]:
    out = []
    for q in qs:
        qv = q @ v
        out.append((qv, float(np.linalg.norm(qv))))
    return out


def _criterion(qs: Sequence[np.ndarray], v: np.ndarray, m: float) -> float:
    return float(sum(nrm**m for _, nrm in _block_norms(qs, v)))


def _gradient(qs: Sequence[np.ndarray], v: np.ndarray, m: float) -> np.ndarray:
    g = np.zeros(qs[0].shape[1])
    for b, q in enumerate(qs):
        qv = q @ v
        nrm = float(np.linalg.norm(qv))
        if nrm <= _ROUNDOFF_TOL * max(1.0, float(np.abs(q).max()) * math.sqrt(q.size)):
            if m < 2.0:
                raise SingularGradientError(
                    f"block {b + 1}: ||Q v|| vanished and m = {m} < 2 makes the "
                    "gradient singular there"
                )
            continue  # for m >= 2 the term is continuous at 0 and contributes 0
        g += nrm ** (m - 2.0) * (q.T @ qv)
    return m * g


def criterion(problem: TransformedProblem, v: np.ndarray) -> float:
    """sum_b ||Q_b v||^m on the raw transformed scale."""
    return _criterion(problem.q_matrices, v, problem.m)


def covariance_criterion(problem: TransformedProblem, v: np.ndarray) -> float:
    """Criterion on the covariance scale: sum_b (||Q_b v|| / n)^m."""
    return float(
        sum((nrm / problem.n) ** problem.m for _, nrm in _block_norms(problem.q_matrices, v))
    )


def gradient(problem: TransformedProblem, v: np.ndarray) -> np.ndarray:
    """m * sum_b ||Q_b v||^(m-2) Q_b'Q_b v; satisfies v'grad = m*criterion."""
    return _gradient(problem.q_matrices, v, problem.m)


def gram_matrix(problem: TransformedProblem) -> np.ndarray:
    """sum_b Q_b'Q_b, whose dominant eigenvector is the preferred start."""
    g = np.zeros((problem.dim, problem.dim))
    for q in problem.q_matrices:
        g += q.T @ q
    return g


# ---------------------------------------------------------------------------
# transform and starts


def transform(blockset: BlockSet, metrics: Sequence[ShrinkageMetric], m: float) -> TransformedProblem:
    """Build P_b = X_b M_b^(-1/2) and Q_b = P_b' P_super from metrics."""
    mats = [b.matrix for b in blockset.blocks]
    return _transform(mats, blockset.superblock, blockset.ids, metrics, m)


def _transform(mats, smat, ids, metrics, m) -> TransformedProblem:
    if len(metrics) != len(mats) + 1:
        raise DimensionError(
            f"need {len(mats) + 1} metrics (blocks plus superblock), got {len(metrics)}"
        )
    ids = ids if ids is not None else [str(b + 1) for b in range(len(mats))]
    p = [mat @ met.inv_sqrt for mat, met in zip(mats, metrics)]
    p_super = smat @ metrics[-1].inv_sqrt
    qs = []
    for b, pb in enumerate(p):
        q = pb.T @ p_super
        scale = np.linalg.norm(pb) * np.linalg.norm(p_super)
        if np.linalg.norm(q) <= 1e-14 * max(scale, 1.0):
            raise NonContributingBlockError(
                f"block {ids[b]!r} has zero cross-product with the superblock "
                "and cannot contribute; drop it from the analysis"
            )
        qs.append(q)
    return TransformedProblem(
        p_matrices=tuple(p) + (p_super,),
        q_matrices=tuple(qs),
        m=m,
        n=smat.shape[0],
    )


def _eigen_start(problem: TransformedProblem) -> tuple[np.ndarray, bool]:
    vals, vecs = np.linalg.eigh(gram_matrix(problem))
    v = vecs[:, -1].copy()
    degenerate = vals.size > 1 and (vals[-1] - vals[-2]) <= 1e-12 * max(vals[-1], 1.0)
    return v, degenerate


def _random_start(problem: TransformedProblem, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    for _ in range(100):
        v = rng.standard_normal(problem.dim)
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            continue
        v = v / nrm
        if _criterion(problem.q_matrices, v, problem.m) > 0.0:
            return v
    raise BadStartError("could not draw a start with positive criterion value")


def _given_start(problem: TransformedProblem, vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=float).ravel()
    if v.shape[0] != problem.dim:
        raise DimensionError(f"start vector has length {v.shape[0]}, expected {problem.dim}")
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise BadStartError("start vector is zero")
    v = v / nrm
    if not _criterion(problem.q_matrices, v, problem.m) > 0.0:
        raise BadStartError("criterion is zero at the given start vector")
    return v


def init_v(problem: TransformedProblem, init: str | np.ndarray = "eigen", seed: int = 0) -> np.ndarray:
    """Unit start vector with a strictly positive criterion value."""
    if isinstance(init, str):
        if init == "eigen":
            return _eigen_start(problem)[0]
        if init == "random":
            return _random_start(problem, seed)
        raise ValueError(f"unknown init {init!r}")
    return _given_start(problem, init)


def iterate(problem: TransformedProblem, v: np.ndarray) -> np.ndarray:
    """One normalized-gradient step."""
    g = gradient(problem, v)
    nrm = np.linalg.norm(g)
    if nrm == 0.0:
        raise SingularGradientError("gradient vanished; the iterate is a global minimum")
    return g / nrm


# ---------------------------------------------------------------------------
# the maximizer


def sphere_maximize(
    oracle: GradientOracle,
    config: SolverConfig,
    v0: np.ndarray | None = None,
    grad_floor_factor: float | None = None,
) -> tuple[np.ndarray, SolverTrace]:
    """Maximize a convex differentiable objective on the unit sphere.

    Iterates v <- grad(v)/||grad(v)|| until the objective increment drops
    to config.epsilon or max_iter is reached (the latter returns the best
    iterate with converged=False rather than raising). The start must have
    a positive objective value; pass it as v0 or via config.init.

    grad_floor_factor, when given, asserts that gradient norms stay above
    factor * value(start); criterion solves pass factor = m, which is what
    ties the ascent bound to the start value. Without it the per-step
    gradient norm is used.
    """
    if v0 is None:
        if not isinstance(config.init, np.ndarray):
            raise ValueError("sphere_maximize needs an explicit start vector")
        v0 = config.init
    v = np.asarray(v0, dtype=float).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise BadStartError("start vector is zero")
    v = v / nrm
    psi = float(oracle.value(v))
    if not psi > 0.0:
        raise BadStartError("objective is not positive at the start vector")

    floor = grad_floor_factor * psi if grad_floor_factor is not None else None
    psis = [psi]
    steps: list[float] = []
    bounds: list[float] = []
    sandwich: list[bool] = []
    min_grad_norm = math.inf
    eps_hit = False

    for _ in range(config.max_iter):
        g = oracle.grad(v)
        gn = float(np.linalg.norm(g))
        if gn <= 0.0:
            raise SingularGradientError("gradient vanished at an iterate")
        min_grad_norm = min(min_grad_norm, gn)
        v_new = g / gn
        psi_new = float(oracle.value(v_new))
        dpsi = psi_new - psi
        step = float(np.linalg.norm(v_new - v))
        bound = 2.0 * dpsi / (floor if floor is not None else gn)
        psis.append(psi_new)
        steps.append(step)
        bounds.append(bound)

        if dpsi < -_MONOTONE_TOL:
            raise InternalAssertionError(
                f"criterion decreased by {-dpsi:.3e} in one iteration"
            )
        if config.assert_level in ("cheap", "full") and step * step > bound + _ROUNDOFF_TOL:
            raise InternalAssertionError(
                f"ascent bound violated: step^2 = {step * step:.3e} > {bound:.3e}"
            )
        if config.assert_level == "full":
            # linear minorizer at v, evaluated at the new iterate
            g_mid = psi + float(g @ (v_new - v))
            ok = g_mid >= psi - _MONOTONE_TOL and psi_new >= g_mid - _MONOTONE_TOL
            sandwich.append(ok)
            if not ok:
                raise InternalAssertionError(
                    f"minorizer sandwich violated: psi={psi:.17g} "
                    f"G={g_mid:.17g} psi_new={psi_new:.17g}"
                )

        v, psi = v_new, psi_new
        if dpsi <= config.epsilon:
            eps_hit = True
            break

    g = oracle.grad(v)
    gn = float(np.linalg.norm(g))
    residual = float(np.linalg.norm(g / gn - v)) if gn > 0.0 else math.inf
    delta = floor if floor is not None else min_grad_norm
    threshold = math.sqrt(2.0 * config.epsilon / delta) if math.isfinite(delta) else 0.0
    trace = SolverTrace(
        psi=psis,
        step_norm=steps,
        bound=bounds,
        sandwich_ok=sandwich,
        iterations=len(steps),
        converged=eps_hit and residual <= threshold,
        fixed_point_residual=residual,
    )
    return v, trace


# ---------------------------------------------------------------------------
# full solve and back-mapping


def solve(blockset: BlockSet, modes: ModeSelector, config: SolverConfig) -> Solution:
    """Run the full pipeline on a BlockSet: metrics, transform, maximize, map back."""
    mats = [b.matrix for b in blockset.blocks]
    return solve_matrices(mats, blockset.superblock, modes, config, ids=blockset.ids)


def solve_matrices(
    mats: Sequence[np.ndarray],
    smat: np.ndarray,
    modes: ModeSelector,
    config: SolverConfig,
    ids: Sequence[str] | None = None,
) -> Solution:
    """Solve with an explicit superblock matrix.

    This is the entry point deflation needs: after deflating blocks and
    superblock on their own components the superblock is no longer the
    concatenation of the blocks.
    """
    if len(modes.block_taus) != len(mats):
        raise DimensionError(
            f"{len(modes.block_taus)} block taus for {len(mats)} blocks"
        )
    n = smat.shape[0]
    names = list(ids) if ids is not None else [str(b + 1) for b in range(len(mats))]
    metrics = [build_metric(mat, tau) for mat, tau in zip(mats, modes.block_taus)]
    metrics.append(build_metric(smat, modes.superblock_tau))
    problem = _transform(mats, smat, names, metrics, config.m)

    # run on Q/n so tracked values sit on the covariance scale
    scaled_qs = tuple(q / n for q in problem.q_matrices)
    oracle = GradientOracle(
        value=lambda v: _criterion(scaled_qs, v, config.m),
        grad=lambda v: _gradient(scaled_qs, v, config.m),
    )

    warnings: list[str] = []
    for b, met in enumerate(metrics[:-1]):
        if met.pseudo:
            warnings.append(
                f"block {names[b]!r} is rank deficient under Mode B; using the "
                "column-space projector route"
            )
    results = []
    last_failure: Exception | None = None
    for k in range(config.n_starts):
        try:
            if k == 0:
                if isinstance(config.init, np.ndarray):
                    v0 = _given_start(problem, config.init)
                elif config.init == "eigen":
                    v0, degenerate = _eigen_start(problem)
                    if degenerate:
                        warnings.append(
                            "top eigenvalue of the start operator is numerically "
                            "multiple; the iterate sequence may not be unique"
                        )
                else:
                    v0 = _random_start(problem, config.seed)
            else:
                v0 = _random_start(problem, config.seed + k)
            v, trace = sphere_maximize(oracle, config, v0, grad_floor_factor=config.m)
        except (SingularGradientError, BadStartError) as exc:
            last_failure = exc
            continue
        results.append((trace.psi[-1], k, v, trace))
    if not results:
        raise AllStartsFailedError(f"every start failed; last failure: {last_failure}")
    best = results[0]
    for cand in results[1:]:
        if cand[0] > best[0]:
            best = cand
    _, _, v, trace = best
    trace.warnings.extend(warnings)

    if metrics[-1].pseudo:
        warnings_txt = (
            "superblock is rank deficient under Mode B: the reported superblock "
            "weights are one least-norm solution; interpret the component through "
            "its correlations instead"
        )
        trace.warnings.append(warnings_txt)

    return _back_map(v, trace, mats, smat, metrics, config.m)


def _back_map(v, trace, mats, smat, metrics, m) -> Solution:
    n = smat.shape[0]
    w_super = metrics[-1].inv_sqrt @ v
    # deterministic sign: the largest-magnitude superblock weight is positive
    pivot = int(np.argmax(np.abs(w_super)))
    if w_super[pivot] < 0.0:
        v = -v
        w_super = -w_super
    y_super = smat @ w_super

    w_blocks: list[np.ndarray] = []
    y_blocks: list[np.ndarray] = []
    covs = np.empty(len(mats))
    for b, (mat, met) in enumerate(zip(mats, metrics[:-1])):
        t = mat.T @ y_super
        half_norm = float(np.linalg.norm(met.inv_sqrt @ t))
        if half_norm == 0.0:
            raise NonContributingBlockError(
                f"block {b + 1} is uncorrelated with the superblock component"
            )
        w_b = (met.inv @ t) / half_norm
        w_blocks.append(w_b)
        y_blocks.append(mat @ w_b)
        covs[b] = half_norm / n

    return Solution(
        v_super=v,
        w_super=w_super,
        y_super=y_super,
        w_blocks=w_blocks,
        y_blocks=y_blocks,
        covs=covs,
        contributions=contributions(covs, m),
        psi_final=trace.psi[-1],
        fixed_point_residual=trace.fixed_point_residual,
        trace=trace,
    )


def contributions(covs: Sequence[float], m: float) -> np.ndarray:
    """Share c_b = cov_b^m / sum(cov^m) of each block in the consensus.

    Large m concentrates the mass on the most covarying block. Powers are
    taken after dividing by the largest covariance so that extreme m stays
    finite.
    """
    covs = np.asarray(covs, dtype=float)
    if np.any(covs < 0.0):
        raise ValueError("covariances must be nonnegative")
    top = covs.max() if covs.size else 0.0
    if top == 0.0:
        raise UndefinedContributionsError("all block covariances are zero")
    scaled = (covs / top) ** m
    return scaled / scaled.sum()


# ---------------------------------------------------------------------------
# stationary-equation diagnostics


def _stationary_image(y, mats, metrics, m):
    """Inner sum of the fixed-point map applied to a superblock component."""
    z = np.zeros_like(y)
    for b, (mat, met) in enumerate(zip(mats, metrics[:-1])):
        t = mat.T @ y
        half_norm = float(np.linalg.norm(met.inv_sqrt @ t))
        if half_norm == 0.0:
            if m < 2.0:
                raise SingularGradientError(
                    f"block {b + 1}: cross-term vanished with m = {m} < 2"
                )
            continue
        z += half_norm ** (m - 2.0) * (mat @ (met.inv @ t))
    return z


def stationary_residual(
    y: np.ndarray,
    blockset: BlockSet,
    metrics: Sequence[ShrinkageMetric],
    m: float,
) -> float:
    """Unit-normalized distance between y and its fixed-point image.

    Zero exactly at solutions of the original-coordinate stationary
    equation; this is the method's signature and should agree with the
    transformed-space fixed-point residual at convergence.
    """
    mats = [b.matrix for b in blockset.blocks]
    z = _stationary_image(y, mats, metrics, m)
    img = blockset.superblock @ (metrics[-1].inv @ (blockset.superblock.T @ z))
    img_norm = np.linalg.norm(img)
    if img_norm == 0.0:
        return float(np.sqrt(2.0))
    return float(np.linalg.norm(img / img_norm - y / np.linalg.norm(y)))


def fixed_point_residual_original(
    solution: Solution,
    blockset: BlockSet,
    metrics: Sequence[ShrinkageMetric],
    m: float,
) -> float:
    """Stationary residual of the converged superblock component."""
    return stationary_residual(solution.y_super, blockset, metrics, m)


def superblock_from_block_components(
    solution: Solution,
    blockset: BlockSet,
    metrics: Sequence[ShrinkageMetric],
    m: float,
) -> np.ndarray:
    """Rebuild the superblock component from the block components.

    At a fixed point the superblock component equals the image of
    sum_b cov(y_b, y_super)^(m-1) y_b under the superblock operator; with a
    Mode B superblock the operator drops and the image is the standardized
    weighted sum itself (for m = 1, the plain standardized sum).
    """
    z = np.zeros(blockset.n)
    for cov, y_b in zip(solution.covs, solution.y_blocks):
        z += cov ** (m - 1.0) * y_b
    met = metrics[-1]
    num = blockset.superblock @ (met.inv @ (blockset.superblock.T @ z))
    den = float(np.linalg.norm(met.inv_sqrt @ (blockset.superblock.T @ z)))
    return num / den


def auxiliary_solve(
    blockset: BlockSet,
    block_taus: Sequence[float],
    m: float,
    epsilon: float = 1e-12,
    max_iter: int = 10_000,
    y0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, list[float]]:
    """Fixed-point iteration on the component itself, superblock-free.

    Iterates the stationary map of the auxiliary-variable formulation: the
    unit-variance component is repeatedly replaced by the standardized
    weighted sum of block images. With a Mode B superblock this targets the
    same solutions as the explicit-superblock solve. Returns the component,
    the number of iterations and the per-iteration criterion values.
    """
    mats = [b.matrix for b in blockset.blocks]
    n = blockset.n
    metrics = [build_metric(mat, tau) for mat, tau in zip(mats, block_taus)]
    metrics.append(None)  # _stationary_image only touches block metrics

    if y0 is None:
        # deterministic start: leading left singular vector of the superblock
        u, _, _ = np.linalg.svd(blockset.superblock, full_matrices=False)
        y0 = u[:, 0]
    y = np.asarray(y0, dtype=float).ravel()
    y = y / math.sqrt(sample_cov(y, y))

    def crit(yv):
        total = 0.0
        for mat, met in zip(mats, metrics[:-1]):
            half_norm = np.linalg.norm(met.inv_sqrt @ (mat.T @ yv))
            total += (half_norm / n) ** m
        return float(total)

    values = [crit(y)]
    if not values[0] > 0.0:
        raise BadStartError("criterion is zero at the start component")
    iterations = 0
    for _ in range(max_iter):
        z = _stationary_image(y, mats, metrics, m)
        var = sample_cov(z, z)
        if var == 0.0:
            raise SingularGradientError("fixed-point image vanished")
        y_new = z / math.sqrt(var)
        val = crit(y_new)
        dval = val - values[-1]
        values.append(val)
        iterations += 1
        if dval < -_MONOTONE_TOL:
            raise InternalAssertionError(f"criterion decreased by {-dval:.3e}")
        y = y_new
        if dval <= epsilon:
            break
    return y, iterations, values
