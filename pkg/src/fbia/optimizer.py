"""Finite-SNR coefficient designs: exact-alignment SVD scaling and max-SINR search.

Both designs work in the geometry of the alignment system: the nullspace of
the interference block ``B`` holds perfectly aligned solutions, and its
orthogonal complement (the rowspace) holds the directions that trade leaked
interference for extra signal power. The exact-alignment design maximizes
the aggregate effective gain ``||Q a||`` inside the nullspace; the max-SINR
design additionally searches along a rowspace direction chosen to favor
signal over interference, parametrized by an angle theta in [0, pi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .alignment import (
    AlignmentSystem,
    CoefficientVector,
    build_system,
    orthonormal_bases,
)
from .channel import as_channel_matrix, check_nondegeneracy
from .errors import DegenerateChannel, IllConditionedWarning
from .power import _pair_norms, constraint_matrices, max_scale
from .rates import _per_user_rates, sum_rate

_REFINE_WIDTH = 1e-4  # radians; golden-section stopping width
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DirectionPair:
    """Unit search directions: ``u_star`` aligned (nullspace of B), ``v_star``
    the max-SINR departure (rowspace of B, orthogonal to all aligned solutions)."""

    u_star: np.ndarray
    v_star: np.ndarray


@dataclass(frozen=True)
class OptimizerResult:
    """A power-feasible coefficient design and its achieved sum rate.

    ``t`` and ``f`` are the slot-2 weights actually used by the transmitters;
    ``theta_star`` is the departure angle from exact alignment (0 for the
    pure-alignment design). ``sum_rate`` always equals
    ``rates.sum_rate(H, a, P).sum`` for the stored ``a``.
    """

    a: CoefficientVector
    t: np.ndarray
    f: np.ndarray
    theta_star: float
    sum_rate: float
    scheme_tag: str


def _sign_fix(v: np.ndarray) -> np.ndarray:
    # canonical sign: first clearly-nonzero coordinate made positive
    vmax = np.abs(v).max()
    if vmax == 0.0:
        return v
    for x in v:
        if abs(x) > 1e-12 * vmax:
            return -v if x < 0.0 else v
    return v


def _dominant_eigenvector(A: np.ndarray, tol: float = 1e-13, max_iter: int = 20000) -> np.ndarray:
    """Leading eigenvector of a symmetric PSD matrix by power iteration.

    Deterministic: all-ones start, fixed sign convention, no randomness.
    Iterates on a normalized 16th power of the matrix to sharpen the spectral
    gap; convergence is judged by the eigen-residual on the original matrix.
    """
    n = A.shape[0]
    scale = float(np.abs(A).max())
    v = np.full(n, 1.0 / math.sqrt(n))
    if scale == 0.0:
        return _sign_fix(v)
    W = A / scale
    for _ in range(4):
        W = W @ W
        W = W / np.abs(W).max()
    for _ in range(max_iter):
        w = W @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            break
        w /= norm
        Aw = A @ w
        mu = float(w @ Aw)
        v = w
        if np.linalg.norm(Aw - mu * w) <= tol * max(abs(mu), scale * 1e-6):
            break
    return _sign_fix(v)


def _generalized_dominant(A: np.ndarray, Bmat: np.ndarray) -> np.ndarray:
    # leading w of the pencil (A, Bmat), Bmat SPD, via Cholesky reduction
    L = np.linalg.cholesky(Bmat)
    C = np.linalg.solve(L, np.linalg.solve(L, A).T)
    C = 0.5 * (C + C.T)
    y = _dominant_eigenvector(C)
    return np.linalg.solve(L.T, y)


def _bases_or_raise(system: AlignmentSystem):
    null_basis, row_basis = orthonormal_bases(system.B)
    if row_basis.shape[1] != 6:
        raise DegenerateChannel("interference block is rank deficient", None)
    return null_basis, row_basis


def _alignment_direction(null_basis: np.ndarray, Q: np.ndarray) -> np.ndarray:
    S = Q @ null_basis
    w = _dominant_eigenvector(S.T @ S)
    u = null_basis @ w
    return u / np.linalg.norm(u)


def _max_sinr_direction(row_basis: np.ndarray, B: np.ndarray, Q: np.ndarray) -> np.ndarray:
    QR = Q @ row_basis
    BR = B @ row_basis
    A = QR.T @ QR
    G = BR.T @ BR
    eigs = np.linalg.eigvalsh(G)
    if eigs[0] <= 0.0 or eigs[-1] / eigs[0] > 1e12:
        G = G + (1e-12 * np.trace(G) / 6.0) * np.eye(6)
        warnings.warn(
            "interference Gram matrix is near singular; ridge regularization applied",
            IllConditionedWarning,
            stacklevel=3,
        )
    w = _generalized_dominant(A, G)
    v = row_basis @ w
    return v / np.linalg.norm(v)


def alignment_direction(system: AlignmentSystem) -> np.ndarray:
    """Unit aligned direction maximizing ``||Q u||`` over the nullspace of ``B``.

    The principal component of ``Q N`` on an orthonormalized nullspace basis;
    orthonormalizing first keeps the 3x3 eigenproblem well scaled.
    """
    null_basis, _ = _bases_or_raise(system)
    return _alignment_direction(null_basis, system.Q)


def max_sinr_direction(system: AlignmentSystem) -> np.ndarray:
    """Unit rowspace direction maximizing ``||Q v|| / ||B v||``.

    The principal generalized eigenvector of the signal/interference Gram
    pencil on an orthonormal rowspace basis. When the interference Gram
    matrix is numerically singular a small ridge is added and
    :class:`IllConditionedWarning` is emitted.
    """
    _, row_basis = _bases_or_raise(system)
    return _max_sinr_direction(row_basis, system.B, system.Q)


def direction_pair(system: AlignmentSystem) -> DirectionPair:
    """Both search directions from a single basis factorization of ``B``."""
    null_basis, row_basis = _bases_or_raise(system)
    return DirectionPair(
        u_star=_alignment_direction(null_basis, system.Q),
        v_star=_max_sinr_direction(row_basis, system.B, system.Q),
    )


def _candidate(H, P, region, u, v, theta):
    # power-scaled candidate at angle theta and its sum rate, canonical path
    direction = u * math.cos(theta) + v * math.sin(theta)
    beta = max_scale(region, direction)
    a = direction.copy() if math.isinf(beta) else beta * direction
    return float(sum_rate(H, a, P).sum), a


def line_search_theta(H, P: float, dirs: DirectionPair, grid_points: int = 181) -> OptimizerResult:
    """Maximize the sum rate over ``a(theta) = beta(theta) (u* cos + v* sin)``.

    Evaluates a uniform theta grid over [0, pi) that always contains
    theta = 0 (exact alignment), then refines the winning grid cell with a
    golden-section stage down to 1e-4 rad. The returned rate is never below
    the theta = 0 candidate.
    """
    H = as_channel_matrix(H)
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    u = np.asarray(dirs.u_star, dtype=float)
    v = np.asarray(dirs.v_star, dtype=float)
    region = constraint_matrices(H, P)

    step = math.pi / grid_points
    thetas = np.arange(grid_points) * step
    dir_mat = np.outer(u, np.cos(thetas)) + np.outer(v, np.sin(thetas))
    t_mat = dir_mat[3:6]
    f_mat = dir_mat[6:9]
    norms = _pair_norms(region, t_mat, f_mat).max(axis=0)
    beta = np.where(norms > 0.0, 1.0 / np.where(norms > 0.0, norms, 1.0), 1.0)
    grid_rates = _per_user_rates(H, t_mat * beta, f_mat * beta, float(P)).sum(axis=0)
    winner = int(np.argmax(grid_rates))

    # candidates are re-evaluated through the canonical sum_rate path so the
    # final comparison (and the theta = 0 guarantee) is exact
    candidates = [(0.0, *_candidate(H, P, region, u, v, 0.0))]
    if winner != 0:
        candidates.append((thetas[winner], *_candidate(H, P, region, u, v, float(thetas[winner]))))

    def refine(lo, hi):
        # golden-section stage; assumes at most one interior peak per half-cell
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        r1, a1 = _candidate(H, P, region, u, v, x1)
        r2, a2 = _candidate(H, P, region, u, v, x2)
        candidates.append((x1, r1, a1))
        candidates.append((x2, r2, a2))
        while hi - lo > _REFINE_WIDTH:
            if r1 >= r2:
                hi, x2, r2 = x2, x1, r1
                x1 = hi - _GOLDEN * (hi - lo)
                r1, a1 = _candidate(H, P, region, u, v, x1)
                candidates.append((x1, r1, a1))
            else:
                lo, x1, r1 = x1, x2, r2
                x2 = lo + _GOLDEN * (hi - lo)
                r2, a2 = _candidate(H, P, region, u, v, x2)
                candidates.append((x2, r2, a2))

    # the two half-cells around the winner are refined separately: the rate is
    # not symmetric around the winner, and around theta = 0 in particular the
    # two departure signs carry distinct peaks
    theta_w = float(thetas[winner])
    refine(theta_w - step, theta_w)
    refine(theta_w, theta_w + step)

    theta_best, rate_best, a_best = max(candidates, key=lambda c: c[1])
    theta_star = theta_best % math.pi
    if theta_star != theta_best:
        # same candidate up to overall sign; rate is unchanged
        rate_best, a_best = _candidate(H, P, region, u, v, theta_star)
    return OptimizerResult(
        a=CoefficientVector(a_best),
        t=a_best[3:6].copy(),
        f=a_best[6:9].copy(),
        theta_star=float(theta_star),
        sum_rate=rate_best,
        scheme_tag="max-sinr",
    )


def _require_nondegenerate(H):
    report = check_nondegeneracy(H)
    if not report.overall:
        raise DegenerateChannel("channel fails the alignment solvability screen", report)
    return report


def max_sinr_feedback(H, P: float, grid_points: int = 181) -> OptimizerResult:
    """Full max-SINR design: bases, both directions, theta line search.

    Returns the slot-2 weights ``t = a[3:6]``, ``f = a[6:9]`` alongside the
    full coefficient vector.
    """
    H = as_channel_matrix(H)
    _require_nondegenerate(H)
    system = build_system(H)
    dirs = direction_pair(system)
    return line_search_theta(H, P, dirs, grid_points=grid_points)


def exact_ia_svd(H, P: float) -> OptimizerResult:
    """Exact-alignment design: principal aligned direction scaled to the power boundary."""
    H = as_channel_matrix(H)
    report = _require_nondegenerate(H)
    system = build_system(H)
    u = alignment_direction(system)
    region = constraint_matrices(H, P)
    beta = max_scale(region, u)
    if not math.isfinite(beta):
        raise DegenerateChannel("aligned direction carries no slot-2 power", report)
    a = beta * u
    breakdown = sum_rate(H, a, P)
    return OptimizerResult(
        a=CoefficientVector(a),
        t=a[3:6].copy(),
        f=a[6:9].copy(),
        theta_star=0.0,
        sum_rate=breakdown.sum,
        scheme_tag="exact-ia-svd",
    )
