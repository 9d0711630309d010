"""Linear system for exact interference alignment over two time slots.

Each transmitter sends ``x_l[1]`` in slot 1, hears its own receiver's output
``y_l[1]`` over feedback, and sends ``t_l * x_l[1] + f_l * y_l[1]`` in slot 2.
Receiver ``k`` combines its two observations as ``y_k[2] + d_k * y_k[1]``.
Stacking the nine combining weights into ``a = [d1..d3, t1..t3, f1..f3]``,
interference at every receiver cancels exactly when

    diag(d) H + H diag(t) + H diag(f) H = Lambda,   Lambda diagonal,

which is linear in ``a``. This module builds that linear system, carries the
closed-form nullspace of its interference half, and solves for coefficient
vectors with nonzero effective gains ``Lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import as_channel_matrix, check_nondegeneracy
from .errors import DegenerateChannel, DegenerateNullspace, ZeroDenominator

# Row r = 3*j + i of the stacked system corresponds to entry (i, j) of the
# target matrix (column-major). Diagonal entries land on rows 0, 4, 8.
DIAGONAL_ROWS = (0, 4, 8)
OFFDIAGONAL_ROWS = (1, 2, 3, 5, 6, 7)


@dataclass(frozen=True)
class CoefficientVector:
    """The 9 combining weights ``[d1, d2, d3, t1, t2, t3, f1, f2, f3]``.

    ``d`` weights the receive-side slot combining, ``t`` the resent message
    symbol, and ``f`` the forwarded feedback observation.
    """

    a: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.a, dtype=float)
        if arr.shape != (9,):
            raise ValueError(f"coefficient vector must have shape (9,), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficient vector entries must be finite")
        object.__setattr__(self, "a", arr)

    def d(self) -> np.ndarray:
        return self.a[0:3]

    def t(self) -> np.ndarray:
        return self.a[3:6]

    def f(self) -> np.ndarray:
        return self.a[6:9]

    @classmethod
    def from_parts(cls, d, t, f) -> "CoefficientVector":
        return cls(np.concatenate([np.asarray(d, float), np.asarray(t, float), np.asarray(f, float)]))


def coefficient_array(a) -> np.ndarray:
    """Return the underlying 9-vector of ``a`` (CoefficientVector or array-like)."""
    if isinstance(a, CoefficientVector):
        return a.a
    arr = np.asarray(a, dtype=float)
    if arr.shape != (9,):
        raise ValueError(f"coefficient vector must have shape (9,), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class SValues:
    """Closed-form channel functions that set the reachable effective gains.

    For the closed-form nullspace basis ``N``, the diagonal-gain map takes the
    triangular form ``Q N = [[0, s12, s13], [0, s22, 0], [0, 0, s33]]``, so
    these four numbers fully describe which ``Lambda`` are reachable by
    aligned solutions.
    """

    s12: float
    s13: float
    s22: float
    s33: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s12, self.s13, self.s22, self.s33])


@dataclass(frozen=True)
class AlignmentSystem:
    """Stacked linear system of the alignment condition for one channel.

    ``M`` is 9x9 with ``M @ a`` listing the entries of
    ``diag(d) H + H diag(t) + H diag(f) H`` column-major. ``B`` (6x9) holds
    the interference rows that must vanish, ``Q`` (3x9) the direct-gain rows.
    """

    M: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class AlignmentSolution:
    """An exactly aligned coefficient vector and its achieved diagonal gains.

    ``lam`` holds the measured diagonal of the combined response;
    ``residual`` is the largest off-diagonal magnitude that should have been
    cancelled. The vector is unnormalized; power scaling is a separate step.
    """

    a: CoefficientVector
    lam: np.ndarray
    residual: float


def build_system(H) -> AlignmentSystem:
    """Assemble the 9x9 alignment system and its B/Q partition for ``H``."""
    H = as_channel_matrix(H)
    M = np.zeros((9, 9))
    for j in range(3):
        for i in range(3):
            r = 3 * j + i
            M[r, i] = H[i, j]         # receive-combining weight d_i
            M[r, 3 + j] = H[i, j]     # resend weight t_j
            M[r, 6:9] = H[i, :] * H[:, j]  # feedback weights f_m
    B = M[list(OFFDIAGONAL_ROWS)]
    Q = M[list(DIAGONAL_ROWS)]
    return AlignmentSystem(M=M, B=B, Q=Q, H=H)


def combined_response(H, a) -> np.ndarray:
    """Two-slot combined response ``diag(d) H + H diag(t) + H diag(f) H``."""
    H = as_channel_matrix(H)
    arr = coefficient_array(a)
    D = np.diag(arr[0:3])
    T = np.diag(arr[3:6])
    F = np.diag(arr[6:9])
    return D @ H + H @ T + H @ F @ H


def alignment_residual(H, a) -> float:
    """Largest off-diagonal magnitude of the combined response (0 = aligned)."""
    R = combined_response(H, a)
    off = R - np.diag(np.diag(R))
    return float(np.abs(off).max())


def residual_scale(H, a) -> float:
    """Natural magnitude of the terms cancelled by alignment.

    Residual tolerances are expressed relative to this, since the combined
    response sums terms of order ``|H| * |a|`` and ``|H|^2 * |f|``.
    """
    H = as_channel_matrix(H)
    arr = coefficient_array(a)
    hmax = float(np.abs(H).max())
    return hmax * (float(np.abs(arr).max()) + hmax * float(np.abs(arr[6:9]).max()))


def _s_values_and_scales(H):
    """S-values together with their pre-cancellation magnitude scales.

    Guarded against zero denominators: entries come back ``inf``/``nan``
    rather than raising, so screening code can turn them into flags.
    """
    h11, h12, h13 = H[0]
    h21, h22, h23 = H[1]
    h31, h32, h33 = H[2]

    n1 = h11 * h23 - h13 * h21
    n2 = h11 * h32 - h12 * h31
    n3 = h13 * h22 - h12 * h23
    n4 = h21 * h32 - h22 * h31
    n5 = h13 * h32 - h12 * h33
    n6 = h21 * h33 - h23 * h31

    a1 = abs(h11 * h23) + abs(h13 * h21)
    a2 = abs(h11 * h32) + abs(h12 * h31)
    a3 = abs(h13 * h22) + abs(h12 * h23)
    a4 = abs(h21 * h32) + abs(h22 * h31)
    a5 = abs(h13 * h32) + abs(h12 * h33)
    a6 = abs(h21 * h33) + abs(h23 * h31)

    den1 = np.float64(h13 * h31)
    den2 = np.float64(h12 * h21)
    with np.errstate(divide="ignore", invalid="ignore"):
        s12 = float(np.float64(n1 * n2) / den1)
        s13 = float(np.float64(n1 * n2) / den2)
        s22 = float(np.float64(n3 * n4) / den1)
        s33 = float(np.float64(n5 * n6) / den2)
        sc12 = float(np.float64(a1 * a2) / np.abs(den1))
        sc13 = float(np.float64(a1 * a2) / np.abs(den2))
        sc22 = float(np.float64(a3 * a4) / np.abs(den1))
        sc33 = float(np.float64(a5 * a6) / np.abs(den2))
    return SValues(s12, s13, s22, s33), SValues(sc12, sc13, sc22, sc33)


def _require_nullspace_denominators(H):
    for i, j in ((0, 1), (1, 0), (0, 2), (2, 0)):
        if H[i, j] == 0.0:
            raise ZeroDenominator(f"h{i + 1}{j + 1} is zero; closed form is undefined")


def compute_s_values(H) -> SValues:
    """Evaluate the four closed-form s-values for ``H``.

    Requires ``h12, h21, h13, h31`` nonzero (they appear in denominators);
    raises :class:`ZeroDenominator` otherwise.
    """
    H = as_channel_matrix(H)
    _require_nullspace_denominators(H)
    svals, _ = _s_values_and_scales(H)
    return svals


def closed_form_nullspace(H) -> np.ndarray:
    """The explicit 9x3 basis of the interference nullspace.

    Columns span exactly the coefficient vectors that cancel all
    cross-receiver interference. The first column is the channel-independent
    solution ``d = -1, t = 1, f = 0`` (slot 2 repeats slot 1 and the receiver
    subtracts, which nulls everything including the useful signal).
    """
    H = as_channel_matrix(H)
    _require_nullspace_denominators(H)
    h11, h12, h13 = H[0]
    h21, h22, h23 = H[1]
    h31, h32, h33 = H[2]
    N = np.array(
        [
            [-1.0, h23 * (h11 * h32 - h12 * h31) / (h13 * h31), h11 * h23 * h32 / (h12 * h21) - h33],
            [-1.0, h21 * h32 / h31 - h22, h13 * h32 / h12 - h33],
            [-1.0, 0.0, h23 * h31 / h21 - (2.0 * h12 * h33 - h13 * h32) / h12],
            [1.0, h32 * (h11 * h23 - h13 * h21) / (h13 * h31),
             (h12 * h33 - h13 * h32) / h12 + h23 * (h11 * h32 - h12 * h31) / (h12 * h21)],
            [1.0, h12 * h23 / h13 - h22, h33 - h13 * h32 / h12],
            [1.0, 0.0, 0.0],
            [0.0, -h23 * h32 / (h13 * h31), -h23 * h32 / (h12 * h21)],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    sv = np.linalg.svd(N, compute_uv=False)
    if not np.all(np.isfinite(N)) or sv[-1] <= 1e-9 * sv[0]:
        raise DegenerateNullspace("closed-form nullspace columns are numerically dependent")
    return N


def orthonormal_bases(B, rtol: float = 1e-9):
    """Orthonormal (nullspace, rowspace) bases of ``B`` from one SVD.

    Returned as column matrices; for a full-rank 6x9 interference block the
    shapes are (9, 3) and (9, 6).
    """
    B = np.asarray(B, dtype=float)
    _, s, Vh = np.linalg.svd(B)
    rank = int(np.count_nonzero(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return Vh[rank:].T.copy(), Vh[:rank].T.copy()


def numerical_nullspace(B, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal nullspace basis of ``B`` (the SVD route)."""
    return orthonormal_bases(B, rtol=rtol)[0]


def solve_exact_alignment(H) -> AlignmentSolution:
    """Closed-form aligned coefficients with all effective gains nonzero.

    Picks the weight vector ``w = [1, 1/s22, 1/s33]`` in the nullspace basis,
    which pins the second and third effective gains to 1 and leaves
    ``lam1 = s12/s22 + s13/s33``. The result is unnormalized; feasibility
    scaling against a power constraint happens downstream.

    Raises :class:`DegenerateChannel` (carrying the screening report) when
    the construction is not available for ``H``.
    """
    H = as_channel_matrix(H)
    report = check_nondegeneracy(H)
    if not report.overall:
        raise DegenerateChannel("exact alignment is not solvable for this channel", report)
    s = report.s_values
    w = np.array([1.0, 1.0 / s.s22, 1.0 / s.s33])
    N = closed_form_nullspace(H)
    a = N @ w
    R = combined_response(H, a)
    lam = np.diag(R).copy()
    off = R - np.diag(lam)
    return AlignmentSolution(a=CoefficientVector(a), lam=lam, residual=float(np.abs(off).max()))
