"""Random channel generation and degeneracy screening.

The system is a 3-user real Gaussian interference channel with static gains.
Channels are plain 3x3 ``numpy`` arrays ``H`` with ``H[k, l]`` the gain from
transmitter ``l`` to receiver ``k`` (0-based indices in code, users 1..3 in
documentation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SEED_MASK = (1 << 64) - 1


def as_channel_matrix(H) -> np.ndarray:
    """Coerce ``H`` to a finite 3x3 float array, raising ``ValueError`` otherwise."""
    arr = np.asarray(H, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"channel matrix must have shape (3, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("channel matrix entries must be finite")
    return arr


@dataclass(frozen=True)
class ChannelDistribution:
    """Per-entry standard deviations of the zero-mean normal channel ensemble.

    ``direct_gain_std`` scales the diagonal (intended links), ``cross_gain_std``
    the off-diagonal (interfering links). The defaults give the standard
    unit-variance ensemble.
    """

    direct_gain_std: float = 1.0
    cross_gain_std: float = 1.0

    def __post_init__(self):
        if self.direct_gain_std < 0 or self.cross_gain_std < 0:
            raise ValueError("standard deviations must be nonnegative")


def sample_channel(seed: int, dist: ChannelDistribution | None = None) -> np.ndarray:
    """Draw one channel matrix as a pure function of ``seed``.

    Uses a counter-based generator keyed by ``seed`` so the result does not
    depend on any global RNG state or on the order in which seeds are
    consumed. Identical ``(seed, dist)`` always yields a bit-identical matrix.
    """
    if dist is None:
        dist = ChannelDistribution()
    key = int(seed) & _SEED_MASK
    rng = np.random.Generator(np.random.Philox(key=key))
    draws = rng.normal(size=(3, 3))
    scale = np.full((3, 3), dist.cross_gain_std)
    np.fill_diagonal(scale, dist.direct_gain_std)
    return draws * scale


@dataclass(frozen=True)
class NondegeneracyReport:
    """Outcome of the solvability screen for the closed-form aligned solution.

    ``overall`` is the conjunction of ``all_gains_nonzero``, ``s22_nonzero``,
    ``s33_nonzero`` and ``lambda_product_nonzero``; it is true exactly when
    the closed-form construction yields an aligned solution with all three
    effective gains nonzero.

    Two observational flags are reported but excluded from ``overall``:
    ``coupling_products_distinct`` checks the auxiliary inequality
    ``h13*(h21*h32 + h23*h32) != h23*(h11*h32 + h12*h31)`` verbatim, and
    ``nullspace_denominators_nonzero`` directly checks that every denominator
    appearing in the closed-form nullspace (``h12``, ``h21``, ``h13``,
    ``h31``) is nonzero. The two need not agree; both are exposed so callers
    can inspect disagreements.
    """

    all_gains_nonzero: bool
    s_values: "SValues"
    s22_nonzero: bool
    s33_nonzero: bool
    lambda_product_nonzero: bool
    coupling_products_distinct: bool
    nullspace_denominators_nonzero: bool
    overall: bool


def _exceeds(value: float, scale: float, tol: float) -> bool:
    # |value| counts as nonzero when it clears tol * max(scale, 1); the scale
    # is the pre-cancellation magnitude of the expression that produced it.
    if not np.isfinite(value):
        return False
    return bool(abs(value) > tol * max(scale, 1.0))


def check_nondegeneracy(H, tol: float = 1e-9) -> NondegeneracyReport:
    """Screen ``H`` for the conditions under which exact alignment is solvable.

    Every flag is tolerance-based: a quantity ``x`` with natural scale ``s``
    counts as zero when ``|x| <= tol * max(s, 1)``. Degenerate inputs produce
    ``overall=False`` rather than an exception.
    """
    from .alignment import _s_values_and_scales

    H = as_channel_matrix(H)
    if tol <= 0:
        raise ValueError("tol must be positive")

    habs = np.abs(H)
    gain_floor = tol * max(float(habs.max()), 1.0)
    gains_ok = bool((habs > gain_floor).all())
    null_den_ok = bool(
        habs[0, 1] > gain_floor
        and habs[1, 0] > gain_floor
        and habs[0, 2] > gain_floor
        and habs[2, 0] > gain_floor
    )

    svals, scales = _s_values_and_scales(H)
    s22_ok = _exceeds(svals.s22, scales.s22, tol)
    s33_ok = _exceeds(svals.s33, scales.s33, tol)

    with np.errstate(divide="ignore", invalid="ignore"):
        r12 = np.float64(svals.s12) / np.float64(svals.s22)
        r13 = np.float64(svals.s13) / np.float64(svals.s33)
        lam_prod = float(r12 + r13)
        lam_scale = float(abs(r12) + abs(r13))
    lam_ok = _exceeds(lam_prod, lam_scale, tol)

    h11, h12, h13 = H[0]
    h21, h22, h23 = H[1]
    h31, h32, h33 = H[2]
    lhs = h13 * (h21 * h32 + h23 * h32)
    rhs = h23 * (h11 * h32 + h12 * h31)
    pair_scale = abs(h13) * (abs(h21 * h32) + abs(h23 * h32)) + abs(h23) * (
        abs(h11 * h32) + abs(h12 * h31)
    )
    coupling_ok = _exceeds(lhs - rhs, pair_scale, tol)

    return NondegeneracyReport(
        all_gains_nonzero=gains_ok,
        s_values=svals,
        s22_nonzero=s22_ok,
        s33_nonzero=s33_ok,
        lambda_product_nonzero=lam_ok,
        coupling_products_distinct=coupling_ok,
        nullspace_denominators_nonzero=null_den_ok,
        overall=gains_ok and s22_ok and s33_ok and lam_ok,
    )
