"""Achievable rates: two-slot MMSE rates of the feedback scheme and baselines.

Receiver ``k`` stacks its two observations into ``r_k = G_k x[1] + w_k`` with
a 2x3 equivalent channel ``G_k`` and colored noise covariance ``C_k``, then
estimates its own symbol with a linear MMSE filter. All rates are in bits per
real channel use; the 1/4, 1/6, 1/2 prefactors already account for each
scheme's time sharing, so values are directly comparable. Noise variance is
normalized to 1 and SNR(dB) = 10 log10(P).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import coefficient_array
from .channel import as_channel_matrix
from .errors import NonpositivePower


@dataclass(frozen=True)
class EquivalentChannel:
    """Two-slot equivalent channel ``G`` (2x3) and noise covariance ``C`` (2x2)."""

    G: np.ndarray
    C: np.ndarray


@dataclass(frozen=True)
class RateBreakdown:
    """Per-user rates (bits per real channel use) and their sum."""

    per_user: np.ndarray
    sum: float


@dataclass(frozen=True)
class BaselineRates:
    """Per-realization sum rates of the three reference schemes, in bits."""

    time_sharing: float
    treat_as_noise: float
    ergodic_ia: float


def equivalent_channel(H, a, k: int) -> EquivalentChannel:
    """Equivalent channel and noise covariance seen by receiver ``k`` (1..3).

    Row 1 of ``G`` is the slot-1 channel row; row 2 is the slot-2 row
    ``h_k^T (diag(t) + diag(f) H)``. The receive weights ``d`` are unused:
    the MMSE receiver performs its own combining.
    """
    H = as_channel_matrix(H)
    if k not in (1, 2, 3):
        raise ValueError(f"user index must be 1, 2 or 3, got {k}")
    arr = coefficient_array(a)
    t = arr[3:6]
    f = arr[6:9]
    i = k - 1
    hk = H[i]
    G = np.vstack([hk, hk @ (np.diag(t) + np.diag(f) @ H)])
    hf = hk * f
    C = np.array([[1.0, H[i, i] * f[i]], [H[i, i] * f[i], float(hf @ hf) + 1.0]])
    return EquivalentChannel(G=G, C=C)


def _per_user_rates(H, t, f, P) -> np.ndarray:
    """MMSE rates for all users; ``t``, ``f`` shaped (3,) or (3, m).

    Works entirely through closed-form 2x2 determinants, which stays
    well-behaved at extreme SNR where explicit inversion would not.
    """
    out = np.empty((3,) + t.shape[1:])
    for k in range(3):
        hk = H[k]
        shape = (3,) + (1,) * (t.ndim - 1)
        hkc = hk.reshape(shape)
        # slot-2 row of G_k: h_kj t_j + sum_m h_km h_mj f_m
        g2 = hkc * t + (H * hk[:, None]).T @ f
        c12 = H[k, k] * f[k]
        hf = hkc * f
        c22 = (hf * hf).sum(axis=0) + 1.0
        s11 = float(hk @ hk)
        s12 = (hkc * g2).sum(axis=0)
        s22 = (g2 * g2).sum(axis=0)
        # interference-only sums drop the direct column k
        s11_i = s11 - H[k, k] ** 2
        s12_i = s12 - H[k, k] * g2[k]
        s22_i = s22 - g2[k] * g2[k]
        det_all = (1.0 + P * s11) * (c22 + P * s22) - (c12 + P * s12) ** 2
        det_int = (1.0 + P * s11_i) * (c22 + P * s22_i) - (c12 + P * s12_i) ** 2
        out[k] = 0.25 * (np.log2(det_all) - np.log2(det_int))
    # the signal term can only increase the determinant; clamp fp dust
    return np.maximum(out, 0.0)


def sum_rate(H, a, P: float) -> RateBreakdown:
    """Two-slot MMSE rates of the feedback scheme for coefficients ``a`` at power ``P``.

    Per user ``R_k = (1/4) log2 det(C_k + P sum_l g_l g_l^T) /
    det(C_k + P sum_{l != k} g_l g_l^T)`` with ``g_l`` the columns of ``G_k``.
    Invariant to the ``d`` part of ``a``.
    """
    H = as_channel_matrix(H)
    if P <= 0:
        raise NonpositivePower(f"transmit power must be positive, got {P}")
    arr = coefficient_array(a)
    per = _per_user_rates(H, arr[3:6, None], arr[6:9, None], float(P))[:, 0]
    return RateBreakdown(per_user=per, sum=float(per.sum()))


def baseline_rates(H, P: float) -> BaselineRates:
    """Per-realization sum rates of the reference schemes at power ``P``.

    Time sharing: each user gets a third of the slots at triple power.
    Treat-as-noise: single-slot transmission, cross links folded into noise.
    Ergodic alignment: half the interference-free rate at doubled power; a
    benchmark that needs channel variation, so it is not achievable here.
    """
    H = as_channel_matrix(H)
    if P <= 0:
        raise NonpositivePower(f"transmit power must be positive, got {P}")
    diag = np.diag(H)
    diag_sq = diag * diag
    row_sq = (H * H).sum(axis=1)
    cross_sq = row_sq - diag_sq
    ts = float(np.sum(np.log2(1.0 + 3.0 * P * diag_sq)) / 6.0)
    tan = float(np.sum(np.log2(1.0 + P * diag_sq / (1.0 + P * cross_sq))) / 2.0)
    eia = float(np.sum(np.log2(1.0 + 2.0 * P * diag_sq)) / 4.0)
    return BaselineRates(time_sharing=ts, treat_as_noise=tan, ergodic_ia=eia)
