"""Slot-2 transmit power constraints as per-user ellipsoids.

Slot 1 always spends full symbol power P. In slot 2 user ``l`` transmits
``t_l x_l[1] + f_l y_l[1]``, whose average power is a quadratic in
``(t_l, f_l)``; the constraint set is the ellipsoid ``||E_l (t_l, f_l)|| <= 1``
with an upper-triangular Cholesky-like factor ``E_l``. Receive weights ``d``
consume no transmit power and are unconstrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alignment import coefficient_array
from .channel import as_channel_matrix
from .errors import NonpositivePower


@dataclass(frozen=True)
class FeasibleRegion:
    """Per-user ellipsoid factors at common transmit power ``P`` (noise var 1).

    ``E[l] = [[1, h_ll], [0, sqrt(1/P + sum_{j != l} h_lj^2)]]`` and
    ``(t_l, f_l)`` is feasible iff ``||E[l] @ (t_l, f_l)|| <= 1``.
    """

    P: float
    E: np.ndarray  # shape (3, 2, 2)


def constraint_matrices(H, P: float) -> FeasibleRegion:
    """Build the per-user slot-2 power ellipsoids for channel ``H`` at power ``P``."""
    H = as_channel_matrix(H)
    if P <= 0:
        raise NonpositivePower(f"transmit power must be positive, got {P}")
    E = np.zeros((3, 2, 2))
    for l in range(3):
        cross = float(H[l] @ H[l]) - H[l, l] ** 2
        E[l, 0, 0] = 1.0
        E[l, 0, 1] = H[l, l]
        E[l, 1, 1] = math.sqrt(1.0 / P + cross)
    return FeasibleRegion(P=float(P), E=E)


def _pair_norms(region: FeasibleRegion, t, f) -> np.ndarray:
    # ||E_l (t_l, f_l)|| per user; t, f shaped (3,) or (3, m).
    shape = (3,) + (1,) * (t.ndim - 1)
    diag = region.E[:, 0, 1].reshape(shape)
    e22 = region.E[:, 1, 1].reshape(shape)
    c1 = t + diag * f
    c2 = e22 * f
    return np.sqrt(c1 * c1 + c2 * c2)


def is_feasible(region: FeasibleRegion, a, tol: float = 1e-9) -> bool:
    """True when every user's slot-2 pair lies inside its ellipsoid (within ``tol``)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    arr = coefficient_array(a)
    norms = _pair_norms(region, arr[3:6], arr[6:9])
    return bool(np.all(norms <= 1.0 + tol))


def max_scale(region: FeasibleRegion, direction) -> float:
    """Largest ``c >= 0`` with ``c * direction`` feasible.

    Equals ``min_l 1 / ||E_l (t_l, f_l)||`` over users with a nonzero slot-2
    pair; users transmitting nothing in slot 2 impose no bound. Returns
    ``math.inf`` when the whole slot-2 part is zero.
    """
    arr = coefficient_array(direction)
    norms = _pair_norms(region, arr[3:6], arr[6:9])
    worst = float(norms.max())
    if worst == 0.0:
        return math.inf
    return 1.0 / worst
