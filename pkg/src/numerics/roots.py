from __future__ import annotations

from typing import Callable

import numpy as np


def bisect_vectorised(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> tuple[np.ndarray, np.ndarray]:
    """Bisection on many independent brackets at once.

    ``f`` maps an array of abscissae (one per bracket) to values; every bracket
    must satisfy f(lo) <= 0 < f(hi) or f(lo) > 0 >= f(hi). Returns the final
    (lo, hi) pair; the side with the sign of f(hi) is kept in ``hi``.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    if lo.size == 0:
        return lo, hi
    f_lo = np.asarray(f(lo), dtype=float)
    f_hi = np.asarray(f(hi), dtype=float)
    lo_positive = f_lo > 0
    if np.any(lo_positive == (f_hi > 0)):
        bad = np.flatnonzero(lo_positive == (f_hi > 0))
        raise ValueError(f"bisect_vectorised: {bad.size} brackets without a sign change (first at index {bad[0]})")

    for _ in range(max_iter):
        if np.max(np.abs(hi - lo)) <= xtol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = np.asarray(f(mid), dtype=float)
        move_lo = (f_mid > 0) == lo_positive
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
    return lo, hi
