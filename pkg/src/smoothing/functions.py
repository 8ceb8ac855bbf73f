from __future__ import annotations

import numpy as np

from src.config import ProblemConfig
from src.normal_kernel import Phi, phi
from src.normal_kernel.kernel import ArrayLike


def k(gamma: ArrayLike, d: float) -> ArrayLike:
    """Shift of the ideal bagged estimator: theta_tilde = theta_hat - rho*sigma*v^(1/2)*k(gamma_hat)."""
    g = np.asarray(gamma, dtype=float)
    return phi(d + g) - phi(d - g) + g * (Phi(d - g) - Phi(-d - g))


def q_efron(gamma: ArrayLike, d: float) -> ArrayLike:
    g = np.asarray(gamma, dtype=float)
    return Phi(d - g) - Phi(-d - g) - d * (phi(d + g) + phi(d - g))


def r_delta(gamma: ArrayLike, rho: float, d: float) -> ArrayLike:
    """Delta-method standard deviation of the bagged estimator, in units of sigma*v^(1/2)."""
    q = q_efron(gamma, d)
    rho2 = rho * rho
    radicand = 1.0 - 2.0 * rho2 * q + rho2 * q * q
    # (1 - rho^2 q)^2 + rho^2 (1 - rho^2) q^2 >= 0; only rounding can push it below.
    if np.any(radicand < -1e-14):
        raise RuntimeError(f"negative radicand in r_delta: min {np.min(radicand)!r}")
    return np.sqrt(np.maximum(radicand, 0.0))


def b(x: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    """Centre offset rho*k(x), truncated to exactly 0 for |x| >= c."""
    xa = np.asarray(x, dtype=float)
    if cfg.rho == 0.0:
        return np.zeros_like(xa)
    return np.where(np.abs(xa) < cfg.c, cfg.rho * k(xa, cfg.d), 0.0)
