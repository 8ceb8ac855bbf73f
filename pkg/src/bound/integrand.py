"""The pointwise integrand q(x; h, gamma, nu) of g~ and the derivative bounds used to minimise it.

dq/dx splits as t1(h) - t2(x; h): t1 > 0 does not depend on x, while t2 > 0
is decreasing in x beyond x* (the largest |mu| over the coverage masses), so
the minimiser over x >= 0 lies in [0, x~] where x~ is x* or the zero of dq/dx
beyond it.
"""
from __future__ import annotations

import logging

import numpy as np

from src.config import ProblemConfig
from src.normal_kernel import phi
from src.normal_kernel.kernel import ArrayLike
from src.numerics import bisect_vectorised
from src.risk import ell, ell_dag
from src.smoothing import b
from .prior import PriorPair

logger = logging.getLogger(__name__)

BRACKET_SPANS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0)
ROOT_XTOL = 1e-12


def _scalar_or_array(out: np.ndarray, *inputs: ArrayLike) -> ArrayLike:
    if all(np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def _sel_weight(h: np.ndarray, prior: PriorPair) -> np.ndarray:
    """2 phi(h) + sum_j nu2(j) (phi(h - gamma2(j)) + phi(h + gamma2(j)))."""
    weight = 2.0 * phi(h)
    if prior.m2:
        hh = h[..., None]
        weight = weight + np.sum(prior.nu2 * (phi(hh - prior.gamma2) + phi(hh + prior.gamma2)), axis=-1)
    return weight


def _dell_dx(h: np.ndarray, gamma: np.ndarray, x: np.ndarray, cfg: ProblemConfig) -> np.ndarray:
    centre = b(h, cfg) - cfg.rho * (h - gamma)
    return (phi((centre + x) / cfg.sigma) + phi((centre - x) / cfg.sigma)) / cfg.sigma


def t1(h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    h = np.asarray(h, dtype=float)
    return _scalar_or_array(_sel_weight(h, prior) / cfg.z_alpha, h)


def t2(x: ArrayLike, h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if not prior.m1:
        return _scalar_or_array(np.zeros(np.broadcast(x, h).shape), x, h)
    xx, hh, g1 = x[..., None], h[..., None], prior.gamma1
    terms = phi(hh - g1) * _dell_dx(hh, g1, xx, cfg) + phi(hh + g1) * _dell_dx(-hh, g1, xx, cfg)
    return _scalar_or_array(np.sum(prior.nu1 * terms, axis=-1), x, h)


def dq_dx(x: ArrayLike, h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    """Derivative of q in x: t1(h) - t2(x; h). Broadcasts over x and h."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    out = np.asarray(t1(h, prior, cfg)) - np.asarray(t2(x, h, prior, cfg))
    return _scalar_or_array(np.broadcast_to(out, np.broadcast(x, h).shape), x, h)


def integrand_q(x: ArrayLike, h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    """q(x; h, gamma, nu): SEL term weighted by the gamma = 0 and nu2 masses plus the nu1-weighted coverage deficit."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(x < 0):
        raise ValueError("integrand_q requires x >= 0")
    out = (x / cfg.z_alpha - 1.0) * _sel_weight(h, prior)
    if prior.m1:
        xx, hh, g1 = x[..., None], h[..., None], prior.gamma1
        upper = (ell_dag(hh, g1, cfg) - ell(hh, g1, xx, cfg)) * phi(hh - g1)
        lower = (ell_dag(-hh, g1, cfg) - ell(-hh, g1, xx, cfg)) * phi(hh + g1)
        out = out + np.sum(prior.nu1 * (upper + lower), axis=-1)
    return _scalar_or_array(out, x, h)


def x_star(h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    """max_j max(|mu(h, gamma1(j))|, |mu(-h, gamma1(j))|) with mu(h, gamma) = b(h) - rho (h - gamma); 0 when m1 = 0."""
    h = np.asarray(h, dtype=float)
    if not prior.m1:
        return _scalar_or_array(np.zeros(h.shape), h)
    hh, g1 = h[..., None], prior.gamma1
    mu_pos = np.abs(b(hh, cfg) - cfg.rho * (hh - g1))
    mu_neg = np.abs(b(-hh, cfg) - cfg.rho * (-hh - g1))
    return _scalar_or_array(np.max(np.maximum(mu_pos, mu_neg), axis=-1), h)


def x_tilde(h: ArrayLike, prior: PriorPair, cfg: ProblemConfig) -> ArrayLike:
    """Right end of the search interval: dq/dx > 0 for every x >= x~.

    Returns x* where dq/dx(x*) > 0, otherwise the zero of dq/dx beyond x*
    (upper side of the converged bracket). Without coverage mass dq/dx = t1 > 0
    everywhere and x~ = 0.
    """
    h_in = np.asarray(h, dtype=float)
    flat = np.atleast_1d(h_in).ravel()
    if not prior.has_coverage_mass:
        return _scalar_or_array(np.zeros(h_in.shape), h_in)

    xs = np.asarray(x_star(flat, prior, cfg))
    result = xs.copy()
    need = np.flatnonzero(np.asarray(dq_dx(xs, flat, prior, cfg)) <= 0)
    if need.size:
        h_need, xs_need = flat[need], xs[need]
        lo = xs_need.copy()
        hi = xs_need + BRACKET_SPANS[0]
        open_ = np.asarray(dq_dx(hi, h_need, prior, cfg)) <= 0
        for span in BRACKET_SPANS[1:]:
            if not open_.any():
                break
            lo = np.where(open_, hi, lo)
            hi = np.where(open_, xs_need + span, hi)
            open_ = open_ & (np.asarray(dq_dx(hi, h_need, prior, cfg)) <= 0)
        if open_.any():
            bad = int(np.flatnonzero(open_)[0])
            raise RuntimeError(
                f"x_tilde: no sign change of dq/dx within x* + {BRACKET_SPANS[-1]} "
                f"(h={h_need[bad]:.6g}, x*={xs_need[bad]:.6g}); prior weights are pathological"
            )
        _, hi = bisect_vectorised(lambda x: dq_dx(x, h_need, prior, cfg), lo, hi, xtol=ROOT_XTOL)
        result[need] = hi
        logger.debug("[x_tilde] %d of %d nodes needed a root solve", need.size, flat.size)
    return _scalar_or_array(result.reshape(h_in.shape), h_in)
