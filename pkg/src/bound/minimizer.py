"""Pointwise minimisation of q(x; h) over x >= 0 at every quadrature node.

Step 1 evaluates dq/dx on the grid 0, 0.1, ..., up to the first grid point at
or beyond x~ and collects the local minimisers: x = 0 (Case 1) and the zeros
of dq/dx where it changes sign from - to + (Case 2). Step 2 keeps the one with
the smallest q. All nodes are handled together as one array problem.
"""
from __future__ import annotations

import logging

import numpy as np

from src.config import ProblemConfig
from src.numerics import bisect_vectorised, gauss_legendre_rule
from src.risk import WidthFunction
from .integrand import dq_dx, integrand_q, t1, t2, x_tilde
from .prior import PriorPair

logger = logging.getLogger(__name__)

GRID_STEP = 0.1
# relative to max(t1, t2)
ZERO_BAND = 1e-12
ROOT_XTOL = 1e-12
TIE_TOL = 1e-12


def _sign(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Sign of first - second, 0 when the difference is within rounding of the terms."""
    values = first - second
    band = ZERO_BAND * np.maximum(np.abs(first), np.abs(second))
    return np.where(values > band, 1, np.where(values < -band, -1, 0))


def minimize_on_nodes(h: np.ndarray, prior: PriorPair, cfg: ProblemConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (x_min, q_min, x_tilde) for each h in a 1-d array."""
    h = np.atleast_1d(np.asarray(h, dtype=float)).ravel()
    xt = np.atleast_1d(np.asarray(x_tilde(h, prior, cfg), dtype=float))

    # last grid index per node: smallest w with w * GRID_STEP >= x~
    last = np.ceil(xt / GRID_STEP - 1e-9).astype(int)
    last = np.maximum(last, 0)
    width = int(last.max()) + 1
    grid = np.arange(width) * GRID_STEP
    valid = np.arange(width)[None, :] <= last[:, None]

    t2_grid = np.asarray(t2(grid[None, :], h[:, None], prior, cfg), dtype=float)
    t1_grid = np.broadcast_to(np.asarray(t1(h, prior, cfg), dtype=float)[:, None], t2_grid.shape)
    signs = _sign(t1_grid, t2_grid)
    signs = np.where(valid, signs, 0)

    cand_node: list[np.ndarray] = []
    cand_x: list[np.ndarray] = []

    # Case 1: x = 0 is a local minimiser if dq/dx(0) > 0, or dq/dx(0) = 0 and dq/dx(0.1) > 0
    at_zero = signs[:, 0] > 0
    if width > 1:
        at_zero |= (signs[:, 0] == 0) & valid[:, 1] & (signs[:, 1] > 0)
    nodes = np.flatnonzero(at_zero)
    cand_node.append(nodes)
    cand_x.append(np.zeros(nodes.size))

    if width > 2:
        # exact zero at an interior grid point with - on the left and + on the right
        exact = (signs[:, 1:-1] == 0) & (signs[:, :-2] < 0) & (signs[:, 2:] > 0) & valid[:, 2:]
        nodes, cols = np.nonzero(exact)
        cand_node.append(nodes)
        cand_x.append(grid[cols + 1])

    if width > 1:
        # Case 2: sign change - to + between neighbouring grid points
        change = (signs[:, :-1] < 0) & (signs[:, 1:] > 0) & valid[:, 1:]
        nodes, cols = np.nonzero(change)
        if nodes.size:
            lo, hi = bisect_vectorised(
                lambda x: dq_dx(x, h[nodes], prior, cfg),
                grid[cols],
                grid[cols + 1],
                xtol=ROOT_XTOL,
            )
            cand_node.append(nodes)
            cand_x.append(np.minimum(0.5 * (lo + hi), xt[nodes]))

    # x~ closes the search interval and is always admissible
    cand_node.append(np.arange(h.size))
    cand_x.append(xt)

    node_idx = np.concatenate(cand_node)
    x_all = np.concatenate(cand_x)
    q_all = np.asarray(integrand_q(x_all, h[node_idx], prior, cfg), dtype=float)

    q_min = np.full(h.size, np.inf)
    np.minimum.at(q_min, node_idx, q_all)
    near = q_all <= q_min[node_idx] + TIE_TOL
    x_min = np.full(h.size, np.inf)
    np.minimum.at(x_min, node_idx[near], x_all[near])
    q_min = np.asarray(integrand_q(x_min, h, prior, cfg), dtype=float)

    logger.debug("[minimizer] %d nodes, grid width %d, %d candidates", h.size, width, x_all.size)
    return x_min, q_min, xt


def minimize_q(h: float, prior: PriorPair, cfg: ProblemConfig) -> tuple[float, float]:
    x_min, q_min, _ = minimize_on_nodes(np.array([h], dtype=float), prior, cfg)
    return float(x_min[0]), float(q_min[0])


def s_of_prior(prior: PriorPair, cfg: ProblemConfig) -> WidthFunction:
    """Width function minimising g~(s; prior) over the class D, sampled at the quadrature nodes."""
    rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
    x_min, _, _ = minimize_on_nodes(rule.nodes, prior, cfg)
    return WidthFunction.on_nodes(x_min, cfg)


def g_tilde(prior: PriorPair, cfg: ProblemConfig) -> float:
    """g~ at its minimising width: integral over [0, c] of min_x q(x; h)."""
    rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
    _, q_min, _ = minimize_on_nodes(rule.nodes, prior, cfg)
    return float(q_min @ rule.weights)


def g_tilde_for_width(s: WidthFunction, prior: PriorPair, cfg: ProblemConfig) -> float:
    """g~(s; prior) for a given width s: integral of q(s(h); h)."""
    rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
    values = np.asarray(s(rule.nodes), dtype=float)
    return float(np.asarray(integrand_q(values, rule.nodes, prior, cfg)) @ rule.weights)
