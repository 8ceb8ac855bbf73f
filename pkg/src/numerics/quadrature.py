from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.config import QuadSpec


@dataclass(frozen=True, eq=False)
class GaussLegendreRule:
    """Composite Gauss-Legendre nodes and weights on [a, b].

    A rule with n nodes per panel integrates polynomials of degree 2n - 1
    exactly on every panel.
    """

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float
    spec: QuadSpec

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray | float:
        """Weighted sum of integrand values sampled at ``nodes`` (along ``axis``)."""
        return np.tensordot(np.moveaxis(np.asarray(values, dtype=float), axis, -1), self.weights, axes=([-1], [0]))


@lru_cache(maxsize=64)
def gauss_legendre_rule(spec: QuadSpec, a: float = 0.0, b: float = 10.0) -> GaussLegendreRule:
    if not b > a:
        raise ValueError(f"integration interval must satisfy b > a, got [{a}, {b}]")
    ref_nodes, ref_weights = leggauss(spec.nodes_per_panel)
    edges = np.linspace(a, b, spec.panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return GaussLegendreRule(nodes=nodes, weights=weights, a=float(a), b=float(b), spec=spec)


def integrate(f: Callable[[np.ndarray], np.ndarray], spec: QuadSpec, a: float = 0.0, b: float = 10.0) -> float:
    """Composite Gauss-Legendre integral of a vectorised ``f`` over [a, b]."""
    rule = gauss_legendre_rule(spec, float(a), float(b))
    values = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.nodes.shape)
    return float(values @ rule.weights)
