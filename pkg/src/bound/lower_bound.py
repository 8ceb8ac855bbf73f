from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional

from src.config import ProblemConfig
from .minimizer import g_tilde
from .prior import BoundResult, PriorPair

logger = logging.getLogger(__name__)

SEL_THRESHOLD = 0.005


@dataclass(frozen=True)
class GainLoss:
    gain_upper_bound: float
    loss: float
    ratio: float


def lower_bound(u: float, prior: PriorPair, cfg: ProblemConfig, g: Optional[float] = None) -> float:
    """LB(u) = 1 + g~ - (sum nu2) u, a lower bound on inf e(0; s) under (C1) and (C2).

    Pass ``g`` to reuse an already computed g~ for the same prior.
    """
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    if g is None:
        g = g_tilde(prior, cfg)
    return 1.0 + g - prior.nu2_sum * u


def u_star_star(
    prior: PriorPair,
    cfg: ProblemConfig,
    threshold: float = SEL_THRESHOLD,
    g: Optional[float] = None,
) -> float:
    """Solution u of LB(u) = 1 + threshold: (g~ - threshold) / sum nu2."""
    total = prior.nu2_sum
    if not total > 0:
        raise ValueError("u** is undefined when sum(nu2) = 0")
    if g is None:
        g = g_tilde(prior, cfg)
    return (g - threshold) / total


def gain_loss(lb: float, u: float) -> GainLoss:
    """Upper bound 1 - lb^2 on the squared-SEL gain at gamma = 0 and the worst-case loss (1 + u)^2 - 1."""
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    # e(0; s) >= 0, so a nonpositive lb bounds nothing beyond that
    gain = 1.0 - max(lb, 0.0) ** 2
    loss = u * u + 2.0 * u
    return GainLoss(gain_upper_bound=gain, loss=loss, ratio=gain / loss)


def evaluate_bound(
    prior: PriorPair,
    cfg: ProblemConfig,
    u: float,
    threshold: float = SEL_THRESHOLD,
    diagnostics: Optional[dict[str, Any]] = None,
) -> BoundResult:
    """Assemble a BoundResult for one prior at one u.

    g~ is also recomputed with twice the panels; the difference is kept in
    ``diagnostics["refinement"]``.
    """
    g = g_tilde(prior, cfg)
    fine = cfg.with_quad(cfg.quad.refined())
    g_fine = g_tilde(prior, fine)
    lb = lower_bound(u, prior, cfg, g=g)
    uss = u_star_star(prior, cfg, threshold=threshold, g=g) if prior.nu2_sum > 0 else None
    gl = gain_loss(lb, u)
    diag = {
        "quad": {"panels": cfg.quad.panels, "nodesPerPanel": cfg.quad.nodes_per_panel},
        "c": cfg.c,
        "threshold": threshold,
        "refinement": {"panels": fine.quad.panels, "gTilde": g_fine, "gTildeDelta": abs(g_fine - g)},
    }
    diag.update(diagnostics or {})
    logger.debug("[bound] u=%.6g g~=%.8g lb=%.8g", u, g, lb)
    return BoundResult(
        g_tilde=g,
        lb=lb,
        u=float(u),
        nu2_sum=prior.nu2_sum,
        prior=prior,
        loss=gl.loss,
        gain_upper_bound=gl.gain_upper_bound,
        ratio=gl.ratio,
        u_star_star=uss,
        diagnostics=diag,
    )
