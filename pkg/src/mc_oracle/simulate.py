"""Monte-Carlo coverage and SEL of CI(s) drawn from the bivariate law of (G, gamma_hat).

(G, gamma_hat) is bivariate normal with means (0, gamma), unit variances and
correlation rho, sampled as G = rho Z1 + sqrt(1 - rho^2) Z2, gamma_hat = gamma + Z1.
Each chunk draws from its own Philox stream spawned from the seed, so an
estimate depends only on (seed, n, chunk_size).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.config import ProblemConfig
from src.risk import Width
from src.smoothing import b

logger = logging.getLogger(__name__)

MIN_DRAWS = 10_000
DEFAULT_CHUNK = 1_000_000

@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.std_error < 0:
            raise ValueError(f"invalid estimate: n={self.n}, std_error={self.std_error}")

    def within(self, target: float, n_se: float = 3.0, floor: float = 0.0) -> bool:
        """|mean - target| <= n_se * std_error (plus an absolute ``floor``)."""
        return abs(self.mean - target) <= n_se * self.std_error + floor

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "stdError": self.std_error, "n": self.n}


def _chunk_streams(seed: int, n: int, chunk_size: int) -> list[tuple[np.random.Generator, int]]:
    if n < MIN_DRAWS:
        raise ValueError(f"Monte-Carlo estimates need n >= {MIN_DRAWS}, got {n}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    count = math.ceil(n / chunk_size)
    sizes = [chunk_size] * (count - 1) + [n - chunk_size * (count - 1)]
    seqs = np.random.SeedSequence(seed).spawn(count)
    return [(np.random.Generator(np.random.Philox(seq)), size) for seq, size in zip(seqs, sizes)]


def mc_coverage(
    s: Width,
    gamma: float,
    cfg: ProblemConfig,
    n: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
    flip_b: bool = False,
) -> McEstimate:
    """Estimate P(b(gamma_hat) - s(gamma_hat) <= G <= b(gamma_hat) + s(gamma_hat)).

    ``flip_b`` centres the interval on -b instead; the oracle suite uses it to
    check that a wrong centre is detected.
    """
    sign = -1.0 if flip_b else 1.0
    hits = 0
    for rng, size in _chunk_streams(seed, n, chunk_size):
        z1 = rng.standard_normal(size)
        z2 = rng.standard_normal(size)
        gamma_hat = gamma + z1
        g = cfg.rho * z1 + cfg.sigma * z2
        centre = sign * b(gamma_hat, cfg)
        half = np.asarray(s(gamma_hat), dtype=float)
        hits += int(np.count_nonzero(np.abs(g - centre) <= half))
    p = hits / n
    logger.debug("[mc] coverage gamma=%.4g n=%d p=%.6f", gamma, n, p)
    return McEstimate(mean=p, std_error=math.sqrt(p * (1.0 - p) / n), n=n)


def mc_sel(
    s: Width,
    gamma: float,
    cfg: ProblemConfig,
    n: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
) -> McEstimate:
    """Estimate E[s(gamma_hat)] / z(alpha) for gamma_hat ~ N(gamma, 1)."""
    total, mean, m2 = 0, 0.0, 0.0
    for rng, size in _chunk_streams(seed, n, chunk_size):
        values = np.asarray(s(gamma + rng.standard_normal(size)), dtype=float) / cfg.z_alpha
        c_mean = float(values.mean())
        c_m2 = float(np.sum((values - c_mean) ** 2))
        # pairwise merge of (count, mean, sum of squared deviations)
        delta = c_mean - mean
        merged = total + size
        mean += delta * size / merged
        m2 += c_m2 + delta * delta * total * size / merged
        total = merged
    variance = m2 / (total - 1)
    logger.debug("[mc] sel gamma=%.4g n=%d mean=%.6f", gamma, n, mean)
    return McEstimate(mean=mean, std_error=math.sqrt(variance / total), n=total)
