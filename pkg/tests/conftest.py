from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from src.bound import PriorPair
from src.config import ProblemConfig, QuadSpec
from src.risk import WidthFunction


@pytest.fixture
def cfg() -> ProblemConfig:
    return ProblemConfig(alpha=0.05, alpha_tilde=0.05, rho=0.0)


@pytest.fixture
def cfg_rho7() -> ProblemConfig:
    return ProblemConfig(alpha=0.05, alpha_tilde=0.05, rho=0.7)


@pytest.fixture
def small_quad() -> QuadSpec:
    return QuadSpec(panels=8, nodes_per_panel=6)


def make_prior(rng: np.random.Generator, max_m1: int = 3, max_m2: int = 3) -> PriorPair:
    m1 = int(rng.integers(1, max_m1 + 1))
    m2 = int(rng.integers(1, max_m2 + 1))
    gamma1 = np.cumsum(np.concatenate([[rng.uniform(0.0, 1.0)], rng.uniform(0.2, 1.5, m1 - 1)]))
    gamma2 = np.cumsum(rng.uniform(0.2, 1.5, m2))
    return PriorPair(
        gamma1=gamma1,
        nu1=rng.uniform(0.0, 2.0, m1),
        gamma2=gamma2,
        nu2=rng.uniform(0.0, 0.5, m2),
    )


def make_step_width(rng: np.random.Generator, cfg: ProblemConfig) -> WidthFunction:
    """Random piecewise-constant s in D with breaks on quadrature panel edges."""
    breaks = np.sort(rng.choice(np.arange(1, 40), size=3, replace=False)) * 0.25
    levels = rng.uniform(0.0, 2.0 * cfg.z_alpha, 4)
    return WidthFunction.step(breaks, levels, cfg)


@pytest.fixture
def prior_factory() -> Callable[..., PriorPair]:
    return make_prior


@pytest.fixture
def width_factory() -> Callable[..., WidthFunction]:
    return make_step_width
