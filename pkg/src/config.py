from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Optional

from src.normal_kernel import z

MIN_TRUNCATION = 10.0


@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre rule on [0, c]: ``panels`` equal panels of ``nodes_per_panel`` nodes."""

    panels: int = 40
    nodes_per_panel: int = 10

    def __post_init__(self) -> None:
        if self.panels < 1:
            raise ValueError(f"quad.panels must be >= 1, got {self.panels}")
        if self.nodes_per_panel < 2:
            raise ValueError(f"quad.nodesPerPanel must be >= 2, got {self.nodes_per_panel}")

    def refined(self, factor: int = 2) -> "QuadSpec":
        return QuadSpec(panels=self.panels * factor, nodes_per_panel=self.nodes_per_panel)


DEFAULT_QUAD = QuadSpec()


@dataclass(frozen=True)
class ProblemConfig:
    """Scenario parameters: nominal non-coverage, preliminary-test size, correlation."""

    alpha: float = 0.05
    alpha_tilde: float = 0.05
    rho: float = 0.0
    c: float = MIN_TRUNCATION
    quad: QuadSpec = DEFAULT_QUAD

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.alpha_tilde < 1.0:
            raise ValueError(f"alphaTilde must lie in (0, 1), got {self.alpha_tilde}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if not self.c >= MIN_TRUNCATION:
            raise ValueError(f"c must be >= {MIN_TRUNCATION}, got {self.c}")

    @cached_property
    def d(self) -> float:
        """Preliminary-test cutoff: accept tau = 0 when |gamma_hat| <= d."""
        return z(self.alpha_tilde)

    @cached_property
    def z_alpha(self) -> float:
        return z(self.alpha)

    @cached_property
    def sigma(self) -> float:
        """Conditional standard deviation of G given gamma_hat."""
        return math.sqrt(1.0 - self.rho * self.rho)

    def with_rho(self, rho: float) -> "ProblemConfig":
        return ProblemConfig(alpha=self.alpha, alpha_tilde=self.alpha_tilde, rho=rho, c=self.c, quad=self.quad)

    def with_quad(self, quad: QuadSpec) -> "ProblemConfig":
        return ProblemConfig(alpha=self.alpha, alpha_tilde=self.alpha_tilde, rho=self.rho, c=self.c, quad=quad)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "alphaTilde": self.alpha_tilde,
            "rho": self.rho,
            "c": self.c,
            "quad": {"panels": self.quad.panels, "nodesPerPanel": self.quad.nodes_per_panel},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ProblemConfig":
        missing = [key for key in ("alpha", "alphaTilde", "rho") if key not in data]
        if missing:
            raise ValueError(f"Missing expected config keys: {missing}")
        quad_data = data.get("quad") or {}
        quad = QuadSpec(
            panels=int(quad_data.get("panels", DEFAULT_QUAD.panels)),
            nodes_per_panel=int(quad_data.get("nodesPerPanel", DEFAULT_QUAD.nodes_per_panel)),
        )
        return cls(
            alpha=float(data["alpha"]),
            alpha_tilde=float(data["alphaTilde"]),
            rho=float(data["rho"]),
            c=float(data.get("c", MIN_TRUNCATION)),
            quad=quad,
        )


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the multistart Nelder-Mead search over unfavourable priors.

    ``epsilon`` is carried for reporting only; the stopping rule is
    ``stall_window``/``convergence_tol``/``max_iterations``.
    """

    multistarts: int = 16
    max_iterations: int = 2000
    convergence_tol: float = 1e-6
    stall_window: int = 50
    m1_range: tuple[int, int] = (3, 6)
    m2_range: tuple[int, int] = (2, 4)
    epsilon: float = 0.05
    seed: int = 20190101
    gamma_start_range: tuple[float, float] = (0.0, 6.0)
    nu_start_range: tuple[float, float] = (0.01, 2.0)
    working_u: float = 0.1
    workers: int = 1
    trace_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.multistarts < 1:
            raise ValueError(f"multistarts must be >= 1, got {self.multistarts}")
        if not self.convergence_tol > 0:
            raise ValueError(f"convergenceTol must be > 0, got {self.convergence_tol}")
        if self.max_iterations < 1:
            raise ValueError(f"maxIterations must be >= 1, got {self.max_iterations}")
        for name in ("m1_range", "m2_range"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} must be a nonempty range of positive counts, got {(lo, hi)}")

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["m1_range"] = list(self.m1_range)
        out["m2_range"] = list(self.m2_range)
        out["gamma_start_range"] = list(self.gamma_start_range)
        out["nu_start_range"] = list(self.nu_start_range)
        return out


DEFAULT_OPTIMIZER = OptimizerConfig()


def load_problem_config(json_path: str | Path) -> ProblemConfig:
    """Load a ProblemConfig from a JSON document."""
    path = Path(json_path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a JSON object")
    return ProblemConfig.from_dict(data)


# (alphaTilde, |rho|, m1, m2, u**) for alpha = 0.05
TABLE1_ROWS: tuple[tuple[float, float, int, int, float], ...] = (
    (0.05, 0.5, 4, 4, 0.05268182),
    (0.05, 0.6, 4, 4, 0.07535683),
    (0.05, 0.7, 5, 3, 0.11375010),
    (0.05, 0.8, 5, 3, 0.15037320),
    (0.1, 0.5, 4, 2, 0.02763119),
    (0.1, 0.6, 7, 4, 0.04430236),
    (0.1, 0.7, 5, 2, 0.06345934),
    (0.1, 0.8, 5, 2, 0.07750792),
)

# (alphaTilde, |rho|, u, gain upper bound, loss, ratio) for alpha = 0.05
TABLE2_ROWS: tuple[tuple[float, float, float, float, float, float], ...] = (
    (0.05, 0.5, 0.079, 0.04948720, 0.1642, 0.3014),
    (0.05, 0.5, 0.105, 0.07126956, 0.2210, 0.3225),
    (0.05, 0.6, 0.113, 0.02959263, 0.2387, 0.1239),
    (0.05, 0.6, 0.151, 0.05424241, 0.3248, 0.1670),
    (0.05, 0.7, 0.171, 0.02867069, 0.3712, 0.0772),
    (0.05, 0.7, 0.228, 0.05785821, 0.5079, 0.1139),
    (0.05, 0.8, 0.226, 0.03730076, 0.5031, 0.0741),
    (0.05, 0.8, 0.301, 0.08313421, 0.6926, 0.1200),
    (0.1, 0.5, 0.041, 0.02654781, 0.0837, 0.3172),
    (0.1, 0.5, 0.055, 0.05058620, 0.1130, 0.4477),
    (0.1, 0.6, 0.066, 0.02488160, 0.1364, 0.1824),
    (0.1, 0.6, 0.089, 0.05302328, 0.1859, 0.2852),
    (0.1, 0.7, 0.095, 0.02606301, 0.1990, 0.1309),
    (0.1, 0.7, 0.127, 0.05599555, 0.2701, 0.2073),
    (0.1, 0.8, 0.117, 0.03431617, 0.2477, 0.1385),
    (0.1, 0.8, 0.156, 0.05958476, 0.3363, 0.1772),
)


def table1_counts(alpha_tilde: float, abs_rho: float) -> tuple[int, int]:
    """(m1, m2) listed for a (alphaTilde, |rho|) cell of the u** table."""
    for a_t, r, m1, m2, _ in TABLE1_ROWS:
        if math.isclose(a_t, alpha_tilde) and math.isclose(r, abs_rho):
            return m1, m2
    raise ValueError(f"no tabulated (m1, m2) for alphaTilde={alpha_tilde}, |rho|={abs_rho}")
