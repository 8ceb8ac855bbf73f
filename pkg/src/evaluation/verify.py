from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from src.config import ProblemConfig
from src.mc_oracle import mc_coverage, mc_sel
from src.normal_kernel import phi
from src.numerics import gauss_legendre_rule
from src.risk import WidthFunction, coverage, sd_delta_profile, sd_delta_width, sel

WIDTH_KINDS = ("sd-delta", "constant", "step")
STEP_GRID = 0.25


@dataclass(frozen=True)
class OracleCase:
    """One (s, gamma, rho, alphaTilde) point at which analytic and simulated risks are compared.

    ``step`` widths take ``levels[i]`` on [breaks[i-1], breaks[i]); breaks on
    multiples of the quadrature panel width keep the quadrature exact per panel.
    """

    width: str
    gamma: float
    rho: float
    alpha: float = 0.05
    alpha_tilde: float = 0.05
    value: Optional[float] = None
    breaks: tuple[float, ...] = field(default_factory=tuple)
    levels: tuple[float, ...] = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self) -> None:
        if self.width not in WIDTH_KINDS:
            raise ValueError(f"width must be one of {WIDTH_KINDS}, got {self.width!r}")
        if self.width == "constant" and self.value is None:
            raise ValueError("a constant width case needs 'value'")
        if self.width == "step" and len(self.levels) != len(self.breaks) + 1:
            raise ValueError("a step width case needs len(levels) == len(breaks) + 1")
        if self.width == "step" and any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError(f"step breaks must be strictly increasing, got {list(self.breaks)}")

    @property
    def config(self) -> ProblemConfig:
        return ProblemConfig(alpha=self.alpha, alpha_tilde=self.alpha_tilde, rho=self.rho)

    def width_function(self, cfg: ProblemConfig) -> WidthFunction:
        if self.width == "sd-delta":
            return sd_delta_width(cfg)
        if self.width == "constant":
            return WidthFunction.constant(float(self.value), cfg)
        return WidthFunction.step(self.breaks, self.levels, cfg)

    def profile(self, cfg: ProblemConfig) -> Callable[[np.ndarray], np.ndarray]:
        """Exact s on the whole real line, used by the simulation."""
        if self.width == "sd-delta":
            return sd_delta_profile(cfg)
        if self.width == "constant":
            value, z_alpha, c = float(self.value), cfg.z_alpha, cfg.c
            return lambda x: np.where(np.abs(x) < c, value, z_alpha)
        breaks, levels = np.asarray(self.breaks, dtype=float), np.asarray(self.levels, dtype=float)
        z_alpha, c = cfg.z_alpha, cfg.c

        def step(x: np.ndarray) -> np.ndarray:
            ax = np.abs(np.asarray(x, dtype=float))
            return np.where(ax < c, levels[np.searchsorted(breaks, ax, side="right")], z_alpha)

        return step

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "label": self.label,
            "width": self.width,
            "gamma": self.gamma,
            "rho": self.rho,
            "alpha": self.alpha,
            "alphaTilde": self.alpha_tilde,
        }
        if self.value is not None:
            out["value"] = self.value
        if self.width == "step":
            out["breaks"] = list(self.breaks)
            out["levels"] = list(self.levels)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "OracleCase":
        if not isinstance(data, Mapping):
            raise ValueError(f"a case must be a JSON object, got {type(data).__name__}")
        missing = [key for key in ("width", "gamma", "rho") if key not in data]
        if missing:
            raise ValueError(f"Missing expected case keys: {missing}")
        return cls(
            width=str(data["width"]),
            gamma=float(data["gamma"]),
            rho=float(data["rho"]),
            alpha=float(data.get("alpha", 0.05)),
            alpha_tilde=float(data.get("alphaTilde", 0.05)),
            value=None if data.get("value") is None else float(data["value"]),
            breaks=tuple(float(v) for v in data.get("breaks", ())),
            levels=tuple(float(v) for v in data.get("levels", ())),
            label=str(data.get("label", "")),
        )


def default_cases(seed: int = 20190101, random_cases: int = 20) -> List[OracleCase]:
    """sd_delta at gamma in {0, 1, 2, 4} plus seeded random step widths."""
    cases = [
        OracleCase(width="sd-delta", gamma=g, rho=0.7, label=f"sd_delta gamma={g:g}")
        for g in (0.0, 1.0, 2.0, 4.0)
    ]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, random_cases])))
    z_alpha = ProblemConfig().z_alpha
    for i in range(random_cases):
        cut_points = np.sort(rng.choice(np.arange(1, 40), size=3, replace=False)) * STEP_GRID
        cases.append(
            OracleCase(
                width="step",
                gamma=float(np.round(rng.uniform(0.0, 5.0), 4)),
                rho=float(np.round(rng.uniform(-0.9, 0.9), 4)),
                alpha_tilde=float(rng.choice([0.05, 0.1])),
                breaks=tuple(float(v) for v in cut_points),
                levels=tuple(float(v) for v in np.round(rng.uniform(0.0, 2.0 * z_alpha, 4), 6)),
                label=f"random #{i + 1}",
            )
        )
    return cases


def load_cases(path: str | Path) -> List[OracleCase]:
    src = Path(path)
    if not src.exists():
        raise FileNotFoundError(f"Cases file not found: {src}")
    try:
        data = json.loads(src.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"Cases file {src} is not valid JSON: {exc}") from exc
    if isinstance(data, Mapping):
        data = data.get("cases")
    if not isinstance(data, list) or not data:
        raise ValueError(f"Cases file {src} must hold a nonempty list of cases")
    cases = []
    for i, item in enumerate(data, start=1):
        try:
            cases.append(OracleCase.from_dict(item))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"Case {i} in {src}: {exc}") from exc
    return cases


def _case_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _sel_variance(s: WidthFunction, gamma: float, cfg: ProblemConfig) -> float:
    """Var[s(gamma_hat)] / z(alpha)^2 by quadrature; s = z(alpha) beyond c."""
    rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
    ratio = np.asarray(s(rule.nodes), dtype=float) / cfg.z_alpha
    density = phi(rule.nodes - gamma) + phi(rule.nodes + gamma)
    inside = float(density @ rule.weights)
    first = float((ratio * density) @ rule.weights) + (1.0 - inside)
    second = float((ratio * ratio * density) @ rule.weights) + (1.0 - inside)
    return max(second - first * first, 0.0)


def run_oracle_suite(
    cases: Sequence[OracleCase],
    n: int,
    seed: int,
    n_se: float = 3.0,
    flip_b: bool = False,
) -> pd.DataFrame:
    """Compare analytic coverage/SEL with Monte-Carlo estimates, one row per case and quantity."""
    if not cases:
        raise ValueError("oracle suite needs at least one case")
    rows = []
    for i, case in enumerate(cases):
        cfg = case.config
        analytic_width = case.width_function(cfg)
        profile = case.profile(cfg)
        case_seed = _case_seed(seed, i)
        checks = {
            "coverage": (
                float(coverage(analytic_width, case.gamma, cfg)),
                mc_coverage(profile, case.gamma, cfg, n, case_seed, flip_b=flip_b),
            ),
            "sel": (
                float(sel(analytic_width, case.gamma, cfg)),
                mc_sel(profile, case.gamma, cfg, n, case_seed + 1),
            ),
        }
        for quantity, (analytic, est) in checks.items():
            diff = est.mean - analytic
            se = est.std_error
            # SE under the analytic law; a sample that misses a rare region reports 0
            if quantity == "coverage":
                se = max(se, math.sqrt(max(analytic * (1.0 - analytic), 0.0) / n))
            else:
                se = max(se, math.sqrt(_sel_variance(analytic_width, case.gamma, cfg) / n))
            rows.append(
                {
                    "label": case.label or f"case {i + 1}",
                    "quantity": quantity,
                    "gamma": case.gamma,
                    "rho": case.rho,
                    "alphaTilde": case.alpha_tilde,
                    "analytic": analytic,
                    "mc": est.mean,
                    "se": se,
                    "z": diff / se if se > 0 else (0.0 if diff == 0 else np.inf),
                    # 1e-8 absorbs quadrature error when the simulation variance is 0
                    "passed": abs(diff) <= n_se * se + 1e-8,
                }
            )
    return pd.DataFrame(rows)


def evaluate(report: pd.DataFrame) -> Dict[str, float]:
    """Headline numbers of an oracle run."""
    if report.empty:
        return {"checks": 0.0, "failures": 0.0, "max_abs_z": 0.0}
    return {
        "checks": float(len(report)),
        "failures": float((~report["passed"]).sum()),
        "max_abs_z": float(np.abs(report["z"]).max()),
    }
