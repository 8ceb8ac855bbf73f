from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from src.config import ProblemConfig
from src.normal_kernel import Phi, phi
from src.normal_kernel.kernel import ArrayLike
from src.numerics import gauss_legendre_rule
from src.smoothing import b
from .width import Width


def ell(h: ArrayLike, gamma: ArrayLike, x: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    """P(b(h) - x <= G~ <= b(h) + x) for G~ ~ N(rho (h - gamma), 1 - rho^2)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("ell requires a nonnegative half-width x")
    h = np.asarray(h, dtype=float)
    centre = b(h, cfg) - cfg.rho * (h - np.asarray(gamma, dtype=float))
    return Phi((centre + x) / cfg.sigma) - Phi((centre - x) / cfg.sigma)


def ell_dag(h: ArrayLike, gamma: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    """P(-z(alpha) <= G~ <= z(alpha)): coverage of the usual interval given gamma_hat = h."""
    mean = cfg.rho * (np.asarray(h, dtype=float) - np.asarray(gamma, dtype=float))
    return Phi((cfg.z_alpha - mean) / cfg.sigma) - Phi((-cfg.z_alpha - mean) / cfg.sigma)


def _widths_on_rule(s: Width, cfg: ProblemConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
    values = np.broadcast_to(np.asarray(s(rule.nodes), dtype=float), rule.nodes.shape)
    return rule.nodes, rule.weights, values


def R1(s: Width, gamma: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    """Coverage deficit: c(gamma; s, rho) = 1 - alpha - R1(s, gamma). Vectorised over gamma."""
    h, w, sh = _widths_on_rule(s, cfg)
    g = np.asarray(gamma, dtype=float)
    gg = g[..., None]
    upper = (ell_dag(h, gg, cfg) - ell(h, gg, sh, cfg)) * phi(h - gg)
    lower = (ell_dag(-h, gg, cfg) - ell(-h, gg, sh, cfg)) * phi(h + gg)
    out = (upper + lower) @ w
    return float(out) if g.ndim == 0 else out


def R2(s: Width, gamma: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    """Scaled expected length minus one: e(gamma; s) = 1 + R2(s, gamma). Does not involve rho."""
    h, w, sh = _widths_on_rule(s, cfg)
    g = np.asarray(gamma, dtype=float)
    gg = g[..., None]
    out = ((sh / cfg.z_alpha - 1.0) * (phi(h - gg) + phi(h + gg))) @ w
    return float(out) if g.ndim == 0 else out


def coverage(s: Width, gamma: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    return 1.0 - cfg.alpha - R1(s, gamma, cfg)


def sel(s: Width, gamma: ArrayLike, cfg: ProblemConfig) -> ArrayLike:
    return 1.0 + R2(s, gamma, cfg)


def default_gamma_grid(gamma_max: float = 12.0, step: float = 0.05) -> np.ndarray:
    if not step > 0 or gamma_max < 0:
        raise ValueError(f"gamma grid needs step > 0 and gamma_max >= 0, got step={step}, gamma_max={gamma_max}")
    count = int(np.floor(gamma_max / step + 1e-9))
    return np.round(np.arange(count + 1) * step, 12)


@dataclass(frozen=True, eq=False)
class RiskCurve:
    gamma_grid: np.ndarray
    coverage: np.ndarray
    sel: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"gamma": self.gamma_grid, "coverage": self.coverage, "sel": self.sel})

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma_grid.tolist(),
            "coverage": self.coverage.tolist(),
            "sel": self.sel.tolist(),
        }


def risk_curve(s: Width, gamma_grid: ArrayLike, cfg: ProblemConfig) -> RiskCurve:
    grid = np.atleast_1d(np.asarray(gamma_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("risk_curve needs a nonempty gamma grid")
    if np.any(grid < 0):
        raise ValueError("risk_curve takes the canonical gamma >= 0 grid")
    return RiskCurve(
        gamma_grid=grid,
        coverage=np.atleast_1d(coverage(s, grid, cfg)),
        sel=np.atleast_1d(sel(s, grid, cfg)),
    )


def summarize_curve(curve: RiskCurve) -> dict[str, float]:
    """Maximum SEL, SEL at gamma = 0 and minimum coverage of a risk curve."""
    i_max = int(np.argmax(curve.sel))
    i_min = int(np.argmin(curve.coverage))
    zero = np.flatnonzero(curve.gamma_grid == 0.0)
    return {
        "max_sel": float(curve.sel[i_max]),
        "gamma_at_max_sel": float(curve.gamma_grid[i_max]),
        "sel_at_zero": float(curve.sel[zero[0]]) if zero.size else float("nan"),
        "min_coverage": float(curve.coverage[i_min]),
        "gamma_at_min_coverage": float(curve.gamma_grid[i_min]),
    }


@dataclass(frozen=True)
class ConstraintReport:
    max_r1: float
    max_r2: float
    u: float
    coverage_ok: bool
    sel_ok: bool

    @property
    def feasible(self) -> bool:
        return self.coverage_ok and self.sel_ok


def check_constraints(
    s: Width,
    u: float,
    cfg: ProblemConfig,
    gamma_grid: ArrayLike | None = None,
    tol: float = 1e-9,
) -> ConstraintReport:
    """Audit (C1) R1(s, gamma) <= 0 and (C2) R2(s, gamma) <= u over a gamma >= 0 grid."""
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    max_r1 = float(np.max(R1(s, grid, cfg)))
    max_r2 = float(np.max(R2(s, grid, cfg)))
    return ConstraintReport(
        max_r1=max_r1,
        max_r2=max_r2,
        u=float(u),
        coverage_ok=max_r1 <= tol,
        sel_ok=max_r2 <= u + tol,
    )
