from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence, Union

import numpy as np

from src.config import ProblemConfig
from src.numerics import gauss_legendre_rule
from src.smoothing import r_delta

WidthProfile = Callable[[np.ndarray], np.ndarray]

TAIL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class WidthFunction:
    """Even half-width function s in class D, stored by its values at quadrature nodes.

    Between nodes s is piecewise constant: each node owns the cell bounded by
    the midpoints to its neighbours. For |x| >= c the value is ``tail``.
    """

    nodes: np.ndarray
    values: np.ndarray
    tail: float
    c: float

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size == 0:
            raise ValueError("WidthFunction needs one value per node (1-d, nonempty)")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("WidthFunction nodes must be strictly increasing")
        if nodes[0] < 0 or nodes[-1] > self.c:
            raise ValueError(f"WidthFunction nodes must lie in [0, {self.c}]")
        if np.any(~np.isfinite(values)) or np.any(values < 0):
            raise ValueError("WidthFunction values must be finite and >= 0")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_cuts", 0.5 * (nodes[1:] + nodes[:-1]))

    def __call__(self, x: float | np.ndarray) -> np.ndarray:
        ax = np.abs(np.asarray(x, dtype=float))
        cell = np.searchsorted(self._cuts, ax, side="right")
        return np.where(ax < self.c, self.values[cell], self.tail)

    @classmethod
    def on_nodes(cls, values: np.ndarray, cfg: ProblemConfig) -> "WidthFunction":
        rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
        return cls(nodes=rule.nodes, values=values, tail=cfg.z_alpha, c=cfg.c)

    @classmethod
    def from_profile(cls, profile: WidthProfile, cfg: ProblemConfig) -> "WidthFunction":
        rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
        return cls.on_nodes(np.asarray(profile(rule.nodes), dtype=float), cfg)

    @classmethod
    def constant(cls, value: float, cfg: ProblemConfig) -> "WidthFunction":
        rule = gauss_legendre_rule(cfg.quad, 0.0, cfg.c)
        return cls.on_nodes(np.full(rule.nodes.shape, float(value)), cfg)

    @classmethod
    def step(cls, breaks: Sequence[float], levels: Sequence[float], cfg: ProblemConfig) -> "WidthFunction":
        """Piecewise-constant s: ``levels[i]`` on [breaks[i-1], breaks[i]) with breaks[-1] = 0, breaks[len] = c."""
        breaks = np.asarray(breaks, dtype=float)
        levels = np.asarray(levels, dtype=float)
        if levels.size != breaks.size + 1:
            raise ValueError("step width needs len(levels) == len(breaks) + 1")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError(f"step width breaks must be strictly increasing, got {breaks.tolist()}")
        return cls.from_profile(lambda h: levels[np.searchsorted(breaks, h, side="right")], cfg)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
            "tail": self.tail,
            "c": self.c,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], cfg: Optional[ProblemConfig] = None) -> "WidthFunction":
        """Rebuild a width; with ``cfg`` the tail must be z(alpha) and c must match."""
        missing = [key for key in ("nodes", "values", "tail") if key not in data]
        if missing:
            raise ValueError(f"Missing expected width keys: {missing}")
        width = cls(
            nodes=np.asarray(data["nodes"], dtype=float),
            values=np.asarray(data["values"], dtype=float),
            tail=float(data["tail"]),
            c=float(data.get("c", 10.0)),
        )
        if cfg is not None:
            if not math.isclose(width.tail, cfg.z_alpha, rel_tol=0.0, abs_tol=TAIL_TOL):
                raise ValueError(f"width tail {width.tail} != z(alpha) = {cfg.z_alpha} for alpha = {cfg.alpha}")
            if not math.isclose(width.c, cfg.c):
                raise ValueError(f"width truncation c = {width.c} != configured c = {cfg.c}")
        return width

    def save(self, path: str | Path) -> Path:
        out = Path(path)
        out.write_text(json.dumps(self.to_dict()))
        return out

    @classmethod
    def load(cls, path: str | Path, cfg: Optional[ProblemConfig] = None) -> "WidthFunction":
        src = Path(path)
        if not src.exists():
            raise FileNotFoundError(f"Width file not found: {src}")
        try:
            data = json.loads(src.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"Width file {src} is not valid JSON: {exc}") from exc
        if not isinstance(data, Mapping):
            raise ValueError(f"Width file {src} must contain a JSON object")
        return cls.from_dict(data, cfg)


def sd_delta_profile(cfg: ProblemConfig) -> WidthProfile:
    """Exact half-width z(alpha) * r_delta(h) of the sd_delta interval, tail z(alpha) beyond c."""
    z_alpha, rho, d, c = cfg.z_alpha, cfg.rho, cfg.d, cfg.c

    def profile(h: np.ndarray) -> np.ndarray:
        ah = np.abs(np.asarray(h, dtype=float))
        return np.where(ah < c, z_alpha * r_delta(ah, rho, d), z_alpha)

    return profile


def sd_delta_width(cfg: ProblemConfig) -> WidthFunction:
    return WidthFunction.from_profile(sd_delta_profile(cfg), cfg)


Width = Union[WidthFunction, WidthProfile]
