from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np


def _as_vector(values: Any, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.array(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if np.any(~np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PriorPair:
    """Two discrete unfavourable priors as multipliers on the risk constraints.

    ``gamma1``/``nu1`` weight the coverage deficits R1(s, gamma1(j)),
    ``gamma2``/``nu2`` weight the SEL excesses R2(s, gamma2(j)).
    """

    gamma1: np.ndarray
    nu1: np.ndarray
    gamma2: np.ndarray
    nu2: np.ndarray

    def __post_init__(self) -> None:
        for name in ("gamma1", "nu1", "gamma2", "nu2"):
            object.__setattr__(self, name, _as_vector(getattr(self, name), name))
        if self.gamma1.shape != self.nu1.shape:
            raise ValueError("gamma1 and nu1 must have the same length")
        if self.gamma2.shape != self.nu2.shape:
            raise ValueError("gamma2 and nu2 must have the same length")
        if self.m1 and (self.gamma1[0] < 0 or np.any(np.diff(self.gamma1) <= 0)):
            raise ValueError(f"gamma1 must satisfy 0 <= gamma1(1) < gamma1(2) < ..., got {self.gamma1.tolist()}")
        if self.m2 and (self.gamma2[0] <= 0 or np.any(np.diff(self.gamma2) <= 0)):
            raise ValueError(f"gamma2 must satisfy 0 < gamma2(1) < gamma2(2) < ..., got {self.gamma2.tolist()}")
        if np.any(self.nu1 < 0) or np.any(self.nu2 < 0):
            raise ValueError("prior weights nu must be nonnegative")

    @property
    def m1(self) -> int:
        return int(self.gamma1.size)

    @property
    def m2(self) -> int:
        return int(self.gamma2.size)

    @property
    def nu2_sum(self) -> float:
        return float(np.sum(self.nu2))

    @property
    def has_coverage_mass(self) -> bool:
        return bool(self.m1 and np.any(self.nu1 > 0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma1": self.gamma1.tolist(),
            "nu1": self.nu1.tolist(),
            "gamma2": self.gamma2.tolist(),
            "nu2": self.nu2.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PriorPair":
        missing = [key for key in ("gamma1", "nu1", "gamma2", "nu2") if key not in data]
        if missing:
            raise ValueError(f"Missing expected prior keys: {missing}")
        return cls(gamma1=data["gamma1"], nu1=data["nu1"], gamma2=data["gamma2"], nu2=data["nu2"])


@dataclass(frozen=True)
class BoundResult:
    """One row of the bound tables: g~, LB(u), u**, gain/loss and the prior that produced them."""

    g_tilde: float
    lb: float
    u: float
    nu2_sum: float
    prior: PriorPair
    loss: float
    gain_upper_bound: float
    ratio: float
    u_star_star: Optional[float] = None
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def m1(self) -> int:
        return self.prior.m1

    @property
    def m2(self) -> int:
        return self.prior.m2

    @property
    def impossible(self) -> bool:
        """True when the certified lower bound on e(0; s) exceeds 1: no SEL gain at gamma = 0 is attainable."""
        return self.lb > 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "gTilde": self.g_tilde,
            "lb": self.lb,
            "u": self.u,
            "uStarStar": self.u_star_star,
            "nu2Sum": self.nu2_sum,
            "m1": self.m1,
            "m2": self.m2,
            "gainUpperBound": self.gain_upper_bound,
            "loss": self.loss,
            "ratio": self.ratio,
            "impossible": self.impossible,
            "prior": self.prior.to_dict(),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BoundResult":
        return cls(
            g_tilde=float(data["gTilde"]),
            lb=float(data["lb"]),
            u=float(data["u"]),
            nu2_sum=float(data["nu2Sum"]),
            prior=PriorPair.from_dict(data["prior"]),
            loss=float(data["loss"]),
            gain_upper_bound=float(data["gainUpperBound"]),
            ratio=float(data["ratio"]),
            u_star_star=None if data.get("uStarStar") is None else float(data["uStarStar"]),
            diagnostics=dict(data.get("diagnostics") or {}),
        )
