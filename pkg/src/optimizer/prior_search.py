"""Multistart Nelder-Mead search for unfavourable priors that maximise LB(u).

Any prior gives a valid lower bound, so the search only affects tightness.
Locations are encoded as cumulative sums of exponentiated free variables and
masses as squares, which turns the ordered nonnegative parameter set into an
unconstrained vector.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from src.bound import BoundResult, PriorPair, evaluate_bound, g_tilde
from src.config import DEFAULT_OPTIMIZER, OptimizerConfig, ProblemConfig

logger = logging.getLogger(__name__)

LOG_STEP_CLIP = (-20.0, 5.0)
MIN_START_GAP = 1e-3
SIMPLEX_SCALE = 0.25


@dataclass(frozen=True)
class PriorEncoding:
    """Bijection between PriorPair(m1, m2) and an unconstrained vector of length 2 (m1 + m2)."""

    m1: int
    m2: int

    @property
    def size(self) -> int:
        return 2 * (self.m1 + self.m2)

    def decode(self, theta: np.ndarray) -> PriorPair:
        theta = np.asarray(theta, dtype=float)
        m1, m2 = self.m1, self.m2
        a1, a2 = theta[:m1], theta[m1:m1 + m2]
        v1, v2 = theta[m1 + m2:2 * m1 + m2], theta[2 * m1 + m2:]
        steps1 = np.exp(np.clip(a1[1:], *LOG_STEP_CLIP))
        gamma1 = np.cumsum(np.concatenate([a1[:1] ** 2, steps1])) if m1 else np.empty(0)
        gamma2 = np.cumsum(np.exp(np.clip(a2, *LOG_STEP_CLIP)))
        return PriorPair(gamma1=gamma1, nu1=v1 ** 2, gamma2=gamma2, nu2=v2 ** 2)

    def encode(self, prior: PriorPair) -> np.ndarray:
        if (prior.m1, prior.m2) != (self.m1, self.m2):
            raise ValueError(f"prior has (m1, m2) = {(prior.m1, prior.m2)}, encoding expects {(self.m1, self.m2)}")
        a1 = np.empty(self.m1)
        if self.m1:
            a1[0] = np.sqrt(prior.gamma1[0])
            a1[1:] = np.log(np.diff(prior.gamma1))
        a2 = np.log(np.diff(np.concatenate([[0.0], prior.gamma2])))
        return np.concatenate([a1, a2, np.sqrt(prior.nu1), np.sqrt(prior.nu2)])


@dataclass
class StartOutcome:
    start: int
    theta: np.ndarray
    lb: float
    iterations: int
    evaluations: int
    message: str
    trace: list[dict[str, Any]] = field(default_factory=list)


def pad_prior(prior: PriorPair, m1: int, m2: int) -> PriorPair:
    """Extend a prior with zero-mass points placed one unit beyond its last location."""
    if m1 < prior.m1 or m2 < prior.m2:
        raise ValueError(f"cannot pad a ({prior.m1}, {prior.m2}) prior down to ({m1}, {m2})")

    def extend(gamma: np.ndarray, nu: np.ndarray, target: int, first: float) -> tuple[np.ndarray, np.ndarray]:
        extra = target - gamma.size
        start = gamma[-1] + 1.0 if gamma.size else first
        return (
            np.concatenate([gamma, start + np.arange(extra, dtype=float)]),
            np.concatenate([nu, np.zeros(extra)]),
        )

    g1, n1 = extend(prior.gamma1, prior.nu1, m1, 0.0)
    g2, n2 = extend(prior.gamma2, prior.nu2, m2, 1.0)
    return PriorPair(gamma1=g1, nu1=n1, gamma2=g2, nu2=n2)


def _spread(rng: np.random.Generator, lo: float, hi: float, count: int) -> np.ndarray:
    points = np.sort(rng.uniform(lo, hi, count))
    return points + MIN_START_GAP * np.arange(count)


def starting_priors(m1: int, m2: int, opt: OptimizerConfig) -> list[PriorPair]:
    """Deterministic first start (evenly spread) followed by seeded random starts."""
    g_lo, g_hi = opt.gamma_start_range
    n_lo, n_hi = opt.nu_start_range
    starts = [
        PriorPair(
            gamma1=np.linspace(g_lo, 0.75 * g_hi, m1) + MIN_START_GAP * np.arange(m1),
            nu1=np.full(m1, 0.5 * (n_lo + n_hi)),
            gamma2=np.linspace(max(g_lo, 0.5), 0.75 * g_hi, m2) + MIN_START_GAP * np.arange(m2),
            nu2=np.full(m2, n_lo + 0.1 * (n_hi - n_lo)),
        )
    ]
    seeds = np.random.SeedSequence([opt.seed, m1, m2]).spawn(max(opt.multistarts - 1, 0))
    for seq in seeds:
        rng = np.random.Generator(np.random.Philox(seq))
        starts.append(
            PriorPair(
                gamma1=_spread(rng, g_lo, g_hi, m1),
                nu1=rng.uniform(n_lo, n_hi, m1),
                gamma2=_spread(rng, max(g_lo, 0.05), g_hi, m2),
                nu2=rng.uniform(n_lo, n_hi, m2),
            )
        )
    return starts


def _initial_simplex(theta0: np.ndarray) -> np.ndarray:
    steps = np.maximum(SIMPLEX_SCALE * np.abs(theta0), SIMPLEX_SCALE)
    return np.vstack([theta0, theta0 + np.diag(steps)])


def _run_start(
    start: int,
    theta0: np.ndarray,
    u: float,
    encoding: PriorEncoding,
    cfg: ProblemConfig,
    opt: OptimizerConfig,
) -> StartOutcome:
    def objective(theta: np.ndarray) -> float:
        try:
            prior = encoding.decode(theta)
            return -(1.0 + g_tilde(prior, cfg) - prior.nu2_sum * u)
        except (RuntimeError, ValueError) as exc:
            logger.debug("[optimizer] start %d rejected a point: %s", start, exc)
            return np.inf

    history: list[float] = []
    trace: list[dict[str, Any]] = []

    def stall_check(intermediate_result) -> None:
        lb = -float(intermediate_result.fun)
        if opt.trace_path and (not history or lb > history[-1]):
            trace.append(
                {
                    "start": start,
                    "iteration": len(history) + 1,
                    "lb": lb,
                    "prior": encoding.decode(intermediate_result.x).to_dict(),
                }
            )
        history.append(lb)
        window = opt.stall_window
        if len(history) > window and history[-1] - history[-1 - window] < opt.convergence_tol:
            raise StopIteration

    res = minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        callback=stall_check,
        options={
            "maxiter": opt.max_iterations,
            "initial_simplex": _initial_simplex(theta0),
            "adaptive": True,
            "xatol": 1e-10,
            "fatol": 1e-12,
        },
    )
    return StartOutcome(
        start=start,
        theta=np.asarray(res.x, dtype=float),
        lb=-float(res.fun),
        iterations=int(res.get("nit", len(history))),
        evaluations=int(res.get("nfev", 0)),
        message=str(res.message),
        trace=trace,
    )


def _write_trace(outcomes: Sequence[StartOutcome], path: str | Path, u: float, m1: int, m2: int) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("a") as fh:
        for outcome in outcomes:
            for row in outcome.trace:
                fh.write(json.dumps({"u": u, "m1": m1, "m2": m2, **row}) + "\n")
    logger.info("[saved] optimizer trace -> %s", out)


def optimize_prior(
    u: float,
    m1: int,
    m2: int,
    cfg: ProblemConfig,
    opt: OptimizerConfig = DEFAULT_OPTIMIZER,
    extra_starts: Optional[Sequence[PriorPair]] = None,
) -> BoundResult:
    """Maximise LB(u) over priors with m1 coverage and m2 SEL masses.

    The bound depends on rho only through |rho|, so the search runs at |rho|.
    The result is deterministic for a fixed ``opt.seed`` whatever ``opt.workers``.
    """
    if not u > 0:
        raise ValueError(f"u must be > 0, got {u}")
    if m1 < 1 or m2 < 1:
        raise ValueError(f"optimize_prior needs m1 >= 1 and m2 >= 1, got ({m1}, {m2})")
    cfg = cfg.with_rho(abs(cfg.rho))
    encoding = PriorEncoding(m1, m2)
    starts = starting_priors(m1, m2, opt) + list(extra_starts or [])
    thetas = [encoding.encode(prior) for prior in starts]

    jobs = [(i, theta, u, encoding, cfg, opt) for i, theta in enumerate(thetas)]
    if opt.workers > 1:
        with ProcessPoolExecutor(max_workers=opt.workers) as pool:
            outcomes = list(pool.map(_run_start, *zip(*jobs)))
    else:
        outcomes = [_run_start(*job) for job in jobs]

    for outcome in outcomes:
        logger.info(
            "[optimizer] (m1=%d, m2=%d) start %d/%d lb=%.8g after %d iterations",
            m1, m2, outcome.start + 1, len(outcomes), outcome.lb, outcome.iterations,
        )
    # max by LB; ties go to the earliest start
    best = max(outcomes, key=lambda o: (o.lb, -o.start))
    if opt.trace_path:
        _write_trace(outcomes, opt.trace_path, u, m1, m2)

    return evaluate_bound(
        encoding.decode(best.theta),
        cfg,
        u,
        diagnostics={
            "optimizer": {
                "method": "Nelder-Mead",
                "starts": len(outcomes),
                "bestStart": best.start,
                "iterations": best.iterations,
                "evaluations": best.evaluations,
                "message": best.message,
                "seed": opt.seed,
                "epsilon": opt.epsilon,
                "startLbs": [o.lb for o in outcomes],
            },
            "rhoSign": "bound depends on |rho| only",
        },
    )


def escalate(u: float, cfg: ProblemConfig, opt: OptimizerConfig = DEFAULT_OPTIMIZER) -> BoundResult:
    """Best LB(u) over the (m1, m2) ranges of ``opt``.

    Each cell is also started from its predecessors' best priors padded with
    zero-mass points, so LB never drops when a mass is added.
    """
    m1_lo, m1_hi = opt.m1_range
    m2_lo, m2_hi = opt.m2_range
    results: dict[tuple[int, int], BoundResult] = {}
    for m1 in range(m1_lo, m1_hi + 1):
        for m2 in range(m2_lo, m2_hi + 1):
            warm = [
                pad_prior(results[key].prior, m1, m2)
                for key in ((m1 - 1, m2), (m1, m2 - 1))
                if key in results
            ]
            results[(m1, m2)] = optimize_prior(u, m1, m2, cfg, opt, extra_starts=warm)
            logger.info("[escalate] (m1=%d, m2=%d) lb=%.8g", m1, m2, results[(m1, m2)].lb)

    best_key = max(results, key=lambda key: (results[key].lb, -key[0], -key[1]))
    best = results[best_key]
    diagnostics = dict(best.diagnostics)
    diagnostics["escalation"] = [{"m1": m1, "m2": m2, "lb": r.lb} for (m1, m2), r in results.items()]
    return replace(best, diagnostics=diagnostics)


def solve_u_star_star(
    cfg: ProblemConfig,
    opt: OptimizerConfig = DEFAULT_OPTIMIZER,
    m1: Optional[int] = None,
    m2: Optional[int] = None,
    u: Optional[float] = None,
) -> BoundResult:
    """u** from an optimised prior, refined by one re-optimisation at u = u**.

    With ``m1``/``m2`` the counts are fixed; otherwise ``escalate`` picks them.
    The returned BoundResult is evaluated at the reported u**, so its ``lb`` is
    1 + threshold up to rounding.
    """
    working_u = opt.working_u if u is None else float(u)
    if (m1 is None) != (m2 is None):
        raise ValueError("give both m1 and m2 or neither")
    if m1 is None:
        first = escalate(working_u, cfg, opt)
    else:
        first = optimize_prior(working_u, m1, m2, cfg, opt)

    if first.u_star_star is None:
        diagnostics = {**first.diagnostics, "failure": "sum(nu2) = 0 at the optimum; u** undefined"}
        logger.warning("[u**] sum(nu2) = 0 at the optimum for rho=%.3g", cfg.rho)
        return replace(first, diagnostics=diagnostics)

    passes = [{"u": working_u, "uStarStar": first.u_star_star}]
    best_prior, best_uss = first.prior, first.u_star_star
    if first.u_star_star > 0:
        second = optimize_prior(first.u_star_star, first.m1, first.m2, cfg, opt, extra_starts=[first.prior])
        passes.append({"u": first.u_star_star, "uStarStar": second.u_star_star})
        if second.u_star_star is not None and second.u_star_star > best_uss:
            best_prior, best_uss = second.prior, second.u_star_star

    eval_u = best_uss if best_uss > 0 else working_u
    result = evaluate_bound(best_prior, cfg.with_rho(abs(cfg.rho)), eval_u, diagnostics={**first.diagnostics, "passes": passes})
    logger.info("[u**] alphaTilde=%.3g |rho|=%.3g -> u**=%.8g", cfg.alpha_tilde, abs(cfg.rho), best_uss)
    return result
