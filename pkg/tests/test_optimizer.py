import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.bound import PriorPair, lower_bound
from src.config import TABLE1_ROWS, TABLE2_ROWS, OptimizerConfig, ProblemConfig, table1_counts
from src.optimizer import (
    PriorEncoding,
    escalate,
    optimize_prior,
    pad_prior,
    solve_u_star_star,
    starting_priors,
)


@pytest.fixture
def small_cfg(small_quad) -> ProblemConfig:
    return ProblemConfig(alpha=0.05, alpha_tilde=0.05, rho=0.7, quad=small_quad)


@pytest.fixture
def quick_opt() -> OptimizerConfig:
    return OptimizerConfig(
        multistarts=2,
        max_iterations=30,
        stall_window=10,
        m1_range=(1, 2),
        m2_range=(1, 1),
        seed=7,
    )


def test_encoding_round_trip():
    prior = PriorPair(gamma1=[0.0, 0.4, 2.5], nu1=[1.0, 0.2, 0.0], gamma2=[0.3, 1.0], nu2=[0.5, 0.1])
    enc = PriorEncoding(3, 2)
    theta = enc.encode(prior)
    assert theta.size == enc.size == 10
    back = enc.decode(theta)
    assert_allclose(back.gamma1, prior.gamma1, atol=1e-14)
    assert_allclose(back.gamma2, prior.gamma2, atol=1e-14)
    assert_allclose(back.nu1, prior.nu1, atol=1e-14)
    assert_allclose(back.nu2, prior.nu2, atol=1e-14)


def test_decode_always_gives_a_valid_prior():
    enc = PriorEncoding(3, 2)
    rng = np.random.default_rng(30)
    for _ in range(50):
        prior = enc.decode(rng.normal(0.0, 3.0, enc.size))
        assert prior.m1 == 3 and prior.m2 == 2
        assert prior.gamma1[0] >= 0 and prior.gamma2[0] > 0
        assert np.all(np.diff(prior.gamma1) > 0)
        assert np.all(prior.nu1 >= 0)


def test_encode_rejects_wrong_counts():
    with pytest.raises(ValueError):
        PriorEncoding(2, 2).encode(PriorPair(gamma1=[0.0], nu1=[0.0], gamma2=[1.0, 2.0], nu2=[0.0, 0.0]))


def test_pad_prior_keeps_the_bound(small_cfg):
    prior = PriorPair(gamma1=[0.2, 1.1], nu1=[0.9, 0.4], gamma2=[0.8], nu2=[0.3])
    padded = pad_prior(prior, 3, 2)
    assert padded.m1 == 3 and padded.m2 == 2
    assert_allclose(padded.gamma1, [0.2, 1.1, 2.1])
    assert_allclose(padded.gamma2, [0.8, 1.8])
    assert lower_bound(0.1, padded, small_cfg) == pytest.approx(lower_bound(0.1, prior, small_cfg), abs=1e-10)
    with pytest.raises(ValueError):
        pad_prior(prior, 1, 1)


def test_pad_empty_prior():
    padded = pad_prior(PriorPair(gamma1=[], nu1=[], gamma2=[], nu2=[]), 2, 1)
    assert_allclose(padded.gamma1, [0.0, 1.0])
    assert_allclose(padded.gamma2, [1.0])
    assert not padded.has_coverage_mass


def test_starting_priors_are_seeded(quick_opt):
    first = starting_priors(2, 2, quick_opt)
    again = starting_priors(2, 2, quick_opt)
    assert len(first) == quick_opt.multistarts
    for a, b in zip(first, again):
        assert_allclose(a.gamma1, b.gamma1, atol=0)
        assert_allclose(a.nu2, b.nu2, atol=0)
    other = starting_priors(2, 2, OptimizerConfig(multistarts=2, seed=8))
    assert not np.allclose(first[1].gamma1, other[1].gamma1)


def test_optimize_prior_improves_on_its_starts(small_cfg, quick_opt):
    baseline = PriorPair(gamma1=[0.0], nu1=[0.0], gamma2=[1.0], nu2=[0.0])
    result = optimize_prior(0.1, 1, 1, small_cfg, quick_opt, extra_starts=[baseline])
    assert result.lb >= lower_bound(0.1, baseline, small_cfg) - 1e-12
    for start in starting_priors(1, 1, quick_opt):
        assert result.lb >= lower_bound(0.1, start, small_cfg) - 1e-12
    assert result.lb == pytest.approx(1.0 + result.g_tilde - result.nu2_sum * 0.1, abs=1e-15)
    info = result.diagnostics["optimizer"]
    assert info["starts"] == 3
    assert len(info["startLbs"]) == 3


def test_optimize_prior_is_deterministic(small_cfg, quick_opt):
    a = optimize_prior(0.1, 1, 1, small_cfg, quick_opt)
    b = optimize_prior(0.1, 1, 1, small_cfg, quick_opt)
    assert a.lb == b.lb
    assert_allclose(a.prior.gamma1, b.prior.gamma1, atol=0)


def test_optimize_prior_ignores_sign_of_rho(small_cfg, quick_opt):
    pos = optimize_prior(0.1, 1, 1, small_cfg, quick_opt)
    neg = optimize_prior(0.1, 1, 1, small_cfg.with_rho(-0.7), quick_opt)
    assert pos.lb == neg.lb


def test_optimize_prior_workers_agree(small_cfg):
    serial = OptimizerConfig(multistarts=2, max_iterations=15, stall_window=10, seed=3)
    parallel = OptimizerConfig(multistarts=2, max_iterations=15, stall_window=10, seed=3, workers=2)
    assert optimize_prior(0.1, 1, 1, small_cfg, serial).lb == optimize_prior(0.1, 1, 1, small_cfg, parallel).lb


@pytest.mark.parametrize("u,m1,m2", [(0.0, 1, 1), (-0.1, 1, 1), (0.1, 0, 1), (0.1, 1, 0)])
def test_optimize_prior_rejects_bad_arguments(small_cfg, quick_opt, u, m1, m2):
    with pytest.raises(ValueError):
        optimize_prior(u, m1, m2, small_cfg, quick_opt)


def test_optimize_prior_writes_trace(small_cfg, tmp_path):
    trace = tmp_path / "trace.jsonl"
    opt = OptimizerConfig(multistarts=1, max_iterations=10, stall_window=10, trace_path=str(trace))
    optimize_prior(0.1, 1, 1, small_cfg, opt)
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows
    assert {"u", "m1", "m2", "start", "iteration", "lb", "prior"} <= set(rows[0])
    lbs = [row["lb"] for row in rows]
    assert lbs == sorted(lbs)


def test_escalate_never_loses_ground(small_cfg, quick_opt):
    result = escalate(0.1, small_cfg, quick_opt)
    steps = {(row["m1"], row["m2"]): row["lb"] for row in result.diagnostics["escalation"]}
    assert set(steps) == {(1, 1), (2, 1)}
    assert steps[(2, 1)] >= steps[(1, 1)] - 1e-9
    assert result.lb == max(steps.values())


def test_solve_u_star_star_reports_bound_at_u_star_star(small_cfg, quick_opt):
    result = solve_u_star_star(small_cfg, quick_opt, m1=1, m2=1)
    assert result.u_star_star is not None
    assert result.diagnostics["passes"][0]["u"] == quick_opt.working_u
    if result.u_star_star > 0:
        assert result.u == result.u_star_star
        assert result.lb == pytest.approx(1.005, abs=1e-9)
    else:
        assert result.u == quick_opt.working_u


def test_solve_u_star_star_needs_both_counts(small_cfg, quick_opt):
    with pytest.raises(ValueError):
        solve_u_star_star(small_cfg, quick_opt, m1=1)


@pytest.mark.slow
@pytest.mark.parametrize("alpha_tilde,abs_rho,m1,m2,reference", TABLE1_ROWS)
def test_u_star_star_reproduces_tabulated_cell(alpha_tilde, abs_rho, m1, m2, reference):
    cfg = ProblemConfig(alpha=0.05, alpha_tilde=alpha_tilde, rho=abs_rho)
    result = solve_u_star_star(cfg, OptimizerConfig(), m1=m1, m2=m2)
    assert result.u_star_star == pytest.approx(reference, rel=0.1)
    # the reported prior certifies impossibility below u**
    assert result.lb == pytest.approx(1.005, abs=1e-6)
    assert lower_bound(0.9 * result.u_star_star, result.prior, cfg) > 1.0


@pytest.mark.slow
@pytest.mark.parametrize("alpha_tilde,abs_rho,u,gain_reference,loss_reference,_ratio", TABLE2_ROWS)
def test_gain_upper_bound_reproduces_tabulated_row(alpha_tilde, abs_rho, u, gain_reference, loss_reference, _ratio):
    cfg = ProblemConfig(alpha=0.05, alpha_tilde=alpha_tilde, rho=abs_rho)
    m1, m2 = table1_counts(alpha_tilde, abs_rho)
    result = optimize_prior(u, m1, m2, cfg, OptimizerConfig())
    assert result.loss == pytest.approx(loss_reference, abs=5e-5)
    assert result.gain_upper_bound == pytest.approx(gain_reference, rel=0.1)
