import importlib

import pytest

from src.config import ProblemConfig
from src.mc_oracle import McEstimate, mc_coverage, mc_sel
from src.risk import Width, WidthFunction, coverage, sd_delta_profile, sel

N = 1_000_000
N_SE = 3.0


def test_usual_interval_coverage(cfg):
    s = WidthFunction.constant(cfg.z_alpha, cfg)
    est = mc_coverage(s, 1.0, cfg, N, seed=1)
    assert est.n == N
    assert est.within(0.95, n_se=N_SE)


def test_usual_interval_length_is_exact(cfg):
    est = mc_sel(WidthFunction.constant(cfg.z_alpha, cfg), 2.0, cfg, N, seed=2)
    assert est.mean == 1.0
    assert est.std_error == 0.0


def test_zero_width_never_covers(cfg):
    s = WidthFunction.constant(0.0, cfg)
    assert mc_coverage(s, 0.0, cfg, 100_000, seed=3).mean == 0.0
    assert mc_sel(s, 0.0, cfg, 100_000, seed=3).mean == 0.0


def test_sd_delta_coverage_matches_quadrature(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    for gamma in (0.0, 1.0, 2.5):
        est = mc_coverage(profile, gamma, cfg_rho7, N, seed=4)
        assert est.within(float(coverage(profile, gamma, cfg_rho7)), n_se=N_SE)


def test_sd_delta_length_matches_quadrature(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    for gamma in (0.0, 1.5):
        est = mc_sel(profile, gamma, cfg_rho7, N, seed=5)
        assert est.within(float(sel(profile, gamma, cfg_rho7)), n_se=N_SE)


def test_coverage_is_even_in_gamma(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    pos = mc_coverage(profile, 1.2, cfg_rho7, N, seed=6)
    neg = mc_coverage(profile, -1.2, cfg_rho7, N, seed=7)
    pooled = (pos.std_error**2 + neg.std_error**2) ** 0.5
    assert abs(pos.mean - neg.mean) <= N_SE * pooled


def test_standard_error_shrinks_like_root_n(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    small = mc_coverage(profile, 1.0, cfg_rho7, 10_000, seed=8)
    large = mc_coverage(profile, 1.0, cfg_rho7, N, seed=8)
    assert small.std_error / large.std_error == pytest.approx(10.0, rel=0.2)


def test_estimates_are_reproducible(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    a = mc_coverage(profile, 0.5, cfg_rho7, 50_000, seed=9, chunk_size=20_000)
    b = mc_coverage(profile, 0.5, cfg_rho7, 50_000, seed=9, chunk_size=20_000)
    assert a == b
    c = mc_coverage(profile, 0.5, cfg_rho7, 50_000, seed=10, chunk_size=20_000)
    assert c.mean != a.mean


def test_chunking_keeps_the_draw_count(cfg):
    est = mc_sel(WidthFunction.constant(1.0, cfg), 0.0, cfg, 25_001, seed=11, chunk_size=10_000)
    assert est.n == 25_001


def test_wrong_centre_is_detected(cfg_rho7):
    profile = sd_delta_profile(cfg_rho7)
    analytic = float(coverage(profile, 0.0, cfg_rho7))
    flipped = mc_coverage(profile, 0.0, cfg_rho7, 100_000, seed=12, flip_b=True)
    assert abs(flipped.mean - analytic) > 10 * flipped.std_error


def test_too_few_draws(cfg):
    with pytest.raises(ValueError):
        mc_coverage(WidthFunction.constant(1.0, cfg), 0.0, cfg, 9_999, seed=1)
    with pytest.raises(ValueError):
        mc_sel(WidthFunction.constant(1.0, cfg), 0.0, cfg, 10_000, seed=1, chunk_size=0)


def test_oracle_accepts_the_shared_width_types(cfg):
    simulate = importlib.import_module("src.mc_oracle.simulate")
    assert simulate.Width is Width
    value = cfg.z_alpha
    by_profile = mc_sel(lambda x: value + 0.0 * x, 0.0, cfg, 10_000, seed=14)
    by_nodes = mc_sel(WidthFunction.constant(value, cfg), 0.0, cfg, 10_000, seed=14)
    assert by_profile.mean == pytest.approx(by_nodes.mean, abs=1e-12)


def test_estimate_helpers():
    est = McEstimate(mean=0.5, std_error=0.01, n=10_000)
    assert est.within(0.52, n_se=3)
    assert not est.within(0.6, n_se=3)
    assert est.within(0.6, n_se=3, floor=0.1)
    assert est.to_dict() == {"mean": 0.5, "stdError": 0.01, "n": 10_000}
    with pytest.raises(ValueError):
        McEstimate(mean=0.5, std_error=-1.0, n=10)


@pytest.mark.slow
def test_sd_delta_coverage_at_ten_million_draws():
    cfg = ProblemConfig(rho=0.7)
    profile = sd_delta_profile(cfg)
    est = mc_coverage(profile, 1.0, cfg, 10_000_000, seed=13)
    assert est.within(float(coverage(profile, 1.0, cfg)), n_se=N_SE)
