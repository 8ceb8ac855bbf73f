import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config import ProblemConfig, QuadSpec, load_problem_config, table1_counts
from src.normal_kernel import Phi, phi
from src.smoothing import b, k, q_efron, r_delta

D05 = 1.959963984540054


def test_d_is_the_preliminary_test_cutoff():
    for a_t in (0.05, 0.1):
        cfg = ProblemConfig(alpha_tilde=a_t)
        assert 2.0 * (1.0 - float(Phi(cfg.d))) == pytest.approx(a_t, abs=1e-12)


def test_q_efron_at_zero():
    # closed form 1 - alphaTilde - 2 d phi(d)
    expected = 1.0 - 0.05 - 2.0 * D05 * float(phi(D05))
    assert float(q_efron(0.0, D05)) == pytest.approx(expected, abs=1e-12)
    assert float(q_efron(0.0, D05)) == pytest.approx(0.72089954, abs=1e-7)


def test_r_delta_at_zero():
    q = 0.7208995362
    expected = math.sqrt(1.0 - 2.0 * 0.49 * q + 0.49 * q * q)
    assert float(r_delta(0.0, 0.7, D05)) == pytest.approx(expected, abs=1e-9)
    assert float(r_delta(0.0, 0.7, D05)) == pytest.approx(0.74038474, abs=1e-7)


def test_r_delta_is_one_when_uncorrelated():
    g = np.linspace(0, 12, 25)
    assert_allclose(r_delta(g, 0.0, D05), 1.0, atol=0)


def test_k_is_odd():
    g = np.linspace(0.05, 9.95, 100)
    assert_allclose(k(-g, D05), -k(g, D05), atol=1e-15)
    assert float(k(0.0, D05)) == 0.0


def test_q_and_r_are_even():
    g = np.linspace(0.05, 9.95, 100)
    assert_allclose(q_efron(-g, D05), q_efron(g, D05), atol=1e-15)
    assert_allclose(r_delta(-g, 0.6, D05), r_delta(g, 0.6, D05), atol=1e-15)


@pytest.mark.parametrize("d", [D05, 1.6448536269514722])
def test_smoothing_functions_vanish_in_the_tail(d):
    g = np.linspace(10.0, 30.0, 41)
    assert np.max(np.abs(k(g, d))) < 1e-12
    assert np.max(np.abs(q_efron(g, d))) < 1e-12
    assert_allclose(r_delta(g, 0.7, d), 1.0, atol=1e-12)
    assert abs(float(q_efron(30.0, d))) < 1e-15


def test_r_delta_exceeds_one_where_q_is_negative():
    g = np.linspace(0.0, 6.0, 121)
    q = q_efron(g, D05)
    r = r_delta(g, 0.7, D05)
    assert np.all(r[q < 0] > 1.0)
    assert np.all(r[q > 0] < 1.0)


def test_b_truncated_beyond_c():
    cfg = ProblemConfig(rho=0.6)
    assert float(b(10.0, cfg)) == 0.0
    assert float(b(-10.5, cfg)) == 0.0
    assert float(b(0.9, cfg)) == pytest.approx(0.6 * float(k(0.9, cfg.d)), abs=1e-15)
    assert float(b(-0.9, cfg)) == -float(b(0.9, cfg))


def test_b_zero_when_uncorrelated():
    cfg = ProblemConfig(rho=0.0)
    assert np.all(b(np.linspace(-5, 5, 11), cfg) == 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"alpha": 0.0},
        {"alpha": 1.0},
        {"alpha_tilde": 0.0},
        {"rho": 1.0},
        {"rho": -1.2},
        {"c": 5.0},
    ],
)
def test_problem_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        ProblemConfig(**kwargs)


def test_problem_config_round_trip():
    cfg = ProblemConfig(alpha=0.05, alpha_tilde=0.1, rho=-0.6, quad=QuadSpec(panels=20, nodes_per_panel=8))
    back = ProblemConfig.from_dict(cfg.to_dict())
    assert back == cfg
    assert cfg.with_rho(0.6).rho == 0.6
    assert cfg.sigma == pytest.approx(0.8)


def test_load_problem_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"alpha": 0.05, "alphaTilde": 0.05, "rho": 0.7}))
    cfg = load_problem_config(path)
    assert cfg.rho == 0.7
    assert cfg.quad == QuadSpec()


def test_load_problem_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_problem_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValueError):
        load_problem_config(bad)
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"alpha": 0.05}))
    with pytest.raises(ValueError, match="alphaTilde"):
        load_problem_config(partial)


def test_table1_counts():
    assert table1_counts(0.05, 0.7) == (5, 3)
    assert table1_counts(0.1, 0.6) == (7, 4)
    with pytest.raises(ValueError):
        table1_counts(0.2, 0.7)
