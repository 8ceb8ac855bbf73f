import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config import QuadSpec
from src.normal_kernel import Phi, phi
from src.numerics import bisect_vectorised, gauss_legendre_rule, integrate


def test_rule_layout():
    rule = gauss_legendre_rule(QuadSpec())
    assert rule.nodes.size == 400
    assert rule.nodes.min() > 0.0 and rule.nodes.max() < 10.0
    assert np.all(np.diff(rule.nodes) > 0)
    assert rule.weights.sum() == pytest.approx(10.0, abs=1e-12)
    counts, _ = np.histogram(rule.nodes, bins=np.arange(41) * 0.25)
    assert np.all(counts == 10)


def test_rule_arrays_are_read_only():
    rule = gauss_legendre_rule(QuadSpec())
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


def test_polynomials_integrate_exactly():
    spec = QuadSpec(panels=4, nodes_per_panel=3)
    assert integrate(lambda x: x**5, spec) == pytest.approx(1e6 / 6.0, rel=1e-13)
    assert integrate(lambda x: 3 * x**2, spec, 0.0, 2.0) == pytest.approx(8.0, rel=1e-13)


def test_integrates_normal_density():
    value = integrate(phi, QuadSpec())
    assert value == pytest.approx(float(Phi(10.0)) - 0.5, abs=1e-13)


def test_rule_integrate_along_axis():
    rule = gauss_legendre_rule(QuadSpec(panels=10, nodes_per_panel=5))
    values = np.stack([np.ones_like(rule.nodes), rule.nodes])
    assert_allclose(rule.integrate(values), [10.0, 50.0], rtol=1e-13)


def test_rule_rejects_empty_interval():
    with pytest.raises(ValueError):
        gauss_legendre_rule(QuadSpec(), 1.0, 1.0)


@pytest.mark.parametrize("kwargs", [{"panels": 0}, {"nodes_per_panel": 1}])
def test_quad_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadSpec(**kwargs)


def test_bisect_vectorised_finds_square_roots():
    a = np.array([2.0, 3.0, 5.0])
    lo, hi = bisect_vectorised(lambda x: x * x - a, np.zeros(3), np.full(3, 3.0))
    assert_allclose(hi, np.sqrt(a), atol=1e-11)
    assert np.all(hi * hi - a > 0)


def test_bisect_vectorised_decreasing_brackets():
    lo, hi = bisect_vectorised(lambda x: 1.0 - x, np.zeros(2), np.array([2.0, 5.0]))
    assert_allclose(hi, 1.0, atol=1e-11)
    assert np.all(1.0 - hi <= 0)


def test_bisect_vectorised_needs_a_sign_change():
    with pytest.raises(ValueError, match="sign change"):
        bisect_vectorised(lambda x: x * x + 1.0, np.zeros(1), np.ones(1))


def test_bisect_vectorised_empty():
    lo, hi = bisect_vectorised(lambda x: x, np.zeros(0), np.zeros(0))
    assert lo.size == 0 and hi.size == 0
