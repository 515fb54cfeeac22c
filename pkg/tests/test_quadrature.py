import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta, gamma

from affsob.quadrature import (
    Frame,
    HalfSpaceRule,
    NonFiniteIntegrandError,
    NonIntegrableError,
    fsum_chunks,
    gauss_jacobi01,
    hemisphere_rule,
    integrate_halfspace,
    integrate_sphere,
    polar_sphere_rule,
    sphere_rule,
)
from affsob.scalar_kernel import sphere_area


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_sphere_weights_sum_to_area(d):
    rule = sphere_rule(d, 16)
    assert rule.weights.sum() == pytest.approx(sphere_area(d), rel=1e-13)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0)


@pytest.mark.parametrize("kind", ["product", "lebedev"])
def test_s2_second_and_fourth_moments(kind):
    rule = sphere_rule(2, 17, kind)
    assert integrate_sphere(rule, lambda X: X[:, 0] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert integrate_sphere(rule, lambda X: X[:, 2] ** 4) == pytest.approx(4 * math.pi / 5, rel=1e-12)


def test_pole_aligned_rule_integrates_kink_exactly():
    pole = np.array([0.3, -0.5, 0.8])
    pole /= np.linalg.norm(pole)
    rule = polar_sphere_rule(2, pole, 24)
    # int_{S^2} |<u, e>|^p = 4 pi / (p + 1)
    got = integrate_sphere(rule, lambda X: np.abs(X @ pole) ** 1.5)
    assert got == pytest.approx(4 * math.pi / 2.5, rel=1e-12)


def test_antipode_index_is_an_involution():
    rule = sphere_rule(2, 12)
    idx = rule.antipode_index()
    assert np.allclose(rule.nodes[idx], -rule.nodes)
    assert np.array_equal(idx[idx], np.arange(rule.size))


@given(st.integers(min_value=0, max_value=12), st.floats(min_value=-0.9, max_value=3.0),
       st.floats(min_value=-0.9, max_value=3.0))
def test_gauss_jacobi_monomials(k, a0, a1):
    u, w = gauss_jacobi01(8, a0, a1)
    assert float(np.sum(w * u**k)) == pytest.approx(beta(a0 + k + 1, a1 + 1), rel=1e-11)


def test_gauss_jacobi_rejects_nonintegrable():
    with pytest.raises(NonIntegrableError):
        gauss_jacobi01(4, -1.0, 0.0)


def test_exponential_example():
    # int_0^inf int_R e^{-t - x^2} dx dt = sqrt(pi)
    rule = HalfSpaceRule(n=2, a=0.0, kappa=1.0)
    res = integrate_halfspace(rule, lambda t, x: np.exp(-t - x[:, 0] ** 2))
    assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert res.err_estimate < 1e-8


@given(st.sampled_from([2, 3, 4]), st.floats(min_value=0.0, max_value=3.0),
       st.floats(min_value=0.5, max_value=2.0), st.integers(min_value=0, max_value=10_000))
def test_gaussian_moment_in_any_frame(n, a, lam, key):
    rng = np.random.default_rng(key)
    B = rng.standard_normal((n - 1, n - 1)) + 2 * np.eye(n - 1)
    x0 = rng.uniform(-1, 1, n - 1)
    rule = HalfSpaceRule(n=n, a=a, frame=Frame.make(lam, B, x0))

    def g(t, x):
        u = (x - x0) @ B.T
        return np.exp(-(lam * t) ** 2 - np.einsum("ij,ij->i", u, u))

    want = gamma((a + 1) / 2) / 2 * math.pi ** ((n - 1) / 2) / (lam ** (a + 1) * abs(np.linalg.det(B)))
    assert integrate_halfspace(rule, g).value == pytest.approx(want, rel=1e-10)


def test_power_tail_and_nonintegrable_guard():
    n, a = 3, 1.0
    rule = HalfSpaceRule(n=n, a=a, kappa=2.0)
    s = 7.0  # (1 + r^2)^{-s/2} decays like r^{-s}
    g = lambda t, x: (1 + t * t + np.einsum("ij,ij->i", x, x)) ** (-s / 2)
    # radial: |S^{n-1} weighted| * int r^{N-1} (1+r^2)^{-s/2} dr
    ang = math.pi ** ((n - 1) / 2) * gamma((a + 1) / 2) / gamma((n + a) / 2)
    rad = 0.5 * beta((n + a) / 2, (s - n - a) / 2)
    assert integrate_halfspace(rule, g, decay_hint=s).value == pytest.approx(ang * rad, rel=1e-9)
    with pytest.raises(NonIntegrableError):
        integrate_halfspace(rule, g, decay_hint=n + a)


def test_non_finite_integrand_is_located():
    rule = HalfSpaceRule(n=2, a=0.0)
    with pytest.raises(NonFiniteIntegrandError, match="t="):
        integrate_halfspace(rule, lambda t, x: np.full(t.shape, np.nan))


def test_monte_carlo_within_error_and_seeded():
    rule = HalfSpaceRule(n=3, a=0.5, scheme="monte_carlo", node_budget=40_000, seed=5)
    g = lambda t, x: np.exp(-t * t - np.einsum("ij,ij->i", x, x))
    want = gamma(0.75) / 2 * math.pi
    r1 = integrate_halfspace(rule, g, decay_hint=math.inf)
    r2 = integrate_halfspace(rule, g, decay_hint=math.inf)
    assert r1.value == r2.value
    assert abs(r1.value - want) < r1.err_estimate


def test_thread_count_does_not_change_results(monkeypatch):
    rule = HalfSpaceRule(n=3, a=1.0, rho_nodes=60, w_nodes=30, angle_nodes=40)
    g = lambda t, x: np.exp(-t - np.abs(x[:, 0]) - x[:, 1] ** 2)
    monkeypatch.setenv("AFFSOB_THREADS", "1")
    one = integrate_halfspace(rule, g, decay_hint=math.inf)
    monkeypatch.setenv("AFFSOB_THREADS", "4")
    four = integrate_halfspace(rule, g, decay_hint=math.inf)
    assert one.value == four.value and one.err_estimate == four.err_estimate


@given(st.lists(st.floats(min_value=-1e12, max_value=1e12), min_size=1, max_size=300),
       st.randoms(use_true_random=False))
def test_fsum_chunks_is_order_independent(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert fsum_chunks(np.array(xs)) == fsum_chunks(np.array(ys)) == math.fsum(xs)


@pytest.mark.parametrize("n,a", [(2, 0.0), (3, 1.0), (4, 0.5)])
def test_hemisphere_rule_weighted_area(n, a):
    nodes, w = hemisphere_rule(n, a, 30)
    # int over the upper half of S^{n-1} of w_t^a
    want = math.pi ** ((n - 1) / 2) * gamma((a + 1) / 2) / gamma((n + a) / 2)
    assert float(np.sum(w)) == pytest.approx(want, rel=1e-10)
    assert np.all(nodes[:, 0] >= 0)
