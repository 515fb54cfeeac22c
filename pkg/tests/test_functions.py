import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from affsob.convex_geometry import PowerNorm, SeparableSum
from affsob.functions import (
    FamilyError,
    affine_pullback,
    entropy_extremal,
    function_from_spec,
    gaussian,
    gn_extremal,
    indicator_smoothed,
    nguyen_h_alpha,
    nguyen_h_pa,
    quartic,
    smooth_step,
    sobolev_extremal,
)

FD_STEP = 1e-6
FD_TOL = 1e-6


def frame(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n - 1, n - 1)) + 1.5 * np.eye(n - 1)
    return 1.3, B, rng.uniform(-0.5, 0.5, n - 1)


def families(n):
    lam, B, x0 = frame(n, n)
    C = SeparableSum(0.6, PowerNorm(n - 1, 2.0, 1.2, B))
    return {
        "sobolev": sobolev_extremal(n, 1.7, 0.5, lam, B, x0),
        "gn_a": gn_extremal(n, 2.0, 1.0, 1.5, lam, B, x0),
        "gn_b": gn_extremal(n, 2.0, 1.0, 0.5, lam, B, x0),
        "entropy": entropy_extremal(n, 2.5, 0.0, lam, B, x0),
        "gaussian": gaussian(n, lam, B, x0, c=0.7),
        "quartic": quartic(n, lam, B, x0),
        "h_pa": nguyen_h_pa(n, 2.0, 1.0, C),
        "h_alpha": nguyen_h_alpha(n, 2.0, 1.0, 0.5, C),
        "indicator": indicator_smoothed(n, 0.3, "cylinder", lam, B, x0),
        "indicator_ball": indicator_smoothed(n, 0.3, "ball", lam, B, x0),
    }


def sample_points(n, seed, k=12):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.05, 1.2, k), rng.uniform(-1.0, 1.0, (k, n - 1))


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("name", sorted(families(3)))
def test_gradients_match_finite_differences(n, name):
    f = families(n)[name]
    t, x = sample_points(n, 100 + n)
    _, ft, fx = f.evaluate(t, x)
    h = FD_STEP
    fd_t = (f(t + h, x) - f(t - h, x)) / (2 * h)
    assert np.allclose(ft, fd_t, rtol=FD_TOL, atol=FD_TOL)
    for j in range(n - 1):
        e = np.zeros(n - 1)
        e[j] = h
        fd = (f(t, x + e) - f(t, x - e)) / (2 * h)
        assert np.allclose(fx[:, j], fd, rtol=FD_TOL, atol=FD_TOL)


@given(st.floats(min_value=-0.5, max_value=1.5))
def test_smooth_step_is_monotone_between_0_and_1(z):
    v, d = smooth_step(np.array([z, z + 1e-3]))
    assert 0.0 <= v[0] <= v[1] <= 1.0
    assert np.all(d >= 0)


@pytest.mark.parametrize("name", ["sobolev", "gn_a", "entropy", "gaussian", "quartic", "indicator"])
def test_spec_round_trip(name):
    f = families(3)[name]
    g = function_from_spec(f.spec())
    assert g.digest() == f.digest()
    t, x = sample_points(3, 7)
    assert np.array_equal(f(t, x), g(t, x))


def test_nguyen_spec_with_convex_function():
    spec = {"family": "nguyen_h_pa", "n": 3, "p": 2.0, "a": 1.0,
            "C": {"type": "separable", "degree": 2.0, "coef": 0.5, "rest": {"type": "power_norm"}}}
    f = function_from_spec(spec)
    assert f.n == 3 and f.family == "nguyen_h_pa"


def test_pullback_composes_frames():
    f = families(3)["quartic"]
    lam, B = 0.7, np.array([[1.0, 0.4], [-0.3, 1.2]])
    g = affine_pullback(f, lam, B)
    t, x = sample_points(3, 9)
    assert np.allclose(g(t, x), f(lam * t, x @ B.T), rtol=1e-13)
    _, gt, gx = g.evaluate(t, x)
    _, ft, fx = f.evaluate(lam * t, x @ B.T)
    assert np.allclose(gt, lam * ft) and np.allclose(gx, fx @ B)


def test_scaling_and_translation():
    f = gaussian(3)
    t, x = sample_points(3, 11)
    assert np.allclose(f.scaled(2.5)(t, x), 2.5 * f(t, x))
    s = np.array([0.3, -0.2])
    assert np.allclose(f.translated(s)(t, x + s), f(t, x))


def test_spec_errors_name_the_problem():
    with pytest.raises(FamilyError, match="family"):
        function_from_spec({"n": 3})
    with pytest.raises(FamilyError, match="unknown family"):
        function_from_spec({"family": "lorentzian", "n": 3})
    with pytest.raises(FamilyError, match="'p'"):
        function_from_spec({"family": "sobolev_extremal", "n": 3})
    with pytest.raises(FamilyError):
        indicator_smoothed(3, 1.5)
    with pytest.raises(FamilyError):
        affine_pullback(gaussian(3), -1.0, np.eye(2))
    with pytest.raises(FamilyError):
        affine_pullback(gaussian(3), 1.0, np.zeros((2, 2)))
