import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from affsob.convex_geometry import unit_ball_moment
from affsob.scalar_kernel import (
    Params,
    a_np,
    ball_volume,
    c_np,
    log_gamma,
    sphere_area,
    weighted_halfball_volume,
)

LOG_GAMMA_TOL = 1e-13


@given(st.floats(min_value=1e-3, max_value=60.0))
def test_log_gamma_matches_math_lgamma(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=LOG_GAMMA_TOL, abs=LOG_GAMMA_TOL)


@given(st.floats(min_value=0.05, max_value=40.0))
def test_log_gamma_recursion(x):
    assert log_gamma(x + 1) == pytest.approx(math.log(x) + log_gamma(x), abs=1e-12)


def test_log_gamma_vectorised_and_rejects_nonpositive():
    x = np.array([0.5, 1.0, 7.25])
    assert np.allclose(log_gamma(x), [math.lgamma(v) for v in x], rtol=0, atol=1e-14)
    for bad in (0.0, -1.5):
        with pytest.raises(ValueError):
            log_gamma(bad)


def test_ball_volumes_and_sphere_areas():
    assert ball_volume(0) == pytest.approx(1.0)
    assert ball_volume(1) == pytest.approx(2.0)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_area(0) == 2.0
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)


@given(st.floats(min_value=2.0, max_value=30.0))
def test_ball_volume_dimension_recursion(k):
    assert ball_volume(k) == pytest.approx(2 * math.pi / k * ball_volume(k - 2), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_a_np_normalises_centroid_of_ball(d, p):
    # int_B |z_1|^p dz by slices, independent of the Beta form
    rho = ball_volume(d - 1)
    m, _ = quad(lambda s: abs(s) ** p * rho * (1 - s * s) ** ((d - 1) / 2), -1, 1, epsabs=1e-14)
    assert m / (a_np(d, p) * ball_volume(d)) == pytest.approx(1.0, rel=1e-10)
    assert unit_ball_moment(d, p) == pytest.approx(m, rel=1e-10)


def test_c_np_rejects_small_arguments():
    # its value is exercised through the radial-function identity in test_functionals
    with pytest.raises(ValueError):
        c_np(0.5, 2.0)
    with pytest.raises(ValueError):
        c_np(3, 0.5)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 2.0])
def test_halfball_closed_form_against_slices(n, a):
    rho = ball_volume(n - 1)
    v, _ = quad(lambda t: t**a * rho * (1 - t * t) ** ((n - 1) / 2), 0, 1, epsabs=1e-14)
    assert weighted_halfball_volume(n, a) == pytest.approx(v, rel=1e-10)


def test_halfball_monte_carlo_and_printed_variant():
    v = weighted_halfball_volume(3, 1.0)
    mc, se = weighted_halfball_volume(3, 1.0, "quadrature", samples=400_000)
    assert abs(mc - v) < 5 * se
    ratio = weighted_halfball_volume(3, 1.0, "printed") / v
    assert ratio == pytest.approx(math.pi ** -1.0, rel=1e-13)
    with pytest.raises(ValueError):
        weighted_halfball_volume(3, 1.0, "nope")


def test_params_validation():
    P = Params(3, 2.0, 1.0)
    assert P.N == 4 and P.q == 2.0 and P.p_star == pytest.approx(4.0)
    assert Params(3, 1.0).q == math.inf
    assert P.with_(alpha=1.5).alpha == 1.5
    for bad in (dict(n=1, p=2.0), dict(n=3, p=0.5), dict(n=3, p=2.0, a=-1.0),
                dict(n=3, p=2.0, alpha=1.0), dict(n=3, p=2.0, alpha=5.0)):
        with pytest.raises(ValueError):
            Params(**bad)
    with pytest.raises(ValueError):
        Params(2, 3.0).p_star
    with pytest.raises(ValueError):
        Params(3, 2.0, 0.0, 0.5).require_alpha("a")
