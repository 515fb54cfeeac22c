import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.special import gamma

from affsob import sharp_constants as sc
from affsob.scalar_kernel import Params

REL = 1e-10


def talenti_whole_space(n, p):
    """Classical sharp Sobolev constant on R^n (unweighted)."""
    return (math.pi ** -0.5 * n ** (-1 / p) * ((p - 1) / (n - p)) ** (1 - 1 / p)
            * (gamma(1 + n / 2) * gamma(n) / (gamma(n / p) * gamma(1 + n - n / p))) ** (1 / n))


@pytest.mark.parametrize("n,p", [(3, 2.0), (3, 1.5), (4, 3.0), (5, 2.5), (6, 1.2)])
def test_crs_at_zero_weight_is_reflected_talenti(n, p):
    # even reflection across t = 0 halves both integrals
    assert sc.crs_constant(n, p, 0.0) == pytest.approx(2 ** (1 / n) * talenti_whole_space(n, p), rel=REL)


@pytest.mark.parametrize("n,a", [(3, 0.0), (3, 1.0), (2, 0.5), (4, 2.0)])
def test_crs_at_p2_matches_bgl(n, a):
    assert sc.crs_constant(n, 2.0, a) == pytest.approx(sc.bgl_constant(n, a), rel=REL)


params_st = st.tuples(
    st.sampled_from([2, 3, 4]),
    st.floats(min_value=1.1, max_value=3.5),
    st.sampled_from([0.0, 0.5, 1.0, 2.0]),
)


@given(params_st)
def test_every_affine_constant_has_matching_forms(npa):
    n, p, a = npa
    assume(p < n + a - 0.05)
    P = Params(n, p, a)
    for name in ("R_cal", "S_cal", "K_cal", "L_cal"):
        cv = sc.affine_constant(name, P)
        assert not cv.flagged, cv
        assert cv.value > 0


def _dilation_balance(n, p, a, al, theta, case):
    # exponent of lambda on each side under f -> f(lambda .)
    N = n + a
    big, small = al * p, al * (p - 1) + 1
    energy = 1 - N / p
    if case == "a":
        return -N / big - (theta * energy - (1 - theta) * N / small)
    return -N / small - (theta * energy - (1 - theta) * N / big)


@given(params_st, st.floats(min_value=0.05, max_value=0.95))
def test_gn_theta_balances_dilations_case_b(npa, al):
    n, p, a = npa
    assume(p < n + a - 0.05)
    ex = sc.gn_exponents(Params(n, p, a, al))
    assert ex.case == "b"
    assert abs(_dilation_balance(n, p, a, al, ex.theta, "b")) < 1e-12


@given(params_st, st.floats(min_value=1.05, max_value=6.0))
def test_gn_theta_balances_dilations_case_a(npa, al):
    n, p, a = npa
    P = Params(n, p, a)
    assume(p < n + a - 0.05 and al < P.alpha_max - 1e-6)
    ex = sc.gn_exponents(P.with_(alpha=al))
    assert ex.case == "a" and 0 < ex.theta < 1
    assert abs(_dilation_balance(n, p, a, al, ex.theta, "a")) < 1e-12


def test_printed_theta_breaks_balance_only_with_weight():
    for a, broken in ((0.0, False), (1.0, True)):
        th = sc.gn_exponents(Params(3, 2.0, a, 0.5), theta_form="printed").theta
        gap = abs(_dilation_balance(3, 2.0, a, 0.5, th, "b"))
        assert (gap > 1e-3) is broken


def test_gn_endpoint_and_alpha_one_rejected():
    P = Params(3, 1.5, 0.0)
    assert P.alpha_max == pytest.approx(2.0)
    with pytest.raises(ValueError):
        sc.gn_exponents(P.with_(alpha=2.0))  # theta = 1
    with pytest.raises(ValueError):
        Params(3, 2.0, 0.0, 1.0)


def test_conventions_differ_by_normalisation():
    P = Params(3, 2.0, 0.0, 2.0)
    th = sc.gn_exponents(P).theta
    sharp = sc.nguyen_gn_constant(P)
    printed = sc.nguyen_gn_constant(P, convention="printed")
    assert sharp / printed == pytest.approx((2 ** 0.5 * 2 ** 0.5) ** th, rel=1e-12)
    with pytest.raises(ValueError):
        sc.affine_constant("S_cal", Params(3, 2.0), convention="bogus")


@pytest.mark.parametrize("n,a", [(2, 0.0), (3, 0.0), (3, 1.0), (4, 2.0)])
def test_p1_limits(n, a):
    s = sc.limit_p_to_1("S_cal", n, a)
    assert s.converged
    assert s.value == pytest.approx(sc.sobolev_constant_p1(n, a), rel=1e-5)
    for name, al in (("G_cal", 2.0), ("N_cal", 0.5)):
        g = sc.limit_p_to_1(name, n, a, al)
        assert g.converged and g.value == pytest.approx(s.value, rel=1e-3)
    cv = sc.affine_constant("S_cal", Params(n, 1.0, a))
    assert cv.marker == "limit" and not cv.flagged


def test_limit_argument_checks():
    with pytest.raises(ValueError):
        sc.limit_p_to_1("G_cal", 3, 0.0, 0.5)
    with pytest.raises(ValueError):
        sc.limit_p_to_1("N_cal", 3, 0.0, 2.0)
    with pytest.raises(ValueError):
        sc.limit_p_to_1("X_cal", 3, 0.0)


def test_constant_record_serialises():
    d = sc.affine_constant("K_cal", Params(3, 2.0, 1.0)).to_dict()
    assert d["name"] == "K_cal" and d["params"]["n"] == 3
    assert d["rel_gap"] < REL and d["flagged"] is False
