import math

import numpy as np
import pytest
from scipy.special import gamma

from affsob.functionals import (
    Analysis,
    Budget,
    Estimate,
    NormalizationError,
    E_p,
    dt_norm,
    full_spatial_norm,
    weighted_norm,
)
from affsob.functions import gaussian, quartic, sobolev_extremal


def gaussian_moment(n, a, r):
    """int t^a exp(-r t^2 - r |x|^2) over the half-space."""
    return gamma((a + 1) / 2) / 2 * r ** (-(a + 1) / 2) * (math.pi / r) ** ((n - 1) / 2)


@pytest.mark.parametrize("n,a,r", [(2, 0.0, 2.0), (3, 1.0, 3.0), (4, 0.5, 1.5)])
def test_gaussian_norm_closed_form(n, a, r):
    want = gaussian_moment(n, a, r) ** (1 / r)
    got = weighted_norm(gaussian(n), r, a)
    assert got == pytest.approx(want, rel=1e-10)
    # the attached error estimate must cover the true error
    assert abs(got - want) <= got.err


def test_gaussian_dt_norm_closed_form():
    # |d_t f|^2 = 4 t^2 exp(-2 t^2 - 2|x|^2) with weight t^a
    n, a = 3, 1.0
    want = (4 * gaussian_moment(n, a + 2, 2.0) / 1.0) ** 0.5
    assert dt_norm(gaussian(n), 2.0, a) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("n,p,a", [(3, 2.0, 1.0), (3, 1.5, 0.0), (4, 2.5, 0.5)])
def test_affine_energy_equals_euclidean_norm_for_radial_functions(n, p, a):
    f = gaussian(n)
    assert E_p(f, p, a) == pytest.approx(full_spatial_norm(f, p, a), rel=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_affine_energy_never_exceeds_euclidean_norm(n):
    B = np.diag([1.0, 3.0])[: n - 1, : n - 1] + (0.8 if n == 3 else 0.0) * np.eye(n - 1)[::-1]
    f = quartic(n, 1.0, B)
    e, g = E_p(f, 1.5, 0.0), full_spatial_norm(f, 1.5, 0.0)
    if n == 2:
        assert e == pytest.approx(g, rel=1e-12)
    else:
        assert e < g * (1 - 1e-3)


@pytest.mark.parametrize("f,p,a", [
    (sobolev_extremal(3, 2.0, 1.0, 1.2, [[1.0, 0.3], [0.0, 0.7]]), 2.0, 1.0),
    (quartic(3, 0.8, [[1.0, 0.5], [0.2, 1.1]]), 1.5, 0.0),
])
def test_L_body_volume_identity(f, p, a):
    A = Analysis(f, p, a)
    n = f.n
    assert (n - 1) * A.L_body.volume() * float(A.Z_p) ** (n - 1) == pytest.approx(1.0, abs=1e-8)


def test_weighted_volume_routes_agree():
    A = Analysis(quartic(3, 1.1, [[1.0, 0.5], [0.2, 1.1]]), 1.5, 0.0)
    assert A.weighted_volume_slices == pytest.approx(A.weighted_volume_direct, rel=1e-6)


def test_scaled_analysis_is_homogeneous():
    A = Analysis(quartic(3), 2.0, 1.0)
    B = A.scaled(3.0)
    assert B.norm(2.0) == pytest.approx(3 * A.norm(2.0), rel=1e-13)
    assert B.E_p == pytest.approx(3 * A.E_p, rel=1e-13)
    assert B.dt_norm == pytest.approx(3 * A.dt_norm, rel=1e-13)


def test_entropy_requires_unit_norm():
    A = Analysis(gaussian(3), 2.0, 0.0)
    with pytest.raises(NormalizationError):
        A.entropy()
    u = A.scaled(1 / float(A.norm(2.0)))
    # Gaussian with unit norm: int f^2 log f^2 = -int f^2 (2 t^2 + 2|x|^2)
    n, a = 3, 0.0
    c2 = 1 / gaussian_moment(n, a, 2.0)
    m = gaussian_moment(n, a + 2, 2.0) + (n - 1) * gaussian_moment(n, a, 2.0) / 4
    want = math.log(c2) - 2 * c2 * m
    assert float(u.entropy()) == pytest.approx(want, rel=1e-10)


def test_estimate_propagates_errors():
    e = Estimate(2.0, 0.1)
    assert float(e) == 2.0 and e.err == 0.1
    from affsob.quadrature import QuadResult
    s = Estimate.of_power(QuadResult(4.0, 0.4), 0.5)
    assert float(s) == 2.0 and s.err == pytest.approx(0.1)


def test_budget_scaling_and_direction_counts():
    b = Budget()
    assert b.direction_count(2) == 1 and b.direction_count(3) == 256
    assert b.scaled(2.0).rho_nodes == 2 * b.rho_nodes
    assert hash(b) == hash(Budget())
