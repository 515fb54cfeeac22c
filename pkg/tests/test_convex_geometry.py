import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad

from affsob.convex_geometry import (
    inertia_matrix,
    isotropic_image,
    Ball,
    Ellipsoid,
    GaugeBody,
    Interval,
    LqBall,
    Polygon,
    PowerNorm,
    SeparableSum,
    TabulatedBody,
    body_from_C,
    body_from_spec,
    bp_check,
    legendre_transform,
    random_symmetric_polygon,
)

SQUARE = [[1, 1], [-1, 1], [-1, -1], [1, -1]]


def unit_rows(rng, k, d):
    U = rng.standard_normal((k, d))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def random_matrix(rng, d):
    return rng.standard_normal((d, d)) + 2 * np.eye(d)


@pytest.mark.parametrize("d", [2, 3])
def test_numeric_support_matches_ellipsoid(d):
    rng = np.random.default_rng(1)
    M = random_matrix(rng, d)
    E = Ellipsoid(M)
    G = GaugeBody(d, lambda Y: np.linalg.norm(Y @ M.T, axis=1))
    U = unit_rows(rng, 15, d)
    assert np.allclose(G.support(U), E.support(U), rtol=1e-9)
    assert np.allclose(G.polar().gauge(U), E.polar().gauge(U), rtol=1e-9)


def test_polar_of_polygon_and_bipolar():
    rng = np.random.default_rng(2)
    K = random_symmetric_polygon(rng)
    U = unit_rows(rng, 30, 2)
    assert np.allclose(K.polar().polar().gauge(U), K.gauge(U), rtol=1e-12)
    assert np.allclose(K.polar().gauge(U), K.support(U), rtol=1e-12)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.5])
def test_polygon_moment_against_direct_integral(p):
    K = Polygon([[2, 0], [0.5, 1], [-2, 0], [-0.5, -1]])
    y = np.array([0.3, 1.1])
    # integrate |<y, z>|^p over K with scipy, row by row in z_2
    def bounds(z2):
        xs = []
        V = K.vertices
        for i in range(len(V)):
            a, b = V[i], V[(i + 1) % len(V)]
            if (a[1] - z2) * (b[1] - z2) <= 0 and a[1] != b[1]:
                xs.append(a[0] + (z2 - a[1]) * (b[0] - a[0]) / (b[1] - a[1]))
        return min(xs), max(xs)

    want, _ = dblquad(lambda z1, z2: abs(y[0] * z1 + y[1] * z2) ** p, -1, 1,
                      lambda z2: bounds(z2)[0], lambda z2: bounds(z2)[1], epsabs=1e-12, epsrel=1e-12)
    assert K.moment(y, p) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_polygon_moment_matches_generic_route(p):
    rng = np.random.default_rng(3)
    K = random_symmetric_polygon(rng, 5)
    G = GaugeBody(2, K._gauge)
    U = unit_rows(rng, 6, 2)
    # corners make the generic rule converge only algebraically
    assert np.allclose(K.moment(U, p), G.moment(U, p, resolution=400), rtol=5e-4)


def test_volumes():
    assert Polygon(SQUARE).volume() == pytest.approx(4.0)
    assert LqBall(2, 1.0).volume() == pytest.approx(2.0)
    assert LqBall(3, math.inf, 0.5).volume() == pytest.approx(1.0)
    for q in (1.5, 4.0):
        L = LqBall(2, q)
        assert GaugeBody(2, L._gauge).volume() == pytest.approx(L.volume(), rel=1e-6)
    assert GaugeBody(3, Ball(3)._gauge).volume() == pytest.approx(4 * math.pi / 3, rel=1e-10)
    assert Interval(-0.5, 2.0).volume() == 2.5


def test_linear_image_scales_volume():
    rng = np.random.default_rng(4)
    A = random_matrix(rng, 2)
    K = random_symmetric_polygon(rng)
    assert K.linear_image(A).volume() == pytest.approx(abs(np.linalg.det(A)) * K.volume(), rel=1e-12)
    E = Ellipsoid(random_matrix(rng, 3))
    assert E.linear_image(A[:1, :1] * np.eye(3)).volume() == pytest.approx(abs(A[0, 0]) ** 3 * E.volume())


def test_square_centroid_body():
    r = bp_check(Polygon(SQUARE), 2)
    assert r["vol_GpK"] == pytest.approx(4 * math.pi / 3, rel=1e-9)
    assert r["ratio"] == pytest.approx(math.pi / 3, rel=1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_thin_parallelogram_matches_the_square(p):
    # a sliver that is a linear image of the square: the ratio is affine invariant
    A = np.array([[0.82, 0.1], [0.73, 0.0897]])
    sliver = Polygon(SQUARE).linear_image(A)
    assert sliver.volume() < 0.01
    want = bp_check(Polygon(SQUARE), p)["ratio"]
    assert bp_check(sliver, p)["ratio"] == pytest.approx(want, rel=1e-9)
    assert bp_check(sliver, p)["vol_K"] == pytest.approx(4 * abs(np.linalg.det(A)), rel=1e-12)


def test_isotropic_image_of_a_thin_ellipse_is_round():
    E = Ellipsoid([[40.0, 3.0], [0.0, 0.5]])
    K, A = isotropic_image(E)
    w = np.linalg.eigvalsh(inertia_matrix(K))
    assert w.max() / w.min() < 1.001
    assert bp_check(E, 1.5)["ratio"] == pytest.approx(1.0, abs=1e-9)


@given(st.integers(min_value=0, max_value=10_000), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_centroid_inequality_on_random_polygons(key, p):
    K = random_symmetric_polygon(np.random.default_rng(key))
    assert bp_check(K, p)["ratio"] >= 1 - 1e-9


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_centroid_body_is_affine_covariant(p):
    rng = np.random.default_rng(5)
    K = random_symmetric_polygon(rng)
    A = random_matrix(rng, 2)
    U = unit_rows(rng, 10, 2)
    # Gamma_p(A K) = A Gamma_p K, i.e. h(y) = h_{Gamma_p K}(A^T y)
    lhs = K.linear_image(A).centroid_body(p).support(U)
    rhs = K.centroid_body(p).support(U @ A)
    assert np.allclose(lhs, rhs, rtol=1e-10)


def test_tabulated_planar_body_moments_are_exact_on_ellipses():
    rng = np.random.default_rng(6)
    M = random_matrix(rng, 2)
    E = Ellipsoid(M)
    th = 2 * math.pi * np.arange(256) / 256
    D = np.column_stack([np.cos(th), np.sin(th)])
    T = TabulatedBody(2, D, E.radial(D))
    U = unit_rows(rng, 8, 2)
    for p in (1.0, 1.5, 2.0, 4.0):
        assert np.allclose(T.moment(U, p), E.moment(U, p), rtol=1e-11)
    assert T.volume() == pytest.approx(E.volume(), rel=1e-12)


@pytest.mark.parametrize("d,q", [(2, 1.5), (2, 3.0), (3, 2.0), (3, 4.0)])
def test_numeric_legendre_of_power_norm(d, q):
    rng = np.random.default_rng(7)
    M = random_matrix(rng, d)
    C = PowerNorm(d, q, 0.7, M)
    Y = rng.standard_normal((25, d))
    assert np.allclose(legendre_transform(C, numeric=True)(Y), legendre_transform(C)(Y), rtol=1e-8)


@given(st.integers(min_value=0, max_value=10_000))
def test_fenchel_young(key):
    rng = np.random.default_rng(key)
    C = SeparableSum(0.8, PowerNorm(2, 3.0, 1.3, random_matrix(rng, 2)))
    Cs = legendre_transform(C)
    Y, Z = rng.standard_normal((20, 3)), rng.standard_normal((20, 3))
    assert np.all(np.einsum("ij,ij->i", Y, Z) <= C(Z) + Cs(Y) + 1e-12)


def test_separable_closed_conjugate_matches_numeric():
    rng = np.random.default_rng(8)
    C = SeparableSum(0.5, PowerNorm(2, 2.5, 1.0, random_matrix(rng, 2)))
    Y = rng.standard_normal((15, 3))
    assert np.allclose(legendre_transform(C)(Y), legendre_transform(C, numeric=True)(Y), rtol=1e-7)


def test_power_norm_gradient_by_finite_differences():
    rng = np.random.default_rng(9)
    C = PowerNorm(3, 2.5, 0.9, random_matrix(rng, 3), r=3.0)
    y = rng.standard_normal(3)
    h = 1e-6
    fd = [(C(y + h * e) - C(y - h * e)) / (2 * h) for e in np.eye(3)]
    assert np.allclose(C.grad(y[None])[0], fd, rtol=1e-7)


def test_body_from_C_gauge():
    C = PowerNorm(2, 3.0, 2.0, np.diag([1.0, 3.0]))
    K = body_from_C(C)
    U = unit_rows(np.random.default_rng(10), 10, 2)
    assert np.allclose(K.gauge(U), C(U) ** (1 / 3))


def test_body_specs_and_errors():
    assert isinstance(body_from_spec({"type": "polygon", "vertices": SQUARE}), Polygon)
    assert body_from_spec({"type": "lq_ball", "q": 3.0, "dim": 2}).volume() > 0
    assert body_from_spec({"type": "ellipsoid", "matrix": [[2, 0], [0, 1]]}).volume() == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        body_from_spec({"type": "cube"})
    with pytest.raises(ValueError):
        Polygon([[1, 1], [2, 1], [1, 2]])  # origin outside
    with pytest.raises(ValueError):
        Ellipsoid([[1, 2], [2, 4]])
    with pytest.raises(ValueError):
        PowerNorm(2, 1.0)
