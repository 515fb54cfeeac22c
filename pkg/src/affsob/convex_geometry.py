"""Origin-containing convex bodies, centroid bodies and Legendre transforms.

Every body answers ``gauge``, ``radial``, ``support``, ``volume`` and
``moment`` (the integral of ``|<y, z>|^p`` over the body). Query arrays have
shape ``(k, d)`` or ``(d,)``; results have shape ``(k,)`` or are scalars.

Exact representations (ellipsoids, polygons, intervals, l^q balls) are kept
whenever an operation preserves them. Everything else goes through the
generic routine :func:`polar_max`, which computes
``max_{|v| = 1} <y, v> / g(v)`` for a positive 1-homogeneous ``g`` by a
sphere-grid search followed by a vectorised pattern search.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import betaln, gammaln, rgamma, sph_harm_y

from .quadrature import polar_template, sphere_rule
from .scalar_kernel import a_np, ball_volume, log_ball_volume, log_gamma

__all__ = [
    "ConvexBody",
    "Ellipsoid",
    "Ball",
    "Polygon",
    "Interval",
    "LqBall",
    "GaugeBody",
    "SupportBody",
    "TabulatedBody",
    "HomogeneousConvexFn",
    "PowerNorm",
    "SeparableSum",
    "NumericFn",
    "LegendreConvergenceError",
    "polar_max",
    "support",
    "gauge",
    "radial",
    "polar",
    "volume",
    "centroid_body",
    "bp_check",
    "inertia_matrix",
    "isotropic_image",
    "legendre_transform",
    "body_from_C",
    "body_from_spec",
    "random_symmetric_polygon",
    "unit_ball_moment",
]


class LegendreConvergenceError(RuntimeError):
    """The spherical maximisation did not reach its step tolerance."""


def _as_rows(y, d):
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != d:
        raise ValueError(f"expected vectors of dimension {d}, got {y.shape[1]}")
    return y, single


def _out(v, single):
    return float(v[0]) if single else v


def _unit(y):
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


# ------------------------------------------------------------------ polar max

_GRID_CACHE: dict = {}


def _search_grid(d):
    if d not in _GRID_CACHE:
        if d == 2:
            th = np.linspace(0.0, 2 * math.pi, 1440, endpoint=False)
            g = np.column_stack([np.cos(th), np.sin(th)])
        elif d == 3:
            k = 6000
            i = np.arange(k) + 0.5
            z = 1 - 2 * i / k
            ph = math.pi * (1 + 5**0.5) * i
            s = np.sqrt(1 - z * z)
            g = np.column_stack([s * np.cos(ph), s * np.sin(ph), z])
        else:
            g = sphere_rule(d - 1, 4000).nodes
        _GRID_CACHE[d] = g
    return _GRID_CACHE[d]


def _tangent_basis(v):
    # two orthonormal tangent vectors at each row of v (d = 3)
    helper = np.where(np.abs(v[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = np.cross(v, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(v, e1)
    return e1, e2


def polar_max(fn: Callable[[np.ndarray], np.ndarray], Y: np.ndarray, d: int,
              step_tol: float = 1e-10, max_iter: int = 400, return_argmax: bool = False):
    """``max_{v in S^{d-1}} <y, v> / fn(v)`` for each row ``y`` of ``Y``.

    ``fn`` takes a (m, d) array of unit vectors. This single routine gives the
    support function from a gauge, the gauge from a support function, and the
    Legendre transform of a homogeneous function.
    """
    Y = np.atleast_2d(np.asarray(Y, float))
    k = Y.shape[0]
    if d == 1:
        vals = np.column_stack([Y[:, 0] / fn(np.array([[1.0]]))[0], -Y[:, 0] / fn(np.array([[-1.0]]))[0]])
        j = np.argmax(vals, axis=1)
        best = vals[np.arange(k), j]
        return (best, np.where(j == 0, 1.0, -1.0)[:, None]) if return_argmax else best
    G = _search_grid(d)
    fg = np.asarray(fn(G), float)
    if np.any(~(fg > 0)):
        raise ValueError("function must be positive on the sphere")
    idx = np.empty(k, dtype=int)
    for lo in range(0, k, 2048):
        sc = (Y[lo:lo + 2048] @ G.T) / fg
        idx[lo:lo + 2048] = np.argmax(sc, axis=1)
    V = G[idx].copy()
    best = np.einsum("ij,ij->i", Y, V) / fg[idx]
    if d == 2:
        phi = np.arctan2(V[:, 1], V[:, 0])
        step = np.full(k, 2 * math.pi / G.shape[0])
        for _ in range(max_iter):
            active = step > step_tol
            if not active.any():
                break
            ia = np.flatnonzero(active)
            cand = np.concatenate([phi[ia] + step[ia], phi[ia] - step[ia]])
            U = np.column_stack([np.cos(cand), np.sin(cand)])
            vals = np.einsum("ij,ij->i", np.concatenate([Y[ia], Y[ia]]), U) / fn(U)
            vp, vm = vals[: ia.size], vals[ia.size:]
            up = (vp > best[ia]) & (vp >= vm)
            um = (vm > best[ia]) & ~up
            phi[ia[up]] += step[ia[up]]
            best[ia[up]] = vp[up]
            phi[ia[um]] -= step[ia[um]]
            best[ia[um]] = vm[um]
            stay = ~(up | um)
            step[ia[stay]] *= 0.5
        V = np.column_stack([np.cos(phi), np.sin(phi)])
    elif d == 3:
        step = np.full(k, 2.0 * math.sqrt(4 * math.pi / G.shape[0]))
        for _ in range(max_iter):
            active = step > step_tol
            if not active.any():
                break
            ia = np.flatnonzero(active)
            e1, e2 = _tangent_basis(V[ia])
            h = step[ia, None]
            cands = [V[ia] + h * e1, V[ia] - h * e1, V[ia] + h * e2, V[ia] - h * e2]
            U = _unit(np.concatenate(cands))
            vals = (np.einsum("ij,ij->i", np.tile(Y[ia], (4, 1)), U) / fn(U)).reshape(4, ia.size)
            j = np.argmax(vals, axis=0)
            vbest = vals[j, np.arange(ia.size)]
            imp = vbest > best[ia]
            Ub = U.reshape(4, ia.size, 3)[j, np.arange(ia.size)]
            V[ia[imp]] = Ub[imp]
            best[ia[imp]] = vbest[imp]
            step[ia[~imp]] *= 0.5
    else:
        step = np.zeros(k)
    if np.any(step > step_tol):
        raise LegendreConvergenceError("spherical maximisation did not converge")
    return (best, V) if return_argmax else best


# ------------------------------------------------------------------- bodies


def unit_ball_moment(d: int, p: float) -> float:
    """Integral of |z_1|^p over the unit ball of R^d."""
    return math.exp(log_ball_volume(d - 1) + betaln(0.5 * (p + 1), 0.5 * (d + 1)))


class ConvexBody:
    """Base class; subclasses supply at least one of gauge or support."""

    dim: int
    symmetric: bool = True

    # subclasses override the vectorised kernels below
    def _gauge(self, Y):
        return polar_max(self._support_unit, Y, self.dim)

    def _support(self, Y):
        return polar_max(self._gauge_unit, Y, self.dim)

    def _gauge_unit(self, U):
        return self._gauge(U)

    def _support_unit(self, U):
        return self._support(U)

    def gauge(self, y):
        Y, single = _as_rows(y, self.dim)
        return _out(self._gauge(Y), single)

    def radial(self, y):
        Y, single = _as_rows(y, self.dim)
        return _out(1.0 / self._gauge(Y), single)

    def support(self, y):
        Y, single = _as_rows(y, self.dim)
        return _out(self._support(Y), single)

    def volume(self, resolution: Optional[int] = None) -> float:
        d = self.dim
        if d == 1:
            r = self._gauge(np.array([[1.0], [-1.0]]))
            return float(1 / r[0] + 1 / r[1])
        if d == 2:
            m = resolution or 4096
            th = 2 * math.pi * np.arange(m) / m
            U = np.column_stack([np.cos(th), np.sin(th)])
            r = 1.0 / self._gauge(U)
            return math.fsum(r * r) * math.pi / m
        rule = sphere_rule(d - 1, resolution or 48)
        r = 1.0 / self._gauge(rule.nodes)
        return math.fsum(rule.weights * r**d) / d

    def moment(self, y, p: float, resolution: Optional[int] = None):
        """Integral over the body of |<y, z>|^p dz."""
        Y, single = _as_rows(y, self.dim)
        return _out(self._moment(Y, p, resolution), single)

    def _moment(self, Y, p, resolution=None):
        d = self.dim
        norms = np.linalg.norm(Y, axis=1)
        out = np.empty(Y.shape[0])
        if d == 1:
            r = 1.0 / self._gauge(np.array([[1.0], [-1.0]]))
            return norms**p * (r[0] ** (p + 1) + r[1] ** (p + 1)) / (p + 1)
        m = resolution or (64 if d == 2 else 20)
        z, wz, sub = polar_template(d - 1, m)
        sz = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        safe = np.where(norms > 0, norms, 1.0)
        E = Y / safe[:, None]
        if d == 2:
            F = [np.column_stack([-E[:, 1], E[:, 0]])]
        else:
            F = list(_tangent_basis(E))
        # equator nodes zeta = sum_j sub[:, j] F_j, then u = z E + sqrt(1-z^2) zeta
        zeta = sum(sub.nodes[None, :, j, None] * F[j][:, None, :] for j in range(d - 1))
        U = z[None, :, None, None] * E[:, None, None, :] + sz[None, :, None, None] * zeta[:, None, :, :]
        wts = (wz[:, None] * sub.weights[None, :]).reshape(-1)
        U = U.reshape(Y.shape[0], -1, d)
        r = 1.0 / self._gauge(U.reshape(-1, d)).reshape(Y.shape[0], -1)
        zz = np.broadcast_to(np.abs(z)[:, None], (z.size, sub.size)).reshape(-1)
        for i in range(Y.shape[0]):
            out[i] = math.fsum(wts * r[i] ** (p + d) * zz**p) * norms[i] ** p / (p + d)
        return out

    def polar(self) -> "ConvexBody":
        return GaugeBody(self.dim, self._support, symmetric=self.symmetric)

    def linear_image(self, A) -> "ConvexBody":
        A = np.atleast_2d(np.asarray(A, float))
        Ainv = np.linalg.inv(A)
        base = self
        return GaugeBody(self.dim, lambda Y: base._gauge(Y @ Ainv.T), symmetric=self.symmetric)

    def centroid_body(self, p: float) -> "ConvexBody":
        if p < 1:
            raise ValueError("p must be >= 1")
        norm = a_np(self.dim, p) * self.volume()
        base = self
        return SupportBody(
            self.dim, lambda Y: (base._moment(Y, p) / norm) ** (1.0 / p), symmetric=True
        )


class Ellipsoid(ConvexBody):
    """{z : |M z| <= 1}."""

    def __init__(self, M):
        M = np.atleast_2d(np.asarray(M, float))
        if M.shape[0] != M.shape[1]:
            raise ValueError("ellipsoid matrix must be square")
        det = np.linalg.det(M)
        if abs(det) < 1e-300:
            raise ValueError("ellipsoid matrix is singular")
        self.M = M
        self.dim = M.shape[0]
        self._Minv_T = np.linalg.inv(M).T
        self._det = abs(det)

    def _gauge(self, Y):
        return np.linalg.norm(Y @ self.M.T, axis=1)

    def _support(self, Y):
        return np.linalg.norm(Y @ self._Minv_T.T, axis=1)

    def volume(self, resolution=None):
        return float(ball_volume(self.dim) / self._det)

    def _moment(self, Y, p, resolution=None):
        w = np.linalg.norm(Y @ self._Minv_T.T, axis=1)
        return w**p * unit_ball_moment(self.dim, p) / self._det

    def polar(self):
        return Ellipsoid(self._Minv_T)

    def linear_image(self, A):
        return Ellipsoid(self.M @ np.linalg.inv(np.atleast_2d(np.asarray(A, float))))

    def centroid_body(self, p):
        # h^p(y) = |M^{-T} y|^p * m_{d,p} / (a_{d,p} rho_d): a dilate of the ellipsoid
        s = (unit_ball_moment(self.dim, p) / (a_np(self.dim, p) * ball_volume(self.dim))) ** (1.0 / p)
        return Ellipsoid(self.M / s)


def Ball(d: int, radius: float = 1.0) -> Ellipsoid:
    return Ellipsoid(np.eye(d) / radius)


class Interval(ConvexBody):
    """[lo, hi] with lo < 0 < hi."""

    dim = 1

    def __init__(self, lo: float, hi: float):
        if not lo < 0 < hi:
            raise ValueError("interval must contain the origin in its interior")
        self.lo, self.hi = float(lo), float(hi)
        self.symmetric = self.lo == -self.hi

    def _gauge(self, Y):
        y = Y[:, 0]
        return np.where(y >= 0, y / self.hi, y / self.lo)

    def _support(self, Y):
        y = Y[:, 0]
        return np.where(y >= 0, y * self.hi, y * self.lo)

    def volume(self, resolution=None):
        return self.hi - self.lo

    def _moment(self, Y, p, resolution=None):
        return np.abs(Y[:, 0]) ** p * (self.hi ** (p + 1) + (-self.lo) ** (p + 1)) / (p + 1)

    def polar(self):
        return Interval(1.0 / self.lo, 1.0 / self.hi)

    def linear_image(self, A):
        s = float(np.atleast_2d(A)[0, 0])
        lo, hi = sorted((s * self.lo, s * self.hi))
        return Interval(lo, hi)

    def centroid_body(self, p):
        h = (self._moment(np.array([[1.0]]), p)[0] / (a_np(1, p) * self.volume())) ** (1.0 / p)
        return Interval(-h, h)


class Polygon(ConvexBody):
    """Convex polygon given by its vertices (any order); origin in the interior."""

    dim = 2

    def __init__(self, vertices):
        V = np.asarray(vertices, float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise ValueError("polygon needs at least three 2-D vertices")
        hull = ConvexHull(V)
        V = V[hull.vertices]  # counter-clockwise
        self.vertices = V
        E = np.roll(V, -1, axis=0) - V
        normals = np.column_stack([E[:, 1], -E[:, 0]])
        offsets = np.einsum("ij,ij->i", normals, V)
        if np.any(offsets <= 0):
            raise ValueError("origin must lie in the interior of the polygon")
        self._facets = normals / offsets[:, None]
        self.symmetric = bool(
            V.shape[0] % 2 == 0
            and np.allclose(np.sort(V, axis=0), np.sort(-V, axis=0), atol=1e-12)
        )

    def _gauge(self, Y):
        return np.max(Y @ self._facets.T, axis=1)

    def _support(self, Y):
        return np.max(Y @ self.vertices.T, axis=1)

    def volume(self, resolution=None):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * math.fsum(x * np.roll(y, -1) - np.roll(x, -1) * y)

    def _moment(self, Y, p, resolution=None):
        # fan triangulation from the origin; each triangle is exact via a
        # divided difference of |s|^{p+2} / ((p+1)(p+2))
        V = self.vertices
        W = np.roll(V, -1, axis=0)
        area2 = V[:, 0] * W[:, 1] - V[:, 1] * W[:, 0]
        a = Y @ V.T
        b = Y @ W.T
        dd = _second_divided_difference(a, b, p)
        return np.sum(area2[None, :] * dd, axis=1)

    def polar(self):
        return Polygon(self._facets)

    def linear_image(self, A):
        return Polygon(self.vertices @ np.atleast_2d(np.asarray(A, float)).T)


def _second_divided_difference(a, b, p):
    """[0, a, b] G for G(s) = |s|^{p+2} / ((p+1)(p+2)), elementwise.

    By Hermite-Genocchi, twice the triangle area times this value is the
    integral of |l|^p over a triangle on whose vertices l takes 0, a, b.
    """
    c2 = 1.0 / ((p + 1) * (p + 2))
    G = lambda s: np.abs(s) ** (p + 2) * c2
    G1 = lambda s: np.sign(s) * np.abs(s) ** (p + 1) / (p + 1)
    G2 = lambda s: np.abs(s) ** p
    G3 = lambda s: p * np.sign(s) * np.abs(s) ** (p - 1) if p != 1 else np.sign(s)
    x = np.sort(np.stack([np.zeros_like(a), a, b]), axis=0)
    x0, x1, x2 = x
    span = x2 - x0

    def first(u, v):
        gap = v - u
        near = np.abs(gap) <= 1e-6 * np.maximum(np.abs(u), np.abs(v))
        safe = np.where(near, 1.0, gap)
        m = 0.5 * (u + v)
        with np.errstate(invalid="ignore", divide="ignore"):
            taylor = G1(m) + gap**2 * G3(np.where(m == 0, 1.0, m)) / 24.0
        return np.where(near, taylor, (G(v) - G(u)) / safe)

    safe_span = np.where(span > 0, span, 1.0)
    out = (first(x1, x2) - first(x0, x1)) / safe_span
    return np.where(span > 0, out, 0.5 * G2(x0))


class LqBall(ConvexBody):
    """{z : ||z||_q <= scale} in R^d, 1 <= q <= inf."""

    def __init__(self, d: int, q: float, scale: float = 1.0):
        if q < 1:
            raise ValueError("need q >= 1")
        self.dim, self.q, self.scale = int(d), float(q), float(scale)

    def _gauge(self, Y):
        return np.linalg.norm(Y, ord=self.q, axis=1) / self.scale

    def _support(self, Y):
        qd = 1.0 if math.isinf(self.q) else (math.inf if self.q == 1 else self.q / (self.q - 1))
        return np.linalg.norm(Y, ord=qd, axis=1) * self.scale

    def volume(self, resolution=None):
        d, q = self.dim, self.q
        if math.isinf(q):
            return (2 * self.scale) ** d
        return math.exp(d * (math.log(2) + log_gamma(1 + 1 / q)) - log_gamma(1 + d / q)) * self.scale**d


class GaugeBody(ConvexBody):
    """Body given by a vectorised, 1-homogeneous gauge function."""

    def __init__(self, d: int, gauge_fn, symmetric: bool = True):
        self.dim, self._fn, self.symmetric = int(d), gauge_fn, symmetric

    def _gauge(self, Y):
        return np.asarray(self._fn(Y), float)

    def polar(self):
        return SupportBody(self.dim, self._fn, symmetric=self.symmetric)


class SupportBody(ConvexBody):
    """Body given by a vectorised, 1-homogeneous support function."""

    def __init__(self, d: int, support_fn, symmetric: bool = True):
        self.dim, self._fn, self.symmetric = int(d), support_fn, symmetric

    def _support(self, Y):
        return np.asarray(self._fn(Y), float)

    def polar(self):
        return GaugeBody(self.dim, self._fn, symmetric=self.symmetric)

    def volume(self, resolution=None):
        if self.dim == 2:
            # (1/2) int (h^2 - h'^2) d theta, spectrally
            m = resolution or 2048
            th = 2 * math.pi * np.arange(m) / m
            h = self._support(np.column_stack([np.cos(th), np.sin(th)]))
            c = np.fft.rfft(h) / m
            k = np.arange(c.size)
            mult = np.where((k == 0) | ((m % 2 == 0) & (k == m // 2)), 1.0, 2.0)
            return math.pi * math.fsum(mult * np.abs(c) ** 2 * (1.0 - k**2))
        return super().volume(resolution)


class TabulatedBody(ConvexBody):
    """Body whose radial function is sampled on a direction grid and interpolated.

    ``d = 2``: samples at equally spaced angles, trigonometric interpolation of
    ``log r``. ``d = 3``: samples on a Gauss x trapezoid grid with ``nz`` polar
    nodes, spherical-harmonic projection of ``log r`` up to degree ``nz - 1``.
    """

    def __init__(self, d: int, directions, radii, nz: Optional[int] = None):
        self.dim = int(d)
        self.directions = np.asarray(directions, float)
        self.radii = np.asarray(radii, float)
        if np.any(~(self.radii > 0)):
            raise ValueError("radial samples must be positive")
        logr = np.log(self.radii)
        if d == 1:
            self._r = {1: self.radii[self.directions[:, 0] > 0][0], -1: self.radii[self.directions[:, 0] < 0][0]}
        elif d == 2:
            self._coef = np.fft.fft(logr) / logr.size
            self._freq = np.fft.fftfreq(logr.size, 1.0 / logr.size)
            if logr.size % 2 == 0:
                # split the Nyquist mode symmetrically so the interpolant is real
                self._nyq = logr.size // 2
            else:
                self._nyq = None
        elif d == 3:
            if nz is None:
                raise ValueError("d = 3 tables need the polar node count nz")
            rule_w = self._product_weights(nz)
            Z = self.directions
            theta = np.arccos(np.clip(Z[:, 2], -1, 1))
            phi = np.arctan2(Z[:, 1], Z[:, 0])
            self._lm = [(l, m) for l in range(nz) for m in range(-l, l + 1)]
            self._clm = np.array([
                np.sum(rule_w * logr * np.conj(sph_harm_y(l, m, theta, phi))) for l, m in self._lm
            ])
        else:
            raise ValueError("tabulated bodies support d <= 3")
        self.symmetric = True

    def _product_weights(self, nz):
        rule = sphere_rule(2, nz, "product")
        if rule.size != self.directions.shape[0] or not np.allclose(rule.nodes, self.directions):
            raise ValueError("d = 3 samples must sit on sphere_rule(2, nz, 'product') nodes")
        return rule.weights

    def _logr(self, U):
        if self.dim == 2:
            th = np.arctan2(U[:, 1], U[:, 0])
            ph = np.exp(1j * np.outer(th, self._freq))
            if self._nyq is not None:
                # replace e^{-i N/2 th} by cos(N/2 th)
                ph[:, self._nyq] = np.cos(self._nyq * th)
            return np.real(ph @ self._coef)
        th = np.arccos(np.clip(U[:, 2], -1, 1))
        phi = np.arctan2(U[:, 1], U[:, 0])
        acc = np.zeros(U.shape[0], dtype=complex)
        for (l, m), c in zip(self._lm, self._clm):
            acc += c * sph_harm_y(l, m, th, phi)
        return acc.real

    _FINE = 2048

    def _moment_series(self, p):
        # int_K |<u, z>|^p dz = (1/(p+2)) int r(th)^{p+2} |cos(th - phi)|^p dth, a circular
        # convolution; |cos|^p has closed-form Fourier coefficients (zero for odd k)
        cache = self.__dict__.setdefault("_mseries", {})
        if p not in cache:
            m = self._FINE
            th = 2 * math.pi * np.arange(m) / m
            r = np.exp(self._logr(np.column_stack([np.cos(th), np.sin(th)])))
            R = np.fft.fft(r ** (p + 2)) / m
            k = np.fft.fftfreq(m, 1.0 / m)
            ak = np.abs(k)
            lead = math.exp(gammaln(p + 1) - p * math.log(2.0))
            small = ak <= p + 2
            z = 1 + (p - ak) / 2
            with np.errstate(all="ignore"):
                direct = lead * rgamma(1 + (p + ak) / 2) * rgamma(z)
                # reflection 1/Gamma(z) = Gamma(1 - z) sin(pi z) / pi keeps large |k| finite
                refl = lead * np.exp(gammaln((ak - p) / 2) - gammaln(1 + (p + ak) / 2)) * np.sin(math.pi * z) / math.pi
            ck = np.where(ak % 2 == 0, np.where(small, direct, refl), 0.0)
            cache[p] = (2 * math.pi / (p + 2)) * R * ck
        return cache[p]

    def _moment(self, Y, p, resolution=None):
        if self.dim != 2:
            return super()._moment(Y, p, resolution)
        coef = self._moment_series(float(p))
        m = coef.size
        k = np.fft.fftfreq(m, 1.0 / m)
        norms = np.linalg.norm(Y, axis=1)
        phi = np.arctan2(Y[:, 1], Y[:, 0])
        out = np.empty(Y.shape[0])
        for lo in range(0, Y.shape[0], 256):
            ph = np.exp(1j * np.outer(phi[lo:lo + 256], k))
            ph[:, m // 2] = np.cos(m // 2 * phi[lo:lo + 256])
            out[lo:lo + 256] = np.real(ph @ coef)
        return out * norms**p

    def _gauge(self, Y):
        nrm = np.linalg.norm(Y, axis=1)
        if self.dim == 1:
            y = Y[:, 0]
            return np.where(y >= 0, y / self._r[1], -y / self._r[-1])
        U = Y / np.where(nrm > 0, nrm, 1.0)[:, None]
        return nrm * np.exp(-self._logr(U))


# ------------------------------------------------- module-level entry points


def support(body: ConvexBody, y):
    return body.support(y)


def gauge(body: ConvexBody, y):
    return body.gauge(y)


def radial(body: ConvexBody, y):
    return body.radial(y)


def polar(body: ConvexBody) -> ConvexBody:
    return body.polar()


def volume(body: ConvexBody, resolution: Optional[int] = None) -> float:
    return body.volume(resolution)


def centroid_body(body: ConvexBody, p: float) -> ConvexBody:
    """L_p centroid body, normalised so that it fixes the unit ball."""
    return body.centroid_body(p)


def inertia_matrix(body: ConvexBody) -> np.ndarray:
    """``int_K z z^T dz`` from degree-2 moments along axes and axis bisectors."""
    d = body.dim
    eye = np.eye(d)
    diag = body.moment(eye, 2.0)
    M = np.diag(diag)
    for i in range(d):
        for j in range(i + 1, d):
            mij = body.moment((eye[i] + eye[j]) / math.sqrt(2.0), 2.0)
            M[i, j] = M[j, i] = mij - 0.5 * (diag[i] + diag[j])
    return M


def isotropic_image(body: ConvexBody, rounds: int = 6, cond: float = 1.001):
    """``(A K, A)`` with the inertia of ``A K`` close to a multiple of the identity.

    Moments of a thin body are themselves inaccurate, so the map is refined
    on the current image until its inertia is round.
    """
    A = np.eye(body.dim)
    K = body
    for _ in range(rounds):
        w, V = np.linalg.eigh(inertia_matrix(K))
        if w.min() <= 0:
            break
        if w.max() / w.min() < cond:
            break
        step = V @ np.diag(w ** -0.5) @ V.T
        step /= abs(np.linalg.det(step)) ** (1.0 / body.dim)
        A = step @ A
        K = body.linear_image(A)
    return K, A


def bp_check(body: ConvexBody, p: float, tol: float = 1e-9, isotropic: bool = True) -> dict:
    """vol(Gamma_p K) / vol(K); both volumes are reported in the frame of ``body``.

    The ratio is invariant under linear maps, so by default it is evaluated
    on an isotropic image of K, where angular quadrature is well resolved.
    """
    K, A = isotropic_image(body) if isotropic and body.dim > 1 else (body, np.eye(body.dim))
    J = abs(np.linalg.det(A))
    vk = float(K.volume() / J)
    vg = float(K.centroid_body(p).volume() / J)
    ratio = vg / vk
    return {"vol_K": vk, "vol_GpK": vg, "ratio": ratio, "pass": bool(ratio >= 1 - tol)}


def random_symmetric_polygon(rng: np.random.Generator, pairs: Optional[int] = None) -> Polygon:
    """Origin-symmetric polygon from 2..8 random antipodal vertex pairs."""
    k = int(rng.integers(2, 9)) if pairs is None else pairs
    while True:
        th = np.sort(rng.uniform(0, math.pi, k))
        r = rng.uniform(0.3, 2.0, k)
        P = np.column_stack([r * np.cos(th), r * np.sin(th)])
        P = np.concatenate([P, -P])
        try:
            hull = ConvexHull(P)
        except Exception:
            continue
        if len(hull.vertices) >= 4:
            return Polygon(P[hull.vertices])


# ----------------------------------------------------- homogeneous functions


class HomogeneousConvexFn:
    """Even convex function, positive off the origin and ``degree``-homogeneous."""

    dim: int
    degree: float

    def unit(self, U):
        raise NotImplementedError

    def __call__(self, y):
        Y, single = _as_rows(y, self.dim)
        nrm = np.linalg.norm(Y, axis=1)
        safe = np.where(nrm > 0, nrm, 1.0)
        v = np.where(nrm > 0, nrm**self.degree * self.unit(Y / safe[:, None]), 0.0)
        return _out(v, single)

    @property
    def conjugate_degree(self) -> float:
        return self.degree / (self.degree - 1.0)

    def conjugate(self) -> Optional["HomogeneousConvexFn"]:
        """Closed-form Legendre transform when one is known, else None."""
        return None


class PowerNorm(HomogeneousConvexFn):
    """``coef * ||M y||_r^degree``."""

    def __init__(self, dim: int, degree: float, coef: float = 1.0, M=None, r: float = 2.0):
        if degree <= 1:
            raise ValueError("degree must exceed 1")
        self.dim, self.degree, self.coef, self.r = int(dim), float(degree), float(coef), float(r)
        self.M = np.eye(dim) if M is None else np.atleast_2d(np.asarray(M, float))

    def unit(self, U):
        return self.coef * np.linalg.norm(U @ self.M.T, ord=self.r, axis=1) ** self.degree

    def grad(self, Y):
        Y = np.atleast_2d(np.asarray(Y, float))
        Z = Y @ self.M.T
        r = self.r
        if math.isinf(r) or r < 1:
            raise ValueError("analytic gradient needs a finite r >= 1")
        nz = np.linalg.norm(Z, ord=r, axis=1)
        safe = np.where(nz > 0, nz, 1.0)
        inner = np.sign(Z) * np.abs(Z) ** (r - 1)
        fac = np.where(nz > 0, self.coef * self.degree * safe ** (self.degree - r), 0.0)
        return (fac[:, None] * inner) @ self.M

    def conjugate(self):
        d = self.degree
        p = d / (d - 1)
        r = self.r
        rd = 1.0 if math.isinf(r) else (math.inf if r == 1 else r / (r - 1))
        c = (self.coef * d) ** (1 - p) / p
        return PowerNorm(self.dim, p, c, np.linalg.inv(self.M).T, rd)


class SeparableSum(HomogeneousConvexFn):
    """``coef |y_0|^degree + rest(y_1, ..., y_{d-1})`` with matching degrees."""

    def __init__(self, coef: float, rest: HomogeneousConvexFn):
        self.coef, self.rest = float(coef), rest
        self.degree = rest.degree
        self.dim = rest.dim + 1

    def unit(self, U):
        return self.coef * np.abs(U[:, 0]) ** self.degree + self.rest(U[:, 1:])

    def grad(self, Y):
        Y = np.atleast_2d(np.asarray(Y, float))
        g0 = self.coef * self.degree * np.sign(Y[:, 0]) * np.abs(Y[:, 0]) ** (self.degree - 1)
        return np.column_stack([g0, self.rest.grad(Y[:, 1:])])

    def conjugate(self):
        rc = legendre_transform(self.rest)
        d = self.degree
        p = d / (d - 1)
        return SeparableSum((self.coef * d) ** (1 - p) / p, rc)


class NumericFn(HomogeneousConvexFn):
    """Wraps a vectorised evaluator on unit vectors."""

    def __init__(self, dim: int, degree: float, unit_fn, conj=None):
        self.dim, self.degree, self._unit, self._conj = int(dim), float(degree), unit_fn, conj

    def unit(self, U):
        return np.asarray(self._unit(U), float)

    def conjugate(self):
        return self._conj


class _NumericLegendre(HomogeneousConvexFn):
    def __init__(self, C: HomogeneousConvexFn):
        self.C = C
        self.dim = C.dim
        q = C.degree
        self.degree = q / (q - 1)

    def unit(self, U):
        q = self.C.degree
        Cq = self.C
        h = polar_max(lambda V: (q * Cq.unit(V)) ** (1.0 / q), U, self.dim)
        return h**self.degree / self.degree

    def conjugate(self):
        return self.C


def legendre_transform(C: HomogeneousConvexFn, numeric: bool = False) -> HomogeneousConvexFn:
    """Legendre transform of a degree-q homogeneous convex function.

    Uses ``C*(y) = sup_theta <y, theta>^p (q C(theta))^{1-p} / p``: the scale
    supremum is explicit and only the direction is searched numerically.
    """
    if C.degree <= 1:
        raise ValueError("degree must exceed 1")
    if not numeric:
        c = C.conjugate()
        if c is not None:
            return c
    return _NumericLegendre(C)


def body_from_C(C: HomogeneousConvexFn) -> ConvexBody:
    """The body with gauge ``C^{1/q}``."""
    q = C.degree
    if isinstance(C, PowerNorm):
        s = C.coef ** (1.0 / q)
        if C.r == 2:
            return Ellipsoid(s * C.M) if C.dim > 1 else Interval(-1 / (s * abs(C.M[0, 0])), 1 / (s * abs(C.M[0, 0])))
        if np.allclose(C.M, C.M[0, 0] * np.eye(C.dim)):
            return LqBall(C.dim, C.r, 1.0 / (s * C.M[0, 0]))
    return GaugeBody(C.dim, lambda Y: C(Y) ** (1.0 / q))


def body_from_spec(spec: dict) -> ConvexBody:
    """Build a body from ``{"type": "ellipsoid" | "polygon" | "lq_ball" | "interval", ...}``."""
    kind = spec.get("type")
    if kind == "ellipsoid":
        return Ellipsoid(spec["matrix"])
    if kind == "polygon":
        return Polygon(spec["vertices"])
    if kind == "lq_ball":
        return LqBall(int(spec.get("dim", 2)), float(spec["q"]), float(spec.get("scale", 1.0)))
    if kind == "interval":
        return Interval(float(spec["lo"]), float(spec["hi"]))
    if kind == "ball":
        return Ball(int(spec["dim"]), float(spec.get("radius", 1.0)))
    raise ValueError(f"unknown body type {kind!r}")
