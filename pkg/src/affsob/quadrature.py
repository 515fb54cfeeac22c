"""Deterministic quadrature on spheres and on the weighted half-space.

Half-space integrals are ``int g(t, x) t^a dt dx`` over ``t > 0, x in R^{n-1}``.
The default ``polar`` scheme works in frame coordinates ``s = lam t``,
``u = B (x - x0)`` and then in generalised polar coordinates adapted to the
level sets of ``|s|^kappa + |u|^kappa``::

    s = rho w^{1/kappa},  |u| = rho (1 - w)^{1/kappa},  u / |u| in S^{n-2}

The weight becomes ``rho^{N-1} w^{(a+1)/kappa - 1} (1 - w)^{(n-1)/kappa - 1}
/ kappa`` with ``N = n + a``; both the ``w`` and the ``rho`` directions are
then integrated with Gauss-Jacobi rules carrying the endpoint powers, the
latter after the substitution ``rho^kappa = v / (1 - v)`` whose endpoint
exponent at ``v = 1`` comes from the integrand's decay exponent.

Sums are accumulated per chunk with :func:`math.fsum` and the chunk sums are
combined with :func:`math.fsum` again, so results are independent of the
number of worker threads (``AFFSOB_THREADS``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import lebedev_rule
from scipy.special import roots_jacobi

from .scalar_kernel import sphere_area

__all__ = [
    "SphereRule",
    "HalfSpaceRule",
    "QuadResult",
    "Frame",
    "NonIntegrableError",
    "NonFiniteIntegrandError",
    "gauss_jacobi01",
    "sphere_rule",
    "polar_sphere_rule",
    "polar_template",
    "hemisphere_rule",
    "integrate_sphere",
    "integrate_halfspace",
    "halfspace_nodes",
    "fsum_chunks",
    "thread_count",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240611
CHUNK = 1 << 16


class NonIntegrableError(ValueError):
    """Raised when the declared decay does not make the integral finite."""


class NonFiniteIntegrandError(FloatingPointError):
    """Raised when an integrand returns NaN or infinity at a node."""


def thread_count() -> int:
    try:
        k = int(os.environ.get("AFFSOB_THREADS", "1"))
    except ValueError:
        k = 1
    return max(1, k)


def fsum_chunks(values: np.ndarray) -> float:
    """Correctly rounded sum of a 1-D array, evaluated chunk by chunk."""
    values = np.asarray(values, dtype=float).ravel()
    return math.fsum(math.fsum(values[i:i + CHUNK]) for i in range(0, values.size, CHUNK))


# ------------------------------------------------------------------ 1-D rules


@lru_cache(maxsize=512)
def _gj01(m: int, a0: float, a1: float):
    x, w = roots_jacobi(m, a1, a0)
    u = 0.5 * (1.0 + x)
    w = w * 0.5 ** (a0 + a1 + 1.0)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def gauss_jacobi01(m: int, a0: float = 0.0, a1: float = 0.0):
    """Nodes and weights for ``int_0^1 g(u) u^a0 (1-u)^a1 du``."""
    if m < 1:
        raise ValueError("need at least one node")
    if a0 <= -1 or a1 <= -1:
        raise NonIntegrableError(f"Jacobi exponents must exceed -1, got {a0}, {a1}")
    return _gj01(int(m), float(a0), float(a1))


# -------------------------------------------------------------- sphere rules


@dataclass(frozen=True)
class SphereRule:
    """Quadrature on S^d embedded in R^{d+1}; weights sum to |S^d|."""

    sphere_dim: int
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int
    degree: float
    kind: str

    @property
    def size(self) -> int:
        return self.weights.size

    def antipode_index(self) -> np.ndarray:
        """Index map i -> j with nodes[j] == -nodes[i] (to rounding)."""
        return _antipodes(self.nodes)


def _antipodes(nodes):
    k = nodes.shape[0]
    idx = np.empty(k, dtype=int)
    # nodes are few thousand at most
    for i in range(k):
        d = np.abs(nodes + nodes[i]).max(axis=1)
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise ValueError("rule is not antipodally symmetric")
        idx[i] = j
    return idx


def _frozen(*arrs):
    for a in arrs:
        a.setflags(write=False)
    return arrs


@lru_cache(maxsize=64)
def _sphere_rule_cached(d: int, resolution: int, kind: str, seed: int) -> SphereRule:
    if d == 0:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
        _frozen(nodes, weights)
        return SphereRule(0, nodes, weights, 1, math.inf, "counting")
    if d == 1:
        m = 2 * ((resolution + 1) // 2)
        th = 2.0 * math.pi * np.arange(m) / m
        nodes = np.column_stack([np.cos(th), np.sin(th)])
        weights = np.full(m, 2.0 * math.pi / m)
        _frozen(nodes, weights)
        return SphereRule(1, nodes, weights, m, m - 1, "trapezoid")
    if d == 2 and kind == "lebedev":
        x, w = lebedev_rule(resolution)
        nodes = np.ascontiguousarray(x.T)
        weights = np.ascontiguousarray(w)
        if np.any(weights <= 0):
            raise ValueError(f"Lebedev order {resolution} has non-positive weights")
        _frozen(nodes, weights)
        return SphereRule(2, nodes, weights, resolution, resolution, "lebedev")
    if d <= 3 and kind in ("product", "auto", "lebedev"):
        m = 2 * ((resolution + 1) // 2)
        z, wz = roots_jacobi(m, 0.5 * (d - 2), 0.5 * (d - 2))
        sub = _sphere_rule_cached(d - 1, 2 * m if d == 2 else m, "product", seed)
        s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        nodes = np.concatenate(
            [np.column_stack([np.full(sub.size, zi), si * sub.nodes]) for zi, si in zip(z, s)]
        )
        weights = np.concatenate([wi * sub.weights for wi in wz])
        _frozen(nodes, weights)
        return SphereRule(d, nodes, weights, resolution, min(2 * m - 1, sub.degree), "product")
    if kind not in ("monte_carlo", "auto", "product"):
        raise ValueError(f"unknown sphere rule kind {kind!r}")
    half = max(1, resolution)
    rng = np.random.Generator(np.random.Philox(key=seed))
    g = rng.standard_normal((half, d + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    nodes = np.concatenate([g, -g])
    weights = np.full(2 * half, sphere_area(d) / (2 * half))
    _frozen(nodes, weights)
    return SphereRule(d, nodes, weights, resolution, 1, "monte_carlo")


def sphere_rule(d: int, resolution: int, kind: str = "auto", seed: int = DEFAULT_SEED) -> SphereRule:
    """Quadrature rule on the unit sphere S^d.

    ``d = 0`` is the counting measure on {+1, -1}; ``d = 1`` is the uniform
    trapezoid rule with ``resolution`` (rounded up to even) nodes; ``d = 2``
    is a Gauss x trapezoid product (``kind="product"``) or a Lebedev rule of
    degree ``resolution`` (``kind="lebedev"``); ``d = 3`` is a recursive
    product; larger ``d`` falls back to symmetrised Monte Carlo.
    """
    if d < 0:
        raise ValueError("sphere dimension must be >= 0")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    return _sphere_rule_cached(int(d), int(resolution), kind, int(seed))


def integrate_sphere(rule: SphereRule, g: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sum of ``w_i g(xi_i)``; ``g`` receives all nodes as a (K, d+1) array."""
    vals = np.asarray(g(rule.nodes), dtype=float).reshape(-1)
    if vals.size != rule.size:
        raise ValueError("integrand returned the wrong number of values")
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonFiniteIntegrandError(
            f"non-finite integrand at sphere node {i}: {rule.nodes[i].tolist()}"
        )
    return fsum_chunks(rule.weights * vals)


def _orth_complement(eta):
    eta = np.asarray(eta, float)
    eta = eta / np.linalg.norm(eta)
    d1 = eta.size
    q, _ = np.linalg.qr(np.column_stack([eta, np.eye(d1)]))
    return eta, q[:, 1:d1]


@lru_cache(maxsize=64)
def _polar_template(d: int, m: int, sub_res: int):
    # z = +-y^2 so that |z|^p is smooth in y
    y, wy = gauss_jacobi01(m, 0.0, 0.5 * (d - 2))
    smooth = 2.0 * y * ((1.0 + y) * (1.0 + y * y)) ** (0.5 * (d - 2))
    z = np.concatenate([y * y, -(y * y)])
    wz = np.concatenate([wy * smooth, wy * smooth])
    sub = sphere_rule(d - 1, sub_res, "product")
    return z, wz, sub


def polar_template(d: int, resolution: int):
    """Pole-relative pieces of :func:`polar_sphere_rule`: (z, z-weights, equator rule)."""
    m = max(2, int(resolution))
    sub_res = max(4, 2 * m) if d == 2 else m
    return _polar_template(d, m, sub_res)


def polar_sphere_rule(d: int, pole, resolution: int) -> SphereRule:
    """Rule on S^d built around ``pole`` that resolves kinks of |<u, pole>|^p.

    Nodes are ``z pole + sqrt(1 - z^2) zeta`` with ``zeta`` on the great
    sphere orthogonal to the pole and ``z = +-y^2`` on Gauss-Jacobi nodes.
    """
    if d < 1:
        raise ValueError("polar rule needs d >= 1")
    m = max(2, int(resolution))
    z, wz, sub = polar_template(d, m)
    eta, basis = _orth_complement(pole)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    zeta = sub.nodes @ basis.T
    nodes = (z[:, None, None] * eta[None, None, :] + s[:, None, None] * zeta[None, :, :]).reshape(-1, d + 1)
    weights = (wz[:, None] * sub.weights[None, :]).reshape(-1)
    return SphereRule(d, nodes, weights, m, math.nan, "polar")


@lru_cache(maxsize=32)
def _hemisphere_cached(n: int, a: float, m: int, sub_res: int):
    z, wz = gauss_jacobi01(m, a, 0.5 * (n - 3)) if n >= 3 else gauss_jacobi01(m, a, -0.5)
    wz = wz * (1.0 + z) ** (0.5 * (n - 3))
    sub = sphere_rule(n - 2, sub_res, "product")
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    nodes = np.concatenate(
        [np.column_stack([np.full(sub.size, zi), si * sub.nodes]) for zi, si in zip(z, s)]
    )
    weights = np.concatenate([wi * sub.weights for wi in wz])
    return _frozen(nodes, weights)


def hemisphere_rule(n: int, a: float, resolution: int):
    """Nodes/weights on the upper half of S^{n-1} for ``int g(w) w_t^a dw``.

    The first coordinate of each node is the t-component.
    """
    m = max(2, int(resolution))
    sub_res = 2 * m if n == 3 else (m if n > 3 else 1)
    return _hemisphere_cached(int(n), float(a), m, sub_res)


# ---------------------------------------------------------- half-space rules


@dataclass(frozen=True)
class Frame:
    """Affine frame s = lam t, u = B (x - x0) in which an integrand is simple."""

    lam: float = 1.0
    B: Optional[tuple] = None
    x0: Optional[tuple] = None

    def matrix(self, n):
        return np.eye(n - 1) if self.B is None else np.asarray(self.B, float)

    def offset(self, n):
        return np.zeros(n - 1) if self.x0 is None else np.asarray(self.x0, float)

    @staticmethod
    def make(lam=1.0, B=None, x0=None) -> "Frame":
        Bt = None if B is None else tuple(tuple(float(v) for v in row) for row in np.atleast_2d(B))
        xt = None if x0 is None else tuple(float(v) for v in np.atleast_1d(x0))
        return Frame(float(lam), Bt, xt)

    def compose(self, lam, B) -> "Frame":
        """Frame of y -> g(lam t, B x) given the frame of g."""
        n1 = np.atleast_2d(B).shape[0]
        Bf = self.matrix(n1 + 1)
        B = np.asarray(B, float)
        x0 = np.linalg.solve(B, self.offset(n1 + 1))
        return Frame.make(self.lam * lam, Bf @ B, x0)


@dataclass(frozen=True)
class HalfSpaceRule:
    """Parameters of a half-space quadrature rule.

    ``scheme`` is ``polar`` (default), ``cylindrical``, ``map_to_cube`` or
    ``monte_carlo``. ``support`` is a bound on the frame-space radius
    (``rho`` for polar, per-axis breakpoints for cylindrical).
    """

    n: int
    a: float
    scheme: str = "polar"
    frame: Frame = field(default_factory=Frame)
    kappa: float = 2.0
    support: Optional[float] = None
    scale: float = 1.0
    rho_nodes: int = 48
    w_nodes: int = 20
    angle_nodes: int = 12
    breaks_t: Optional[tuple] = None
    breaks_r: Optional[tuple] = None
    panel_nodes: tuple = (24, 40)
    node_budget: int = 200_000
    seed: int = DEFAULT_SEED
    truncation_radius: float = math.inf

    def coarse(self) -> "HalfSpaceRule":
        c = lambda m: max(2, int(math.ceil(2 * m / 3)))
        return replace(
            self,
            rho_nodes=c(self.rho_nodes),
            w_nodes=c(self.w_nodes),
            angle_nodes=c(self.angle_nodes),
            panel_nodes=tuple(c(m) for m in self.panel_nodes),
            node_budget=max(1000, self.node_budget // 4),
            seed=self.seed + 1,
        )

    @property
    def N(self):
        return self.n + self.a


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_estimate: float

    def __iter__(self):
        yield self.value
        yield self.err_estimate


def _rho_rule(rule: HalfSpaceRule, decay: float, extra: float = 0.0):
    """Nodes rho and weights for int_0^R h(rho) rho^{N+extra-1} d rho."""
    N, k, m = rule.N + extra, rule.kappa, rule.rho_nodes
    if rule.support is not None:
        R = rule.support
        # C = R^k (1 - (1 - nu)^2): grades the boundary, C^{N/k - 1} becomes a Jacobi weight
        nu, wn = gauss_jacobi01(m, N / k - 1.0, 0.0)
        c = 1.0 - (1.0 - nu) ** 2
        rho = R * c ** (1.0 / k)
        w = wn * (R**N / k) * (2.0 - nu) ** (N / k - 1.0) * 2.0 * (1.0 - nu)
        return rho, w
    if not decay > rule.N:
        raise NonIntegrableError(f"decay exponent {decay} must exceed n + a = {rule.N}")
    a1 = 0.0 if math.isinf(decay) else (decay - rule.N) / k - 1.0
    v, wv = gauss_jacobi01(m, N / k - 1.0, a1)
    L = rule.scale
    rho = L * (v / (1.0 - v)) ** (1.0 / k)
    w = wv * (L**N / k) * (1.0 - v) ** (-N / k - 1.0 - a1)
    return rho, w


def _angles(rule: HalfSpaceRule, pole):
    n = rule.n
    if n == 2:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if pole is None:
        pole = np.eye(n - 1)[0]
    r = polar_sphere_rule(n - 2, pole, rule.angle_nodes)
    return r.nodes, r.weights


def _polar_nodes(rule: HalfSpaceRule, decay: float, pole, et: float, er: float):
    n, a, k = rule.n, rule.a, rule.kappa
    rho, wr = _rho_rule(rule, decay, et + er)
    w, ww = gauss_jacobi01(rule.w_nodes, (a + 1 + et) / k - 1.0, (n - 1 + er) / k - 1.0)
    uh, wu = _angles(rule, pole)
    s = rho[:, None] * w[None, :] ** (1.0 / k)
    r = rho[:, None] * (1.0 - w[None, :]) ** (1.0 / k)
    base_w = (wr[:, None] * ww[None, :]) / k
    if et or er:
        base_w = base_w / (s**et * r**er)
    S = np.repeat(s.reshape(-1), uh.shape[0])
    U = (r.reshape(-1)[:, None, None] * uh[None, :, :]).reshape(-1, n - 1)
    W = (base_w.reshape(-1)[:, None] * wu[None, :]).reshape(-1)
    return S, U, W


def _panel_rule(breaks, m_in, m_band, first_power):
    nodes, weights = [], []
    for i in range(len(breaks) - 1):
        lo, hi = breaks[i], breaks[i + 1]
        m = m_in if i == 0 else m_band
        if i == 0:
            u, w = gauss_jacobi01(m, first_power, 0.0)
            nodes.append(lo + (hi - lo) * u)
            weights.append(w * (hi - lo) ** (first_power + 1))
        else:
            u, w = gauss_jacobi01(m, 0.0, 0.0)
            x = lo + (hi - lo) * u
            nodes.append(x)
            weights.append(w * (hi - lo) * x**first_power)
    return np.concatenate(nodes), np.concatenate(weights)


def _cylindrical_nodes(rule: HalfSpaceRule, pole, et: float, er: float):
    n, a = rule.n, rule.a
    if rule.breaks_t is None or rule.breaks_r is None:
        raise ValueError("cylindrical scheme needs breakpoints in t and r")
    if rule.breaks_t[0] != 0 or rule.breaks_r[0] != 0:
        raise ValueError("cylindrical breakpoints must start at 0")
    m_in, m_band = rule.panel_nodes
    s, ws = _panel_rule(rule.breaks_t, m_in, m_band, a + et)
    r, wr = _panel_rule(rule.breaks_r, m_in, m_band, n - 2 + er)
    ws = ws / s**et
    wr = wr / r**er
    uh, wu = _angles(rule, pole)
    S = np.repeat(np.repeat(s, r.size), uh.shape[0])
    U = (np.tile(r, s.size)[:, None, None] * uh[None, :, :]).reshape(-1, n - 1)
    W = ((ws[:, None] * wr[None, :]).reshape(-1)[:, None] * wu[None, :]).reshape(-1)
    return S, U, W


def _cube_nodes(rule: HalfSpaceRule):
    n, a = rule.n, rule.a
    if n > 3:
        raise ValueError("map_to_cube scheme supports n <= 3")
    m = max(4, int(round(rule.node_budget ** (1.0 / n))))
    u, wu = gauss_jacobi01(m, a, 0.0)
    # t = u / (1 - u): t^a dt = u^a (1-u)^{-a-2} du
    s = u / (1.0 - u)
    ws = wu * (1.0 - u) ** (-a - 2.0)
    v, wv = gauss_jacobi01(m, 0.0, 0.0)
    xv = np.tan(math.pi * (v - 0.5))
    wx = wv * math.pi / np.cos(math.pi * (v - 0.5)) ** 2
    grids = np.meshgrid(*([s] + [xv] * (n - 1)), indexing="ij")
    wgrids = np.meshgrid(*([ws] + [wx] * (n - 1)), indexing="ij")
    S = grids[0].reshape(-1)
    U = np.column_stack([g.reshape(-1) for g in grids[1:]])
    W = np.prod(np.stack([g.reshape(-1) for g in wgrids]), axis=0)
    return S, U, W


def _mc_nodes(rule: HalfSpaceRule, decay: float):
    n, a, k, N = rule.n, rule.a, rule.kappa, rule.N
    M = rule.node_budget
    rng = np.random.Generator(np.random.Philox(key=rule.seed))
    xi = rng.random((M, 2))
    g = rng.standard_normal((M, max(n - 1, 1)))
    if n == 2:
        uh = np.sign(g[:, :1])
        area = 2.0
    else:
        uh = g / np.linalg.norm(g, axis=1, keepdims=True)
        area = sphere_area(n - 2)
    # importance: v uniform in the same substitution used by the polar rule
    if rule.support is not None:
        R = rule.support
        rho = R * xi[:, 0] ** (1.0 / N)
        wr = np.full(M, R**N / N)
    else:
        if not decay > N:
            raise NonIntegrableError(f"decay exponent {decay} must exceed n + a = {N}")
        L = rule.scale
        v = xi[:, 0]
        rho = L * (v / (1.0 - v)) ** (1.0 / k)
        wr = (L**N / k) * v ** (N / k - 1.0) * (1.0 - v) ** (-N / k - 1.0)
    w = xi[:, 1]
    ww = w ** ((a + 1) / k - 1.0) * (1.0 - w) ** ((n - 1) / k - 1.0)
    s = rho * w ** (1.0 / k)
    r = rho * (1.0 - w) ** (1.0 / k)
    W = wr * ww * area / (k * M)
    return s, r[:, None] * uh, W


def halfspace_nodes(rule: HalfSpaceRule, decay: float = math.inf, pole=None,
                    t_power: float = 0.0, r_power: float = 0.0):
    """Physical nodes ``(t, x)`` and weights for ``int g t^a dt dx``.

    ``pole`` is a direction in x-space whose orthogonal hyperplane carries a
    kink of the integrand; it is mapped into frame coordinates.
    ``t_power`` / ``r_power`` declare that the integrand behaves like
    ``s^t_power r^r_power`` times a smooth function near the frame axes
    (``s = lam t``, ``r = |B (x - x0)|``); the deterministic schemes fold these
    powers into their Jacobi weights.
    """
    n = rule.n
    fr = rule.frame
    B = fr.matrix(n)
    frame_pole = None
    if pole is not None and n > 2:
        # <xi, grad_x f> = <B xi, grad_u F>: the kink normal in frame space
        frame_pole = B @ np.asarray(pole, float)
    if rule.scheme == "polar":
        S, U, W = _polar_nodes(rule, decay, frame_pole, t_power, r_power)
    elif rule.scheme == "cylindrical":
        S, U, W = _cylindrical_nodes(rule, frame_pole, t_power, r_power)
    elif rule.scheme == "map_to_cube":
        S, U, W = _cube_nodes(rule)
    elif rule.scheme == "monte_carlo":
        S, U, W = _mc_nodes(rule, decay)
    else:
        raise ValueError(f"unknown scheme {rule.scheme!r}")
    t = S / fr.lam
    x = np.linalg.solve(B, U.T).T + fr.offset(n)
    jac = fr.lam ** (-1.0 - rule.a) / abs(np.linalg.det(B))
    return t, x, W * jac


def _check_finite(vals, t, x):
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonFiniteIntegrandError(
            f"non-finite integrand at t={t[i]!r}, x={x[i].tolist()!r}"
        )


def _weighted_sum(g, t, x, w):
    k = thread_count()
    spans = [(i, min(i + CHUNK, t.size)) for i in range(0, t.size, CHUNK)]

    def part(span):
        lo, hi = span
        vals = np.asarray(g(t[lo:hi], x[lo:hi]), dtype=float)
        _check_finite(vals, t[lo:hi], x[lo:hi])
        return math.fsum(vals * w[lo:hi])

    if k == 1 or len(spans) == 1:
        parts = [part(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=k) as ex:
            parts = list(ex.map(part, spans))
    return math.fsum(parts)


def integrate_halfspace(
    rule: HalfSpaceRule,
    g: Callable[[np.ndarray, np.ndarray], np.ndarray],
    decay_hint: float = math.inf,
    pole=None,
    t_power: float = 0.0,
    r_power: float = 0.0,
) -> QuadResult:
    """Estimate ``int g(t, x) t^a dt dx`` over the half-space.

    ``decay_hint`` is ``s`` with ``|g(y)| <~ (1 + |y|)^{-s}``; ``s <= n + a``
    raises :class:`NonIntegrableError` unless the rule has bounded support.
    The error estimate is the difference to a rule with two thirds of the
    nodes per direction (or three standard errors for Monte Carlo).
    """
    if rule.support is None and rule.scheme in ("polar", "monte_carlo", "map_to_cube"):
        if not decay_hint > rule.N:
            raise NonIntegrableError(
                f"decay exponent {decay_hint} must exceed n + a = {rule.N}"
            )
    t, x, w = halfspace_nodes(rule, decay_hint, pole, t_power, r_power)
    value = _weighted_sum(g, t, x, w)
    if rule.scheme == "monte_carlo":
        vals = np.asarray(g(t, x), float) * w * w.size
        err = 3.0 * float(np.std(vals)) / math.sqrt(w.size)
        return QuadResult(value, err)
    tc, xc, wc = halfspace_nodes(rule.coarse(), decay_hint, pole, t_power, r_power)
    coarse = _weighted_sum(g, tc, xc, wc)
    return QuadResult(value, abs(value - coarse))
