"""Weighted norms, affine energy and the convex objects built from a function.

All integrals are over the half-space with weight ``t^a``. Numbers returned
here are :class:`Estimate` instances: floats that also carry ``err``, the
quadrature error estimate propagated to that quantity.

:class:`Analysis` bundles everything derived from one ``(f, p, a)`` and
computes each piece once. The module-level functions are thin wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .convex_geometry import (
    GaugeBody,
    NumericFn,
    TabulatedBody,
    legendre_transform,
    polar_max,
)
from .functions import TestFunction
from .quadrature import (
    HalfSpaceRule,
    QuadResult,
    hemisphere_rule,
    integrate_halfspace,
    sphere_rule,
)
from .scalar_kernel import Params, a_np, c_np

__all__ = [
    "Estimate",
    "Budget",
    "Analysis",
    "DegenerateFunctionError",
    "NormalizationError",
    "weighted_norm",
    "dt_norm",
    "directional_norm",
    "full_spatial_norm",
    "Z_p",
    "E_p",
    "entropy",
    "alpha_f",
    "Df_star",
    "Cf_star",
    "Cf",
    "Lf_body",
    "Kf_body",
    "weighted_body_volume",
]

DEGENERACY_RATIO = 1e-12


class DegenerateFunctionError(ValueError):
    """Some directional derivative norm vanishes (relative to the largest)."""


class NormalizationError(ValueError):
    """The entropy functional needs ``||f||_p = 1``."""


class Estimate(float):
    """A float with an attached absolute error estimate ``err``."""

    def __new__(cls, value, err=0.0):
        obj = super().__new__(cls, value)
        obj.err = float(abs(err))
        return obj

    def __repr__(self):
        return f"Estimate({float(self)!r}, err={self.err:.3g})"

    @classmethod
    def of_power(cls, res: QuadResult, power: float) -> "Estimate":
        """``res.value ** power`` with first-order error propagation."""
        v = res.value
        if v <= 0:
            return cls(0.0 if v == 0 else math.nan, res.err_estimate)
        val = v**power
        return cls(val, abs(power) * val * res.err_estimate / v)


@dataclass(frozen=True)
class Budget:
    """Quadrature budgets shared by every functional of one analysis."""

    rho_nodes: int = 40
    w_nodes: int = 16
    angle_nodes: int = 12
    panel_nodes: tuple = (6, 40)  # inner panels hold the flat part of mollified indicators
    directions: Optional[int] = None  # n=3: angles on S^1; n=4: polar Gauss nodes on S^2
    dstar_table: int = 256
    hemisphere: int = 40
    scheme: Optional[str] = None
    node_budget: int = 200_000
    seed: int = 20240611

    def direction_count(self, n: int) -> int:
        if self.directions is not None:
            return self.directions
        return {2: 1, 3: 256}.get(n, 16)

    def scaled(self, factor: float) -> "Budget":
        up = lambda m: max(2, int(round(m * factor)))
        return replace(self, rho_nodes=up(self.rho_nodes), w_nodes=up(self.w_nodes),
                       angle_nodes=up(self.angle_nodes),
                       panel_nodes=tuple(up(m) for m in self.panel_nodes))


DEFAULT_BUDGET = Budget()


def halfspace_rule_for(f: TestFunction, a: float, budget: Budget = DEFAULT_BUDGET) -> HalfSpaceRule:
    scheme = budget.scheme or f.scheme
    return HalfSpaceRule(
        n=f.n, a=a, scheme=scheme, frame=f.frame, kappa=f.kappa, support=f.support,
        rho_nodes=budget.rho_nodes, w_nodes=budget.w_nodes,
        angle_nodes=budget.angle_nodes * f.angular_refine,
        breaks_t=f.breaks_t, breaks_r=f.breaks_r, panel_nodes=budget.panel_nodes,
        node_budget=budget.node_budget, seed=budget.seed,
    )


def _dual_powers(f: TestFunction, rule: HalfSpaceRule, tp: float, rp: float):
    # the power hints only make sense for the deterministic polar/cylindrical layouts
    if rule.scheme in ("polar", "cylindrical"):
        return tp, rp
    return 0.0, 0.0


class Analysis:
    """Every functional of one test function at exponent ``p`` and weight ``t^a``."""

    def __init__(self, f: TestFunction, p: float, a: float, budget: Budget = DEFAULT_BUDGET):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.f, self.p, self.a, self.budget = f, float(p), float(a), budget
        self.n = f.n
        self.N = f.n + a
        self.rule = halfspace_rule_for(f, a, budget)

    def scaled(self, c: float) -> "Analysis":
        """Analysis of ``c f``; the direction table is reused (norms scale by |c|)."""
        new = Analysis(self.f.scaled(c), self.p, self.a, self.budget)
        if "direction_norms" in self.__dict__:
            g = self.direction_norms * abs(c)
            g.setflags(write=False)
            new.__dict__["direction_norms"] = g
            new._direction_errs = self._direction_errs * abs(c)
        return new

    # ---------------------------------------------------------------- norms

    def _integrate(self, g, decay, pole=None, tp=0.0, rp=0.0) -> QuadResult:
        tp, rp = _dual_powers(self.f, self.rule, tp, rp)
        return integrate_halfspace(self.rule, g, decay, pole, tp, rp)

    def norm(self, r: float) -> Estimate:
        """``||f||_{L^r(t^a)}``."""
        f = self.f
        res = self._integrate(lambda t, x: np.abs(f(t, x)) ** r, r * f.decay)
        return Estimate.of_power(res, 1.0 / r)

    def integral_of_power(self, r: float) -> QuadResult:
        f = self.f
        return self._integrate(lambda t, x: np.abs(f(t, x)) ** r, r * f.decay)

    @cached_property
    def dt_norm(self) -> Estimate:
        f, p = self.f, self.p
        res = self._integrate(lambda t, x: np.abs(f.evaluate(t, x)[1]) ** p,
                              p * f.grad_decay, tp=p * f.t_exp)
        return Estimate.of_power(res, 1.0 / p)

    def directional_norm(self, xi) -> Estimate:
        f, p = self.f, self.p
        xi = np.asarray(xi, float).reshape(-1)
        res = self._integrate(lambda t, x: np.abs(f.evaluate(t, x)[2] @ xi) ** p,
                              p * f.grad_decay, pole=xi, rp=p * f.r_exp)
        return Estimate.of_power(res, 1.0 / p)

    @cached_property
    def full_spatial_norm(self) -> Estimate:
        f, p = self.f, self.p
        res = self._integrate(lambda t, x: np.linalg.norm(f.evaluate(t, x)[2], axis=1) ** p,
                              p * f.grad_decay, rp=p * f.r_exp)
        return Estimate.of_power(res, 1.0 / p)

    # ------------------------------------------------------ direction table

    @cached_property
    def direction_rule(self):
        n = self.n
        m = self.budget.direction_count(n)
        if n == 2:
            return sphere_rule(0, 1)
        if n == 3:
            return sphere_rule(1, m)
        return sphere_rule(n - 2, m, "product")

    @cached_property
    def direction_norms(self) -> np.ndarray:
        """``||grad_xi f||_p`` on every node of :attr:`direction_rule`."""
        rule = self.direction_rule
        idx = rule.antipode_index()
        out = np.full(rule.size, np.nan)
        errs = np.zeros(rule.size)
        for i in range(rule.size):
            if not math.isnan(out[i]):
                continue
            e = self.directional_norm(rule.nodes[i])
            out[i] = out[idx[i]] = float(e)
            errs[i] = errs[idx[i]] = e.err
        self._direction_errs = errs
        top = out.max()
        if not top > 0 or out.min() < DEGENERACY_RATIO * top:
            raise DegenerateFunctionError(
                f"directional norms range over [{out.min():.3g}, {top:.3g}]"
            )
        out.setflags(write=False)
        return out

    @cached_property
    def Z_p(self) -> Estimate:
        g = self.direction_norms
        w = self.direction_rule.weights
        n = self.n
        s = math.fsum(w * g ** (1 - n))
        ds = math.fsum(w * (n - 1) * g ** (-n) * self._direction_errs)
        val = s ** (1.0 / (1 - n))
        return Estimate(val, val * ds / ((n - 1) * s))

    @cached_property
    def E_p(self) -> Estimate:
        z = self.Z_p
        c = c_np(self.n - 1, self.p)
        return Estimate(c * z, c * z.err)

    # ---------------------------------------------------------------- bodies

    @cached_property
    def L_body(self):
        """``L_f``: the body in R^{n-1} with gauge xi -> ||grad_xi f||_p."""
        g = self.direction_norms
        rule = self.direction_rule
        if self.n <= 3:
            return TabulatedBody(self.n - 1, rule.nodes, 1.0 / g)
        return TabulatedBody(3, rule.nodes, 1.0 / g, nz=rule.resolution)

    @cached_property
    def alpha(self) -> Estimate:
        if self.p <= 1:
            raise ValueError("alpha_f needs p > 1")
        n, p, a = self.n, self.p, self.a
        z, T = self.Z_p, self.dt_norm
        if not T > 0:
            raise DegenerateFunctionError("the t-derivative vanishes")
        val = p * (1 + a) / (n - 1) * z ** (1 - n) * T ** (-p)
        rel = (n - 1) * z.err / z + p * T.err / T
        return Estimate(val, val * rel)

    def Dstar_direct(self, X) -> np.ndarray:
        """``D_f^*(x) = int_S ||grad_xi f||^{1-n-p} |<x, xi>|^p dxi`` via moments of L_f."""
        X = np.atleast_2d(np.asarray(X, float))
        return (self.n + self.p - 1) * self.L_body.moment(X, self.p)

    @cached_property
    def Dstar(self) -> NumericFn:
        """``D_f^*`` as a p-homogeneous function with tabulated unit values."""
        d = self.n - 1
        p = self.p
        if d == 1:
            vals = self.Dstar_direct(np.array([[1.0], [-1.0]]))
            return NumericFn(1, p, lambda U: np.where(U[:, 0] > 0, vals[0], vals[1]))
        if d == 2:
            m = self.budget.dstar_table
            th = 2 * math.pi * np.arange(m) / m
            U = np.column_stack([np.cos(th), np.sin(th)])
            tab = TabulatedBody(2, U, self.Dstar_direct(U) ** (-1.0 / p))
        else:
            rule = sphere_rule(2, 16, "product")
            tab = TabulatedBody(3, rule.nodes, self.Dstar_direct(rule.nodes) ** (-1.0 / p), nz=16)
        # the table stores D*^{-1/p} as a radial function; gauge^p recovers D*
        return NumericFn(d, p, lambda U: tab._gauge(U) ** p)

    @cached_property
    def Cstar(self) -> NumericFn:
        """``C_f^*(t, x) = alpha_f |t|^p / p + D_f^*(x)``."""
        al, p, Ds = float(self.alpha), self.p, self.Dstar
        return NumericFn(self.n, p, lambda U: al * np.abs(U[:, 0]) ** p / p + Ds(U[:, 1:]))

    @cached_property
    def D(self) -> NumericFn:
        """``D_f``: Legendre transform of ``D_f^*`` on R^{n-1}, tabulated."""
        d = self.n - 1
        q = self.p / (self.p - 1)
        leg = legendre_transform(self.Dstar, numeric=True)
        if d == 1:
            vals = leg(np.array([[1.0], [-1.0]]))
            return NumericFn(1, q, lambda U: np.where(U[:, 0] > 0, vals[0], vals[1]))
        if d == 2:
            m = self.budget.dstar_table
            th = 2 * math.pi * np.arange(m) / m
            U = np.column_stack([np.cos(th), np.sin(th)])
            tab = TabulatedBody(2, U, leg(U) ** (-1.0 / q))
        else:
            rule = sphere_rule(2, 16, "product")
            tab = TabulatedBody(3, rule.nodes, leg(rule.nodes) ** (-1.0 / q), nz=16)
        return NumericFn(d, q, lambda U: tab._gauge(U) ** q)

    @cached_property
    def C(self) -> NumericFn:
        """``C_f`` in product form ``alpha^{1-q}/q |t|^q + D_f(x)``."""
        q = self.p / (self.p - 1)
        al, D = float(self.alpha), self.D
        return NumericFn(self.n, q, lambda U: al ** (1 - q) / q * np.abs(U[:, 0]) ** q + D(U[:, 1:]))

    @cached_property
    def C_numeric(self):
        """``C_f`` as a direct numeric Legendre transform of ``C_f^*`` on R^n."""
        return legendre_transform(self.Cstar, numeric=True)

    @cached_property
    def K0_body(self):
        """``K_{f,0} = {D_f <= 1}``."""
        q = self.p / (self.p - 1)
        D = self.D
        return GaugeBody(self.n - 1, lambda Y: D(Y) ** (1.0 / q))

    @cached_property
    def K_body(self):
        q = self.p / (self.p - 1)
        C = self.C
        return GaugeBody(self.n, lambda Y: C(Y) ** (1.0 / q))

    # ------------------------------------------------ lemma-level quantities

    @cached_property
    def energy_D(self) -> Estimate:
        """``int D_f^*(grad_x f) t^a``."""
        f, p, Ds = self.f, self.p, self.Dstar
        res = self._integrate(lambda t, x: Ds(f.evaluate(t, x)[2]), p * f.grad_decay, rp=p * f.r_exp)
        return Estimate(res.value, res.err_estimate)

    @cached_property
    def energy_C(self) -> Estimate:
        """``int C_f^*(grad f) t^a`` split as alpha/p ||f_t||^p + int D^*(grad_x f)."""
        al, T, p = self.alpha, self.dt_norm, self.p
        val = float(al) / p * float(T) ** p + float(self.energy_D)
        err = al.err / p * T**p + float(al) * T ** (p - 1) * T.err + self.energy_D.err
        return Estimate(val, err)

    @cached_property
    def weighted_volume_direct(self) -> float:
        """``int_{(K_f)_+} y_t^a dy`` by cubature over the upper hemisphere."""
        return weighted_body_volume(self.C, self.n, self.a, self.budget.hemisphere)

    @cached_property
    def weighted_volume_slices(self) -> float:
        """The same volume by slicing: scaled K_{f,0} slices and a Beta integral."""
        n, a, p = self.n, self.a, self.p
        q = p / (p - 1)
        beta = math.exp(math.lgamma((1 + a) / q) + math.lgamma((n - 1) / q + 1)
                        - math.lgamma((1 + a) / q + (n - 1) / q + 1)) / q
        return q ** ((1 + a) / q) * float(self.alpha) ** ((1 + a) / p) * self.K0_body.volume() * beta

    def entropy(self) -> Estimate:
        f, p = self.f, self.p
        nrm = self.norm(p)
        if abs(nrm - 1.0) > 1e-8:
            raise NormalizationError(f"||f||_p = {float(nrm)!r}, expected 1")

        def g(t, x):
            u = np.abs(f(t, x)) ** p
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)

        res = self._integrate(g, p * f.decay)
        return Estimate(res.value, res.err_estimate)


def weighted_body_volume(C, n: int, a: float, resolution: int = 40) -> float:
    """``int_{K_C cap {t > 0}} t^a dy`` with ``K_C = {C <= 1}``; C has degree q."""
    nodes, w = hemisphere_rule(n, a, resolution)
    r = C(nodes) ** (-1.0 / C.degree)
    return math.fsum(w * r ** (n + a)) / (n + a)


# ------------------------------------------------------------- thin wrappers


def weighted_norm(f: TestFunction, r: float, a: float, budget: Budget = DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, max(r, 1.0), a, budget).norm(r)


def dt_norm(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).dt_norm


def directional_norm(f, xi, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).directional_norm(xi)


def full_spatial_norm(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).full_spatial_norm


def Z_p(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).Z_p


def E_p(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).E_p


def entropy(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).entropy()


def alpha_f(f, p, a, budget=DEFAULT_BUDGET) -> Estimate:
    return Analysis(f, p, a, budget).alpha


def Df_star(f, x, p, a, budget=DEFAULT_BUDGET):
    return Analysis(f, p, a, budget).Dstar_direct(x)


def Cf_star(f, p, a, budget=DEFAULT_BUDGET):
    return Analysis(f, p, a, budget).Cstar


def Cf(f, p, a, budget=DEFAULT_BUDGET):
    return Analysis(f, p, a, budget).C


def Lf_body(f, p, a, budget=DEFAULT_BUDGET):
    return Analysis(f, p, a, budget).L_body


def Kf_body(f, p, a, budget=DEFAULT_BUDGET):
    return Analysis(f, p, a, budget).K_body
