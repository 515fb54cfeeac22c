"""Test functions on the half-space and their affine pullbacks.

A test function is ``f(t, x) = c F(s, u)`` with frame coordinates
``s = lam t`` and ``u = B (x - x0)``; ``F`` is a profile that returns its value
and both partial derivatives. The frame travels with the function through
pullbacks, so quadrature can always be laid out in coordinates where the
profile is simple.

Besides the frame, each family records what the integrators need:

* ``kappa``: the exponent of the level sets ``s^kappa + |u|^kappa`` the profile
  is built from;
* ``decay`` / ``grad_decay``: algebraic decay of ``F`` and its gradient in
  ``rho`` (``inf`` for exponential decay or compact support);
* ``t_exp`` / ``r_exp``: ``dF/ds ~ s^t_exp`` near ``s = 0`` and
  ``grad_u F ~ |u|^r_exp`` near ``u = 0``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .convex_geometry import HomogeneousConvexFn, PowerNorm, SeparableSum
from .quadrature import Frame
from .scalar_kernel import Params

__all__ = [
    "TestFunction",
    "FamilyError",
    "sobolev_extremal",
    "gn_extremal",
    "entropy_extremal",
    "nguyen_h_pa",
    "nguyen_h_alpha",
    "indicator_smoothed",
    "gaussian",
    "quartic",
    "affine_pullback",
    "function_from_spec",
    "convex_fn_from_spec",
    "smooth_step",
    "FAMILIES",
]


class FamilyError(ValueError):
    """Invalid family parameters or malformed function spec."""


Profile = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class TestFunction:
    n: int
    family: str
    params: tuple
    profile: Profile = field(compare=False, repr=False)
    frame: Frame = Frame()
    c: float = 1.0
    kappa: float = 2.0
    decay: float = math.inf
    grad_decay: float = math.inf
    support: Optional[float] = None
    t_exp: float = 0.0
    r_exp: float = 0.0
    scheme: str = "polar"
    breaks_t: Optional[tuple] = None
    breaks_r: Optional[tuple] = None
    smooth: bool = True
    angular_refine: int = 1  # multiplier on angle nodes for profiles that vary with direction

    __test__ = False  # not a pytest class

    # ---------------------------------------------------------- evaluation

    def frame_coords(self, t, x):
        t = np.asarray(t, float)
        x = np.atleast_2d(np.asarray(x, float))
        B = self.frame.matrix(self.n)
        s = self.frame.lam * t
        u = (x - self.frame.offset(self.n)) @ B.T
        return s, u

    def evaluate(self, t, x):
        """Return ``(f, df/dt, grad_x f)`` at the points ``(t_i, x_i)``."""
        s, u = self.frame_coords(t, x)
        F, Fs, Fu = self.profile(s, u)
        B = self.frame.matrix(self.n)
        return self.c * F, self.c * self.frame.lam * Fs, self.c * (Fu @ B)

    def __call__(self, t, x):
        s, u = self.frame_coords(t, x)
        return self.c * self.profile(s, u)[0]

    # ------------------------------------------------------------ metadata

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def spec(self) -> dict:
        fr = self.frame
        return {
            "family": self.family,
            "n": self.n,
            **self.param_dict,
            "lambda": fr.lam,
            "B": [list(r) for r in fr.matrix(self.n)],
            "x0": list(fr.offset(self.n)),
            "c": self.c,
        }

    def digest(self) -> str:
        blob = json.dumps(self.spec(), sort_keys=True, default=_jsonable)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def scaled(self, c: float) -> "TestFunction":
        return replace(self, c=self.c * c)

    def translated(self, shift) -> "TestFunction":
        """``f(t, x - shift)``."""
        x0 = self.frame.offset(self.n) + np.asarray(shift, float)
        return replace(self, frame=Frame.make(self.frame.lam, self.frame.matrix(self.n), x0))


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _frame(n, lam, B, x0):
    if lam == 0:
        raise FamilyError("lambda must be non-zero")
    B = np.eye(n - 1) if B is None else np.atleast_2d(np.asarray(B, float))
    if B.shape != (n - 1, n - 1):
        raise FamilyError(f"B must be {(n - 1)}x{(n - 1)}")
    if abs(np.linalg.det(B)) < 1e-14:
        raise FamilyError("B must be invertible")
    x0 = np.zeros(n - 1) if x0 is None else np.asarray(x0, float)
    # profiles are even in s, so the sign of lambda is immaterial on t > 0
    return Frame.make(abs(float(lam)), B, x0)


def _freeze(d):
    return tuple(sorted((k, v) for k, v in d.items() if v is not None))


# ------------------------------------------------------------ radial profiles


def _level_profile(kappa: float, G: Callable, dG: Callable) -> Profile:
    """Profile ``F = G(|s|^kappa + |u|^kappa)`` with analytic partials."""

    def prof(s, u):
        a = np.abs(s)
        r = np.linalg.norm(u, axis=1)
        z = a**kappa + r**kappa
        g, dg = G(z), dG(z)
        Fs = dg * kappa * np.sign(s) * a ** (kappa - 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ru = np.where(r > 0, r ** (kappa - 2), 0.0) if kappa < 2 else r ** (kappa - 2)
        Fu = (dg * kappa * ru)[:, None] * u
        return g, Fs, Fu

    return prof


def sobolev_extremal(n, p, a=0.0, lam=1.0, B=None, x0=None, c=1.0, exponent="q") -> TestFunction:
    """``c (1 + |lam t|^e + |B(x - x0)|^e)^{-(n+a-p)/p}`` with ``e = q``.

    ``exponent="printed"`` uses ``e = (p+1)/p`` instead; it is kept to show
    that this choice is not extremal.
    """
    P = Params(n, p, a).require_sobolev()
    if p <= 1:
        raise FamilyError("the smooth Sobolev extremal needs p > 1")
    e = P.q if exponent == "q" else (p + 1) / p
    k = (P.N - p) / p
    prof = _level_profile(e, lambda z: (1 + z) ** (-k), lambda z: -k * (1 + z) ** (-k - 1))
    dec = e * k
    return TestFunction(
        n, "sobolev", _freeze({"p": p, "a": a, "exponent": exponent}), prof,
        _frame(n, lam, B, x0), c, kappa=e, decay=dec, grad_decay=dec + 1,
        t_exp=e - 1, r_exp=e - 1,
    )


def gn_extremal(n, p, a, alpha, lam=1.0, B=None, x0=None, c=1.0) -> TestFunction:
    """GN extremal: ``(1 + z)^{1/(1-alpha)}`` for alpha > 1, ``(1 - z)_+^{1/(1-alpha)}`` below."""
    P = Params(n, p, a, alpha).require_alpha()
    if p <= 1:
        raise FamilyError("the smooth GN extremal needs p > 1")
    q = P.q
    e = 1.0 / (1.0 - alpha)
    fr = _frame(n, lam, B, x0)
    params = _freeze({"p": p, "a": a, "alpha": alpha})
    if alpha > 1:
        prof = _level_profile(q, lambda z: (1 + z) ** e, lambda z: e * (1 + z) ** (e - 1))
        dec = -q * e
        return TestFunction(n, "gn_a", params, prof, fr, c, kappa=q, decay=dec,
                            grad_decay=dec + 1, t_exp=q - 1, r_exp=q - 1)

    def G(z):
        return np.clip(1 - z, 0, None) ** e

    def dG(z):
        return np.where(z < 1, -e * np.clip(1 - z, 0, None) ** (e - 1), 0.0)

    prof = _level_profile(q, G, dG)
    return TestFunction(n, "gn_b", params, prof, fr, c, kappa=q, support=1.0,
                        t_exp=q - 1, r_exp=q - 1)


def entropy_extremal(n, p, a=0.0, lam=1.0, B=None, x0=None, c=None) -> TestFunction:
    """``c exp(-|lam t|^q - |B(x-x0)|^q)``; ``c=None`` normalises the L^p norm to 1."""
    P = Params(n, p, a)
    if p <= 1:
        raise FamilyError("the smooth entropy extremal needs p > 1")
    q = P.q
    prof = _level_profile(q, lambda z: np.exp(-z), lambda z: -np.exp(-z))
    fr = _frame(n, lam, B, x0)
    f = TestFunction(n, "entropy", _freeze({"p": p, "a": a}), prof, fr, 1.0,
                     kappa=q, t_exp=q - 1, r_exp=q - 1)
    if c is None:
        c = 1.0 / _entropy_profile_norm(n, p, a, q, fr)
    return f.scaled(c)


def _entropy_profile_norm(n, p, a, q, fr: Frame) -> float:
    """||exp(-|s|^q - |u|^q)||_{L^p(t^a)} in closed form (frame included)."""
    N = n + a
    # int t^a exp(-p t^q) dt * int_{R^{n-1}} exp(-p |u|^q) du
    lt = math.lgamma((a + 1) / q) - math.log(q) - (a + 1) / q * math.log(p)
    lx = (
        math.log(2) + 0.5 * (n - 1) * math.log(math.pi) - math.lgamma((n - 1) / 2)
        + math.lgamma((n - 1) / q) - math.log(q) - (n - 1) / q * math.log(p)
    ) if n > 2 else (math.log(2) + math.lgamma(1 / q) - math.log(q) - math.log(p) / q)
    jac = -(1 + a) * math.log(fr.lam) - math.log(abs(np.linalg.det(fr.matrix(n))))
    return math.exp((lt + lx + jac) / p)


def _C_profile(C: HomogeneousConvexFn, G, dG) -> Profile:
    def prof(s, u):
        Y = np.column_stack([s, u])
        z = C(Y)
        g, dg = G(z), dG(z)
        grad = C.grad(Y)
        return g, dg * grad[:, 0], dg[:, None] * grad[:, 1:]

    return prof


def _C_shape(C: HomogeneousConvexFn):
    """(kappa, t_exp, r_exp) making C(s, u) smooth in the polar variables."""
    q = C.degree
    if isinstance(C, SeparableSum):
        return q, q - 1, (q - 1 if isinstance(C.rest, PowerNorm) and C.rest.r == 2 else 0.0)
    if isinstance(C, PowerNorm) and C.r == 2:
        return 2.0, 1.0, 1.0
    return 2.0, 0.0, 0.0


def nguyen_h_pa(n, p, a, C: HomogeneousConvexFn, lam=1.0, x0=None, c=1.0) -> TestFunction:
    """``c (1 + C(lam t, lam (x - x0)))^{-(n+a-p)/p}``."""
    P = Params(n, p, a).require_sobolev()
    _check_C(C, n, P)
    k = (P.N - p) / p
    kap, te, re = _C_shape(C)
    dec = C.degree * k
    prof = _C_profile(C, lambda z: (1 + z) ** (-k), lambda z: -k * (1 + z) ** (-k - 1))
    return TestFunction(n, "nguyen_h_pa", _freeze({"p": p, "a": a, "C": _C_tag(C)}), prof,
                        Frame.make(abs(lam), np.eye(n - 1) * abs(lam), x0), c, kappa=kap, decay=dec, grad_decay=dec + 1, t_exp=te, r_exp=re)


def nguyen_h_alpha(n, p, a, alpha, C: HomogeneousConvexFn, lam=1.0, x0=None, c=1.0) -> TestFunction:
    """``c (1 + (alpha - 1) C(lam t, lam (x - x0)))_+^{1/(1-alpha)}``."""
    P = Params(n, p, a, alpha).require_alpha()
    _check_C(C, n, P)
    e = 1.0 / (1.0 - alpha)
    kap, te, re = _C_shape(C)
    fr = Frame.make(abs(lam), np.eye(n - 1) * abs(lam), x0)
    tag = _freeze({"p": p, "a": a, "alpha": alpha, "C": _C_tag(C)})
    if alpha > 1:
        prof = _C_profile(C, lambda z: (1 + (alpha - 1) * z) ** e,
                          lambda z: (alpha - 1) * e * (1 + (alpha - 1) * z) ** (e - 1))
        dec = -C.degree * e
        return TestFunction(n, "nguyen_h_alpha", tag, prof, fr, c, kappa=kap, decay=dec,
                            grad_decay=dec + 1, t_exp=te, r_exp=re)
    # support {C <= 1/(1-alpha)} lies in the rho-ball of radius R
    cmin = _C_min_on_level(C, kap)
    R = (1.0 / ((1 - alpha) * cmin)) ** (1.0 / C.degree)

    def G(z):
        return np.clip(1 - (1 - alpha) * z, 0, None) ** e

    def dG(z):
        w = 1 - (1 - alpha) * z
        return np.where(w > 0, -(1 - alpha) * e * np.clip(w, 0, None) ** (e - 1), 0.0)

    prof = _C_profile(C, G, dG)
    return TestFunction(n, "nguyen_h_alpha", tag, prof, fr, c, kappa=kap, support=R,
                        t_exp=te, r_exp=re, smooth=False)


def _C_min_on_level(C, kappa):
    # min of C over {|s|^kappa + |u|^kappa = 1}, sampled densely
    d = C.dim
    rng = np.random.Generator(np.random.Philox(key=7))
    Y = rng.standard_normal((20000, d))
    Y = np.concatenate([Y, np.eye(d), -np.eye(d)])
    lev = (np.abs(Y[:, 0]) ** kappa + np.linalg.norm(Y[:, 1:], axis=1) ** kappa) ** (1 / kappa)
    Y = Y / lev[:, None]
    return float(np.min(C(Y))) * (1 - 1e-3)


def _check_C(C, n, P):
    if C.dim != n:
        raise FamilyError(f"C must live on R^{n}")
    if abs(C.degree - P.q) > 1e-12:
        raise FamilyError(f"C must be homogeneous of degree q = {P.q}")
    if not hasattr(C, "grad"):
        raise FamilyError("C needs an analytic gradient")


def _C_tag(C):
    if isinstance(C, PowerNorm):
        return f"power_norm(r={C.r},coef={C.coef})"
    if isinstance(C, SeparableSum):
        return f"separable(coef={C.coef},{_C_tag(C.rest)})"
    return type(C).__name__


def smooth_step(z):
    """C-infinity step: 0 for z <= 0, 1 for z >= 1; returns (value, derivative)."""
    z = np.asarray(z, float)
    zi = np.clip(z, 1e-300, 1 - 1e-16)
    with np.errstate(over="ignore", under="ignore"):
        a = np.where(z > 0, np.exp(-1.0 / zi), 0.0)
        b = np.where(z < 1, np.exp(-1.0 / (1.0 - zi)), 0.0)
        tot = a + b
        val = a / tot
        # a / z^2 in log form: both factors underflow near z = 0
        da = np.where(z > 0, np.exp(-1.0 / zi - 2 * np.log(zi)), 0.0)
        db = np.where(z < 1, -np.exp(-1.0 / (1.0 - zi) - 2 * np.log1p(-zi)), 0.0)
        der = (da * b - a * db) / tot**2
    val = np.where(z >= 1, 1.0, np.where(z <= 0, 0.0, val))
    der = np.where((z >= 1) | (z <= 0), 0.0, der)
    return val, der


def indicator_smoothed(n, eps, shape="cylinder", lam=1.0, B=None, x0=None, c=1.0) -> TestFunction:
    """Mollified indicator of the unit cylinder (or ball) in frame coordinates.

    Equals ``c`` where ``|s| <= 1 - eps`` and ``|u| <= 1 - eps`` (cylinder) and
    vanishes outside the closed unit body, with a C-infinity transition of
    width ``eps``.
    """
    if not 0 < eps < 1:
        raise FamilyError("eps must lie in (0, 1)")
    fr = _frame(n, lam, B, x0)
    tag = _freeze({"eps": eps, "shape": shape})
    if shape == "cylinder":
        def prof(s, u):
            a = np.abs(s)
            r = np.linalg.norm(u, axis=1)
            gt, dgt = smooth_step((1 - a) / eps)
            gr, dgr = smooth_step((1 - r) / eps)
            Fs = -np.sign(s) * dgt / eps * gr
            with np.errstate(invalid="ignore", divide="ignore"):
                Fu = (-gt * dgr / eps / np.where(r > 0, r, 1.0))[:, None] * u
            return gt * gr, Fs, Fu

        br = (0.0, 1.0 - eps, 1.0)
        return TestFunction(n, "indicator_smoothed", tag, prof, fr, c, kappa=2.0, support=2.0 ** 0.5,
                            scheme="cylindrical", breaks_t=br, breaks_r=br, smooth=False)
    if shape == "ball":
        def prof(s, u):
            r2 = s * s + np.einsum("ij,ij->i", u, u)
            rho = np.sqrt(r2)
            g, dg = smooth_step((1 - rho) / eps)
            with np.errstate(invalid="ignore", divide="ignore"):
                fac = np.where(rho > 0, -dg / eps / rho, 0.0)
            return g, fac * s, fac[:, None] * u

        return TestFunction(n, "indicator_smoothed", tag, prof, fr, c, kappa=2.0, support=1.0,
                            t_exp=1.0, r_exp=1.0, smooth=False)
    raise FamilyError(f"unknown indicator shape {shape!r}")


def gaussian(n, lam=1.0, B=None, x0=None, c=1.0, center=None, widths=None) -> TestFunction:
    """``c exp(-|lam t|^2 - |B(x - x0)|^2)``; ``center``/``widths`` give a diagonal B."""
    if widths is not None:
        B = np.diag(1.0 / np.asarray(widths, float))
    if center is not None:
        x0 = center
    prof = _level_profile(2.0, lambda z: np.exp(-z), lambda z: -np.exp(-z))
    return TestFunction(n, "gaussian", (), prof, _frame(n, lam, B, x0), c,
                        kappa=2.0, t_exp=1.0, r_exp=1.0)


def quartic(n, lam=1.0, B=None, x0=None, c=1.0) -> TestFunction:
    """``c exp(-|lam t|^2 - ||B(x - x0)||_4^2)``: L_f is not an ellipsoid when p != 2.

    The l^4 norm enters squared so the profile stays 2-homogeneous in the
    polar variables.
    """

    def prof(s, u):
        u4 = np.sum(u**4, axis=1)
        m = np.sqrt(u4)
        F = np.exp(-s * s - m)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(m > 0, 2.0 / np.where(m > 0, m, 1.0), 0.0)
        return F, -2 * s * F, (-(g * F)[:, None]) * u**3

    return TestFunction(n, "quartic", (), prof, _frame(n, lam, B, x0), c,
                        kappa=2.0, t_exp=1.0, r_exp=1.0, angular_refine=3)


FAMILIES = {
    "sobolev": sobolev_extremal,
    "sobolev_extremal": sobolev_extremal,
    "gn_a": gn_extremal,
    "gn_b": gn_extremal,
    "entropy": entropy_extremal,
    "entropy_extremal": entropy_extremal,
    "nguyen_h_pa": nguyen_h_pa,
    "nguyen_h_alpha": nguyen_h_alpha,
    "indicator_smoothed": indicator_smoothed,
    "gaussian": gaussian,
    "quartic": quartic,
}


def affine_pullback(f: TestFunction, lam: float, B) -> TestFunction:
    """``f_A(t, x) = f(lam t, B x)`` for ``A = diag(lam, B)`` with ``lam > 0``."""
    if not lam > 0:
        raise FamilyError("pullback needs lambda > 0")
    B = np.atleast_2d(np.asarray(B, float))
    if B.shape != (f.n - 1, f.n - 1):
        raise FamilyError("B has the wrong shape")
    if abs(np.linalg.det(B)) < 1e-14:
        raise FamilyError("B must be invertible")
    fr = f.frame.compose(lam, B)
    sup = f.support
    return replace(f, frame=fr, support=sup)


def convex_fn_from_spec(n, spec):
    """``{"type": "power_norm" | "separable", "degree": q, ...}`` on R^n."""
    kind = spec.get("type", "power_norm")
    q = float(spec["degree"])
    if kind == "power_norm":
        return PowerNorm(int(spec.get("dim", n)), q, float(spec.get("coef", 1.0)),
                         spec.get("matrix"), float(spec.get("r", 2.0)))
    if kind == "separable":
        rest = convex_fn_from_spec(n - 1, {**spec["rest"], "degree": q, "dim": n - 1})
        return SeparableSum(float(spec.get("coef", 1.0)), rest)
    raise FamilyError(f"unknown C type {kind!r}")


def function_from_spec(spec: dict) -> TestFunction:
    """Build a test function from its JSON description."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise FamilyError("function spec needs a 'family' field")
    fam = spec["family"]
    if fam not in FAMILIES:
        raise FamilyError(f"unknown family {fam!r}")
    try:
        n = int(spec["n"])
        common = dict(lam=float(spec.get("lambda", 1.0)), x0=spec.get("x0"), c=spec.get("c", 1.0))
        if fam in ("sobolev", "sobolev_extremal"):
            return sobolev_extremal(n, float(spec["p"]), float(spec.get("a", 0.0)), B=spec.get("B"),
                                    exponent=spec.get("exponent", "q"), **common)
        if fam in ("gn_a", "gn_b"):
            return gn_extremal(n, float(spec["p"]), float(spec.get("a", 0.0)), float(spec["alpha"]),
                               B=spec.get("B"), **common)
        if fam in ("entropy", "entropy_extremal"):
            common["c"] = spec.get("c")
            return entropy_extremal(n, float(spec["p"]), float(spec.get("a", 0.0)), B=spec.get("B"), **common)
        if fam == "nguyen_h_pa":
            C = convex_fn_from_spec(n, spec["C"])
            return nguyen_h_pa(n, float(spec["p"]), float(spec.get("a", 0.0)), C, **common)
        if fam == "nguyen_h_alpha":
            C = convex_fn_from_spec(n, spec["C"])
            return nguyen_h_alpha(n, float(spec["p"]), float(spec.get("a", 0.0)), float(spec["alpha"]), C, **common)
        if fam == "indicator_smoothed":
            return indicator_smoothed(n, float(spec.get("eps", 0.05)), spec.get("shape", "cylinder"),
                                      B=spec.get("B"), **common)
        if fam == "gaussian":
            return gaussian(n, B=spec.get("B"), center=spec.get("center"), widths=spec.get("widths"), **common)
        if fam == "quartic":
            return quartic(n, B=spec.get("B"), **common)
    except KeyError as e:
        raise FamilyError(f"function spec for {fam!r} is missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, FamilyError):
            raise
        raise FamilyError(f"bad function spec for {fam!r}: {e}") from None
    raise FamilyError(f"unknown family {fam!r}")
