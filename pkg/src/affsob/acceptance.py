"""The acceptance checks, shared by ``affsob selftest`` and the test suite.

Each check returns a :class:`CheckResult` made of bounded rows. Wall time is
kept on the result but never serialised, so two runs with the same seed
produce identical output.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import sharp_constants as sc
from .convex_geometry import (
    GaugeBody,
    Polygon,
    PowerNorm,
    bp_check,
    legendre_transform,
    random_symmetric_polygon,
)
from .functionals import DEFAULT_BUDGET, Budget
from .functions import (
    entropy_extremal,
    gaussian,
    gn_extremal,
    quartic,
    sobolev_extremal,
)
from .scalar_kernel import Params, weighted_halfball_volume
from .verifier import (
    battery,
    random_gl_plus,
    structural_identities,
    verify_corollary,
    verify_entropy,
    verify_gn,
    verify_invariance,
    verify_p1_mollified,
    verify_sobolev,
    verify_stronger,
)

__all__ = ["Row", "CheckResult", "CHECKS", "run_checks", "DEFAULT_SEED"]

DEFAULT_SEED = 20240611

CONSTANT_NS = (2, 3, 4)
CONSTANT_PS = (1.25, 1.5, 2.0, 3.0)
CONSTANT_AS = (0.0, 0.5, 1.0, 2.0)
CONSTANT_ALPHAS = (0.5, 1.5, 2.0)

EXTREMAL_GRID = tuple((n, p, a) for n in (2, 3) for p in (1.5, 2.0) for a in (0.0, 1.0) if p < n + a)
STRUCTURE_CASES = ((2, 1.5, 0.0), (2, 3.0, 1.0), (3, 1.5, 0.0), (3, 2.0, 1.0))
STRUCTURE_CASES_QUICK = ((2, 1.5, 0.0), (3, 2.0, 1.0))
INVARIANCE_CASES = (  # (n, p, a, alpha, family)
    (2, 1.5, 0.5, 2.0, "gaussian"),
    (3, 2.0, 1.0, 1.5, "gaussian"),
    (3, 1.5, 0.0, 0.5, "quartic"),
)
P1_CASES = ((2, 0.0), (2, 1.0), (3, 0.0))


@dataclass(frozen=True)
class Row:
    case: str
    metric: str
    value: float
    bound: float
    sense: str = "<"  # "<", "<=" or ">="

    @property
    def ok(self) -> bool:
        v, b = self.value, self.bound
        if not math.isfinite(v):
            return False
        if self.sense == "<":
            return v < b
        if self.sense == "<=":
            return v <= b
        return v >= b

    def to_dict(self) -> dict:
        return {"case": self.case, "metric": self.metric, "value": self.value,
                "bound": self.bound, "sense": self.sense, "ok": self.ok}


@dataclass(frozen=True)
class CheckResult:
    name: str
    title: str
    rows: tuple
    notes: tuple = ()
    seconds: float = field(default=0.0, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.ok for r in self.rows)

    def line(self) -> str:
        bad = [r for r in self.rows if not r.ok]
        tag = "PASS" if self.passed else "FAIL"
        if bad:
            r = bad[0]
            detail = f"{len(bad)}/{len(self.rows)} rows out of bounds, first {r.case} {r.metric}={r.value:.3g} (need {r.sense} {r.bound:g})"
        else:
            detail = f"{len(self.rows)} rows within bounds"
        return f"{tag}  {self.name}: {self.title} [{detail}]"

    def to_dict(self) -> dict:
        return {"name": self.name, "title": self.title, "pass": self.passed,
                "rows": [r.to_dict() for r in self.rows], "notes": list(self.notes)}


def _timed(fn):
    def run(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        return CheckResult(res.name, res.title, res.rows, res.notes, time.perf_counter() - t0)

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def _rng(seed, *key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def _tag(**kw):
    return ",".join(f"{k}={v!r}" for k, v in kw.items())


# ------------------------------------------------------------------ constants


@_timed
def constant_forms(seed: int = DEFAULT_SEED, quick: bool = False) -> CheckResult:
    """Defining-product and simplified forms of every affine constant agree."""
    rows = []
    for n in CONSTANT_NS:
        for p in CONSTANT_PS:
            for a in CONSTANT_AS:
                P = Params(n, p, a)
                if not P.sobolev_ok:
                    continue
                for name in ("R_cal", "S_cal", "K_cal", "L_cal"):
                    cv = sc.affine_constant(name, P)
                    rows.append(Row(_tag(n=n, p=p, a=a), name, cv.rel_gap, 1e-10))
                for al in CONSTANT_ALPHAS:
                    if al >= P.alpha_max:
                        continue
                    name = "G_cal" if al > 1 else "N_cal"
                    cv = sc.affine_constant(name, P.with_(alpha=al))
                    rows.append(Row(_tag(n=n, p=p, a=a, alpha=al), name, cv.rel_gap, 1e-10))
    return CheckResult("constant_forms", "two forms of each affine constant agree", tuple(rows))


@_timed
def constant_identities(seed: int = DEFAULT_SEED, quick: bool = False) -> CheckResult:
    """Cross-family identities between the Euclidean constants."""
    rows, notes = [], []
    for n in CONSTANT_NS:
        for a in CONSTANT_AS:
            N = n + a
            V = weighted_halfball_volume(n, a)
            for p in CONSTANT_PS:
                if not p < N:
                    continue
                q = p / (p - 1)
                lhs = sc.nguyen_sobolev_constant(n, p, a) * p ** (-1 / p) * q ** (-1 / q) * V ** (-1 / N)
                rhs = sc.crs_constant(n, p, a)
                rows.append(Row(_tag(n=n, p=p, a=a), "nguyen_vs_crs", abs(lhs / rhs - 1), 1e-10))
            if N > 2:
                g = abs(sc.crs_constant(n, 2.0, a) / sc.bgl_constant(n, a) - 1)
                rows.append(Row(_tag(n=n, a=a), "crs_p2_vs_bgl", g, 1e-10))
            # printed / derived half-ball volume should be pi^{-(a+1)/2}
            ratio = weighted_halfball_volume(n, a, "printed") / V
            expo = math.log(ratio) / math.log(math.pi)
            rows.append(Row(_tag(n=n, a=a), "printed_volume_pi_exponent_gap", abs(expo + (a + 1) / 2), 1e-12))
            notes.append(f"n={n},a={a!r}: printed/derived half-ball volume = pi^{expo:.12f}")
    return CheckResult("constant_identities", "Euclidean constants agree across families", tuple(rows), tuple(notes))


# ------------------------------------------------------------- convex bodies


def _ellipse_gauge(M):
    return lambda Y: np.linalg.norm(Y @ M.T, axis=1)


@_timed
def busemann_petty(seed: int = DEFAULT_SEED, quick: bool = False) -> CheckResult:
    """vol(Gamma_p K) >= vol(K) on random polygons, equality on ellipses."""
    rng = _rng(seed, 3)
    count = 50 if quick else 200
    rows = []
    worst = {1: math.inf, 2: math.inf, 3: math.inf}
    for _ in range(count):
        K = random_symmetric_polygon(rng)
        for p in (1, 2, 3):
            worst[p] = min(worst[p], bp_check(K, p)["ratio"])
    for p, r in worst.items():
        rows.append(Row(_tag(polygons=count, p=p), "min_ratio", r, 1 - 1e-9, ">="))
    for i in range(3 if quick else 8):
        A = rng.standard_normal((2, 2)) + 1.5 * np.eye(2)
        E = GaugeBody(2, _ellipse_gauge(A))  # numeric route, no closed form
        for p in (1, 2, 3):
            rows.append(Row(_tag(ellipse=i, p=p), "ratio_gap", abs(bp_check(E, p)["ratio"] - 1), 1e-5))
    sq = Polygon([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    vg = sq.centroid_body(2).volume()
    rows.append(Row("square,p=2", "volume_gap", abs(vg - 4 * math.pi / 3), 1e-6))
    return CheckResult("busemann_petty", "L_p centroid inequality", tuple(rows))


@_timed
def centroid_of_ball(seed: int = DEFAULT_SEED, quick: bool = False) -> CheckResult:
    """Gamma_p of the Euclidean ball is the ball (numeric moment route)."""
    rng = _rng(seed, 4)
    rows = []
    for d in (1, 2, 3):
        B = GaugeBody(d, lambda Y: np.linalg.norm(Y, axis=1))
        if d == 1:
            U = np.array([[1.0], [-1.0]])
        else:
            U = rng.standard_normal((12 if d == 3 else 40, d))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
        for p in (1, 2, 3):
            h = B.centroid_body(p).support(U)
            rows.append(Row(_tag(d=d, p=p), "support_gap", float(np.max(np.abs(h - 1))), 1e-6 if d <= 2 else 1e-4))
    return CheckResult("centroid_of_ball", "Gamma_p B = B", tuple(rows))


# --------------------------------------------------------- function battery


_STRUCT_CACHE: dict = {}


def _structure_battery(seed, quick):
    """(case tag, function, params) for the structural battery, deduplicated."""
    out = []
    for n, p, a in (STRUCTURE_CASES_QUICK if quick else STRUCTURE_CASES):
        seen = set()
        for fam, f, _checks in battery(n, p, a, seed=seed):
            if f.digest() in seen:
                continue
            seen.add(f.digest())
            out.append((_tag(n=n, p=p, a=a) + "," + fam, f, Params(n, p, a)))
    return out


def _structure(seed, quick, budget):
    key = (seed, quick, budget)
    if key not in _STRUCT_CACHE:
        _STRUCT_CACHE[key] = [(tag, f, P, structural_identities(f, P, budget=budget))
                              for tag, f, P in _structure_battery(seed, quick)]
    return _STRUCT_CACHE[key]


@_timed
def legendre_machinery(seed: int = DEFAULT_SEED, quick: bool = False, budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """Numeric Legendre transforms: power norms, product form, biconjugation."""
    rng = _rng(seed, 5)
    rows = []
    for d in (2, 3):
        for q in (1.5, 2.0, 3.0, 4.0):
            p = q / (q - 1)
            Y = rng.standard_normal((100, d)) * rng.uniform(0.2, 3.0, (100, 1))
            got = legendre_transform(PowerNorm(d, q, 1 / q), numeric=True)(Y)
            want = np.linalg.norm(Y, axis=1) ** p / p
            rows.append(Row(_tag(d=d, q=q), "conjugate_gap", float(np.max(np.abs(got / want - 1))), 1e-6))
    for tag, _f, _P, s in _structure(seed, quick, budget):
        rows.append(Row(tag, "product_form", s["product_form"], 1e-4))
        rows.append(Row(tag, "biconjugation", s["biconjugation"], 1e-4))
    return CheckResult("legendre_machinery", "Legendre transforms", tuple(rows))


@_timed
def structural_identity_residuals(seed: int = DEFAULT_SEED, quick: bool = False,
                                  budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """Volume, slice and energy identities across the battery."""
    rows, notes = [], []
    for tag, _f, P, s in _structure(seed, quick, budget):
        rows.append(Row(tag, "volume_identity", s["volume_identity"], 1e-8))
        if P.n == 3:
            rows.append(Row(tag, "lemma_3_6", s["lemma_3_6"], 1e-3))
        rows.append(Row(tag, "first_compute_D", s["first_compute_D"], 1e-4))
        rows.append(Row(tag, "first_compute_C", s["first_compute_C"], 1e-4))
        notes.append(f"{tag}: slice_scaling={s['slice_scaling']:.3g} slice_vs_direct={s['slice_vs_direct']:.3g}")
    return CheckResult("structural_identities", "structural identities", tuple(rows), tuple(notes))


@_timed
def extremal_equality(seed: int = DEFAULT_SEED, quick: bool = False, budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """Both sides agree at the extremal of every inequality."""
    rows = []
    grid = EXTREMAL_GRID[::2] if quick else EXTREMAL_GRID
    for n, p, a in grid:
        rng = _rng(seed, 7, n, int(p * 1000), int(a * 1000))
        lam, B = random_gl_plus(n, rng, 1.4)
        x0 = rng.uniform(-0.5, 0.5, n - 1)
        P = Params(n, p, a)
        t = _tag(n=n, p=p, a=a)
        r = verify_sobolev(sobolev_extremal(n, p, a, lam, B, x0), P, budget)
        rows.append(Row(t, "sobolev_ratio_gap", abs(r.ratio - 1), 5e-3))
        lam_c = abs(float(np.linalg.det(B))) ** (1 / (n - 1))
        r = verify_corollary(sobolev_extremal(n, p, a, lam_c, B, x0), P, budget)
        rows.append(Row(t, "corollary_ratio_gap", abs(r.ratio - 1), 5e-3))
        for al in (2.0, 0.5):
            if al >= P.alpha_max:
                continue
            r = verify_gn(gn_extremal(n, p, a, al, lam, B, x0), P.with_(alpha=al), None, budget)
            rows.append(Row(t + f",alpha={al!r}", "gn_ratio_gap", abs(r.ratio - 1), 1e-2))
        r = verify_entropy(entropy_extremal(n, p, a, lam, B, x0), P, budget)
        rows.append(Row(t, "entropy_deficit", abs(r.deficit), 1e-2))
    return CheckResult("extremal_equality", "equality at extremals", tuple(rows))


@_timed
def strictness_and_domination(seed: int = DEFAULT_SEED, quick: bool = False,
                              budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """Gaussians are strict; the affine energy never exceeds the full gradient norm."""
    rows = []
    grid = EXTREMAL_GRID[::2] if quick else EXTREMAL_GRID
    for n, p, a in grid:
        rng = _rng(seed, 8, n, int(p * 1000), int(a * 1000))
        lam, B = random_gl_plus(n, rng, 1.4)
        x0 = rng.uniform(-0.5, 0.5, n - 1)
        r = verify_sobolev(gaussian(n, lam, B, x0), Params(n, p, a), budget)
        rows.append(Row(_tag(n=n, p=p, a=a), "gaussian_sobolev_ratio", r.ratio, 1 + 1e-3, ">="))
    for tag, f, P, _s in _structure(seed, quick, budget):
        r = verify_stronger(f, P, budget)
        rows.append(Row(tag, "stronger_slack", r.ratio - 1, -1e-8, ">="))
        if P.n == 2:
            rows.append(Row(tag, "stronger_gap_n2", abs(r.ratio - 1), 1e-10, "<="))
    return CheckResult("strictness_and_domination", "strictness and domination", tuple(rows))


@_timed
def affine_invariance(seed: int = DEFAULT_SEED, quick: bool = False, budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """Transformation laws and invariant ratios under random GL_{n,+} maps."""
    rows = []
    count = 4 if quick else 20
    for n, p, a, al, fam in INVARIANCE_CASES:
        rng = _rng(seed, 9, n, int(p * 1000), int(a * 1000))
        lam, B = random_gl_plus(n, rng, 1.3)
        x0 = rng.uniform(-0.5, 0.5, n - 1)
        f = (gaussian if fam == "gaussian" else quartic)(n, lam, B, x0)
        rep = verify_invariance(f, Params(n, p, a, al), seed=seed, count=count, budget=budget)
        t = _tag(n=n, p=p, a=a, alpha=al) + "," + fam
        for k in rep.counted:
            vals = [row[k] for row in rep.rows if k in row]
            if vals:
                rows.append(Row(t, k, max(vals), 1e-4))
    return CheckResult("affine_invariance", f"affine invariance ({count} maps per case)", tuple(rows))


@_timed
def p1_limits(seed: int = DEFAULT_SEED, quick: bool = False, budget: Budget = DEFAULT_BUDGET) -> CheckResult:
    """GN limits meet the Sobolev limit at p = 1; mollified indicators approach equality."""
    rows = []
    for n in CONSTANT_NS:
        for a in CONSTANT_AS:
            s = sc.limit_p_to_1("S_cal", n, a)
            for name, al in (("G_cal", 2.0), ("N_cal", 0.5)):
                g = sc.limit_p_to_1(name, n, a, al)
                rows.append(Row(_tag(n=n, a=a, alpha=al), name + "_limit_gap", abs(g.value / s.value - 1), 1e-3))
    for n, a in (P1_CASES[:2] if quick else P1_CASES):
        r = verify_p1_mollified(n, a, budget=budget)
        rows.append(Row(_tag(n=n, a=a), "p1_ratio_gap", abs(r.rhs - 1), 2e-2))
    return CheckResult("p1_limits", "p -> 1 limits", tuple(rows))


CHECKS: tuple = (
    constant_forms,
    constant_identities,
    busemann_petty,
    centroid_of_ball,
    legendre_machinery,
    structural_identity_residuals,
    extremal_equality,
    strictness_and_domination,
    affine_invariance,
    p1_limits,
)


def run_checks(seed: int = DEFAULT_SEED, quick: bool = False,
               progress: Optional[Callable[[CheckResult], None]] = None) -> tuple:
    """Run every check in order; ``progress`` sees each result as it lands."""
    out = []
    for chk in CHECKS:
        res = chk(seed=seed, quick=quick)
        if progress:
            progress(res)
        out.append(res)
    return tuple(out)
