"""Sharp constants for the weighted and affine weighted inequalities.

Each affine constant is evaluated twice: once as the product of the factors
it is built from (``defining``) and once from an independently transcribed
closed form (``simplified``). The two must agree to rounding.

Conventions
-----------
``convention="sharp"`` (default) uses Gagliardo-Nirenberg and entropy
constants normalised the same way as the Sobolev constant ``S(n,a,p)``, i.e.
carrying the factor ``(p^{1/p} q^{1/q})^theta`` (GN) or ``p q^{p/q}``
(entropy). These are the values attained by the extremal profiles.
``convention="printed"`` omits that factor.

``theta_form="derived"`` (default) uses the dilation-consistent exponent
``(n+a)(1-alpha) / ((alpha p + 1 - alpha)(n + a - alpha(n + a - p)))`` for the
``alpha < 1`` case; ``theta_form="printed"`` drops ``a`` from the last factor.
The two agree when ``a = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .scalar_kernel import (
    Params,
    a_np,
    c_np,
    log_gamma,
    weighted_halfball_volume,
)

__all__ = [
    "ConstantValue",
    "GNExponents",
    "LimitResult",
    "AFFINE_NAMES",
    "REL_GAP_FLAG",
    "bgl_constant",
    "crs_constant",
    "nguyen_sobolev_constant",
    "gn_exponents",
    "nguyen_gn_constant",
    "nguyen_entropy_constant",
    "affine_constant",
    "affine_value",
    "limit_p_to_1",
    "sobolev_constant_p1",
    "euclidean_unit_level_volume",
]

AFFINE_NAMES = ("R_cal", "S_cal", "K_cal", "G_cal", "N_cal", "L_cal")
REL_GAP_FLAG = 1e-10
LIMIT_GAP_FLAG = 1e-5

_LOG_PI = math.log(math.pi)
_CONVENTIONS = ("sharp", "printed")
_THETA_FORMS = ("derived", "printed")


def _check_convention(convention, theta_form="derived"):
    if convention not in _CONVENTIONS:
        raise ValueError(f"convention must be one of {_CONVENTIONS}")
    if theta_form not in _THETA_FORMS:
        raise ValueError(f"theta_form must be one of {_THETA_FORMS}")


def _conj(p):
    return p / (p - 1.0)


def _require_p_range(n, p, a):
    if not (1 < p < n + a):
        raise ValueError(f"need 1 < p < n + a, got p={p}, n+a={n + a}")


# ----------------------------------------------------------------- classical


def bgl_constant(n: int, a: float) -> float:
    """Sharp constant of the weighted L^2 Sobolev inequality on the half-space."""
    N = n + a
    if n < 2 or a < 0 or N <= 2:
        raise ValueError("need n >= 2, a >= 0 and n + a > 2")
    log_bracket = (
        math.log(2.0)
        + 0.5 * (1 + a) * _LOG_PI
        + log_gamma(N)
        - log_gamma(0.5 * (1 + a))
        - log_gamma(0.5 * N)
    )
    return math.exp(-0.5 * math.log(math.pi * N * (N - 2)) + log_bracket / N)


def crs_constant(n: int, p: float, a: float, volume_mode: str = "closed_form") -> float:
    """Sharp constant of the weighted L^p Sobolev inequality (1 < p < n + a)."""
    _require_p_range(n, p, a)
    N = n + a
    vol = weighted_halfball_volume(n, a, mode=volume_mode)
    if isinstance(vol, tuple):
        vol = vol[0]
    first = ((p - 1) * math.log(p - 1) - math.log(N) - (p - 1) * math.log(N - p)) / p
    bracket = (
        log_gamma(N)
        - log_gamma(N * (p - 1) / p + 1)
        - log_gamma(N / p)
        - math.log(vol)
    )
    return math.exp(first + bracket / N)


def nguyen_sobolev_constant(n: int, p: float, a: float) -> float:
    """Sharp constant S(n,a,p) of the norm-dependent weighted Sobolev inequality."""
    _require_p_range(n, p, a)
    N = n + a
    q = _conj(p)
    log_s = (
        math.log(p) / p
        + math.log(q) / q
        + ((p - 1) * math.log(p - 1) - math.log(N) - (p - 1) * math.log(N - p)) / p
        - (log_gamma(N / p) + log_gamma(N * (p - 1) / p + 1) - log_gamma(N)) / N
    )
    return math.exp(log_s)


def euclidean_unit_level_volume(n: int, p: float, a: float) -> float:
    """Weighted volume of {t > 0, |t|^q + |x|^q <= 1} in R_+ x R^{n-1}.

    Obtained from generalised polar coordinates adapted to the l^q level
    sets, which turn the integral into a Beta function.
    """
    q = _conj(p)
    N = n + a
    log_sphere = math.log(2.0) + 0.5 * (n - 1) * _LOG_PI - log_gamma(0.5 * (n - 1))
    log_beta = (
        log_gamma((1 + a) / q) + log_gamma((n - 1) / q) - log_gamma(N / q)
    )
    return math.exp(log_sphere + log_beta - math.log(q * N))


# ------------------------------------------------------------------ exponents


class GNExponents(NamedTuple):
    theta: float
    beta_or_gamma: float
    case: str


def _theta_a(n, p, a, al):
    N = n + a
    return N * (al - 1) / (al * (N * p - (al * p + 1 - al) * (N - p)))


def _theta_b(n, p, a, al, theta_form="derived"):
    N = n + a
    if theta_form == "printed":
        last = n - al * (n - p)
    else:
        last = N - al * (N - p)
    return N * (1 - al) / ((al * p + 1 - al) * last)


def _case_of(params: Params, case: Optional[str]) -> str:
    if case is None:
        if params.alpha is None:
            raise ValueError("alpha is required")
        return "a" if params.alpha > 1 else "b"
    if case not in ("a", "b"):
        raise ValueError("case must be 'a' or 'b'")
    return case


def gn_exponents(params: Params, case: Optional[str] = None, theta_form: str = "derived") -> GNExponents:
    """theta and beta (case a, alpha > 1) or gamma (case b, alpha < 1)."""
    _check_convention("sharp", theta_form)
    case = _case_of(params, case)
    params.require_alpha(case)
    n, p, a, al = params.n, params.p, params.a, params.alpha
    if case == "a":
        theta = _theta_a(n, p, a, al)
        other = (al * (p - 1) + 1) / (al - 1)
    else:
        theta = _theta_b(n, p, a, al, theta_form)
        other = (al * (p - 1) + 1) / (1 - al)
    if not (0 < theta < 1):
        raise ValueError(f"theta = {theta} outside (0, 1) for {params}")
    return GNExponents(theta, other, case)


# ------------------------------------------------------------ Nguyen GN / log


def _log_G_printed(n, p, a, al, theta):
    N = n + a
    q = _conj(p)
    beta = (al * (p - 1) + 1) / (al - 1)
    if not q * beta > N:
        raise ValueError("Gamma argument beta - (n+a)/q must be positive")
    return (
        theta / p * (math.log(beta) + p * math.log(al - 1) - math.log(N) - (p - 1) * math.log(q))
        + (math.log(q * beta - N) - math.log(q * beta)) / (al * p)
        + theta / N * (log_gamma(beta) - log_gamma(beta - N / q) - log_gamma(N / q + 1))
    )


def _log_N_printed(n, p, a, al, theta):
    N = n + a
    q = _conj(p)
    gam = (al * (p - 1) + 1) / (1 - al)
    return (
        theta / p * (math.log(gam) + p * math.log(1 - al) - math.log(N) - (p - 1) * math.log(q))
        + (1 - theta) / (al * p) * (math.log(q * gam) - math.log(q * gam + N))
        + theta / N * (log_gamma(gam + 1 + N / q) - log_gamma(gam + 1) - log_gamma(N / q + 1))
    )


def _log_sharp_factor(p):
    q = _conj(p)
    return math.log(p) / p + math.log(q) / q


def nguyen_gn_constant(
    params: Params,
    case: Optional[str] = None,
    convention: str = "sharp",
    theta_form: str = "derived",
) -> float:
    """G_{n,a}(alpha,p) for case ``a`` or N_{n,a}(alpha,p) for case ``b``."""
    _check_convention(convention, theta_form)
    ex = gn_exponents(params, case, theta_form)
    n, p, a, al = params.n, params.p, params.a, params.alpha
    if ex.case == "a":
        log_val = _log_G_printed(n, p, a, al, ex.theta)
    else:
        log_val = _log_N_printed(n, p, a, al, ex.theta)
    if convention == "sharp":
        log_val += ex.theta * _log_sharp_factor(p)
    return math.exp(log_val)


def _log_L_printed(n, p, a):
    N = n + a
    q = _conj(p)
    return (
        math.log(p / N)
        + (p - 1) * (math.log(p - 1) - 1.0)
        - p / N * log_gamma((N + q) / q)
    )


def nguyen_entropy_constant(n: int, p: float, a: float, convention: str = "sharp") -> float:
    """L_{n,a}(p) of the norm-dependent weighted entropy inequality (p > 1)."""
    _check_convention(convention)
    if not p > 1:
        raise ValueError("entropy constant needs p > 1")
    if n < 2 or a < 0:
        raise ValueError("need n >= 2 and a >= 0")
    log_val = _log_L_printed(n, p, a)
    if convention == "sharp":
        log_val += p * _log_sharp_factor(p)
    return math.exp(log_val)


# -------------------------------------------------------------- affine forms
# Defining forms are products of the building blocks; simplified forms are
# independent transcriptions of the final closed expressions.


def _log_R_defining(n, p, a):
    N = n + a
    q = _conj(p)
    return (
        -(1 + a) / (p * N) * math.log(1 + a)
        - math.log(q) / q
        + (
            math.log(n - 1)
            + math.log(q)
            + log_gamma((N + q) / q)
            - log_gamma((1 + a) / q)
            - log_gamma((n - 1 + q) / q)
        )
        / N
        - math.log(p / N) / p
        - (n - 1) / (p * N) * math.log((n + p - 1) * a_np(n - 1, p))
        - (n - 1) / N * math.log(c_np(n - 1, p))
    )


def _log_common(n, p, a):
    # pi^{-(n-1)/(2N)} (1+a)^{-(1+a)/(pN)} (n-1)^{-(n-1)/(pN)}
    N = n + a
    return (
        -(n - 1) / (2 * N) * _LOG_PI
        - (1 + a) / (p * N) * math.log(1 + a)
        - (n - 1) / (p * N) * math.log(n - 1)
    )


def _log_R_simplified(n, p, a):
    N = n + a
    q = _conj(p)
    return (
        -math.log(q) / q
        + _log_common(n, p, a)
        + math.log(N / p) / p
        + (
            math.log(q)
            + log_gamma((n + 1) / 2)
            + log_gamma((N + q) / q)
            - log_gamma((1 + a) / q)
            - log_gamma((n - 1 + q) / q)
        )
        / N
    )


def _log_S_simplified(n, p, a):
    N = n + a
    q = _conj(p)
    return (
        _log_common(n, p, a)
        - math.log((N - p) / (p - 1)) / q
        + (
            math.log(q)
            + log_gamma((n + 1) / 2)
            + log_gamma(N)
            - log_gamma((1 + a) / q)
            - log_gamma((n - 1 + q) / q)
            - log_gamma(N / p)
        )
        / N
    )


def _log_K_factor(n, p, a):
    N = n + a
    return (
        (1 + a) / (p * N) * math.log(1 + a)
        + (n - 1) / (p * N) * math.log(n - 1)
        - math.log(N) / p
    )


def _log_K_simplified(n, p, a):
    # Euclidean choice C = |t|^q/q + |x|^q/q in the norm-dependent inequality
    q = _conj(p)
    N = n + a
    level = math.log(euclidean_unit_level_volume(n, p, a)) + N / q * math.log(q)
    return math.log(nguyen_sobolev_constant(n, p, a)) - math.log(p) / p - level / N


def _log_G_simplified(n, p, a, al, theta):
    N = n + a
    q = _conj(p)
    return (
        -math.log(p) / p
        + (-1 / q - 1) * math.log(q)
        + _log_common(n, p, a)
        + math.log(al - 1) / q
        + math.log(al * p + q) / p
        + math.log((-al * N + N + al * p + q) / (al * p + q)) / (al * theta * p)
        + (
            math.log(q)
            + log_gamma((n + 1) / 2)
            + log_gamma(p * al / (al - 1) - 1)
            - log_gamma((1 + a) / q)
            - log_gamma(n / q + 1 / p)
            - log_gamma(p * al / (al - 1) - N / q - 1)
        )
        / N
    )


def _log_N_simplified(n, p, a, al, theta):
    N = n + a
    q = _conj(p)
    e = (theta - 1) / (al * theta * p)
    return (
        -math.log(p) / p
        - math.log(q) / q
        + _log_common(n, p, a)
        + (-e + 1 / p) * math.log(1 - al * (1 - p))
        + (e + 1 / q) * math.log((1 - al) / q)
        + e * math.log(N + (al * p + q) / (1 - al))
        - (
            log_gamma((1 + a) / q)
            + log_gamma(2 - p * al / (al - 1))
            + log_gamma(n / q + 1 / p)
            - math.log(q)
            - log_gamma((n + 1) / 2)
            - log_gamma(-p * al / (al - 1) + N / q + 2)
        )
        / N
    )


def _log_L_simplified(n, p, a):
    N = n + a
    q = _conj(p)
    return (
        (1 - p)
        + (p - 1) * math.log(p)
        - (1 + a) / N * math.log(1 + a)
        - (n - 1) / N * math.log(n - 1)
        + (2 - 2 * p) * math.log(q)
        - (n - 1) * p / (2 * N) * _LOG_PI
        + p / N
        * (
            math.log(q)
            + log_gamma((n + 1) / 2)
            - log_gamma((1 + a) / q)
            - log_gamma((n - 1 + q) / q)
        )
    )


def _log_pair(name, n, p, a, al=None, convention="sharp", theta_form="derived"):
    """(log defining, log simplified) for p > 1, no range validation on alpha."""
    if name == "R_cal":
        return _log_R_defining(n, p, a), _log_R_simplified(n, p, a)
    if name == "S_cal":
        d = math.log(nguyen_sobolev_constant(n, p, a)) + _log_R_defining(n, p, a)
        return d, _log_S_simplified(n, p, a)
    if name == "K_cal":
        d = (
            math.log(nguyen_sobolev_constant(n, p, a))
            + _log_R_defining(n, p, a)
            + _log_K_factor(n, p, a)
        )
        return d, _log_K_simplified(n, p, a)
    if name == "G_cal":
        th = _theta_a(n, p, a, al)
        extra = _log_sharp_factor(p) if convention == "sharp" else 0.0
        d = (_log_G_printed(n, p, a, al, th) + th * extra) / th + _log_R_defining(n, p, a)
        return d, _log_G_simplified(n, p, a, al, th) + extra
    if name == "N_cal":
        th = _theta_b(n, p, a, al, theta_form)
        extra = _log_sharp_factor(p) if convention == "sharp" else 0.0
        d = (_log_N_printed(n, p, a, al, th) + th * extra) / th + _log_R_defining(n, p, a)
        return d, _log_N_simplified(n, p, a, al, th) + extra
    if name == "L_cal":
        extra = p * _log_sharp_factor(p) if convention == "sharp" else 0.0
        d = _log_L_printed(n, p, a) + extra + p * _log_R_defining(n, p, a)
        return d, _log_L_simplified(n, p, a) + extra
    raise ValueError(f"unknown constant {name!r}; expected one of {AFFINE_NAMES}")


@dataclass(frozen=True)
class ConstantValue:
    """A constant evaluated in two independent forms."""

    name: str
    params: Params
    defining: float
    simplified: float
    rel_gap: float
    marker: str = "exact"
    convention: str = "sharp"
    theta_form: str = "derived"
    extra: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        bound = REL_GAP_FLAG if self.marker == "exact" else LIMIT_GAP_FLAG
        return not (self.rel_gap <= bound)

    @property
    def value(self) -> float:
        return self.simplified

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params.as_dict(),
            "defining": self.defining,
            "simplified": self.simplified,
            "rel_gap": self.rel_gap,
            "flagged": self.flagged,
            "marker": self.marker,
            "convention": self.convention,
            "theta_form": self.theta_form,
            **({"extra": self.extra} if self.extra else {}),
        }


def _validate_for(name, params: Params):
    params.require_sobolev()
    if name == "G_cal":
        params.require_alpha("a")
    elif name == "N_cal":
        params.require_alpha("b")
    elif name not in AFFINE_NAMES:
        raise ValueError(f"unknown constant {name!r}; expected one of {AFFINE_NAMES}")


def affine_constant(
    name: str,
    params: Params,
    convention: str = "sharp",
    theta_form: str = "derived",
) -> ConstantValue:
    """Evaluate an affine constant in defining-product and simplified form.

    At ``p == 1`` the ``defining`` entry is the extrapolated limit p -> 1+ and
    ``simplified`` is the closed-form limit; the record is marked ``limit``.
    """
    _check_convention(convention, theta_form)
    _validate_for(name, params)
    n, p, a, al = params.n, params.p, params.a, params.alpha
    if p == 1:
        lim = limit_p_to_1(name, n, a, al, convention=convention, theta_form=theta_form)
        d, s = lim.value, _closed_p1(name, n, a)
        gap = abs(d - s) / abs(d) if math.isfinite(d) else math.inf
        return ConstantValue(
            name, params, d, s, gap, "limit", convention, theta_form,
            {"converged": lim.converged, "spread": float(lim.spread)},
        )
    ld, ls = _log_pair(name, n, p, a, al, convention, theta_form)
    d, s = math.exp(ld), math.exp(ls)
    return ConstantValue(name, params, d, s, abs(d - s) / d, "exact", convention, theta_form)


def affine_value(name: str, params: Params, convention: str = "sharp", theta_form: str = "derived") -> float:
    """The simplified value of an affine constant."""
    return affine_constant(name, params, convention, theta_form).simplified


# ------------------------------------------------------------------- p -> 1


def sobolev_constant_p1(n: int, a: float) -> float:
    """Closed-form limit of the affine Sobolev constant as p -> 1+."""
    N = n + a
    return math.exp(
        -(n - 1) / (2 * N) * _LOG_PI
        - a / N * math.log(1 + a)
        - (n - 1) / N * math.log(n - 1)
        + log_gamma((n + 1) / 2) / N
    )


def _closed_p1(name, n, a):
    s1 = sobolev_constant_p1(n, a)
    N = n + a
    if name == "R_cal":
        return N * s1
    if name == "K_cal":
        return s1 * math.exp(
            (1 + a) / N * math.log(1 + a) + (n - 1) / N * math.log(n - 1) - math.log(N)
        )
    return s1


@dataclass(frozen=True)
class LimitResult:
    name: str
    value: float
    spread: float
    converged: bool
    samples: tuple

    def to_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "spread": self.spread,
            "converged": self.converged,
            "samples": [list(s) for s in self.samples],
        }


_LIMIT_STEPS = (1e-3, 1e-4, 1e-5)
_LIMIT_CHECK = 1e-6


def _fit_limit(hs, vals):
    # model c0 + c1 h log h + c2 h
    A = np.array([[1.0, h * math.log(h), h] for h in hs])
    return np.linalg.solve(A, np.asarray(vals, float))


def limit_p_to_1(
    name: str,
    n: int,
    a: float,
    alpha: Optional[float] = None,
    convention: str = "sharp",
    theta_form: str = "derived",
    tol: float = 1e-6,
) -> LimitResult:
    """Extrapolate an affine constant to p = 1 from p in {1+1e-3, 1+1e-4, 1+1e-5}.

    The fit uses the model ``c0 + c1 h log h + c2 h`` with ``h = p - 1``. A
    fourth sample at ``h = 1e-6`` is predicted from the fit; if the prediction
    misses by more than ``tol`` (relative) the result is marked unconverged
    and its value is NaN.
    """
    if name not in AFFINE_NAMES:
        raise ValueError(f"unknown constant {name!r}")
    if name == "G_cal" and not (alpha is not None and alpha > 1):
        raise ValueError("G_cal limit needs alpha > 1")
    if name == "N_cal" and not (alpha is not None and 0 < alpha < 1):
        raise ValueError("N_cal limit needs 0 < alpha < 1")
    if n + a <= 1:
        raise ValueError("need n + a > 1")

    def val(h):
        return math.exp(_log_pair(name, n, 1.0 + h, a, alpha, convention, theta_form)[1])

    samples = tuple((1.0 + h, val(h)) for h in _LIMIT_STEPS)
    coef = _fit_limit(_LIMIT_STEPS, [v for _, v in samples])
    c0 = float(coef[0])
    h4 = _LIMIT_CHECK
    predicted = c0 + coef[1] * h4 * math.log(h4) + coef[2] * h4
    actual = val(h4)
    spread = float(abs(predicted - actual) / abs(actual))
    ok = bool(math.isfinite(c0) and spread <= tol)
    return LimitResult(name, c0 if ok else math.nan, spread, ok, samples + ((1.0 + h4, actual),))
