"""Special functions and elementary closed-form constants.

Everything here is computed in log-space where products of Gamma values are
involved, so that arguments of size ``n + a ~ 50`` do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Params",
    "log_gamma",
    "ball_volume",
    "log_ball_volume",
    "sphere_area",
    "a_np",
    "c_np",
    "weighted_halfball_volume",
]


def log_gamma(x):
    """Natural log of the Gamma function for positive real ``x``.

    Accepts scalars or arrays. Raises ``ValueError`` for ``x <= 0``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    out = gammaln(arr)
    return float(out) if out.ndim == 0 else out


def log_ball_volume(k: float) -> float:
    if k < 0:
        raise ValueError(f"ball dimension must be >= 0, got {k}")
    return 0.5 * k * math.log(math.pi) - log_gamma(0.5 * k + 1.0)


def ball_volume(k: float) -> float:
    """Volume of the unit ball in R^k, for real ``k >= 0``."""
    return math.exp(log_ball_volume(k))


def sphere_area(d: int) -> float:
    """Surface measure of S^d in R^{d+1}; |S^0| = 2 (counting measure)."""
    if d < 0:
        raise ValueError("sphere dimension must be >= 0")
    return (d + 1) * ball_volume(d + 1)


def a_np(n: float, p: float) -> float:
    """Normalisation of the L_p centroid body, rho_{n+p} / (rho_2 rho_n rho_{p-1})."""
    if n < 1 or p < 1:
        raise ValueError("a_np needs n >= 1 and p >= 1")
    return math.exp(
        log_ball_volume(n + p)
        - log_ball_volume(2)
        - log_ball_volume(n)
        - log_ball_volume(p - 1)
    )


def c_np(n: float, p: float) -> float:
    """(n rho_n)^{1/n} (n rho_n rho_{p-1} / (2 rho_{n+p-2}))^{1/p}."""
    if n < 1 or p < 1:
        raise ValueError("c_np needs n >= 1 and p >= 1")
    log_n_rho = math.log(n) + log_ball_volume(n)
    inner = log_n_rho + log_ball_volume(p - 1) - math.log(2.0) - log_ball_volume(n + p - 2)
    return math.exp(log_n_rho / n + inner / p)


def _halfball_closed(n: int, a: float) -> float:
    return math.exp(
        0.5 * (n - 1) * math.log(math.pi)
        + log_gamma(0.5 * (a + 1))
        - math.log(2.0)
        - log_gamma(0.5 * (n + a + 2))
    )


def _halfball_printed(n: int, a: float) -> float:
    # exponent (n - 2 - a)/2 exactly as displayed next to the CRS constant
    return math.exp(
        0.5 * (n - 2 - a) * math.log(math.pi)
        + log_gamma(0.5 * (a + 1))
        - math.log(2.0)
        - log_gamma(0.5 * (n + a + 2))
    )


def _halfball_quadrature(n: int, a: float, seed: int = 20240611, samples: int = 2_000_000):
    """Monte Carlo estimate of the weighted half-ball volume with its standard error.

    Points are drawn uniformly in the box [0,1] x [-1,1]^{n-1}.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    box = 2.0 ** (n - 1)
    total = 0.0
    total_sq = 0.0
    chunk = 250_000
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        y = rng.random((m, n))
        y[:, 1:] = 2.0 * y[:, 1:] - 1.0
        inside = np.einsum("ij,ij->i", y, y) < 1.0
        vals = np.where(inside, y[:, 0] ** a, 0.0) * box
        total += math.fsum(vals)
        total_sq += math.fsum(vals * vals)
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples)


def weighted_halfball_volume(n: int, a: float, mode: str = "closed_form", **kw):
    """Integral of t^a over the upper half of the unit ball in R^n.

    ``mode`` is one of ``closed_form`` (Beta reduction), ``printed``
    (the variant with pi^{(n-2-a)/2}, off by pi^{(a+1)/2}) or ``quadrature``. The
    quadrature mode returns ``(value, standard_error)``.
    """
    if n < 1 or a < 0:
        raise ValueError("need n >= 1 and a >= 0")
    if mode == "closed_form":
        return _halfball_closed(n, a)
    if mode == "printed":
        return _halfball_printed(n, a)
    if mode == "quadrature":
        return _halfball_quadrature(n, a, **kw)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Params:
    """Parameter tuple (n, p, a, alpha) shared by every inequality.

    ``q`` is the conjugate exponent; it is ``math.inf`` when ``p == 1``.
    """

    n: int
    p: float
    a: float = 0.0
    alpha: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.alpha is not None:
            if not (self.alpha > 0) or self.alpha == 1:
                raise ValueError(f"alpha must be > 0 and != 1, got {self.alpha}")
            if self.p < self.N and self.alpha > self.alpha_max * (1 + 1e-14):
                raise ValueError(
                    f"alpha must be <= (n+a)/(n+a-p) = {self.alpha_max}, got {self.alpha}"
                )

    @property
    def N(self) -> float:
        """Effective dimension n + a."""
        return self.n + self.a

    @property
    def q(self) -> float:
        if self.p == 1:
            return math.inf
        return self.p / (self.p - 1.0)

    @property
    def sobolev_ok(self) -> bool:
        return self.p < self.N

    @property
    def p_star(self) -> float:
        """Critical exponent (n+a)p/(n+a-p)."""
        if not self.sobolev_ok:
            raise ValueError("p_a^* needs p < n + a")
        return self.N * self.p / (self.N - self.p)

    @property
    def alpha_max(self) -> float:
        return self.N / (self.N - self.p)

    def require_sobolev(self):
        if not self.sobolev_ok:
            raise ValueError(f"need 1 <= p < n + a, got p={self.p}, n+a={self.N}")
        return self

    def require_alpha(self, case: Optional[str] = None):
        self.require_sobolev()
        if self.alpha is None:
            raise ValueError("alpha is required")
        if case == "a" and not self.alpha > 1:
            raise ValueError("case (a) needs alpha > 1")
        if case == "b" and not self.alpha < 1:
            raise ValueError("case (b) needs alpha < 1")
        return self

    def with_(self, **changes) -> "Params":
        d = dict(n=self.n, p=self.p, a=self.a, alpha=self.alpha)
        d.update(changes)
        return Params(**d)

    def as_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "a": self.a, "alpha": self.alpha}
