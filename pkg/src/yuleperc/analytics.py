"""Closed-form and asymptotic predictions for the number of large clusters.

Everything here is a pure function of its arguments.  Quantities that can
underflow (the main term for large thresholds) are available in log-space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

from scipy import integrate

MIN_K = 28
T_STAR_TOL = 1e-12

# Bernoulli numbers B_2, B_4, ..., B_14 for the Stirling series
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)
_STIRLING_MIN = 10.0


# --------------------------------------------------------------------------
# Regimes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Bounded:
    """``p_n = a * n^(-1/ell)``: largest clusters have size ``ell + 1``."""

    ell: int
    a: float

    def __post_init__(self) -> None:
        if self.ell < 1 or self.a <= 0:
            raise ValueError("Bounded regime needs ell >= 1 and a > 0")

    def p(self, n: int) -> float:
        return _checked_p(self.a * n ** (-1.0 / self.ell), self, n)


@dataclass(frozen=True)
class Critical:
    """``p_n = a / ln n``."""

    a: float

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError("Critical regime needs a > 0")

    def p(self, n: int) -> float:
        if n < 2:
            raise ValueError("Critical regime needs n >= 2")
        return _checked_p(self.a / math.log(n), self, n)


@dataclass(frozen=True)
class Intermediate:
    """``1/ln n << p_n << 1`` through a named schedule.

    ``schedule="loglog"`` gives ``p_n = ln ln n / ln n``;
    ``schedule="power"`` gives ``p_n = n^(-gamma)`` with ``0 < gamma < 1``.
    """

    schedule: Literal["loglog", "power"] = "loglog"
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.schedule == "power":
            if self.gamma is None or not 0 < self.gamma < 1:
                raise ValueError("power schedule needs 0 < gamma < 1")
        elif self.schedule != "loglog":
            raise ValueError(f"unknown schedule {self.schedule!r}")

    def p(self, n: int) -> float:
        if self.schedule == "loglog":
            if n < 3:
                raise ValueError("loglog schedule needs n >= 3")
            return _checked_p(math.log(math.log(n)) / math.log(n), self, n)
        return _checked_p(n ** (-self.gamma), self, n)


@dataclass(frozen=True)
class Explicit:
    """A fixed retention probability, with no asymptotic schedule."""

    p_value: float

    def __post_init__(self) -> None:
        if not 0 <= self.p_value <= 1:
            raise ValueError("p must lie in [0, 1]")

    def p(self, n: int) -> float:
        return self.p_value


Regime = Union[Bounded, Critical, Intermediate, Explicit]


def _checked_p(p: float, regime: object, n: int) -> float:
    if not 0 < p < 1:
        raise ValueError(f"{regime} evaluates to p={p} outside (0, 1) at n={n}")
    return p


# --------------------------------------------------------------------------
# Main term
# --------------------------------------------------------------------------


def _stirling_tail(z: float) -> float:
    s, t, zz = 0.0, 1.0 / z, z * z
    for k, b in enumerate(_BERNOULLI, start=1):
        s += b / (2 * k * (2 * k - 1)) * t
        t /= zz
    return s


def _lgamma_shift(z: float, h: float) -> float:
    """``lnG(z + h) - lnG(z)`` without cancellation for large ``z``."""
    if h == 0:
        return 0.0
    if z < _STIRLING_MIN:
        return math.lgamma(z + h) - math.lgamma(z)
    return (z - 0.5) * math.log1p(h / z) + h * math.log(z + h) - h + (
        _stirling_tail(z + h) - _stirling_tail(z)
    )


def _log_beta_ratio(u: float, v: float) -> float:
    """``ln[G(u+1) G(v+1) / G(u+v+1)]``, symmetric in ``u`` and ``v``."""
    small, big = sorted((u, v))
    return math.lgamma(small + 1) - _lgamma_shift(big + 1, small)


def _check_main_args(n: float, p: float, x: float) -> None:
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")


def log_main_term(n: float, p: float, x: float) -> float:
    """Natural log of ``I(n, p, x) = n G(1/p + 1) G(x + 1) / G(1/p + x + 1)``."""
    _check_main_args(n, p, x)
    return math.log(n) + _log_beta_ratio(1.0 / p, float(x))


def main_term(n: float, p: float, x: float) -> float:
    """Expected number of clusters larger than ``x`` shared by both bounding systems."""
    return math.exp(log_main_term(n, p, x))


def log_main_term_product(n: float, p: float, x: int) -> float:
    """Log of ``n * prod_{j<=x} j / (1/p + j)``, the telescoped Gamma ratio."""
    _check_main_args(n, p, x)
    m = 1.0 / p
    return math.log(n) - math.fsum(math.log1p(m / j) for j in range(1, int(x) + 1))


def _log_integrand(s: float, p: float, x: float) -> float:
    if x == 0:
        return -s
    if s <= 0:
        return -math.inf
    return x * math.log(-math.expm1(-p * s)) - s


def log_gamma_integral(p: float, x: float, lower: float = 0.0) -> float:
    """``ln int_lower^inf (1 - e^{-ps})^x e^{-s} ds`` by adaptive quadrature.

    The integrand is rescaled by its maximum on the range so that the value
    can be recovered in log-space even when it underflows.  The upper limit
    is cut where ``e^{-s}``, which dominates the integrand, falls below
    ``1e-16`` of the peak.
    """
    lower = max(0.0, float(lower))
    # unimodal, peak at ln(1 + p x) / p
    peak = max(lower, math.log1p(p * x) / p) if x > 0 else lower
    g_max = _log_integrand(peak, p, x)
    upper = max(peak, -g_max + 37.0)
    if upper <= lower:
        return -math.inf

    # points where the integrand falls off on each side of the peak
    width = 1.0 + math.sqrt(x) / p / (1.0 + p * x) if x > 0 else 1.0
    cuts = {lower, upper}
    for w in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0):
        for c in (peak - w * width, peak + w * width):
            if lower < c < upper:
                cuts.add(c)
    if lower < peak < upper:
        cuts.add(peak)
    knots = sorted(cuts)

    def f(s: float) -> float:
        return math.exp(_log_integrand(s, p, x) - g_max)

    total = math.fsum(
        integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        for a, b in zip(knots[:-1], knots[1:])
    )
    if total <= 0:
        return -math.inf
    return g_max + math.log(total)


def main_term_quadrature(n: float, p: float, x: float) -> float:
    """``n * int_0^inf (1 - e^{-ps})^x e^{-s} ds``, evaluated numerically."""
    _check_main_args(n, p, x)
    return math.exp(math.log(n) + log_gamma_integral(p, x))


def log_asymp_main_term(
    n: float, p: float, x: float, mode: Literal["x_fixed", "x_growing"] = "x_fixed"
) -> float:
    _check_main_args(n, p, x)
    if mode == "x_fixed":
        return math.lgamma(x + 1) + math.log(n) + x * math.log(p)
    if mode == "x_growing":
        if x <= 0:
            raise ValueError("x_growing asymptotics need x > 0")
        m = 1.0 / p
        return (
            0.5 * math.log(2 * math.pi)
            + math.log(n)
            + (m + 0.5) * math.log(m)
            + (x + 0.5) * math.log(x)
            - (m + x + 0.5) * math.log(m + x)
        )
    raise ValueError(f"unknown mode {mode!r}")


def asymp_main_term(
    n: float, p: float, x: float, mode: Literal["x_fixed", "x_growing"] = "x_fixed"
) -> float:
    """Stirling approximation of :func:`main_term` as ``p -> 0``.

    ``x_fixed`` returns ``x! n p^x``; ``x_growing`` keeps the full Stirling
    form for both ``1/p`` and ``x``.
    """
    return math.exp(log_asymp_main_term(n, p, x, mode))


# --------------------------------------------------------------------------
# Critical window p = a / ln n
# --------------------------------------------------------------------------


def _check_t(a: float, t: float) -> None:
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")


def f_a(a: float, t: float) -> float:
    _check_t(a, t)
    return 1.0 + t * math.log(a * t) - (1.0 + a * t) / a * math.log1p(a * t)


def f_a_prime(a: float, t: float) -> float:
    _check_t(a, t)
    # ln(at) - ln(1 + at), negative for every t > 0
    return -math.log1p(1.0 / (a * t))


def t_star(a: float, tol: float = T_STAR_TOL, max_iter: int = 10_000) -> float:
    """The unique positive root of the decreasing function ``f_a``."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 1e-9, 1.0
    for _ in range(200):
        if f_a(a, hi) < 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise RuntimeError("could not bracket the root of f_a")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f_a(a, mid)
        if abs(fm) <= tol or hi - lo <= 4 * math.ulp(mid):
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection for t* did not converge")


@dataclass(frozen=True)
class CriticalConstants:
    a: float
    t_star: float
    fprime_at_root: float
    lam: float
    b: float
    intensity: float
    mu: float
    lambda_ar: float | None = None


def _loglog(n: float) -> float:
    if n < 3:
        raise ValueError(f"need n >= 3 so that ln ln n is defined and positive, got {n}")
    return math.log(math.log(n))


def threshold_y(n: float, a: float, lam: float) -> float:
    """Real-valued barrier ``y_n`` of the critical window (not floored)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    ll = _loglog(n)
    ts = t_star(a)
    fp = f_a_prime(a, ts)
    return ts * math.log(n) - (ll + math.log(2 * math.pi * ts / (lam**2 * (1 + a * ts)))) / (2 * fp)


def threshold_b(n: float, a: float) -> float:
    """Centring ``b_n = t* ln n - ln ln n / (2 f_a'(t*))`` for the largest clusters."""
    ll = _loglog(n)
    ts = t_star(a)
    return ts * math.log(n) - ll / (2 * f_a_prime(a, ts))


def intensity_lambda(a: float, b: float, lam: float) -> float:
    """Poisson intensity along subsequences whose barrier has fractional part ``b``."""
    if not 0 <= b < 1:
        raise ValueError(f"b must lie in [0, 1), got {b}")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return lam * (1 + 1 / (a * t_star(a))) ** b


def lambda_ar(a: float, r: float) -> float:
    ts = t_star(a)
    return math.sqrt(2 * math.pi * ts / (1 + a * ts)) * math.exp(-r / 2)


def gumbel_params(a: float, b: float) -> tuple[float, float]:
    """Location and scale of the Gumbel limit of the recentred largest cluster."""
    if a <= 0:
        raise ValueError("a must be positive")
    if not 0 <= b < 1:
        raise ValueError(f"b must lie in [0, 1), got {b}")
    ts = t_star(a)
    mu = math.log(2 * math.pi / a ** (2 * b)) + (1 - 2 * b) * math.log(ts / (1 + a * ts))
    return mu, 2.0


def gumbel_cdf(r: float, mu: float, scale: float = 2.0) -> float:
    return math.exp(-math.exp(-(r - mu) / scale))


def critical_constants(a: float, b: float, lam: float) -> CriticalConstants:
    ts = t_star(a)
    mu, _ = gumbel_params(a, b)
    return CriticalConstants(
        a=a,
        t_star=ts,
        fprime_at_root=f_a_prime(a, ts),
        lam=lam,
        b=b,
        intensity=intensity_lambda(a, b, lam),
        mu=mu,
    )


# --------------------------------------------------------------------------
# Intermediate regime
# --------------------------------------------------------------------------


def threshold_x(n: float, p: float, lam: float) -> int:
    """Barrier ``x_n`` above which the cluster count is asymptotically Poisson(lam)."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    log_x = p * (0.5 * math.log(2 * math.pi / p) - math.log(lam)) - 1 - math.log(p) + p * math.log(n)
    return math.floor(math.exp(log_x))


def threshold_u(n: float, p: float, u: float) -> int:
    """``floor(u p^-1 n^p)``: the first-order size scale of the largest clusters."""
    if u <= 0 or not 0 < p < 1:
        raise ValueError("need u > 0 and p in (0, 1)")
    return math.floor(u / p * n**p)


# --------------------------------------------------------------------------
# Small helpers
# --------------------------------------------------------------------------


def geom_tail(p: float, t: float, x: int) -> float:
    """``P(Y(t) > x)`` for a rate-``p`` Yule process started from one individual."""
    if t < 0 or x < 0:
        raise ValueError("t and x must be non-negative")
    if x == 0:
        return 1.0
    return (-math.expm1(-p * t)) ** x


def ancestral_mean(n: int, p: float) -> float:
    """Exact ``E[Y_1(tau_n)]``, the mean size of the ancestral type."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    term, acc = 1.0, [1.0]
    for i in range(2, n):
        term *= (i - 1 + p) / i
        acc.append(term)
    if n == 1:
        return 1.0
    return 1.0 + p * math.fsum(acc)


# --------------------------------------------------------------------------
# Sandwich bounds on E[N]
# --------------------------------------------------------------------------


def _check_k(k: int) -> float:
    if k < MIN_K:
        raise ValueError(f"k must be >= {MIN_K} so that 1 - 3 k^(-1/3) > 0, got {k}")
    return k ** (-1.0 / 3.0)


def beta_bounds(i: float, k: int) -> tuple[float, float]:
    """``(beta_lower(i), beta_upper(i))`` bracketing the birth time of type ``i``."""
    c = _check_k(k)
    base = math.log(i) - math.log(k)
    return base - math.log1p(3 * c), base - math.log1p(-3 * c)


def n_star(n: int, k: int) -> int:
    """``max{i : beta_lower(i) <= beta_upper(n)}``."""
    c = _check_k(k)
    i = math.floor(n * (1 + 3 * c) / (1 - 3 * c))
    target = beta_bounds(n, k)[1]
    while beta_bounds(i + 1, k)[0] <= target:
        i += 1
    while i > 1 and beta_bounds(i, k)[0] > target:
        i -= 1
    return i


def n_sub(n: int, k: int) -> int:
    """``max{i : beta_upper(i) <= beta_lower(n)}``."""
    c = _check_k(k)
    i = max(1, math.floor(n * (1 - 3 * c) / (1 + 3 * c)))
    target = beta_bounds(n, k)[0]
    while beta_bounds(i + 1, k)[1] <= target:
        i += 1
    while i > 1 and beta_bounds(i, k)[1] > target:
        i -= 1
    return i


def sigma1(n: int, p: float, x: int, k: int) -> float:
    """Mean contribution of the first ``2k - 1`` types to the upper bound."""
    _check_k(k)
    t = beta_bounds(n, k)[1] + math.log(k) ** 2
    return 2 * k * geom_tail(p, t, x)


def sigma3(n: int, p: float, x: int, k: int) -> float:
    """Integral tail dropped from the lower bound.

    Carries the sign of the prefactor ``1 - 10 k^(-1/3)``, which is negative
    unless ``k > 1000``.
    """
    c = _check_k(k)
    lower = beta_bounds(n, k)[0] - beta_bounds(2 * k, k)[1]
    log_int = log_gamma_integral(p, x, lower)
    return (1 - 10 * c) * n * math.exp(log_int)


def sandwich(n: int, p: float, x: int, k: int) -> tuple[float, float]:
    """Lower and upper bounds on ``E[N(x) 1_E]``; the ``Sigma_2`` term is omitted."""
    c = _check_k(k)
    i_main = main_term(n, p, x)
    upper = sigma1(n, p, x, k) + (1 + 10 * c) * i_main
    lower = (1 - 10 * c) * i_main - sigma3(n, p, x, k)
    return lower, upper


def default_k(regime: Regime, n: int, p: float) -> int:
    """Proof-motivated ``k_n``, raised to :data:`MIN_K` where it is smaller."""
    if isinstance(regime, Bounded):
        k = math.floor(math.log(n))
    elif isinstance(regime, Critical):
        k = math.floor(math.sqrt(math.log(n)))
    elif isinstance(regime, Intermediate):
        k = math.floor(p ** -0.5)
    else:
        k = MIN_K
    return max(k, MIN_K)


# --------------------------------------------------------------------------
# Dispatcher
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    n: int
    p: float
    regime: str
    threshold: int
    intensity: float
    main_term: float
    log_main_term: float
    sigma1: float
    sigma3: float
    k: int
    lower_bound: float
    upper_bound: float
    sigma2_omitted: bool = True
    barrier: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "regime": self.regime,
            "threshold": self.threshold,
            "intensity": self.intensity,
            "main_term": self.main_term,
            "log_main_term": self.log_main_term,
            "sigma1": self.sigma1,
            "sigma2": None,
            "sigma2_omitted": self.sigma2_omitted,
            "sigma3": self.sigma3,
            "k": self.k,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "barrier": self.barrier,
            **self.extras,
        }


def regime_name(regime: Regime) -> str:
    return type(regime).__name__.lower()


def predict(
    regime: Regime,
    n: int,
    lam: float = 1.0,
    b: float | None = None,
    *,
    x: int | None = None,
    k: int | None = None,
    p: float | None = None,
) -> Prediction:
    """Threshold, limiting Poisson intensity and mean bounds for ``(regime, n)``.

    ``x`` is required for :class:`Explicit` (no asymptotic threshold exists)
    and the intensity reported there is the main term itself.  ``p``
    replaces the regime's schedule while keeping its threshold and intensity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if p is None:
        p = regime.p(n)
    if not 0 < p < 1:
        raise ValueError(f"p={p} must lie in (0, 1) for predictions")
    barrier = None
    extras: dict = {}
    if isinstance(regime, Bounded):
        threshold = regime.ell
        intensity = math.factorial(regime.ell) * regime.a**regime.ell
    elif isinstance(regime, Critical):
        if b is None:
            raise ValueError("the critical regime needs the fractional-part parameter b")
        barrier = threshold_y(n, regime.a, lam)
        threshold = math.floor(barrier)
        intensity = intensity_lambda(regime.a, b, lam)
        ts = t_star(regime.a)
        extras = {
            "t_star": ts,
            "fprime_at_root": f_a_prime(regime.a, ts),
            "y_floor": threshold,
            "y_frac": barrier - threshold,
            "b": b,
            "b_n": threshold_b(n, regime.a),
        }
    elif isinstance(regime, Intermediate):
        threshold = threshold_x(n, p, lam)
        intensity = lam
    else:
        if x is None:
            raise ValueError("an explicit p needs a threshold x")
        threshold = int(x)
        intensity = main_term(n, p, threshold)
    if x is not None and not isinstance(regime, Explicit):
        threshold = int(x)

    if k is None:
        k = default_k(regime, n, p)
    _check_k(k)
    lower, upper = sandwich(n, p, threshold, k)
    return Prediction(
        n=n,
        p=p,
        regime=regime_name(regime),
        threshold=threshold,
        intensity=intensity,
        main_term=main_term(n, p, threshold),
        log_main_term=log_main_term(n, p, threshold),
        sigma1=sigma1(n, p, threshold, k),
        sigma3=sigma3(n, p, threshold, k),
        k=k,
        lower_bound=lower,
        upper_bound=upper,
        barrier=barrier,
        extras=extras,
    )

