"""Scalar special functions behind the closed-form first-passage solutions.

Everything here is plain-float and reentrant: principal-branch Lambert W,
log-gamma, the lower incomplete gamma function (linear and log domain), and
the truncated exponential.  Probability-bearing quantities are exposed in log
domain because the regularized gamma ratios that arise in the weak-noise
regimes underflow double precision by hundreds of orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

_INV_E = math.exp(-1.0)
_EPS = 2.220446049250313e-16


@dataclass(frozen=True, order=True)
class LogValue:
    """A nonnegative quantity stored as its natural log.

    ``-inf`` encodes an exact zero.  The represented quantity is recovered
    with :meth:`value`, which cannot overflow as long as the quantity is
    at most 1 (the intended use: probabilities).
    """

    log_magnitude: float

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(float("-inf"))

    @classmethod
    def of(cls, value: float) -> "LogValue":
        if value < 0.0:
            raise DomainError(f"LogValue.of: negative value {value!r}")
        return cls(math.log(value) if value > 0.0 else float("-inf"))

    def value(self) -> float:
        return math.exp(self.log_magnitude)

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == float("-inf")


def _w0p1_series(q: float) -> float:
    """1 + W0 evaluated at argument (q - 1)/e, for small q >= 0.

    Expansion about the branch point in p = sqrt(2 q); returning 1 + W
    directly avoids the cancellation in W + 1.
    """
    p = math.sqrt(2.0 * q)
    return p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0
               + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))))


def _halley(w: float, z: float) -> float:
    """Polish a Lambert-W iterate against w*exp(w) = z.

    Stops at the rounding noise floor: near the branch point the residual
    w*exp(w) - z is evaluated with cancellation, so the update size is the
    convergence signal, not the residual itself.
    """
    prev = math.inf
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - z
        w1 = w + 1.0
        if w1 == 0.0:
            w += 1e-12
            continue
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        adw = abs(dw)
        if adw <= 4.0 * _EPS * (1.0 + abs(w)) or adw >= prev:
            return w
        prev = adw
    return w


def lambert_w0(z: float) -> float:
    """Principal branch of the Lambert W function on [-1/e, inf).

    Solves w*exp(w) = z with w >= -1.  Near the branch point the value comes
    from a series in sqrt(2(1 + e z)); elsewhere a piecewise initial guess is
    polished by Halley iteration.
    """
    if math.isnan(z):
        raise DomainError("lambert_w0: z is NaN")
    if z < -_INV_E:
        # allow representation slack right at the branch point
        if z > -_INV_E * (1.0 + 1e-12):
            z = -_INV_E
        else:
            raise DomainError(f"lambert_w0: z={z!r} below the branch point -1/e")
    if z == 0.0:
        return 0.0

    q = (z + _INV_E) * math.e  # = 1 + e z >= 0
    if q <= 5e-5:
        # series alone beats Halley here: the residual w*e^w - z loses all
        # precision to cancellation this close to the branch point
        return -1.0 + _w0p1_series(q)
    if q <= 0.25:
        return _halley(-1.0 + _w0p1_series(q), z)

    if z <= 1.0:
        w = -1.0 + _w0p1_series(q) if q <= 2.0 else math.log1p(z)
    elif z <= math.e:
        w = 0.5 + 0.3 * (z - 1.0)
    else:
        lz = math.log(z)
        w = lz - math.log(lz)
    return _halley(w, z)


def log_gamma(s: float) -> float:
    """ln Gamma(s) for s > 0."""
    if not s > 0.0:
        raise DomainError(f"log_gamma: s={s!r} must be positive")
    return math.lgamma(s)


def _log_p_series(s: float, x: float) -> float:
    """ln P(s, x) by the ascending series; requires 0 < x < s + 1."""
    total = 1.0 / s
    term = total
    ap = s
    for _ in range(500_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            return math.log(total) + s * math.log(x) - x - math.lgamma(s)
    raise ConvergenceError(f"incomplete gamma series stalled at s={s!r}, x={x!r}")


def _log_q_continued_fraction(s: float, x: float) -> float:
    """ln Q(s, x) by the Lentz continued fraction; requires x >= s + 1."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            return math.log(h) + s * math.log(x) - x - math.lgamma(s)
    raise ConvergenceError(f"incomplete gamma continued fraction stalled at s={s!r}, x={x!r}")


def log_regularized_gamma_p(s: float, x: float) -> LogValue:
    """ln of the regularized lower incomplete gamma ratio gamma(s, x)/Gamma(s).

    Carried in log space so the result stays finite even when the ratio
    underflows double precision (weak-noise regimes reach s ~ 1e4 with
    x << s).  Series for x < s + 1, continued fraction otherwise.
    """
    if not s > 0.0:
        raise DomainError(f"log_regularized_gamma_p: s={s!r} must be positive")
    if not x >= 0.0:
        raise DomainError(f"log_regularized_gamma_p: x={x!r} must be nonnegative")
    if x == 0.0:
        return LogValue.zero()
    if x < s + 1.0:
        log_p = _log_p_series(s, x)
    else:
        log_q = _log_q_continued_fraction(s, x)
        # here Q <= Q(s, s+1) < 1, so 1 - Q does not cancel catastrophically
        log_p = math.log1p(-math.exp(log_q)) if log_q > -745.0 else 0.0
    return LogValue(min(log_p, 0.0))


def lower_gamma(s: float, x: float) -> float:
    """gamma(s, x) = integral of t^(s-1) e^(-t) over (0, x).

    Linear-domain convenience wrapper; overflows once Gamma(s) does, so the
    log-domain form is authoritative for large s.
    """
    log_p = log_regularized_gamma_p(s, x)
    if log_p.is_zero:
        return 0.0
    return math.exp(log_p.log_magnitude + math.lgamma(s))


def log_truncated_exp(n: int, x: float) -> float:
    """ln of e_n(x) = sum_{k<=n} x^k / k!, stable for large n and x."""
    if n < 0:
        raise DomainError(f"log_truncated_exp: n={n!r} must be nonnegative")
    if not x >= 0.0:
        raise DomainError(f"log_truncated_exp: x={x!r} must be nonnegative")
    if x == 0.0:
        return 0.0
    lx = math.log(x)
    # peak term sits at k ~ min(n, x); shift by it before summing
    k_star = min(n, int(x))
    log_peak = k_star * lx - math.lgamma(k_star + 1.0)
    total = 0.0
    log_term = -log_peak  # k = 0 term relative to the peak
    for k in range(n + 1):
        if k > 0:
            log_term += lx - math.log(k)
        total += math.exp(log_term)
    return log_peak + math.log(total)


def truncated_exp(n: int, x: float) -> float:
    """Degree-n Taylor polynomial of exp evaluated at x.

    Plain summation up to n = 30; beyond that the sum is carried in log
    domain and exponentiated.
    """
    if n < 0:
        raise DomainError(f"truncated_exp: n={n!r} must be nonnegative")
    if not x >= 0.0:
        raise DomainError(f"truncated_exp: x={x!r} must be nonnegative")
    if n <= 30:
        total = 1.0
        term = 1.0
        for k in range(1, n + 1):
            term *= x / k
            total += term
        return total
    return math.exp(log_truncated_exp(n, x))
