"""Closed-form first-passage analytics for the noisy boundary-vortex law.

The exit probability of the diffusion from the interval (0, a_hat) has an
exact representation through regularized lower incomplete gamma functions:
with n = 1/(beta*|ln eps|) and m = c_eps*eps**alpha/beta,

    phi(z) = P(n+1, c_eps*z/beta) / P(n+1, n),

where phi(z) is the probability of reaching a_hat before 0 from z.  All
probabilities are carried in log domain: in the weak-noise regimes phi is of
order eps**(alpha*n) and vanishes in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Callable, Sequence

from .errors import DomainError, HypothesisError
from .ode_dynamics import PhysicalParams
from .specialfn import LogValue, log_gamma, log_regularized_gamma_p


@dataclass(frozen=True)
class GammaCoords:
    """Arguments (m, n) of the incomplete-gamma representation."""

    m_eps: float
    n_eps: float

    def __post_init__(self):
        if not (self.m_eps > 0.0 and self.n_eps > 0.0):
            raise DomainError("GammaCoords: m_eps and n_eps must be positive")


def gamma_coords(p: PhysicalParams, beta: float) -> GammaCoords:
    """Map physical parameters and noise strength to gamma-function arguments."""
    _require_noisy(p, beta)
    n = 1.0 / (beta * p.log_eps)
    m = p.c_eps * p.initial_distance / beta
    return GammaCoords(m_eps=m, n_eps=n)


def _require_noisy(p: PhysicalParams, beta: float) -> None:
    if not beta > 0.0:
        raise DomainError(f"beta={beta!r} must be positive")
    if p.lam == 0.0:
        raise DomainError("exit analytics require lam > 0 (a_hat must be finite)")


def log_exit_probability(z: float, p: PhysicalParams, beta: float) -> LogValue:
    """ln of the probability of reaching a_hat before 0, started from z.

    Boundary values are exact: z = 0 gives log of zero, z = a_hat gives 0.
    """
    _require_noisy(p, beta)
    if not 0.0 <= z <= p.a_hat * (1.0 + 1e-12):
        raise DomainError(f"log_exit_probability: z={z!r} outside [0, {p.a_hat!r}]")
    if z == 0.0:
        return LogValue.zero()
    n = 1.0 / (beta * p.log_eps)
    if z >= p.a_hat:
        return LogValue(0.0)
    log_num = log_regularized_gamma_p(n + 1.0, p.c_eps * z / beta)
    log_den = log_regularized_gamma_p(n + 1.0, n)
    return LogValue(min(log_num.log_magnitude - log_den.log_magnitude, 0.0))


def combine_independent(log_phi: LogValue, log_k: float) -> tuple[LogValue, float]:
    """1 - (1 - phi)**K for K = exp(log_k) independent trials of chance phi.

    Computed through K*log1p(-phi); once phi is below the double-precision
    floor the product is carried entirely in log domain.
    """
    lp = log_phi.log_magnitude
    if lp > 0.0:
        raise DomainError(f"combine_independent: log_phi={lp!r} must be <= 0")
    if lp == 0.0:
        return LogValue(0.0), 1.0
    if lp < -700.0:
        # phi underflows; N = K*phi to machine accuracy
        log_n = log_k + lp
        return LogValue(log_n), math.exp(log_n)
    t = math.exp(log_k) * math.log1p(-math.exp(lp))  # = K ln(1 - phi) <= 0
    n_val = -math.expm1(t)
    log_n = math.log1p(-math.exp(t)) if t > -745.0 else 0.0
    return LogValue(log_n), n_val


def log_nucleation_probability(p: PhysicalParams, beta: float) -> tuple[LogValue, float]:
    """Chance that at least one of eps**(-alpha) independent vortices escapes.

    N = 1 - (1 - phi)**K with K = eps**(-alpha) and phi the single-vortex
    exit probability from eps**alpha.
    """
    z = p.initial_distance
    if z > p.a_hat:
        raise DomainError(f"log_nucleation_probability: eps**alpha={z!r} exceeds a_hat={p.a_hat!r}")
    log_phi = log_exit_probability(z, p, beta)
    return combine_independent(log_phi, p.alpha * p.log_eps)


def asymptotic_log_ratio(p: PhysicalParams, beta: float) -> float:
    """Finite-size value of the bracket governing ln(phi(eps**alpha)/eps**alpha).

    Returns (1/beta)(ln(lam*h_ex)/|ln eps| - alpha) + ln(lam*h_ex); its limit
    decides between vanishing and certain nucleation.
    """
    _require_noisy(p, beta)
    log_lam_h = math.log(p.lam * p.h_ex)
    return (log_lam_h / p.log_eps - p.alpha) / beta + log_lam_h


class RegimeLabel(Enum):
    NO_NUCLEATION = "no_nucleation"
    NUCLEATION = "nucleation"
    TRANSITIONAL = "transitional"


@dataclass(frozen=True)
class Regime:
    """Classification of a parameter family."""

    label: RegimeLabel
    limit_value: float  # limit of beta * ln(h_ex) along the family


@dataclass(frozen=True)
class ParameterFamily:
    """A family eps -> (h_ex, beta), optionally carrying its known limit.

    h_ex must grow without bound while staying below every power of 1/eps;
    classification probes these hypotheses numerically unless the limit of
    beta*ln(h_ex) is supplied explicitly.
    """

    h_ex: Callable[[float], float]
    beta: Callable[[float], float]
    name: str = "custom"
    beta_lnh_limit: float | None = None


def hex_log_family(scale: float = 1.0) -> Callable[[float], float]:
    """Applied field growing like scale * |ln eps|."""
    return lambda eps: scale * abs(math.log(eps))


def hex_exp_sqrt_family(scale: float = 1.0) -> Callable[[float], float]:
    """Applied field growing like scale * exp(sqrt(|ln eps|))."""
    return lambda eps: scale * math.exp(math.sqrt(abs(math.log(eps))))


def family_with_beta_lnh(h_ex: Callable[[float], float], level: float,
                         name: str = "const-beta-lnh") -> ParameterFamily:
    """Family holding beta * ln(h_ex) at a constant level."""
    return ParameterFamily(h_ex=h_ex,
                           beta=lambda eps: level / math.log(h_ex(eps)),
                           name=name, beta_lnh_limit=level)


_PROBE_EPS: tuple[float, ...] = tuple(10.0 ** -k for k in range(4, 17))
_LIMIT_TOL = 1e-3
_ALPHA_TOL = 1e-9


def classify_regime(family: ParameterFamily, alpha: float,
                    probe: Sequence[float] = _PROBE_EPS) -> Regime:
    """Classify a parameter family against the threshold at alpha.

    Probes the family on a decreasing eps sequence, checks the growth
    hypotheses on h_ex, and compares the limit of beta*ln(h_ex) with alpha:
    below it no vortex nucleates, above it (with vanishing beta) nucleation
    is certain, and equality is the transitional regime.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"classify_regime: alpha={alpha!r} must be in (0, 1]")
    eps_seq = sorted(probe, reverse=True)
    if len(eps_seq) < 4:
        raise DomainError("classify_regime: probe sequence too short")
    h_seq = [family.h_ex(e) for e in eps_seq]
    b_seq = [family.beta(e) for e in eps_seq]
    tail = len(eps_seq) // 2

    if any(h <= 0.0 for h in h_seq) or any(b <= 0.0 for b in b_seq):
        raise DomainError("classify_regime: family produced nonpositive h_ex or beta")
    if any(h2 <= h1 for h1, h2 in zip(h_seq[tail:], h_seq[tail + 1:])):
        raise HypothesisError(f"hypothesis violated: h_ex not increasing along {family.name}")
    # smaller exponents cannot be decided on this probe range even for
    # admissible subexponential families, so s stops at 0.1
    for s in (1.0, 0.5, 0.1):
        seq = [e ** s * h for e, h in zip(eps_seq, h_seq)]
        if seq[-1] >= seq[tail]:
            raise HypothesisError(
                f"hypothesis violated: eps**s * h_ex fails to vanish for s={s} along {family.name}")

    if family.beta_lnh_limit is not None:
        limit = family.beta_lnh_limit
    else:
        v_seq = [b * math.log(h) for b, h in zip(b_seq, h_seq)]
        if abs(v_seq[-1] - v_seq[-2]) >= _LIMIT_TOL:
            raise HypothesisError(
                f"hypothesis violated: beta*ln(h_ex) did not settle along {family.name} "
                f"(last increments {abs(v_seq[-1] - v_seq[-2]):.3e})")
        limit = v_seq[-1]

    if abs(limit - alpha) <= _ALPHA_TOL:
        return Regime(RegimeLabel.TRANSITIONAL, limit)
    if limit < alpha:
        return Regime(RegimeLabel.NO_NUCLEATION, limit)
    # certain nucleation additionally needs beta -> 0
    if any(b2 > b1 * (1.0 + 1e-12) for b1, b2 in zip(b_seq[tail:], b_seq[tail + 1:])) \
            or b_seq[-1] >= b_seq[tail]:
        raise HypothesisError(
            f"hypothesis violated: beta does not vanish along {family.name}")
    return Regime(RegimeLabel.NUCLEATION, limit)


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one analytic bound."""

    name: str
    applicable: bool
    passed: bool | None
    slack: float | None  # log-domain margin, min over the bound's sides

    @property
    def failed(self) -> bool:
        return self.applicable and self.passed is False


@dataclass(frozen=True)
class BoundsReport:
    checks: tuple[BoundCheck, ...]

    @property
    def all_passed(self) -> bool:
        return not any(c.failed for c in self.checks)


_BOUND_TOL = 1e-9


def check_bounds(p: PhysicalParams, beta: float) -> BoundsReport:
    """Verify the analytic envelopes of the exit and nucleation probabilities.

    Three bounds, each checked in log domain and marked not-applicable
    outside the regime where its derivation holds:

    * gamma-power:        gamma(n+1, m) <= m**(n+1)/(n+1)          (always)
    * exit-prob-bracket:  e^-m (m/n)^(n+1) <= phi <= e^n (m/n)^(n+1)
                          (small-argument regime m, n <= 1)
    * nucleation-sandwich: phi/(2 eps**alpha) <= N <= 2 phi/eps**alpha
                          (rare regime K*phi <= 1/2)
    """
    coords = gamma_coords(p, beta)
    m, n = coords.m_eps, coords.n_eps
    checks = []

    log_lhs = log_regularized_gamma_p(n + 1.0, m).log_magnitude + log_gamma(n + 1.0)
    log_rhs = (n + 1.0) * math.log(m) - math.log(n + 1.0)
    slack = log_rhs - log_lhs
    checks.append(BoundCheck("gamma-power", True, slack >= -_BOUND_TOL, slack))

    log_phi = log_exit_probability(p.initial_distance, p, beta).log_magnitude
    log_ratio_term = (n + 1.0) * math.log(m / n)
    if m <= 1.0 and n <= 1.0:
        lo = -m + log_ratio_term
        hi = n + log_ratio_term
        slack = min(log_phi - lo, hi - log_phi)
        checks.append(BoundCheck("exit-prob-bracket", True, slack >= -_BOUND_TOL, slack))
    else:
        checks.append(BoundCheck("exit-prob-bracket", False, None, None))

    log_k_phi = log_phi + p.alpha * p.log_eps
    if log_k_phi <= math.log(0.5):
        log_n_val = log_nucleation_probability(p, beta)[0].log_magnitude
        lo = log_k_phi - math.log(2.0)
        hi = log_k_phi + math.log(2.0)
        slack = min(log_n_val - lo, hi - log_n_val)
        checks.append(BoundCheck("nucleation-sandwich", True, slack >= -_BOUND_TOL, slack))
    else:
        checks.append(BoundCheck("nucleation-sandwich", False, None, None))

    return BoundsReport(tuple(checks))
