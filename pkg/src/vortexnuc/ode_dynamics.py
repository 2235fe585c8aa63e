"""Deterministic dynamics of a vortex near a flat boundary.

The governing law for the distance a(t) from the boundary is

    da/dt = lam*h_ex/|ln eps| - 1/(|ln eps| * a),

which admits a closed-form solution through the principal Lambert W branch
and an explicit annihilation time.  This module carries the parameter
record shared across the package, the closed forms, an adaptive embedded
Runge-Kutta integrator used as their numerical cross-check, the interior
vortex law, and an energy-balance diagnostic for trajectories of the
unsimplified law  da/dt * ln(a/eps) = lam*h_ex - 1/a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, StepSizeUnderflowError
from .specialfn import _w0p1_series, lambert_w0


@dataclass(frozen=True)
class PhysicalParams:
    """Shared parameter record.

    eps     coherence-length ratio, 0 < eps < 1
    alpha   initial-distance exponent (start at eps**alpha), 0 < alpha <= 1
    lam     boundary coefficient (twice the inward slope of the Meissner
            potential at the wall), lam >= 0
    h_ex    applied field strength, h_ex > 0

    Derived values are computed once at construction so equilibrium
    identities hold exactly in floating point:

    log_eps = |ln eps|,  c_eps = lam*h_ex/log_eps,  a_hat = 1/(lam*h_ex).

    a_hat is the upper equilibrium of the drift (infinite when lam == 0).
    """

    eps: float
    alpha: float
    lam: float
    h_ex: float
    log_eps: float = field(init=False)
    c_eps: float = field(init=False)
    a_hat: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"PhysicalParams: eps={self.eps!r} must be in (0, 1)")
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"PhysicalParams: alpha={self.alpha!r} must be in (0, 1]")
        if not self.lam >= 0.0:
            raise DomainError(f"PhysicalParams: lam={self.lam!r} must be nonnegative")
        if not self.h_ex > 0.0:
            raise DomainError(f"PhysicalParams: h_ex={self.h_ex!r} must be positive")
        object.__setattr__(self, "log_eps", abs(math.log(self.eps)))
        object.__setattr__(self, "c_eps", self.lam * self.h_ex / self.log_eps)
        lam_h = self.lam * self.h_ex
        object.__setattr__(self, "a_hat", 1.0 / lam_h if lam_h > 0.0 else math.inf)

    @property
    def initial_distance(self) -> float:
        """eps**alpha, the canonical starting distance."""
        return self.eps ** self.alpha


class Terminal(Enum):
    ANNIHILATED = "annihilated"
    REACHED_HORIZON = "reached_horizon"


@dataclass(frozen=True)
class Trajectory:
    """Discrete record of an integrated path a(t)."""

    times: np.ndarray
    positions: np.ndarray
    terminal: Terminal

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        a = np.asarray(self.positions, dtype=float)
        if t.shape != a.shape or t.ndim != 1:
            raise ValueError("Trajectory: times and positions must be equal-length 1D arrays")
        if t.size >= 2 and not np.all(np.diff(t) > 0.0):
            raise ValueError("Trajectory: times must be strictly increasing")
        if np.any(a < 0.0):
            raise ValueError("Trajectory: positions must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", a)


def drift(a: float, p: PhysicalParams) -> float:
    """Right-hand side of the boundary-vortex law at distance a > 0."""
    if not a > 0.0:
        raise DomainError(f"drift: a={a!r} must be positive")
    return p.c_eps - 1.0 / (p.log_eps * a)


def annihilation_time(p: PhysicalParams) -> float:
    """Time at which the vortex starting at eps**alpha reaches the boundary.

    For lam > 0 the Lambert-W solution gives

        t = (|ln eps| / (lam*h_ex)^2) * (|ln(1 - lam*h_ex*eps**alpha)| - lam*h_ex*eps**alpha),

    valid while lam*h_ex*eps**alpha < 1; for lam = 0 it reduces to
    eps**(2*alpha) * |ln eps| / 2 exactly.
    """
    if p.lam == 0.0:
        return p.eps ** (2.0 * p.alpha) * p.log_eps / 2.0
    lam_h = p.lam * p.h_ex
    x = lam_h * p.initial_distance
    if x >= 1.0:
        raise DomainError(
            f"annihilation_time: lam*h_ex*eps**alpha = {x!r} >= 1, start point at or "
            "beyond the upper equilibrium")
    return (p.log_eps / lam_h ** 2) * (-math.log1p(-x) - x)


def exact_solution(t: float, p: PhysicalParams) -> float:
    """Closed-form position a(t) for lam > 0 on [0, annihilation_time].

    a(t) = (1/(lam*h_ex)) * (1 + W0(-C * exp(lam^2 h_ex^2 t / |ln eps|)))
    with C = (1 - x) exp(-(1 - x)), x = lam*h_ex*eps**alpha.

    Evaluated through the identity 1 + e*W-argument = -expm1(-g) with
    g = (lam*h_ex)^2 (t_ann - t)/|ln eps|, which stays accurate all the way
    to the branch point: at t = t_ann the returned position is exactly 0.
    """
    if p.lam == 0.0:
        raise DomainError("exact_solution: requires lam > 0 (use the lam = 0 closed form)")
    lam_h = p.lam * p.h_ex
    x = lam_h * p.initial_distance
    if x >= 1.0:
        raise DomainError(f"exact_solution: lam*h_ex*eps**alpha = {x!r} >= 1")
    t_ann = annihilation_time(p)
    if not 0.0 <= t <= t_ann:
        raise DomainError(f"exact_solution: t={t!r} outside [0, {t_ann!r}]")
    g = (lam_h ** 2 / p.log_eps) * (t_ann - t)
    q = -math.expm1(-g)  # = 1 + e * (W argument), in [0, 1)
    if q <= 0.0:
        return 0.0
    if q <= 5e-5:
        wp1 = _w0p1_series(q)
    else:
        wp1 = 1.0 + lambert_w0(-math.exp(-(1.0 + g)))
    return wp1 / lam_h


def interior_velocity(grad_xi, degree: int, lambda_coef: float) -> np.ndarray:
    """Velocity of an interior vortex of degree +-1 in a potential gradient."""
    if degree not in (-1, 1):
        raise DomainError(f"interior_velocity: degree={degree!r} must be +-1")
    g = np.asarray(grad_xi, dtype=float)
    return (-degree * lambda_coef / math.pi) * g


# Dormand-Prince 5(4) tableau
_DP_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _hermite(theta, t0, h, y0, y1, f0, f1):
    """Cubic Hermite interpolant on an accepted step."""
    t2 = theta * theta
    t3 = t2 * theta
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1)


def _integrate_rhs(f: Callable[[float], float], a0: float, t_max: float,
                   tol: float, floor: float, substeps: int = 1) -> Trajectory:
    """Adaptive embedded RK 5(4) with PI step control and a position-floor event.

    Local error per step is held at or below tol (absolute).  A step landing
    at or below the floor is refined by bisection on the cubic Hermite
    interpolant and the trajectory terminates Annihilated at the crossing.
    With substeps > 1 each accepted step also records Hermite-interpolated
    interior samples, for consumers that quadrature over the samples.
    """
    t = 0.0
    y = a0
    k1 = f(y)
    scale = max(abs(y), floor, 1e-30)
    h = min(t_max / 64.0, 0.01 * scale / max(abs(k1), 1e-30))
    h = max(h, 1e3 * 5e-324)
    times = [0.0]
    positions = [a0]
    err_old = 1e-4
    n_steps = 0
    while True:
        n_steps += 1
        if n_steps > 5_000_000:
            raise ConvergenceError("integrate: step budget exhausted")
        last = t + h >= t_max
        if last:
            h = t_max - t
        if h < 32.0 * _EPS_T * max(abs(t), t_max / 1e6):
            raise StepSizeUnderflowError(
                f"integrate: step size underflow at t={t!r}, a={y!r} (singular drift "
                "reached faster than the tolerance permits)")
        try:
            k2 = f(y + h * (_DP_A[0][0] * k1))
            k3 = f(y + h * (_DP_A[1][0] * k1 + _DP_A[1][1] * k2))
            k4 = f(y + h * (_DP_A[2][0] * k1 + _DP_A[2][1] * k2 + _DP_A[2][2] * k3))
            k5 = f(y + h * (_DP_A[3][0] * k1 + _DP_A[3][1] * k2 + _DP_A[3][2] * k3
                            + _DP_A[3][3] * k4))
            k6 = f(y + h * (_DP_A[4][0] * k1 + _DP_A[4][1] * k2 + _DP_A[4][2] * k3
                            + _DP_A[4][3] * k4 + _DP_A[4][4] * k5))
            y5 = y + h * (_DP_B5[0] * k1 + _DP_B5[2] * k3 + _DP_B5[3] * k4
                          + _DP_B5[4] * k5 + _DP_B5[5] * k6)
            k7 = f(y5)
        except (DomainError, ValueError, OverflowError, ZeroDivisionError):
            # stage left the domain (e.g. stepped past the singularity): retry smaller
            h *= 0.25
            continue
        err = abs(h * (_DP_E[0] * k1 + _DP_E[2] * k3 + _DP_E[3] * k4
                       + _DP_E[4] * k5 + _DP_E[5] * k6 + _DP_E[6] * k7))
        err_norm = err / tol
        if err_norm > 1.0 or not math.isfinite(err_norm):
            if not math.isfinite(err_norm):
                h *= 0.25
            else:
                h *= max(0.2, 0.9 * err_norm ** -0.2)
            continue
        # accepted
        if y5 <= floor:
            lo, hi = 0.0, 1.0  # H(lo) > floor >= H(hi)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if _hermite(mid, t, h, y, y5, k1, k7) <= floor:
                    hi = mid
                else:
                    lo = mid
            t_cross = t + hi * h
            if t_cross <= times[-1]:
                t_cross = times[-1] + max(1e-3 * h, 16.0 * _EPS_T * abs(times[-1]))
            times.append(min(t_cross, t_max))
            positions.append(floor)
            return Trajectory(np.array(times), np.array(positions), Terminal.ANNIHILATED)
        for j in range(1, substeps):
            theta = j / substeps
            a_mid = _hermite(theta, t, h, y, y5, k1, k7)
            if a_mid > floor:
                times.append(t + theta * h)
                positions.append(a_mid)
        t += h
        y = y5
        k1 = k7  # FSAL
        times.append(t)
        positions.append(y)
        if last or t >= t_max:
            return Trajectory(np.array(times), np.array(positions), Terminal.REACHED_HORIZON)
        fac = 0.9 * max(err_norm, 1e-10) ** -0.14 * err_old ** 0.08
        h *= min(5.0, max(0.2, fac))
        err_old = max(err_norm, 1e-10)


_EPS_T = 2.220446049250313e-16


def annihilation_floor(p: PhysicalParams, a0: float) -> float:
    """Position below which integration declares annihilation.

    The drift is unbounded at a = 0 and the closed form approaches it like a
    square root, so truncating at 1e-3 of the initial scale changes the
    reported crossing time by O(floor^2 |ln eps|), below reporting precision.
    """
    return 1e-3 * min(p.initial_distance, a0)


def integrate(p: PhysicalParams, a0: float, t_max: float, tol: float) -> Trajectory:
    """Numerically integrate the boundary-vortex law from a0.

    Terminates early with Terminal.ANNIHILATED when the position reaches the
    annihilation floor; otherwise runs to t_max.
    """
    if not a0 > 0.0:
        raise DomainError(f"integrate: a0={a0!r} must be positive")
    if not t_max > 0.0:
        raise DomainError(f"integrate: t_max={t_max!r} must be positive")
    if not tol > 0.0:
        raise DomainError(f"integrate: tol={tol!r} must be positive")
    floor = annihilation_floor(p, a0)

    def f(a: float) -> float:
        return drift(a, p)

    return _integrate_rhs(f, a0, t_max, tol, floor)


def integrate_energy_ode(p: PhysicalParams, a0: float, t_max: float, tol: float) -> Trajectory:
    """Integrate the unsimplified law  da/dt * ln(a/eps) = lam*h_ex - 1/a.

    This is the form whose energy balance energy_balance_residual checks.
    The mobility ln(a/eps) vanishes at a = eps, so trajectories must stay
    above that point; running into it raises StepSizeUnderflowError.
    """
    if not a0 > p.eps:
        raise DomainError(f"integrate_energy_ode: a0={a0!r} must exceed eps={p.eps!r}")
    if not t_max > 0.0:
        raise DomainError(f"integrate_energy_ode: t_max={t_max!r} must be positive")
    if not tol > 0.0:
        raise DomainError(f"integrate_energy_ode: tol={tol!r} must be positive")
    lam_h = p.lam * p.h_ex
    floor = annihilation_floor(p, a0)

    def f(a: float) -> float:
        # the law is only meaningful above the mobility zero at a = eps
        if not a > p.eps:
            raise DomainError("position reached the mobility singularity at a = eps")
        return (lam_h - 1.0 / a) / math.log(a / p.eps)

    # samples denser than the accepted steps: the energy diagnostic
    # quadratures over them, and its trapezoid error would otherwise
    # dominate the integrator error
    return _integrate_rhs(f, a0, t_max, tol, floor, substeps=4)


def energy_balance_residual(traj: Trajectory, p: PhysicalParams) -> float:
    """Drift of the energy identity along a trajectory of the unsimplified law.

    For the exact solution,

        [pi ln(a/eps) - pi lam h_ex a](t) + integral_0^t pi ln(a/eps) (da/dt)^2 ds

    is constant; the return value is the max deviation from its initial
    value, with the integral taken by the trapezoid rule on the samples and
    da/dt recovered from the law itself.
    """
    a = traj.positions
    if np.any(a <= 0.0):
        raise DomainError("energy_balance_residual: positions must be positive")
    t = traj.times
    lam_h = p.lam * p.h_ex
    log_ratio = np.log(a / p.eps)
    bracket = math.pi * log_ratio - math.pi * lam_h * a
    adot = (lam_h - 1.0 / a) / log_ratio
    integrand = math.pi * log_ratio * adot ** 2
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))))
    resid = bracket + cum - bracket[0]
    return float(np.max(np.abs(resid)))
