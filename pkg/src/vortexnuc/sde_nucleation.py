"""Monte Carlo first-passage simulation of the noisy boundary-vortex law.

Paths follow  da = (lam*h_ex/|ln eps| - 1/(|ln eps| a)) dt + sqrt(2 beta) dW
by Euler-Maruyama with near-origin step shrinking, absorbed at a <= 0
(annihilation, overshoot included) and at a >= a_hat (nucleation).  The
ensemble estimate is deterministic for a given seed no matter how paths are
scheduled across threads.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _mc_kernel as _k
from .errors import DomainError
from .ode_dynamics import PhysicalParams


@dataclass(frozen=True)
class NoiseParams:
    """Noise strength, RNG seed, and discretization of the path simulation."""

    beta: float
    seed: int
    dt_base: float
    max_time: float

    def __post_init__(self):
        if not self.beta > 0.0:
            raise DomainError(f"NoiseParams: beta={self.beta!r} must be positive")
        if not self.dt_base > 0.0:
            raise DomainError(f"NoiseParams: dt_base={self.dt_base!r} must be positive")
        if not self.max_time > 0.0:
            raise DomainError(f"NoiseParams: max_time={self.max_time!r} must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"NoiseParams: seed={self.seed!r} must fit in 64 bits")


class ExitLabel(Enum):
    ANNIHILATED = "annihilated"
    NUCLEATED = "nucleated"
    HORIZON_EXCEEDED = "horizon_exceeded"


_LABELS = {_k.ANNIHILATED: ExitLabel.ANNIHILATED,
           _k.NUCLEATED: ExitLabel.NUCLEATED,
           _k.HORIZON_EXCEEDED: ExitLabel.HORIZON_EXCEEDED}


@dataclass(frozen=True)
class ExitOutcome:
    """Terminal record of one path."""

    label: ExitLabel
    exit_time: float
    path_steps: int
    final_position: float


@dataclass(frozen=True)
class ExitStats:
    """Binomial tally of nucleation events over an ensemble."""

    trials: int
    nucleated: int
    estimate: float
    std_error: float
    horizon_exceeded: int


def bessel_dimension(p: PhysicalParams, n: NoiseParams) -> float:
    """Dimension of the Bessel process the law is compared against: 1 + 1/(beta |ln eps|)."""
    return 1.0 + 1.0 / (n.beta * p.log_eps)


def _check_start(p: PhysicalParams, a0: float) -> None:
    if not (0.0 <= a0 <= p.a_hat):
        raise DomainError(f"start point a0={a0!r} outside [0, {p.a_hat!r}]")


def simulate_path(p: PhysicalParams, n: NoiseParams, a0: float,
                  path_index: int, zero_drift: bool = False) -> ExitOutcome:
    """Simulate one path; deterministic given (seed, path_index).

    zero_drift is a validation hook that disables the drift term, leaving a
    pure diffusion whose exit probability is linear in the start point.
    """
    _check_start(p, a0)
    if not 0 <= path_index < 2 ** 63:
        raise DomainError(f"path_index={path_index!r} out of range")
    code, t, steps, final = _k._path(
        np.uint64(n.seed), np.uint64(path_index), float(a0), p.a_hat, p.c_eps,
        p.log_eps, n.beta, n.dt_base, n.max_time, not zero_drift, _k.PATH_STEP_CAP)
    return ExitOutcome(_LABELS[int(code)], float(t), int(steps), float(final))


def simulate_batch(p: PhysicalParams, n: NoiseParams, a0: float, trials: int,
                   zero_drift: bool = False):
    """Simulate paths 0..trials-1; returns (codes, exit_times, steps, finals) arrays.

    Entry i is bit-identical to simulate_path(..., path_index=i) regardless
    of the thread count.
    """
    _check_start(p, a0)
    if trials <= 0:
        raise DomainError(f"trials={trials!r} must be positive")
    codes = np.empty(trials, dtype=np.int64)
    times = np.empty(trials, dtype=np.float64)
    steps = np.empty(trials, dtype=np.int64)
    finals = np.empty(trials, dtype=np.float64)
    _k._batch(np.uint64(n.seed), trials, float(a0), p.a_hat, p.c_eps, p.log_eps,
              n.beta, n.dt_base, n.max_time, not zero_drift, _k.PATH_STEP_CAP,
              codes, times, steps, finals)
    return codes, times, steps, finals


@contextmanager
def _thread_count(jobs):
    import numba
    if jobs is None:
        yield
        return
    if jobs < 1:
        raise DomainError(f"jobs={jobs!r} must be at least 1")
    previous = numba.get_num_threads()
    numba.set_num_threads(min(jobs, numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def estimate_exit_prob(p: PhysicalParams, n: NoiseParams, a0: float, trials: int,
                       zero_drift: bool = False, jobs: int | None = None) -> ExitStats:
    """Monte Carlo estimate of the nucleation probability from a0.

    The tally aggregates simulate_path over path_index in [0, trials); the
    result is independent of the number of worker threads.
    """
    if trials < 100:
        raise DomainError(f"trials={trials!r} must be at least 100")
    with _thread_count(jobs):
        codes, _, _, _ = simulate_batch(p, n, a0, trials, zero_drift=zero_drift)
    nucleated = int(np.count_nonzero(codes == _k.NUCLEATED))
    horizon = int(np.count_nonzero(codes == _k.HORIZON_EXCEEDED))
    estimate = nucleated / trials
    return ExitStats(trials=trials, nucleated=nucleated, estimate=estimate,
                     std_error=math.sqrt(estimate * (1.0 - estimate) / trials),
                     horizon_exceeded=horizon)
