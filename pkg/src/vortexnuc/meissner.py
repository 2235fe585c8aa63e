"""The Meissner potential problem and the constants it supplies.

Solves  -laplacian(xi) + xi + 1 = 0  with zero boundary data on an interval,
a rectangle, or a disk (reduced to its radial form), by second-order
centered finite differences and matrix-free conjugate-gradient iteration.
Downstream quantities: the boundary coefficient lambda = -2 d_n xi (inward),
the first critical field, and the field energy of the vortex-free state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

_RESIDUAL_TARGET = 1e-10


@dataclass(frozen=True)
class Interval:
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise DomainError("Interval: half_width must be positive")


@dataclass(frozen=True)
class Rectangle:
    lx: float
    ly: float

    def __post_init__(self):
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise DomainError("Rectangle: side lengths must be positive")


@dataclass(frozen=True)
class Disk:
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise DomainError("Disk: radius must be positive")


@dataclass(frozen=True)
class MeissnerSolution:
    """Discretized potential with domain metadata.

    values holds node samples: shape (n+1,) on an interval (x in [-L, L]),
    (nx+1, ny+1) on a rectangle, and (n+1,) radially on a disk (r in [0, R]).
    boundary_mask flags Dirichlet nodes.
    """

    domain: Interval | Rectangle | Disk
    h: float
    values: np.ndarray
    boundary_mask: np.ndarray
    residual: float

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[~self.boundary_mask]


def _cg_pass(apply_op, rhs, max_iter):
    """One conjugate-gradient solve, run to its 2-norm rounding floor."""
    x = np.zeros_like(rhs)
    r = rhs - apply_op(x)
    d = r.copy()
    rr = float(np.dot(r.ravel(), r.ravel()))
    rr0 = rr
    for _ in range(max_iter):
        if rr <= 1e-28 * rr0 or rr == 0.0:
            break
        ad = apply_op(d)
        dad = float(np.dot(d.ravel(), ad.ravel()))
        if dad <= 0.0:
            break  # search direction exhausted at rounding level
        alpha = rr / dad
        x += alpha * d
        r -= alpha * ad
        rr_new = float(np.dot(r.ravel(), r.ravel()))
        if rr_new == 0.0:
            break
        d = r + (rr_new / rr) * d
        rr = rr_new
    return x


def _cg(apply_op, rhs, residual_op, tol, max_iter):
    """Conjugate gradients with iterative refinement, stopped on the max-norm
    residual of the discrete equation."""
    x = _cg_pass(apply_op, rhs, max_iter)
    res = residual_op(x)
    for _ in range(4):
        if res <= tol:
            return x, res
        x = x + _cg_pass(apply_op, rhs - apply_op(x), max_iter)
        res_new = residual_op(x)
        if res_new >= res:
            res = res_new
            break  # at the attainable floor
        res = res_new
    if res <= tol:
        return x, res
    raise ConvergenceError(
        f"meissner: refinement stalled at max-norm residual {res:.3e} (target {tol:.1e})",
        residual=res)


def _solve_interval(L: float, n: int) -> MeissnerSolution:
    h = 2.0 * L / n
    inner = n - 1

    def apply_op(u):
        out = np.empty_like(u)
        out[:] = (2.0 / h ** 2 + 1.0) * u
        out[1:] -= u[:-1] / h ** 2
        out[:-1] -= u[1:] / h ** 2
        return out

    rhs = np.full(inner, -1.0)

    def residual_op(u):
        return float(np.max(np.abs(apply_op(u) - rhs)))

    u, res = _cg(apply_op, rhs, residual_op, _RESIDUAL_TARGET, max_iter=100 * n)
    values = np.zeros(n + 1)
    values[1:-1] = u
    mask = np.zeros(n + 1, dtype=bool)
    mask[0] = mask[-1] = True
    return MeissnerSolution(Interval(L), h, values, mask, res)


def _solve_rectangle(lx: float, ly: float, n: int) -> MeissnerSolution:
    h = lx / n
    ny = round(ly / h)
    if ny < 2 or abs(ny * h - ly) > 1e-9 * ly:
        raise DomainError(
            f"rectangle aspect ratio {lx}:{ly} incompatible with square cells at n={n}")
    nx = n

    def apply_op(u):
        out = (4.0 / h ** 2 + 1.0) * u
        out[1:, :] -= u[:-1, :] / h ** 2
        out[:-1, :] -= u[1:, :] / h ** 2
        out[:, 1:] -= u[:, :-1] / h ** 2
        out[:, :-1] -= u[:, 1:] / h ** 2
        return out

    rhs = np.full((nx - 1, ny - 1), -1.0)

    def residual_op(u):
        return float(np.max(np.abs(apply_op(u) - rhs)))

    u, res = _cg(apply_op, rhs, residual_op, _RESIDUAL_TARGET,
                 max_iter=200 * max(nx, ny))
    values = np.zeros((nx + 1, ny + 1))
    values[1:-1, 1:-1] = u
    mask = np.zeros((nx + 1, ny + 1), dtype=bool)
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
    return MeissnerSolution(Rectangle(lx, ly), h, values, mask, res)


def _solve_disk(R: float, n: int) -> MeissnerSolution:
    # conservative radial scheme for -(r xi')' + r xi = -r with xi'(0) = 0
    h = R / n
    r = np.arange(n + 1) * h
    r_half = (np.arange(n) + 0.5) * h  # r at cell faces
    inner = n  # unknowns j = 0..n-1 (center included), xi(R) = 0

    flux_w = np.zeros(inner)        # face weight to the left of node j
    flux_w[1:] = r_half[:-1] / h
    flux_e = r_half / h             # face to the right of node j
    vol = np.empty(inner)           # control volumes: int r dr over the cell
    vol[0] = h ** 2 / 8.0
    vol[1:] = r[1:n] * h

    def apply_op(u):
        out = (flux_w + flux_e + vol) * u
        out[1:] -= flux_w[1:] * u[:-1]
        out[:-1] -= flux_e[:-1] * u[1:]
        return out

    rhs = -vol

    def pde_residual(u):
        # max-norm residual of -lap(xi) + xi + 1 on the radial stencil
        full = np.zeros(n + 1)
        full[:n] = u
        resid = np.empty(n)
        resid[0] = 4.0 * (full[0] - full[1]) / h ** 2 + full[0] + 1.0
        j = np.arange(1, n)
        lap = (full[j + 1] - 2.0 * full[j] + full[j - 1]) / h ** 2 \
            + (full[j + 1] - full[j - 1]) / (2.0 * r[j] * h)
        resid[1:] = -lap + full[j] + 1.0
        return float(np.max(np.abs(resid)))

    u, res = _cg(apply_op, rhs, pde_residual, _RESIDUAL_TARGET, max_iter=100 * n)
    values = np.zeros(n + 1)
    values[:n] = u
    mask = np.zeros(n + 1, dtype=bool)
    mask[-1] = True
    return MeissnerSolution(Disk(R), h, values, mask, res)


def solve_meissner(domain: Interval | Rectangle | Disk, n: int) -> MeissnerSolution:
    """Solve the potential problem on the given domain at resolution n.

    n counts grid cells along the primary axis (radial cells for a disk);
    the returned solution satisfies the discrete equation to 1e-10 max-norm.
    """
    if n < 16:
        raise DomainError(f"solve_meissner: n={n!r} must be at least 16")
    if isinstance(domain, Interval):
        return _solve_interval(domain.half_width, n)
    if isinstance(domain, Rectangle):
        return _solve_rectangle(domain.lx, domain.ly, n)
    if isinstance(domain, Disk):
        return _solve_disk(domain.radius, n)
    raise DomainError(f"solve_meissner: unsupported domain {domain!r}")


def boundary_lambda(sol: MeissnerSolution, boundary_point) -> float:
    """-2 times the inward normal derivative of the potential at a boundary node.

    One-sided second-order stencil; rectangle corners have no normal and are
    rejected.  Positive on every valid boundary point.
    """
    v = sol.values
    h = sol.h
    if isinstance(sol.domain, Interval):
        i = int(boundary_point)
        if i == 0:
            dn = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
        elif i == v.shape[0] - 1:
            dn = (-3.0 * v[-1] + 4.0 * v[-2] - v[-3]) / (2.0 * h)
        else:
            raise DomainError(f"boundary_lambda: node {i} is not on the boundary")
        return -2.0 * dn
    if isinstance(sol.domain, Disk):
        i = int(boundary_point)
        if i != v.shape[0] - 1:
            raise DomainError(f"boundary_lambda: node {i} is not on the rim")
        dn = (-3.0 * v[-1] + 4.0 * v[-2] - v[-3]) / (2.0 * h)
        return -2.0 * dn
    if isinstance(sol.domain, Rectangle):
        i, j = boundary_point
        nx, ny = v.shape[0] - 1, v.shape[1] - 1
        on_x = i in (0, nx)
        on_y = j in (0, ny)
        if on_x and on_y:
            raise DomainError("boundary_lambda: corner nodes have no normal stencil")
        if on_x:
            s = 1 if i == 0 else -1
            dn = (-3.0 * v[i, j] + 4.0 * v[i + s, j] - v[i + 2 * s, j]) / (2.0 * h)
        elif on_y:
            s = 1 if j == 0 else -1
            dn = (-3.0 * v[i, j] + 4.0 * v[i, j + s] - v[i, j + 2 * s]) / (2.0 * h)
        else:
            raise DomainError(f"boundary_lambda: node {boundary_point} is interior")
        return -2.0 * dn
    raise DomainError("boundary_lambda: unsupported domain")


def first_critical_field(sol: MeissnerSolution, eps: float) -> float:
    """|ln eps| / (2 max |xi|), the field strength above which a vortex pays."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"first_critical_field: eps={eps!r} must be in (0, 1)")
    max_abs = float(np.max(np.abs(sol.interior_values)))
    return abs(math.log(eps)) / (2.0 * max_abs)


def _interval_energy_density(sol: MeissnerSolution, second_term):
    v = sol.values
    grad = np.diff(v) / sol.h
    mid = 0.5 * (v[1:] + v[:-1])
    return (0.5 * grad ** 2 + 0.5 * second_term(mid, v)) * sol.h


def meissner_energy(sol: MeissnerSolution, h_ex: float) -> float:
    """Field energy h_ex^2 * integral(|grad xi|^2/2 + |lap xi - 1|^2/2).

    The equation gives lap(xi) - 1 = xi, so the second term is xi^2/2;
    meissner_energy_laplacian evaluates the same quantity through the
    discrete Laplacian for a consistency check.
    """
    v = sol.values
    h = sol.h
    if isinstance(sol.domain, Interval):
        grad = np.diff(v) / h
        mid = 0.5 * (v[1:] + v[:-1])
        total = float(np.sum(0.5 * grad ** 2 + 0.5 * mid ** 2) * h)
    elif isinstance(sol.domain, Rectangle):
        gx = 0.5 * ((v[1:, :-1] - v[:-1, :-1]) + (v[1:, 1:] - v[:-1, 1:])) / h
        gy = 0.5 * ((v[:-1, 1:] - v[:-1, :-1]) + (v[1:, 1:] - v[1:, :-1])) / h
        mid = 0.25 * (v[1:, 1:] + v[1:, :-1] + v[:-1, 1:] + v[:-1, :-1])
        total = float(np.sum(0.5 * (gx ** 2 + gy ** 2) + 0.5 * mid ** 2) * h * h)
    elif isinstance(sol.domain, Disk):
        r_half = (np.arange(v.shape[0] - 1) + 0.5) * h
        grad = np.diff(v) / h
        mid = 0.5 * (v[1:] + v[:-1])
        total = float(2.0 * math.pi * np.sum(
            (0.5 * grad ** 2 + 0.5 * mid ** 2) * r_half) * h)
    else:
        raise DomainError("meissner_energy: unsupported domain")
    return h_ex ** 2 * total


def _d2_1d(v: np.ndarray, h: float) -> np.ndarray:
    """Second derivative at every node; one-sided O(h^2) at the ends."""
    d2 = np.empty_like(v)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h ** 2
    d2[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h ** 2
    return d2


def discrete_laplacian(sol: MeissnerSolution) -> np.ndarray:
    """Discrete Laplacian at every node, one-sided at boundaries."""
    v = sol.values
    h = sol.h
    if isinstance(sol.domain, Interval):
        return _d2_1d(v, h)
    if isinstance(sol.domain, Rectangle):
        return np.apply_along_axis(_d2_1d, 0, v, h) + np.apply_along_axis(_d2_1d, 1, v, h)
    if isinstance(sol.domain, Disk):
        lap = np.empty_like(v)
        d2 = _d2_1d(v, h)
        r = np.arange(v.shape[0]) * h
        lap[0] = 4.0 * (v[1] - v[0]) / h ** 2  # radial limit at the center
        lap[1:-1] = d2[1:-1] + (v[2:] - v[:-2]) / (2.0 * r[1:-1] * h)
        lap[-1] = d2[-1] + (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h * r[-1])
        return lap
    raise DomainError("discrete_laplacian: unsupported domain")


def meissner_energy_laplacian(sol: MeissnerSolution, h_ex: float) -> float:
    """Energy with the second term evaluated as (lap_h xi - 1)^2/2.

    Same quadrature cells as meissner_energy; the two evaluations agree up
    to discretization order because the equation ties lap(xi) - 1 to xi.
    """
    v = sol.values
    h = sol.h
    lap = discrete_laplacian(sol)
    if isinstance(sol.domain, Interval):
        grad = np.diff(v) / h
        mid = 0.5 * (lap[1:] + lap[:-1]) - 1.0
        total = float(np.sum(0.5 * grad ** 2 + 0.5 * mid ** 2) * h)
    elif isinstance(sol.domain, Rectangle):
        gx = 0.5 * ((v[1:, :-1] - v[:-1, :-1]) + (v[1:, 1:] - v[:-1, 1:])) / h
        gy = 0.5 * ((v[:-1, 1:] - v[:-1, :-1]) + (v[1:, 1:] - v[1:, :-1])) / h
        mid = 0.25 * (lap[1:, 1:] + lap[1:, :-1] + lap[:-1, 1:] + lap[:-1, :-1]) - 1.0
        total = float(np.sum(0.5 * (gx ** 2 + gy ** 2) + 0.5 * mid ** 2) * h * h)
    elif isinstance(sol.domain, Disk):
        r_half = (np.arange(v.shape[0] - 1) + 0.5) * h
        grad = np.diff(v) / h
        mid = 0.5 * (lap[1:] + lap[:-1]) - 1.0
        total = float(2.0 * math.pi * np.sum(
            (0.5 * grad ** 2 + 0.5 * mid ** 2) * r_half) * h)
    else:
        raise DomainError("meissner_energy_laplacian: unsupported domain")
    return h_ex ** 2 * total
