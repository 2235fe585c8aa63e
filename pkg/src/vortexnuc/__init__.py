"""Boundary-vortex nucleation toolkit.

Exact and numerical solutions of the boundary-vortex law, first-passage
analysis of its noisy perturbation (closed forms against Monte Carlo), the
Meissner problem supplying the physical constants, and a small 2D
Ginzburg-Landau field experiment for the annihilation-time scaling.
"""

from .errors import (ConvergenceError, DomainError, HorizonError, HypothesisError,
                     ResolutionError, StepSizeUnderflowError)
from .ode_dynamics import (PhysicalParams, Terminal, Trajectory, annihilation_time,
                           drift, energy_balance_residual, exact_solution, integrate,
                           integrate_energy_ode, interior_velocity)
from .specialfn import (LogValue, lambert_w0, log_gamma, log_regularized_gamma_p,
                        lower_gamma, truncated_exp)

__version__ = "0.1.0"
