"""Zonotope inner approximations of safe sets for constrained linear systems, posed as linear programs."""

from .dynamics import (
    ContinuousAffineSystem,
    DiscreteAffineSystem,
    PolicyParams,
    discretize,
    load_system,
    reach_sequence,
    step,
)
from .kernel import (
    CertReport,
    KernelError,
    KernelMode,
    KernelProblem,
    KernelResult,
    assemble_program,
    certify,
    prune,
    solve_kernel,
)
from .lp import LPSolution, StandardLP, solve_lp
from .zonotope import (
    IntervalBox,
    Zonotope,
    concatenate,
    contained_in_box,
    interval_hull,
    lambda_of,
    linear_map,
    project_polygon,
    scale,
)

__version__ = "0.1.0"
