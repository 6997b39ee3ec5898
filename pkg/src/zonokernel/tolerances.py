"""Numerical tolerances shared across the package."""

#: LP feasibility and zonotope reconstruction residuals.
FEAS_TOL = 1e-8
#: Geometric comparisons (hull bounds, polygon areas, unit norms).
GEOM_TOL = 1e-9
#: Certification threshold reported to users.
CERT_TOL = 1e-6
#: Primal residual accepted on an ``optimal`` LP solution.
LP_TOL = 1e-7
#: Slack allowed when validating simulated trajectories against boxes.
SIM_TOL = 1e-7
