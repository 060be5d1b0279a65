"""Numerical laboratory for the end geometry of asymptotically locally
hyperbolic manifolds: Fermi-coordinate curvature, Riccati flows of the
level-set shape operator, model ODE systems, conformal compactification
and curvature identities for Einstein metrics."""

__version__ = "0.1.0"
