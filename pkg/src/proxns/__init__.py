"""proxns: marginal likelihood for high-dimensional log-concave models.

Nested sampling driven by proximal Langevin Markov chains, with the
linear operators, projection solvers and analytic oracles needed for
model comparison in convex imaging problems.
"""

from ._kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
