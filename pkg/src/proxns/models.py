"""Statistical model layer: prior potentials, Gaussian likelihood and the
likelihood ball used as the hard constraint during nested sampling.

Potentials follow the unnormalised convention: the likelihood value is
exp(-g(x)) without the Gaussian normalising constant, and priors are
exp(-f(x)) without their volume factor. Reported evidences are therefore
relative to the implicitly normalised prior; the analytic oracles account
for the prior volume where it is known.
"""

import math
from dataclasses import dataclass

import numpy as np

from .convexity import assert_orthonormal, prox_l1_synthesis, soft_threshold
from .errors import ContractError

FLAT = "flat"
GAUSSIAN_L2 = "gaussian-l2"
LAPLACE_L1 = "laplace-l1"
PRIOR_KINDS = (FLAT, GAUSSIAN_L2, LAPLACE_L1)


@dataclass(frozen=True)
class PriorModel:
    """Log-concave prior exp(-f) with f in {0, mu*||D'x||_2^2, mu*||D'x||_1}.

    ``dict_op`` is the orthonormal dictionary (None means identity).
    Flat priors may carry box ``bounds = (lo, hi)`` applied per coordinate;
    without bounds a flat prior is improper and only usable under a
    likelihood constraint.
    """

    kind: str
    mu: float = 0.0
    dict_op: object = None
    bounds: tuple = None

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ContractError(f"unknown prior kind {self.kind!r}")
        if self.mu < 0:
            raise ContractError("regularisation strength mu must be nonnegative")
        if self.kind != FLAT and self.bounds is not None:
            raise ContractError("box bounds only apply to flat priors")
        if self.bounds is not None and not self.bounds[0] < self.bounds[1]:
            raise ContractError("flat prior bounds must satisfy lo < hi")
        if self.dict_op is not None and not getattr(self.dict_op, "is_identity", False):
            assert_orthonormal(self.dict_op)

    def lipschitz(self):
        """Lipschitz constant of grad f (0 for the non-smooth/flat kinds)."""
        return 2.0 * self.mu if self.kind == GAUSSIAN_L2 else 0.0

    def _coeffs(self, x):
        if self.dict_op is None or self.dict_op.is_identity:
            return x
        return self.dict_op.analysis(x)

    def potential(self, x):
        """f(x); +inf outside the box of a bounded flat prior."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == FLAT:
            if self.bounds is not None:
                lo, hi = self.bounds
                if x.min() < lo or x.max() > hi:
                    return math.inf
            return 0.0
        if self.kind == GAUSSIAN_L2:
            # orthonormal dictionary: ||D'x||_2 = ||x||_2
            return self.mu * float(np.dot(x, x))
        return self.mu * float(np.sum(np.abs(self._coeffs(x))))

    def prox(self, x, lam):
        """prox of f at smoothing scale lam."""
        if lam <= 0:
            raise ContractError("smoothing scale lam must be positive")
        x = np.asarray(x, dtype=np.float64)
        if self.kind == FLAT:
            if self.bounds is None:
                return x.copy()
            return np.clip(x, self.bounds[0], self.bounds[1])
        if self.kind == GAUSSIAN_L2:
            return x / (1.0 + 2.0 * lam * self.mu)
        if self.dict_op is None or self.dict_op.is_identity:
            return soft_threshold(x, lam * self.mu)
        return prox_l1_synthesis(x, lam * self.mu, self.dict_op)

    def potential_and_prox(self, x, lam):
        """(f(x), prox_f(x, lam)) sharing one analysis pass where possible."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == LAPLACE_L1:
            coeffs = self._coeffs(x)
            pot = self.mu * float(np.sum(np.abs(coeffs)))
            thresholded = soft_threshold(coeffs, lam * self.mu)
            if self.dict_op is None or self.dict_op.is_identity:
                prox = thresholded
            else:
                prox = x + self.dict_op.synthesis(thresholded - coeffs)
            return pot, prox
        return self.potential(x), self.prox(x, lam)


@dataclass(frozen=True)
class GaussianLikelihood:
    """Gaussian data-fit potential g(x) = ||y - Phi x||^2 / (2 sigma^2)."""

    data: np.ndarray
    op: object
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ContractError("noise level sigma must be positive")
        data = np.asarray(self.data)
        if data.size != self.op.out_dim:
            raise ContractError("data length does not match the operator range")
        object.__setattr__(self, "data", data)

    def potential(self, x):
        resid = self.data - self.op.forward(np.asarray(x, dtype=np.float64))
        return float(np.vdot(resid, resid).real) / (2.0 * self.sigma**2)


@dataclass(frozen=True)
class LikelihoodBall:
    """Constraint set {x : g(x) < tau} with tau = -log L*."""

    likelihood: GaussianLikelihood
    tau: float

    def contains(self, x):
        return self.likelihood.potential(x) < self.tau

    def contains_potential(self, g_value):
        return g_value < self.tau

    def radius_measurement(self):
        """Radius sqrt(2 tau sigma^2) of the data-space ball around y."""
        if self.tau <= 0:
            raise ContractError("likelihood ball is empty for tau <= 0")
        return math.sqrt(2.0 * self.tau * self.likelihood.sigma**2)


def prior_potential(prior, x):
    """f(x) for the given prior."""
    return prior.potential(x)


def likelihood_potential(likelihood, x):
    """g(x) for the given likelihood."""
    return likelihood.potential(x)


def level_to_tau(log_lstar):
    """Likelihood threshold L* (as log L*) to ball threshold tau = -log L*."""
    return -log_lstar


def ball_contains(ball, x):
    """Strict membership test g(x) < tau."""
    return ball.contains(x)
