"""Projection onto the likelihood ball: closed form for identity forward
operators, ADMM and primal-dual splitting for general ones.

Both iterative solvers work on the real-restricted problem
min ||x - x'||^2 s.t. ||y - Phi x|| <= sqrt(2 tau sigma^2) over x in R^d,
so operator adjoints map back into the real image space.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from . import _kernels
from .errors import ContractError
from .operators import MaskedFourierOperator

_TINY = 1e-300


@dataclass(frozen=True)
class AdmmConfig:
    beta: float = 1.0
    max_iter: int = 200
    rel_tol: float = 1e-5
    cg_tol: float = 1e-8
    cg_max_iter: int = 100

    def __post_init__(self):
        if min(self.beta, self.max_iter, self.rel_tol, self.cg_tol, self.cg_max_iter) <= 0:
            raise ContractError("ADMM configuration values must be positive")


@dataclass(frozen=True)
class PdConfig:
    delta1: float = 0.95
    delta2: float = 0.95
    delta3: float = 1.0
    max_iter: int = 300
    rel_tol: float = 1e-5

    def __post_init__(self):
        if min(self.delta1, self.delta2, self.max_iter, self.rel_tol) <= 0:
            raise ContractError("primal-dual configuration values must be positive")
        if not 0.0 <= self.delta3 <= 1.0:
            raise ContractError("extrapolation parameter delta3 must be in [0, 1]")

    def check_operator(self, norm_bound):
        if self.delta1 * self.delta2 * norm_bound**2 > 1.0 + 1e-12:
            raise ContractError("step sizes violate delta1*delta2*||Phi||^2 <= 1")


@dataclass
class ProjectionResult:
    """Projected point plus solver diagnostics and warm-start data."""

    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    z: np.ndarray = None


def project_identity(ball, x):
    """Closed-form projection when the forward operator is the identity."""
    if not ball.likelihood.op.is_identity:
        raise ContractError("closed-form projection requires an identity operator")
    radius = ball.radius_measurement()
    x = np.ascontiguousarray(x, dtype=np.float64)
    center = np.ascontiguousarray(np.real(ball.likelihood.data), dtype=np.float64)
    return _kernels.ball_project_real(x, center, radius)


def solve_normal_system(op, beta, rhs, tol=1e-8, max_iter=100, method="auto"):
    """Solve (I + beta * Re Phi' Phi) x = rhs over the real image space.

    Masked unitary FFT operators admit an exact diagonal solve in Fourier
    space (the symmetrised selection diagonal); anything else falls back to
    conjugate gradients. Returns (x, converged).
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    if beta == 0:
        return rhs.copy(), True
    if op.is_identity:
        return rhs / (1.0 + beta), True
    if method not in ("auto", "closed", "cg"):
        raise ContractError(f"unknown solve method {method!r}")
    if method in ("auto", "closed") and isinstance(op, MaskedFourierOperator):
        h, w = op.grid_dims
        multiplier = 1.0 + beta * op.normal_multiplier()
        spectrum = np.fft.fft2(rhs.reshape(h, w), norm="ortho") / multiplier
        return np.fft.ifft2(spectrum, norm="ortho").real.reshape(-1), True
    if method == "closed":
        raise ContractError("closed-form solve is only available for masked FFT operators")

    def matvec(v):
        return v + beta * op.adjoint(op.forward(v))

    linop = scipy.sparse.linalg.LinearOperator((op.in_dim, op.in_dim), matvec=matvec)
    x, info = scipy.sparse.linalg.cg(linop, rhs, rtol=tol, atol=0.0, maxiter=max_iter)
    return x, info == 0


def admm_project(ball, x_prime, cfg=None, x0=None, z0=None):
    """Likelihood-ball projection by ADMM splitting u = Phi x."""
    cfg = cfg or AdmmConfig()
    lik = ball.likelihood
    op = lik.op
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if lik.potential(x_prime) < ball.tau:
        return ProjectionResult(x_prime.copy(), True, 0, 0.0, z=z0)
    radius = ball.radius_measurement()
    y = np.ascontiguousarray(lik.data, dtype=np.complex128)
    x = x_prime.copy() if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    z = (np.zeros(op.out_dim, dtype=np.complex128) if z0 is None
         else np.asarray(z0, dtype=np.complex128).copy())
    fx = op.forward(x)
    residual = np.inf
    iterations = 0
    solver_ok = True
    for iterations in range(1, cfg.max_iter + 1):
        u = _kernels.ball_project_complex(np.ascontiguousarray(fx - z), y, radius)
        rhs = x_prime + cfg.beta * op.adjoint(u + z)
        x, ok = solve_normal_system(op, cfg.beta, rhs, tol=cfg.cg_tol,
                                    max_iter=cfg.cg_max_iter)
        solver_ok = solver_ok and ok
        fx = op.forward(x)
        z = z + u - fx
        residual = float(np.linalg.norm(u - fx) / max(np.linalg.norm(fx), _TINY))
        if residual < cfg.rel_tol:
            break
    feasible = lik.potential(x) <= ball.tau * (1.0 + cfg.rel_tol)
    converged = residual < cfg.rel_tol and feasible and solver_ok
    return ProjectionResult(x, converged, iterations, residual, z=z)


def pd_project(ball, x_prime, cfg=None, x0=None, z0=None, trace=None):
    """Likelihood-ball projection by the primal-dual (Chambolle-Pock) scheme.

    The dual step applies the scaled conjugate prox via the Moreau identity,
    prox_{d1 h*}(v) = v - d1 proj(v / d1), which reduces to the plain
    decomposition at d1 = 1. Pass a list as ``trace`` to record the squared
    distance to x' per iteration.
    """
    cfg = cfg or PdConfig()
    lik = ball.likelihood
    op = lik.op
    cfg.check_operator(getattr(op, "norm_bound", 1.0))
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if lik.potential(x_prime) < ball.tau:
        return ProjectionResult(x_prime.copy(), True, 0, 0.0, z=z0)
    radius = ball.radius_measurement()
    y = np.ascontiguousarray(lik.data, dtype=np.complex128)
    x = x_prime.copy() if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    z = (np.zeros(op.out_dim, dtype=np.complex128) if z0 is None
         else np.asarray(z0, dtype=np.complex128).copy())
    xbar = x.copy()
    d1, d2, d3 = cfg.delta1, cfg.delta2, cfg.delta3
    residual = np.inf
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        v = z + d1 * op.forward(xbar)
        z = v - d1 * _kernels.ball_project_complex(np.ascontiguousarray(v / d1), y, radius)
        x_new = (d2 * x_prime + x - d2 * op.adjoint(z)) / (1.0 + d2)
        xbar = x_new + d3 * (x_new - x)
        residual = float(np.linalg.norm(x_new - x) / max(np.linalg.norm(x), _TINY))
        x = x_new
        if trace is not None:
            diff = x - x_prime
            trace.append(float(np.dot(diff, diff)))
        if residual < cfg.rel_tol:
            break
    feasible = lik.potential(x) <= ball.tau * (1.0 + cfg.rel_tol)
    converged = residual < cfg.rel_tol and feasible
    return ProjectionResult(x, converged, iterations, residual, z=z)


class Projector:
    """Stateful ball projector with warm starting across successive calls.

    One instance per Markov chain: successive Langevin states are close, so
    reusing the previous primal/dual iterates cuts inner iterations. The
    identity fast path delegates to the closed form.
    """

    def __init__(self, ball, method="auto", admm_cfg=None, pd_cfg=None):
        if method == "auto":
            method = "identity" if ball.likelihood.op.is_identity else "pd"
        if method == "identity" and not ball.likelihood.op.is_identity:
            raise ContractError("identity projection requires an identity operator")
        if method not in ("identity", "pd", "admm"):
            raise ContractError(f"unknown projection method {method!r}")
        self.ball = ball
        self.method = method
        self.admm_cfg = admm_cfg or AdmmConfig()
        self.pd_cfg = pd_cfg or PdConfig()
        self._warm_x = None
        self._warm_z = None
        self.calls = 0
        self.total_iterations = 0
        self.failures = 0

    def with_ball(self, ball):
        """New projector for an updated threshold, keeping configuration."""
        return Projector(ball, self.method, self.admm_cfg, self.pd_cfg)

    def __call__(self, x):
        self.calls += 1
        if self.method == "identity":
            return ProjectionResult(project_identity(self.ball, x), True, 0, 0.0)
        if self.method == "pd":
            result = pd_project(self.ball, x, self.pd_cfg, x0=self._warm_x, z0=self._warm_z)
        else:
            result = admm_project(self.ball, x, self.admm_cfg, x0=self._warm_x, z0=self._warm_z)
        self.total_iterations += result.iterations
        if not result.converged:
            self.failures += 1
        if result.iterations:
            self._warm_x = result.x
            self._warm_z = result.z
        return result
