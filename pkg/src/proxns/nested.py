"""Nested sampling engine: live-set management, deterministic shrinkage
bookkeeping, log-domain evidence accumulation, entropy error bars and
posterior weights.

Evidence values are reported for the unnormalised likelihood exp(-g) and
the implicitly normalised prior; all accumulation runs in the log domain
(dead-point log likelihoods at imaging scale reach magnitude 1e5, so no
intermediate exponentiation ever happens).
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from .chains import draw_constrained_sample, draw_live_set
from .errors import ContractError, DrawBudgetError, NestedRunError
from .models import LikelihoodBall
from .ballproj import AdmmConfig, PdConfig, Projector

WEIGHT_RULES = ("trapezoid", "simple")


@dataclass(frozen=True)
class NestedConfig:
    """Outer-loop settings: live-set size, termination and weight rule."""

    n_live: int = 200
    max_dead: int = 5000
    dlogz_tol: float = 0.01
    weight_rule: str = "trapezoid"
    max_steps_per_draw: int = None
    max_retries: int = 3
    init_gap: int = None
    init_burn: int = None

    def __post_init__(self):
        if self.n_live < 2:
            raise ContractError("n_live must be at least 2")
        if self.max_dead < 1 or self.dlogz_tol <= 0 or self.max_retries < 0:
            raise ContractError("invalid nested sampling configuration")
        if self.weight_rule not in WEIGHT_RULES:
            raise ContractError(f"unknown weight rule {self.weight_rule!r}")


@dataclass(frozen=True)
class DeadRecord:
    """One discarded sample: iteration, log likelihood, volume and weight."""

    iteration: int
    log_like: float
    log_xi: float
    log_weight: float


@dataclass
class EvidenceResult:
    """Evidence estimate with its dead-point trace and posterior weights.

    ``posterior_log_weights`` covers the dead records followed by the final
    live points (the live set carries the remaining prior volume), and
    exponentiates to a unit sum.
    """

    log_z: float
    entropy_h: float
    log_z_std: float
    dead: list
    live_log_likes: np.ndarray
    log_xi_final: float
    n_live: int
    posterior_log_weights: np.ndarray
    n_iterations: int
    terminated: str
    diagnostics: dict = field(default_factory=dict)

    def dead_arrays(self):
        """Dead trace as (iterations, log_likes, log_xis, log_weights)."""
        its = np.array([r.iteration for r in self.dead], dtype=np.int64)
        lls = np.array([r.log_like for r in self.dead])
        lxs = np.array([r.log_xi for r in self.dead])
        lws = np.array([r.log_weight for r in self.dead])
        return its, lls, lxs, lws


def prior_volume(i, n_live):
    """Deterministic log prior volume log xi_i = -i / n_live."""
    if i < 0:
        raise ContractError("iteration index must be nonnegative")
    return -i / n_live


def log_weight(i, n_live, rule="trapezoid"):
    """Log quadrature weight of dead point i (1-based).

    trapezoid: w_i = (xi_{i-1} - xi_{i+1}) / 2; simple: w_i = xi_{i-1} - xi_i.
    """
    if rule == "trapezoid":
        return -(i - 1) / n_live + math.log1p(-math.exp(-2.0 / n_live)) - math.log(2.0)
    if rule == "simple":
        return -(i - 1) / n_live + math.log1p(-math.exp(-1.0 / n_live))
    raise ContractError(f"unknown weight rule {rule!r}")


def entropy_error(log_likes, log_weights, log_z, n_live):
    """Negative relative entropy H and the log-evidence error sqrt(H/n_live)."""
    log_likes = np.asarray(log_likes, dtype=np.float64)
    log_weights = np.asarray(log_weights, dtype=np.float64)
    mass = log_likes + log_weights - log_z
    p = np.exp(mass)
    pos = p > 0.0
    h = float(np.sum(p[pos] * (log_likes[pos] - log_z)))
    return h, math.sqrt(max(h, 0.0) / n_live)


def posterior_weights(log_likes, log_weights):
    """Normalised posterior importance weights, computed via log-sum-exp."""
    t = np.asarray(log_likes, dtype=np.float64) + np.asarray(log_weights, dtype=np.float64)
    return np.exp(t - logsumexp(t))


def run_nested(prior, likelihood, ncfg, ccfg, *, projector_method="auto",
               admm_cfg=None, pd_cfg=None, store=None, trace_hook=None):
    """Full nested sampling run; returns an :class:`EvidenceResult`.

    The live set is initialised from unconstrained prior chains; each
    iteration removes the lowest-likelihood sample, accumulates its weighted
    contribution and replaces it by a constrained-chain draw started from a
    uniformly chosen live sample. Termination: the estimated remaining
    contribution log(1 + L_max xi_i / Z) drops below ``dlogz_tol``, a
    likelihood plateau, or ``max_dead``. The remaining prior volume is then
    spread uniformly over the live set and added to the evidence.

    ``store.add(x)`` is called for every dead sample and then for the final
    live samples, in posterior-weight order. ``trace_hook`` receives a dict
    per iteration (iteration, log_like, log_xi, log_z, acceptance data).
    """
    t_start = time.perf_counter()
    admm_cfg = admm_cfg or AdmmConfig()
    pd_cfg = pd_cfg or PdConfig()
    dim = likelihood.op.in_dim
    n = ncfg.n_live
    rng = np.random.default_rng(ccfg.seed)
    counters = {"steps": 0, "accepts": 0}
    # the live set must be close to i.i.d. from the prior: its thinning can
    # need to exceed the replacement-chain thinning by the mixing time
    init_cfg = replace(
        ccfg,
        k_gap=ncfg.init_gap if ncfg.init_gap is not None else ccfg.k_gap,
        k_burn=ncfg.init_burn if ncfg.init_burn is not None else ccfg.k_burn,
    )
    live = draw_live_set(prior, n, init_cfg, dim, rng=rng, counters=counters)
    log_likes = np.array([-likelihood.potential(x) for x in live])

    dead = []
    log_z = -np.inf
    terminated = "max_dead"
    proj_calls = proj_failures = proj_iters = retries = 0
    i = 0
    while i < ncfg.max_dead:
        i += 1
        j = int(np.argmin(log_likes))
        log_l_star = float(log_likes[j])
        log_max = float(np.max(log_likes))
        # remaining-contribution check against the volume left before this shell
        if dead:
            log_remaining = log_max + prior_volume(i - 1, n)
            if np.logaddexp(log_z, log_remaining) - log_z < ncfg.dlogz_tol:
                terminated = "dlogz"
                break
        log_w = log_weight(i, n, ncfg.weight_rule)
        dead.append(DeadRecord(i, log_l_star, prior_volume(i, n), log_w))
        log_z = float(np.logaddexp(log_z, log_l_star + log_w))
        if store is not None:
            store.add(live[j])
        if trace_hook is not None:
            trace_hook({
                "iteration": i,
                "log_like": log_l_star,
                "log_xi": prior_volume(i, n),
                "log_z": log_z,
                "chain_steps": counters["steps"],
                "chain_accepts": counters["accepts"],
            })
        if log_max <= log_l_star:
            terminated = "plateau"
            break
        tau = -log_l_star
        if tau <= 0:
            terminated = "max-likelihood"
            break
        ball = LikelihoodBall(likelihood, tau)
        projector = Projector(ball, projector_method, admm_cfg, pd_cfg)
        state = None
        for _ in range(ncfg.max_retries + 1):
            start = live[int(rng.integers(n))]
            try:
                state = draw_constrained_sample(
                    prior, ball, start, ccfg, projector,
                    budget=ncfg.max_steps_per_draw, rng=rng, counters=counters,
                )
                break
            except DrawBudgetError:
                retries += 1
        proj_calls += projector.calls
        proj_failures += projector.failures
        proj_iters += projector.total_iterations
        if state is None:
            partial = _assemble(ncfg, dead, live, log_likes, log_z, "aborted",
                                counters, proj_calls, proj_failures, proj_iters,
                                retries, t_start, store=None)
            raise NestedRunError(
                f"replacement draw failed {ncfg.max_retries + 1} times at iteration {i}",
                partial=partial,
            )
        live[j] = state.x
        log_likes[j] = -state.g

    return _assemble(ncfg, dead, live, log_likes, log_z, terminated, counters,
                     proj_calls, proj_failures, proj_iters, retries, t_start,
                     store=store)


def _assemble(ncfg, dead, live, log_likes, log_z, terminated, counters,
              proj_calls, proj_failures, proj_iters, retries, t_start, store=None):
    n = ncfg.n_live
    n_dead = len(dead)
    log_xi_final = prior_volume(n_dead, n)
    live_term = log_xi_final - math.log(n)
    log_z_final = float(np.logaddexp(log_z, logsumexp(log_likes) + live_term))
    dead_ll = np.array([r.log_like for r in dead]) if dead else np.empty(0)
    dead_lw = np.array([r.log_weight for r in dead]) if dead else np.empty(0)
    all_ll = np.concatenate([dead_ll, log_likes])
    all_lw = np.concatenate([dead_lw, np.full(n, live_term)])
    h, std = entropy_error(all_ll, all_lw, log_z_final, n)
    post = (all_ll + all_lw) - logsumexp(all_ll + all_lw)
    if store is not None:
        for x in live:
            store.add(x)
    diagnostics = {
        "chain_steps": counters["steps"],
        "chain_accepts": counters["accepts"],
        "acceptance_rate": counters["accepts"] / max(counters["steps"], 1),
        "projector_calls": proj_calls,
        "projector_failures": proj_failures,
        "projector_iterations": proj_iters,
        "replacement_retries": retries,
        "wall_time": time.perf_counter() - t_start,
    }
    return EvidenceResult(
        log_z=log_z_final,
        entropy_h=h,
        log_z_std=std,
        dead=dead,
        live_log_likes=np.asarray(log_likes, dtype=np.float64).copy(),
        log_xi_final=log_xi_final,
        n_live=n,
        posterior_log_weights=post,
        n_iterations=n_dead,
        terminated=terminated,
        diagnostics=diagnostics,
    )
