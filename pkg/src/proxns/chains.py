"""Langevin Markov kernels for prior and likelihood-constrained sampling.

The chains are Euler-Maruyama discretisations of an overdamped Langevin
diffusion in which every non-smooth term (sparsity prior, likelihood-ball
characteristic function) enters through the gradient of its Moreau-Yosida
envelope, i.e. through proximal mappings. A Metropolis-Hastings correction
(on by default) removes the discretisation and smoothing bias: the accept
ratio targets the exact density exp(-f) restricted to the constraint set,
while the proposal densities use the same smoothed drift that generated
the move.

A chain is a sequential process owning its state and generator; run
concurrent chains with independent seeds.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, DrawBudgetError
from .models import FLAT, GAUSSIAN_L2, LAPLACE_L1

# feasibility slack of the MH target: accepted states satisfy
# g(x) <= tau * (1 - MH_TAU_SLACK), strictly inside the open ball
MH_TAU_SLACK = 1e-9

# base step size for priors with no curvature scale (flat, sparsity):
# the recommended delta = 0.8/(L_f + 1/lam) is circular at L_f = 0
DEFAULT_DELTA_NONSMOOTH = 0.1


@dataclass(frozen=True)
class ChainConfig:
    """Step size, smoothing scale and schedule of a Langevin chain."""

    delta: float
    lam: float
    k_burn: int = 100
    k_gap: int = 10
    seed: int = 0
    mh: bool = True

    def __post_init__(self):
        if self.delta <= 0 or self.lam <= 0:
            raise ContractError("delta and lam must be positive")
        if self.k_burn < 0 or self.k_gap < 1:
            raise ContractError("invalid burn-in or thinning settings")

    def validate_for(self, prior):
        limit = 1.0 / (prior.lipschitz() + 1.0 / self.lam)
        if self.delta > limit * (1.0 + 1e-12):
            raise ContractError(
                f"delta={self.delta} exceeds stability bound {limit} for this prior"
            )


def default_chain_config(prior, *, delta=None, lam=None, k_burn=100, k_gap=10,
                         seed=0, mh=True, delta_scale=0.8):
    """Chain configuration with the recommended defaults.

    lam = 1/L_f for smooth priors. For priors with L_f = 0 the smoothing
    scale is tied to the step size (lam = 5*delta) so the smoothing bias
    tracks the discretisation bias.
    """
    lf = prior.lipschitz()
    if lam is None:
        if lf > 0:
            lam = 1.0 / lf
        else:
            lam = 5.0 * (delta if delta is not None else DEFAULT_DELTA_NONSMOOTH)
    if delta is None:
        delta = delta_scale / (lf + 1.0 / lam)
    return ChainConfig(delta=delta, lam=lam, k_burn=k_burn, k_gap=k_gap,
                       seed=seed, mh=mh)


@dataclass
class ChainState:
    """Chain position with cached potentials and proximal data.

    ``f``/``g`` are the prior and likelihood potentials at ``x`` (``g`` is
    None in pure prior chains, ``f`` is None on never-evaluated rejected
    candidates). ``fwd_mean`` is the drift mean of the move that produced
    ``x``; ``proj_failed`` records an unconverged ball projection on the path.
    """

    x: np.ndarray
    f: float
    g: float
    prox_f: np.ndarray
    rng: np.random.Generator
    fwd_mean: np.ndarray = None
    proj_failed: bool = False


def _needs_prox(prior):
    return prior.kind == LAPLACE_L1 or (prior.kind == FLAT and prior.bounds is not None)


def _evaluate(prior, x, lam, likelihood=None):
    if _needs_prox(prior):
        f, prox = prior.potential_and_prox(x, lam)
    else:
        f, prox = prior.potential(x), None
    g = likelihood.potential(x) if likelihood is not None else None
    return f, g, prox


def init_chain_state(prior, x0, cfg, rng, likelihood=None):
    """Evaluated chain state at the starting point ``x0``."""
    x = np.ascontiguousarray(x0, dtype=np.float64).copy()
    f, g, prox = _evaluate(prior, x, cfg.lam, likelihood)
    return ChainState(x=x, f=f, g=g, prox_f=prox, rng=rng)


def _feasible(g_value, tau):
    return g_value <= tau * (1.0 - MH_TAU_SLACK)


def _drift_mean(prior, state, cfg, ball=None, projector=None):
    """Deterministic part of the kernel step at the current state."""
    x = state.x
    delta, lam = cfg.delta, cfg.lam
    coeff = delta / (2.0 * lam)
    if prior.kind == GAUSSIAN_L2:
        mean = (1.0 - delta * prior.mu) * x
    elif _needs_prox(prior):
        prox = state.prox_f
        if prox is None:
            _, prox = prior.potential_and_prox(x, lam)
        mean = x + coeff * (prox - x)
    else:
        mean = x.copy()
    proj_failed = False
    if ball is not None and not _feasible(state.g, ball.tau):
        # interior states project to themselves, so the term only appears
        # when the chain has wandered outside the constraint set
        result = projector(x)
        proj_failed = not result.converged
        mean += coeff * (result.x - x)
    return mean, proj_failed


def prior_step(prior, state, cfg):
    """One unadjusted kernel step targeting the prior (no constraint)."""
    mean, _ = _drift_mean(prior, state, cfg)
    noise = state.rng.standard_normal(state.x.shape[0])
    x_new = mean + math.sqrt(cfg.delta) * noise
    f, g, prox = _evaluate(prior, x_new, cfg.lam)
    return ChainState(x=x_new, f=f, g=g, prox_f=prox, rng=state.rng, fwd_mean=mean)


def constrained_step(prior, ball, state, cfg, projector):
    """One unadjusted kernel step under the likelihood-ball constraint.

    The candidate's likelihood potential is always evaluated; the prior
    potential and prox are skipped for candidates that already violate the
    constraint (they can only be rejected) unless the chain runs without
    Metropolis correction.
    """
    mean, proj_failed = _drift_mean(prior, state, cfg, ball, projector)
    noise = state.rng.standard_normal(state.x.shape[0])
    x_new = mean + math.sqrt(cfg.delta) * noise
    g = ball.likelihood.potential(x_new)
    if _feasible(g, ball.tau) or not cfg.mh:
        f, _, prox = _evaluate(prior, x_new, cfg.lam)
    else:
        f, prox = None, None
    return ChainState(x=x_new, f=f, g=g, prox_f=prox, rng=state.rng,
                      fwd_mean=mean, proj_failed=proj_failed or state.proj_failed)


def mh_correct(prior, ball, current, proposal, cfg):
    """Metropolis-Hastings accept/reject for a proposed kernel move.

    Targets exp(-f) restricted to the open likelihood ball (the exact
    characteristic function, not its envelope); proposals outside the ball
    have acceptance probability zero. Pass ``ball=None`` for prior chains.
    Returns (state, accepted).
    """
    if ball is not None and not _feasible(proposal.g, ball.tau):
        return current, False
    if proposal.f is None or not np.isfinite(proposal.f):
        return current, False
    if ball is not None and not _feasible(current.g, ball.tau):
        # current state carries zero target density; any feasible move enters
        return proposal, True
    # reverse drift: the proposal is feasible, so its ball term vanishes and
    # no projection is required
    mean_rev, _ = _drift_mean(prior, proposal, cfg)
    dx_fwd = proposal.x - proposal.fwd_mean
    dx_rev = current.x - mean_rev
    log_alpha = (current.f - proposal.f) + (
        float(np.dot(dx_fwd, dx_fwd)) - float(np.dot(dx_rev, dx_rev))
    ) / (2.0 * cfg.delta)
    if log_alpha >= 0.0 or math.log(current.rng.random()) < log_alpha:
        return proposal, True
    return current, False


def draw_constrained_sample(prior, ball, start, cfg, projector, budget=None,
                            rng=None, counters=None):
    """Draw one decorrelated sample from the prior restricted to the ball.

    Runs the constrained kernel with Metropolis correction from ``start``
    until the state satisfies the likelihood constraint and at least
    ``k_gap`` steps have elapsed. Raises DrawBudgetError (carrying the last
    state) if ``budget`` kernel steps do not produce a valid sample.
    """
    if budget is None:
        budget = 50 * cfg.k_gap
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    state = init_chain_state(prior, start, cfg, rng, likelihood=ball.likelihood)
    for k in range(1, budget + 1):
        proposal = constrained_step(prior, ball, state, cfg, projector)
        if cfg.mh:
            state, accepted = mh_correct(prior, ball, state, proposal, cfg)
        else:
            state, accepted = proposal, True
        if counters is not None:
            counters["steps"] += 1
            counters["accepts"] += int(accepted)
        if k >= cfg.k_gap and ball.contains_potential(state.g):
            return state
    raise DrawBudgetError(
        f"no valid constrained sample within {budget} kernel steps", last_state=state
    )


def _start_point(prior, dim):
    if prior.kind == FLAT and prior.bounds is not None:
        lo, hi = prior.bounds
        return np.full(dim, 0.5 * (lo + hi))
    return np.zeros(dim)


def draw_live_set(prior, n_live, cfg, dim, rng=None, x0=None, counters=None):
    """Draw ``n_live`` prior samples: burn-in, then keep every k_gap-th state.

    Flat priors must carry box bounds here (the unconstrained flat prior is
    improper). Returns an (n_live, dim) array.
    """
    if n_live < 2:
        raise ContractError("need at least two live samples")
    if prior.kind == FLAT and prior.bounds is None:
        raise ContractError("unbounded flat prior cannot be sampled without a constraint")
    cfg.validate_for(prior)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    state = init_chain_state(prior, x0 if x0 is not None else _start_point(prior, dim),
                             cfg, rng)
    for _ in range(cfg.k_burn):
        proposal = prior_step(prior, state, cfg)
        if cfg.mh:
            state, accepted = mh_correct(prior, None, state, proposal, cfg)
        else:
            state, accepted = proposal, True
        if counters is not None:
            counters["steps"] += 1
            counters["accepts"] += int(accepted)
    samples = np.empty((n_live, dim))
    filled = 0
    k = 0
    while filled < n_live:
        k += 1
        proposal = prior_step(prior, state, cfg)
        if cfg.mh:
            state, accepted = mh_correct(prior, None, state, proposal, cfg)
        else:
            state, accepted = proposal, True
        if counters is not None:
            counters["steps"] += 1
            counters["accepts"] += int(accepted)
        if k % cfg.k_gap == 0:
            samples[filled] = state.x
            filled += 1
    return samples
