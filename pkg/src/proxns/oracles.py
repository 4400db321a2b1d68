"""Closed-form ground truth for the Gaussian validation model, plus the
vanilla Monte Carlo integration baseline.

The conjugate model is prior exp(-mu ||x||^2) and likelihood
exp(-||y - x||^2 / (2 sigma^2)) with identity operators. The reported
quantity is log(V * Z): the log of the integral of the unnormalised
integrand, where V is the prior volume. Subtracting log V gives the
evidence of the normalised prior, which is what the sampler estimates.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class GaussianConjugateSpec:
    """Dimension, prior strength, noise level and data of the conjugate model."""

    dim: int
    mu: float
    sigma: float
    data: np.ndarray

    def __post_init__(self):
        if self.mu <= 0 or self.sigma <= 0:
            raise ContractError("mu and sigma must be positive")
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != (self.dim,):
            raise ContractError("data length must equal the model dimension")
        object.__setattr__(self, "data", data)


def prior_volume_v(spec):
    """log V with V = sqrt((2 pi)^d / (2 mu)^d)."""
    return 0.5 * spec.dim * (math.log(2.0 * math.pi) - math.log(2.0 * spec.mu))


def _yty(spec):
    # compensated summation: at d ~ 1e6 the plain accumulation error in
    # y'y would exceed the digits being validated
    return math.fsum(float(v) * float(v) for v in spec.data)


def gaussian_log_evidence(spec):
    """Closed-form log(V * Z) of the conjugate Gaussian model."""
    kappa = 2.0 * spec.mu + 1.0 / spec.sigma**2
    yty = _yty(spec)
    return (
        0.5 * spec.dim * math.log(2.0 * math.pi / kappa)
        - yty / (2.0 * spec.sigma**2)
        + 0.5 * yty / (kappa * spec.sigma**4)
    )


def default_mc_box(spec, half_width_sigmas=7.0):
    """Integration box covering the integrand's effective support.

    Per coordinate: the unnormalised posterior is a Gaussian centred at
    y_i / (2 mu sigma^2 + 1) with variance 1/(2 mu + 1/sigma^2); the box
    spans that centre +/- ``half_width_sigmas`` standard deviations, widened
    to include [0, 1] (the data-generating range).
    """
    kappa = 2.0 * spec.mu + 1.0 / spec.sigma**2
    centre = spec.data / (kappa * spec.sigma**2)
    s = half_width_sigmas / math.sqrt(kappa)
    lo = np.minimum(centre - s, 0.0)
    hi = np.maximum(centre + s, 1.0)
    return lo, hi


def mc_integration(spec, n_samples, seed, box=None, batch=20000):
    """Vanilla Monte Carlo estimate of log(V * Z) with uniform sampling.

    Draws uniform samples from ``box`` (default: :func:`default_mc_box`),
    averages exp(-f-g) in the log domain and corrects by the box volume.
    Returns (log_estimate, standard_error_of_log).
    """
    if n_samples < 1:
        raise ContractError("need at least one Monte Carlo sample")
    lo, hi = box if box is not None else default_mc_box(spec)
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (spec.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (spec.dim,))
    log_vol = float(np.sum(np.log(hi - lo)))
    rng = np.random.default_rng(seed)
    y = spec.data
    inv_two_sigma2 = 1.0 / (2.0 * spec.sigma**2)

    # streaming log-sum-exp of the first and second moments
    m = -np.inf  # running max of log integrand
    s1 = 0.0     # sum exp(log v - m)
    s2 = 0.0     # sum exp(2 (log v - m))
    done = 0
    while done < n_samples:
        k = min(batch, n_samples - done)
        x = lo + (hi - lo) * rng.random((k, spec.dim))
        logv = -spec.mu * np.einsum("ij,ij->i", x, x)
        r = x - y
        logv -= inv_two_sigma2 * np.einsum("ij,ij->i", r, r)
        bm = float(np.max(logv))
        if bm > m:
            scale = math.exp(m - bm) if np.isfinite(m) else 0.0
            s1 *= scale
            s2 *= scale * scale
            m = bm
        w = np.exp(logv - m)
        s1 += float(np.sum(w))
        s2 += float(np.sum(w * w))
        done += k
    n = float(n_samples)
    log_mean = m + math.log(s1 / n)
    if n_samples == 1:
        return log_vol + log_mean, math.inf
    # delta method: sd(log mean) ~ sd(v) / (sqrt(n) mean(v))
    var = max(s2 / n - (s1 / n) ** 2, 0.0)
    se = math.sqrt(var / n) / (s1 / n)
    return log_vol + log_mean, se
