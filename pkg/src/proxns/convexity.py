"""Proximal-calculus primitives shared by the samplers and solvers.

All vector arguments are 1-D numpy arrays (float64, or complex128 where
noted). Every function is pure; nothing here holds state.
"""

import numpy as np

from . import _kernels
from .errors import ContractError

ORTHONORMALITY_RTOL = 1e-10


def _as_real(v):
    return np.ascontiguousarray(v, dtype=np.float64)


def _as_complex(v):
    return np.ascontiguousarray(v, dtype=np.complex128)


def soft_threshold(v, theta):
    """Elementwise soft thresholding S_theta(v).

    Entries with |v_i| below ``theta`` are zeroed; the rest shrink by
    ``theta`` in modulus (complex entries shrink radially).
    """
    if theta < 0:
        raise ContractError("soft threshold requires theta >= 0")
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return _kernels.soft_threshold_complex(_as_complex(v), float(theta))
    return _kernels.soft_threshold_real(_as_real(v), float(theta))


def project_l2_ball(z, center, radius):
    """Euclidean projection of ``z`` onto the closed ball around ``center``."""
    if radius <= 0:
        raise ContractError("ball radius must be positive")
    z = np.asarray(z)
    center = np.asarray(center)
    if z.shape != center.shape:
        raise ContractError("point and center must have the same length")
    if z.size == 0:
        raise ContractError("cannot project a zero-length vector")
    if np.iscomplexobj(z) or np.iscomplexobj(center):
        return _kernels.ball_project_complex(_as_complex(z), _as_complex(center), float(radius))
    return _kernels.ball_project_real(_as_real(z), _as_real(center), float(radius))


def moreau_grad(prox_at, lam, x):
    """Gradient of the Moreau-Yosida envelope: (x - prox(x)) / lam.

    ``prox_at`` is the proximal mapping of the underlying function at
    smoothing scale ``lam``; the returned map is (1/lam)-Lipschitz.
    """
    if lam <= 0:
        raise ContractError("smoothing parameter lam must be positive")
    x = np.asarray(x, dtype=np.float64)
    return (x - prox_at(x)) / lam


def prox_conjugate(prox_at, x):
    """Prox of the convex conjugate via the Moreau decomposition x - prox(x)."""
    x = np.asarray(x)
    return x - prox_at(x)


def assert_orthonormal(op, probes=3, seed=20130529):
    """Verify the perfect-reconstruction contract of a dictionary operator.

    Round trips synthesis(analysis(v)) and analysis(synthesis(w)) on random
    probe vectors at relative tolerance 1e-10. The verdict is cached on the
    operator, so repeated calls are free.
    """
    if getattr(op, "is_identity", False) or getattr(op, "_orthonormal_ok", False):
        return
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        v = rng.standard_normal(op.in_dim)
        nv = np.linalg.norm(v)
        err = np.linalg.norm(op.synthesis(op.analysis(v)) - v) / nv
        if err > ORTHONORMALITY_RTOL:
            raise ContractError(f"dictionary fails synthesis∘analysis round trip ({err:.2e})")
        w = rng.standard_normal(op.in_dim)
        nw = np.linalg.norm(w)
        err = np.linalg.norm(op.analysis(op.synthesis(w)) - w) / nw
        if err > ORTHONORMALITY_RTOL:
            raise ContractError(f"dictionary fails analysis∘synthesis round trip ({err:.2e})")
    op._orthonormal_ok = True


def prox_l1_synthesis(x, weight, dict_op):
    """Prox of mu*||analysis(x)||_1 at scale lam, with weight = lam*mu.

    Exact for orthonormal dictionaries: x + synth(soft(analysis(x)) - analysis(x)).
    """
    if weight < 0:
        raise ContractError("prox weight must be nonnegative")
    x = _as_real(x)
    if weight == 0:
        return x.copy()
    assert_orthonormal(dict_op)
    if getattr(dict_op, "is_identity", False):
        return _kernels.soft_threshold_real(x, float(weight))
    coeffs = dict_op.analysis(x)
    return x + dict_op.synthesis(soft_threshold(coeffs, weight) - coeffs)
