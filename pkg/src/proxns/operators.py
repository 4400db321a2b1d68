"""Linear operators: masked unitary Fourier measurements and orthonormal
Daubechies dictionaries, plus sampling-mask generation and misspecification.

Image vectors are flat float64 arrays of length h*w; measurement vectors are
complex128 of length m. Frequency indices are kept in centred coordinates
(DC at the origin) so radial operations are geometric; conversion to the
standard FFT ordering happens internally.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .wavelets import dwt1, dwt2, idwt1, idwt2

MASK_SCHEMA = "proxns-mask"
MASK_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SamplingMask:
    """Set of measured 2-D frequency indices on an (h, w) grid.

    ``indices`` is an (m, 2) int array of centred (ky, kx) coordinates,
    lexicographically sorted and free of duplicates. ``clamped`` counts
    positions that hit the grid boundary during misspecification.
    """

    grid_dims: tuple
    indices: np.ndarray
    coverage: float
    seed: int | None = None
    clamped: int = 0

    def __post_init__(self):
        h, w = self.grid_dims
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((idx[:, 1], idx[:, 0]))
        idx = np.ascontiguousarray(idx[order])
        if np.unique(idx, axis=0).shape[0] != idx.shape[0]:
            raise ContractError("mask indices must be unique")
        ky, kx = idx[:, 0], idx[:, 1]
        if ky.size and (ky.min() < -(h // 2) or ky.max() > h - 1 - h // 2
                        or kx.min() < -(w // 2) or kx.max() > w - 1 - w // 2):
            raise ContractError("mask indices fall outside the grid")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def n_selected(self):
        return self.indices.shape[0]

    def flat_standard(self):
        """Flat indices in standard FFT ordering (row-major)."""
        h, w = self.grid_dims
        ky = np.mod(self.indices[:, 0], h)
        kx = np.mod(self.indices[:, 1], w)
        return ky * w + kx

    def selection_grid(self):
        """Boolean (h, w) grid in standard FFT ordering."""
        h, w = self.grid_dims
        grid = np.zeros(h * w, dtype=bool)
        grid[self.flat_standard()] = True
        return grid.reshape(h, w)

    def to_json(self):
        return json.dumps(
            {
                "schema": MASK_SCHEMA,
                "version": MASK_SCHEMA_VERSION,
                "dims": list(self.grid_dims),
                "coverage": self.coverage,
                "seed": self.seed,
                "clamped": self.clamped,
                "indices": self.indices.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("schema") != MASK_SCHEMA:
            raise ContractError("not a sampling-mask document")
        return cls(
            grid_dims=tuple(doc["dims"]),
            indices=np.asarray(doc["indices"], dtype=np.int64),
            coverage=doc["coverage"],
            seed=doc["seed"],
            clamped=doc.get("clamped", 0),
        )


def _centred_radii(h, w):
    ky = np.arange(h) - h // 2
    kx = np.arange(w) - w // 2
    return np.hypot(ky[:, None], kx[None, :])


def generate_vds_mask(dims, coverage, seed, power=3.0):
    """Variable-density sampling mask favouring low frequencies.

    Probability decays as (1 - r/r_max)^power; the exact selection count
    round(coverage*h*w) is enforced by weighted rank selection, bit
    reproducible for a given (dims, coverage, seed).
    """
    h, w = dims
    d = h * w
    if not 0.0 < coverage <= 1.0:
        raise ContractError("coverage must be in (0, 1]")
    m = int(round(coverage * d))
    if m < 1:
        raise ContractError("coverage selects no frequencies on this grid")
    r = _centred_radii(h, w).ravel()
    weights = np.maximum(1.0 - r / r.max(), 0.0) ** power
    rng = np.random.default_rng(seed)
    u = rng.random(d)
    with np.errstate(divide="ignore"):
        keys = np.where(weights > 0.0, np.log(u) / np.where(weights > 0, weights, 1.0), -np.inf)
    chosen = np.argsort(-keys, kind="stable")[:m]
    # flat row-major position back to centred coordinates
    ky = chosen // w - h // 2
    kx = chosen % w - w // 2
    idx = np.stack([ky, kx], axis=1)
    return SamplingMask(grid_dims=(h, w), indices=idx, coverage=coverage, seed=seed)


def scale_positions(indices, gamma, grid_dims):
    """Radially scale centred positions by (1 + gamma), snap and clamp.

    Returns (positions, n_clamped); duplicates are preserved so the result
    stays aligned with a measurement vector.
    """
    if gamma < 0:
        raise ContractError("misspecification gamma must be nonnegative")
    h, w = grid_dims
    scaled = np.rint((1.0 + gamma) * np.asarray(indices, dtype=np.float64)).astype(np.int64)
    lo = np.array([-(h // 2), -(w // 2)])
    hi = np.array([h - 1 - h // 2, w - 1 - w // 2])
    clipped = np.clip(scaled, lo, hi)
    clamped = int(np.sum(np.any(clipped != scaled, axis=1)))
    return clipped, clamped


def misspecify_mask(mask, gamma):
    """Scale every measured position radially outward by (1 + gamma).

    Positions are snapped to the nearest grid point, clamped at the grid
    boundary (counted in ``clamped``) and deduplicated. gamma = 0 returns
    an identical mask.
    """
    if gamma < 0:
        raise ContractError("misspecification gamma must be nonnegative")
    if gamma == 0:
        return mask
    h, w = mask.grid_dims
    clipped, clamped = scale_positions(mask.indices, gamma, mask.grid_dims)
    unique = np.unique(clipped, axis=0)
    return SamplingMask(
        grid_dims=mask.grid_dims,
        indices=unique,
        coverage=unique.shape[0] / (h * w),
        seed=mask.seed,
        clamped=mask.clamped + clamped,
    )


class IdentityOperator:
    """Identity measurement/dictionary operator on flat vectors."""

    is_identity = True

    def __init__(self, dim):
        self.in_dim = int(dim)
        self.out_dim = int(dim)
        self.norm_bound = 1.0

    def forward(self, x):
        return np.asarray(x, dtype=np.float64).copy()

    def adjoint(self, y):
        return np.real(np.asarray(y)).astype(np.float64, copy=True)

    adjoint_complex = forward

    def analysis(self, x):
        return np.asarray(x, dtype=np.float64).copy()

    synthesis = analysis


class MaskedFourierOperator:
    """Unitary 2-D FFT followed by frequency selection: forward = restrict(F x).

    ``adjoint`` maps back into the real image space (real part of the
    zero-filled inverse FFT); ``adjoint_complex`` is the complex adjoint,
    for which forward(adjoint_complex(y)) = y exactly for any mask.
    """

    is_identity = False

    def __init__(self, mask):
        self.mask = mask
        h, w = mask.grid_dims
        self.grid_dims = (h, w)
        self.in_dim = h * w
        self.out_dim = mask.n_selected
        self.norm_bound = 1.0
        self._flat = mask.flat_standard()

    def forward(self, x):
        h, w = self.grid_dims
        spectrum = np.fft.fft2(np.asarray(x).reshape(h, w), norm="ortho")
        return spectrum.reshape(-1)[self._flat]

    def _zero_fill(self, y):
        h, w = self.grid_dims
        spectrum = np.zeros(h * w, dtype=np.complex128)
        spectrum[self._flat] = y
        return spectrum.reshape(h, w)

    def adjoint(self, y):
        return np.fft.ifft2(self._zero_fill(y), norm="ortho").real.reshape(-1)

    def adjoint_complex(self, y):
        return np.fft.ifft2(self._zero_fill(y), norm="ortho").reshape(-1)

    def normal_multiplier(self):
        """Diagonal of the real-restricted normal operator in Fourier space.

        On real vectors, Re(adjoint(forward(x))) = F^* diag(D) F x with
        D = (sel + sel_reversed)/2, because the spectrum of a real image is
        Hermitian-symmetric. Entries lie in {0, 1/2, 1}.
        """
        sel = self.mask.selection_grid().astype(np.float64)
        rev = np.roll(sel[::-1, ::-1], shift=(1, 1), axis=(0, 1))
        return 0.5 * (sel + rev)


class WaveletDictionary:
    """Orthonormal multilevel Daubechies transform on 1-D or 2-D signals."""

    is_identity = False

    def __init__(self, spec, shape):
        if isinstance(shape, int):
            shape = (shape,)
        self.spec = spec
        self.shape = tuple(int(s) for s in shape)
        if len(self.shape) not in (1, 2):
            raise ContractError("wavelet dictionaries support 1-D and 2-D signals")
        for s in self.shape:
            if s % (1 << spec.levels) != 0:
                raise ContractError(
                    f"signal extent {s} incompatible with {spec.levels} levels"
                )
        self.in_dim = int(np.prod(self.shape))
        self.out_dim = self.in_dim
        self.norm_bound = 1.0

    def analysis(self, x):
        x = np.asarray(x, dtype=np.float64)
        if len(self.shape) == 1:
            return dwt1(x.reshape(self.shape[0]), self.spec)
        return dwt2(x.reshape(self.shape), self.spec).reshape(-1)

    def synthesis(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if len(self.shape) == 1:
            return idwt1(coeffs, self.spec)
        return idwt2(coeffs.reshape(self.shape), self.spec).reshape(-1)

    # orthonormal, so the adjoint pair is (analysis, synthesis)
    def forward(self, x):
        return self.analysis(x)

    def adjoint(self, y):
        return self.synthesis(y)


def identity_op(dim):
    return IdentityOperator(dim)


def fft_op(mask):
    """Measurement operator restrict(unitary FFT) for a sampling mask."""
    return MaskedFourierOperator(mask)


def wavelet_op(spec, dims):
    """Orthonormal Daubechies dictionary for signals of the given shape."""
    return WaveletDictionary(spec, dims)
