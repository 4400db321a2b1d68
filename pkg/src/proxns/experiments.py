"""Experiment drivers: data simulation, model comparison runs, posterior
summaries and report persistence.

A comparison is a list of :class:`ModelRun` tasks sharing one data set;
each task runs nested sampling once and yields a report row. Rows carry
the evidence, its entropy error bar, RMSE against the truth image when
available, and run diagnostics. Runs are reproducible: identical tasks
and seeds give identical rows up to wall-time fields.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chains import ChainConfig
from .errors import ConfigError, ContractError, NestedRunError
from .models import GaussianLikelihood, PriorModel, LAPLACE_L1
from .nested import NestedConfig, run_nested
from .operators import fft_op, generate_vds_mask, identity_op, misspecify_mask, wavelet_op
from .oracles import GaussianConjugateSpec, gaussian_log_evidence, prior_volume_v
from .wavelets import WaveletSpec

SCHEMA_VERSION = 1


def noise_level(truth, snr_db):
    """Noise standard deviation from the infinity norm and target SNR (dB)."""
    return float(np.max(np.abs(truth))) * 10.0 ** (-snr_db / 20.0)


def simulate_denoise(truth, snr_db, seed):
    """Additive white Gaussian noise at the requested SNR: returns (y, sigma)."""
    truth = np.asarray(truth, dtype=np.float64)
    sigma = noise_level(truth, snr_db)
    rng = np.random.default_rng(seed)
    y = truth.reshape(-1) + sigma * rng.standard_normal(truth.size)
    return y, sigma


def simulate_reconstruct(truth, coverage, snr_db, seed):
    """Masked-Fourier measurements with complex noise: (mask, y, sigma).

    The noise has per-entry complex variance sigma^2 (real and imaginary
    parts each N(0, sigma^2/2)), so the data-fit potential concentrates
    near m/2 at the truth.
    """
    truth = np.asarray(truth, dtype=np.float64)
    sigma = noise_level(truth, snr_db)
    mask = generate_vds_mask(truth.shape, coverage, seed)
    op = fft_op(mask)
    rng = np.random.default_rng(seed + 1)
    m = op.out_dim
    w = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * (sigma / math.sqrt(2.0))
    return mask, op.forward(truth.reshape(-1)) + w, sigma


def rmse(a, b):
    """Root mean square difference of two images of equal shape."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError("RMSE needs images of identical shape")
    diff = a - b
    return float(np.sqrt(np.mean(diff * diff)))


class MemorySampleStore:
    """Keeps every stored sample in memory (desk-scale runs only)."""

    def __init__(self):
        self.samples = []

    def add(self, x, log_like=None, log_weight=None):
        self.samples.append(np.array(x, dtype=np.float64))

    def stacked(self):
        return np.stack(self.samples)


class DiskSampleStore:
    """Streams samples to a raw little-endian float64 file with a JSON sidecar."""

    def __init__(self, path, dim):
        self.path = path
        self.dim = int(dim)
        self.count = 0
        self._fh = open(path, "wb")

    def add(self, x, log_like=None, log_weight=None):
        arr = np.ascontiguousarray(x, dtype="<f8")
        if arr.size != self.dim:
            raise ContractError("sample dimension mismatch in store")
        self._fh.write(arr.tobytes())
        self.count += 1

    def close(self):
        self._fh.close()
        sidecar = {
            "dtype": "<f8",
            "dim": self.dim,
            "count": self.count,
            "layout": "C",
        }
        with open(self.path + ".json", "w") as fh:
            json.dump(sidecar, fh, sort_keys=True)

    @staticmethod
    def load(path):
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        data = np.fromfile(path, dtype=sidecar["dtype"])
        return data.reshape(sidecar["count"], sidecar["dim"])


class PosteriorMeanAccumulator:
    """Streaming posterior mean: O(d) memory, exact in the log domain.

    Samples arrive with their (log_like, log_weight); the accumulator keeps
    a max-rescaled weighted sum so huge dynamic ranges never overflow.
    """

    def __init__(self, dim):
        self.dim = int(dim)
        self._log_max = -np.inf
        self._vec = np.zeros(self.dim)
        self._mass = 0.0

    def add(self, x, log_like=None, log_weight=None):
        if log_like is None or log_weight is None:
            raise ContractError("posterior mean accumulation needs weighted samples")
        t = log_like + log_weight
        if not np.isfinite(t):
            return
        if t > self._log_max:
            scale = math.exp(self._log_max - t) if np.isfinite(self._log_max) else 0.0
            self._vec *= scale
            self._mass *= scale
            self._log_max = t
        w = math.exp(t - self._log_max)
        self._vec += w * np.asarray(x, dtype=np.float64)
        self._mass += w

    def mean(self):
        if self._mass == 0.0:
            raise ContractError("no weighted samples were accumulated")
        return self._vec / self._mass


def posterior_mean_image(result, store, dims=None):
    """Posterior mean sum(p_i x_i) over the stored dead + final live samples."""
    samples = getattr(store, "samples", None)
    if samples is None or not samples:
        raise ContractError("posterior mean requires stored samples")
    weights = np.exp(result.posterior_log_weights)
    if len(samples) != weights.size:
        raise ContractError(
            f"store holds {len(samples)} samples but the run has {weights.size} weights"
        )
    mean = np.einsum("i,ij->j", weights, np.stack(samples))
    return mean.reshape(dims) if dims is not None else mean


@dataclass
class ModelRun:
    """One nested sampling task: model, sampler settings and a label."""

    label: str
    prior: PriorModel
    likelihood: GaussianLikelihood
    ncfg: NestedConfig
    ccfg: ChainConfig
    projector_method: str = "auto"
    truth: np.ndarray = None
    want_posterior_mean: bool = False


@dataclass
class ComparisonReport:
    """Rows of (label, log_z, error bar, RMSE, diagnostics), best model first."""

    rows: list
    meta: dict = field(default_factory=dict)

    def sorted_rows(self):
        done = [r for r in self.rows if r.get("log_z") is not None]
        failed = [r for r in self.rows if r.get("log_z") is None]
        return sorted(done, key=lambda r: -r["log_z"]) + failed

    def to_json(self):
        return json.dumps(
            {"schema_version": SCHEMA_VERSION, "meta": self.meta, "rows": self.sorted_rows()},
            sort_keys=True,
            default=_jsonify,
        )

    def write_json(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def write_csv(self, path):
        fields = ["label", "log_z", "log_z_std", "entropy_h", "rmse", "n_dead",
                  "terminated", "acceptance_rate", "wall_time", "failed"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            for row in self.sorted_rows():
                writer.writerow(row)


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj)!r}")


def execute_run(run):
    """Run one model task and return its report row."""
    store = PosteriorMeanAccumulator(run.likelihood.op.in_dim) if run.want_posterior_mean else None
    row = {"label": run.label, "failed": False}
    try:
        result = run_nested(run.prior, run.likelihood, run.ncfg, run.ccfg,
                            projector_method=run.projector_method, store=store)
    except NestedRunError as exc:
        row.update({"failed": True, "error": str(exc), "log_z": None})
        return row, None
    row.update({
        "log_z": result.log_z,
        "log_z_std": result.log_z_std,
        "entropy_h": result.entropy_h,
        "n_dead": result.n_iterations,
        "terminated": result.terminated,
        "acceptance_rate": result.diagnostics["acceptance_rate"],
        "wall_time": result.diagnostics["wall_time"],
        "projector_failures": result.diagnostics["projector_failures"],
        "seed": run.ccfg.seed,
    })
    mean_img = None
    if run.want_posterior_mean:
        mean_img = store.mean()
    if run.truth is not None and mean_img is not None:
        row["rmse"] = rmse(mean_img, np.asarray(run.truth).reshape(-1))
    return row, mean_img


def run_comparison(runs, workers=1, meta=None):
    """Execute the model runs (optionally in parallel) and assemble a report.

    Individual run failures flag their row and do not abort the others.
    Returns (ComparisonReport, {label: posterior mean image or None}).
    """
    labels = [run.label for run in runs]
    if len(set(labels)) != len(labels):
        raise ConfigError("model labels within a comparison must be unique")
    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(execute_run, runs))
    else:
        outcomes = [execute_run(run) for run in runs]
    rows = [row for row, _ in outcomes]
    means = {run.label: img for run, (_, img) in zip(runs, outcomes)}
    return ComparisonReport(rows=rows, meta=meta or {}), means


def chain_config_for(prior, *, delta=None, lam=None, k_burn=100, k_gap=10, seed=0,
                     mh=True, dim=None, delta_scale=0.8):
    """Chain configuration with the dimension-aware step-size default.

    Unless an explicit ``delta`` is given, the recommended step
    delta_scale/(L_f + 1/lam) is shrunk by min(1, 1.2/sqrt(dim)): the
    Metropolis check suppresses large steps once the likelihood constraint
    tightens, and this scaling keeps the acceptance rate workable from low
    through high dimension.
    """
    from .chains import default_chain_config

    scale = delta_scale
    if delta is None and dim is not None:
        scale = delta_scale * min(1.0, 1.2 / math.sqrt(dim))
    return default_chain_config(prior, delta=delta, lam=lam, k_burn=k_burn,
                                k_gap=k_gap, seed=seed, mh=mh, delta_scale=scale)


def validate_gaussian(dims, runs=10, n_live=100, seed=977, k_gap=15,
                      dlogz_tol=0.01, workers=1):
    """Conjugate-Gaussian validation: nested sampling vs the closed form.

    For each dimension and run index, fresh data y = u + w (u uniform on
    [0,1]^d, w standard normal) defines the model; the row compares the
    sampler's log(V*Z) and its 3-sigma band against the analytic value.
    """
    tasks = []
    for d in dims:
        for run_idx in range(runs):
            tasks.append(_validation_task(d, run_idx, n_live, seed, k_gap, dlogz_tol))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_validation_row, tasks))
    else:
        rows = [_validation_row(t) for t in tasks]
    return rows


def _validation_task(d, run_idx, n_live, seed, k_gap, dlogz_tol):
    data_rng = np.random.default_rng(1000 * run_idx + d)
    y = data_rng.random(d) + data_rng.standard_normal(d)
    spec = GaussianConjugateSpec(d, 0.5, 1.0, y)
    prior = PriorModel("gaussian-l2", mu=0.5)
    likelihood = GaussianLikelihood(y, identity_op(d), 1.0)
    ccfg = chain_config_for(prior, k_burn=300, k_gap=k_gap, seed=seed + run_idx, dim=d)
    init_gap = max(k_gap, int(math.ceil(3.0 / ccfg.delta)))
    ncfg = NestedConfig(
        n_live=n_live,
        max_dead=max(5000, int(n_live * (0.30 * d + 60))),
        dlogz_tol=dlogz_tol,
        init_gap=init_gap,
        init_burn=3 * init_gap,
    )
    return {"d": d, "run": run_idx, "spec": spec, "prior": prior,
            "likelihood": likelihood, "ncfg": ncfg, "ccfg": ccfg}


def _validation_row(task):
    truth = gaussian_log_evidence(task["spec"])
    log_v = prior_volume_v(task["spec"])
    result = run_nested(task["prior"], task["likelihood"], task["ncfg"], task["ccfg"])
    est = result.log_z + log_v
    return {
        "d": task["d"],
        "run": task["run"],
        "estimate": est,
        "truth": truth,
        "log_z_std": result.log_z_std,
        "z_score": (est - truth) / result.log_z_std,
        "within_3_sigma": bool(abs(est - truth) <= 3.0 * result.log_z_std),
        "n_dead": result.n_iterations,
        "acceptance_rate": result.diagnostics["acceptance_rate"],
        "wall_time": result.diagnostics["wall_time"],
    }


# Desk-scale study builders. Paper-scale presets (256x256 images, thousands
# of live points) are available through the CLI flags but run for hours.

DESK_IMAGE_SIZE = 64
DESK_N_LIVE = 200
DESK_MAX_DEAD = 5000
DESK_K_GAP = 10
DESK_DELTA = 8.0
DESK_LAM = 40.0
DESK_MU_DENOISE = 0.02
DESK_MU_RECONSTRUCT = 0.02
DESK_MU_MISSPECIFY = 0.02
DESK_WAVELET_LEVELS = 4


def _desk_sampler(prior, seed, n_live, max_dead, delta, lam, k_gap):
    ccfg = ChainConfig(delta=delta, lam=lam, k_burn=50 * k_gap, k_gap=k_gap, seed=seed)
    ccfg.validate_for(prior)
    ncfg = NestedConfig(n_live=n_live, max_dead=max_dead, dlogz_tol=0.01,
                        init_gap=5 * k_gap)
    return ncfg, ccfg


def denoise_runs(truth, snr_db=20.0, mu=DESK_MU_DENOISE, seed=1234,
                 dictionaries=("identity", "db2", "db8"), n_live=DESK_N_LIVE,
                 max_dead=DESK_MAX_DEAD, delta=DESK_DELTA, lam=DESK_LAM,
                 k_gap=DESK_K_GAP, want_posterior_mean=True):
    """Dictionary-selection study on a denoising problem (identity forward op)."""
    truth = np.asarray(truth, dtype=np.float64)
    y, sigma = simulate_denoise(truth, snr_db, seed)
    op = identity_op(truth.size)
    likelihood = GaussianLikelihood(y, op, sigma)
    runs = []
    for name in dictionaries:
        prior = PriorModel(LAPLACE_L1, mu=mu, dict_op=_dictionary(name, truth.shape))
        ncfg, ccfg = _desk_sampler(prior, seed, n_live, max_dead, delta, lam, k_gap)
        runs.append(ModelRun(label=f"dict={name}", prior=prior, likelihood=likelihood,
                             ncfg=ncfg, ccfg=ccfg, truth=truth,
                             want_posterior_mean=want_posterior_mean))
    return runs, {"sigma": sigma, "snr_db": snr_db, "mu": mu, "seed": seed}


def reconstruct_runs(truth, coverage=0.3, snr_db=30.0, mus=None, seed=1234,
                     family="db8", n_live=DESK_N_LIVE, max_dead=DESK_MAX_DEAD,
                     delta=DESK_DELTA, lam=DESK_LAM, k_gap=DESK_K_GAP,
                     want_posterior_mean=True):
    """Regularisation-strength study on masked-Fourier reconstruction."""
    truth = np.asarray(truth, dtype=np.float64)
    mus = list(mus) if mus is not None else [DESK_MU_RECONSTRUCT * f for f in (1, 10, 100)]
    mask, y, sigma = simulate_reconstruct(truth, coverage, snr_db, seed)
    likelihood = GaussianLikelihood(y, fft_op(mask), sigma)
    dict_op = _dictionary(family, truth.shape)
    runs = []
    for mu in mus:
        prior = PriorModel(LAPLACE_L1, mu=mu, dict_op=dict_op)
        ncfg, ccfg = _desk_sampler(prior, seed, n_live, max_dead, delta, lam, k_gap)
        runs.append(ModelRun(label=f"mu={mu:g}", prior=prior, likelihood=likelihood,
                             ncfg=ncfg, ccfg=ccfg, truth=truth,
                             want_posterior_mean=want_posterior_mean))
    return runs, {"sigma": sigma, "coverage": coverage, "snr_db": snr_db,
                  "mus": mus, "seed": seed, "mask": mask.to_json()}


def misspecify_runs(truth, coverage=0.1, snr_db=30.0, mu=DESK_MU_MISSPECIFY,
                    gammas=(0.0, 0.03, 0.06, 0.09, 0.12), seed=1234, family="db8",
                    n_live=DESK_N_LIVE, max_dead=DESK_MAX_DEAD, delta=DESK_DELTA,
                    lam=DESK_LAM, k_gap=DESK_K_GAP, want_posterior_mean=True):
    """Measurement-model misspecification study: radially distorted masks.

    Data are simulated with the gamma = 0 mask; each model assumes the
    mask scaled by its own gamma.
    """
    truth = np.asarray(truth, dtype=np.float64)
    mask_truth, y, sigma = simulate_reconstruct(truth, coverage, snr_db, seed)
    dict_op = _dictionary(family, truth.shape)
    runs = []
    for gamma in gammas:
        mask_gamma = misspecify_mask(mask_truth, gamma)
        op = fft_op(mask_gamma)
        # the assumed operator must match the data length: distorted masks
        # can lose duplicate positions, so the data are re-extracted on the
        # model's own mask support from the shared measurement grid
        y_gamma = _restrict_measurements(mask_truth, y, mask_gamma)
        likelihood = GaussianLikelihood(y_gamma, op, sigma)
        prior = PriorModel(LAPLACE_L1, mu=mu, dict_op=dict_op)
        ncfg, ccfg = _desk_sampler(prior, seed, n_live, max_dead, delta, lam, k_gap)
        runs.append(ModelRun(label=f"gamma={gamma:g}", prior=prior, likelihood=likelihood,
                             ncfg=ncfg, ccfg=ccfg, truth=truth,
                             want_posterior_mean=want_posterior_mean))
    return runs, {"sigma": sigma, "coverage": coverage, "mu": mu, "seed": seed,
                  "gammas": list(gammas)}


def _restrict_measurements(mask_from, y_from, mask_to):
    """Measurements re-indexed from one mask's support to another's.

    Positions of ``mask_to`` missing from ``mask_from`` receive the value
    observed at the nearest position... they are filled by zero; for the
    radial-distortion study every model keeps its own m = |mask_to| data
    points extracted from the same simulated Fourier plane.
    """
    h, w = mask_from.grid_dims
    plane = np.zeros(h * w, dtype=np.complex128)
    plane[mask_from.flat_standard()] = y_from
    return plane[mask_to.flat_standard()]


def _dictionary(name, shape):
    if name in ("identity", "I", "id"):
        return None
    spec = WaveletSpec(name, DESK_WAVELET_LEVELS)
    return wavelet_op(spec, shape)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
