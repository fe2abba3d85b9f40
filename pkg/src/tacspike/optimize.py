"""Encoder parameter search: exhaustive sweep and surrogate optimization.

The temporal window is a single small integer, so it gets a brute-force
sweep.  The spatiotemporal pair (cos_theta, tau) is continuous and each
evaluation costs a full cross-validation, so it gets a sequential
model-based search: a Gaussian-process surrogate (squared-exponential
kernel on unit-cube-normalised inputs, length scale 0.2, noise 1e-3)
seeded with a quasi-random design, then expected-improvement proposals
from a 64 x 64 candidate grid.  Everything is deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import loocv_from_matrix
from .encoding import EncoderSpec, encode, duration_ms
from .events import Dataset, ParameterError, ValidationError
from .metrics import MetricSpec, pairwise_matrix, _euclid_matrix

_LENGTH_SCALE = 0.2
_NOISE = 1e-3
_EI_GRID = 64


@dataclass
class SweepResult:
    evaluated: list[tuple[int, float]]
    best_delta_t_ms: int
    best_accuracy: float


@dataclass
class SurrogateResult:
    trials: list[tuple[tuple[float, float], float]]
    best_params: tuple[float, float]
    best_accuracy: float


def _subsample(dataset: Dataset, per_class: int | None) -> Dataset:
    """First per_class samples of every class, in dataset order."""
    if per_class is None:
        return dataset
    if per_class < 2:
        raise ParameterError("subsample needs at least 2 samples per class")
    taken: dict[str, int] = {}
    samples = []
    for s in dataset.samples:
        if taken.get(s.label, 0) < per_class:
            taken[s.label] = taken.get(s.label, 0) + 1
            samples.append(s)
    return Dataset(samples=samples, classes=list(dataset.classes))


def sweep_delta_t(
    dataset: Dataset,
    lo_ms: int = 1,
    hi_ms: int = 200,
    stride_ms: int = 1,
    k: int = 4,
    per_class: int | None = None,
) -> SweepResult:
    """Leave-one-out accuracy of the temporal coding for every window in
    [lo_ms, hi_ms] at the given stride; ties resolve to the smallest."""
    data = _subsample(dataset, per_class)
    if not data.samples:
        raise ValidationError("empty dataset")
    dur = min(duration_ms(s) for s in data.samples)
    if not 1 <= lo_ms <= hi_ms <= dur:
        raise ParameterError(
            f"sweep range must satisfy 1 <= lo <= hi <= {dur}, got [{lo_ms}, {hi_ms}]"
        )
    if stride_ms < 1:
        raise ParameterError("stride must be >= 1")

    labels = data.labels()
    # one pass of 1 ms binning serves every window width
    csums = []
    for s in data.samples:
        bins = np.zeros(duration_ms(s), dtype=np.int64)
        merged = s.merged_times()
        if len(merged):
            np.add.at(bins, merged // 1000, 1)
        csums.append(np.concatenate([[0], np.cumsum(bins)]))

    evaluated = []
    best_dt, best_acc = lo_ms, -1.0
    for dt in range(lo_ms, hi_ms + 1, stride_ms):
        width = max(1, dur - dt + 1)
        rows = np.zeros((len(csums), width))
        for i, c in enumerate(csums):
            rows[i] = (c[dt : dt + width] - c[:width]) / 49.0
        dist = _euclid_matrix(rows)
        acc = loocv_from_matrix(dist, labels, data.classes, k).accuracy
        evaluated.append((dt, acc))
        if acc > best_acc:
            best_dt, best_acc = dt, acc
    return SweepResult(evaluated=evaluated, best_delta_t_ms=best_dt, best_accuracy=best_acc)


# ---------------------------------------------------------------------------
# Gaussian-process surrogate with expected improvement


def _halton(n: int, rng) -> np.ndarray:
    """n quasi-random points in the unit square: Halton bases 2 and 3 with
    a seeded Cranley-Patterson rotation."""

    def seq(count, base):
        out = np.zeros(count)
        for i in range(count):
            f, r = 1.0, 0.0
            idx = i + 1
            while idx > 0:
                f /= base
                r += f * (idx % base)
                idx //= base
            out[i] = r
        return out

    pts = np.stack([seq(n, 2), seq(n, 3)], axis=1)
    return (pts + rng.random(2)) % 1.0


def _kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-d2 / (2.0 * _LENGTH_SCALE**2))


def _gp_posterior(x_obs, y_obs, x_query):
    """Mean and std of the GP at query points, y standardised internally."""
    mu0 = y_obs.mean()
    sd0 = y_obs.std()
    if sd0 < 1e-12:
        sd0 = 1.0
    y = (y_obs - mu0) / sd0
    k_obs = _kernel(x_obs, x_obs) + _NOISE * np.eye(len(x_obs))
    chol = np.linalg.cholesky(k_obs)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
    k_cross = _kernel(x_query, x_obs)
    mean = k_cross @ alpha
    w = np.linalg.solve(chol, k_cross.T)
    var = 1.0 - np.sum(w * w, axis=0)
    np.clip(var, 1e-12, None, out=var)
    return mean * sd0 + mu0, np.sqrt(var) * sd0


def _expected_improvement(mean, std, best):
    z = (mean - best) / std
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    big_phi = 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))
    return std * (z * big_phi + phi)


def maximize_surrogate(objective, bounds, epochs: int, seed: int) -> SurrogateResult:
    """Maximise a 2-d objective within bounds using the GP surrogate.

    `epochs` counts total objective evaluations, including the initial
    quasi-random design of max(4, epochs // 10) points.  Same seed, same
    trial sequence.
    """
    (lo0, hi0), (lo1, hi1) = bounds
    if not (hi0 > lo0 and hi1 > lo1):
        raise ParameterError("bounds must have positive extent")
    n_init = max(4, epochs // 10)
    if epochs < n_init:
        raise ParameterError(f"epochs must be at least {n_init}")
    rng = np.random.default_rng(seed)
    span = np.array([hi0 - lo0, hi1 - lo1])
    low = np.array([lo0, lo1])

    unit_obs = [p for p in _halton(n_init, rng)]
    x_unit = np.array(unit_obs)
    trials = []
    y_obs = []
    for p in x_unit:
        params = low + p * span
        y_obs.append(float(objective(float(params[0]), float(params[1]))))
        trials.append(((float(params[0]), float(params[1])), y_obs[-1]))

    axis = np.linspace(0.0, 1.0, _EI_GRID)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)

    for _ in range(epochs - n_init):
        x_arr = np.array(unit_obs)
        y_arr = np.array(y_obs)
        mean, std = _gp_posterior(x_arr, y_arr, grid)
        ei = _expected_improvement(mean, std, y_arr.max())
        # never re-propose an evaluated grid point
        taken = np.any(
            np.all(np.abs(grid[:, None, :] - x_arr[None, :, :]) < 1e-12, axis=2),
            axis=1,
        )
        ei[taken] = -np.inf
        pick = grid[int(np.argmax(ei))]
        params = low + pick * span
        val = float(objective(float(params[0]), float(params[1])))
        unit_obs.append(pick)
        y_obs.append(val)
        trials.append(((float(params[0]), float(params[1])), val))

    best_idx = int(np.argmax(y_obs))
    return SurrogateResult(
        trials=trials,
        best_params=trials[best_idx][0],
        best_accuracy=float(y_obs[best_idx]),
    )


def optimize_spatiotemporal(
    dataset: Dataset,
    bounds=((0.0, 1.0), (10.0, 200.0)),
    epochs: int = 60,
    seed: int = 0,
    k: int = 4,
    per_class: int | None = None,
) -> SurrogateResult:
    """Search (cos_theta, tau_ms) for the best leave-one-out accuracy of
    the spatiotemporal coding under the Van Rossum metric."""
    data = _subsample(dataset, per_class)
    if not data.samples:
        raise ValidationError("empty dataset")
    labels = data.labels()

    def objective(cos_theta: float, tau_ms: float) -> float:
        spec = EncoderSpec(kind="spatiotemporal", tau_s=tau_ms / 1000.0)
        codes = [encode(s, spec) for s in data.samples]
        metric = MetricSpec(
            kind="van_rossum", tau_s=tau_ms / 1000.0, cos_theta=cos_theta
        )
        dist = pairwise_matrix(codes, metric)
        return loocv_from_matrix(dist, labels, data.classes, k).accuracy

    return maximize_surrogate(objective, bounds, epochs, seed)


# ---------------------------------------------------------------------------
# trial logs


def write_sweep_csv(path, result: SweepResult) -> None:
    with open(path, "w") as fh:
        fh.write("delta_t_ms,accuracy\n")
        for dt, acc in result.evaluated:
            fh.write(f"{dt},{acc:.6f}\n")


def write_trials_csv(path, result: SurrogateResult) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,cos_theta,tau_ms,accuracy\n")
        for i, ((c, tau), acc) in enumerate(result.trials):
            fh.write(f"{i},{c:.6f},{tau:.6f},{acc:.6f}\n")
