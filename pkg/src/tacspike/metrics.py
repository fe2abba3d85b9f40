"""Distance functions between encoded samples.

Euclidean distance serves the vector codings.  Spike-train codings use
the Van Rossum distance with a causal exponential kernel, evaluated in
closed form: for trains u, v and kernel (1/tau) exp(-t/tau),

    d(u, v)^2 = <u,u> + <v,v> - 2<u,v>,
    <u,v> = (1/(2 tau)) sum_i sum_j exp(-|u_i - v_j| / tau).

The multi-neuron form interpolates between labelled-line and
summed-population readouts through cos_theta.  Writing g_nm for the
bilinear terms over per-taxel difference trains, the defining sum

    d^2 = sum_n g_nn + cos_theta * sum_{n != m} g_nm

rearranges exactly to

    d^2 = (1 - cos_theta) * sum_n d_n^2 + cos_theta * d_merged^2

which is what we evaluate: 49 per-taxel distances plus one distance
between the merged trains.  Tests assert the equivalence against the
direct double sum.

All pairwise spike sums run as an O(n + m) merge scan over sorted trains
(mathematically identical to the quadratic pairwise-exponential sum, with
only decaying exponentials so it cannot overflow).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .encoding import (
    EncodedSample,
    IntensiveCode,
    SpatialCode,
    SpatiotemporalCode,
    TemporalCode,
)
from .events import ParameterError, Sample, SpikeTrain, ValidationError

METRIC_KINDS = ("euclidean", "van_rossum")


@dataclass(frozen=True)
class MetricSpec:
    kind: str
    tau_s: float | None = None
    cos_theta: float = 0.4

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ParameterError(f"unknown metric kind {self.kind!r}")
        if self.tau_s is not None and self.tau_s <= 0:
            raise ParameterError("tau must be positive")
        if not 0.0 <= self.cos_theta <= 1.0:
            raise ParameterError("cos_theta must be in [0, 1]")


# ---------------------------------------------------------------------------
# euclidean over vector codes


def euclidean(a: EncodedSample, b: EncodedSample) -> float:
    """Euclidean distance between two codes of the same variant.

    Temporal series of different lengths are compared by zero-padding the
    shorter one.  Mixing variants (or using spike-train codes) is a type
    error; those pair with the Van Rossum metric instead.
    """
    if isinstance(a, IntensiveCode) and isinstance(b, IntensiveCode):
        return abs(a.value - b.value)
    if isinstance(a, SpatialCode) and isinstance(b, SpatialCode):
        d = a.counts - b.counts
        return float(np.sqrt(np.dot(d, d)))
    if isinstance(a, TemporalCode) and isinstance(b, TemporalCode):
        x, y = a.series, b.series
        if len(x) < len(y):
            x = np.concatenate([x, np.zeros(len(y) - len(x))])
        elif len(y) < len(x):
            y = np.concatenate([y, np.zeros(len(x) - len(y))])
        d = x - y
        return float(np.sqrt(np.dot(d, d)))
    raise TypeError(
        f"euclidean distance undefined between {type(a).__name__} and "
        f"{type(b).__name__}"
    )


# ---------------------------------------------------------------------------
# Van Rossum machinery


@njit(cache=True)
def _corr_sum(u, v, tau):
    """sum_i sum_j exp(-|u_i - v_j| / tau) for sorted float64 arrays."""
    nu = u.shape[0]
    nv = v.shape[0]
    if nu == 0 or nv == 0:
        return 0.0
    iu = 0
    iv = 0
    ru = 0.0  # decayed mass of processed u spikes
    rv = 0.0
    total = 0.0
    tlast = u[0] if u[0] <= v[0] else v[0]
    while iu < nu or iv < nv:
        if iv >= nv or (iu < nu and u[iu] <= v[iv]):
            tnow = u[iu]
            decay = np.exp(-(tnow - tlast) / tau)
            ru *= decay
            rv *= decay
            total += rv
            ru += 1.0
            iu += 1
        else:
            tnow = v[iv]
            decay = np.exp(-(tnow - tlast) / tau)
            ru *= decay
            rv *= decay
            total += ru
            rv += 1.0
            iv += 1
        tlast = tnow
    return total


@njit(cache=True)
def _self_corrs(flat, offsets):
    """_corr_sum(train, train) for every slice in a flattened train table."""
    n = offsets.shape[0] - 1
    out = np.zeros(n)
    for i in range(n):
        tr = flat[offsets[i] : offsets[i + 1]]
        out[i] = _corr_sum(tr, tr, 1.0)  # tau folded into flat scaling
    return out


@njit(cache=True, parallel=True)
def _vr_matrix(flat, offs, self_corr, mflat, moffs, mself, cos_theta):
    """Pairwise multi-neuron Van Rossum distances.

    flat holds every taxel train of every sample scaled by 1/tau, offs is
    (samples, taxels + 1) slice bounds; mflat/moffs the merged trains.
    Returned distances carry the 1/(2 tau) normalisation applied outside.
    """
    n_samples = offs.shape[0]
    n_taxels = offs.shape[1] - 1
    out = np.zeros((n_samples, n_samples))
    for a in prange(n_samples):
        for b in range(a + 1, n_samples):
            ll = 0.0
            for k in range(n_taxels):
                u = flat[offs[a, k] : offs[a, k + 1]]
                v = flat[offs[b, k] : offs[b, k + 1]]
                ll += (
                    self_corr[a * n_taxels + k]
                    + self_corr[b * n_taxels + k]
                    - 2.0 * _corr_sum(u, v, 1.0)
                )
            mu = mflat[moffs[a] : moffs[a + 1]]
            mv = mflat[moffs[b] : moffs[b + 1]]
            sp = mself[a] + mself[b] - 2.0 * _corr_sum(mu, mv, 1.0)
            d2 = (1.0 - cos_theta) * ll + cos_theta * sp
            if d2 < 0.0:
                d2 = 0.0
            d = np.sqrt(d2)
            out[a, b] = d
            out[b, a] = d
    return out


def _times_seconds(train) -> np.ndarray:
    """Spike times as float64 seconds.  Integer inputs are microseconds,
    float inputs are taken to be seconds already."""
    if isinstance(train, SpikeTrain):
        return train.times / 1e6
    arr = np.asarray(train)
    if arr.ndim != 1:
        raise ValidationError("spike train must be a 1-d array")
    if np.issubdtype(arr.dtype, np.integer):
        return arr / 1e6
    return arr.astype(np.float64)


def van_rossum_single(u, v, tau_s: float) -> float:
    """Van Rossum distance between two spike trains (kernel constant in
    seconds).  Accepts SpikeTrain, integer-microsecond or float-second
    arrays."""
    if tau_s <= 0:
        raise ParameterError("tau must be positive")
    us = np.ascontiguousarray(_times_seconds(u) / tau_s)
    vs = np.ascontiguousarray(_times_seconds(v) / tau_s)
    cuu = _corr_sum(us, us, 1.0)
    cvv = _corr_sum(vs, vs, 1.0)
    cuv = _corr_sum(us, vs, 1.0)
    d2 = (cuu + cvv - 2.0 * cuv) / (2.0 * tau_s)
    return float(np.sqrt(max(d2, 0.0)))


def _multi_trains(x, tau_s):
    if isinstance(x, SpatiotemporalCode):
        if tau_s is not None and not np.isclose(tau_s, x.tau_s):
            raise ValidationError(
                f"metric tau {tau_s} disagrees with encoded tau {x.tau_s}"
            )
        return x.trains, x.tau_s
    if isinstance(x, Sample):
        if tau_s is None:
            raise ParameterError("tau is required when comparing raw samples")
        return x.trains, tau_s
    raise TypeError(
        f"van_rossum_multi needs Samples or spatiotemporal codes, got "
        f"{type(x).__name__}"
    )


def van_rossum_multi(a, b, tau_s: float | None = None, cos_theta: float = 0.4) -> float:
    """Multi-neuron Van Rossum distance between two 49-train samples.

    cos_theta = 0 reads every taxel separately (labelled line); 1 pools
    all taxels into one train (summed population); values between mix the
    two readouts through the cross-taxel bilinear terms.
    """
    if not 0.0 <= cos_theta <= 1.0:
        raise ParameterError("cos_theta must be in [0, 1]")
    ta, tau_a = _multi_trains(a, tau_s)
    tb, tau_b = _multi_trains(b, tau_s)
    if not np.isclose(tau_a, tau_b):
        raise ValidationError(f"tau mismatch between samples: {tau_a} vs {tau_b}")
    tau = float(tau_a)
    if len(ta) != len(tb):
        raise ValidationError("samples carry different taxel counts")

    ll = 0.0
    for u, v in zip(ta, tb):
        us = np.ascontiguousarray(_times_seconds(u) / tau)
        vs = np.ascontiguousarray(_times_seconds(v) / tau)
        ll += (
            _corr_sum(us, us, 1.0)
            + _corr_sum(vs, vs, 1.0)
            - 2.0 * _corr_sum(us, vs, 1.0)
        )
    ma = np.sort(np.concatenate([_times_seconds(u) / tau for u in ta]))
    mb = np.sort(np.concatenate([_times_seconds(v) / tau for v in tb]))
    sp = (
        _corr_sum(ma, ma, 1.0)
        + _corr_sum(mb, mb, 1.0)
        - 2.0 * _corr_sum(ma, mb, 1.0)
    )
    d2 = ((1.0 - cos_theta) * ll + cos_theta * sp) / (2.0 * tau)
    return float(np.sqrt(max(d2, 0.0)))


def distance_fn(spec: MetricSpec):
    """Bind a MetricSpec to a two-argument distance callable."""
    if spec.kind == "euclidean":
        return euclidean

    def vr(a, b):
        return van_rossum_multi(a, b, tau_s=spec.tau_s, cos_theta=spec.cos_theta)

    return vr


# ---------------------------------------------------------------------------
# pairwise distance matrices (classification fast paths)


def _euclid_matrix(rows: np.ndarray) -> np.ndarray:
    sq = np.sum(rows * rows, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (rows @ rows.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def pairwise_matrix(codes: list[EncodedSample], spec: MetricSpec) -> np.ndarray:
    """Symmetric distance matrix over encoded samples.

    Agrees with distance_fn(spec) applied pairwise; vector codings go
    through one linear-algebra pass and spike codings through the compiled
    merge-scan kernel.
    """
    if not codes:
        return np.zeros((0, 0))
    first = type(codes[0])
    if any(type(c) is not first for c in codes):
        raise TypeError("cannot mix encoded-sample variants in one matrix")

    if spec.kind == "euclidean":
        if first is IntensiveCode:
            vals = np.array([c.value for c in codes])
            return np.abs(vals[:, None] - vals[None, :])
        if first is SpatialCode:
            return _euclid_matrix(np.array([c.counts for c in codes], dtype=float))
        if first is TemporalCode:
            width = max(len(c.series) for c in codes)
            rows = np.zeros((len(codes), width))
            for i, c in enumerate(codes):
                rows[i, : len(c.series)] = c.series
            return _euclid_matrix(rows)
        raise TypeError(f"euclidean matrix undefined for {first.__name__}")

    if first is not SpatiotemporalCode:
        raise TypeError("van_rossum matrix requires spatiotemporal codes")
    tau = codes[0].tau_s
    if spec.tau_s is not None and not np.isclose(spec.tau_s, tau):
        raise ValidationError(
            f"metric tau {spec.tau_s} disagrees with encoded tau {tau}"
        )
    if any(not np.isclose(c.tau_s, tau) for c in codes):
        raise ValidationError("all spatiotemporal codes must share tau")

    n = len(codes)
    n_taxels = len(codes[0].trains)
    offs = np.zeros((n, n_taxels + 1), dtype=np.int64)
    chunks = []
    pos = 0
    for i, c in enumerate(codes):
        offs[i, 0] = pos
        for k, tr in enumerate(c.trains):
            arr = tr.times / 1e6 / tau
            chunks.append(arr)
            pos += len(arr)
            offs[i, k + 1] = pos
    flat = np.concatenate(chunks) if chunks else np.zeros(0)

    moffs = np.zeros(n + 1, dtype=np.int64)
    mchunks = []
    mpos = 0
    for i, c in enumerate(codes):
        merged = np.sort(flat[offs[i, 0] : offs[i, -1]])
        mchunks.append(merged)
        mpos += len(merged)
        moffs[i + 1] = mpos
    mflat = np.concatenate(mchunks) if mchunks else np.zeros(0)

    # offsets per (sample, taxel) slice: flatten the 2-d table
    flat_offs = np.zeros(n * n_taxels + 1, dtype=np.int64)
    for i in range(n):
        for k in range(n_taxels):
            flat_offs[i * n_taxels + k] = offs[i, k]
    flat_offs[-1] = offs[-1, -1]
    self_corr = _self_corrs(flat, flat_offs)
    mself = _self_corrs(mflat, moffs)

    dist = _vr_matrix(flat, offs, self_corr, mflat, moffs, mself, spec.cos_theta)
    return dist / np.sqrt(2.0 * tau)
