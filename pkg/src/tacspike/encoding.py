"""Spike-train coding schemes: intensive, spatial, temporal, spatiotemporal.

All four reduce a 49-train Sample to a comparable code.  Intensive keeps
the mean spike count, spatial the per-taxel counts, temporal a rolling
windowed population count stepped at 1 ms, and spatiotemporal the raw
trains tagged with the exponential kernel constant used by the Van Rossum
metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .events import (
    TAXEL_COUNT,
    ParameterError,
    Sample,
    SpikeTrain,
    ValidationError,
)

ENCODER_KINDS = ("intensive", "spatial", "temporal", "spatiotemporal")


@dataclass(frozen=True)
class IntensiveCode:
    value: float


@dataclass(frozen=True)
class SpatialCode:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (TAXEL_COUNT,):
            raise ValidationError(f"spatial code needs {TAXEL_COUNT} counts")


@dataclass(frozen=True)
class TemporalCode:
    series: np.ndarray
    delta_t_ms: int

    def __post_init__(self):
        series = np.asarray(self.series, dtype=np.float64).copy()
        series.setflags(write=False)
        object.__setattr__(self, "series", series)


@dataclass(frozen=True)
class SpatiotemporalCode:
    trains: tuple[SpikeTrain, ...]
    tau_s: float

    def __post_init__(self):
        if self.tau_s <= 0:
            raise ParameterError("tau must be positive")


EncodedSample = IntensiveCode | SpatialCode | TemporalCode | SpatiotemporalCode


@dataclass(frozen=True)
class EncoderSpec:
    """Which coding to apply, plus its parameter where one is needed."""

    kind: str
    delta_t_ms: int | None = None
    tau_s: float | None = None

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ParameterError(f"unknown encoder kind {self.kind!r}")
        if self.kind == "temporal" and self.delta_t_ms is None:
            raise ParameterError("temporal coding requires delta_t_ms")
        if self.kind == "spatiotemporal" and self.tau_s is None:
            raise ParameterError("spatiotemporal coding requires tau_s")
        if self.delta_t_ms is not None and self.delta_t_ms < 1:
            raise ParameterError("delta_t_ms must be >= 1")
        if self.tau_s is not None and self.tau_s <= 0:
            raise ParameterError("tau must be positive")


def encode_intensive(sample: Sample) -> IntensiveCode:
    """Mean spike count per taxel (total spikes / 49)."""
    return IntensiveCode(value=sample.total_spikes() / TAXEL_COUNT)


def encode_spatial(sample: Sample) -> SpatialCode:
    """Per-taxel spike counts, ordered by taxel id."""
    return SpatialCode(counts=np.array([len(tr) for tr in sample.trains]))


def duration_ms(sample: Sample) -> int:
    """Sample duration in whole milliseconds, rounded up so that 1 ms
    binning always covers every spike."""
    return -(-sample.duration_us // 1000)


def encode_temporal(sample: Sample, delta_t_ms: int) -> TemporalCode:
    """Population spike count in a rolling window of delta_t_ms, stepped
    at 1 ms and normalised by the taxel count.

    series[k] counts spikes in [k, k + delta_t) ms; the series has
    max(1, duration_ms - delta_t_ms + 1) entries.
    """
    dur_ms = duration_ms(sample)
    if not 1 <= delta_t_ms <= dur_ms:
        raise ParameterError(
            f"delta_t_ms must be in [1, {dur_ms}], got {delta_t_ms}"
        )
    bins = np.zeros(dur_ms, dtype=np.int64)
    merged = sample.merged_times()
    if len(merged):
        np.add.at(bins, merged // 1000, 1)
    csum = np.concatenate([[0], np.cumsum(bins)])
    length = max(1, dur_ms - delta_t_ms + 1)
    series = (csum[delta_t_ms : delta_t_ms + length] - csum[:length]) / TAXEL_COUNT
    return TemporalCode(series=series, delta_t_ms=int(delta_t_ms))


def encode_spatiotemporal(sample: Sample, tau_s: float) -> SpatiotemporalCode:
    """Keep the spike trains, tagged with the kernel constant tau (seconds)."""
    if tau_s <= 0:
        raise ParameterError("tau must be positive")
    return SpatiotemporalCode(trains=sample.trains, tau_s=float(tau_s))


def kernel_response(times, tau_s: float, at_s: float) -> float:
    """Filtered train f(t) = sum (1/tau) exp(-(t - s)/tau) over spikes s <= t.

    `times` may be a SpikeTrain or integer microsecond array; `at_s` is the
    evaluation time in seconds.
    """
    if tau_s <= 0:
        raise ParameterError("tau must be positive")
    if isinstance(times, SpikeTrain):
        times = times.times
    times = np.asarray(times)
    secs = times / 1e6 if np.issubdtype(times.dtype, np.integer) else times.astype(float)
    past = secs[secs <= at_s]
    if len(past) == 0:
        return 0.0
    return float(np.sum(np.exp(-(at_s - past) / tau_s)) / tau_s)


def encode(sample: Sample, spec: EncoderSpec) -> EncodedSample:
    if spec.kind == "intensive":
        return encode_intensive(sample)
    if spec.kind == "spatial":
        return encode_spatial(sample)
    if spec.kind == "temporal":
        return encode_temporal(sample, spec.delta_t_ms)
    return encode_spatiotemporal(sample, spec.tau_s)


# ---------------------------------------------------------------------------
# cache serialization: tag + payload arrays


def code_to_dict(code: EncodedSample) -> dict:
    if isinstance(code, IntensiveCode):
        return {"kind": "intensive", "value": code.value}
    if isinstance(code, SpatialCode):
        return {"kind": "spatial", "counts": [int(c) for c in code.counts]}
    if isinstance(code, TemporalCode):
        return {
            "kind": "temporal",
            "delta_t_ms": code.delta_t_ms,
            "series": [float(v) for v in code.series],
        }
    if isinstance(code, SpatiotemporalCode):
        return {
            "kind": "spatiotemporal",
            "tau_s": code.tau_s,
            "trains": [[int(t) for t in tr.times] for tr in code.trains],
        }
    raise TypeError(f"not an encoded sample: {code!r}")


def code_from_dict(obj: dict) -> EncodedSample:
    kind = obj.get("kind")
    if kind == "intensive":
        return IntensiveCode(value=float(obj["value"]))
    if kind == "spatial":
        return SpatialCode(counts=np.asarray(obj["counts"], dtype=np.int64))
    if kind == "temporal":
        return TemporalCode(
            series=np.asarray(obj["series"], dtype=np.float64),
            delta_t_ms=int(obj["delta_t_ms"]),
        )
    if kind == "spatiotemporal":
        trains = tuple(
            SpikeTrain(i, np.asarray(tr, dtype=np.int64))
            for i, tr in enumerate(obj["trains"])
        )
        return SpatiotemporalCode(trains=trains, tau_s=float(obj["tau_s"]))
    raise ValidationError(f"unknown encoded-sample kind {kind!r}")
