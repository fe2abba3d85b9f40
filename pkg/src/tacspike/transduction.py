"""Event-to-spike transduction: noise filter, pooling windows, taxel tracking.

The sensor's pin tips appear as small bright blobs to the event camera, so
each taxel owns a circular receptive field (default 6 px across).  Raw
streams are denoised with a spatiotemporal correlation test, pooled into
tumbling windows (default 20 ms) and reduced to one spike per taxel per
active window.  Receptive-field centers trail the pooled centroids so a
field keeps following its pin while the skin deforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .events import (
    EVENT_DTYPE,
    TAXEL_COUNT,
    Sample,
    SpikeTrain,
    TaxelEvent,
    ValidationError,
    validate_events,
)

# composite sort keys pack (pixel, t); timestamps must stay below this
_TIME_SPAN = 2**33


@dataclass(frozen=True)
class ReceptiveField:
    """Circular pixel region owned by one taxel."""

    taxel_id: int
    center: tuple[float, float]
    diameter: float

    def __post_init__(self):
        if not 0 <= self.taxel_id < TAXEL_COUNT:
            raise ValidationError(f"taxel_id out of range: {self.taxel_id}")
        if self.diameter <= 0:
            raise ValidationError("receptive field diameter must be positive")


@dataclass(frozen=True)
class TransducerConfig:
    noise_window_us: int = 5_000
    neighborhood_radius: int = 1
    pooling_window_us: int = 20_000
    rf_diameter: float = 6.0
    rf_update_gain: float = 0.5

    def __post_init__(self):
        if self.noise_window_us <= 0:
            raise ValidationError("noise_window_us must be positive")
        if self.neighborhood_radius < 1:
            raise ValidationError("neighborhood_radius must be >= 1")
        if self.pooling_window_us <= 0:
            raise ValidationError("pooling_window_us must be positive")
        if self.rf_diameter <= 0:
            raise ValidationError("rf_diameter must be positive")
        if not 0.0 <= self.rf_update_gain <= 1.0:
            raise ValidationError("rf_update_gain must be in [0, 1]")


def default_fields(centers, diameter: float = 6.0) -> list[ReceptiveField]:
    """Receptive fields at the given (x, y) centers, taxel ids in order."""
    return [
        ReceptiveField(i, (float(x), float(y)), float(diameter))
        for i, (x, y) in enumerate(centers)
    ]


def _check_fields(fields) -> None:
    ids = [f.taxel_id for f in fields]
    if any(b <= a for a, b in zip(ids, ids[1:])):
        raise ValidationError("fields must be ordered by strictly increasing taxel_id")


def _field_distances(events: np.ndarray, fields) -> np.ndarray:
    """Squared pixel distance of every event to every field center, (E, F)."""
    cx = np.array([f.center[0] for f in fields])
    cy = np.array([f.center[1] for f in fields])
    dx = events["x"][:, None] - cx[None, :]
    dy = events["y"][:, None] - cy[None, :]
    return dx * dx + dy * dy


def _inside_any_field(events: np.ndarray, fields) -> np.ndarray:
    d2 = _field_distances(events, fields)
    r2 = np.array([(f.diameter / 2.0) ** 2 for f in fields])
    return (d2 <= r2[None, :]).any(axis=1)


def _has_support(events: np.ndarray, radius: int, window_us: int) -> np.ndarray:
    """True where an event has another event within the Chebyshev radius
    and +/- window_us in time.  Duplicate records support each other."""
    n = len(events)
    if n == 0:
        return np.zeros(0, dtype=bool)
    t = events["t"]
    if t[-1] + window_us >= _TIME_SPAN:
        raise ValidationError("timestamps too large for the support scan")
    key = events["x"] * 180 + events["y"]  # any injective pixel key works
    combined = np.sort(key * _TIME_SPAN + t)
    neighbors = np.zeros(n, dtype=np.int64)
    for dx in range(-radius, radius + 1):
        for dy in range(-radius, radius + 1):
            qx = events["x"] + dx
            qy = events["y"] + dy
            ok = (qx >= 0) & (qx < 240) & (qy >= 0) & (qy < 180)
            qkey = (qx * 180 + qy) * _TIME_SPAN
            lo = np.searchsorted(combined, qkey + t - window_us, side="left")
            hi = np.searchsorted(combined, qkey + t + window_us, side="right")
            cnt = hi - lo
            if dx == 0 and dy == 0:
                cnt = cnt - 1  # the event itself always matches
            neighbors += np.where(ok, cnt, 0)
    return neighbors >= 1


def filter_noise(events: np.ndarray, fields, config: TransducerConfig) -> np.ndarray:
    """Drop events outside every receptive field, then drop events without
    spatiotemporal support.

    Support is evaluated among the in-field candidates, which makes the
    filter idempotent: every survivor's witness also survives.
    """
    validate_events(events)
    _check_fields(fields)
    if len(events) == 0:
        return events.copy()
    candidates = events[_inside_any_field(events, fields)]
    keep = _has_support(
        candidates, config.neighborhood_radius, config.noise_window_us
    )
    return candidates[keep]


def pool_events(events: np.ndarray, fields, config: TransducerConfig) -> list[TaxelEvent]:
    """Pool filtered events into tumbling windows, one TaxelEvent per taxel
    per active window.

    Events are grouped by the receptive field containing them (overlaps
    resolved to the nearest center, then the lowest taxel_id).  Window k
    covers [k*W, (k+1)*W) with W = pooling_window_us, anchored at t = 0.
    """
    validate_events(events)
    _check_fields(fields)
    if len(events) == 0:
        return []
    d2 = _field_distances(events, fields)
    r2 = np.array([(f.diameter / 2.0) ** 2 for f in fields])
    contained = d2 <= r2[None, :]
    if not contained.any(axis=1).all():
        bad = int(np.flatnonzero(~contained.any(axis=1))[0])
        raise RuntimeError(
            f"event {bad} lies inside no receptive field; pool_events expects "
            "noise-filtered input"
        )
    d2[~contained] = np.inf
    owner = np.argmin(d2, axis=1)  # first minimum = lowest taxel_id on ties
    taxel = np.array([fields[i].taxel_id for i in owner])

    window = events["t"] // config.pooling_window_us
    group_key = window * TAXEL_COUNT + taxel
    uniq, inverse = np.unique(group_key, return_inverse=True)
    counts = np.bincount(inverse)
    sum_x = np.bincount(inverse, weights=events["x"].astype(float))
    sum_y = np.bincount(inverse, weights=events["y"].astype(float))
    sum_t = np.bincount(inverse, weights=events["t"].astype(float))

    pooled = []
    for g, key in enumerate(uniq):
        n = int(counts[g])
        mean_t = int(math.floor(sum_t[g] / n + 0.5))
        pooled.append(
            TaxelEvent(
                taxel_id=int(key % TAXEL_COUNT),
                count=n,
                centroid=(sum_x[g] / n, sum_y[g] / n),
                t=mean_t,
            )
        )
    return pooled


def update_positions(fields, taxel_events, config: TransducerConfig) -> list[ReceptiveField]:
    """Move each active field's center toward its pooled centroid by
    rf_update_gain.  Fields without activity keep their position."""
    _check_fields(fields)
    seen = set()
    for ev in taxel_events:
        if ev.taxel_id in seen:
            raise ValidationError(
                f"duplicate taxel {ev.taxel_id} in position update; pass at most "
                "one pooled event per taxel"
            )
        seen.add(ev.taxel_id)
    by_taxel = {ev.taxel_id: ev for ev in taxel_events}
    out = []
    g = config.rf_update_gain
    for f in fields:
        ev = by_taxel.get(f.taxel_id)
        if ev is None:
            out.append(f)
        else:
            cx = f.center[0] + g * (ev.centroid[0] - f.center[0])
            cy = f.center[1] + g * (ev.centroid[1] - f.center[1])
            out.append(replace(f, center=(cx, cy)))
    return out


def transduce(
    events: np.ndarray,
    initial_fields,
    config: TransducerConfig,
    duration_us: int,
    label: str = "",
) -> Sample:
    """Run the full pipeline window by window: filter, pool, update.

    Each pooling window is filtered against the current field positions,
    pooled, and used to update those positions before the next window.
    Every pooled event becomes one spike at its mean timestamp; equal
    timestamps within a train are disambiguated by +1 us.
    """
    validate_events(events)
    _check_fields(fields := list(initial_fields))
    if duration_us <= 0:
        raise ValidationError("duration must be positive")
    if len(events) and events["t"][-1] >= duration_us:
        raise ValidationError("events at/after the stated duration")

    window_us = config.pooling_window_us
    n_windows = -(-duration_us // window_us)
    spikes: list[list[int]] = [[] for _ in range(TAXEL_COUNT)]
    bounds = np.searchsorted(
        events["t"], np.arange(n_windows + 1, dtype=np.int64) * window_us
    )
    for w in range(n_windows):
        chunk = events[bounds[w] : bounds[w + 1]]
        if len(chunk) == 0:
            continue
        kept = filter_noise(chunk, fields, config)
        if len(kept) == 0:
            continue
        pooled = pool_events(kept, fields, config)
        for ev in pooled:
            train = spikes[ev.taxel_id]
            t = ev.t
            if train and t <= train[-1]:
                t = train[-1] + 1
            train.append(t)
        fields = update_positions(fields, pooled, config)

    trains = tuple(
        SpikeTrain(i, np.asarray(ts, dtype=np.int64)) for i, ts in enumerate(spikes)
    )
    return Sample(label=label, duration_us=int(duration_us), trains=trains)
