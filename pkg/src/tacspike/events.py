"""Core event and spike-train types plus file I/O.

Pixel events are address-event tuples (t, x, y, polarity) from a 240x180
event camera watching the sensor's internal pin tips.  Timestamps are
integer microseconds throughout; durations likewise.  Event streams are
kept as numpy structured arrays (EVENT_DTYPE) so filtering and pooling
stay vectorised; PixelEvent exists for scalar construction and tests.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

SENSOR_WIDTH = 240
SENSOR_HEIGHT = 180
TAXEL_COUNT = 49

POLARITY_OFF = 0
POLARITY_ON = 1

# in-memory stream layout; int64 everywhere so arithmetic never wraps
EVENT_DTYPE = np.dtype(
    [("t", np.int64), ("x", np.int64), ("y", np.int64), ("polarity", np.int64)]
)

# on-disk record: u32 t_us, u16 x, u16 y, u8 polarity, u8 reserved
_FILE_RECORD_DTYPE = np.dtype(
    [
        ("t", "<u4"),
        ("x", "<u2"),
        ("y", "<u2"),
        ("polarity", "u1"),
        ("reserved", "u1"),
    ]
)
_FILE_MAGIC = b"NTEV"
_FILE_VERSION = 1
_FILE_HEADER = struct.Struct("<4sHHQ")

_CSV_HEADER = "t_us,x,y,polarity"


class TacspikeError(Exception):
    """Base class for all library errors."""


class FormatError(TacspikeError):
    """Malformed file: bad magic, truncated payload, bad header."""


class ValidationError(TacspikeError):
    """Well-formed input carrying out-of-domain values."""


class ParameterError(TacspikeError):
    """Parameter outside its documented domain."""


@dataclass(frozen=True)
class PixelEvent:
    """One camera event. polarity is 1 (on) or 0 (off)."""

    t: int
    x: int
    y: int
    polarity: int

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError(f"event timestamp must be >= 0, got {self.t}")
        if not 0 <= self.x < SENSOR_WIDTH:
            raise ValidationError(f"x must be in [0, {SENSOR_WIDTH}), got {self.x}")
        if not 0 <= self.y < SENSOR_HEIGHT:
            raise ValidationError(f"y must be in [0, {SENSOR_HEIGHT}), got {self.y}")
        if self.polarity not in (POLARITY_OFF, POLARITY_ON):
            raise ValidationError(f"polarity must be 0 or 1, got {self.polarity}")


def make_events(rows) -> np.ndarray:
    """Build a validated event stream from (t, x, y, polarity) rows.

    Accepts an iterable of tuples or PixelEvents.  The result is sorted
    ascending by timestamp already or a ValidationError is raised; callers
    that hold unsorted data should sort before constructing a stream.
    """
    rows = list(rows)
    out = np.zeros(len(rows), dtype=EVENT_DTYPE)
    for i, r in enumerate(rows):
        if isinstance(r, PixelEvent):
            out[i] = (r.t, r.x, r.y, r.polarity)
        else:
            out[i] = tuple(r)
    validate_events(out)
    return out


def validate_events(events: np.ndarray) -> None:
    """Check domain and ordering invariants of an event stream."""
    if events.dtype != EVENT_DTYPE:
        raise ValidationError(f"expected event dtype {EVENT_DTYPE}, got {events.dtype}")
    if len(events) == 0:
        return
    bad = np.flatnonzero(events["t"] < 0)
    if bad.size:
        raise ValidationError(f"negative timestamp in record {bad[0]}")
    bad = np.flatnonzero((events["x"] < 0) | (events["x"] >= SENSOR_WIDTH))
    if bad.size:
        raise ValidationError(
            f"x out of range [0, {SENSOR_WIDTH}) in record {bad[0]}"
        )
    bad = np.flatnonzero((events["y"] < 0) | (events["y"] >= SENSOR_HEIGHT))
    if bad.size:
        raise ValidationError(
            f"y out of range [0, {SENSOR_HEIGHT}) in record {bad[0]}"
        )
    bad = np.flatnonzero((events["polarity"] != 0) & (events["polarity"] != 1))
    if bad.size:
        raise ValidationError(f"polarity not in {{0, 1}} in record {bad[0]}")
    bad = np.flatnonzero(np.diff(events["t"]) < 0)
    if bad.size:
        raise ValidationError(f"non-monotonic timestamp at record {bad[0] + 1}")


@dataclass(frozen=True)
class TaxelEvent:
    """Pooled event: all camera activity of one taxel in one pooling window."""

    taxel_id: int
    count: int
    centroid: tuple[float, float]
    t: int

    def __post_init__(self):
        if not 0 <= self.taxel_id < TAXEL_COUNT:
            raise ValidationError(f"taxel_id out of range: {self.taxel_id}")
        if self.count < 1:
            raise ValidationError("pooled event needs count >= 1")
        if self.t < 0:
            raise ValidationError("pooled timestamp must be >= 0")


@dataclass(frozen=True)
class SpikeTrain:
    """Strictly increasing spike times (microseconds) of one taxel."""

    taxel_id: int
    times: np.ndarray

    def __post_init__(self):
        if not 0 <= self.taxel_id < TAXEL_COUNT:
            raise ValidationError(f"taxel_id out of range: {self.taxel_id}")
        times = np.asarray(self.times, dtype=np.int64).copy()
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        if times.ndim != 1:
            raise ValidationError("spike times must be a 1-d array")
        if len(times) and times[0] < 0:
            raise ValidationError("spike times must be >= 0")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValidationError(
                f"spike times of taxel {self.taxel_id} must be strictly increasing"
            )

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Sample:
    """One slide of the sensor over a texture: 49 spike trains plus label."""

    label: str
    duration_us: int
    trains: tuple[SpikeTrain, ...]

    def __post_init__(self):
        if self.duration_us <= 0:
            raise ValidationError("sample duration must be positive")
        trains = tuple(self.trains)
        object.__setattr__(self, "trains", trains)
        if len(trains) != TAXEL_COUNT:
            raise ValidationError(
                f"sample needs exactly {TAXEL_COUNT} trains, got {len(trains)}"
            )
        for i, tr in enumerate(trains):
            if tr.taxel_id != i:
                raise ValidationError(
                    f"train {i} carries taxel_id {tr.taxel_id}; trains must be "
                    "ordered by taxel"
                )
            if len(tr.times) and tr.times[-1] >= self.duration_us:
                raise ValidationError(
                    f"taxel {i} spikes at {tr.times[-1]} us, at/after duration "
                    f"{self.duration_us} us"
                )

    def total_spikes(self) -> int:
        return sum(len(tr) for tr in self.trains)

    def merged_times(self) -> np.ndarray:
        """All spike times of the sample pooled across taxels, sorted."""
        if self.total_spikes() == 0:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate([tr.times for tr in self.trains]))


@dataclass
class Dataset:
    """Labelled collection of samples over a fixed class list."""

    samples: list[Sample]
    classes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.classes:
            seen = []
            for s in self.samples:
                if s.label not in seen:
                    seen.append(s.label)
            self.classes = seen
        self.validate()

    def validate(self, duration_spread_us: int = 20_000) -> None:
        known = set(self.classes)
        for i, s in enumerate(self.samples):
            if s.label not in known:
                raise ValidationError(
                    f"sample {i} has label {s.label!r} not in class list"
                )
        if self.samples:
            durs = [s.duration_us for s in self.samples]
            if max(durs) - min(durs) > duration_spread_us:
                raise ValidationError(
                    "sample durations differ by more than one pooling window: "
                    f"{min(durs)}..{max(durs)} us"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def labels(self) -> list[str]:
        return [s.label for s in self.samples]


# ---------------------------------------------------------------------------
# binary event files


def write_events(path, events: np.ndarray) -> None:
    """Write an event stream to the binary format (little-endian).

    Layout: magic 'NTEV', u16 version, u16 reserved, u64 record count,
    then 10-byte records.  Events must already be sorted by timestamp.
    """
    validate_events(events)
    if len(events) and events["t"][-1] >= 2**32:
        raise ValidationError("timestamp exceeds u32 range of the file format")
    rec = np.zeros(len(events), dtype=_FILE_RECORD_DTYPE)
    rec["t"] = events["t"]
    rec["x"] = events["x"]
    rec["y"] = events["y"]
    rec["polarity"] = events["polarity"]
    with open(path, "wb") as fh:
        fh.write(_FILE_HEADER.pack(_FILE_MAGIC, _FILE_VERSION, 0, len(events)))
        fh.write(rec.tobytes())


def read_events(path) -> np.ndarray:
    """Read a binary event file, validating format and value domains."""
    with open(path, "rb") as fh:
        head = fh.read(_FILE_HEADER.size)
        if len(head) < _FILE_HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, _reserved, count = _FILE_HEADER.unpack(head)
        if magic != _FILE_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != _FILE_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = count * _FILE_RECORD_DTYPE.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    rec = np.frombuffer(payload, dtype=_FILE_RECORD_DTYPE)
    events = np.zeros(count, dtype=EVENT_DTYPE)
    events["t"] = rec["t"]
    events["x"] = rec["x"]
    events["y"] = rec["y"]
    events["polarity"] = rec["polarity"]
    validate_events(events)
    return events


# ---------------------------------------------------------------------------
# CSV event files (debug escape hatch)


def write_events_csv(path, events: np.ndarray) -> None:
    validate_events(events)
    with open(path, "w") as fh:
        fh.write(_CSV_HEADER + "\n")
        for t, x, y, p in events:
            fh.write(f"{t},{x},{y},{p}\n")


def read_events_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != _CSV_HEADER:
            raise FormatError(f"{path}: expected header {_CSV_HEADER!r}, got {header!r}")
        rows = []
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FormatError(f"{path}: line {lineno + 2}: expected 4 fields")
            try:
                rows.append(tuple(int(p) for p in parts))
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno + 2}: {exc}") from None
    out = np.array(rows, dtype=np.int64).reshape(len(rows), 4)
    events = np.zeros(len(rows), dtype=EVENT_DTYPE)
    if len(rows):
        events["t"], events["x"], events["y"], events["polarity"] = out.T
    validate_events(events)
    return events


# ---------------------------------------------------------------------------
# sample / dataset JSON


def sample_to_dict(sample: Sample) -> dict:
    return {
        "label": sample.label,
        "duration_us": int(sample.duration_us),
        "trains": [[int(t) for t in tr.times] for tr in sample.trains],
    }


def sample_from_dict(obj: dict) -> Sample:
    try:
        label = obj["label"]
        duration = int(obj["duration_us"])
        raw_trains = obj["trains"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"sample object missing field: {exc}") from None
    trains = tuple(
        SpikeTrain(i, np.asarray(tr, dtype=np.int64)) for i, tr in enumerate(raw_trains)
    )
    return Sample(label=label, duration_us=duration, trains=trains)


def write_sample(path, sample: Sample) -> None:
    with open(path, "w") as fh:
        json.dump(sample_to_dict(sample), fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_sample(path) -> Sample:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from None
    return sample_from_dict(obj)


def write_dataset(path, dataset: Dataset) -> None:
    obj = {
        "classes": list(dataset.classes),
        "samples": [sample_to_dict(s) for s in dataset.samples],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_dataset(path) -> Dataset:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from None
    try:
        classes = list(obj["classes"])
        samples = [sample_from_dict(s) for s in obj["samples"]]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: dataset object missing field: {exc}") from None
    return Dataset(samples=samples, classes=classes)
