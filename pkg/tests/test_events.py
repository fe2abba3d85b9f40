"""Event stream invariants and file round trips."""

import numpy as np
import pytest

from tacspike.events import (
    EVENT_DTYPE,
    TAXEL_COUNT,
    Dataset,
    FormatError,
    PixelEvent,
    Sample,
    SpikeTrain,
    ValidationError,
    make_events,
    read_dataset,
    read_events,
    read_events_csv,
    read_sample,
    validate_events,
    write_dataset,
    write_events,
    write_events_csv,
    write_sample,
)


def random_events(rng, n=200, t_max=1_000_000):
    t = np.sort(rng.integers(0, t_max, size=n))
    return make_events(
        zip(t, rng.integers(0, 240, n), rng.integers(0, 180, n), rng.integers(0, 2, n))
    )


def test_pixel_event_validation():
    PixelEvent(t=0, x=239, y=179, polarity=1)
    with pytest.raises(ValidationError):
        PixelEvent(t=-1, x=0, y=0, polarity=0)
    with pytest.raises(ValidationError):
        PixelEvent(t=0, x=240, y=0, polarity=0)
    with pytest.raises(ValidationError):
        PixelEvent(t=0, x=0, y=180, polarity=0)
    with pytest.raises(ValidationError):
        PixelEvent(t=0, x=0, y=0, polarity=2)


def test_make_events_accepts_tuples_and_pixel_events():
    ev = make_events([(0, 1, 2, 1), PixelEvent(t=5, x=3, y=4, polarity=0)])
    assert ev.dtype == EVENT_DTYPE
    assert ev["t"].tolist() == [0, 5]
    assert ev["x"].tolist() == [1, 3]
    assert ev["y"].tolist() == [2, 4]
    assert ev["polarity"].tolist() == [1, 0]


def test_validate_reports_offending_record():
    ev = np.zeros(5, dtype=EVENT_DTYPE)
    ev["t"] = [0, 1, 2, 3, 4]
    ev["x"][3] = 999
    with pytest.raises(ValidationError, match="record 3"):
        validate_events(ev)


def test_validate_rejects_non_monotonic_timestamps():
    ev = np.zeros(4, dtype=EVENT_DTYPE)
    ev["t"] = [0, 10, 5, 20]
    with pytest.raises(ValidationError, match="record 2"):
        validate_events(ev)


def test_binary_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    for trial in range(5):
        ev = random_events(rng)
        path = tmp_path / f"s{trial}.ntev"
        write_events(path, ev)
        back = read_events(path)
        assert np.array_equal(ev, back)


def test_binary_round_trip_empty(tmp_path):
    path = tmp_path / "empty.ntev"
    write_events(path, np.zeros(0, dtype=EVENT_DTYPE))
    assert len(read_events(path)) == 0


def test_binary_write_is_deterministic(tmp_path):
    ev = random_events(np.random.default_rng(3))
    write_events(tmp_path / "a.ntev", ev)
    write_events(tmp_path / "b.ntev", ev)
    assert (tmp_path / "a.ntev").read_bytes() == (tmp_path / "b.ntev").read_bytes()


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ntev"
    write_events(path, random_events(np.random.default_rng(1), n=10))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        read_events(path)


def test_read_rejects_bad_version(tmp_path):
    path = tmp_path / "bad.ntev"
    write_events(path, random_events(np.random.default_rng(1), n=10))
    raw = bytearray(path.read_bytes())
    raw[4] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="version"):
        read_events(path)


def test_read_rejects_truncated_payload(tmp_path):
    path = tmp_path / "bad.ntev"
    write_events(path, random_events(np.random.default_rng(1), n=10))
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(FormatError, match="payload"):
        read_events(path)


def test_read_rejects_truncated_header(tmp_path):
    path = tmp_path / "bad.ntev"
    path.write_bytes(b"NTEV\x01")
    with pytest.raises(FormatError, match="header"):
        read_events(path)


def test_write_rejects_u32_overflow(tmp_path):
    ev = make_events([(2**32, 0, 0, 1)])
    with pytest.raises(ValidationError, match="u32"):
        write_events(tmp_path / "x.ntev", ev)


def test_csv_round_trip(tmp_path):
    ev = random_events(np.random.default_rng(2), n=50)
    path = tmp_path / "events.csv"
    write_events_csv(path, ev)
    assert np.array_equal(ev, read_events_csv(path))


def test_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text("time,x,y,p\n0,0,0,1\n")
    with pytest.raises(FormatError, match="header"):
        read_events_csv(path)


def test_csv_rejects_ragged_line(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text("t_us,x,y,polarity\n0,0,0\n")
    with pytest.raises(FormatError, match="line 2"):
        read_events_csv(path)


def test_spike_train_invariants():
    tr = SpikeTrain(0, np.array([1, 5, 9]))
    assert len(tr) == 3
    assert not tr.times.flags.writeable
    with pytest.raises(ValidationError):
        SpikeTrain(0, np.array([5, 5]))
    with pytest.raises(ValidationError):
        SpikeTrain(0, np.array([-1, 5]))
    with pytest.raises(ValidationError):
        SpikeTrain(TAXEL_COUNT, np.array([1]))


def empty_trains():
    return tuple(SpikeTrain(i, np.empty(0, dtype=np.int64)) for i in range(TAXEL_COUNT))


def test_sample_invariants():
    trains = list(empty_trains())
    trains[3] = SpikeTrain(3, np.array([10, 20]))
    s = Sample(label="a", duration_us=100, trains=tuple(trains))
    assert s.total_spikes() == 2
    assert s.merged_times().tolist() == [10, 20]
    with pytest.raises(ValidationError, match="exactly"):
        Sample(label="a", duration_us=100, trains=tuple(trains[:5]))
    # trains must arrive ordered by taxel id
    swapped = list(trains)
    swapped[0], swapped[1] = SpikeTrain(1, np.array([1])), SpikeTrain(0, np.array([1]))
    with pytest.raises(ValidationError, match="ordered"):
        Sample(label="a", duration_us=100, trains=tuple(swapped))
    late = list(empty_trains())
    late[0] = SpikeTrain(0, np.array([100]))
    with pytest.raises(ValidationError, match="duration"):
        Sample(label="a", duration_us=100, trains=tuple(late))


def test_merged_times_sorted():
    rng = np.random.default_rng(4)
    trains = []
    for i in range(TAXEL_COUNT):
        t = np.sort(rng.choice(10_000, size=5, replace=False))
        trains.append(SpikeTrain(i, t))
    s = Sample(label="a", duration_us=10_000, trains=tuple(trains))
    merged = s.merged_times()
    assert len(merged) == 5 * TAXEL_COUNT
    assert np.all(np.diff(merged) >= 0)


def test_dataset_auto_classes_and_label_check():
    a = Sample(label="a", duration_us=100, trains=empty_trains())
    b = Sample(label="b", duration_us=100, trains=empty_trains())
    ds = Dataset(samples=[a, b, a])
    assert ds.classes == ["a", "b"]
    assert ds.labels() == ["a", "b", "a"]
    assert len(ds) == 3
    with pytest.raises(ValidationError, match="not in class list"):
        Dataset(samples=[a], classes=["b"])


def test_dataset_rejects_wild_duration_spread():
    a = Sample(label="a", duration_us=100, trains=empty_trains())
    b = Sample(label="a", duration_us=200_000, trains=empty_trains())
    with pytest.raises(ValidationError, match="duration"):
        Dataset(samples=[a, b])


def test_sample_json_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    trains = []
    for i in range(TAXEL_COUNT):
        n = int(rng.integers(0, 6))
        trains.append(SpikeTrain(i, np.sort(rng.choice(999, size=n, replace=False))))
    s = Sample(label="grid_1.0mm", duration_us=1000, trains=tuple(trains))
    path = tmp_path / "sample.json"
    write_sample(path, s)
    back = read_sample(path)
    assert back.label == s.label
    assert back.duration_us == s.duration_us
    for mine, theirs in zip(s.trains, back.trains):
        assert np.array_equal(mine.times, theirs.times)


def test_dataset_json_round_trip_and_stability(tmp_path):
    a = Sample(label="a", duration_us=100, trains=empty_trains())
    b = Sample(label="b", duration_us=100, trains=empty_trains())
    ds = Dataset(samples=[a, b], classes=["a", "b"])
    p1, p2 = tmp_path / "d1.json", tmp_path / "d2.json"
    write_dataset(p1, ds)
    write_dataset(p2, ds)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_dataset(p1)
    assert back.classes == ds.classes
    assert back.labels() == ds.labels()
