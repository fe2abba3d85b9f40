"""Noise filter, pooling, and receptive-field tracking."""

import numpy as np
import pytest

import tacspike as ts
from tacspike.events import TaxelEvent, ValidationError, make_events
from tacspike.transduction import (
    ReceptiveField,
    TransducerConfig,
    default_fields,
    filter_noise,
    pool_events,
    transduce,
    update_positions,
)

CFG = TransducerConfig()


def two_fields():
    # overlapping pair: centers 4 px apart, radius 3 each
    return [
        ReceptiveField(taxel_id=0, center=(100.0, 90.0), diameter=6.0),
        ReceptiveField(taxel_id=1, center=(104.0, 90.0), diameter=6.0),
    ]


def test_config_validation():
    with pytest.raises(ValidationError):
        TransducerConfig(noise_window_us=0)
    with pytest.raises(ValidationError):
        TransducerConfig(neighborhood_radius=0)
    with pytest.raises(ValidationError):
        TransducerConfig(pooling_window_us=-1)
    with pytest.raises(ValidationError):
        TransducerConfig(rf_update_gain=1.5)


def test_receptive_field_validation():
    with pytest.raises(ValidationError):
        ReceptiveField(taxel_id=-1, center=(0.0, 0.0), diameter=6.0)
    with pytest.raises(ValidationError):
        ReceptiveField(taxel_id=0, center=(0.0, 0.0), diameter=0.0)


def test_filter_drops_isolated_event():
    ev = make_events([(1000, 100, 90, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 0


def test_filter_keeps_supported_pair():
    # same pixel, 5 ms apart: inside the support window (inclusive)
    ev = make_events([(1000, 100, 90, 1), (6000, 100, 90, 0)])
    kept = filter_noise(ev, two_fields(), CFG)
    assert len(kept) == 2


def test_filter_support_window_is_inclusive():
    ev = make_events([(0, 100, 90, 1), (5000, 100, 90, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 2
    ev = make_events([(0, 100, 90, 1), (5001, 100, 90, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 0


def test_filter_neighborhood_is_chebyshev_radius_one():
    # diagonal neighbour counts; two pixels apart does not
    ev = make_events([(0, 100, 90, 1), (0, 101, 91, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 2
    ev = make_events([(0, 100, 90, 1), (0, 102, 90, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 0


def test_filter_drops_out_of_field_events():
    # supported pair far from every field center
    ev = make_events([(0, 10, 10, 1), (100, 10, 10, 1)])
    assert len(filter_noise(ev, two_fields(), CFG)) == 0


def test_filter_out_of_field_witness_does_not_count():
    # in-field event whose only neighbour lies outside every field
    ev = make_events([(0, 103, 93, 1), (0, 104, 94, 1)])
    fields = [ReceptiveField(taxel_id=0, center=(100.0, 90.0), diameter=10.0)]
    kept = filter_noise(ev, fields, CFG)
    assert len(kept) == 0


def test_filter_is_idempotent_on_simulated_streams():
    kin = ts.SlideKinematics(speed_mm_s=15.0, distance_mm=7.5)
    sensor = ts.SensorModel()
    fields = default_fields(sensor.taxel_layout, CFG.rf_diameter)
    for seed in range(10):
        tex = ts.TextureSpec(name="g", kind="grid", pitch_mm=0.5 + (seed % 5))
        ev = ts.simulate_slide(tex, kin, sensor, seed=seed)
        once = filter_noise(ev, fields, CFG)
        twice = filter_noise(once, fields, CFG)
        assert np.array_equal(once, twice)


def test_pool_requires_filtered_input():
    ev = make_events([(0, 10, 10, 1)])
    with pytest.raises(RuntimeError, match="no receptive field"):
        pool_events(ev, two_fields(), CFG)


def test_pool_group_statistics():
    ev = make_events(
        [
            (1000, 99, 90, 1),
            (2000, 101, 89, 0),
            (2001, 100, 91, 1),
        ]
    )
    pooled = pool_events(ev, two_fields(), CFG)
    assert len(pooled) == 1
    (te,) = pooled
    assert te.taxel_id == 0
    assert te.count == 3
    assert te.centroid == (100.0, 90.0)
    assert te.t == round((1000 + 2000 + 2001) / 3)


def test_pool_mean_time_rounds_half_up():
    ev = make_events([(1, 100, 90, 1), (2, 100, 90, 1)])
    (te,) = pool_events(ev, two_fields(), CFG)
    assert te.t == 2  # mean 1.5 rounds up


def test_pool_overlap_resolution():
    # equidistant from both centers: lowest taxel_id wins
    (te,) = pool_events(make_events([(0, 102, 90, 1)]), two_fields(), CFG)
    assert te.taxel_id == 0
    (te,) = pool_events(make_events([(0, 101, 90, 1)]), two_fields(), CFG)
    assert te.taxel_id == 0
    (te,) = pool_events(make_events([(0, 103, 90, 1)]), two_fields(), CFG)
    assert te.taxel_id == 1


def test_pool_splits_windows():
    w = CFG.pooling_window_us
    ev = make_events([(w - 1, 100, 90, 1), (w, 100, 90, 1)])
    pooled = pool_events(ev, two_fields(), CFG)
    assert len(pooled) == 2
    assert [te.count for te in pooled] == [1, 1]


def test_pool_conserves_event_counts():
    rng = np.random.default_rng(7)
    kin = ts.SlideKinematics(speed_mm_s=15.0, distance_mm=7.5)
    sensor = ts.SensorModel()
    fields = default_fields(sensor.taxel_layout, CFG.rf_diameter)
    for seed in range(10):
        tex = ts.TextureSpec(name="g", kind="grid", pitch_mm=1.0 + seed * 0.5)
        ev = ts.simulate_slide(tex, kin, sensor, seed=seed)
        kept = filter_noise(ev, fields, CFG)
        pooled = pool_events(kept, fields, CFG)
        assert sum(te.count for te in pooled) == len(kept)


def test_update_positions_moves_by_gain():
    fields = two_fields()
    te = TaxelEvent(taxel_id=0, count=4, centroid=(102.0, 92.0), t=5)
    moved = update_positions(fields, [te], CFG)
    assert moved[0].center == (101.0, 91.0)  # halfway at gain 0.5
    assert moved[1].center == fields[1].center
    frozen = update_positions(fields, [te], TransducerConfig(rf_update_gain=0.0))
    assert frozen[0].center == fields[0].center


def test_update_positions_rejects_duplicate_taxels():
    te = TaxelEvent(taxel_id=0, count=1, centroid=(100.0, 90.0), t=5)
    with pytest.raises(ValidationError, match="duplicate"):
        update_positions(two_fields(), [te, te], CFG)


def test_default_fields_cover_layout():
    layout = ts.layout_taxels()
    fields = default_fields(layout, 6.0)
    assert len(fields) == ts.TAXEL_COUNT
    assert [f.taxel_id for f in fields] == list(range(ts.TAXEL_COUNT))
    assert all(f.diameter == 6.0 for f in fields)
    assert fields[0].center == (layout[0, 0], layout[0, 1])


def test_transduce_produces_valid_sample():
    kin = ts.SlideKinematics(speed_mm_s=15.0, distance_mm=7.5)
    sensor = ts.SensorModel()
    fields = default_fields(sensor.taxel_layout, CFG.rf_diameter)
    ev = ts.simulate_slide(
        ts.TextureSpec(name="g", kind="grid", pitch_mm=2.0), kin, sensor, seed=3
    )
    sample = transduce(ev, fields, CFG, kin.duration_us, label="g")
    assert sample.label == "g"
    assert sample.duration_us == kin.duration_us
    assert sample.total_spikes() > 0
    for tr in sample.trains:
        if len(tr) > 1:
            assert np.all(np.diff(tr.times) > 0)


def test_transduce_tracks_drifting_cluster():
    # a tight cluster drifting +1 px per window stays on taxel 24 (center pin)
    layout = ts.layout_taxels()
    fields = default_fields(layout, 6.0)
    cx, cy = 120, 90
    rows = []
    for w in range(6):
        base = w * CFG.pooling_window_us
        for j in range(8):
            rows.append((base + j * 100, cx + w, cy, 1))
    sample = transduce(make_events(rows), fields, CFG, 200_000, label="d")
    center_taxel = int(np.argmin(np.abs(layout - [120.0, 90.0]).sum(axis=1)))
    assert len(sample.trains[center_taxel]) == 6
    assert sample.total_spikes() == 6


def test_transduce_rejects_bad_inputs():
    fields = default_fields(ts.layout_taxels(), 6.0)
    ev = make_events([(10, 120, 90, 1)])
    with pytest.raises(ValidationError, match="duration"):
        transduce(ev, fields, CFG, 10)
    unsorted = np.zeros(2, dtype=ts.EVENT_DTYPE)
    unsorted["t"] = [10, 5]
    unsorted["x"] = 120
    unsorted["y"] = 90
    with pytest.raises(ValidationError):
        transduce(unsorted, fields, CFG, 100)
