"""Coding schemes: identities, windows, kernel response, serialization."""

import numpy as np
import pytest

import tacspike as ts
from tacspike.encoding import (
    EncoderSpec,
    IntensiveCode,
    SpatialCode,
    SpatiotemporalCode,
    TemporalCode,
    code_from_dict,
    code_to_dict,
    duration_ms,
    encode,
    encode_intensive,
    encode_spatial,
    encode_spatiotemporal,
    encode_temporal,
    kernel_response,
)
from tacspike.events import ParameterError, Sample, SpikeTrain

from conftest import random_sample


def test_encoder_spec_validation():
    with pytest.raises(ParameterError):
        EncoderSpec(kind="fourier")
    with pytest.raises(ParameterError):
        EncoderSpec(kind="temporal")
    with pytest.raises(ParameterError):
        EncoderSpec(kind="spatiotemporal")
    with pytest.raises(ParameterError):
        EncoderSpec(kind="temporal", delta_t_ms=0)
    with pytest.raises(ParameterError):
        EncoderSpec(kind="spatiotemporal", tau_s=0.0)


def test_intensive_equals_mean_of_spatial():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = random_sample(rng)
        intensive = encode_intensive(s)
        spatial = encode_spatial(s)
        assert intensive.value == np.mean(spatial.counts)
        assert intensive.value == s.total_spikes() / ts.TAXEL_COUNT


def test_spatial_counts_by_taxel():
    rng = np.random.default_rng(1)
    s = random_sample(rng)
    counts = encode_spatial(s).counts
    assert counts.shape == (ts.TAXEL_COUNT,)
    assert counts.tolist() == [len(tr) for tr in s.trains]


def test_duration_rounds_up_to_whole_ms():
    tr = tuple(SpikeTrain(i, np.empty(0, dtype=np.int64)) for i in range(49))
    assert duration_ms(Sample(label="x", duration_us=1000, trains=tr)) == 1
    assert duration_ms(Sample(label="x", duration_us=1001, trains=tr)) == 2


def test_temporal_full_window_reproduces_intensive():
    rng = np.random.default_rng(2)
    for _ in range(20):
        s = random_sample(rng)
        code = encode_temporal(s, duration_ms(s))
        assert code.series.shape == (1,)
        assert code.series[0] == encode_intensive(s).value


def test_temporal_series_length_and_sum():
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = random_sample(rng)
        dur = duration_ms(s)
        dt = int(rng.integers(1, dur + 1))
        code = encode_temporal(s, dt)
        assert len(code.series) == max(1, dur - dt + 1)
        # 1 ms windows tile the sample, so they count every spike once
        unit = encode_temporal(s, 1)
        assert abs(unit.series.sum() * ts.TAXEL_COUNT - s.total_spikes()) < 1e-9


def test_temporal_counts_window_occupancy():
    trains = [SpikeTrain(i, np.empty(0, dtype=np.int64)) for i in range(49)]
    trains[0] = SpikeTrain(0, np.array([0, 1500, 7200]))
    s = Sample(label="x", duration_us=10_000, trains=tuple(trains))
    code = encode_temporal(s, 2)
    # windows [k, k+2) ms over 10 ms: lengths 9
    want = np.array([2, 1, 0, 0, 0, 0, 1, 1, 0]) / 49.0
    assert np.array_equal(code.series, want)


def test_temporal_shift_covariance():
    trains = [SpikeTrain(i, np.empty(0, dtype=np.int64)) for i in range(49)]
    trains[2] = SpikeTrain(2, np.array([20_000, 23_000, 31_000]))
    base = Sample(label="x", duration_us=100_000, trains=tuple(trains))
    shifted_trains = list(trains)
    shifted_trains[2] = SpikeTrain(2, trains[2].times + 7000)
    shifted = Sample(label="x", duration_us=100_000, trains=tuple(shifted_trains))
    a = encode_temporal(base, 5).series
    b = encode_temporal(shifted, 5).series
    assert np.array_equal(a[20:40], b[27:47])


def test_temporal_rejects_out_of_range_window():
    rng = np.random.default_rng(4)
    s = random_sample(rng, duration_us=50_000)
    with pytest.raises(ParameterError):
        encode_temporal(s, 0)
    with pytest.raises(ParameterError):
        encode_temporal(s, duration_ms(s) + 1)


def test_spatiotemporal_keeps_trains():
    rng = np.random.default_rng(5)
    s = random_sample(rng)
    code = encode_spatiotemporal(s, 0.02)
    assert code.tau_s == 0.02
    assert code.trains is s.trains
    with pytest.raises(ParameterError):
        encode_spatiotemporal(s, -1.0)


def test_kernel_response_reference_value():
    # one spike at t=0, tau=10 ms: f(10 ms) = exp(-1)/tau = 36.788
    got = kernel_response(np.array([0]), 0.01, 0.01)
    assert abs(got - np.exp(-1.0) / 0.01) < 1e-9
    assert kernel_response(np.array([5000]), 0.01, 0.004) == 0.0
    assert kernel_response(np.empty(0, dtype=np.int64), 0.01, 1.0) == 0.0


def test_kernel_response_accepts_trains_and_seconds():
    tr = SpikeTrain(0, np.array([0, 10_000]))
    a = kernel_response(tr, 0.01, 0.02)
    b = kernel_response(np.array([0.0, 0.01]), 0.01, 0.02)
    assert abs(a - b) < 1e-12
    want = (np.exp(-2.0) + np.exp(-1.0)) / 0.01
    assert abs(a - want) < 1e-9


def test_encode_dispatcher_types():
    rng = np.random.default_rng(6)
    s = random_sample(rng)
    assert isinstance(encode(s, EncoderSpec(kind="intensive")), IntensiveCode)
    assert isinstance(encode(s, EncoderSpec(kind="spatial")), SpatialCode)
    assert isinstance(encode(s, EncoderSpec(kind="temporal", delta_t_ms=10)), TemporalCode)
    assert isinstance(
        encode(s, EncoderSpec(kind="spatiotemporal", tau_s=0.05)), SpatiotemporalCode
    )


def test_code_dict_round_trips():
    rng = np.random.default_rng(7)
    s = random_sample(rng, duration_us=100_000)
    for spec in [
        EncoderSpec(kind="intensive"),
        EncoderSpec(kind="spatial"),
        EncoderSpec(kind="temporal", delta_t_ms=25),
        EncoderSpec(kind="spatiotemporal", tau_s=0.03),
    ]:
        code = encode(s, spec)
        back = code_from_dict(code_to_dict(code))
        assert type(back) is type(code)
        if isinstance(code, IntensiveCode):
            assert back.value == code.value
        elif isinstance(code, SpatialCode):
            assert np.array_equal(back.counts, code.counts)
        elif isinstance(code, TemporalCode):
            assert np.array_equal(back.series, code.series)
            assert back.delta_t_ms == code.delta_t_ms
        else:
            assert back.tau_s == code.tau_s
            for mine, theirs in zip(code.trains, back.trains):
                assert np.array_equal(mine.times, theirs.times)
