"""Shared helpers: random samples and a small simulated dataset."""

import numpy as np
import pytest

import tacspike as ts


def random_sample(rng, duration_us=1_000_000, mean_spikes=8.0, label="x"):
    """Sample with Poisson spike counts at uniform random times."""
    trains = []
    for i in range(ts.TAXEL_COUNT):
        n = int(rng.poisson(mean_spikes))
        times = np.sort(rng.choice(duration_us, size=n, replace=False))
        trains.append(ts.SpikeTrain(i, times.astype(np.int64)))
    return ts.Sample(label=label, duration_us=duration_us, trains=tuple(trains))


def random_code(rng, n_spikes_max=12, span_us=200_000, tau_s=0.02):
    trains = []
    for i in range(ts.TAXEL_COUNT):
        n = int(rng.integers(0, n_spikes_max))
        t = np.sort(rng.choice(span_us, size=n, replace=False)).astype(np.int64)
        trains.append(ts.SpikeTrain(i, t))
    return ts.SpatiotemporalCode(trains=tuple(trains), tau_s=tau_s)


def random_times(rng, max_spikes=10, span_us=100_000):
    n = int(rng.integers(0, max_spikes + 1))
    return np.sort(rng.choice(span_us, size=n, replace=False)).astype(np.int64)


def numeric_van_rossum(u_us, v_us, tau_s):
    """Trapezoidal integration of the filtered-train difference on a 1 us
    grid, with one-sided values at the spike-time jumps."""
    u_us = np.asarray(u_us, dtype=np.int64)
    v_us = np.asarray(v_us, dtype=np.int64)
    spikes = np.concatenate([u_us, v_us])
    if len(spikes) == 0:
        return 0.0
    lo = int(spikes.min())
    hi = int(spikes.max()) + int(round(12 * tau_s * 1e6))
    n = hi - lo + 1
    t = (np.arange(n, dtype=np.int64) + lo) * 1e-6

    def filtered(times):
        w = np.zeros(n)
        if len(times):
            np.add.at(w, times - lo, np.exp((times - lo) * 1e-6 / tau_s))
        mass = np.cumsum(w)
        decay = np.exp(-(t - lo * 1e-6) / tau_s) / tau_s
        return decay * mass, decay * (mass - w)  # right and left limits

    fu_r, fu_l = filtered(u_us)
    fv_r, fv_l = filtered(v_us)
    g_r = (fu_r - fv_r) ** 2
    g_l = (fu_l - fv_l) ** 2
    d2 = 0.5e-6 * np.sum(g_r[:-1] + g_l[1:])
    return np.sqrt(max(d2, 0.0))


def brute_van_rossum(u_s, v_s, tau_s):
    """Direct O(n*m) evaluation of the closed-form double sums."""

    def corr(a, b):
        if len(a) == 0 or len(b) == 0:
            return 0.0
        return np.exp(-np.abs(a[:, None] - b[None, :]) / tau_s).sum()

    d2 = (corr(u_s, u_s) + corr(v_s, v_s) - 2.0 * corr(u_s, v_s)) / (2.0 * tau_s)
    return np.sqrt(max(d2, 0.0))


@pytest.fixture(scope="session")
def mini_dataset():
    """3 grid textures x 6 short slides; enough for classifier plumbing."""
    textures = [
        ts.TextureSpec(name=f"grid_{p:.1f}mm", kind="grid", pitch_mm=p)
        for p in (1.0, 3.0, 5.0)
    ]
    kin = ts.SlideKinematics(speed_mm_s=15.0, distance_mm=15.0)
    return ts.generate_dataset(textures, 6, kin, ts.SensorModel(), 42)
