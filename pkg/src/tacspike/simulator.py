"""Deterministic contact simulator producing synthetic event streams.

A 49-pin sensor slides at constant speed over a parametric texture while
a virtual event camera watches the pin tips.  The model is an artifact
oracle rather than contact physics: it exists to exercise the pipeline
with streams whose class structure is known.

Per 1 ms step each pin evaluates its sensed deflection: a constant
contact depth, the local texture height, and a heavy-tailed micro-slip
term whose scale follows the local height (rough surfaces rattle the pin,
smooth ones do not).  Whenever the sensed value moves by at least the
deflection threshold between steps, the pin emits a Poisson burst of
pixel events jittered around its image position.  Key consequences:

* contact onset at t = 0 fires every pin once, on any texture;
* a smooth texture with zero camera noise is silent after the onset;
* grid textures modulate slip bursts at the bump-crossing period
  2 * pitch / speed, and finer pitches engage the membrane less
  (conformity attenuation), so coarser grids emit more events;
* per-run lateral registration jitter shifts which pins line up with
  bump rows, scrambling spatial firing patterns, while the stage is
  repeatable along the slide axis, so burst timing stays comparable
  across runs of the same texture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .events import EVENT_DTYPE, TAXEL_COUNT, Dataset, Sample, ValidationError
from .transduction import TransducerConfig, default_fields, transduce

SENSOR_CENTER = (120.0, 90.0)
STEP_US = 1000  # simulation step, 1 ms

TEXTURE_KINDS = ("grid", "stochastic")


@dataclass(frozen=True)
class TextureSpec:
    """Parametric texture: a bump grid or a stochastic height profile.

    Grids are square lattices of cylindrical bumps whose diameter equals
    the gap between them, so the full spatial period is 2 * pitch_mm.
    Stochastic textures are 1-d filtered-noise profiles described by an
    (amplitude_mm, correlation_mm) roughness pair.
    """

    name: str
    kind: str
    pitch_mm: float = 0.0
    bump_height_mm: float = 1.0
    roughness: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in TEXTURE_KINDS:
            raise ValidationError(f"unknown texture kind {self.kind!r}")
        if not self.name:
            raise ValidationError("texture needs a name")
        if self.kind == "grid":
            if self.pitch_mm < 0:
                raise ValidationError("pitch_mm must be >= 0")
            if self.bump_height_mm <= 0:
                raise ValidationError("bump_height_mm must be positive")
        else:
            if self.roughness is None:
                raise ValidationError("stochastic texture needs roughness")
            amp, corr = self.roughness
            if amp <= 0 or corr <= 0:
                raise ValidationError("roughness values must be positive")


@dataclass(frozen=True)
class SlideKinematics:
    speed_mm_s: float = 15.0
    distance_mm: float = 60.0

    def __post_init__(self):
        if self.speed_mm_s <= 0 or self.distance_mm <= 0:
            raise ValidationError("speed and distance must be positive")

    @property
    def duration_us(self) -> int:
        steps = int(round(self.distance_mm / self.speed_mm_s * 1000.0))
        if steps < 1:
            raise ValidationError("slide too short for one simulation step")
        return steps * STEP_US


@dataclass(frozen=True)
class SensorModel:
    """Sensor geometry plus the event-generation constants.

    The trailing fields shape the artifact contact model: conformity
    attenuation of fine pitches, edge smoothing, micro-slip tail, and
    per-run placement jitter of the texture under the sensor.  Jitter is
    anisotropic: the slide stage repeats well along the motion axis
    (phase_jitter_mm) while lateral fixture registration drifts more
    (placement_jitter_mm).
    """

    taxel_layout: np.ndarray = None
    pixels_per_mm: float = 5.0
    deflection_threshold_mm: float = 0.2
    events_per_crossing: float = 6.0
    noise_rate_hz: float = 100.0
    rng_seed: int = 0
    contact_depth_mm: float = 1.0
    conformity_scale_mm: float = 2.0
    edge_rise_mm: float = 0.4
    slip_scale: float = 0.042
    slip_tail: float = 1.6
    placement_jitter_mm: float = 1.2
    phase_jitter_mm: float = 0.05

    def __post_init__(self):
        layout = self.taxel_layout
        if layout is None:
            layout = layout_taxels()
        layout = np.asarray(layout, dtype=float)
        if layout.shape != (TAXEL_COUNT, 2):
            raise ValidationError(f"taxel layout must be ({TAXEL_COUNT}, 2)")
        layout.setflags(write=False)
        object.__setattr__(self, "taxel_layout", layout)
        if self.pixels_per_mm <= 0:
            raise ValidationError("pixels_per_mm must be positive")
        if self.deflection_threshold_mm <= 0:
            raise ValidationError("deflection_threshold_mm must be positive")
        if self.events_per_crossing <= 0:
            raise ValidationError("events_per_crossing must be positive")
        if self.noise_rate_hz < 0:
            raise ValidationError("noise_rate_hz must be >= 0")
        if self.contact_depth_mm <= 0:
            raise ValidationError("contact_depth_mm must be positive")
        if self.conformity_scale_mm <= 0 or self.edge_rise_mm <= 0:
            raise ValidationError("conformity and edge scales must be positive")
        if self.slip_scale < 0 or self.slip_tail <= 0:
            raise ValidationError("slip_scale must be >= 0 and slip_tail > 0")
        if self.placement_jitter_mm < 0 or self.phase_jitter_mm < 0:
            raise ValidationError("jitter deviations must be >= 0")


def layout_taxels(spacing_px: float = 13.0) -> np.ndarray:
    """Hexagonal 49-pin layout centered on the image.

    Rings of 1 + 6 + 12 + 18 + 24 lattice points, the outer ring truncated
    to alternating positions so exactly 49 remain.  With the default
    spacing every pair sits >= 12 px apart and the whole layout keeps a
    6 px margin inside the 240 x 180 frame.
    """
    by_ring: dict[int, list[tuple[float, float, float]]] = {}
    for q in range(-4, 5):
        for r in range(-4, 5):
            ring = max(abs(q), abs(r), abs(q + r))
            if ring > 4:
                continue
            x = spacing_px * (q + r / 2.0)
            y = spacing_px * (math.sqrt(3.0) / 2.0) * r
            ang = math.atan2(y, x) % (2.0 * math.pi)
            by_ring.setdefault(ring, []).append((ang, x, y))
    pts = [(0.0, 0.0)]
    for ring in (1, 2, 3):
        for _, x, y in sorted(by_ring[ring]):
            pts.append((x, y))
    outer = sorted(by_ring[4])
    for i in range(0, len(outer), 2):
        pts.append((outer[i][1], outer[i][2]))
    out = np.array(pts, dtype=float)
    out[:, 0] += SENSOR_CENTER[0]
    out[:, 1] += SENSOR_CENTER[1]
    if out.shape != (TAXEL_COUNT, 2):
        raise RuntimeError("layout construction broke the 49-pin invariant")
    return out


def child_seed(master_seed: int, texture_index: int, run_index: int) -> int:
    """Stable per-slide seed derived from (master, texture, run)."""
    seq = np.random.SeedSequence((master_seed, texture_index, run_index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _conformity(pitch_mm: float, scale_mm: float) -> float:
    """Fraction of the bump height the membrane actually follows.

    Fine pitches are bridged by the skin, coarse ones are tracked fully:
    p^2 / (p^2 + scale^2), rising from 0 toward 1.
    """
    p2 = pitch_mm * pitch_mm
    return p2 / (p2 + scale_mm * scale_mm)


def _grid_height(u: np.ndarray, v: np.ndarray, texture: TextureSpec, sensor: SensorModel) -> np.ndarray:
    """Membrane-sensed height over a bump grid, smoothstep edges."""
    p = texture.pitch_mm
    if p <= 0:
        return np.zeros_like(u)
    amplitude = texture.bump_height_mm * _conformity(p, sensor.conformity_scale_mm)
    period = 2.0 * p
    du = u - period * np.round(u / period)
    dv = v - period * np.round(v / period)
    rho = np.sqrt(du * du + dv * dv)
    rise = sensor.edge_rise_mm
    s = np.clip((p / 2.0 + rise / 2.0 - rho) / rise, 0.0, 1.0)
    return amplitude * s * s * (3.0 - 2.0 * s)


def _stochastic_height(u: np.ndarray, texture: TextureSpec, rng) -> np.ndarray:
    """1-d filtered-noise profile sampled at the pin abscissae."""
    amp, corr = texture.roughness
    step = max(corr / 4.0, 0.01)
    lo = float(u.min()) - 4.0 * corr
    hi = float(u.max()) + 4.0 * corr
    grid = np.arange(lo, hi + step, step)
    white = rng.standard_normal(len(grid))
    half = max(int(round(3.0 * corr / step)), 1)
    kx = np.arange(-half, half + 1) * step
    kernel = np.exp(-0.5 * (kx / corr) ** 2)
    kernel /= kernel.sum()
    smooth = np.convolve(white, kernel, mode="same")
    sd = smooth.std()
    if sd > 0:
        smooth = smooth * (amp / sd)
    return np.interp(u, grid, smooth)


def simulate_slide(
    texture: TextureSpec,
    kinematics: SlideKinematics,
    sensor: SensorModel,
    seed: int | None = None,
) -> np.ndarray:
    """Simulate one slide; returns the sorted pixel-event stream.

    Deterministic for a given (texture, kinematics, sensor, seed); the
    seed falls back to sensor.rng_seed when omitted.
    """
    rng = np.random.default_rng(sensor.rng_seed if seed is None else seed)
    duration_us = kinematics.duration_us
    n_steps = duration_us // STEP_US
    pins = sensor.taxel_layout
    ppm = sensor.pixels_per_mm

    # placement jitter: the texture sits slightly differently every run,
    # tightly along the slide axis, loosely across it
    jig = rng.normal(0.0, 1.0, size=2)
    t_s = np.arange(n_steps) * (STEP_US / 1e6)
    u = (
        (pins[:, 0:1] - SENSOR_CENTER[0]) / ppm
        + jig[0] * sensor.phase_jitter_mm
        + kinematics.speed_mm_s * t_s[None, :]
    )
    v = (pins[:, 1:2] - SENSOR_CENTER[1]) / ppm + jig[1] * sensor.placement_jitter_mm

    if texture.kind == "grid":
        height = _grid_height(u, np.broadcast_to(v, u.shape), texture, sensor)
    else:
        height = _stochastic_height(u, texture, rng)

    # heavy-tailed micro-slip, scale proportional to local height
    sign = rng.integers(0, 2, size=height.shape) * 2 - 1
    tail = rng.random(size=height.shape) ** (-1.0 / sensor.slip_tail)
    slip = sensor.slip_scale * np.abs(height) * sign * tail

    sensed = sensor.contact_depth_mm + height + slip
    previous = np.concatenate([np.zeros((TAXEL_COUNT, 1)), sensed[:, :-1]], axis=1)
    delta = sensed - previous
    pin_idx, step_idx = np.nonzero(np.abs(delta) >= sensor.deflection_threshold_mm)

    counts = rng.poisson(sensor.events_per_crossing, size=len(pin_idx))
    total = int(counts.sum())
    pin_rep = np.repeat(pin_idx, counts)
    step_rep = np.repeat(step_idx, counts)
    pol_rep = np.repeat((delta[pin_idx, step_idx] > 0).astype(np.int64), counts)

    radius = 2.0 * np.sqrt(rng.random(total))
    angle = rng.random(total) * 2.0 * np.pi
    ex = np.clip(np.round(pins[pin_rep, 0] + radius * np.cos(angle)), 0, 239)
    ey = np.clip(np.round(pins[pin_rep, 1] + radius * np.sin(angle)), 0, 179)
    et = step_rep * STEP_US + rng.integers(0, STEP_US, size=total)

    n_noise = rng.poisson(sensor.noise_rate_hz * duration_us / 1e6)
    nx = rng.integers(0, 240, size=n_noise)
    ny = rng.integers(0, 180, size=n_noise)
    nt = rng.integers(0, duration_us, size=n_noise)
    npol = rng.integers(0, 2, size=n_noise)

    events = np.zeros(total + n_noise, dtype=EVENT_DTYPE)
    events["t"] = np.concatenate([et, nt])
    events["x"] = np.concatenate([ex.astype(np.int64), nx])
    events["y"] = np.concatenate([ey.astype(np.int64), ny])
    events["polarity"] = np.concatenate([pol_rep, npol])
    order = np.lexsort((events["polarity"], events["y"], events["x"], events["t"]))
    return events[order]


def grid_texture_set(pitches_mm=None, bump_height_mm: float = 1.0) -> list[TextureSpec]:
    """The benchmark grid family: pitches 0 to 5 mm in 0.5 mm steps."""
    if pitches_mm is None:
        pitches_mm = [i * 0.5 for i in range(11)]
    return [
        TextureSpec(
            name=f"grid_{p:.1f}mm", kind="grid", pitch_mm=p, bump_height_mm=bump_height_mm
        )
        for p in pitches_mm
    ]


def generate_dataset(
    textures: list[TextureSpec],
    runs_per_texture: int,
    kinematics: SlideKinematics,
    sensor: SensorModel,
    master_seed: int,
    transducer: TransducerConfig | None = None,
) -> Dataset:
    """Simulate and transduce a labelled dataset.

    Child seeds derive from (master_seed, texture index, run index), so
    any slide can be regenerated in isolation.
    """
    if runs_per_texture < 1:
        raise ValidationError("runs_per_texture must be >= 1")
    names = [t.name for t in textures]
    if len(set(names)) != len(names):
        raise ValidationError("texture names must be unique")
    config = transducer or TransducerConfig()
    duration_us = kinematics.duration_us
    samples = []
    for ti, texture in enumerate(textures):
        for ri in range(runs_per_texture):
            events = simulate_slide(
                texture, kinematics, sensor, seed=child_seed(master_seed, ti, ri)
            )
            fields = default_fields(sensor.taxel_layout, config.rf_diameter)
            samples.append(
                transduce(events, fields, config, duration_us, label=texture.name)
            )
    return Dataset(samples=samples, classes=names)
