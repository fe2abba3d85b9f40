"""Command-line front end: simulate, transduce, classify, optimize, report.

Exit codes: 0 success, 2 usage error (bad or missing flags), 3 validation
error (bad file or config values), 4 I/O failure.  Configuration comes
from built-in defaults, overridden by --config JSON, overridden by flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .classify import (
    classify_split,
    leave_one_out,
    read_confusion_csv,
    train_test_split,
    write_confusion_csv,
    write_summary_csv,
)
from .encoding import ENCODER_KINDS, EncoderSpec
from .events import (
    FormatError,
    ParameterError,
    TacspikeError,
    ValidationError,
    read_dataset,
    read_events,
    read_events_csv,
    write_dataset,
    write_events,
)
from .metrics import MetricSpec
from .optimize import (
    optimize_spatiotemporal,
    sweep_delta_t,
    write_sweep_csv,
    write_trials_csv,
)
from .simulator import (
    SensorModel,
    SlideKinematics,
    TextureSpec,
    child_seed,
    generate_dataset,
    grid_texture_set,
    simulate_slide,
)
from .transduction import TransducerConfig, default_fields, transduce


class UsageError(TacspikeError):
    """Bad or missing command-line flags."""


_DEFAULTS = {
    "seed": 0,
    "runs_per_texture": 20,
    "textures": None,
    "kinematics": {"speed_mm_s": 15.0, "distance_mm": 60.0},
    "sensor": {
        "pixels_per_mm": 5.0,
        "deflection_threshold_mm": 0.2,
        "events_per_crossing": 6.0,
        "noise_rate_hz": 100.0,
        "contact_depth_mm": 1.0,
        "conformity_scale_mm": 2.0,
        "edge_rise_mm": 0.4,
        "slip_scale": 0.042,
        "slip_tail": 1.6,
        "placement_jitter_mm": 1.2,
        "phase_jitter_mm": 0.05,
    },
    "transducer": {
        "noise_window_ms": 5.0,
        "neighborhood_radius": 1,
        "pooling_window_ms": 20.0,
        "rf_diameter_px": 6.0,
        "rf_update_gain": 0.5,
    },
    "encoder": None,
    "delta_t_ms": None,
    "tau_ms": None,
    "cos_theta": 0.4,
    "metric": None,
    "k": 4,
    "protocol": "loocv",
    "train_ratio": 0.8,
    "split_seed": 0,
}


def _merge_config(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ValidationError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge_config(base[key], value, where)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(_DEFAULTS))  # deep copy
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return _merge_config(cfg, raw)


def _textures_from_config(cfg: dict) -> list[TextureSpec]:
    raw = cfg["textures"]
    if raw is None:
        return grid_texture_set()
    textures = []
    for i, spec in enumerate(raw):
        if not isinstance(spec, dict) or "kind" not in spec or "name" not in spec:
            raise ValidationError(f"texture {i} needs 'name' and 'kind'")
        kind = spec["kind"]
        if kind == "grid":
            textures.append(
                TextureSpec(
                    name=spec["name"],
                    kind="grid",
                    pitch_mm=float(spec.get("pitch_mm", 0.0)),
                    bump_height_mm=float(spec.get("bump_height_mm", 1.0)),
                )
            )
        elif kind == "stochastic":
            if "amplitude_mm" not in spec or "correlation_mm" not in spec:
                raise ValidationError(
                    f"texture {i}: stochastic kind needs amplitude_mm and correlation_mm"
                )
            textures.append(
                TextureSpec(
                    name=spec["name"],
                    kind="stochastic",
                    roughness=(float(spec["amplitude_mm"]), float(spec["correlation_mm"])),
                )
            )
        else:
            raise ValidationError(f"texture {i}: unknown kind {kind!r}")
    return textures


def _sensor_from_config(cfg: dict) -> SensorModel:
    s = cfg["sensor"]
    return SensorModel(
        pixels_per_mm=float(s["pixels_per_mm"]),
        deflection_threshold_mm=float(s["deflection_threshold_mm"]),
        events_per_crossing=float(s["events_per_crossing"]),
        noise_rate_hz=float(s["noise_rate_hz"]),
        rng_seed=int(cfg["seed"]),
        contact_depth_mm=float(s["contact_depth_mm"]),
        conformity_scale_mm=float(s["conformity_scale_mm"]),
        edge_rise_mm=float(s["edge_rise_mm"]),
        slip_scale=float(s["slip_scale"]),
        slip_tail=float(s["slip_tail"]),
        placement_jitter_mm=float(s["placement_jitter_mm"]),
        phase_jitter_mm=float(s["phase_jitter_mm"]),
    )


def _kinematics_from_config(cfg: dict) -> SlideKinematics:
    k = cfg["kinematics"]
    return SlideKinematics(
        speed_mm_s=float(k["speed_mm_s"]), distance_mm=float(k["distance_mm"])
    )


def _transducer_from_config(cfg: dict) -> TransducerConfig:
    t = cfg["transducer"]
    return TransducerConfig(
        noise_window_us=int(round(float(t["noise_window_ms"]) * 1000)),
        neighborhood_radius=int(t["neighborhood_radius"]),
        pooling_window_us=int(round(float(t["pooling_window_ms"]) * 1000)),
        rf_diameter=float(t["rf_diameter_px"]),
        rf_update_gain=float(t["rf_update_gain"]),
    )


def _apply_flags(cfg: dict, args) -> dict:
    for flag, key in [
        ("seed", "seed"),
        ("encoder", "encoder"),
        ("metric", "metric"),
        ("delta_t", "delta_t_ms"),
        ("cos_theta", "cos_theta"),
        ("k", "k"),
        ("protocol", "protocol"),
        ("ratio", "train_ratio"),
        ("split_seed", "split_seed"),
        ("runs", "runs_per_texture"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "tau", None) is not None:
        cfg["tau_ms"] = args.tau
    return cfg


def _specs_from_config(cfg: dict) -> tuple[EncoderSpec, MetricSpec]:
    encoder = cfg["encoder"]
    if encoder is None:
        raise UsageError("--encoder is required (or an 'encoder' config entry)")
    if encoder not in ENCODER_KINDS:
        raise UsageError(f"unknown encoder {encoder!r}; choose from {ENCODER_KINDS}")
    if encoder == "temporal" and cfg["delta_t_ms"] is None:
        raise UsageError("encoder 'temporal' requires --delta-t <ms>")
    if encoder == "spatiotemporal" and cfg["tau_ms"] is None:
        raise UsageError("encoder 'spatiotemporal' requires --tau <ms>")

    metric = cfg["metric"]
    default_metric = "van_rossum" if encoder == "spatiotemporal" else "euclidean"
    if metric is None:
        metric = default_metric
    metric = metric.replace("-", "_")
    if metric != default_metric:
        raise UsageError(
            f"metric {metric!r} is incompatible with encoder {encoder!r}"
        )
    tau_s = None if cfg["tau_ms"] is None else float(cfg["tau_ms"]) / 1000.0
    espec = EncoderSpec(
        kind=encoder,
        delta_t_ms=None if cfg["delta_t_ms"] is None else int(cfg["delta_t_ms"]),
        tau_s=tau_s,
    )
    mspec = MetricSpec(kind=metric, tau_s=tau_s, cos_theta=float(cfg["cos_theta"]))
    return espec, mspec


def _dump_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    out = Path(args.out)
    events_dir = out / "events"
    events_dir.mkdir(parents=True, exist_ok=True)

    textures = _textures_from_config(cfg)
    sensor = _sensor_from_config(cfg)
    kinematics = _kinematics_from_config(cfg)
    transducer = _transducer_from_config(cfg)
    runs = int(cfg["runs_per_texture"])
    master = int(cfg["seed"])
    duration_us = kinematics.duration_us

    files = []
    samples = []
    for ti, texture in enumerate(textures):
        for ri in range(runs):
            seed = child_seed(master, ti, ri)
            events = simulate_slide(texture, kinematics, sensor, seed=seed)
            rel = f"events/{texture.name}_run{ri:03d}.ntev"
            write_events(out / rel, events)
            files.append(
                {
                    "path": rel,
                    "label": texture.name,
                    "texture_index": ti,
                    "run": ri,
                    "seed": seed,
                    "n_events": int(len(events)),
                }
            )
            fields = default_fields(sensor.taxel_layout, transducer.rf_diameter)
            samples.append(
                transduce(events, fields, transducer, duration_us, label=texture.name)
            )

    manifest = {
        "seed": master,
        "runs_per_texture": runs,
        "duration_us": duration_us,
        "kinematics": cfg["kinematics"],
        "sensor": cfg["sensor"],
        "transducer": cfg["transducer"],
        "textures": [
            {
                "name": t.name,
                "kind": t.kind,
                "pitch_mm": t.pitch_mm,
                "bump_height_mm": t.bump_height_mm,
                "roughness": list(t.roughness) if t.roughness else None,
            }
            for t in textures
        ],
        "files": files,
    }
    _dump_json(out / "manifest.json", manifest)

    from .events import Dataset

    dataset = Dataset(samples=samples, classes=[t.name for t in textures])
    write_dataset(out / "dataset.json", dataset)
    print(
        f"simulated {len(files)} slides over {len(textures)} textures "
        f"-> {out / 'manifest.json'}"
    )
    return 0


def cmd_transduce(args) -> int:
    manifest_path = Path(args.manifest)
    with open(manifest_path) as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{manifest_path}: not valid JSON: {exc}") from None
    base = manifest_path.parent
    cfg = load_config(args.config)
    if args.config is None and "transducer" in manifest:
        cfg["transducer"] = _merge_config(
            cfg["transducer"], manifest["transducer"], "transducer"
        )
    transducer = _transducer_from_config(cfg)
    duration_us = int(manifest["duration_us"])
    sensor = SensorModel()  # layout only; transduction needs the field seeds

    samples = []
    labels = []
    for entry in manifest["files"]:
        path = base / entry["path"]
        events = (
            read_events_csv(path) if str(path).endswith(".csv") else read_events(path)
        )
        fields = default_fields(sensor.taxel_layout, transducer.rf_diameter)
        samples.append(
            transduce(events, fields, transducer, duration_us, label=entry["label"])
        )
        if entry["label"] not in labels:
            labels.append(entry["label"])

    from .events import Dataset

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(out / "dataset.json", Dataset(samples=samples, classes=labels))
    print(f"transduced {len(samples)} streams -> {out / 'dataset.json'}")
    return 0


def cmd_classify(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    espec, mspec = _specs_from_config(cfg)
    dataset = read_dataset(args.dataset)
    k = int(cfg["k"])

    if cfg["protocol"] == "loocv":
        report = leave_one_out(dataset, espec, mspec, k)
    elif cfg["protocol"] == "split":
        train, test = train_test_split(
            dataset, float(cfg["train_ratio"]), int(cfg["split_seed"])
        )
        report = classify_split(train, test, espec, mspec, k)
    else:
        raise UsageError(f"unknown protocol {cfg['protocol']!r}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_confusion_csv(out / f"confusion_{espec.kind}.csv", report)
    write_summary_csv(out / f"summary_{espec.kind}.csv", report)
    print(
        f"encoder={espec.kind} metric={mspec.kind} protocol={cfg['protocol']} "
        f"k={k} accuracy={report.accuracy:.4f} dispersion={report.dispersion:.2f}"
    )
    return 0


def cmd_optimize(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    dataset = read_dataset(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    k = int(cfg["k"])

    if args.target == "delta-t":
        result = sweep_delta_t(
            dataset,
            lo_ms=args.lo,
            hi_ms=args.hi,
            stride_ms=args.stride,
            k=k,
            per_class=args.per_class,
        )
        write_sweep_csv(out / "sweep_delta_t.csv", result)
        _dump_json(
            out / "best_delta_t.json",
            {"delta_t_ms": result.best_delta_t_ms, "accuracy": result.best_accuracy},
        )
        print(
            f"sweep [{args.lo}, {args.hi}] stride {args.stride}: "
            f"best delta_t={result.best_delta_t_ms} ms "
            f"accuracy={result.best_accuracy:.4f}"
        )
    else:
        result = optimize_spatiotemporal(
            dataset,
            bounds=((0.0, 1.0), (args.tau_lo, args.tau_hi)),
            epochs=args.epochs,
            seed=int(cfg["seed"]),
            k=k,
            per_class=args.per_class,
        )
        write_trials_csv(out / "trials_spatiotemporal.csv", result)
        _dump_json(
            out / "best_spatiotemporal.json",
            {
                "cos_theta": result.best_params[0],
                "tau_ms": result.best_params[1],
                "accuracy": result.best_accuracy,
            },
        )
        print(
            f"surrogate {args.epochs} epochs: best cos_theta={result.best_params[0]:.3f} "
            f"tau={result.best_params[1]:.1f} ms accuracy={result.best_accuracy:.4f}"
        )
    return 0


def confusion_text(classes: list[str], matrix: np.ndarray) -> str:
    width = max(max(len(c) for c in classes), len(str(int(matrix.max()))) if matrix.size else 1, 3)
    head = "actual\\pred".ljust(width + 2)
    lines = [head + " ".join(c.rjust(width) for c in classes)]
    for cls, row in zip(classes, matrix):
        lines.append(
            cls.ljust(width + 2) + " ".join(str(int(v)).rjust(width) for v in row)
        )
    return "\n".join(lines) + "\n"


def confusion_svg(classes: list[str], matrix: np.ndarray) -> str:
    n = len(classes)
    cell, left, top, pad = 40, 130, 120, 10
    w = left + n * cell + pad
    h = top + n * cell + pad
    vmax = max(int(matrix.max()), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        "<style>text { font-family: monospace; font-size: 11px; }</style>",
        f'<text x="{left}" y="14">confusion matrix (rows actual, columns predicted)</text>',
    ]
    for i, cls in enumerate(classes):
        parts.append(
            f'<text x="{left - 6}" y="{top + i * cell + cell * 0.62:.0f}" '
            f'text-anchor="end">{cls}</text>'
        )
        cx = left + i * cell + cell * 0.5
        parts.append(
            f'<text x="{cx:.0f}" y="{top - 8}" text-anchor="start" '
            f'transform="rotate(-55 {cx:.0f} {top - 8})">{cls}</text>'
        )
    for i in range(n):
        for j in range(n):
            v = int(matrix[i, j])
            frac = v / vmax
            r = round(255 + (32 - 255) * frac)
            g = round(255 + (96 - 255) * frac)
            b = round(255 + (168 - 255) * frac)
            x = left + j * cell
            y = top + i * cell
            parts.append(
                f'<rect class="cell" x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="#{r:02x}{g:02x}{b:02x}" stroke="#555"/>'
            )
            tcol = "#000000" if frac < 0.55 else "#ffffff"
            parts.append(
                f'<text x="{x + cell * 0.5:.0f}" y="{y + cell * 0.62:.0f}" '
                f'text-anchor="middle" fill="{tcol}">{v}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_report(args) -> int:
    classes, matrix = read_confusion_csv(args.confusion)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = confusion_text(classes, matrix)
    svg = confusion_svg(classes, matrix)
    (out / "confusion.txt").write_text(text)
    (out / "confusion.svg").write_text(svg)
    sys.stdout.write(text)
    total = matrix.sum()
    if total:
        print(f"accuracy={np.trace(matrix) / total:.4f} over {int(total)} samples")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tacspike",
        description="Event-driven tactile texture pipeline: simulate, transduce, "
        "encode, classify, optimize.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="master random seed")

    p = sub.add_parser("simulate", help="synthesise event streams and a dataset")
    add_common(p)
    p.add_argument("--runs", type=int, help="runs per texture")

    p = sub.add_parser("transduce", help="turn recorded event files into a dataset")
    add_common(p)
    p.add_argument("--manifest", required=True, help="manifest.json from simulate")

    p = sub.add_parser("classify", help="train/evaluate the KNN classifier")
    add_common(p)
    p.add_argument("--dataset", required=True, help="dataset.json")
    p.add_argument("--encoder", choices=ENCODER_KINDS)
    p.add_argument("--metric", choices=["euclidean", "van-rossum"])
    p.add_argument("--delta-t", dest="delta_t", type=int, help="temporal window, ms")
    p.add_argument("--tau", type=float, help="Van Rossum kernel constant, ms")
    p.add_argument("--cos-theta", dest="cos_theta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--protocol", choices=["loocv", "split"])
    p.add_argument("--ratio", type=float, help="train fraction for split protocol")
    p.add_argument("--split-seed", dest="split_seed", type=int)

    p = sub.add_parser("optimize", help="search encoder parameters")
    add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--target", choices=["delta-t", "spatiotemporal"], required=True)
    p.add_argument("--lo", type=int, default=1, help="sweep start, ms")
    p.add_argument("--hi", type=int, default=200, help="sweep end, ms")
    p.add_argument("--stride", type=int, default=1, help="sweep stride, ms")
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--tau-lo", dest="tau_lo", type=float, default=10.0)
    p.add_argument("--tau-hi", dest="tau_hi", type=float, default=200.0)
    p.add_argument("--k", type=int)
    p.add_argument(
        "--per-class", dest="per_class", type=int, help="subsample per class"
    )

    p = sub.add_parser("report", help="render a confusion matrix")
    add_common(p)
    p.add_argument("--confusion", required=True, help="confusion CSV from classify")

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "transduce": cmd_transduce,
    "classify": cmd_classify,
    "optimize": cmd_optimize,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
