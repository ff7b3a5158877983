"""Command-line entry point.

Subcommands: simulate, synth-dataset, reconstruct, eval, inspect.
Exit codes: 0 success, 1 usage error, 2 data error. Every command that
draws random numbers requires an explicit --seed, and repeated invocations
with the same inputs and flags produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import evaluate, manifest, motion, pgm, qisb, sensor
from .backend import BACKEND_NAME
from .reconstruct import ReconstructionMethod, reconstruct_pipeline
from .types import SceneImage, SensorConfig

log = logging.getLogger("qis")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _method_from_name(name: str) -> ReconstructionMethod:
    factories = {
        "burst-average": ReconstructionMethod.burst_average,
        "average-then-denoise": ReconstructionMethod.average_then_denoise,
        "anscombe-denoise": ReconstructionMethod.anscombe_denoise,
        "mle-binary": ReconstructionMethod.mle_binary,
    }
    if name not in factories:
        raise _UsageError(
            f"unknown method {name!r}; choose from {', '.join(sorted(factories))}"
        )
    return factories[name]()


def _log_config(cfg: SensorConfig) -> None:
    log.info("sensor config: %s", dataclasses.asdict(cfg))


def _build_config(args, alpha: float) -> SensorConfig:
    return SensorConfig(
        gain_alpha=alpha,
        dark_current_rate=args.dark_current,
        read_noise_sigma=args.read_noise,
        adc_bits=args.bits,
        single_bit_threshold=args.threshold,
        integration_time=args.integration_time,
        frames_per_burst=args.frames,
    )


def _add_sensor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ppp", type=float, required=True,
                   help="target photons per pixel per frame (scene-relative)")
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--bits", type=int, default=3)
    p.add_argument("--threshold", type=int, default=1,
                   help="1-bit ADC threshold in electrons")
    p.add_argument("--read-noise", type=float, default=0.25)
    p.add_argument("--dark-current", type=float, default=0.0068)
    p.add_argument("--integration-time", type=float, default=75e-6)


def _list_scene_files(directory: str) -> List[str]:
    names = sorted(n for n in os.listdir(directory) if n.endswith(".pgm"))
    if not names:
        raise ValueError(f"no .pgm scenes found in {directory}")
    return [os.path.join(directory, n) for n in names]


def _cmd_simulate(args) -> int:
    scene = pgm.read_pgm(args.input)
    alpha = sensor.calibrate_gain(scene, args.ppp)
    cfg = _build_config(args, alpha)
    _log_config(cfg)
    burst = sensor.simulate_burst(scene, cfg, args.seed, threads=args.threads)
    qisb.write_burst(burst, args.out)
    log.info("wrote %s (%dx%dx%d, %d-bit)", args.out, burst.frame_count,
             burst.height, burst.width, burst.adc_bits)
    return EXIT_OK


def _cmd_synth_dataset(args) -> int:
    scene_paths = _list_scene_files(args.input_dir)
    os.makedirs(args.out_dir, exist_ok=True)
    size = args.size
    margin = args.margin if args.margin is not None else int(math.ceil(args.magnitude_hi))
    entries = []
    for i in range(args.count):
        src_path = scene_paths[i % len(scene_paths)]
        source = pgm.read_pgm(src_path)
        seed_i = motion.derive_seed(args.seed, i)
        y0, x0 = motion.sample_crop_offset(source.height, source.width,
                                           size, margin,
                                           motion.derive_seed(seed_i, 0xC0))
        trajectory = motion.sample_global_trajectory(
            motion.derive_seed(seed_i, 0xC1),
            (args.magnitude_lo, args.magnitude_hi),
            args.frames, args.model,
        )
        local_spec = None
        mask_path = None
        if args.mask_dir:
            candidate = os.path.join(args.mask_dir, os.path.basename(src_path))
            if os.path.exists(candidate):
                mask_img = pgm.read_pgm(candidate)
                if mask_img.data.shape != source.data.shape:
                    raise ValueError(f"mask {candidate} does not match its scene")
                if mask_img.data.max() > 0.5:
                    local_spec = motion.sample_local_spec(
                        mask_img.data > 0.5, motion.derive_seed(seed_i, 0xC2),
                        (args.magnitude_lo, args.magnitude_hi), args.frames,
                    )
                    mask_path = candidate

        # Warp the full source, then crop: samples never leave the image
        # as long as margin covers the largest displacement.
        full_frames = motion.warp_sequence(source, trajectory, local_spec)
        window = (slice(y0, y0 + size), slice(x0, x0 + size))
        x_true = SceneImage(source.data[window])
        x_motion = tuple(SceneImage(f.data[window]) for f in full_frames)

        alpha = sensor.calibrate_gain(x_true, args.ppp)
        cfg = _build_config(args, alpha)
        if i == 0:
            _log_config(cfg)
        triplet = motion.assemble_triplet(x_true, x_motion, cfg, seed_i,
                                          trajectory, local_spec)

        stem = os.path.join(args.out_dir, f"triplet_{i:05d}")
        true_path = f"{stem}_true.pgm"
        pgm.write_pgm(triplet.x_true, true_path)
        motion_paths = []
        for t, frame in enumerate(triplet.x_motion):
            p = f"{stem}_motion_{t:02d}.pgm"
            pgm.write_pgm(frame, p)
            motion_paths.append(p)
        noise_path = f"{stem}_noise.qisb"
        qis_path = f"{stem}_qis.qisb"
        qisb.write_burst(triplet.x_noise, noise_path)
        qisb.write_burst(triplet.x_qis, qis_path, trajectory=trajectory)

        entries.append(manifest.TripletEntry(
            x_true=true_path,
            x_motion=motion_paths,
            x_noise=noise_path,
            x_qis=qis_path,
            trajectory=[[float(dx), float(dy)]
                        for dx, dy in trajectory.displacements],
            config=cfg,
            seed=seed_i,
            local_mask=mask_path,
            local_transforms=(
                [[float(a) for a in row] for row in local_spec.transforms]
                if local_spec is not None else None
            ),
        ))
    out_manifest = os.path.join(args.out_dir, "manifest.json")
    manifest.write_manifest(entries, out_manifest)
    log.info("wrote %d triplets and %s", len(entries), out_manifest)
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    burst = qisb.read_burst(args.input)
    _log_config(burst.config)
    method = _method_from_name(args.method)
    estimate = reconstruct_pipeline(burst, method)
    pgm.write_pgm(estimate, args.out, bit_depth=16)
    log.info("wrote %s via %s", args.out, method.kind)
    return EXIT_OK


def _parse_float_list(text: str, flag: str) -> List[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise _UsageError(f"{flag} must list at least one value")
    return [float(t) for t in items]


def _cmd_eval(args) -> int:
    if args.mode == "single":
        if not (args.input and args.truth):
            raise _UsageError("--mode single requires --input and --truth")
        burst = qisb.read_burst(args.input)
        _log_config(burst.config)
        truth = pgm.read_pgm(args.truth)
        method = _method_from_name(args.method)
        estimate = reconstruct_pipeline(burst, method)
        value = evaluate.psnr(estimate, truth, args.border_exclude)
        print(f"{method.kind}: {evaluate.format_db(value)}")
        return EXIT_OK

    if not args.scene_dir:
        raise _UsageError(f"--mode {args.mode} requires --scene-dir")
    scenes = [pgm.read_pgm(p) for p in _list_scene_files(args.scene_dir)]
    methods = [_method_from_name(n)
               for n in args.methods.split(",") if n.strip()]
    if not methods:
        raise _UsageError("--methods must list at least one method")
    seeds = [motion.derive_seed(args.seed, i) for i in range(args.seeds)]
    base_cfg = SensorConfig(
        gain_alpha=1.0,
        dark_current_rate=args.dark_current,
        read_noise_sigma=args.read_noise,
        adc_bits=args.bits,
        single_bit_threshold=args.threshold,
        integration_time=args.integration_time,
        frames_per_burst=args.frames,
    )
    _log_config(base_cfg)
    if args.mode == "motion-sweep":
        magnitudes = _parse_float_list(args.magnitudes or "", "--magnitudes")
        result = evaluate.sweep_motion(methods, magnitudes, scenes, seeds,
                                       ppp=args.ppp, config=base_cfg,
                                       border_exclude=args.border_exclude)
    else:  # photon-sweep
        ppp_list = _parse_float_list(args.ppp_list or "", "--ppp-list")
        result = evaluate.sweep_photon(methods, ppp_list, scenes, seeds,
                                       magnitude=args.magnitude, config=base_cfg,
                                       border_exclude=args.border_exclude)
    csv_text = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(csv_text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _cmd_inspect(args) -> int:
    hdr = qisb.read_header(args.input)
    for key in ("version", "height", "width", "frame_count", "adc_bits"):
        print(f"{key}: {hdr[key]}")
    spath = qisb.sidecar_path(args.input)
    if os.path.exists(spath):
        burst = qisb.read_burst(args.input)
        print(f"seed: {burst.seed}")
        print(f"gain_alpha: {burst.config.gain_alpha!r}")
        print(f"read_noise_sigma: {burst.config.read_noise_sigma!r}")
        print(f"dark_current_rate: {burst.config.dark_current_rate!r}")
    else:
        print("sidecar: missing")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a burst from a scene")
    p.add_argument("--input", required=True, help="scene as binary PGM")
    p.add_argument("--out", required=True, help="output QISB path")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1,
                   help="execution hint; never changes the output")
    _add_sensor_flags(p)
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("synth-dataset", help="emit training triplets + manifest")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--mask-dir", default=None,
                   help="optional foreground masks named like their scenes")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--margin", type=int, default=None,
                   help="crop margin; defaults to the magnitude ceiling")
    p.add_argument("--magnitude-lo", type=float, default=7.0)
    p.add_argument("--magnitude-hi", type=float, default=35.0)
    p.add_argument("--model", choices=motion.TRAJECTORY_MODELS, default="linear")
    _add_sensor_flags(p)
    p.set_defaults(run=_cmd_synth_dataset)

    p = sub.add_parser("reconstruct", help="reconstruct a burst to a PGM image")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_reconstruct)

    p = sub.add_parser("eval", help="PSNR sweeps and single-burst scoring")
    p.add_argument("--mode", choices=("motion-sweep", "photon-sweep", "single"),
                   required=True)
    p.add_argument("--scene-dir")
    p.add_argument("--methods", default="burst-average")
    p.add_argument("--seeds", type=int, default=1, help="seeds per cell")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ppp", type=float, default=2.0)
    p.add_argument("--magnitude", type=float, default=4.0)
    p.add_argument("--magnitudes", help="comma-separated, motion-sweep mode")
    p.add_argument("--ppp-list", help="comma-separated, photon-sweep mode")
    p.add_argument("--border-exclude", type=int,
                   default=evaluate.DEFAULT_BORDER_EXCLUDE)
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--input", help="burst, single mode")
    p.add_argument("--truth", help="ground-truth PGM, single mode")
    p.add_argument("--method", default="burst-average", help="single mode")
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--bits", type=int, default=3)
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--read-noise", type=float, default=0.25)
    p.add_argument("--dark-current", type=float, default=0.0068)
    p.add_argument("--integration-time", type=float, default=75e-6)
    p.set_defaults(run=_cmd_eval)

    p = sub.add_parser("inspect", help="dump a QISB header")
    p.add_argument("--input", required=True)
    p.set_defaults(run=_cmd_inspect)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", BACKEND_NAME)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, qisb.QisbError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
