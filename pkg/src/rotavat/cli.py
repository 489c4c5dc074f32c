"""``rotavat`` command line: synth, calibrate, align, evaluate, render.

Exit codes: 0 success, 2 usage/schema error, 3 domain error, 4 IO error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import __version__
from .align import align_scene
from .calibration import grid_search_calibrate
from .config import load_config
from .errors import DomainError, EmptyInput, MissingCamera, SchemaError
from .geometry import CameraParams, build_projection, project_points
from .metrics import METRIC_NAMES, evaluate_scene
from .render import RenderOptions, render, render_comparison
from .scene import read_scene, save_scene
from .synth import corrupt_scene, generate_scene, observed_pairs

log = logging.getLogger("rotavat")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4

ANCHOR_TOL = 1e-6
GROUND_TOL = 1e-9


def write_atomic(path, data: bytes | str):
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    spec = cfg.scene_spec()
    if args.persons is not None:
        spec = replace(spec, person_count=args.persons)
    corruption = cfg.corruption_params()
    for flag, name in (
        ("tilt", "tilt_toward_camera"),
        ("scale_error", "scale_error"),
        ("depth_error", "depth_error"),
        ("elevation_error", "elevation_error"),
        ("pose_noise", "pose_noise"),
    ):
        value = getattr(args, flag)
        if value is not None:
            corruption = replace(corruption, **{name: math.radians(value) if flag == "tilt" else value})
    gt = generate_scene(spec)
    pred = corrupt_scene(gt, corruption)
    os.makedirs(args.out_dir, exist_ok=True)
    write_atomic(os.path.join(args.out_dir, "gt.json"), save_scene(gt))
    write_atomic(os.path.join(args.out_dir, "pred.json"), save_scene(pred))
    print(f"wrote {len(gt.meshes)} persons to {args.out_dir}/gt.json and pred.json")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    scene = read_scene(args.scene)
    if not scene.meshes:
        raise EmptyInput("scene has no meshes")
    if scene.camera is None:
        raise MissingCamera("the scene carries no camera to project its keypoints with")
    pairs, skipped = observed_pairs(scene)
    for pid, exc in skipped:
        print(f"skipped {pid}: {exc}", file=sys.stderr)
    if not pairs:
        raise EmptyInput("no usable foot/head pairs")
    if len(pairs) < 3:
        print(f"warning: only {len(pairs)} pair(s) to fit 3 camera parameters", file=sys.stderr)
    grid = cfg.calibration_grid(scene.height)
    if args.bins is not None:
        grid = grid.with_bins(args.bins)
    height = args.pedestrian_height if args.pedestrian_height is not None else cfg.pedestrian_height_cm
    result = grid_search_calibrate(pairs, grid, height)
    write_atomic(args.out, _json_bytes(result.to_dict()))
    p = result.params
    print(f"f={p.f:.6g} pitch={p.pitch:.6g} height={p.height:.6g} mse={result.mse:.6g} ({result.evaluations} evaluations)")
    return EXIT_OK


def _read_camera(path) -> CameraParams:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
            return CameraParams.from_dict(doc)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad calibration file: {exc}") from None


def verify_alignment(original, aligned, cam, ids) -> list[str]:
    """Recheck anchoring and ground contact for the successfully aligned ``ids``."""
    P = build_projection(cam)
    problems = []
    for pid in ids:
        a, b = original.mesh(pid), aligned.mesh(pid)
        before, _ = project_points(P, np.stack([a.foot_mid, a.head]))
        after, _ = project_points(P, np.stack([b.foot_mid, b.head]))
        err = float(np.linalg.norm(before - after, axis=1).max())
        if err > ANCHOR_TOL:
            problems.append(f"{pid}: reprojection moved by {err:.3g}")
        if abs(b.foot_mid[1]) > GROUND_TOL:
            problems.append(f"{pid}: foot height {b.foot_mid[1]:.3g}")
    return problems


def cmd_align(args) -> int:
    scene = read_scene(args.scene)
    if args.calibration:
        cam = _read_camera(args.calibration)
    elif args.use_scene_camera:
        if scene.camera is None:
            raise MissingCamera("scene has no camera")
        cam = scene.camera
    else:
        raise MissingCamera("pass --calibration FILE or --use-scene-camera")
    aligned, traces, errors = align_scene(scene, cam)
    for pid, exc in errors:
        print(f"failed {pid}: {exc}", file=sys.stderr)
    write_atomic(args.out, save_scene(aligned))
    if args.trace:
        doc = {
            "traces": [t.to_dict() for t in traces],
            "errors": [{"person_id": pid, "phase": exc.phase, "message": str(exc)} for pid, exc in errors],
        }
        write_atomic(args.trace, _json_bytes(doc))
    print(f"aligned {len(traces)}/{len(scene.meshes)} persons")
    if args.verify:
        problems = verify_alignment(scene, aligned, cam, [t.person_id for t in traces])
        for msg in problems:
            print(f"verify: {msg}", file=sys.stderr)
        if problems:
            return EXIT_DOMAIN
        print("verify: anchoring and ground contact hold")
    if scene.meshes and not traces:
        return EXIT_DOMAIN
    return EXIT_OK


def _print_aggregate(label, report):
    vals = " ".join(f"{k}={report.aggregate[k]:.4f}" for k in METRIC_NAMES)
    print(f"{label}: {vals} (n={report.person_count}, cm)")


def cmd_evaluate(args) -> int:
    pred = read_scene(args.pred)
    gt = read_scene(args.gt)
    report = evaluate_scene(pred, gt)
    if args.out:
        write_atomic(args.out, _json_bytes(report.to_dict()))
    _print_aggregate(os.path.basename(args.pred), report)
    if args.compare:
        other = evaluate_scene(read_scene(args.compare), gt)
        _print_aggregate(os.path.basename(args.compare), other)
        delta = other.aggregate["w_mpjpe"] - report.aggregate["w_mpjpe"]
        print(f"delta w_mpjpe ({args.compare} - {args.pred}): {delta:+.4f} cm")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = load_config(args.config)
    opts = dict(cfg.render)
    opts["view"] = args.view
    if args.side_axis:
        opts["side_axis"] = args.side_axis
    if args.no_ground:
        opts["show_ground"] = False
    try:
        options = RenderOptions(**opts)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), "/render") from None
    scene = read_scene(args.scene)
    if args.before:
        doc = render_comparison(read_scene(args.before), scene, options)
    else:
        doc = render(scene, options)
    write_atomic(args.out, doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotavat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate ground-truth and corrupted scenes")
    s.add_argument("--config")
    s.add_argument("--out-dir", default=".")
    s.add_argument("--persons", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tilt", type=float, help="tilt toward the camera, degrees")
    s.add_argument("--scale-error", type=float)
    s.add_argument("--depth-error", type=float)
    s.add_argument("--elevation-error", type=float)
    s.add_argument("--pose-noise", type=float)
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("calibrate", help="grid-search the camera from foot/head pairs")
    c.add_argument("scene")
    c.add_argument("--out", default="calibration.json")
    c.add_argument("--config")
    c.add_argument("--bins", type=int)
    c.add_argument("--pedestrian-height", type=float)
    c.set_defaults(func=cmd_calibrate)

    a = sub.add_parser("align", help="run RotAvat on every mesh")
    a.add_argument("scene")
    src = a.add_mutually_exclusive_group()
    src.add_argument("--calibration")
    src.add_argument("--use-scene-camera", action="store_true")
    a.add_argument("--out", default="aligned.json")
    a.add_argument("--trace")
    a.add_argument("--verify", action="store_true")
    a.set_defaults(func=cmd_align)

    e = sub.add_parser("evaluate", help="MPJPE, PA-MPJPE, PVE, W-MPJPE, W-PVE")
    e.add_argument("pred")
    e.add_argument("gt")
    e.add_argument("--out")
    e.add_argument("--compare", help="second prediction; prints the W-MPJPE delta")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("render", help="SVG front/side views")
    r.add_argument("scene")
    r.add_argument("--view", choices=("front", "side", "pair"), default="front")
    r.add_argument("--out", default="scene.svg")
    r.add_argument("--side-axis", choices=("x", "z"))
    r.add_argument("--no-ground", action="store_true")
    r.add_argument("--before", help="second scene drawn as the top row of a before/after grid")
    r.add_argument("--config")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
