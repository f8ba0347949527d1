"""Command-line interface.

Subcommands: scene validate | render | probe gen | capture | ablate |
split | eval | serve | diff-gt.  Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ablation import (
    PRESETS,
    Scenario,
    capture_scenario,
    diff_ground_truth,
    expand_matrix,
    parse_matrix_config,
)
from .annotate import decode_normal_image
from .builtins import builtin_scene
from .dataset import read_manifest, save_split, split as make_split, verify_manifest, _load_png
from .errors import AipError
from .metrics import (
    confusion_matrix,
    depth_metrics,
    normal_metrics,
    report_row,
    report_table,
    seg_metrics_from_confusion,
    write_report_sidecar,
)
from .probe import TrajectoryConfig, generate, load_trajectory, save_trajectory
from .render import Pose, render_frame
from .scene import CameraIntrinsics, parse_scene
from .service import DEFAULT_PORT, PORT_ENV_VAR, Server


def _resolve_scene(spec: str):
    if spec.startswith("builtin:"):
        return builtin_scene(spec.split(":", 1)[1])
    path = Path(spec)
    return parse_scene(path.read_text(encoding="utf-8"), base_dir=path.parent)


def _intrinsics_from(args, scene) -> CameraIntrinsics:
    base = scene.camera_defaults
    if getattr(args, "width", None) or getattr(args, "height", None):
        return CameraIntrinsics(
            width=args.width or base.width,
            height=args.height or base.height,
            vertical_fov=getattr(args, "fov", None) or base.vertical_fov,
            near=base.near,
        )
    if getattr(args, "fov", None):
        return CameraIntrinsics(base.width, base.height, args.fov, base.near)
    return base


def _parse_pose(text: str) -> Pose:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 5:
        raise AipError("pose must be x,y,z,yaw,pitch")
    return Pose(position=parts[:3], yaw=parts[3], pitch=parts[4])


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_scene_validate(args) -> int:
    scene = _resolve_scene(args.scene)
    tris = sum(lod.triangle_count for o in scene.objects for lod in o.lods)
    print(
        f"ok: scene {scene.name!r}: {len(scene.objects)} objects, {tris} triangles, "
        f"{len(scene.classes)} classes, profiles: {', '.join(scene.profile_names)}"
    )
    return 0


def _cmd_render(args) -> int:
    scene = _resolve_scene(args.scene)
    intr = _intrinsics_from(args, scene)
    pose = _parse_pose(args.pose)
    preset = PRESETS[args.fidelity]
    mode = "unlit" if args.lighting == "unlit" else "lit"
    frame = render_frame(scene, pose, args.lighting, preset.to_settings(mode), intr, args.seed)
    frame.meta["scenario"] = f"{scene.name}/{args.lighting}/{preset.name}"
    from .dataset import export_frame

    out = Path(args.out)
    paths = export_frame(frame, out, index=args.index)
    meta_path = out / f"frame_{args.index:05d}_meta.txt"
    meta_lines = [f"{k} {v}" for k, v in sorted(frame.meta.items()) if k != "class_names"]
    meta_path.write_text("\n".join(meta_lines) + "\n", encoding="utf-8")
    print(f"wrote {len(paths)} buffers + meta to {out}")
    return 0


def _cmd_probe_gen(args) -> int:
    scene = _resolve_scene(args.scene)
    cfg = TrajectoryConfig(
        seed=args.seed,
        count=args.count,
        mode=args.mode,
        step_size=args.step_size,
        look_sensitivity=args.look_sensitivity,
        group_size=args.group_size,
        height=args.height,
        margin=args.margin,
    )
    traj = generate(cfg, scene)
    save_trajectory(traj, args.out)
    print(f"wrote {len(traj.poses)} poses to {args.out}")
    return 0


def _cmd_capture(args) -> int:
    scene = _resolve_scene(args.scene)
    traj = load_trajectory(args.trajectory, scene)
    preset = PRESETS[args.fidelity]
    scenario = Scenario(map=scene.name, lighting=args.lighting, fidelity=preset)
    report = capture_scenario(scenario, traj, _intrinsics_from(args, scene), args.out, scene=scene)
    print(
        f"captured {report.frames} frames ({report.files} files) under {report.directory}\n"
        f"digest {report.digest}"
    )
    return 0


def _cmd_ablate(args) -> int:
    maps, lightings, fidelities, presets = parse_matrix_config(
        Path(args.matrix).read_text(encoding="utf-8")
    )
    scenarios = expand_matrix(maps, lightings, fidelities, presets)
    print(f"matrix: {len(scenarios)} scenarios")
    for sc in scenarios:
        scene = builtin_scene(sc.map) if args.builtin else _resolve_scene(sc.map)
        traj = load_trajectory(args.trajectory, scene)
        intr = _intrinsics_from(args, scene)
        report = capture_scenario(sc, traj, intr, args.out, scene=scene)
        print(f"  {sc.id}: {report.frames} frames, digest {report.digest[:16]}")
    return 0


def _cmd_split(args) -> int:
    manifest = read_manifest(args.manifest)
    s = make_split(manifest, args.ratio, args.seed)
    save_split(s, args.out)
    print(f"split {len(manifest.records)} records -> {len(s.train)} train / {len(s.test)} test")
    return 0


def _matched_files(pred_dir: Path, gt_dir: Path, tag: str) -> list:
    pred_names = {p.name for p in pred_dir.glob("*.png")}
    gt_names = {p.name for p in gt_dir.glob("*.png")}
    common = sorted(pred_names & gt_names)
    tagged = [n for n in common if tag in n]
    picked = tagged if tagged else common
    if not picked:
        raise AipError(f"no matching .png files between {pred_dir} and {gt_dir}")
    return picked


def _cmd_eval(args) -> int:
    pred_dir, gt_dir = Path(args.pred), Path(args.gt)
    train_id = args.train_id or str(pred_dir)
    test_id = args.test_id or str(gt_dir)

    if args.task == "depth":
        tag = "depth_ortho" if args.channel == "ortho" else "depth_persp"
        preds, gts = [], []
        for name in _matched_files(pred_dir, gt_dir, tag):
            pv = _load_png(pred_dir / name).astype(np.float64) / 65535.0 * args.max_range
            gv = _load_png(gt_dir / name).astype(np.float64) / 65535.0 * args.max_range
            mask = (pv > 0) & (gv > 0)
            preds.append(pv[mask])
            gts.append(gv[mask])
        m = depth_metrics(np.concatenate(preds), np.concatenate(gts))
        row = report_row(m, train_id, test_id, goal=args.goal)
        print(report_table([row], "depth"))
    elif args.task == "normal":
        preds, gts = [], []
        for name in _matched_files(pred_dir, gt_dir, "normals"):
            pv, pm = decode_normal_image(_load_png(pred_dir / name))
            gv, gm = decode_normal_image(_load_png(gt_dir / name))
            mask = pm & gm
            preds.append(pv[mask])
            gts.append(gv[mask])
        m = normal_metrics(np.concatenate(preds), np.concatenate(gts))
        row = report_row(m, train_id, test_id, goal=args.goal)
        print(report_table([row], "normal"))
    else:  # seg
        n_classes = args.classes
        if n_classes is None:
            legend = Path(args.gt) / "legend.txt"
            if not legend.exists():
                raise AipError("--classes required when the gt dir has no legend.txt")
            n_classes = sum(1 for ln in legend.read_text().splitlines() if ln and not ln.startswith("#"))
        total = np.zeros((n_classes, n_classes), dtype=np.int64)
        for name in _matched_files(pred_dir, gt_dir, "labels"):
            total += confusion_matrix(_load_png(pred_dir / name), _load_png(gt_dir / name), n_classes)
        m = seg_metrics_from_confusion(total)
        row = report_row(m, train_id, test_id, goal=args.goal)
        print(report_table([row], "seg"))

    if args.report:
        write_report_sidecar(
            args.report,
            [{"task": args.task, "train": train_id, "test": test_id, "metrics": m}],
        )
        print(f"sidecar written to {args.report}")
    return 0


def _cmd_diff_gt(args) -> int:
    report = diff_ground_truth(args.dir_a, args.dir_b)
    for channel, equal in report.gt_equal.items():
        status = "equal" if equal else f"DIFFERS (frames {report.mismatched_frames[channel]})"
        print(f"{channel}: {status}")
    print(f"color: mean absolute difference {report.color_mad:.6f} (of full scale)")
    return 0 if report.all_gt_equal else 1


def _cmd_verify(args) -> int:
    report = verify_manifest(args.manifest)
    if report.ok:
        print(f"ok: {report.checked} files verified")
        return 0
    for frame, channel, rel in report.missing:
        print(f"missing: frame {frame} {channel} {rel}")
    for frame, channel, rel in report.corrupt:
        print(f"corrupt: frame {frame} {channel} {rel}")
    return 1


def _cmd_serve(args) -> int:
    scene = _resolve_scene(args.scene)
    preview = CameraIntrinsics(args.preview_width, args.preview_height, 60.0, 0.05)
    server = Server(
        scene,
        port=args.port,
        out_dir=args.out,
        static_dir=args.static,
        preview=preview,
    )
    print(f"serving {scene.name} on port {server.port} (ctrl-c to stop)")
    server.serve_forever()
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aip",
        description="Synthetic indoor-scene renderer for data-ablation studies.",
    )
    parser.add_argument("--version", action="version", version=f"aip {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scene = sub.add_parser("scene", help="scene file tools")
    scene_sub = p_scene.add_subparsers(dest="scene_command", required=True)
    p_validate = scene_sub.add_parser("validate", help="parse and validate a scene file")
    p_validate.add_argument("scene", help="scene file path or builtin:<name>")
    p_validate.set_defaults(func=_cmd_scene_validate)

    p_render = sub.add_parser("render", help="render one pose to PNG buffers")
    p_render.add_argument("--scene", required=True)
    p_render.add_argument("--lighting", required=True)
    p_render.add_argument("--fidelity", choices=sorted(PRESETS), default="high")
    p_render.add_argument("--pose", required=True, help="x,y,z,yaw,pitch")
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--seed", type=int, default=0)
    p_render.add_argument("--index", type=int, default=0)
    p_render.add_argument("--width", type=int)
    p_render.add_argument("--height", type=int)
    p_render.add_argument("--fov", type=float)
    p_render.set_defaults(func=_cmd_render)

    p_probe = sub.add_parser("probe", help="trajectory tools")
    probe_sub = p_probe.add_subparsers(dest="probe_command", required=True)
    p_gen = probe_sub.add_parser("gen", help="generate a seeded trajectory")
    p_gen.add_argument("--scene", required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--mode", choices=["random", "group"], default="random")
    p_gen.add_argument("--group-size", type=int, default=5)
    p_gen.add_argument("--step-size", type=float, default=0.3)
    p_gen.add_argument("--look-sensitivity", type=float, default=15.0)
    p_gen.add_argument("--height", type=float, default=1.6)
    p_gen.add_argument("--margin", type=float, default=0.3)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_probe_gen)

    p_capture = sub.add_parser("capture", help="capture a trajectory under one scenario")
    p_capture.add_argument("--scene", required=True)
    p_capture.add_argument("--lighting", required=True)
    p_capture.add_argument("--fidelity", choices=sorted(PRESETS), default="high")
    p_capture.add_argument("--trajectory", required=True)
    p_capture.add_argument("--out", required=True)
    p_capture.add_argument("--width", type=int)
    p_capture.add_argument("--height", type=int)
    p_capture.add_argument("--fov", type=float)
    p_capture.set_defaults(func=_cmd_capture)

    p_ablate = sub.add_parser("ablate", help="capture a whole scenario matrix")
    p_ablate.add_argument("--matrix", required=True, help="aipmatrix config file")
    p_ablate.add_argument("--trajectory", required=True)
    p_ablate.add_argument("--out", required=True)
    p_ablate.add_argument("--width", type=int)
    p_ablate.add_argument("--height", type=int)
    p_ablate.add_argument("--fov", type=float)
    p_ablate.add_argument(
        "--builtin", action="store_true", default=True,
        help="treat matrix map names as builtin scenes (default)",
    )
    p_ablate.set_defaults(func=_cmd_ablate)

    p_split = sub.add_parser("split", help="deterministic train/test split of a manifest")
    p_split.add_argument("--manifest", required=True)
    p_split.add_argument("--ratio", type=float, default=0.8)
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--out", required=True)
    p_split.set_defaults(func=_cmd_split)

    p_eval = sub.add_parser("eval", help="evaluate predictions against ground truth")
    p_eval.add_argument("task", choices=["depth", "normal", "seg"])
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--gt", required=True)
    p_eval.add_argument("--channel", choices=["persp", "ortho"], default="persp")
    p_eval.add_argument("--max-range", type=float, default=10.0)
    p_eval.add_argument("--classes", type=int)
    p_eval.add_argument("--train-id")
    p_eval.add_argument("--test-id")
    p_eval.add_argument("--goal", help="override the inferred SC/L/M/F tag")
    p_eval.add_argument("--report", help="write a JSON sidecar here")
    p_eval.set_defaults(func=_cmd_eval)

    p_diff = sub.add_parser("diff-gt", help="compare two capture directories")
    p_diff.add_argument("dir_a")
    p_diff.add_argument("dir_b")
    p_diff.set_defaults(func=_cmd_diff_gt)

    p_verify = sub.add_parser("verify", help="verify a capture manifest's digests")
    p_verify.add_argument("manifest")
    p_verify.set_defaults(func=_cmd_verify)

    p_serve = sub.add_parser("serve", help="run the live capture service")
    p_serve.add_argument("--scene", required=True)
    p_serve.add_argument(
        "--port", type=int,
        default=int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT)),
        help=f"default from ${PORT_ENV_VAR} or {DEFAULT_PORT}",
    )
    p_serve.add_argument("--out", default=".")
    p_serve.add_argument("--static", help="directory of viewer assets to serve over HTTP")
    p_serve.add_argument("--preview-width", type=int, default=320)
    p_serve.add_argument("--preview-height", type=int, default=240)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
