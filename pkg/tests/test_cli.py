import subprocess
import sys
from pathlib import Path

import pytest

from aip.cli import main
from aip.dataset import MANIFEST_NAME, load_split


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def traj_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("traj") / "t.traj"
    assert run_cli(
        "probe", "gen", "--scene", "builtin:brown_room",
        "--seed", "42", "--count", "2", "--out", str(path),
    ) == 0
    return path


def test_scene_validate_builtin(capsys):
    assert run_cli("scene", "validate", "builtin:brown_room") == 0
    out = capsys.readouterr().out
    assert "16 classes" in out


def test_scene_validate_file(tmp_path):
    from conftest import MINIMAL_SCENE

    p = tmp_path / "s.scene"
    p.write_text(MINIMAL_SCENE)
    assert run_cli("scene", "validate", str(p)) == 0


def test_scene_validate_bad_file(tmp_path, capsys):
    p = tmp_path / "bad.scene"
    p.write_text("aipscene v1\nscene x\nbounds 0 0 0 1 1 1\nclasses a a\n")
    assert run_cli("scene", "validate", str(p)) == 1
    assert "error" in capsys.readouterr().err


def test_render_writes_buffers_and_meta(tmp_path):
    out = tmp_path / "f"
    assert run_cli(
        "render", "--scene", "builtin:brown_room", "--lighting", "day",
        "--fidelity", "low", "--pose", "0,1.6,0,0,0", "--out", str(out),
        "--width", "48", "--height", "36",
    ) == 0
    names = sorted(p.name for p in out.glob("*"))
    assert names == [
        "frame_00000_color.png",
        "frame_00000_depth_ortho.png",
        "frame_00000_depth_persp.png",
        "frame_00000_labels.png",
        "frame_00000_meta.txt",
        "frame_00000_normals.png",
        "legend.txt",
    ]
    meta = (out / "frame_00000_meta.txt").read_text()
    assert "scenario brown_room/day/low" in meta


def test_capture_and_split_and_verify(tmp_path, traj_file, capsys):
    out = tmp_path / "cap"
    assert run_cli(
        "capture", "--scene", "builtin:brown_room", "--lighting", "day",
        "--fidelity", "low", "--trajectory", str(traj_file), "--out", str(out),
        "--width", "48", "--height", "36",
    ) == 0
    manifest = out / "brown_room" / "day" / "low" / MANIFEST_NAME
    assert manifest.exists()

    assert run_cli("verify", str(manifest)) == 0

    split_path = tmp_path / "split.txt"
    assert run_cli(
        "split", "--manifest", str(manifest), "--ratio", "0.5", "--seed", "3",
        "--out", str(split_path),
    ) == 0
    s = load_split(split_path)
    assert len(s.train) == 1 and len(s.test) == 1


def test_ablate_eight_scenarios(tmp_path, traj_file):
    matrix = tmp_path / "m.cfg"
    matrix.write_text(
        "aipmatrix v1\nmaps brown_room\nlightings day night\nfidelities high low\n"
        "preset high 0.75 0 2 1 4 0\npreset low 0.5 2 1 0 1 255\n"
    )
    out = tmp_path / "root"
    assert run_cli(
        "ablate", "--matrix", str(matrix), "--trajectory", str(traj_file),
        "--out", str(out), "--width", "40", "--height", "30",
    ) == 0
    dirs = sorted(str(p.relative_to(out)) for p in out.glob("*/*/*"))
    assert dirs == [
        "brown_room/day/high", "brown_room/day/low",
        "brown_room/night/high", "brown_room/night/low",
    ]


def test_ablate_core_table_eight_dirs(tmp_path, traj_file):
    # the core ablation table: two maps x two lightings x two fidelities
    matrix = tmp_path / "core.cfg"
    matrix.write_text(
        "aipmatrix v1\nmaps brown_room blue_room\nlightings day night\n"
        "fidelities high low\n"
    )
    out = tmp_path / "root"
    assert run_cli(
        "ablate", "--matrix", str(matrix), "--trajectory", str(traj_file),
        "--out", str(out), "--width", "32", "--height", "24",
    ) == 0
    dirs = sorted(str(p.relative_to(out)) for p in out.glob("*/*/*"))
    assert len(dirs) == 8
    assert "blue_room/night/low" in dirs and "brown_room/day/high" in dirs


def test_eval_depth_identical_dirs(tmp_path, traj_file, capsys):
    out = tmp_path / "cap"
    run_cli(
        "capture", "--scene", "builtin:brown_room", "--lighting", "day",
        "--fidelity", "low", "--trajectory", str(traj_file), "--out", str(out),
        "--width", "40", "--height", "30",
    )
    capsys.readouterr()
    d = out / "brown_room" / "day" / "low"
    assert run_cli("eval", "depth", "--pred", str(d), "--gt", str(d)) == 0
    table = capsys.readouterr().out
    assert "1.0000 1.0000 1.0000 0.0000" in table

    report = tmp_path / "r.json"
    assert run_cli(
        "eval", "seg", "--pred", str(d), "--gt", str(d), "--classes", "16",
        "--report", str(report),
    ) == 0
    assert report.exists()

    assert run_cli("eval", "normal", "--pred", str(d), "--gt", str(d)) == 0


def test_diff_gt_cli(tmp_path, traj_file, capsys):
    out = tmp_path / "cap"
    for lighting in ("day", "night"):
        run_cli(
            "capture", "--scene", "builtin:brown_room", "--lighting", lighting,
            "--fidelity", "low", "--trajectory", str(traj_file), "--out", str(out),
            "--width", "40", "--height", "30",
        )
    a = out / "brown_room" / "day" / "low"
    b = out / "brown_room" / "night" / "low"
    assert run_cli("diff-gt", str(a), str(b)) == 0
    text = capsys.readouterr().out
    assert text.count("equal") >= 4
    assert "mean absolute difference" in text


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["render", "--bogus-flag"])
    assert exc.value.code == 2


def test_unknown_subcommand_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_domain_error_exit_1(tmp_path, capsys):
    missing = tmp_path / "nope.traj"
    assert run_cli(
        "capture", "--scene", "builtin:brown_room", "--lighting", "day",
        "--trajectory", str(missing), "--out", str(tmp_path),
    ) == 1


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "aip.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for sub in ("render", "probe", "capture", "ablate", "split", "eval", "serve", "diff-gt"):
        assert sub in proc.stdout
