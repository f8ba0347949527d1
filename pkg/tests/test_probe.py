import numpy as np
import pytest

from aip.builtins import builtin_scene
from aip.errors import TrajectoryError
from aip.probe import (
    Trajectory,
    TrajectoryConfig,
    generate,
    load_trajectory,
    parse_trajectory,
    save_trajectory,
    serialize_trajectory,
    validate_pose,
)
from aip.render import Pose
from aip.scene import parse_scene


@pytest.fixture(scope="module")
def room():
    return builtin_scene("brown_room")


def test_generate_deterministic(room):
    cfg = TrajectoryConfig(seed=42, count=20)
    t1 = generate(cfg, room)
    t2 = generate(cfg, room)
    assert serialize_trajectory(t1) == serialize_trajectory(t2)
    assert len(t1.poses) == 20


def test_every_generated_pose_validates(room):
    cfg = TrajectoryConfig(seed=5, count=50, margin=0.25)
    t = generate(cfg, room)
    for pose in t.poses:
        assert validate_pose(pose, room, cfg.margin)


def test_random_mode_pitch_range(room):
    t = generate(TrajectoryConfig(seed=9, count=60), room)
    for pose in t.poses:
        assert -30.0 <= pose.pitch <= 30.0


def test_group_mode_step_bound(room):
    cfg = TrajectoryConfig(seed=11, count=30, mode="group", group_size=5, step_size=0.4)
    t = generate(cfg, room)
    for g in range(0, cfg.count, cfg.group_size):
        group = t.poses[g : g + cfg.group_size]
        for a, b in zip(group, group[1:]):
            d = float(np.linalg.norm(b.position - a.position))
            # 1e-8 covers the 9-significant-digit pose canonicalization
            assert d <= cfg.step_size + 1e-8


def test_group_mode_overlap_property(room):
    n = 120
    g = generate(TrajectoryConfig(seed=3, count=n, mode="group", group_size=6, step_size=0.25), room)
    r = generate(TrajectoryConfig(seed=3, count=n), room)

    def mean_pairwise(poses):
        pts = np.array([p.position for p in poses])
        dists = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        return dists[np.triu_indices(len(pts), 1)].mean()

    intra = []
    for i in range(0, n, 6):
        intra.append(mean_pairwise(g.poses[i : i + 6]))
    assert np.mean(intra) < mean_pairwise(r.poses)


def test_save_load_save_is_byte_identical(room, tmp_path):
    t = generate(TrajectoryConfig(seed=42, count=100), room)
    p1 = tmp_path / "a.traj"
    p2 = tmp_path / "b.traj"
    save_trajectory(t, p1)
    loaded = load_trajectory(p1, room)
    save_trajectory(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    # canonicalization makes in-memory poses equal to the file's poses
    for a, b in zip(t.poses, loaded.poses):
        assert tuple(a.position) == tuple(b.position)
        assert (a.yaw, a.pitch) == (b.yaw, b.pitch)


def test_load_under_sister_scene(room, tmp_path):
    # blue_room shares brown_room's geometry, so poses remain valid
    t = generate(TrajectoryConfig(seed=7, count=10), room)
    path = save_trajectory(t, tmp_path / "t.traj")
    blue = builtin_scene("blue_room")
    loaded = load_trajectory(path, blue)
    assert len(loaded.poses) == 10


def test_load_rejects_invalid_pose_for_other_scene(tmp_path, room):
    tiny = parse_scene(
        """\
aipscene v1
scene tiny
bounds -0.5 -0.5 -0.5 0.5 0.5 0.5
camera 8 8 60.0 0.01
profile day
  ambient 0.5 0.5 0.5
"""
    )
    t = generate(TrajectoryConfig(seed=7, count=5), room)
    path = save_trajectory(t, tmp_path / "t.traj")
    with pytest.raises(TrajectoryError, match="invalid"):
        load_trajectory(path, tiny)


def test_truncated_file_rejected(room, tmp_path):
    t = generate(TrajectoryConfig(seed=1, count=5), room)
    path = save_trajectory(t, tmp_path / "t.traj")
    text = path.read_text()
    path.write_text(text[: text.rfind("pose")])  # drop the last pose
    with pytest.raises(TrajectoryError, match="expected 5 poses"):
        load_trajectory(path)


def test_version_mismatch_rejected():
    with pytest.raises(TrajectoryError, match="header"):
        parse_trajectory("aiptraj v9\nscene x\n")


def test_validate_pose_details(room):
    center = Pose(position=[0.0, 1.6, -1.5], yaw=0, pitch=0)
    assert validate_pose(center, room, margin=0.1)
    outside = Pose(position=[99.0, 1.6, 0.0], yaw=0, pitch=0)
    assert not validate_pose(outside, room, margin=0.1)
    # 1 mm from the west wall with a 10 cm margin -> probe ray hits the wall
    near_wall = Pose(position=[-2.499, 1.6, 0.0], yaw=0, pitch=0)
    assert not validate_pose(near_wall, room, margin=0.1)


def test_no_valid_pose_error(room):
    # eye height above the ceiling: every candidate is out of bounds
    cfg = TrajectoryConfig(seed=1, count=1, height=99.0)
    with pytest.raises(TrajectoryError, match="no valid pose"):
        generate(cfg, room)


def test_config_validation():
    with pytest.raises(TrajectoryError):
        TrajectoryConfig(count=0)
    with pytest.raises(TrajectoryError):
        TrajectoryConfig(mode="group", group_size=9, count=4)
    with pytest.raises(TrajectoryError):
        TrajectoryConfig(step_size=0.0)


def test_reserialization_idempotent_on_handwritten_file():
    text = (
        "aiptraj v1\nscene brown_room\nseed 3\ncount 1\nmode manual\n"
        "step_size 0.3\nlook_sensitivity 15\ngroup_size 1\nheight 1.6\nmargin 0.3\n"
        "pose 0.123456789 -1.5 1.6 270.25 -12.5\n"
    )
    t = parse_trajectory(text)
    assert serialize_trajectory(parse_trajectory(serialize_trajectory(t))) == serialize_trajectory(t)
