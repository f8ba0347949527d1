"""Drive the live capture service from a script.

Starts the service in-process, walks the camera around over the wire
protocol, records waypoints, exports them as a trajectory file, and then
replays that file through the batch capture path — the same loop a human
performs with the browser viewer.
"""

import base64
from pathlib import Path

from aip import builtin_scene
from aip.ablation import HIGH, Scenario, capture_scenario
from aip.probe import parse_trajectory
from aip.scene import CameraIntrinsics
from aip.service import Server

import socket
from aip.service import recv_raw, send_raw

out = Path(__file__).parent / "out" / "service"
out.mkdir(parents=True, exist_ok=True)

scene = builtin_scene("brown_room")
server = Server(scene, port=0, out_dir=out, preview=CameraIntrinsics(160, 120, 60.0, 0.05)).start()
print(f"service listening on port {server.port}")

sock = socket.create_connection(("127.0.0.1", server.port))
f = sock.makefile("rb")

send_raw(sock, {"type": "hello", "version": 1})
ack = recv_raw(f)
frame = recv_raw(f)
print(f"connected to scene {ack['scene']}; initial pose {frame['pose']}")

# wander: forward, strafe, turn, look down
for move, yaw, pitch in [
    ("0 0 0.4", "0", "0"),
    ("0 0 0.4", "25", "0"),
    ("0.3 0 0", "0", "-5"),
    ("0 0 0.3", "-10", "0"),
]:
    send_raw(sock, {"type": "input", "move": move, "yaw": yaw, "pitch": pitch})
    frame = recv_raw(f)
    send_raw(sock, {"type": "waypoint"})
    frame = recv_raw(f)
print(f"recorded {frame['waypoints']} waypoints")

# look at the depth overlay for fun
send_raw(sock, {"type": "set", "key": "overlay", "value": "depth"})
frame = recv_raw(f)
print(f"overlay now: {frame['overlay']}")

send_raw(sock, {"type": "export_trajectory"})
traj_msg = recv_raw(f)
recv_raw(f)  # the confirming frame
sock.close()
server.stop()

text = base64.b64decode(traj_msg["text"]).decode()
traj = parse_trajectory(text)
print(f"exported {traj_msg['name']} with {len(traj.poses)} poses")

# replay the recorded trajectory through the batch pipeline
report = capture_scenario(
    Scenario("brown_room", "day", HIGH), traj,
    CameraIntrinsics(160, 120, 60.0, 0.05), out / "replay", scene=scene,
)
print(f"replayed into {report.directory} ({report.files} files)")
