"""Synthetic scene configuration: one box over a textured plane, closed-form motion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core import IDENTITY_POSE, PinholeIntrinsics, Pose6D
from ..core import quat as _q
from ..core.quat import slerp
from ..errors import InvalidConfig

BACKGROUND_KINDS = ("checkerboard", "gradient", "noise_texture")

# pi rotations about each axis: the symmetry group of a generic box
GENERIC_BOX_SYMMETRY = (
    _q.IDENTITY,
    (0.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
)

# saturated and pairwise distinct, so chroma keying has an unambiguous target
DEFAULT_FACE_COLORS = (
    (230, 30, 30), (30, 200, 40), (40, 60, 220),
    (230, 220, 30), (220, 40, 200), (40, 210, 210),
)


@dataclass(frozen=True)
class BoxObject:
    extents: tuple[float, float, float] = (0.30, 0.24, 0.18)
    face_colors: tuple = DEFAULT_FACE_COLORS
    symmetry_group: tuple = GENERIC_BOX_SYMMETRY

    def __post_init__(self):
        if len(self.extents) != 3 or min(self.extents) <= 0:
            raise InvalidConfig(f"box extents must be positive, got {self.extents}")
        colors = [tuple(c) for c in self.face_colors]
        if len(colors) != 6 or len(set(colors)) != 6:
            raise InvalidConfig("need 6 pairwise-distinct face colors")
        object.__setattr__(self, "face_colors", tuple(colors))
        object.__setattr__(self, "symmetry_group", tuple(tuple(s) for s in self.symmetry_group))


@dataclass(frozen=True)
class StaticTrajectory:
    pose: Pose6D

    def pose_at(self, i: int, n: int) -> Pose6D:
        return self.pose


@dataclass(frozen=True)
class LinearTrajectory:
    start_pose: Pose6D
    end_pose: Pose6D

    def pose_at(self, i: int, n: int) -> Pose6D:
        alpha = 0.0 if n <= 1 else i / (n - 1)
        t = tuple(a + alpha * (b - a) for a, b in zip(self.start_pose.t, self.end_pose.t))
        return Pose6D(t, slerp(self.start_pose.q, self.end_pose.q, alpha))


@dataclass(frozen=True)
class OrbitTrajectory:
    """Circle in the world x-z plane around a center, heading rotating with phase."""

    center: tuple[float, float, float]
    radius_m: float
    angular_speed_deg_per_frame: float

    def __post_init__(self):
        if not self.radius_m > 0:
            raise InvalidConfig("orbit radius must be positive")

    def pose_at(self, i: int, n: int) -> Pose6D:
        theta = math.radians(i * self.angular_speed_deg_per_frame)
        t = (
            self.center[0] + self.radius_m * math.sin(theta),
            self.center[1],
            self.center[2] + self.radius_m * math.cos(theta),
        )
        return Pose6D(t, _q.from_axis_angle((0.0, 1.0, 0.0), math.degrees(theta)))


@dataclass(frozen=True)
class StaticCamera:
    pose: Pose6D = IDENTITY_POSE

    def pose_at(self, i: int, n: int) -> Pose6D:
        return self.pose


@dataclass(frozen=True)
class LinearCamera:
    start_pose: Pose6D
    end_pose: Pose6D

    def pose_at(self, i: int, n: int) -> Pose6D:
        alpha = 0.0 if n <= 1 else i / (n - 1)
        t = tuple(a + alpha * (b - a) for a, b in zip(self.start_pose.t, self.end_pose.t))
        return Pose6D(t, slerp(self.start_pose.q, self.end_pose.q, alpha))


@dataclass(frozen=True)
class SceneConfig:
    seed: int
    width: int = 320
    height: int = 240
    frame_count: int = 30
    intrinsics: PinholeIntrinsics = field(
        default_factory=lambda: PinholeIntrinsics(300.0, 300.0, 160.0, 120.0)
    )
    background_kind: str = "gradient"
    object: BoxObject = field(default_factory=BoxObject)
    trajectory: object = field(default_factory=lambda: StaticTrajectory(DEFAULT_OBJECT_POSE))
    camera_motion: object = field(default_factory=StaticCamera)
    pixel_noise: int = 0

    def __post_init__(self):
        if self.frame_count < 1:
            raise InvalidConfig("frame_count must be >= 1")
        if self.background_kind not in BACKGROUND_KINDS:
            raise InvalidConfig(f"unknown background {self.background_kind!r}")
        if not (0 < self.width <= 8192 and 0 < self.height <= 8192):
            raise InvalidConfig(f"bad dimensions {self.width}x{self.height}")
        if not (0 <= self.pixel_noise <= 12):
            raise InvalidConfig("pixel_noise must stay within the chroma tolerance (0..12)")

    def object_pose_at(self, i: int) -> Pose6D:
        return self.trajectory.pose_at(i, self.frame_count)

    def camera_pose_at(self, i: int) -> Pose6D:
        return self.camera_motion.pose_at(i, self.frame_count)


# slight tilt keeps three faces visible so back-projected extents are well-conditioned
DEFAULT_OBJECT_POSE = Pose6D(
    (0.0, 0.0, 2.0),
    _q.mul(_q.from_axis_angle((0.0, 1.0, 0.0), 18.0), _q.from_axis_angle((1.0, 0.0, 0.0), 10.0)),
)


def default_scene_config(seed: int = 42, frame_count: int = 30, **overrides) -> SceneConfig:
    return SceneConfig(seed=seed, frame_count=frame_count, **overrides)


def _pose_to_json(p: Pose6D) -> dict:
    return {"t": list(p.t), "q": list(p.q)}


def _pose_from_json(d) -> Pose6D:
    return Pose6D(tuple(d["t"]), tuple(d["q"]))


def scene_config_to_json(cfg: SceneConfig) -> dict:
    traj: dict
    if isinstance(cfg.trajectory, StaticTrajectory):
        traj = {"kind": "static", "pose": _pose_to_json(cfg.trajectory.pose)}
    elif isinstance(cfg.trajectory, LinearTrajectory):
        traj = {
            "kind": "linear",
            "start": _pose_to_json(cfg.trajectory.start_pose),
            "end": _pose_to_json(cfg.trajectory.end_pose),
        }
    else:
        traj = {
            "kind": "orbit",
            "center": list(cfg.trajectory.center),
            "radius_m": cfg.trajectory.radius_m,
            "deg_per_frame": cfg.trajectory.angular_speed_deg_per_frame,
        }
    if isinstance(cfg.camera_motion, StaticCamera):
        cam = {"kind": "static", "pose": _pose_to_json(cfg.camera_motion.pose)}
    else:
        cam = {
            "kind": "linear",
            "start": _pose_to_json(cfg.camera_motion.start_pose),
            "end": _pose_to_json(cfg.camera_motion.end_pose),
        }
    return {
        "seed": cfg.seed,
        "width": cfg.width,
        "height": cfg.height,
        "frame_count": cfg.frame_count,
        "intrinsics": {
            "fx": cfg.intrinsics.fx, "fy": cfg.intrinsics.fy,
            "cx": cfg.intrinsics.cx, "cy": cfg.intrinsics.cy,
        },
        "background": cfg.background_kind,
        "object": {
            "extents": list(cfg.object.extents),
            "face_colors": [list(c) for c in cfg.object.face_colors],
        },
        "trajectory": traj,
        "camera": cam,
        "pixel_noise": cfg.pixel_noise,
    }


def scene_config_from_json(d: dict) -> SceneConfig:
    try:
        traj_d = d.get("trajectory", {"kind": "static", "pose": _pose_to_json(DEFAULT_OBJECT_POSE)})
        kind = traj_d["kind"]
        if kind == "static":
            trajectory = StaticTrajectory(_pose_from_json(traj_d["pose"]))
        elif kind == "linear":
            trajectory = LinearTrajectory(
                _pose_from_json(traj_d["start"]), _pose_from_json(traj_d["end"])
            )
        elif kind == "orbit":
            trajectory = OrbitTrajectory(
                tuple(traj_d["center"]), traj_d["radius_m"], traj_d["deg_per_frame"]
            )
        else:
            raise InvalidConfig(f"unknown trajectory kind {kind!r}")
        cam_d = d.get("camera", {"kind": "static", "pose": _pose_to_json(IDENTITY_POSE)})
        if cam_d["kind"] == "static":
            camera = StaticCamera(_pose_from_json(cam_d["pose"]))
        elif cam_d["kind"] == "linear":
            camera = LinearCamera(_pose_from_json(cam_d["start"]), _pose_from_json(cam_d["end"]))
        else:
            raise InvalidConfig(f"unknown camera kind {cam_d['kind']!r}")
        intr_d = d.get("intrinsics", {"fx": 300.0, "fy": 300.0, "cx": 160.0, "cy": 120.0})
        obj_d = d.get("object", {})
        obj = BoxObject(
            extents=tuple(obj_d.get("extents", (0.30, 0.24, 0.18))),
            face_colors=tuple(tuple(c) for c in obj_d.get("face_colors", DEFAULT_FACE_COLORS)),
        )
        return SceneConfig(
            seed=int(d["seed"]),
            width=int(d.get("width", 320)),
            height=int(d.get("height", 240)),
            frame_count=int(d.get("frame_count", 30)),
            intrinsics=PinholeIntrinsics(
                intr_d["fx"], intr_d["fy"], intr_d["cx"], intr_d["cy"]
            ),
            background_kind=d.get("background", "gradient"),
            object=obj,
            trajectory=trajectory,
            camera_motion=camera,
            pixel_noise=int(d.get("pixel_noise", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidConfig(f"bad scene config: {exc}") from exc
