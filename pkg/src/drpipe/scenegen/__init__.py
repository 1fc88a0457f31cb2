from .bundle import (
    SequenceBundle,
    bundle_hash,
    manifest_bytes,
    manifest_dict,
    prepend_background_warmup,
    read_bundle,
    write_bundle,
)
from .config import (
    BACKGROUND_KINDS,
    DEFAULT_FACE_COLORS,
    DEFAULT_OBJECT_POSE,
    GENERIC_BOX_SYMMETRY,
    BoxObject,
    LinearCamera,
    LinearTrajectory,
    OrbitTrajectory,
    SceneConfig,
    StaticCamera,
    StaticTrajectory,
    default_scene_config,
    scene_config_from_json,
    scene_config_to_json,
)
from .generate import (
    CAPTURE_STEP_US,
    PLANE_Z_M,
    generate_sequence,
    project_point,
    render_background,
    scene_box_asset,
)

__all__ = [
    "SequenceBundle",
    "bundle_hash",
    "manifest_bytes",
    "manifest_dict",
    "prepend_background_warmup",
    "read_bundle",
    "write_bundle",
    "BACKGROUND_KINDS",
    "DEFAULT_FACE_COLORS",
    "DEFAULT_OBJECT_POSE",
    "GENERIC_BOX_SYMMETRY",
    "BoxObject",
    "LinearCamera",
    "LinearTrajectory",
    "OrbitTrajectory",
    "SceneConfig",
    "StaticCamera",
    "StaticTrajectory",
    "default_scene_config",
    "scene_config_from_json",
    "scene_config_to_json",
    "CAPTURE_STEP_US",
    "PLANE_Z_M",
    "generate_sequence",
    "project_point",
    "render_background",
    "scene_box_asset",
]
