"""Per-session configuration and its JSON wire schema."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..compose import FIT_EXTENT, FULL_POSE, AnchorPolicy
from ..core import LatencyBudget, budget_for_fps
from ..errors import InvalidConfig
from ..gating import GatingConfig
from ..perception import CHROMA_KEY, INSTANCE_ID, TargetSpec

SERVER = "server"
CLIENT = "client"


@dataclass(frozen=True)
class SessionConfig:
    target: TargetSpec
    asset_id: str = "box"
    anchor: AnchorPolicy = field(default_factory=AnchorPolicy)
    gating: GatingConfig = field(default_factory=GatingConfig)
    budget: LatencyBudget = field(default_factory=lambda: budget_for_fps(30))
    compose_location: str = SERVER
    queue_capacity: int = 2
    initial_instance: int | None = None

    def __post_init__(self):
        if self.compose_location not in (SERVER, CLIENT):
            raise InvalidConfig(f"compose_location must be server|client, got {self.compose_location!r}")
        if self.queue_capacity < 1:
            raise InvalidConfig("queue_capacity must be >= 1")
        if self.initial_instance is not None and self.initial_instance < 0:
            raise InvalidConfig("initial_instance must be >= 0")

    def tracked_instance(self) -> int:
        """Initial tracked label: explicit override, else target label, else 1."""
        if self.initial_instance is not None:
            return self.initial_instance
        if self.target.mode == INSTANCE_ID:
            return self.target.label
        return 1


def default_session_config(**overrides) -> SessionConfig:
    """Session matching the default synthetic scene (chroma keys = box faces)."""
    from ..scenegen import DEFAULT_FACE_COLORS

    target = TargetSpec(mode=CHROMA_KEY, colors=DEFAULT_FACE_COLORS, tolerance=12)
    return SessionConfig(target=target, **overrides)


def session_config_to_json(cfg: SessionConfig) -> dict:
    if cfg.target.mode == CHROMA_KEY:
        target = {
            "mode": "chroma_key",
            "colors": [list(c) for c in cfg.target.colors],
            "tolerance": cfg.target.tolerance,
            "min_instance_px": cfg.target.min_instance_px,
        }
    else:
        target = {
            "mode": "instance_id",
            "label": cfg.target.label,
            "min_instance_px": cfg.target.min_instance_px,
        }
    g = cfg.gating
    out = {
        "target": target,
        "asset_id": cfg.asset_id,
        "anchor": {
            "mode": cfg.anchor.mode,
            "scale": cfg.anchor.scale,
            "align": cfg.anchor.align,
        },
        "gating": {
            "frame_passer_enabled": g.frame_passer_enabled,
            "early_stop_enabled": g.early_stop_enabled,
            "tile_px": g.tile_px,
            "tau_cover": g.tau_cover,
            "pose_eps_t": g.pose_eps_t,
            "pose_eps_r": g.pose_eps_r,
            "keyframe_interval": g.keyframe_interval,
            "es_sigma_t": g.es_sigma_t,
            "es_sigma_e": g.es_sigma_e,
            "es_threshold": g.es_threshold,
            "region_dilation_px": g.region_dilation_px,
        },
        "budget": {"target_fps": cfg.budget.target_fps},
        "compose_location": cfg.compose_location,
        "queue_capacity": cfg.queue_capacity,
    }
    if cfg.initial_instance is not None:
        out["initial_instance"] = cfg.initial_instance
    return out


def session_config_from_json(d: dict) -> SessionConfig:
    try:
        t = d["target"]
        if t["mode"] == "chroma_key":
            target = TargetSpec(
                mode=CHROMA_KEY,
                colors=tuple(tuple(c) for c in t["colors"]),
                tolerance=int(t.get("tolerance", 12)),
                min_instance_px=int(t.get("min_instance_px", 16)),
            )
        elif t["mode"] == "instance_id":
            target = TargetSpec(
                mode=INSTANCE_ID,
                label=int(t["label"]),
                min_instance_px=int(t.get("min_instance_px", 16)),
            )
        else:
            raise InvalidConfig(f"unknown target mode {t['mode']!r}")
        a = d.get("anchor", {})
        anchor = AnchorPolicy(
            mode=a.get("mode", FIT_EXTENT),
            scale=float(a.get("scale", 1.0)),
            align=a.get("align", FULL_POSE),
        )
        gating = GatingConfig(**d.get("gating", {}))
        fps = d.get("budget", {}).get("target_fps", 30)
        return SessionConfig(
            target=target,
            asset_id=d.get("asset_id", "box"),
            anchor=anchor,
            gating=gating,
            budget=budget_for_fps(fps),
            compose_location=d.get("compose_location", SERVER),
            queue_capacity=int(d.get("queue_capacity", 2)),
            initial_instance=(
                int(d["initial_instance"]) if "initial_instance" in d else None
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad session config: {exc}") from exc


def with_gating_toggles(cfg: SessionConfig, frame_passer: bool, early_stop: bool) -> SessionConfig:
    return replace(
        cfg,
        gating=replace(
            cfg.gating,
            frame_passer_enabled=frame_passer,
            early_stop_enabled=early_stop,
        ),
    )
