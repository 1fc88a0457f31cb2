"""Client simulator: streams a bundle to the edge server (or runs the
pipeline in-process), receives results, optionally composes locally, and
writes composed frames plus a latency report.

Exit codes: 0 ok, 2 connect failure, 3 protocol error, 4 source error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import socket
import threading
import time
from pathlib import Path

from .. import PROTO_VERSION
from ..compose import AssetStore, render_asset
from ..core import Frame, StageTimings
from ..core.timing import STAGES, percentile_summary
from ..errors import DrError
from ..pipeline import (
    CLIENT,
    ResultRecord,
    SessionConfig,
    build_run_report,
    default_session_config,
    end_to_end_once,
    record_from_result,
    session_config_from_json,
    session_config_to_json,
    write_results_dir,
)
from ..scenegen import (
    SequenceBundle,
    generate_sequence,
    prepend_background_warmup,
    read_bundle,
    scene_config_from_json,
)
from ..transport import (
    ERR_CONTROL,
    ERR_STAGE,
    Bye,
    ErrorMsg,
    Hello,
    HelloAck,
    Metrics,
    ResultMsg,
    StreamDecoder,
    encode,
    frame_to_msg,
    msg_placement,
    msg_pose,
    rgb_array,
)
from ..transport.messages import (
    FLAG_BYPASS,
    FLAG_KEYFRAME,
    FLAG_NO_TARGET,
    FLAG_REUSE,
)
from ..pipeline.result import GateFlags
from .server import parse_addr

log = logging.getLogger("drpipe.client")

EXIT_OK = 0
EXIT_CONNECT = 2
EXIT_PROTOCOL = 3
EXIT_SOURCE = 4

OFFLOAD = "offload"
LOCAL = "local"

_ACK_TIMEOUT_S = 10.0
_IDLE_TIMEOUT_S = 10.0


@dataclasses.dataclass
class ClientRunSpec:
    out_dir: str
    session_cfg: SessionConfig
    server_addr: str = "127.0.0.1:7401"
    bundle_dir: str | None = None
    scene_cfg: dict | None = None
    fps: float = 30.0
    mode: str = OFFLOAD
    afap: bool = False
    warmup: bool = False

    def __post_init__(self):
        if self.mode not in (OFFLOAD, LOCAL):
            raise ValueError(f"mode must be offload|local, got {self.mode!r}")
        if not self.fps > 0:
            raise ValueError("fps must be positive")


class SourceError(DrError):
    pass


def load_source(spec: ClientRunSpec) -> SequenceBundle:
    try:
        if spec.bundle_dir is not None:
            bundle = read_bundle(spec.bundle_dir)
        elif spec.scene_cfg is not None:
            bundle = generate_sequence(scene_config_from_json(spec.scene_cfg))
        else:
            raise SourceError("need a bundle directory or a scene config")
    except (DrError, OSError) as exc:
        raise SourceError(str(exc)) from exc
    return prepend_background_warmup(bundle) if spec.warmup else bundle


def flags_from_wire(bits: int) -> GateFlags:
    return GateFlags(
        frame_passer_bypass=bool(bits & FLAG_BYPASS),
        early_stop_reuse=bool(bits & FLAG_REUSE),
        keyframe=bool(bits & FLAG_KEYFRAME),
        no_target=bool(bits & FLAG_NO_TARGET),
    )


def _safe_timings(wire_timings: dict) -> StageTimings:
    return StageTimings({k: int(v) for k, v in wire_timings.items() if k in STAGES})


def _compose_client_side(record: ResultRecord, base: Frame, assets: AssetStore, asset_id: str):
    if record.placement is None or record.inpainted_pixels is None:
        return record
    inpainted = base.with_pixels(record.inpainted_pixels)
    composed, silhouette = render_asset(
        inpainted, assets.get(asset_id), record.placement, base.intrinsics
    )
    record.composed_pixels = composed.pixels
    record.silhouette = silhouette
    return record


def run_local(spec: ClientRunSpec, bundle: SequenceBundle) -> tuple[int, dict]:
    results, report = end_to_end_once(bundle, spec.session_cfg)
    records = [record_from_result(r) for r in results]
    if spec.session_cfg.compose_location == CLIENT:
        assets = AssetStore()
        frames = {f.frame_id: f for f in bundle.frames}
        records = [
            _compose_client_side(rec, frames[rec.frame_id], assets, spec.session_cfg.asset_id)
            for rec in records
        ]
    report["mode"] = LOCAL
    write_results_dir(spec.out_dir, records, report)
    return EXIT_OK, report


def run_offload(spec: ClientRunSpec, bundle: SequenceBundle) -> tuple[int, dict | None]:
    host, port = parse_addr(spec.server_addr)
    try:
        sock = socket.create_connection((host, port), timeout=_ACK_TIMEOUT_S)
    except OSError as exc:
        log.error("connect to %s failed: %s", spec.server_addr, exc)
        return EXIT_CONNECT, None
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    decoder = StreamDecoder()
    send_lock = threading.Lock()

    def send_msg(msg):
        data = encode(msg)
        with send_lock:
            sock.sendall(data)

    cfg_json = json.dumps(session_config_to_json(spec.session_cfg)).encode("utf-8")
    send_msg(Hello(PROTO_VERSION, cfg_json))

    ack = _wait_for_ack(sock, decoder)
    if ack is None:
        sock.close()
        return EXIT_PROTOCOL, None
    log.info("session %d established", ack.session_id)

    frames = list(bundle.frames)
    last_id = frames[-1].frame_id
    send_us: dict[int, tuple[int, int]] = {}
    sender_done = threading.Event()
    protocol_failed = threading.Event()

    def sender():
        t0 = time.monotonic()
        period = 1.0 / spec.fps
        for i, frame in enumerate(frames):
            if protocol_failed.is_set():
                break
            if not spec.afap:
                delay = t0 + i * period - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
            msg = frame_to_msg(frame)
            t_enc = time.perf_counter_ns()
            data = encode(msg)
            try:
                with send_lock:
                    sock.sendall(data)
            except OSError:
                break
            t_sent = time.perf_counter_ns()
            send_us[frame.frame_id] = (t_enc // 1000, (t_sent - t_enc) // 1000)
        sender_done.set()

    sender_thread = threading.Thread(target=sender, daemon=True)
    sender_thread.start()

    results: dict[int, ResultMsg] = {}
    rtt_us: dict[int, int] = {}
    metrics_reports: list[dict] = []
    stage_errors: list[str] = []
    sock.settimeout(0.5)
    last_activity = time.monotonic()
    while True:
        try:
            data = sock.recv(1 << 16)
            if not data:
                break
            last_activity = time.monotonic()
        except socket.timeout:
            data = b""
        except OSError:
            break
        if data:
            for msg in decoder.feed(data):
                if isinstance(msg, ResultMsg):
                    results[msg.frame_id] = msg
                    sent = send_us.get(msg.frame_id)
                    if sent is not None:
                        rtt_us[msg.frame_id] = time.perf_counter_ns() // 1000 - sent[0]
                elif isinstance(msg, Metrics):
                    try:
                        metrics_reports.append(json.loads(msg.report_json))
                    except json.JSONDecodeError:
                        pass
                elif isinstance(msg, ErrorMsg):
                    if msg.code in (ERR_STAGE, ERR_CONTROL):
                        stage_errors.append(f"{msg.code}: {msg.detail}")
                        log.warning("server error %d: %s", msg.code, msg.detail)
                    else:
                        log.error("protocol error %d: %s", msg.code, msg.detail)
                        protocol_failed.set()
        if protocol_failed.is_set():
            break
        if sender_done.is_set():
            if last_id in results:
                break
            if time.monotonic() - last_activity > _IDLE_TIMEOUT_S:
                log.error("timed out waiting for results (%d/%d)", len(results), len(frames))
                protocol_failed.set()
                break
    try:
        send_msg(Bye())
    except OSError:
        pass
    sock.close()
    sender_thread.join(timeout=2)
    if protocol_failed.is_set():
        return EXIT_PROTOCOL, None

    report = _offload_report(spec, bundle, results, rtt_us, send_us, stage_errors)
    records = _offload_records(spec, bundle, results, rtt_us)
    write_results_dir(spec.out_dir, records, report)
    return EXIT_OK, report


def _wait_for_ack(sock, decoder) -> HelloAck | None:
    deadline = time.monotonic() + _ACK_TIMEOUT_S
    sock.settimeout(0.5)
    while time.monotonic() < deadline:
        try:
            data = sock.recv(1 << 16)
        except socket.timeout:
            continue
        except OSError:
            return None
        if not data:
            return None
        for msg in decoder.feed(data):
            if isinstance(msg, HelloAck):
                return msg
            if isinstance(msg, ErrorMsg):
                log.error("server refused: %d %s", msg.code, msg.detail)
                return None
    return None


def _offload_records(spec, bundle, results, rtt_us) -> list[ResultRecord]:
    assets = AssetStore()
    frames = {f.frame_id: f for f in bundle.frames}
    records = []
    for fid in sorted(results):
        msg = results[fid]
        rec = ResultRecord(
            frame_id=fid,
            flags=flags_from_wire(msg.flags),
            timings=_safe_timings(msg.timings),
            pose=msg_pose(msg),
            placement=msg_placement(msg),
            inpainted_pixels=rgb_array(msg.inpainted_rgb, msg.width, msg.height),
            composed_pixels=(
                None if msg.composed_rgb is None
                else rgb_array(msg.composed_rgb, msg.width, msg.height)
            ),
            rtt_us=rtt_us.get(fid),
        )
        if spec.session_cfg.compose_location == CLIENT and fid in frames:
            rec = _compose_client_side(rec, frames[fid], assets, spec.session_cfg.asset_id)
        records.append(rec)
    return records


def _offload_report(spec, bundle, results, rtt_us, send_us, stage_errors) -> dict:
    lite = [
        ResultRecord(
            frame_id=fid,
            flags=flags_from_wire(results[fid].flags),
            timings=_safe_timings(results[fid].timings),
        )
        for fid in sorted(results)
    ]
    sent = len(send_us)
    report = build_run_report(lite, dropped=sent - len(results))
    report["mode"] = OFFLOAD
    report["sent"] = sent
    up = [send_us[fid][1] for fid in sorted(results) if fid in send_us]
    if up:
        report["stage_us"]["transport_up"] = percentile_summary(up)
    down = []
    for fid in sorted(results):
        if fid in rtt_us and fid in send_us:
            server_total = results[fid].timings.get("total", 0)
            down.append(max(0, rtt_us[fid] - send_us[fid][1] - int(server_total)))
    if down:
        report["stage_us"]["transport_down"] = percentile_summary(down)
    if rtt_us:
        report["rtt_us"] = percentile_summary(list(rtt_us.values()))
    if stage_errors:
        report["stage_errors"] = stage_errors
    return report


def run_client(spec: ClientRunSpec) -> int:
    try:
        bundle = load_source(spec)
    except SourceError as exc:
        log.error("source error: %s", exc)
        return EXIT_SOURCE
    if spec.mode == LOCAL:
        code, _ = run_local(spec, bundle)
        return code
    code, _ = run_offload(spec, bundle)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="drclient", description=__doc__)
    parser.add_argument("--server", default="127.0.0.1:7401")
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--bundle", help="bundle directory to stream")
    src.add_argument("--generate", help="scene config JSON to generate and stream")
    parser.add_argument("--fps", type=float, default=30.0)
    parser.add_argument("--session", help="session config JSON file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--mode", choices=[OFFLOAD, LOCAL], default=OFFLOAD)
    parser.add_argument("--afap", action="store_true", help="stream as fast as possible")
    parser.add_argument("--warmup", action="store_true",
                        help="stream the object-absent background first")
    parser.add_argument("--log", default="info")
    args = parser.parse_args(argv)

    from .server import setup_logging

    setup_logging(args.log)
    if args.session:
        session_cfg = session_config_from_json(
            json.loads(Path(args.session).read_text(encoding="utf-8"))
        )
    else:
        session_cfg = default_session_config()
    scene_cfg = None
    if args.generate:
        scene_cfg = json.loads(Path(args.generate).read_text(encoding="utf-8"))
    spec = ClientRunSpec(
        out_dir=args.out,
        session_cfg=session_cfg,
        server_addr=args.server,
        bundle_dir=args.bundle,
        scene_cfg=scene_cfg,
        fps=args.fps,
        mode=args.mode,
        afap=args.afap,
        warmup=args.warmup,
    )
    return run_client(spec)


if __name__ == "__main__":
    raise SystemExit(main())
