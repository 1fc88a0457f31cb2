import dataclasses
import json
import socket
import time

import numpy as np
import pytest

from drpipe import PROTO_VERSION
from drpipe.core import imageio
from drpipe.endpoints.client import (
    EXIT_CONNECT,
    EXIT_OK,
    EXIT_SOURCE,
    LOCAL,
    OFFLOAD,
    ClientRunSpec,
    run_client,
)
from drpipe.endpoints.server import DrServer, ServerConfig
from drpipe.endpoints.websocket import WebSocketConnection, client_handshake
from drpipe.pipeline import default_session_config, session_config_to_json
from drpipe.perception import TargetSpec
from drpipe.compose import AnchorPolicy
from drpipe.scenegen import default_scene_config, generate_sequence, write_bundle
from drpipe.transport import (
    ERR_BAD_VERSION,
    ERR_CONTROL,
    ERR_TOO_MANY_SESSIONS,
    Bye,
    ErrorMsg,
    FrameMsg,
    Hello,
    HelloAck,
    Metrics,
    ResultMsg,
    StreamDecoder,
    encode,
    frame_to_msg,
    make_control,
)

from conftest import make_frame


@pytest.fixture()
def server():
    srv = DrServer(ServerConfig(tcp_addr="127.0.0.1:0", ws_addr="127.0.0.1:0"))
    srv.start()
    yield srv
    srv.stop()


class WireClient:
    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=5)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.dec = StreamDecoder()
        self.inbox = []

    def send(self, msg):
        self.sock.sendall(encode(msg))

    def recv_until(self, pred, timeout=8.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            for i, m in enumerate(self.inbox):
                if pred(m):
                    return self.inbox.pop(i)
            self.sock.settimeout(0.2)
            try:
                data = self.sock.recv(1 << 16)
            except socket.timeout:
                continue
            if not data:
                break
            self.inbox.extend(self.dec.feed(data))
        raise TimeoutError("no matching message")

    def hello(self, cfg_dict):
        self.send(Hello(PROTO_VERSION, json.dumps(cfg_dict).encode()))
        return self.recv_until(lambda m: isinstance(m, (HelloAck, ErrorMsg)))

    def roundtrip(self, frame):
        self.send(frame_to_msg(frame))
        return self.recv_until(
            lambda m: isinstance(m, ResultMsg) and m.frame_id == frame.frame_id
        )

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


def two_block_frame(i, colors=((200, 30, 30), (30, 30, 200))):
    px = np.zeros((240, 320, 3), dtype=np.uint8)
    px[60:100, 60:100] = colors[0]
    px[60:100, 180:220] = colors[1]
    depth = np.full((240, 320), 2.0, dtype=np.float32)
    return make_frame(px, depth=depth, frame_id=i, ts=i * 33333)


def two_block_session_cfg():
    return default_session_config(
        anchor=AnchorPolicy(mode="fixed_scale", scale=0.1, align="translation_only"),
    )


# -- protocol-level -----------------------------------------------------------


def test_unsupported_proto_version_rejected(server):
    c = WireClient(server.tcp_port)
    c.send(Hello(PROTO_VERSION + 7, b"{}"))
    msg = c.recv_until(lambda m: isinstance(m, ErrorMsg))
    assert msg.code == ERR_BAD_VERSION
    c.close()


def test_frame_before_hello_rejected(server):
    c = WireClient(server.tcp_port)
    frame = two_block_frame(0)
    c.send(frame_to_msg(frame))
    msg = c.recv_until(lambda m: isinstance(m, ErrorMsg))
    assert msg.code == 1002
    c.close()


def test_session_roundtrip_and_metrics_cadence(server, default_bundle):
    cfg = default_session_config()
    c = WireClient(server.tcp_port)
    ack = c.hello(session_config_to_json(cfg))
    assert isinstance(ack, HelloAck)
    frame0 = default_bundle.frames[0]
    metrics = []
    for i in range(31):
        frame = dataclasses.replace(frame0, frame_id=i, capture_ts=i * 33333)
        result = c.roundtrip(frame)
        assert result.frame_id == i
        metrics += [m for m in c.inbox if isinstance(m, Metrics)]
    deadline = time.monotonic() + 2
    while not metrics and time.monotonic() < deadline:
        try:
            metrics.append(c.recv_until(lambda m: isinstance(m, Metrics), timeout=1))
        except TimeoutError:
            break
    assert metrics, "metrics should be pushed every 30 processed frames"
    report = json.loads(metrics[0].report_json)
    assert report["window_frames"] >= 1
    assert "total_us" in report
    c.send(Bye())
    c.close()


def test_get_metrics_on_demand(server, default_bundle):
    c = WireClient(server.tcp_port)
    assert isinstance(c.hello(session_config_to_json(default_session_config())), HelloAck)
    c.roundtrip(default_bundle.frames[0])
    c.send(make_control({"action": "get_metrics"}))
    m = c.recv_until(lambda m: isinstance(m, Metrics))
    assert json.loads(m.report_json)["session_id"] >= 1
    c.close()


def test_select_object_switches_instance(server):
    c = WireClient(server.tcp_port)
    cfg = two_block_session_cfg()
    cfg = dataclasses.replace(
        cfg,
        target=TargetSpec(colors=((200, 30, 30), (30, 30, 200)), tolerance=4),
    )
    assert isinstance(c.hello(session_config_to_json(cfg)), HelloAck)
    r0 = c.roundtrip(two_block_frame(0))
    assert r0.pose is not None and r0.pose[0] < 0  # tracking block 1 (left)
    c.send(make_control({"action": "select_object", "u": 190, "v": 70}))
    r1 = c.roundtrip(two_block_frame(1))
    assert r1.pose is not None and r1.pose[0] > 0  # now tracking block 2 (right)
    # background click keeps the selection and reports the miss
    c.send(make_control({"action": "select_object", "u": 0, "v": 0}))
    err = c.recv_until(lambda m: isinstance(m, ErrorMsg))
    assert err.code == ERR_CONTROL and "no instance" in err.detail
    r2 = c.roundtrip(two_block_frame(2))
    assert r2.pose[0] > 0
    c.close()


def test_max_sessions_enforced():
    srv = DrServer(
        ServerConfig(tcp_addr="127.0.0.1:0", ws_addr="127.0.0.1:0", max_sessions=1)
    )
    srv.start()
    try:
        c1 = WireClient(srv.tcp_port)
        assert isinstance(c1.hello(session_config_to_json(default_session_config())), HelloAck)
        c2 = WireClient(srv.tcp_port)
        msg = c2.hello(session_config_to_json(default_session_config()))
        assert isinstance(msg, ErrorMsg) and msg.code == ERR_TOO_MANY_SESSIONS
        c1.close()
        c2.close()
    finally:
        srv.stop()


def test_abrupt_disconnect_frees_capacity(server, default_bundle):
    c1 = WireClient(server.tcp_port)
    assert isinstance(c1.hello(session_config_to_json(default_session_config())), HelloAck)
    c1.roundtrip(default_bundle.frames[0])
    c1.sock.close()  # no Bye
    time.sleep(0.3)
    c2 = WireClient(server.tcp_port)
    assert isinstance(c2.hello(session_config_to_json(default_session_config())), HelloAck)
    c2.roundtrip(dataclasses.replace(default_bundle.frames[0], frame_id=0))
    c2.send(Bye())
    c2.close()


def test_session_isolation_interleaved_vs_sequential(server):
    """Two interleaved sessions must produce exactly what two solo runs produce."""
    bundles = [
        generate_sequence(default_scene_config(seed=42, frame_count=4)),
        generate_sequence(
            default_scene_config(seed=77, frame_count=4, background_kind="noise_texture")
        ),
    ]
    cfg = session_config_to_json(default_session_config())

    interleaved = [[], []]
    clients = [WireClient(server.tcp_port), WireClient(server.tcp_port)]
    for c in clients:
        assert isinstance(c.hello(cfg), HelloAck)
    for i in range(4):
        for k in (0, 1):
            interleaved[k].append(clients[k].roundtrip(bundles[k].frames[i]))
    for c in clients:
        c.send(Bye())
        c.close()

    for k in (0, 1):
        solo = WireClient(server.tcp_port)
        assert isinstance(solo.hello(cfg), HelloAck)
        for i in range(4):
            want = solo.roundtrip(bundles[k].frames[i])
            got = interleaved[k][i]
            assert got.inpainted_rgb == want.inpainted_rgb
            assert got.composed_rgb == want.composed_rgb
            assert got.pose == want.pose
            assert got.flags == want.flags
        solo.send(Bye())
        solo.close()


# -- run_client ---------------------------------------------------------------


def _bundle_on_disk(tmp_path, frame_count=6):
    bundle = generate_sequence(default_scene_config(seed=42, frame_count=frame_count))
    path = tmp_path / "bundle"
    write_bundle(bundle, path)
    return path


@pytest.mark.parametrize("compose_location", ["server", "client"])
def test_offload_equals_local(server, tmp_path, compose_location):
    bundle_dir = _bundle_on_disk(tmp_path)
    cfg = default_session_config(compose_location=compose_location)
    local = ClientRunSpec(
        out_dir=str(tmp_path / "local"), session_cfg=cfg,
        bundle_dir=str(bundle_dir), mode=LOCAL, warmup=True,
    )
    offload = ClientRunSpec(
        out_dir=str(tmp_path / "offload"), session_cfg=cfg,
        server_addr=f"127.0.0.1:{server.tcp_port}",
        bundle_dir=str(bundle_dir), mode=OFFLOAD, fps=60.0, warmup=True,
    )
    assert run_client(local) == EXIT_OK
    assert run_client(offload) == EXIT_OK
    # frame 0 is the object-absent warmup: no placement, hence no composed raster
    assert not (tmp_path / "local" / "composed_00000.ppm").exists()
    assert not (tmp_path / "offload" / "composed_00000.ppm").exists()
    for i in range(1, 7):
        a = imageio.read_ppm(tmp_path / "local" / f"composed_{i:05d}.ppm")
        b = imageio.read_ppm(tmp_path / "offload" / f"composed_{i:05d}.ppm")
        assert np.array_equal(a, b), f"composed frame {i} differs"
    for i in range(7):
        a = imageio.read_ppm(tmp_path / "local" / f"inpainted_{i:05d}.ppm")
        b = imageio.read_ppm(tmp_path / "offload" / f"inpainted_{i:05d}.ppm")
        assert np.array_equal(a, b), f"inpainted frame {i} differs"


def test_unreachable_server_exit_2(tmp_path):
    spec = ClientRunSpec(
        out_dir=str(tmp_path / "out"), session_cfg=default_session_config(),
        server_addr="127.0.0.1:1", bundle_dir=None,
        scene_cfg={"seed": 1, "frame_count": 2}, mode=OFFLOAD,
    )
    assert run_client(spec) == EXIT_CONNECT
    assert not (tmp_path / "out").exists()


def test_bad_source_exit_4(tmp_path):
    spec = ClientRunSpec(
        out_dir=str(tmp_path / "out"), session_cfg=default_session_config(),
        bundle_dir=str(tmp_path / "missing"), mode=LOCAL,
    )
    assert run_client(spec) == EXIT_SOURCE


def test_client_report_contents(server, tmp_path):
    bundle_dir = _bundle_on_disk(tmp_path)
    spec = ClientRunSpec(
        out_dir=str(tmp_path / "out"), session_cfg=default_session_config(),
        server_addr=f"127.0.0.1:{server.tcp_port}",
        bundle_dir=str(bundle_dir), mode=OFFLOAD, fps=60.0, warmup=True,
    )
    assert run_client(spec) == EXIT_OK
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["mode"] == OFFLOAD
    assert report["sent"] == 7
    assert report["dropped"] == 0
    assert "rtt_us" in report and report["rtt_us"]["p50"] > 0
    assert "transport_up" in report["stage_us"]
    assert "transport_down" in report["stage_us"]
    assert report["bypass_rate"] > 0.5


# -- websocket carrier ----------------------------------------------------


def open_ws(port):
    s = socket.create_connection(("127.0.0.1", port), timeout=5)
    client_handshake(s, "127.0.0.1")
    return WebSocketConnection(s, mask_outbound=True)


class WsWire:
    def __init__(self, port):
        self.ws = open_ws(port)
        self.dec = StreamDecoder()
        self.inbox = []

    def send(self, msg):
        self.ws.send_binary(encode(msg))

    def recv_until(self, pred, timeout=8.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            for i, m in enumerate(self.inbox):
                if pred(m):
                    return self.inbox.pop(i)
            self.ws.sock.settimeout(0.3)
            try:
                data = self.ws.recv_message()
            except Exception:
                continue
            if data is None:
                break
            self.inbox.extend(self.dec.feed(data))
        raise TimeoutError("no matching ws message")

    def close(self):
        self.ws.close()


def test_ws_demo_session_and_click(server):
    v = WsWire(server.ws_port)
    v.send(Hello(PROTO_VERSION, json.dumps(
        {"viewer": {"demo": True, "scene": {"seed": 7, "frame_count": 12}}}
    ).encode()))
    ack = v.recv_until(lambda m: isinstance(m, HelloAck))
    assert ack.session_id >= 1
    r = v.recv_until(lambda m: isinstance(m, ResultMsg))
    assert r.flags & 0x08  # nothing selected yet: no_target
    # click once the object is actually on screen (frame 0 is the warmup)
    r = v.recv_until(lambda m: isinstance(m, ResultMsg) and m.frame_id >= 2)
    last_seen = r.frame_id
    for m in list(v.inbox):
        if isinstance(m, ResultMsg):
            last_seen = max(last_seen, m.frame_id)
    v.inbox.clear()
    v.send(make_control({"action": "select_object", "u": 160, "v": 120}))
    # no_target must flip within 3 frames processed after the click lands
    # (+1 allows one in-flight frame racing the control message)
    post_click = []
    while len(post_click) < 6:
        r = v.recv_until(lambda m: isinstance(m, ResultMsg))
        if r.frame_id <= last_seen + 1:
            continue
        post_click.append(bool(r.flags & 0x08))
        if not post_click[-1]:
            break
    assert False in post_click[:3]
    v.send(Bye())
    v.close()


def test_viewer_never_sends_frames_enforced(server):
    v = WsWire(server.ws_port)
    v.send(Hello(PROTO_VERSION, json.dumps({"viewer": {"demo": True, "scene": {"seed": 3, "frame_count": 6}}}).encode()))
    v.recv_until(lambda m: isinstance(m, HelloAck))
    frame = two_block_frame(0)
    v.send(frame_to_msg(frame))
    err = v.recv_until(lambda m: isinstance(m, ErrorMsg))
    assert err.code == 1002 and "frame" in err.detail.lower()
    v.close()


def test_ws_attach_observes_tcp_session(server, default_bundle):
    c = WireClient(server.tcp_port)
    ack = c.hello(session_config_to_json(default_session_config()))
    assert isinstance(ack, HelloAck)
    v = WsWire(server.ws_port)
    v.send(Hello(PROTO_VERSION, json.dumps({"viewer": {"attach": ack.session_id}}).encode()))
    assert isinstance(v.recv_until(lambda m: isinstance(m, HelloAck)), HelloAck)
    result = c.roundtrip(default_bundle.frames[0])
    observed = v.recv_until(lambda m: isinstance(m, ResultMsg))
    assert observed.frame_id == result.frame_id
    assert observed.inpainted_rgb == result.inpainted_rgb
    v.close()
    c.send(Bye())
    c.close()


def test_ws_attach_missing_session(server):
    v = WsWire(server.ws_port)
    v.send(Hello(PROTO_VERSION, json.dumps({"viewer": {"attach": 4242}}).encode()))
    err = v.recv_until(lambda m: isinstance(m, (ErrorMsg, HelloAck)))
    assert isinstance(err, ErrorMsg)
    v.close()


def test_drpipe_log_env_overrides_flag(monkeypatch):
    import logging

    from drpipe.endpoints.server import setup_logging

    monkeypatch.setenv("DRPIPE_LOG", "error")
    setup_logging("debug")
    assert logging.getLogger().getEffectiveLevel() == logging.ERROR
    monkeypatch.delenv("DRPIPE_LOG")
