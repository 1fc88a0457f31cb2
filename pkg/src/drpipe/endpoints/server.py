"""Edge server daemon: TCP + websocket endpoints hosting pipeline sessions.

One session per connection. Viewers attach to an existing session by id or
spawn a demo session fed by a server-side bundle loop; they observe results
and send Control, never frames.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import logging
import os
import signal
import socket
import threading
import time

from .. import PROTO_VERSION
from ..compose import AssetStore
from ..errors import DrError, NoInstanceAtPoint, StageFailure
from ..pipeline import (
    FrameScheduler,
    ResultRecord,
    Session,
    SessionConfig,
    build_run_report,
    default_session_config,
    session_config_from_json,
)
from ..scenegen import default_scene_config, generate_sequence, prepend_background_warmup, scene_config_from_json
from ..transport import (
    ERR_BAD_VERSION,
    ERR_CONTROL,
    ERR_PROTOCOL,
    ERR_STAGE,
    ERR_TOO_MANY_SESSIONS,
    Bye,
    Control,
    ErrorMsg,
    FrameMsg,
    Hello,
    HelloAck,
    StreamDecoder,
    encode,
    make_metrics,
    msg_to_frame,
    parse_control,
    result_to_msg,
)
from .websocket import WebSocketConnection, WebSocketError, server_handshake

log = logging.getLogger("drpipe.server")

METRICS_EVERY = 30
DEMO_FPS = 30.0


@dataclasses.dataclass
class ServerConfig:
    tcp_addr: str = "127.0.0.1:7401"
    ws_addr: str = "127.0.0.1:7402"
    asset_dir: str | None = None
    max_sessions: int = 8
    log_level: str = "info"

    def __post_init__(self):
        if self.max_sessions < 1:
            raise ValueError("max_sessions must be >= 1")


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


class TcpSink:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._lock = threading.Lock()

    def send_wire(self, data: bytes) -> None:
        with self._lock:
            self.sock.sendall(data)

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class WsSink:
    def __init__(self, ws: WebSocketConnection):
        self.ws = ws

    def send_wire(self, data: bytes) -> None:
        self.ws.send_binary(data)

    def close(self) -> None:
        self.ws.close()


class SessionHandle:
    """One live session: scheduler, worker thread, observers, metrics window."""

    def __init__(self, sid: int, session: Session, queue_capacity: int):
        self.id = sid
        self.session = session
        self.scheduler = FrameScheduler(queue_capacity)
        self.epoch_us = int(time.time() * 1e6)
        self._observers: list = []
        self._obs_lock = threading.Lock()
        self._window: list[ResultRecord] = []
        self._processed = 0
        self._stop = threading.Event()
        self._demo_thread: threading.Thread | None = None
        self.worker = threading.Thread(target=self._worker_loop, daemon=True)
        self.worker.start()

    def add_observer(self, sink) -> None:
        with self._obs_lock:
            self._observers.append(sink)

    def remove_observer(self, sink) -> None:
        with self._obs_lock:
            if sink in self._observers:
                self._observers.remove(sink)

    def broadcast(self, data: bytes) -> None:
        with self._obs_lock:
            sinks = list(self._observers)
        for sink in sinks:
            try:
                sink.send_wire(data)
            except OSError:
                self.remove_observer(sink)

    def _worker_loop(self) -> None:
        while not self._stop.is_set():
            frame = self.scheduler.pop(timeout=0.2)
            if frame is None:
                continue
            try:
                result = self.session.process_frame(frame)
            except StageFailure as exc:
                log.warning("session %d frame %d: %s", self.id, frame.frame_id, exc)
                self.broadcast(encode(ErrorMsg(ERR_STAGE, str(exc))))
                continue
            except DrError as exc:
                self.broadcast(encode(ErrorMsg(ERR_PROTOCOL, str(exc))))
                continue
            self.broadcast(encode(result_to_msg(result)))
            self._window.append(
                ResultRecord(frame_id=result.frame_id, flags=result.flags, timings=result.timings)
            )
            if len(self._window) > METRICS_EVERY:
                self._window = self._window[-METRICS_EVERY:]
            self._processed += 1
            if self._processed % METRICS_EVERY == 0:
                self.push_metrics()

    def push_metrics(self) -> None:
        if not self._window:
            return
        report = build_run_report(self._window, dropped=self.scheduler.dropped)
        gating = self.session.cfg.gating
        report["gating"] = {
            "frame_passer": gating.frame_passer_enabled,
            "early_stop": gating.early_stop_enabled,
        }
        report["budget_us"] = self.session.cfg.budget.budget_us
        self.broadcast(encode(make_metrics(report, self.id, len(self._window))))

    def start_demo(self, scene_cfg) -> None:
        bundle = prepend_background_warmup(generate_sequence(scene_cfg))

        def loop():
            fid = 0
            period = 1.0 / DEMO_FPS
            next_t = time.monotonic()
            frames = bundle.frames
            while not self._stop.is_set():
                for frame in frames:
                    if self._stop.is_set():
                        return
                    stamped = dataclasses.replace(
                        frame, frame_id=fid, capture_ts=int(fid * period * 1e6)
                    )
                    fid += 1
                    self.scheduler.submit(stamped)
                    next_t += period
                    delay = next_t - time.monotonic()
                    if delay > 0:
                        time.sleep(delay)
                # the object-absent warmup plays once; afterwards loop the live part
                frames = bundle.frames[1:]

        self._demo_thread = threading.Thread(target=loop, daemon=True)
        self._demo_thread.start()

    def shutdown(self) -> None:
        self._stop.set()
        self.scheduler.close()
        if self._demo_thread is not None:
            self._demo_thread.join(timeout=2)
        self.worker.join(timeout=2)
        self.session.close()


class DrServer:
    def __init__(self, cfg: ServerConfig):
        self.cfg = cfg
        self.assets = AssetStore(cfg.asset_dir)
        self.registry: dict[int, SessionHandle] = {}
        self._reg_lock = threading.Lock()
        self._sid = itertools.count(1)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._tcp_sock: socket.socket | None = None
        self._ws_sock: socket.socket | None = None
        self.tcp_port = 0
        self.ws_port = 0

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        host, port = parse_addr(self.cfg.tcp_addr)
        self._tcp_sock = _listen(host, port)
        self.tcp_port = self._tcp_sock.getsockname()[1]
        host, port = parse_addr(self.cfg.ws_addr)
        self._ws_sock = _listen(host, port)
        self.ws_port = self._ws_sock.getsockname()[1]
        for sock, handler in ((self._tcp_sock, self._handle_tcp), (self._ws_sock, self._handle_ws)):
            t = threading.Thread(target=self._accept_loop, args=(sock, handler), daemon=True)
            t.start()
            self._threads.append(t)
        log.info("listening tcp=%d ws=%d", self.tcp_port, self.ws_port)

    def stop(self) -> None:
        self._stop.set()
        for sock in (self._tcp_sock, self._ws_sock):
            if sock is not None:
                try:
                    sock.close()
                except OSError:
                    pass
        with self._reg_lock:
            handles = list(self.registry.values())
            self.registry.clear()
        for handle in handles:
            handle.shutdown()

    def wait(self) -> None:
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        self.stop()

    # -- sessions ------------------------------------------------------------

    def create_session(self, session_cfg: SessionConfig) -> SessionHandle | None:
        with self._reg_lock:
            if len(self.registry) >= self.cfg.max_sessions:
                return None
            sid = next(self._sid)
            session = Session(session_cfg, asset_store=self.assets)
            handle = SessionHandle(sid, session, session_cfg.queue_capacity)
            self.registry[sid] = handle
            return handle

    def destroy_session(self, handle: SessionHandle) -> None:
        with self._reg_lock:
            self.registry.pop(handle.id, None)
        handle.shutdown()

    def get_session(self, sid: int) -> SessionHandle | None:
        with self._reg_lock:
            return self.registry.get(sid)

    # -- connection handling ---------------------------------------------

    def _accept_loop(self, sock: socket.socket, handler) -> None:
        while not self._stop.is_set():
            try:
                conn, addr = sock.accept()
            except OSError:
                return
            t = threading.Thread(target=handler, args=(conn, addr), daemon=True)
            t.start()

    def _handle_tcp(self, sock: socket.socket, addr) -> None:
        log.info("tcp connection from %s", addr)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sink = TcpSink(sock)
        conn = _Connection(self, sink)
        try:
            while True:
                data = sock.recv(1 << 16)
                if not data:
                    break
                if not conn.on_bytes(data):
                    break
        except OSError:
            pass
        finally:
            conn.teardown()
            sink.close()

    def _handle_ws(self, sock: socket.socket, addr) -> None:
        log.info("ws connection from %s", addr)
        try:
            server_handshake(sock)
        except WebSocketError as exc:
            log.warning("ws handshake failed: %s", exc)
            sock.close()
            return
        ws = WebSocketConnection(sock)
        sink = WsSink(ws)
        conn = _Connection(self, sink)
        try:
            while True:
                message = ws.recv_message()
                if message is None:
                    break
                if not conn.on_bytes(message):
                    break
        except WebSocketError as exc:
            log.warning("ws error: %s", exc)
        finally:
            conn.teardown()
            sink.close()


class _Connection:
    """Protocol state machine shared by both carriers."""

    def __init__(self, server: DrServer, sink):
        self.server = server
        self.sink = sink
        self.decoder = StreamDecoder()
        self.handle: SessionHandle | None = None
        self.owns_session = False
        self.is_viewer = False

    def send(self, msg) -> None:
        try:
            self.sink.send_wire(encode(msg))
        except OSError:
            pass

    def on_bytes(self, data: bytes) -> bool:
        for msg in self.decoder.feed(data):
            if not self.on_message(msg):
                return False
        return True

    def on_message(self, msg) -> bool:
        if self.handle is None:
            if not isinstance(msg, Hello):
                self.send(ErrorMsg(ERR_PROTOCOL, "expected Hello"))
                return False
            return self._on_hello(msg)
        if isinstance(msg, FrameMsg):
            return self._on_frame(msg)
        if isinstance(msg, Control):
            return self._on_control(msg)
        if isinstance(msg, Bye):
            return False
        self.send(ErrorMsg(ERR_PROTOCOL, f"unexpected {type(msg).__name__}"))
        return True

    def _on_hello(self, msg: Hello) -> bool:
        if msg.proto_version != PROTO_VERSION:
            self.send(ErrorMsg(ERR_BAD_VERSION, f"unsupported proto {msg.proto_version}"))
            return False
        try:
            cfg_json = json.loads(msg.session_cfg_json.decode("utf-8") or "{}")
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            self.send(ErrorMsg(ERR_PROTOCOL, f"bad session config: {exc}"))
            return False
        viewer = cfg_json.get("viewer")
        try:
            if viewer and "attach" in viewer:
                handle = self.server.get_session(int(viewer["attach"]))
                if handle is None:
                    self.send(ErrorMsg(ERR_PROTOCOL, f"no session {viewer['attach']}"))
                    return False
                self.handle = handle
                self.is_viewer = True
                handle.add_observer(self.sink)
            elif viewer:
                scene = viewer.get("scene")
                scene_cfg = (
                    scene_config_from_json(scene) if scene
                    else default_scene_config(seed=7, frame_count=90)
                )
                session_cfg = (
                    session_config_from_json(cfg_json) if "target" in cfg_json
                    else default_session_config(initial_instance=0)
                )
                handle = self.server.create_session(session_cfg)
                if handle is None:
                    self.send(ErrorMsg(ERR_TOO_MANY_SESSIONS, "session limit reached"))
                    return False
                self.handle = handle
                self.owns_session = True
                self.is_viewer = True
                handle.add_observer(self.sink)
                handle.start_demo(scene_cfg)
            else:
                session_cfg = session_config_from_json(cfg_json)
                handle = self.server.create_session(session_cfg)
                if handle is None:
                    self.send(ErrorMsg(ERR_TOO_MANY_SESSIONS, "session limit reached"))
                    return False
                self.handle = handle
                self.owns_session = True
                handle.add_observer(self.sink)
        except DrError as exc:
            self.send(ErrorMsg(ERR_PROTOCOL, str(exc)))
            return False
        self.send(HelloAck(self.handle.id, self.handle.epoch_us))
        return True

    def _on_frame(self, msg: FrameMsg) -> bool:
        if self.is_viewer:
            self.send(ErrorMsg(ERR_PROTOCOL, "viewers do not send frames"))
            return True
        try:
            frame = msg_to_frame(msg)
        except (DrError, ValueError) as exc:
            self.send(ErrorMsg(ERR_PROTOCOL, f"bad frame: {exc}"))
            return True
        self.handle.scheduler.submit(frame)
        return True

    def _on_control(self, msg: Control) -> bool:
        try:
            action = parse_control(msg)
        except DrError as exc:
            self.send(ErrorMsg(ERR_CONTROL, str(exc)))
            return True
        if action["action"] == "get_metrics":
            self.handle.push_metrics()
            return True
        try:
            self.handle.session.apply_control(action)
        except NoInstanceAtPoint as exc:
            self.send(ErrorMsg(ERR_CONTROL, str(exc)))
        except DrError as exc:
            self.send(ErrorMsg(ERR_CONTROL, str(exc)))
        return True

    def teardown(self) -> None:
        if self.handle is None:
            return
        if self.owns_session:
            self.server.destroy_session(self.handle)
        else:
            self.handle.remove_observer(self.sink)
        self.handle = None


def _listen(host: str, port: int) -> socket.socket:
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    sock.listen(32)
    return sock


def serve(cfg: ServerConfig) -> None:
    server = DrServer(cfg)
    server.start()
    signal.signal(signal.SIGTERM, lambda *_: server.stop())
    server.wait()


def setup_logging(level: str) -> None:
    level = os.environ.get("DRPIPE_LOG", level)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        force=True,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="drserve", description=__doc__)
    parser.add_argument("--tcp", default="127.0.0.1:7401", help="TCP listen address")
    parser.add_argument("--ws", default="127.0.0.1:7402", help="websocket listen address")
    parser.add_argument("--assets", default=None, help="directory of .mesh asset files")
    parser.add_argument("--max-sessions", type=int, default=8)
    parser.add_argument("--log", default="info")
    args = parser.parse_args(argv)
    setup_logging(args.log)
    cfg = ServerConfig(
        tcp_addr=args.tcp,
        ws_addr=args.ws,
        asset_dir=args.assets,
        max_sessions=args.max_sessions,
        log_level=args.log,
    )
    try:
        serve(cfg)
    except OSError as exc:
        print(f"bind failure: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
