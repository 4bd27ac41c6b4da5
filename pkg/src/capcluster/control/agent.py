"""Agent: the per-node process. Registers with the manager over TCP, sends
heartbeats, starts and stops apps on command, and runs the node's capture
pipeline, streaming per-second metrics back as it goes.
"""

from __future__ import annotations

import socket
import threading
import time

from ..capacity import SensorStream
from ..config import ClusterConfig, PipelineDefaults
from ..dataplane import Pipeline, PipelineConfig, Summary, summarize
from ..monitor import Metric
from ..placement import NodeSpec
from .protocol import LineConnection, MessageType, ProtocolError, ProtocolMessage
from .registry import AppKind


class AgentError(Exception):
    pass


class CaptureEngine:
    """The node's single pipeline; all capture apps share it."""

    def __init__(self, node: NodeSpec, defaults: PipelineDefaults, jpeg_ratio: float):
        self.node = node
        self.lock = threading.Lock()
        self.pipeline = Pipeline(PipelineConfig(
            streams=(),
            jpeg_ratio=jpeg_ratio,
            cpu_budget=node.cpu_budget,
            disk_write_rate=node.disk_write_rate,
            disk_capacity=node.disk_capacity,
            queue_bound=defaults.queue_bound,
            tick=defaults.tick,
        ))
        self.ticks_per_second = max(1, int(round(1.0 / defaults.tick)))
        self.reports = []

    def add_stream(self, stream: SensorStream) -> None:
        with self.lock:
            self.pipeline.add_stream(stream)

    def remove_stream(self, stream_id: str) -> None:
        with self.lock:
            self.pipeline.remove_stream(stream_id)

    def capturing(self) -> bool:
        with self.lock:
            return bool(self.pipeline.stream_ids)

    def run_one_second(self, timestamp: float) -> list[dict]:
        """Advance one second of simulated time; returns the metric samples
        describing it."""
        with self.lock:
            written = dropped = net_rx = 0
            last = None
            for _ in range(self.ticks_per_second):
                last = self.pipeline.step()
                written += last.written
                dropped += last.dropped
                net_rx += last.net_rx
                self.reports.append(last)
        node = self.node
        disk_util = last.disk_used / node.disk_capacity if node.disk_capacity > 0 else 0.0
        io_load = written / node.disk_write_rate if node.disk_write_rate > 0 else 0.0
        return [
            {"metric": Metric.CPU_UTIL.value, "value": min(1.0, last.cpu_util), "timestamp": timestamp},
            {"metric": Metric.MEM_USED.value, "value": float(last.queue_depth), "timestamp": timestamp},
            {"metric": Metric.DISK_UTIL.value, "value": min(1.0, disk_util), "timestamp": timestamp},
            {"metric": Metric.IO_LOAD.value, "value": io_load, "timestamp": timestamp},
            {"metric": Metric.NET_RX.value, "value": float(net_rx), "timestamp": timestamp},
            {"metric": Metric.NET_TX.value, "value": 0.0, "timestamp": timestamp},
            {"metric": Metric.DROPS.value, "value": float(dropped), "timestamp": timestamp},
        ]

    def summary(self) -> Summary:
        with self.lock:
            return summarize(self.reports, disk_capacity=self.node.disk_capacity)

    def conservation(self) -> dict[str, int]:
        with self.lock:
            return self.pipeline.conservation()


class Agent:
    def __init__(
        self,
        mac: str,
        host: str,
        port: int,
        *,
        node_spec: NodeSpec,
        streams: dict[str, SensorStream],
        jpeg_ratio: float = 4.0,
        pipeline: PipelineDefaults = PipelineDefaults(),
        heartbeat_interval: float = 1.0,
        real_time: bool = True,
        clock=time.time,
    ):
        self.mac = mac
        self.addr = (host, port)
        self.node_spec = node_spec
        self.streams = streams
        self.heartbeat_interval = heartbeat_interval
        self.real_time = real_time
        self.clock = clock
        self.engine = CaptureEngine(node_spec, pipeline, jpeg_ratio)
        self.apps: dict[str, dict] = {}
        self._apps_lock = threading.Lock()
        self.conn: LineConnection | None = None
        self.node_state: dict | None = None
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []

    @classmethod
    def from_config(cls, config: ClusterConfig, mac: str, host: str, port: int,
                    real_time: bool = True, clock=time.time) -> "Agent":
        node_id = config.node_id_for_mac(mac)
        return cls(
            mac, host, port,
            node_spec=config.node_by_id(node_id),
            streams={s.id: s for s in config.suite.streams},
            jpeg_ratio=config.jpeg_ratio,
            pipeline=config.pipeline,
            heartbeat_interval=config.heartbeat.interval,
            real_time=real_time,
            clock=clock,
        )

    # -- connection ----------------------------------------------------------

    def connect(self, timeout: float = 10.0) -> dict:
        sock = socket.create_connection(self.addr, timeout=timeout)
        sock.settimeout(None)
        self.conn = LineConnection(sock)
        seq = self.conn.send(MessageType.REGISTER, {
            "mac": self.mac,
            "capabilities": {
                "node_id": self.node_spec.id,
                "usb3_ports": self.node_spec.usb3_ports,
                "gige_ports": self.node_spec.gige_ports,
            },
        })
        reply = self.conn.recv()
        if reply is None:
            raise AgentError("manager closed the connection during registration")
        if reply.type is MessageType.ERROR:
            raise AgentError(f"registration rejected: {reply.payload.get('code')}")
        assert reply.reply_to == seq
        self.node_state = reply.payload.get("node")
        return reply.payload

    def start(self) -> None:
        """Run the reader and heartbeat threads (after connect)."""
        self._spawn(self._reader_loop, f"agent-{self.mac}-reader")
        self._spawn(self._heartbeat_loop, f"agent-{self.mac}-heartbeat")
        if self.real_time:
            self._spawn(self._capture_loop, f"agent-{self.mac}-capture")

    def run_forever(self) -> None:
        self.connect()
        self.start()
        while not self._stopping.is_set():
            time.sleep(0.2)
            if self.conn is None or self.conn.closed:
                break

    def close(self) -> None:
        self._stopping.set()
        if self.conn is not None:
            self.conn.close()
        for t in self._threads:
            t.join(timeout=2)

    def _spawn(self, target, name) -> None:
        t = threading.Thread(target=target, name=name, daemon=True)
        t.start()
        self._threads.append(t)

    # -- protocol handling -----------------------------------------------------

    def _reader_loop(self) -> None:
        try:
            for msg in self.conn.messages():
                self._handle(msg)
        except ProtocolError:
            pass
        finally:
            self._stopping.set()

    def _handle(self, msg: ProtocolMessage) -> None:
        if msg.type is MessageType.START_APP:
            self._handle_start(msg)
        elif msg.type is MessageType.STOP_APP:
            self._handle_stop(msg)

    def _handle_start(self, msg: ProtocolMessage) -> None:
        app_id = msg.payload.get("app_id", "")
        kind = msg.payload.get("kind")
        with self._apps_lock:
            if app_id in self.apps:
                self.conn.send(MessageType.ACK, {"app_id": app_id}, reply_to=msg.seq)
                return
            if kind == AppKind.CAPTURE_STREAM.value:
                stream = self.streams.get(msg.payload.get("stream_id", ""))
                if stream is None:
                    self.conn.send(
                        MessageType.ERROR,
                        {"code": "UnknownStream", "detail": msg.payload.get("stream_id")},
                        reply_to=msg.seq,
                    )
                    return
                self.engine.add_stream(stream)
            self.apps[app_id] = dict(msg.payload)
        self.conn.send(MessageType.ACK, {"app_id": app_id}, reply_to=msg.seq)
        self.conn.send(MessageType.APP_STATUS, {"app_id": app_id, "status": "running"})

    def _handle_stop(self, msg: ProtocolMessage) -> None:
        app_id = msg.payload.get("app_id", "")
        with self._apps_lock:
            app = self.apps.pop(app_id, None)
            if app is not None and app.get("kind") == AppKind.CAPTURE_STREAM.value:
                self.engine.remove_stream(app.get("stream_id", ""))
        self.conn.send(MessageType.ACK, {"app_id": app_id}, reply_to=msg.seq)
        if app is not None:
            self.conn.send(MessageType.APP_STATUS, {"app_id": app_id, "status": "stopped"})

    def _heartbeat_loop(self) -> None:
        while not self._stopping.wait(self.heartbeat_interval):
            try:
                self.conn.send(MessageType.HEARTBEAT, {"mac": self.mac})
            except ProtocolError:
                return

    # -- capture ---------------------------------------------------------------

    def _send_batch(self, samples: list[dict]) -> None:
        node_id = self.node_spec.id
        batch = [{"node": node_id, **s} for s in samples]
        try:
            self.conn.send(MessageType.METRIC_BATCH, {"samples": batch})
        except ProtocolError:
            pass

    def _capture_loop(self) -> None:
        """Real-time mode: tick wall-clock seconds while capture apps run."""
        while not self._stopping.is_set():
            if not self.engine.capturing():
                time.sleep(0.05)
                continue
            started = time.monotonic()
            samples = self.engine.run_one_second(self.clock())
            self._send_batch(samples)
            elapsed = time.monotonic() - started
            if elapsed < 1.0:
                self._stopping.wait(1.0 - elapsed)

    def run_capture(self, duration: float) -> Summary:
        """Accelerated mode: run `duration` simulated seconds flat out,
        streaming one metric batch per simulated second."""
        if self.real_time:
            raise AgentError("run_capture is for real_time=False agents")
        t0 = self.clock()
        for k in range(int(round(duration))):
            samples = self.engine.run_one_second(t0 + k + 1)
            self._send_batch(samples)
        return self.engine.summary()
