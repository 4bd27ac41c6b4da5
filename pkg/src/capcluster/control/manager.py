"""Manager service: owns the registry, accepts agent connections over the
line protocol, runs the liveness sweeper, serves placement and summary
queries, and fans events out to subscribers (the WebSocket push and tests).
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from dataclasses import dataclass

from ..capacity import effective_rate, power_estimate, suite_from_json
from ..config import ClusterConfig
from ..monitor import Metric, MetricSample, MetricStore
from ..netboot import BootTrace, NetbootSim
from ..placement import Assignment, Infeasible, plan_placement, verify_assignment
from .protocol import LineConnection, MessageType, ProtocolError, ProtocolMessage
from .registry import (
    AppDescriptor,
    AppKind,
    Lifecycle,
    Registry,
    UnknownNode,
)


class ControlError(Exception):
    """A command failed; `code` matches the wire-level Error code."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


class EventBus:
    """Fan-out of JSON-able events to any number of subscriber queues."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put(event)


@dataclass
class _Session:
    mac: str
    conn: LineConnection
    session_id: int

    def __post_init__(self):
        self.pending: dict[int, queue.Queue] = {}
        self.lock = threading.Lock()

    def request(self, type_: MessageType, payload: dict, timeout: float) -> ProtocolMessage:
        waiter: queue.Queue = queue.Queue(maxsize=1)
        try:
            seq = self.conn.send(type_, payload)
        except ProtocolError as exc:
            raise ControlError("NodeUnavailable", str(exc)) from exc
        with self.lock:
            self.pending[seq] = waiter
        try:
            reply = waiter.get(timeout=timeout)
        except queue.Empty:
            raise ControlError("NodeUnavailable", "command timed out")
        finally:
            with self.lock:
                self.pending.pop(seq, None)
        if reply is None:
            raise ControlError("NodeUnavailable", "agent disconnected")
        return reply

    def resolve(self, reply: ProtocolMessage) -> bool:
        with self.lock:
            waiter = self.pending.get(reply.reply_to)
        if waiter is None:
            return False
        waiter.put(reply)
        return True

    def fail_pending(self) -> None:
        with self.lock:
            waiters = list(self.pending.values())
            self.pending.clear()
        for waiter in waiters:
            waiter.put(None)


class Manager:
    """The control-plane hub; one per cluster."""

    def __init__(
        self,
        config: ClusterConfig,
        journal_path=None,
        clock=time.time,
        agent_launcher=None,
        request_timeout: float = 10.0,
    ):
        self.config = config
        self.clock = clock
        self.request_timeout = request_timeout
        self.events = EventBus()
        self.registry = Registry(
            configured={mac: (nid, self.config.ips[mac]) for nid, mac in config.macs.items()},
            heartbeat=config.heartbeat,
            journal_path=journal_path,
            clock=clock,
            observer=self.events.publish,
        )
        self.monitor = MetricStore()
        for node in config.nodes:
            self.monitor.register_node(node.id)
        self.netboot = NetbootSim(config.netboot)
        self.boot_traces: dict[str, BootTrace] = {}  # node id -> latest trace
        self.assignment: Assignment | None = None
        self.apps: dict[str, AppDescriptor] = {}
        self.agent_launcher = agent_launcher
        self._sessions: dict[str, _Session] = {}
        self._sessions_lock = threading.Lock()
        self._server_sock: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self._stopping = threading.Event()
        for mac in config.macs.values():
            self.registry.ensure_tracked(mac)

    # -- lifecycle -------------------------------------------------------------

    def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
        sock.listen(64)
        self._server_sock = sock
        self.address = sock.getsockname()
        self._spawn(self._accept_loop, "manager-accept")
        self._spawn(self._sweep_loop, "manager-sweeper")
        return self.address

    def stop(self) -> None:
        self._stopping.set()
        if self._server_sock is not None:
            try:
                self._server_sock.close()
            except OSError:
                pass
        with self._sessions_lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            session.conn.close()
        for t in self._threads:
            t.join(timeout=2)

    def _spawn(self, target, name) -> None:
        t = threading.Thread(target=target, name=name, daemon=True)
        t.start()
        self._threads.append(t)

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                client, _ = self._server_sock.accept()
            except OSError:
                return
            threading.Thread(
                target=self._serve_connection, args=(client,), daemon=True
            ).start()

    def _sweep_loop(self) -> None:
        interval = self.config.heartbeat.interval
        while not self._stopping.wait(interval):
            self.registry.sweep()

    # -- agent connections -------------------------------------------------------

    def _serve_connection(self, sock: socket.socket) -> None:
        conn = LineConnection(sock)
        try:
            first = conn.recv()
        except ProtocolError:
            conn.close()
            return
        if first is None or first.type is not MessageType.REGISTER:
            conn.close()
            return
        mac = first.payload.get("mac", "")
        try:
            node = self.registry.register(mac, first.payload.get("capabilities"))
        except UnknownNode:
            try:
                conn.send(MessageType.ERROR,
                          {"code": "UnknownNode", "detail": mac}, reply_to=first.seq)
            except ProtocolError:
                pass
            conn.close()
            return

        session = _Session(mac=mac, conn=conn, session_id=node.session)
        with self._sessions_lock:
            old = self._sessions.get(mac)
            self._sessions[mac] = session
        if old is not None:
            old.conn.close()
            old.fail_pending()
        conn.send(
            MessageType.ACK,
            {"node": node.to_json(),
             "heartbeat_interval": self.config.heartbeat.interval},
            reply_to=first.seq,
        )
        try:
            for msg in conn.messages():
                self._dispatch(session, msg)
        except ProtocolError:
            pass
        finally:
            self._close_session(session)

    def _dispatch(self, session: _Session, msg: ProtocolMessage) -> None:
        if msg.type in (MessageType.ACK, MessageType.ERROR) and msg.reply_to is not None:
            session.resolve(msg)
        elif msg.type is MessageType.HEARTBEAT:
            self.registry.beat(session.mac)
        elif msg.type is MessageType.METRIC_BATCH:
            samples = []
            for s in msg.payload.get("samples", []):
                try:
                    samples.append(MetricSample(
                        node=s["node"], metric=Metric(s["metric"]),
                        value=float(s["value"]), timestamp=float(s["timestamp"]),
                    ))
                except (KeyError, ValueError):
                    continue
            if samples:
                self.monitor.ingest(samples)
                self.events.publish({
                    "event": "metrics",
                    "node": samples[0].node,
                    "samples": [
                        {"metric": s.metric.value, "value": s.value, "timestamp": s.timestamp}
                        for s in samples
                    ],
                })
        elif msg.type is MessageType.APP_STATUS:
            self.events.publish({"event": "app_status", "mac": session.mac,
                                 "payload": msg.payload})

    def _close_session(self, session: _Session) -> None:
        session.conn.close()
        session.fail_pending()
        with self._sessions_lock:
            if self._sessions.get(session.mac) is session:
                del self._sessions[session.mac]

    def session_for(self, node_id: str) -> _Session | None:
        mac = self.config.macs.get(node_id)
        with self._sessions_lock:
            return self._sessions.get(mac)

    # -- operations ---------------------------------------------------------------

    def power_on(self, node_id: str) -> BootTrace | None:
        """The operator's power button: netboot a client (the server skips
        the boot machine) and launch its agent when the boot lands."""
        node = self.config.node_by_id(node_id)  # KeyError for unknown ids
        mac = self.config.macs[node.id]
        if node_id == self.config.server_id:
            if self.agent_launcher is not None:
                self.agent_launcher(mac)
            return None
        self.registry.ensure_tracked(mac)
        state = self.registry.get(mac)
        if state.lifecycle not in (Lifecycle.OFFLINE,):
            return self.boot_traces.get(node_id)  # already up or coming up
        self.registry.mark_booting(mac)
        trace = self.netboot.power_on(mac, at=self.clock())
        self.boot_traces[node_id] = trace
        self.events.publish({"event": "boot", "node": node_id, "trace": trace.to_json()})
        if trace.agent_up:
            if self.agent_launcher is not None:
                self.agent_launcher(mac)
        else:
            self.registry.mark_boot_failed(mac)
        return trace

    def start_app(self, app: AppDescriptor) -> dict:
        """Idempotent app start; exactly one Ack or raised ControlError."""
        try:
            node = self.registry.by_node_id(app.node_id)
        except UnknownNode as exc:
            raise ControlError("UnknownNode", app.node_id) from exc
        if node.lifecycle not in (Lifecycle.READY, Lifecycle.CAPTURING):
            raise ControlError("NodeUnavailable", f"{app.node_id} is {node.lifecycle.value}")
        if app.kind is AppKind.CAPTURE_STREAM:
            placed_on = None if self.assignment is None else (
                self.assignment.placements.get(app.stream_id)
            )
            if placed_on != app.node_id:
                raise ControlError(
                    "NotPlaced", f"stream {app.stream_id} is not placed on {app.node_id}"
                )
        self.apps[app.app_id] = app
        if app.app_id in node.running_apps:
            return {"app_id": app.app_id, "already_running": True}
        session = self.session_for(app.node_id)
        if session is None:
            raise ControlError("NodeUnavailable", f"no agent session for {app.node_id}")
        reply = session.request(MessageType.START_APP, app.to_json(), self.request_timeout)
        if reply.type is MessageType.ERROR:
            raise ControlError(reply.payload.get("code", "Error"),
                               reply.payload.get("detail", ""))
        self.registry.app_started(node.mac, app.app_id)
        return {"app_id": app.app_id, "already_running": False}

    def stop_app(self, node_id: str, app_id: str) -> dict:
        try:
            node = self.registry.by_node_id(node_id)
        except UnknownNode as exc:
            raise ControlError("UnknownNode", node_id) from exc
        if app_id not in node.running_apps:
            return {"app_id": app_id, "already_stopped": True}
        session = self.session_for(node_id)
        if session is None:
            raise ControlError("NodeUnavailable", f"no agent session for {node_id}")
        reply = session.request(MessageType.STOP_APP, {"app_id": app_id}, self.request_timeout)
        if reply.type is MessageType.ERROR:
            raise ControlError(reply.payload.get("code", "Error"),
                               reply.payload.get("detail", ""))
        self.registry.app_stopped(node.mac, app_id)
        return {"app_id": app_id, "already_stopped": False}

    def plan(self, suite_doc: dict | None = None, assignment_doc: dict | None = None,
             apply: bool = False, run_duration: float | None = None) -> dict:
        """Placement service: plan a suite, or verify a hand-edited
        assignment for the what-if panel."""
        suite = self.config.suite if suite_doc is None else suite_from_json(suite_doc)
        nodes = list(self.config.nodes)
        if assignment_doc is not None:
            assignment = Assignment(placements=dict(assignment_doc))
            violations = verify_assignment(
                assignment, suite, nodes, self.config.jpeg_ratio,
                run_duration if run_duration is not None else suite.run_duration,
            )
            return {
                "feasible": not violations,
                "assignment": assignment.to_json(),
                "violations": [
                    {"node": v.node_id, "constraint": v.constraint.value,
                     "demanded": v.demanded, "available": v.available}
                    for v in violations
                ],
            }
        try:
            assignment = plan_placement(
                suite, nodes, self.config.jpeg_ratio, run_duration=run_duration
            )
        except Infeasible as exc:
            return {
                "feasible": False,
                "infeasible_stream": exc.stream_id,
                "reasons": {
                    nid: {"constraint": v.constraint.value,
                          "demanded": v.demanded, "available": v.available}
                    for nid, v in exc.reasons.items()
                },
            }
        if apply:
            self.set_assignment(assignment)
        return {"feasible": True, "assignment": assignment.to_json(), "violations": []}

    def set_assignment(self, assignment: Assignment) -> None:
        self.assignment = assignment
        self.apps = {}
        for stream_id, node_id in assignment.placements.items():
            app_id = f"cap-{stream_id}"
            self.apps[app_id] = AppDescriptor(
                app_id=app_id, kind=AppKind.CAPTURE_STREAM,
                node_id=node_id, stream_id=stream_id,
            )
        self.events.publish({"event": "assignment", "assignment": assignment.to_json()})

    def node_cpu_utilization(self, node_id: str) -> float:
        """Compression demand of the node's running capture apps over its
        budget, capped at 1."""
        try:
            state = self.registry.by_node_id(node_id)
        except UnknownNode:
            return 0.0
        spec = self.config.node_by_id(node_id)
        demand = 0.0
        for app_id in state.running_apps:
            app = self.apps.get(app_id)
            if app is not None and app.kind is AppKind.CAPTURE_STREAM:
                demand += self.config.suite.stream(app.stream_id).cpu_units
        if spec.cpu_budget <= 0:
            return 1.0 if demand > 0 else 0.0
        return min(1.0, demand / spec.cpu_budget)

    def cluster_summary(self) -> dict:
        nodes = self.registry.nodes()
        counts = self.registry.lifecycle_counts()
        ingest = 0.0
        for node in nodes:
            for app_id in node.running_apps:
                app = self.apps.get(app_id)
                if app is not None and app.kind is AppKind.CAPTURE_STREAM:
                    ingest += effective_rate(
                        self.config.suite.stream(app.stream_id), self.config.jpeg_ratio
                    )
        if nodes:
            utilization = sum(self.node_cpu_utilization(n.node_id) for n in nodes) / len(nodes)
            watts = power_estimate(self.config.power, utilization)
            disk_fill = self._mean_disk_fill(nodes)
        else:
            utilization, watts, disk_fill = 0.0, 0.0, 0.0
        return {
            "lifecycle_counts": counts,
            "ingest_rate": ingest,
            "cpu_utilization": utilization,
            "estimated_watts": watts,
            "disk_fill": disk_fill,
            "nodes": len(nodes),
        }

    def _mean_disk_fill(self, nodes) -> float:
        fills = []
        for node in nodes:
            points = self.monitor.query(Metric.DISK_UTIL, window=30.0,
                                        resolution=1, node=node.node_id)
            if points:
                fills.append(points[-1][1])
        return sum(fills) / len(fills) if fills else 0.0
