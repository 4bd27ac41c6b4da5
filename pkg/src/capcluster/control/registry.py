"""Node registry: the single source of truth for cluster state.

Lifecycle transitions follow a closed graph and are asserted on every
mutation. All mutations run under one lock and are appended to an NDJSON
journal, so a restarted manager replays the journal and recovers the same
node set, app state and lifecycle.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..config import HeartbeatPolicy


class Lifecycle(str, Enum):
    OFFLINE = "Offline"
    BOOTING = "Booting"
    READY = "Ready"
    CAPTURING = "Capturing"
    DEGRADED = "Degraded"


# Offline <-> Booting -> Ready <-> Capturing, any -> Degraded -> Ready|Offline
VALID_TRANSITIONS: dict[Lifecycle, frozenset[Lifecycle]] = {
    Lifecycle.OFFLINE: frozenset({Lifecycle.BOOTING, Lifecycle.DEGRADED}),
    Lifecycle.BOOTING: frozenset({Lifecycle.OFFLINE, Lifecycle.READY, Lifecycle.DEGRADED}),
    Lifecycle.READY: frozenset({Lifecycle.CAPTURING, Lifecycle.DEGRADED}),
    Lifecycle.CAPTURING: frozenset({Lifecycle.READY, Lifecycle.DEGRADED}),
    Lifecycle.DEGRADED: frozenset({Lifecycle.READY, Lifecycle.OFFLINE}),
}


class InvalidTransition(Exception):
    pass


class UnknownNode(Exception):
    pass


class AppKind(str, Enum):
    CAPTURE_STREAM = "CaptureStream"
    MONITOR = "Monitor"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class AppDescriptor:
    app_id: str
    kind: AppKind
    node_id: str
    stream_id: str | None = None  # CaptureStream only
    command: str | None = None  # Custom only

    def __post_init__(self) -> None:
        if self.kind is AppKind.CAPTURE_STREAM and not self.stream_id:
            raise ValueError("CaptureStream apps need a stream_id")
        if self.kind is AppKind.CUSTOM and not self.command:
            raise ValueError("Custom apps need a command")

    def to_json(self) -> dict:
        return {
            "app_id": self.app_id,
            "kind": self.kind.value,
            "node_id": self.node_id,
            "stream_id": self.stream_id,
            "command": self.command,
        }


@dataclass
class NodeState:
    node_id: str
    mac: str
    ip: str
    lifecycle: Lifecycle = Lifecycle.OFFLINE
    last_heartbeat: float = 0.0
    running_apps: set[str] = field(default_factory=set)
    session: int = 0  # bumps on each (re-)registration

    def check_invariants(self) -> None:
        if self.lifecycle is Lifecycle.CAPTURING:
            assert self.running_apps, "Capturing node must run at least one app"
        if self.lifecycle is Lifecycle.OFFLINE:
            assert not self.running_apps, "Offline node cannot run apps"

    def to_json(self) -> dict:
        return {
            "id": self.node_id,
            "mac": self.mac,
            "ip": self.ip,
            "lifecycle": self.lifecycle.value,
            "last_heartbeat": self.last_heartbeat,
            "running_apps": sorted(self.running_apps),
        }


@dataclass(frozen=True)
class Transition:
    node_id: str
    before: Lifecycle
    after: Lifecycle


class Registry:
    def __init__(
        self,
        configured: dict[str, tuple[str, str]],  # MAC -> (node id, ip)
        heartbeat: HeartbeatPolicy = HeartbeatPolicy(),
        journal_path: str | Path | None = None,
        clock=time.time,
        observer=None,
    ):
        self._lock = threading.RLock()
        self._configured = dict(configured)
        self.heartbeat_policy = heartbeat
        self.clock = clock
        self._observer = observer or (lambda event: None)
        self._nodes: dict[str, NodeState] = {}  # keyed by MAC
        self._journal_path = Path(journal_path) if journal_path else None
        if self._journal_path and self._journal_path.exists():
            self._replay()

    # -- journal ------------------------------------------------------------

    def _append_journal(self, event: dict) -> None:
        if self._journal_path is None:
            return
        with self._journal_path.open("a") as f:
            f.write(json.dumps(event, separators=(",", ":")) + "\n")

    def _replay(self) -> None:
        for line in self._journal_path.read_text().splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            kind = event["event"]
            if kind == "register":
                self._nodes[event["mac"]] = NodeState(
                    node_id=event["node_id"], mac=event["mac"], ip=event["ip"],
                    lifecycle=Lifecycle.READY, session=event.get("session", 1),
                )
            elif kind == "lifecycle" and event["mac"] in self._nodes:
                self._nodes[event["mac"]].lifecycle = Lifecycle(event["to"])
            elif kind == "app_start" and event["mac"] in self._nodes:
                self._nodes[event["mac"]].running_apps.add(event["app_id"])
            elif kind == "app_stop" and event["mac"] in self._nodes:
                self._nodes[event["mac"]].running_apps.discard(event["app_id"])
        for node in self._nodes.values():
            node.check_invariants()

    # -- transitions ---------------------------------------------------------

    def _transition(self, node: NodeState, to: Lifecycle) -> Transition:
        before = node.lifecycle
        if to is before:
            return Transition(node.node_id, before, to)
        if to not in VALID_TRANSITIONS[before]:
            raise InvalidTransition(f"{node.node_id}: {before.value} -> {to.value}")
        node.lifecycle = to
        if to is Lifecycle.OFFLINE:
            for app_id in sorted(node.running_apps):
                self._append_journal({"event": "app_stop", "mac": node.mac, "app_id": app_id})
            node.running_apps.clear()
        node.check_invariants()
        self._append_journal({"event": "lifecycle", "mac": node.mac,
                              "from": before.value, "to": to.value})
        transition = Transition(node.node_id, before, to)
        self._observer({"event": "node", "node": node.to_json()})
        return transition

    # -- operations ----------------------------------------------------------

    def register(self, mac: str, capabilities: dict | None = None) -> NodeState:
        """Insert or replace the session for a configured MAC; the node comes
        up Ready with no running apps."""
        with self._lock:
            if mac not in self._configured:
                raise UnknownNode(mac)
            node_id, ip = self._configured[mac]
            node = self._nodes.get(mac)
            if node is None:
                node = NodeState(node_id=node_id, mac=mac, ip=ip)
                self._nodes[mac] = node
            node.session += 1
            node.running_apps.clear()
            # walk the graph to Ready from wherever the node was
            if node.lifecycle is Lifecycle.OFFLINE:
                self._transition(node, Lifecycle.BOOTING)
            if node.lifecycle in (Lifecycle.BOOTING, Lifecycle.DEGRADED):
                self._transition(node, Lifecycle.READY)
            elif node.lifecycle is Lifecycle.CAPTURING:
                self._transition(node, Lifecycle.READY)
            node.last_heartbeat = self.clock()
            self._append_journal({
                "event": "register", "mac": mac, "node_id": node_id, "ip": ip,
                "session": node.session,
            })
            self._observer({"event": "node", "node": node.to_json()})
            return node

    def mark_booting(self, mac: str) -> None:
        with self._lock:
            node = self._require(mac)
            if node.lifecycle is Lifecycle.OFFLINE:
                self._transition(node, Lifecycle.BOOTING)

    def mark_boot_failed(self, mac: str) -> None:
        with self._lock:
            node = self._require(mac)
            if node.lifecycle is Lifecycle.BOOTING:
                self._transition(node, Lifecycle.OFFLINE)

    def ensure_tracked(self, mac: str) -> NodeState:
        """Track a configured node that has not registered yet (Offline)."""
        with self._lock:
            if mac not in self._configured:
                raise UnknownNode(mac)
            node = self._nodes.get(mac)
            if node is None:
                node_id, ip = self._configured[mac]
                node = self._nodes[mac] = NodeState(node_id=node_id, mac=mac, ip=ip)
            return node

    def beat(self, mac: str, now: float | None = None) -> None:
        with self._lock:
            node = self._require(mac)
            node.last_heartbeat = self.clock() if now is None else now
            if node.lifecycle is Lifecycle.DEGRADED:
                self._transition(node, Lifecycle.READY)
                if node.running_apps:
                    self._transition(node, Lifecycle.CAPTURING)

    def app_started(self, mac: str, app_id: str) -> None:
        with self._lock:
            node = self._require(mac)
            if app_id in node.running_apps:
                return
            node.running_apps.add(app_id)
            self._append_journal({"event": "app_start", "mac": mac, "app_id": app_id})
            if node.lifecycle is Lifecycle.READY:
                self._transition(node, Lifecycle.CAPTURING)
            else:
                self._observer({"event": "node", "node": node.to_json()})

    def app_stopped(self, mac: str, app_id: str) -> None:
        with self._lock:
            node = self._require(mac)
            if app_id not in node.running_apps:
                return
            node.running_apps.discard(app_id)
            self._append_journal({"event": "app_stop", "mac": mac, "app_id": app_id})
            if node.lifecycle is Lifecycle.CAPTURING and not node.running_apps:
                self._transition(node, Lifecycle.READY)
            else:
                self._observer({"event": "node", "node": node.to_json()})

    def sweep(self, now: float | None = None) -> list[Transition]:
        """Liveness pass: missed-heartbeat nodes degrade, then go offline."""
        now = self.clock() if now is None else now
        policy = self.heartbeat_policy
        transitions: list[Transition] = []
        with self._lock:
            for node in self._nodes.values():
                if node.lifecycle in (Lifecycle.OFFLINE, Lifecycle.BOOTING):
                    continue
                missed = (now - node.last_heartbeat) / policy.interval
                if missed > policy.offline_after:
                    if node.lifecycle is not Lifecycle.DEGRADED:
                        transitions.append(self._transition(node, Lifecycle.DEGRADED))
                    transitions.append(self._transition(node, Lifecycle.OFFLINE))
                elif missed > policy.degraded_after:
                    if node.lifecycle is not Lifecycle.DEGRADED:
                        transitions.append(self._transition(node, Lifecycle.DEGRADED))
        return transitions

    # -- queries ---------------------------------------------------------------

    def _require(self, mac: str) -> NodeState:
        node = self._nodes.get(mac)
        if node is None:
            raise UnknownNode(mac)
        return node

    def get(self, mac: str) -> NodeState:
        with self._lock:
            return self._require(mac)

    def by_node_id(self, node_id: str) -> NodeState:
        with self._lock:
            for node in self._nodes.values():
                if node.node_id == node_id:
                    return node
        raise UnknownNode(node_id)

    def nodes(self) -> list[NodeState]:
        with self._lock:
            return sorted(self._nodes.values(), key=lambda n: n.node_id)

    def lifecycle_counts(self) -> dict[str, int]:
        counts = {state.value: 0 for state in Lifecycle}
        with self._lock:
            for node in self._nodes.values():
                counts[node.lifecycle.value] += 1
        return counts
