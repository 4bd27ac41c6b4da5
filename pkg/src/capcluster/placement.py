"""Stream-to-node placement.

The planner is first-fit-decreasing over effective disk-write demand, with
stream ids breaking ties and nodes scanned in declared order, so identical
inputs always produce identical assignments. An exhaustive search over small
instances acts as the feasibility oracle for the heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .capacity import (
    DEFAULT_JPEG_RATIO,
    Compression,
    Interface,
    SensorStream,
    SensorSuite,
    effective_rate,
)
from .units import MB, TB, format_rate


@dataclass(frozen=True)
class NodeSpec:
    """Static capacities of one node.

    gige_ports counts sensor-usable ports only; the port wired into the
    cluster switch is not available for placement.
    """

    id: str
    usb3_ports: int = 2
    gige_ports: int = 1
    cpu_budget: float = 2.0
    disk_write_rate: float = 1_700 * MB
    disk_capacity: float = 2 * TB

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("NodeSpec.id must be non-empty")
        if self.usb3_ports < 0 or self.gige_ports < 0:
            raise ValueError("port counts must be >= 0")
        if self.cpu_budget < 0 or self.disk_write_rate < 0 or self.disk_capacity < 0:
            raise ValueError("budgets and capacities must be >= 0")


class Constraint(str, Enum):
    USB3_PORTS = "Usb3Ports"
    GIGE_PORTS = "GigePorts"
    CPU_BUDGET = "CpuBudget"
    DISK_WRITE = "DiskWrite"
    DISK_CAPACITY = "DiskCapacity"


@dataclass(frozen=True)
class Violation:
    node_id: str
    constraint: Constraint
    demanded: float
    available: float

    def __post_init__(self) -> None:
        if self.demanded <= self.available:
            raise ValueError("a Violation requires demanded > available")


@dataclass
class NodeLedger:
    """Resource usage accumulated on one node by its placed streams."""

    usb3_used: int = 0
    gige_used: int = 0
    cpu_used: float = 0.0
    disk_write_used: float = 0.0
    streams: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "cpu_used": self.cpu_used,
            "disk_write_used": self.disk_write_used,
            "gige_used": self.gige_used,
            "streams": sorted(self.streams),
            "usb3_used": self.usb3_used,
        }


@dataclass
class Assignment:
    """A stream -> node mapping plus per-node usage ledgers."""

    placements: dict[str, str] = field(default_factory=dict)
    ledgers: dict[str, NodeLedger] = field(default_factory=dict)

    def node_for(self, stream_id: str) -> str:
        return self.placements[stream_id]

    def streams_on(self, node_id: str) -> list[str]:
        return sorted(sid for sid, nid in self.placements.items() if nid == node_id)

    def to_json(self) -> dict:
        return {
            "placements": {sid: self.placements[sid] for sid in sorted(self.placements)},
            "ledgers": {nid: self.ledgers[nid].to_json() for nid in sorted(self.ledgers)},
        }


class Infeasible(Exception):
    """Raised when a stream cannot be placed; carries the first offender."""

    def __init__(self, stream_id: str, reasons: dict[str, Violation]):
        self.stream_id = stream_id
        self.reasons = reasons
        detail = "; ".join(
            f"{nid}: {v.constraint.value} ({_fmt_amount(v)})" for nid, v in reasons.items()
        )
        super().__init__(f"stream {stream_id!r} cannot be placed: {detail}" if detail
                         else f"stream {stream_id!r} cannot be placed: no nodes")


def _fmt_amount(v: Violation) -> str:
    if v.constraint in (Constraint.DISK_WRITE,):
        return f"{format_rate(v.demanded)} > {format_rate(v.available)}"
    return f"{v.demanded:g} > {v.available:g}"


def _first_conflict(
    stream: SensorStream,
    rate: float,
    node: NodeSpec,
    ledger: NodeLedger,
    run_duration: float | None,
) -> Violation | None:
    """The first capacity the stream would exceed on this node, if any."""
    if stream.interface is Interface.USB3 and ledger.usb3_used + 1 > node.usb3_ports:
        return Violation(node.id, Constraint.USB3_PORTS, ledger.usb3_used + 1, node.usb3_ports)
    if stream.interface is Interface.GIGE and ledger.gige_used + 1 > node.gige_ports:
        return Violation(node.id, Constraint.GIGE_PORTS, ledger.gige_used + 1, node.gige_ports)
    if ledger.cpu_used + stream.cpu_units > node.cpu_budget:
        return Violation(node.id, Constraint.CPU_BUDGET,
                         ledger.cpu_used + stream.cpu_units, node.cpu_budget)
    if ledger.disk_write_used + rate > node.disk_write_rate:
        return Violation(node.id, Constraint.DISK_WRITE,
                         ledger.disk_write_used + rate, node.disk_write_rate)
    if run_duration is not None:
        storage = (ledger.disk_write_used + rate) * run_duration
        if storage > node.disk_capacity:
            return Violation(node.id, Constraint.DISK_CAPACITY, storage, node.disk_capacity)
    return None


def _apply(stream: SensorStream, rate: float, ledger: NodeLedger) -> None:
    if stream.interface is Interface.USB3:
        ledger.usb3_used += 1
    else:
        ledger.gige_used += 1
    ledger.cpu_used += stream.cpu_units
    ledger.disk_write_used += rate
    ledger.streams.append(stream.id)


def plan_placement(
    suite: SensorSuite,
    nodes: list[NodeSpec],
    jpeg_ratio: float = DEFAULT_JPEG_RATIO,
    *,
    run_duration: float | None = None,
    max_jpeg_per_node: int | None = 1,
) -> Assignment:
    """Place every stream or raise Infeasible.

    Streams are taken largest effective disk-write demand first (ties by id);
    each goes to the first node, in declared order, with room on every
    constraint. max_jpeg_per_node (default 1) caps compressed cameras per
    node as a packing policy; it is not a feasibility constraint and the
    verifier does not check it. Storage capacity is only enforced when
    run_duration is given, since it depends on how long the run lasts.
    """
    _check_unique_nodes(nodes)
    order = sorted(suite.streams, key=lambda s: (-effective_rate(s, jpeg_ratio), s.id))
    assignment = Assignment(ledgers={n.id: NodeLedger() for n in nodes})
    jpeg_count = {n.id: 0 for n in nodes}

    for stream in order:
        rate = effective_rate(stream, jpeg_ratio)
        reasons: dict[str, Violation] = {}
        placed = False
        for node in nodes:
            ledger = assignment.ledgers[node.id]
            if (
                max_jpeg_per_node is not None
                and stream.compress is Compression.JPEG
                and jpeg_count[node.id] >= max_jpeg_per_node
            ):
                continue
            conflict = _first_conflict(stream, rate, node, ledger, run_duration)
            if conflict is None:
                _apply(stream, rate, ledger)
                assignment.placements[stream.id] = node.id
                if stream.compress is Compression.JPEG:
                    jpeg_count[node.id] += 1
                placed = True
                break
            reasons[node.id] = conflict
        if not placed:
            raise Infeasible(stream.id, reasons)
    return assignment


def verify_assignment(
    assignment: Assignment,
    suite: SensorSuite,
    nodes: list[NodeSpec],
    jpeg_ratio: float = DEFAULT_JPEG_RATIO,
    run_duration: float | None = None,
) -> list[Violation]:
    """Recompute every ledger from scratch and report capacity breaches.

    Unknown stream or node ids are caller errors, not violations. Storage is
    checked as write rate x run_duration against disk capacity; omit
    run_duration to fall back to the suite's own.
    """
    _check_unique_nodes(nodes)
    by_node = {n.id: n for n in nodes}
    known = {s.id for s in suite.streams}
    for sid, nid in assignment.placements.items():
        if sid not in known:
            raise KeyError(f"assignment references unknown stream {sid!r}")
        if nid not in by_node:
            raise KeyError(f"assignment references unknown node {nid!r}")
    duration = suite.run_duration if run_duration is None else run_duration

    ledgers = {n.id: NodeLedger() for n in nodes}
    for sid, nid in assignment.placements.items():
        stream = suite.stream(sid)
        _apply(stream, effective_rate(stream, jpeg_ratio), ledgers[nid])

    violations: list[Violation] = []
    for node in nodes:
        ledger = ledgers[node.id]
        checks = (
            (Constraint.USB3_PORTS, float(ledger.usb3_used), float(node.usb3_ports)),
            (Constraint.GIGE_PORTS, float(ledger.gige_used), float(node.gige_ports)),
            (Constraint.CPU_BUDGET, ledger.cpu_used, node.cpu_budget),
            (Constraint.DISK_WRITE, ledger.disk_write_used, node.disk_write_rate),
            (Constraint.DISK_CAPACITY, ledger.disk_write_used * duration, node.disk_capacity),
        )
        for constraint, demanded, available in checks:
            if demanded > available:
                violations.append(Violation(node.id, constraint, demanded, available))
    return violations


BRUTE_FORCE_MAX_STREAMS = 10
BRUTE_FORCE_MAX_NODES = 4


def brute_force_placement(
    suite: SensorSuite,
    nodes: list[NodeSpec],
    jpeg_ratio: float = DEFAULT_JPEG_RATIO,
    *,
    run_duration: float | None = None,
) -> Assignment:
    """Exhaustive feasibility oracle for small instances.

    Tries every node choice per stream (constraints are additive, so partial
    overloads prune exactly) and returns the first feasible assignment in
    declared stream/node order, or raises Infeasible. Instances above the
    enumeration bound are rejected.
    """
    _check_unique_nodes(nodes)
    if len(suite.streams) > BRUTE_FORCE_MAX_STREAMS or len(nodes) > BRUTE_FORCE_MAX_NODES:
        raise ValueError(
            f"instance exceeds enumeration bound ({BRUTE_FORCE_MAX_STREAMS} streams, "
            f"{BRUTE_FORCE_MAX_NODES} nodes)"
        )

    assignment = Assignment(ledgers={n.id: NodeLedger() for n in nodes})
    streams = list(suite.streams)
    deepest = 0

    def search(index: int) -> bool:
        nonlocal deepest
        deepest = max(deepest, index)
        if index == len(streams):
            return True
        stream = streams[index]
        rate = effective_rate(stream, jpeg_ratio)
        for node in nodes:
            ledger = assignment.ledgers[node.id]
            if _first_conflict(stream, rate, node, ledger, run_duration) is None:
                _apply(stream, rate, ledger)
                assignment.placements[stream.id] = node.id
                if search(index + 1):
                    return True
                _unapply(stream, rate, ledger)
                del assignment.placements[stream.id]
        return False

    if not search(0):
        raise Infeasible(streams[min(deepest, len(streams) - 1)].id if streams else "", {})
    return assignment


def _unapply(stream: SensorStream, rate: float, ledger: NodeLedger) -> None:
    if stream.interface is Interface.USB3:
        ledger.usb3_used -= 1
    else:
        ledger.gige_used -= 1
    ledger.cpu_used -= stream.cpu_units
    ledger.disk_write_used -= rate
    ledger.streams.remove(stream.id)


def _check_unique_nodes(nodes: list[NodeSpec]) -> None:
    ids = [n.id for n in nodes]
    if len(ids) != len(set(ids)):
        raise ValueError("node ids must be unique")
