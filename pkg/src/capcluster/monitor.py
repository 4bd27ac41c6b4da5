"""Metric collection and storage.

Agents push per-node samples; the store keeps them in fixed-size ring
buffers, one per (node, metric) stream, with a downsample ladder of raw 1 s
points, 10 s means and 60 s means. Ingest is single-writer per stream;
queries take short per-series locks so they never stall collection.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum


class Metric(str, Enum):
    CPU_UTIL = "CpuUtil"
    MEM_USED = "MemUsed"
    DISK_UTIL = "DiskUtil"
    IO_LOAD = "IoLoad"
    NET_RX = "NetRx"
    NET_TX = "NetTx"
    DROPS = "Drops"


LADDER_STEPS = (1.0, 10.0, 60.0)  # raw interval plus the two mean tiers


@dataclass(frozen=True)
class MetricSample:
    node: str
    metric: Metric
    value: float
    timestamp: float

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("metric values must be >= 0")
        if self.metric is Metric.CPU_UTIL and self.value > 1.0:
            raise ValueError("CpuUtil must be <= 1")


class _Tier:
    """One downsample tier: flushes the mean when its bucket advances."""

    def __init__(self, step: float, capacity: int):
        self.step = step
        self.points: deque[tuple[float, float]] = deque(maxlen=capacity)
        self._bucket: float | None = None
        self._sum = 0.0
        self._count = 0

    def add(self, ts: float, value: float) -> None:
        bucket = (ts // self.step) * self.step
        if self._bucket is None:
            self._bucket = bucket
        elif bucket != self._bucket:
            self.points.append((self._bucket, self._sum / self._count))
            self._bucket, self._sum, self._count = bucket, 0.0, 0
        self._sum += value
        self._count += 1


class _Series:
    """Ring buffer plus ladder tiers for one (node, metric) stream."""

    def __init__(self, raw_capacity: int):
        self.lock = threading.Lock()
        self.raw: deque[tuple[float, float]] = deque(maxlen=raw_capacity)
        self.tiers = {step: _Tier(step, max(2, int(raw_capacity / step)))
                      for step in LADDER_STEPS[1:]}
        self.head: float | None = None

    def add(self, ts: float, value: float) -> bool:
        with self.lock:
            if self.head is not None and ts <= self.head:
                return False
            self.head = ts
            self.raw.append((ts, value))
            for tier in self.tiers.values():
                tier.add(ts, value)
            return True

    def points(self, step: float) -> list[tuple[float, float]]:
        with self.lock:
            if step == LADDER_STEPS[0]:
                return list(self.raw)
            return list(self.tiers[step].points)


class MetricStore:
    """Aggregation side of the pipeline: validates, stores and serves."""

    def __init__(self, raw_capacity: int = 7200):
        self.raw_capacity = raw_capacity
        self._series: dict[tuple[str, Metric], _Series] = {}
        self._known_nodes: set[str] = set()
        self._lock = threading.Lock()
        self.rejected_unknown = 0
        self.rejected_out_of_order = 0

    def register_node(self, node: str) -> None:
        with self._lock:
            self._known_nodes.add(node)

    def known_nodes(self) -> set[str]:
        with self._lock:
            return set(self._known_nodes)

    def ingest(self, batch: list[MetricSample]) -> int:
        """Store in-order samples from known nodes; returns how many stuck."""
        accepted = 0
        for sample in batch:
            if sample.node not in self._known_nodes:
                self.rejected_unknown += 1
                continue
            series = self._get_series(sample.node, sample.metric)
            if series.add(sample.timestamp, sample.value):
                accepted += 1
            else:
                self.rejected_out_of_order += 1
        return accepted

    def _get_series(self, node: str, metric: Metric) -> _Series:
        key = (node, metric)
        with self._lock:
            series = self._series.get(key)
            if series is None:
                series = self._series[key] = _Series(self.raw_capacity)
            return series

    def query(
        self,
        metric: Metric | str,
        window: float,
        resolution: float = 1.0,
        node: str | None = None,
        now: float | None = None,
    ) -> list[tuple[float, float]]:
        """Points of the coarsest ladder tier at or below `resolution`.

        With no node given, returns the per-bucket mean across every node
        that reported in that bucket.
        """
        metric = Metric(metric)  # raises ValueError on unknown names
        if window <= 0:
            raise ValueError("window must be > 0")
        step = max((s for s in LADDER_STEPS if s <= resolution), default=LADDER_STEPS[0])
        if now is None:
            now = self._latest_timestamp(metric)
            if now is None:
                return []
        cutoff = now - window

        if node is not None:
            series = self._series.get((node, Metric(metric)))
            if series is None:
                return []
            return [(ts, v) for ts, v in series.points(step) if cutoff <= ts <= now]

        buckets: dict[float, list[float]] = {}
        with self._lock:
            members = [s for (n, m), s in self._series.items() if m == metric]
        for series in members:
            for ts, v in series.points(step):
                if cutoff <= ts <= now:
                    buckets.setdefault((ts // step) * step, []).append(v)
        return [(ts, sum(vs) / len(vs)) for ts, vs in sorted(buckets.items())]

    def _latest_timestamp(self, metric: Metric) -> float | None:
        with self._lock:
            members = [s for (n, m), s in self._series.items() if m == metric]
        heads = [s.head for s in members if s.head is not None]
        return max(heads) if heads else None

    def export_csv(self, node: str, metric: Metric | str) -> str:
        series = self._series.get((node, Metric(metric)))
        rows = ["timestamp,value"]
        if series is not None:
            rows += [f"{ts},{v}" for ts, v in series.points(LADDER_STEPS[0])]
        return "\n".join(rows) + "\n"

    def snapshot(self) -> dict:
        """JSON-able dump of every raw series, for periodic persistence."""
        out: dict[str, dict[str, list[list[float]]]] = {}
        with self._lock:
            keys = list(self._series)
        for node, metric in keys:
            series = self._series[(node, metric)]
            out.setdefault(node, {})[metric.value] = [
                [ts, v] for ts, v in series.points(LADDER_STEPS[0])
            ]
        return out
