"""Discrete-time simulation of one node's capture pipeline.

A fluid model ticks in fixed steps: streams generate raw bytes, compressed
streams pass through a CPU-limited compression stage, everything lands in a
bounded queue that a rate-capped writer drains to disk. All byte counters
are integers (fractional per-tick amounts are carried exactly), so the
conservation ledger balances to the byte:

    effective bytes in == bytes written + bytes dropped + final queue depth

where "effective" means post-compression. Raw bytes still waiting in a
stream's compression backlog have not entered the queue yet.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

from .capacity import Compression, Interface, SensorStream
from .units import GB, MB, TB


def _frac(x: float) -> Fraction:
    # str() round-trips the shortest repr, so 0.1 becomes exactly 1/10.
    return Fraction(str(x))


@dataclass(frozen=True)
class PipelineConfig:
    streams: tuple[SensorStream, ...]
    jpeg_ratio: float = 4.0
    cpu_budget: float = 2.0
    disk_write_rate: float = 1_700 * MB
    disk_capacity: float = 2 * TB
    queue_bound: int = 1 * GB
    tick: float = 0.1

    def __post_init__(self) -> None:
        if self.tick <= 0:
            raise ValueError("tick must be > 0")
        if self.queue_bound < 0:
            raise ValueError("queue_bound must be >= 0")
        if self.jpeg_ratio < 1:
            raise ValueError("jpeg_ratio must be >= 1")


@dataclass(frozen=True)
class TickReport:
    t: float
    generated: int
    compressed_out: int
    written: int
    dropped: int
    queue_depth: int
    disk_used: int
    cpu_util: float
    net_rx: int


CSV_COLUMNS = (
    "t", "generated", "compressed_out", "written", "dropped",
    "queue_depth", "disk_used", "cpu_util", "net_rx",
)


class _StreamState:
    """Exact cumulative generation and compression counters for one stream."""

    def __init__(self, stream: SensorStream, tick: Fraction, ratio: Fraction):
        self.stream = stream
        self.per_tick = _frac(stream.raw_rate) * tick
        self.ratio = ratio
        self.cum_target = Fraction(0)  # exact bytes the stream owed so far
        self.generated = 0  # integer bytes actually emitted
        self.backlog = 0  # raw bytes awaiting compression
        self.processed_raw = 0  # raw bytes compressed so far
        self.compressed_out = 0  # compressed bytes emitted so far
        self.capacity_carry = 0.0  # fractional compression capacity carry

    def generate(self) -> int:
        self.cum_target += self.per_tick
        out = int(self.cum_target) - self.generated
        self.generated += out
        return out

    def compress(self, scale: float) -> int:
        """Process backlog at `scale` of the stream's own arrival rate and
        return the compressed bytes emitted."""
        if scale >= 1.0:
            take = self.backlog
            self.capacity_carry = 0.0
        else:
            self.capacity_carry += scale * float(self.per_tick)
            take = min(self.backlog, int(self.capacity_carry))
            self.capacity_carry -= take
        self.backlog -= take
        self.processed_raw += take
        out = int(Fraction(self.processed_raw) / self.ratio) - self.compressed_out
        self.compressed_out += out
        return out


class Pipeline:
    """Steppable pipeline; one instance models one node.

    The stream set may change between ticks (capture apps starting and
    stopping), so cumulative counters are kept per stream.
    """

    def __init__(self, config: PipelineConfig, seed: int | None = None):
        self.config = config
        self.seed = seed  # reserved for an optional jitter extension
        self._tick_frac = _frac(config.tick)
        self._ratio_frac = _frac(config.jpeg_ratio)
        self._streams: dict[str, _StreamState] = {}
        for s in config.streams:
            self.add_stream(s)
        self.tick_index = 0
        self.queue_depth = 0
        self.disk_used = 0
        self.disk_capacity = int(config.disk_capacity)
        self.writer_stopped = self.disk_used >= self.disk_capacity
        self._drain_target = Fraction(0)
        self._drained_budget = 0
        self.total_effective_in = 0
        self.total_written = 0
        self.total_dropped = 0

    def add_stream(self, stream: SensorStream) -> None:
        if stream.id in self._streams:
            return
        self._streams[stream.id] = _StreamState(stream, self._tick_frac, self._ratio_frac)

    def remove_stream(self, stream_id: str) -> None:
        self._streams.pop(stream_id, None)

    @property
    def stream_ids(self) -> list[str]:
        return sorted(self._streams)

    def cpu_demand(self) -> float:
        return sum(
            st.stream.cpu_units
            for st in self._streams.values()
            if st.stream.compress is Compression.JPEG
        )

    def step(self) -> TickReport:
        cfg = self.config
        generated = 0
        net_rx = 0
        arrivals = 0
        compressed_total = 0

        demand = self.cpu_demand()
        if demand <= cfg.cpu_budget:
            scale, cpu_util = 1.0, (demand / cfg.cpu_budget if cfg.cpu_budget > 0 else 0.0)
        elif cfg.cpu_budget > 0:
            scale, cpu_util = cfg.cpu_budget / demand, 1.0
        else:
            scale, cpu_util = 0.0, 1.0

        for st in self._streams.values():
            g = st.generate()
            generated += g
            if st.stream.interface is Interface.GIGE:
                net_rx += g
            if st.stream.compress is Compression.JPEG:
                st.backlog += g
                out = st.compress(scale)
                compressed_total += out
                arrivals += out
            else:
                arrivals += g

        self.total_effective_in += arrivals
        dropped = 0
        if self.writer_stopped:
            dropped = arrivals
        else:
            space = cfg.queue_bound - self.queue_depth
            accepted = min(arrivals, space)
            self.queue_depth += accepted
            dropped = arrivals - accepted

        written = 0
        if not self.writer_stopped:
            self._drain_target += _frac(cfg.disk_write_rate) * self._tick_frac
            allowed = int(self._drain_target) - self._drained_budget
            self._drained_budget += allowed
            written = min(self.queue_depth, allowed, self.disk_capacity - self.disk_used)
            self.queue_depth -= written
            self.disk_used += written
            if self.disk_used >= self.disk_capacity:
                self.writer_stopped = True

        self.total_written += written
        self.total_dropped += dropped
        self.tick_index += 1

        return TickReport(
            t=self.tick_index * cfg.tick,
            generated=generated,
            compressed_out=compressed_total,
            written=written,
            dropped=dropped,
            queue_depth=self.queue_depth,
            disk_used=self.disk_used,
            cpu_util=cpu_util,
            net_rx=net_rx,
        )

    def run(self, ticks: int) -> list[TickReport]:
        return [self.step() for _ in range(ticks)]

    def conservation(self) -> dict[str, int]:
        """The exact byte ledger; in == out holds at every tick boundary."""
        return {
            "effective_in": self.total_effective_in,
            "written": self.total_written,
            "dropped": self.total_dropped,
            "queue_depth": self.queue_depth,
        }


def ticks_for(duration: float, tick: float) -> int:
    if duration < 0:
        raise ValueError("duration must be >= 0")
    return int(round(duration / tick))


def simulate(config: PipelineConfig, duration: float, seed: int | None = None) -> list[TickReport]:
    """Run a fresh pipeline for `duration` seconds of simulated time."""
    return Pipeline(config, seed=seed).run(ticks_for(duration, config.tick))


@dataclass(frozen=True)
class Summary:
    total_written: int
    total_dropped: int
    peak_queue: int
    mean_cpu: float
    time_to_disk_full: float | None


def summarize(reports: list[TickReport], disk_capacity: float | None = None) -> Summary:
    """Aggregate one run's reports; disk-full time needs the capacity."""
    if not reports:
        return Summary(0, 0, 0, 0.0, None)
    full_at = None
    if disk_capacity is not None:
        cap = int(disk_capacity)
        for r in reports:
            if r.disk_used >= cap:
                full_at = r.t
                break
    return Summary(
        total_written=sum(r.written for r in reports),
        total_dropped=sum(r.dropped for r in reports),
        peak_queue=max(r.queue_depth for r in reports),
        mean_cpu=sum(r.cpu_util for r in reports) / len(reports),
        time_to_disk_full=full_at,
    )


def reports_to_csv(reports: list[TickReport]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in reports:
        buf.write(
            f"{r.t},{r.generated},{r.compressed_out},{r.written},{r.dropped},"
            f"{r.queue_depth},{r.disk_used},{r.cpu_util},{r.net_rx}\n"
        )
    return buf.getvalue()
