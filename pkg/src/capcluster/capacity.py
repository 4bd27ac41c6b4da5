"""Rate, storage, offload-time, power and benchmark arithmetic for the capture
cluster.

Everything here is a pure function over immutable values. Rates are bytes per
second with decimal prefixes (1 MB/s = 10^6 B/s); durations are seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .units import TB


class Interface(str, Enum):
    USB3 = "usb3"
    GIGE = "gige"


class Compression(str, Enum):
    NONE = "none"
    JPEG = "jpeg"


DEFAULT_JPEG_RATIO = 4.0  # 600 MB/s raw camera -> 150 MB/s stored


@dataclass(frozen=True)
class CameraSpec:
    """A camera described by resolution, frame rate and post-debayer depth."""

    width: int
    height: int
    fps: float
    bytes_per_pixel: int = 3

    def __post_init__(self) -> None:
        for name in ("width", "height", "fps", "bytes_per_pixel"):
            if getattr(self, name) <= 0:
                raise ValueError(f"CameraSpec.{name} must be > 0")


@dataclass(frozen=True)
class SensorStream:
    """One data source to be placed on a node and simulated.

    cpu_units expresses compression load: 1.0 is one 5 MP @ 60 Hz
    debayer+JPEG stream. Uncompressed streams carry no compression load.
    """

    id: str
    interface: Interface
    raw_rate: float  # bytes/second before compression
    compress: Compression = Compression.NONE
    cpu_units: float = 0.0

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("SensorStream.id must be non-empty")
        if self.raw_rate < 0:
            raise ValueError("SensorStream.raw_rate must be >= 0")
        if self.cpu_units < 0:
            raise ValueError("SensorStream.cpu_units must be >= 0")
        if self.compress is Compression.NONE and self.cpu_units != 0:
            raise ValueError("uncompressed streams must have cpu_units == 0")


@dataclass(frozen=True)
class SensorSuite:
    """The full set of streams for one recording run."""

    streams: tuple[SensorStream, ...]
    run_duration: float  # seconds

    def __post_init__(self) -> None:
        ids = [s.id for s in self.streams]
        if len(ids) != len(set(ids)):
            raise ValueError("stream ids must be unique")
        if self.run_duration <= 0:
            raise ValueError("run_duration must be > 0")

    def stream(self, stream_id: str) -> SensorStream:
        for s in self.streams:
            if s.id == stream_id:
                return s
        raise KeyError(stream_id)


@dataclass(frozen=True)
class PowerModel:
    """Cluster power anchors in watts; consumption between idle and full load
    is interpolated linearly."""

    fans_only: float = 50.0
    idle: float = 130.0
    full_load: float = 750.0

    def __post_init__(self) -> None:
        if not (self.fans_only <= self.idle <= self.full_load):
            raise ValueError("power anchors must satisfy fans_only <= idle <= full_load")


@dataclass(frozen=True)
class BenchmarkEntry:
    """Geekbench 5 scores for one compute option."""

    cpu_name: str
    single_core: float
    multi_core: float
    node_count: int

    def __post_init__(self) -> None:
        if self.single_core <= 0 or self.multi_core <= 0:
            raise ValueError("benchmark scores must be > 0")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")


@dataclass(frozen=True)
class IngestTotals:
    total_rate: float  # bytes/second across the suite
    storage_for_run: float  # bytes for one run_duration


@dataclass(frozen=True)
class NodeOption:
    """One row of the compute-option comparison: a board, its CPU, and how
    many of them the option stacks."""

    board: str
    cpu_name: str
    node_count: int
    cpu_tdp_w: str
    size_mm: str
    io_notes: tuple[str, ...] = field(default_factory=tuple)


def raw_camera_rate(cam: CameraSpec) -> int:
    """Post-debayer byte rate of one camera: width * height * depth * fps."""
    return int(cam.width * cam.height * cam.bytes_per_pixel * cam.fps)


def effective_rate(stream: SensorStream, jpeg_ratio: float = DEFAULT_JPEG_RATIO) -> float:
    """Stored byte rate of a stream after its compression stage, if any."""
    if jpeg_ratio < 1:
        raise ValueError("jpeg_ratio must be >= 1")
    if stream.compress is Compression.JPEG:
        return stream.raw_rate / jpeg_ratio
    return stream.raw_rate


def aggregate_ingest(suite: SensorSuite, jpeg_ratio: float = DEFAULT_JPEG_RATIO) -> IngestTotals:
    """Suite-wide stored rate and the storage one run accumulates."""
    total = sum(effective_rate(s, jpeg_ratio) for s in suite.streams)
    return IngestTotals(total_rate=total, storage_for_run=total * suite.run_duration)


def offload_time(total_bytes: float, per_link_rate: float, parallel_links: int = 1) -> float:
    """Seconds to move total_bytes over parallel_links links of per_link_rate."""
    if per_link_rate <= 0:
        raise ValueError("per_link_rate must be > 0")
    if parallel_links < 1:
        raise ValueError("parallel_links must be >= 1")
    return total_bytes / (per_link_rate * parallel_links)


def power_estimate(model: PowerModel, utilization: float) -> float:
    """Cluster watts at a given 0..1 utilization, linear between the anchors."""
    if not 0.0 <= utilization <= 1.0:
        raise ValueError("utilization must be within [0, 1]")
    return model.idle + utilization * (model.full_load - model.idle)


def cluster_score(entry: BenchmarkEntry) -> float:
    """Aggregate multi-core score of the whole option: multi_core * nodes."""
    return entry.multi_core * entry.node_count


def storage_cost(total_bytes: float, rate_per_tb_month: float) -> float:
    """Monthly archival cost at a flat per-TB rate."""
    if rate_per_tb_month < 0:
        raise ValueError("rate_per_tb_month must be >= 0")
    return (total_bytes / TB) * rate_per_tb_month


# ---------------------------------------------------------------------------
# Embedded option-comparison datasets (public vendor specs and Geekbench 5
# results), so reports are reproducible offline.

BENCHMARKS: tuple[BenchmarkEntry, ...] = (
    BenchmarkEntry("AMD Ryzen Threadripper 3970X", 1_264, 24_183, 1),
    BenchmarkEntry("Intel Core i9-11900", 1_549, 6_539, 4),
    BenchmarkEntry("Intel Core i7-9700", 1_198, 6_397, 4),
    BenchmarkEntry("AMD Ryzen 7 5700U", 1_044, 5_526, 16),
    BenchmarkEntry("AMD Ryzen 7 4800U", 1_029, 5_905, 16),
    BenchmarkEntry("AMD Ryzen Embedded V2718", 1_165, 6_856, 16),
    BenchmarkEntry("Intel Core i7-1165G7", 1_398, 4_573, 16),
)

# Cluster scores as printed in the published comparison. The 4800U figure
# disagrees with multi_core * node_count by 72 (94,408 vs 94,480); all other
# rows match the product exactly.
PUBLISHED_CLUSTER_SCORES: dict[str, int] = {
    "AMD Ryzen Threadripper 3970X": 24_183,
    "Intel Core i9-11900": 26_156,
    "Intel Core i7-9700": 25_588,
    "AMD Ryzen 7 5700U": 88_416,
    "AMD Ryzen 7 4800U": 94_408,
    "AMD Ryzen Embedded V2718": 109_696,
    "Intel Core i7-1165G7": 73_168,
}

NODE_OPTIONS: tuple[NodeOption, ...] = (
    NodeOption(
        "ASROCK TRX40 Creator", "AMD Ryzen Threadripper 3970X", 1, "280W", "305 x 244",
        ("4x USB 3.2 Gen2", "8x USB 3.2 Gen1", "2x Gigabit+ Ethernet", "3x M.2", "8x SATA3"),
    ),
    NodeOption(
        "ASROCK Z590 Taichi", "Intel Core i9-11900", 4, "65W (260W)", "300 x 240",
        ("2x Thunderbolt 4", "6x USB 3.2", "2x Gigabit+ Ethernet", "3x M.2", "8x SATA3"),
    ),
    NodeOption(
        "ZOTAC ZBOX MI574", "Intel Core i7-9700", 4, "65W (260W)", "185 x 185",
        ("1x USB 3.1 Type-C", "6x USB 3.0", "2x Gigabit+ Ethernet", "2x M.2", "1x SATA3"),
    ),
    NodeOption(
        "ASUS Mini PN51", "AMD Ryzen 7 5700U", 16, "15W (240W)", "115 x 115",
        ("2x USB 3.2 Gen2 Type-C", "3x USB 3.1 Gen1", "1x Gigabit Ethernet", "1x M.2", "1x SATA3"),
    ),
    NodeOption(
        "ASRock 4X4-4800U", "AMD Ryzen 7 4800U", 16, "15-25W (240-400W)", "104 x 102",
        ("4x USB 3.2 Gen2", "4x USB 2.0", "2x Gigabit Ethernet", "1x M.2", "1x SATA3"),
    ),
    NodeOption(
        "ASRock 4X4-V2000M", "AMD Ryzen Embedded V2718", 16, "10-25W (160-400W)", "104 x 102",
        ("2x USB 3.2 Gen2", "4x USB 2.0", "2x Gigabit Ethernet", "1x M.2", "1x SATA3"),
    ),
    NodeOption(
        "NUC11 PAHi7", "Intel Core i7-1165G7", 16, "12-28W (192-448W)", "117 x 112",
        ("2x Thunderbolt 4", "3x USB 3.1", "1x Gigabit Ethernet", "1x M.2 2280", "2x SATA3"),
    ),
)


def benchmark_for(cpu_name: str) -> BenchmarkEntry:
    for entry in BENCHMARKS:
        if entry.cpu_name == cpu_name:
            return entry
    raise KeyError(cpu_name)


def suite_from_json(doc: dict) -> SensorSuite:
    """Build a SensorSuite from its JSON document form.

    Expected shape::

        {"run_duration": 3600,
         "streams": [{"id": "...", "interface": "usb3"|"gige",
                      "raw_rate": 6e8, "compress": "none"|"jpeg",
                      "cpu_units": 0.0}, ...]}
    """
    streams = tuple(
        SensorStream(
            id=s["id"],
            interface=Interface(s["interface"]),
            raw_rate=float(s["raw_rate"]),
            compress=Compression(s.get("compress", "none")),
            cpu_units=float(s.get("cpu_units", 0.0)),
        )
        for s in doc.get("streams", [])
    )
    return SensorSuite(streams=streams, run_duration=float(doc.get("run_duration", 3600.0)))


def suite_to_json(suite: SensorSuite) -> dict:
    return {
        "run_duration": suite.run_duration,
        "streams": [
            {
                "id": s.id,
                "interface": s.interface.value,
                "raw_rate": s.raw_rate,
                "compress": s.compress.value,
                "cpu_units": s.cpu_units,
            }
            for s in suite.streams
        ],
    }
