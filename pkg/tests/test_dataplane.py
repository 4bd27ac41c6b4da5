from __future__ import annotations

import random

import pytest

from capcluster.capacity import Compression, Interface, SensorStream
from capcluster.dataplane import (
    Pipeline,
    PipelineConfig,
    reports_to_csv,
    simulate,
    summarize,
    ticks_for,
)
from capcluster.placement import NodeSpec, Infeasible, plan_placement, verify_assignment
from capcluster.capacity import SensorSuite
from capcluster.units import GB, MB, TB


def usb(sid: str, rate: float, jpeg: bool = False, cpu: float = 1.0) -> SensorStream:
    return SensorStream(
        id=sid,
        interface=Interface.USB3,
        raw_rate=rate,
        compress=Compression.JPEG if jpeg else Compression.NONE,
        cpu_units=cpu if jpeg else 0.0,
    )


def gige(sid: str, rate: float) -> SensorStream:
    return SensorStream(id=sid, interface=Interface.GIGE, raw_rate=rate)


def cfg(streams, **kw) -> PipelineConfig:
    return PipelineConfig(streams=tuple(streams), **kw)


class TestSimulateBasics:
    def test_single_stream_under_capacity(self):
        config = cfg([usb("u", 600 * MB)])
        reports = simulate(config, 10.0)
        assert sum(r.written for r in reports) == 6_000 * MB
        assert sum(r.dropped for r in reports) == 0
        assert sum(r.generated for r in reports) == 6_000 * MB

    def test_steady_state_drop_rate(self):
        # 3 x 600 into a 1,700 MB/s disk: 100 MB/s must drop once the queue fills
        config = cfg([usb(f"u{i}", 600 * MB) for i in range(3)], queue_bound=1 * GB)
        reports = simulate(config, 60.0)
        total_dropped = sum(r.dropped for r in reports)
        # conservation: drops = arrivals - written - final queue
        arrivals = 1_800 * MB * 60
        written = sum(r.written for r in reports)
        assert total_dropped == arrivals - written - reports[-1].queue_depth
        # once the queue saturates, drops run at exactly 100 MB/s
        late = [r.dropped for r in reports if r.t > 20][:100]
        assert sum(late) / len(late) == pytest.approx(100 * MB * 0.1, rel=1e-6)

    def test_zero_streams(self):
        reports = simulate(cfg([]), 5.0)
        assert all(
            r.generated == r.written == r.dropped == r.queue_depth == 0 for r in reports
        )

    def test_duration_zero_is_empty(self):
        assert simulate(cfg([usb("u", MB)]), 0.0) == []

    def test_compression_quarters_queue_input(self):
        config = cfg([usb("cam", 600 * MB, jpeg=True)])
        reports = simulate(config, 10.0)
        assert sum(r.generated for r in reports) == 6_000 * MB
        assert sum(r.compressed_out for r in reports) == 1_500 * MB
        assert sum(r.written for r in reports) == 1_500 * MB

    def test_net_rx_counts_gige_only(self):
        config = cfg([usb("u", 200 * MB), gige("g", 100 * MB)])
        reports = simulate(config, 5.0)
        assert sum(r.net_rx for r in reports) == 500 * MB

    def test_cpu_overload_scales_throughput(self):
        # 3 jpeg cameras at 1.0 cpu_units each against a 2.0 budget
        config = cfg([usb(f"cam{i}", 600 * MB, jpeg=True) for i in range(3)],
                     disk_write_rate=2_000 * MB)
        reports = simulate(config, 30.0)
        assert all(r.cpu_util == 1.0 for r in reports)
        compressed = sum(r.compressed_out for r in reports)
        ideal = 3 * 150 * MB * 30
        assert compressed == pytest.approx(ideal * (2.0 / 3.0), rel=1e-3)

    def test_cpu_within_budget_reports_fraction(self):
        config = cfg([usb("cam", 600 * MB, jpeg=True)])
        reports = simulate(config, 1.0)
        assert all(r.cpu_util == 0.5 for r in reports)

    def test_disk_full_stops_writer_and_drops(self):
        config = cfg([usb("u", 100 * MB)], disk_capacity=50 * MB, queue_bound=20 * MB)
        reports = simulate(config, 10.0)
        assert max(r.disk_used for r in reports) == 50 * MB
        # once the disk is full and the queue is full, arrivals drop
        assert sum(r.dropped for r in reports) > 0
        last = reports[-1]
        assert last.disk_used == 50 * MB
        assert last.written == 0


class TestConservation:
    def test_byte_exact_on_randomized_configs(self):
        rng = random.Random(404)
        for _ in range(200):
            streams = []
            for j in range(rng.randint(0, 4)):
                jpeg = rng.random() < 0.5
                streams.append(SensorStream(
                    id=f"s{j}",
                    interface=Interface.USB3 if rng.random() < 0.5 else Interface.GIGE,
                    raw_rate=rng.uniform(0, 800 * MB),
                    compress=Compression.JPEG if jpeg else Compression.NONE,
                    cpu_units=rng.uniform(0.1, 2.0) if jpeg else 0.0,
                ))
            config = PipelineConfig(
                streams=tuple(streams),
                jpeg_ratio=rng.uniform(1, 10),
                cpu_budget=rng.uniform(0, 3),
                disk_write_rate=rng.uniform(0, 2_000 * MB),
                disk_capacity=rng.uniform(10 * MB, 1 * TB),
                queue_bound=rng.randint(0, 1 * GB),
                tick=rng.choice([0.05, 0.1, 0.25, 1.0]),
            )
            pipeline = Pipeline(config)
            reports = pipeline.run(rng.randint(0, 150))
            ledger = pipeline.conservation()
            assert ledger["effective_in"] == (
                ledger["written"] + ledger["dropped"] + ledger["queue_depth"]
            )
            # report sums agree with the pipeline's own counters
            assert sum(r.written for r in reports) == ledger["written"]
            assert sum(r.dropped for r in reports) == ledger["dropped"]
            if reports:
                assert reports[-1].queue_depth == ledger["queue_depth"]

    def test_generated_matches_closed_form(self):
        # total generated over n ticks telescopes to floor(rate * tick * n)
        config = cfg([usb("u", 599_999_999.7)], tick=0.1)
        reports = simulate(config, 7.3)
        n = ticks_for(7.3, 0.1)
        from fractions import Fraction
        expected = int(Fraction("599999999.7") * Fraction("0.1") * n)
        assert sum(r.generated for r in reports) == expected

    def test_monotone_disk_and_bounded_queue(self):
        config = cfg([usb("u", 900 * MB)], queue_bound=50 * MB,
                     disk_write_rate=600 * MB, disk_capacity=1 * GB)
        reports = simulate(config, 20.0)
        previous = 0
        for r in reports:
            assert r.queue_depth <= config.queue_bound
            assert r.disk_used >= previous
            assert r.disk_used <= config.disk_capacity
            previous = r.disk_used

    def test_written_per_tick_within_rate(self):
        config = cfg([usb("u", 1_000 * MB)], disk_write_rate=700 * MB)
        for r in simulate(config, 10.0):
            assert r.written <= int(700 * MB * 0.1) + 1


class TestTickStability:
    def test_halving_tick_changes_little(self):
        base = cfg([usb("u", 600 * MB), gige("g", 100 * MB)], tick=0.2)
        halved = cfg([usb("u", 600 * MB), gige("g", 100 * MB)], tick=0.1)
        w1 = sum(r.written for r in simulate(base, 12.0))
        w2 = sum(r.written for r in simulate(halved, 12.0))
        one_tick = 700 * MB * 0.2
        assert abs(w1 - w2) <= one_tick + 2


class TestPlacementCoherence:
    def test_verified_placements_never_drop(self):
        """The cross-module property: any placement that verifies clean
        simulates with zero drops for the whole run."""
        rng = random.Random(777)
        checked = 0
        while checked < 40:
            nodes = [
                NodeSpec(
                    id=f"n{i}",
                    usb3_ports=rng.randint(1, 3),
                    gige_ports=rng.randint(0, 2),
                    cpu_budget=rng.randint(2, 10) * 0.25,
                    disk_write_rate=rng.randint(4, 18) * 100 * MB,
                    disk_capacity=rng.randint(2, 8) * 0.5 * TB,
                )
                for i in range(rng.randint(1, 3))
            ]
            streams = []
            for j in range(rng.randint(1, 6)):
                jpeg = rng.random() < 0.4
                streams.append(SensorStream(
                    id=f"s{j:02d}",
                    interface=Interface.USB3 if rng.random() < 0.7 else Interface.GIGE,
                    raw_rate=rng.randint(1, 12) * 50 * MB,
                    compress=Compression.JPEG if jpeg else Compression.NONE,
                    cpu_units=rng.randint(1, 4) * 0.25 if jpeg else 0.0,
                ))
            duration = rng.choice([5.0, 12.0, 30.0])
            suite = SensorSuite(streams=tuple(streams), run_duration=duration)
            try:
                assignment = plan_placement(suite, nodes, 4.0, run_duration=duration)
            except Infeasible:
                continue
            assert verify_assignment(assignment, suite, nodes, 4.0, duration) == []
            checked += 1
            for node in nodes:
                placed = [s for s in suite.streams
                          if assignment.placements.get(s.id) == node.id]
                if not placed:
                    continue
                config = PipelineConfig(
                    streams=tuple(placed),
                    jpeg_ratio=4.0,
                    cpu_budget=node.cpu_budget,
                    disk_write_rate=node.disk_write_rate,
                    disk_capacity=node.disk_capacity,
                )
                reports = simulate(config, duration)
                assert sum(r.dropped for r in reports) == 0


class TestSummarize:
    def test_sums_and_peaks(self):
        config = cfg([usb("u", 600 * MB)])
        reports = simulate(config, 10.0)
        summary = summarize(reports, disk_capacity=config.disk_capacity)
        assert summary.total_written == 6_000 * MB
        assert summary.total_dropped == 0
        assert summary.peak_queue == max(r.queue_depth for r in reports)
        assert summary.time_to_disk_full is None

    def test_empty_reports(self):
        summary = summarize([])
        assert summary.total_written == 0
        assert summary.time_to_disk_full is None

    def test_time_to_disk_full(self):
        config = cfg([usb("u", 600 * MB)], disk_capacity=2 * GB)
        reports = simulate(config, 10.0)
        summary = summarize(reports, disk_capacity=config.disk_capacity)
        # 2e9 / 6e8 = 3.33 s, quantized up to the next tick
        assert summary.time_to_disk_full == pytest.approx(3.4, abs=0.11)

    def test_mean_cpu(self):
        config = cfg([usb("cam", 600 * MB, jpeg=True)])
        summary = summarize(simulate(config, 5.0))
        assert summary.mean_cpu == 0.5


class TestIncrementalPipeline:
    def test_streams_can_join_and_leave(self):
        pipeline = Pipeline(cfg([]))
        pipeline.run(5)
        pipeline.add_stream(usb("u", 100 * MB))
        r = pipeline.step()
        assert r.generated == 10 * MB
        pipeline.remove_stream("u")
        r = pipeline.step()
        assert r.generated == 0
        ledger = pipeline.conservation()
        assert ledger["effective_in"] == ledger["written"] + ledger["dropped"] + ledger["queue_depth"]

    def test_csv_dump(self):
        reports = simulate(cfg([usb("u", MB)]), 0.3)
        csv = reports_to_csv(reports)
        lines = csv.strip().split("\n")
        assert lines[0] == "t,generated,compressed_out,written,dropped,queue_depth,disk_used,cpu_util,net_rx"
        assert len(lines) == 1 + 3
