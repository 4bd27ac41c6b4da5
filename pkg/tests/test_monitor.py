from __future__ import annotations

import time

import pytest

from capcluster.monitor import LADDER_STEPS, Metric, MetricSample, MetricStore


def sample(node: str, metric: Metric, value: float, ts: float) -> MetricSample:
    return MetricSample(node=node, metric=metric, value=value, timestamp=ts)


@pytest.fixture()
def store() -> MetricStore:
    s = MetricStore(raw_capacity=7200)
    for i in range(1, 17):
        s.register_node(f"node{i:02d}")
    return s


class TestIngest:
    def test_in_order_batch_accepted(self, store):
        batch = [sample("node01", m, 0.5, 100.0) for m in Metric]
        assert store.ingest(batch) == 7

    def test_out_of_order_rejected(self, store):
        assert store.ingest([sample("node01", Metric.CPU_UTIL, 0.5, 100.0)]) == 1
        assert store.ingest([sample("node01", Metric.CPU_UTIL, 0.6, 99.0)]) == 0
        assert store.rejected_out_of_order == 1

    def test_equal_timestamp_rejected(self, store):
        store.ingest([sample("node01", Metric.CPU_UTIL, 0.5, 100.0)])
        assert store.ingest([sample("node01", Metric.CPU_UTIL, 0.5, 100.0)]) == 0

    def test_unknown_node_rejected(self, store):
        assert store.ingest([sample("ghost", Metric.CPU_UTIL, 0.5, 100.0)]) == 0
        assert store.rejected_unknown == 1

    def test_cpu_util_capped_at_one(self):
        with pytest.raises(ValueError):
            MetricSample(node="n", metric=Metric.CPU_UTIL, value=1.2, timestamp=0)

    def test_negative_value_rejected(self):
        with pytest.raises(ValueError):
            MetricSample(node="n", metric=Metric.DROPS, value=-1, timestamp=0)


class TestLadder:
    def test_tier_means_equal_raw_means(self, store):
        values = [(t, (t * 7) % 13 / 13) for t in range(600)]
        store.ingest([sample("node01", Metric.CPU_UTIL, v, float(t)) for t, v in values])
        for step in LADDER_STEPS[1:]:
            pts = store.query(Metric.CPU_UTIL, window=600, resolution=step,
                              node="node01", now=599.0)
            assert pts, f"no points at {step}s tier"
            for bucket_start, mean in pts:
                covered = [v for t, v in values if bucket_start <= t < bucket_start + step]
                assert mean == sum(covered) / len(covered)

    def test_coarsest_tier_selected(self, store):
        store.ingest([sample("node01", Metric.CPU_UTIL, 0.5, float(t)) for t in range(300)])
        raw = store.query(Metric.CPU_UTIL, window=300, resolution=1, node="node01", now=299)
        mid = store.query(Metric.CPU_UTIL, window=300, resolution=30, node="node01", now=299)
        coarse = store.query(Metric.CPU_UTIL, window=300, resolution=60, node="node01", now=299)
        assert len(raw) == 300
        assert len(mid) in (28, 29, 30)  # 10 s buckets, last one still open
        assert len(coarse) in (3, 4, 5)  # 60 s buckets

    def test_one_hour_query_at_minute_resolution(self, store):
        store.ingest([sample("node01", Metric.CPU_UTIL, 0.9, float(t)) for t in range(3700)])
        pts = store.query(Metric.CPU_UTIL, window=3600, resolution=60, node="node01", now=3699)
        assert 0 < len(pts) <= 60

    def test_ring_buffer_age_bound(self):
        store = MetricStore(raw_capacity=100)
        store.register_node("n1")
        store.ingest([sample("n1", Metric.NET_RX, 1.0, float(t)) for t in range(500)])
        pts = store.query(Metric.NET_RX, window=10_000, resolution=1, node="n1", now=499)
        assert len(pts) == 100
        assert pts[0][0] == 400.0  # nothing older than capacity x interval


class TestQuery:
    def test_window_with_no_data(self, store):
        assert store.query(Metric.CPU_UTIL, window=60, node="node01", now=100.0) == []
        assert store.query(Metric.CPU_UTIL, window=60) == []

    def test_unknown_metric_raises(self, store):
        with pytest.raises(ValueError):
            store.query("Bogus", window=60)

    def test_cluster_mean_of_constant_nodes(self, store):
        for i in range(1, 17):
            store.ingest([
                sample(f"node{i:02d}", Metric.CPU_UTIL, 1.0, float(t)) for t in range(120)
            ])
        pts = store.query(Metric.CPU_UTIL, window=120, resolution=1, now=119)
        assert pts
        assert all(v == 1.0 for _, v in pts)

    def test_cluster_mean_equals_identical_series(self, store):
        series = [(float(t), (t % 10) / 10) for t in range(100)]
        for node in ("node01", "node02", "node03"):
            store.ingest([sample(node, Metric.IO_LOAD, v, t) for t, v in series])
        cluster = store.query(Metric.IO_LOAD, window=100, resolution=1, now=99)
        single = store.query(Metric.IO_LOAD, window=100, resolution=1, node="node01", now=99)
        assert [ts for ts, _ in cluster] == [ts for ts, _ in single]
        assert [v for _, v in cluster] == pytest.approx([v for _, v in single])

    def test_csv_export(self, store):
        store.ingest([sample("node01", Metric.DROPS, float(t), float(t)) for t in range(3)])
        csv = store.export_csv("node01", Metric.DROPS)
        assert csv.splitlines()[0] == "timestamp,value"
        assert len(csv.splitlines()) == 4


class TestThroughput:
    def test_desk_scale_ingest_and_query_latency(self, store):
        """16 nodes x 7 metrics x 1 Hz for 120 s, then sub-50 ms queries."""
        t0 = time.perf_counter()
        for t in range(120):
            batch = [
                sample(f"node{i:02d}", m, 0.5, float(t))
                for i in range(1, 17)
                for m in Metric
            ]
            store.ingest(batch)
        ingest_seconds = time.perf_counter() - t0
        assert ingest_seconds < 30  # far above the 112 samples/s live rate

        for metric in Metric:
            t0 = time.perf_counter()
            store.query(metric, window=120, resolution=1, now=119)
            assert time.perf_counter() - t0 < 0.050
        t0 = time.perf_counter()
        store.query(Metric.CPU_UTIL, window=120, resolution=1, node="node08", now=119)
        assert time.perf_counter() - t0 < 0.050

    def test_snapshot_shape(self, store):
        store.ingest([sample("node01", Metric.CPU_UTIL, 0.5, 1.0)])
        snap = store.snapshot()
        assert snap["node01"]["CpuUtil"] == [[1.0, 0.5]]
