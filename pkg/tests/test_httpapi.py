from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from capcluster.control import Agent, Manager
from capcluster.httpapi import create_app

from test_control import small_config, wait_until


@pytest.fixture()
def api(tmp_path):
    config = small_config()
    manager = Manager(config, journal_path=tmp_path / "journal.ndjson")
    host, port = manager.start()
    agents = []

    def attach(node_id: str) -> Agent:
        agent = Agent.from_config(config, config.macs[node_id], host, port,
                                  real_time=False)
        agent.connect()
        agent.start()
        agents.append(agent)
        return agent

    client = TestClient(create_app(manager))
    yield client, manager, attach
    client.close()
    for agent in agents:
        agent.close()
    manager.stop()


class TestNodes:
    def test_list_nodes_tracks_configured_set(self, api):
        client, manager, attach = api
        nodes = client.get("/nodes").json()
        assert [n["id"] for n in nodes] == ["node01", "node02", "node03"]
        assert all(n["lifecycle"] == "Offline" for n in nodes)

    def test_get_node_and_404(self, api):
        client, manager, attach = api
        attach("node02")
        doc = client.get("/nodes/node02").json()
        assert doc["lifecycle"] == "Ready"
        assert doc["mac"] == "02:00:00:00:00:02"
        missing = client.get("/nodes/node99")
        assert missing.status_code == 404
        assert missing.json()["detail"]["code"] == "UnknownNode"

    def test_power_on_returns_boot_trace(self, api):
        client, manager, attach = api
        response = client.post("/nodes/node02/power_on").json()
        assert response["boot_trace"]["terminal"] == "AgentUp"
        assert client.get("/nodes/node02").json()["lifecycle"] == "Booting"
        # the server node has no boot machine
        assert client.post("/nodes/node01/power_on").json()["boot_trace"] is None


class TestApps:
    def test_start_stop_via_http(self, api):
        client, manager, attach = api
        attach("node02")
        client.post("/plan", json={"apply": True})
        response = client.post("/nodes/node02/apps/cap-eth01/start")
        assert response.status_code == 200
        assert response.json() == {"app_id": "cap-eth01", "already_running": False}
        assert client.get("/nodes/node02").json()["lifecycle"] == "Capturing"
        # second start is an idempotent ack
        assert client.post("/nodes/node02/apps/cap-eth01/start").json()[
            "already_running"] is True
        assert client.post("/nodes/node02/apps/cap-eth01/stop").json()[
            "already_stopped"] is False
        assert client.get("/nodes/node02").json()["lifecycle"] == "Ready"

    def test_error_surfaces_code(self, api):
        client, manager, attach = api
        client.post("/plan", json={"apply": True})
        response = client.post("/nodes/node03/apps/cap-usb01/start")
        assert response.status_code == 409
        body = response.json()["detail"]
        assert body["code"] == "NotPlaced"
        response = client.post("/nodes/node01/apps/cap-usb01/start")
        assert response.status_code == 409
        assert response.json()["detail"]["code"] == "NodeUnavailable"

    def test_custom_app_from_body(self, api):
        client, manager, attach = api
        attach("node03")
        response = client.post(
            "/nodes/node03/apps/burn/start",
            json={"kind": "Custom", "command": "stress --cpu 8"},
        )
        assert response.status_code == 200
        assert "burn" in client.get("/nodes/node03").json()["running_apps"]


class TestPlanEndpoint:
    def test_plan_default_suite(self, api):
        client, manager, attach = api
        doc = client.post("/plan", json={}).json()
        assert doc["feasible"] is True
        assert doc["assignment"]["placements"]["usb01"] == "node01"

    def test_plan_infeasible_reports_reasons(self, api):
        client, manager, attach = api
        suite = {
            "run_duration": 30,
            "streams": [
                {"id": f"x{i}", "interface": "usb3", "raw_rate": 1_500e6}
                for i in range(4)
            ],
        }
        doc = client.post("/plan", json={"suite": suite}).json()
        assert doc["feasible"] is False
        assert doc["infeasible_stream"] == "x3"  # first three take one node each
        assert all(r["constraint"] == "DiskWrite" for r in doc["reasons"].values())

    def test_what_if_assignment_verification(self, api):
        client, manager, attach = api
        # both heavy streams on node01: 2,000 MB/s > 1,700 MB/s
        doc = client.post("/plan", json={
            "assignment": {"usb01": "node01", "eth01": "node01", "cam01": "node02"},
            "run_duration": 0,
        }).json()
        assert doc["feasible"] is False
        v = doc["violations"][0]
        assert v == {"node": "node01", "constraint": "DiskWrite",
                     "demanded": 2_000e6, "available": 1_700e6}


class TestMetricsEndpoint:
    def test_metrics_roundtrip(self, api):
        client, manager, attach = api
        agent = attach("node02")
        client.post("/plan", json={"apply": True})
        client.post("/nodes/node02/apps/cap-eth01/start")
        agent.run_capture(5.0)
        assert wait_until(lambda: manager.monitor.query(
            "NetRx", window=1e9, resolution=1, node="node02"))
        doc = client.get("/metrics", params={
            "metric": "NetRx", "node": "node02", "window": 1e9, "resolution": 1,
        }).json()
        assert len(doc["points"]) == 5
        assert all(v == 800e6 for _, v in doc["points"])

    def test_unknown_metric_404(self, api):
        client, manager, attach = api
        assert client.get("/metrics", params={"metric": "Bogus"}).status_code == 404

    def test_csv_export(self, api):
        client, manager, attach = api
        agent = attach("node02")
        client.post("/plan", json={"apply": True})
        client.post("/nodes/node02/apps/cap-eth01/start")
        agent.run_capture(3.0)
        wait_until(lambda: manager.monitor.query(
            "Drops", window=1e9, resolution=1, node="node02"))
        text = client.get("/metrics/export",
                          params={"node": "node02", "metric": "Drops"}).text
        assert text.splitlines()[0] == "timestamp,value"
        assert len(text.strip().splitlines()) == 4


class TestWebSocket:
    def test_snapshot_then_pushed_events(self, api):
        client, manager, attach = api
        with client.websocket_connect("/ws/events") as ws:
            snapshot = ws.receive_json()
            assert snapshot["event"] == "snapshot"
            assert len(snapshot["nodes"]) == 3
            attach("node02")  # registration pushes Booting -> Ready node events
            seen = []
            while True:
                event = ws.receive_json()
                assert event["event"] == "node"
                assert event["node"]["id"] == "node02"
                seen.append(event["node"]["lifecycle"])
                if event["node"]["lifecycle"] == "Ready":
                    break
            assert seen[0] == "Booting"

    def test_summary_endpoint(self, api):
        client, manager, attach = api
        doc = client.get("/cluster/summary").json()
        assert doc["lifecycle_counts"]["Offline"] == 3
        assert doc["estimated_watts"] == 130.0
