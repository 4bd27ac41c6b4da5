#!/usr/bin/env python3
"""Record console test fixtures from a live in-process manager.

Runs the shipped 16-node config (1 s pipeline tick for speed), powers nodes
on, captures for a simulated hour, and freezes the HTTP/WebSocket responses
the console's tests replay. Re-run after changing the wire contract:

    python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from capcluster.config import parse_config
from capcluster.control import Agent, Manager
from capcluster.control.manager import ControlError
from capcluster.control.registry import Lifecycle
from capcluster.httpapi import create_app

REPO = Path(__file__).resolve().parents[2]
FIXTURES = REPO / "frontend" / "tests" / "fixtures"
SIM_EPOCH = 1_700_000_000.0
CAPTURE_SECONDS = 3600


def main() -> int:
    doc = json.loads((REPO / "configs" / "cluster16.json").read_text())
    doc["pipeline"]["tick"] = 1.0  # coarse ticks: a simulated hour stays fast
    config = parse_config(doc)

    manager = Manager(config)
    host, port = manager.start()
    agents: dict[str, Agent] = {}

    def launcher(mac: str) -> None:
        agent = Agent.from_config(config, mac, host, port, real_time=False,
                                  clock=lambda: SIM_EPOCH)
        agent.connect()
        agent.start()
        agents[config.node_id_for_mac(mac)] = agent

    manager.agent_launcher = launcher
    client = TestClient(create_app(manager))
    FIXTURES.mkdir(parents=True, exist_ok=True)

    try:
        with client.websocket_connect("/ws/events") as ws:
            snapshot = ws.receive_json()

            powered = [n.id for n in config.nodes if n.id != "node16"]
            for node_id in powered:  # node16 stays dark for the grid fixture
                client.post(f"/nodes/{node_id}/power_on")
            _wait_ready(manager, powered)

            plan = client.post("/plan", json={"apply": True}).json()
            assert plan["feasible"]
            started = 0
            for app_id in sorted(manager.apps):
                try:
                    manager.start_app(manager.apps[app_id])
                    started += 1
                except ControlError:
                    pass
            print(f"{started} capture apps started")

            for node_id in powered:
                agent = agents.get(node_id)
                if agent is not None and agent.engine.capturing():
                    agent.run_capture(CAPTURE_SECONDS)

            events = [snapshot]
            metric_events = 0
            while len(events) < 80 or metric_events < 10:
                event = ws.receive_json()
                events.append(event)
                if event.get("event") == "metrics":
                    metric_events += 1

        _dump("ws_events.json", events)
        _dump("nodes.json", client.get("/nodes").json())
        _dump("summary.json", client.get("/cluster/summary").json())
        _dump("config.json", client.get("/api/config").json())
        _dump("boot.json", client.get("/boot").json())
        _dump("assignment.json", plan["assignment"])
        _dump("metrics_cpu_1h.json", client.get("/metrics", params={
            "metric": "CpuUtil", "window": 3600, "resolution": 60,
        }).json())
        _dump("metrics_cpu_node05.json", client.get("/metrics", params={
            "metric": "CpuUtil", "window": 3600, "resolution": 60, "node": "node05",
        }).json())
        # what-if: three full-rate USB streams forced onto node01
        _dump("plan_whatif.json", client.post("/plan", json={
            "assignment": {"usb01": "node01", "usb02": "node01", "usb03": "node01"},
            "run_duration": 0,
        }).json())
        _dump("plan_replan.json", plan)
    finally:
        client.close()
        for agent in agents.values():
            agent.close()
        manager.stop()
    return 0


def _wait_ready(manager: Manager, node_ids: list[str]) -> None:
    import time
    deadline = time.monotonic() + 30
    want = set(node_ids)
    while time.monotonic() < deadline:
        ready = {n.node_id for n in manager.registry.nodes()
                 if n.lifecycle is Lifecycle.READY}
        if want <= ready:
            return
        time.sleep(0.02)
    raise RuntimeError("agents did not come up")


def _dump(name: str, doc) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(REPO)}")


if __name__ == "__main__":
    sys.exit(main())
