"""End-to-end simulated run, the core of the `simulate` subcommand.

One process hosts the manager and one agent per node over loopback TCP.
The flow mirrors an operator session: plan placement, power every node on,
start all capture apps, run the data plane for the requested duration, stop,
and summarize. Captures run node by node in declared order against a fixed
simulated time base, so results are reproducible.
"""

from __future__ import annotations

import time

from .capacity import power_estimate
from .config import ClusterConfig
from .control import Agent, Manager
from .control.manager import ControlError
from .control.registry import Lifecycle
from .placement import verify_assignment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DROPS = 4


def run_simulation(
    config: ClusterConfig,
    duration: float,
    journal_path=None,
    register_timeout: float = 30.0,
) -> dict:
    """Returns the summary document; "exit_code" carries the CLI status."""
    sim_epoch = float(int(time.time()))
    manager = Manager(config, journal_path=journal_path)
    agents: dict[str, Agent] = {}
    host, port = manager.start()

    def launcher(mac: str) -> None:
        agent = Agent.from_config(config, mac, host, port, real_time=False,
                                  clock=lambda: sim_epoch)
        agent.connect()
        agent.start()
        agents[config.node_id_for_mac(mac)] = agent

    manager.agent_launcher = launcher

    result: dict = {
        "config_sha256": config.sha256,
        "cluster": config.cluster_name,
        "duration": duration,
    }
    try:
        # Plan on sustained rates and ports, the way the cluster was sized;
        # run-length storage shows up in the verification report below and,
        # if a disk really fills, as drops and exit code 4.
        plan = manager.plan(apply=True)
        if not plan["feasible"]:
            result.update(plan)
            result["exit_code"] = EXIT_INFEASIBLE
            return result
        result["placement"] = plan["assignment"]

        boot: dict[str, dict | None] = {}
        for node in config.nodes:
            trace = manager.power_on(node.id)
            boot[node.id] = trace.to_json() if trace is not None else None
        result["boot"] = boot

        deadline = time.monotonic() + register_timeout
        want = {n.id for n in config.nodes}
        while time.monotonic() < deadline:
            ready = {n.node_id for n in manager.registry.nodes()
                     if n.lifecycle is Lifecycle.READY}
            if want <= ready:
                break
            time.sleep(0.02)
        else:
            raise RuntimeError("agents failed to register in time")

        violations = verify_assignment(
            manager.assignment, config.suite, list(config.nodes),
            config.jpeg_ratio, run_duration=duration,
        )
        result["violations"] = [
            {"node": v.node_id, "constraint": v.constraint.value,
             "demanded": v.demanded, "available": v.available}
            for v in violations
        ]

        for app_id in sorted(manager.apps):
            manager.start_app(manager.apps[app_id])

        per_node: dict[str, dict] = {}
        total_written = total_dropped = 0
        for node in config.nodes:
            agent = agents.get(node.id)
            if agent is None or not agent.engine.capturing():
                continue
            summary = agent.run_capture(duration)
            ledger = agent.engine.conservation()
            per_node[node.id] = {
                "written": summary.total_written,
                "dropped": summary.total_dropped,
                "peak_queue": summary.peak_queue,
                "mean_cpu": summary.mean_cpu,
                "time_to_disk_full": summary.time_to_disk_full,
                "conservation": ledger,
            }
            total_written += summary.total_written
            total_dropped += summary.total_dropped

        for node in manager.registry.nodes():
            for app_id in sorted(node.running_apps):
                try:
                    manager.stop_app(node.node_id, app_id)
                except ControlError:
                    pass

        result["per_node"] = per_node
        result["totals"] = {"written": total_written, "dropped": total_dropped}
        result["power_trace"] = _power_trace(manager, config, sim_epoch, duration)
        result["exit_code"] = EXIT_DROPS if total_dropped > 0 else EXIT_OK
        return result
    finally:
        for agent in agents.values():
            agent.close()
        manager.stop()


def _power_trace(manager: Manager, config: ClusterConfig,
                 sim_epoch: float, duration: float) -> list[list[float]]:
    """Cluster watts per simulated second, from the stored CpuUtil series."""
    seconds = int(round(duration))
    if seconds <= 0:
        return []
    per_node: dict[str, dict[float, float]] = {}
    for node in config.nodes:
        points = manager.monitor.query(
            "CpuUtil", window=duration + 2, resolution=1,
            node=node.id, now=sim_epoch + seconds,
        )
        per_node[node.id] = dict(points)
    trace = []
    n = len(config.nodes)
    for k in range(1, seconds + 1):
        ts = sim_epoch + k
        util = sum(per_node[node.id].get(ts, 0.0) for node in config.nodes) / n
        trace.append([float(k), power_estimate(config.power, min(1.0, util))])
    return trace
