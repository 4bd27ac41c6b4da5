"""Command-line entry point: plan, report, boot, simulate, serve and agent
subcommands over one cluster-config JSON file.

Exit codes: 0 ok, 2 config error, 3 infeasible placement, 4 drops detected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .capacity import suite_to_json
from .config import ClusterConfig, ConfigError, load_config, load_suite
from .netboot import NetbootSim
from .placement import Infeasible, plan_placement
from .report import build_report, report_to_json, report_to_text
from .simulate import EXIT_CONFIG, EXIT_INFEASIBLE, run_simulation
from .units import format_bytes, format_rate

ENV_CONFIG = "CAPCLUSTER_CONFIG"
ENV_BIND = "CAPCLUSTER_BIND"
ENV_CONSOLE = "CAPCLUSTER_CONSOLE"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capcluster",
        description="Capture-cluster planner, simulator and control plane.",
    )
    parser.add_argument("--config", default=os.environ.get(ENV_CONFIG),
                        help=f"cluster config JSON (or ${ENV_CONFIG})")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("report", help="capacity plan report for the config")

    plan = sub.add_parser("plan", help="place the suite onto the nodes")
    plan.add_argument("--suite", help="override suite from a JSON file")
    plan.add_argument("--run-duration", type=float, default=None,
                      help="enforce disk capacity for a run of this many seconds")

    boot = sub.add_parser("boot", help="run the netboot machine")
    boot.add_argument("--all", action="store_true", help="boot every client node")
    boot.add_argument("--mac", help="boot one MAC")

    sim = sub.add_parser("simulate", help="plan, boot, capture, summarize")
    sim.add_argument("--duration", type=float, required=True,
                     help="simulated capture seconds")
    sim.add_argument("--output", help="write the summary JSON here")
    sim.add_argument("--journal", help="manager journal path")

    serve = sub.add_parser("serve", help="run the manager with HTTP console")
    serve.add_argument("--bind", default="127.0.0.1:7010",
                       help="agent TCP address (host:port)")
    serve.add_argument("--http", default=os.environ.get(ENV_BIND, "127.0.0.1:8080"),
                       help=f"HTTP/WebSocket address (or ${ENV_BIND})")
    serve.add_argument("--console-dir", default=os.environ.get(ENV_CONSOLE),
                       help=f"built console directory (or ${ENV_CONSOLE})")
    serve.add_argument("--journal", help="registry journal path")

    agent = sub.add_parser("agent", help="run one node agent")
    agent.add_argument("--mac", required=True)
    agent.add_argument("--connect", required=True, help="manager host:port")

    return parser


def _load(args) -> ClusterConfig:
    if not args.config:
        raise ConfigError("no config given (use --config or $" + ENV_CONFIG + ")")
    return load_config(args.config)


def _emit(doc: dict, as_json: bool, text: str | None = None) -> None:
    if as_json or text is None:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_report(args) -> int:
    config = _load(args)
    report = build_report(config)
    sys.stdout.write(report_to_json(report) if args.json else report_to_text(report))
    return 0


def cmd_plan(args) -> int:
    config = _load(args)
    suite = load_suite(args.suite) if args.suite else config.suite
    try:
        assignment = plan_placement(
            suite, list(config.nodes), config.jpeg_ratio,
            run_duration=args.run_duration,
        )
    except Infeasible as exc:
        _emit({
            "feasible": False,
            "stream": exc.stream_id,
            "reasons": {nid: {"constraint": v.constraint.value,
                              "demanded": v.demanded, "available": v.available}
                        for nid, v in exc.reasons.items()},
        }, args.json, text=f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    doc = {"feasible": True, "assignment": assignment.to_json(),
           "suite": suite_to_json(suite)}
    if args.json:
        _emit(doc, True)
    else:
        lines = ["placement:"]
        for nid in sorted(assignment.ledgers):
            ledger = assignment.ledgers[nid]
            if ledger.streams:
                lines.append(
                    f"  {nid}: {', '.join(sorted(ledger.streams))}"
                    f"  (write {format_rate(ledger.disk_write_used)},"
                    f" cpu {ledger.cpu_used:g})"
                )
        print("\n".join(lines))
    return 0


def cmd_boot(args) -> int:
    config = _load(args)
    sim = NetbootSim(config.netboot)
    macs = config.client_macs() if args.all or not args.mac else [args.mac]
    traces = {mac: sim.power_on(mac).to_json() for mac in macs}
    if args.json:
        _emit({"traces": traces}, True)
    else:
        for mac, trace in traces.items():
            terminal = trace["terminal"]
            status = terminal if isinstance(terminal, str) else (
                f"Failed at {terminal['failed_stage']} ({terminal['cause']})"
            )
            print(f"{mac}  {trace['ip'] or '-':<12} {status}")
    return 0


def cmd_simulate(args) -> int:
    config = _load(args)
    try:
        result = run_simulation(config, args.duration, journal_path=args.journal)
    except RuntimeError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    doc = json.dumps(result, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(doc + "\n")
    if args.json or not args.output:
        print(doc)
    if not args.json and result.get("totals"):
        totals = result["totals"]
        print(
            f"# wrote {format_bytes(totals['written'])}, "
            f"dropped {format_bytes(totals['dropped'])}, exit {result['exit_code']}",
            file=sys.stderr,
        )
    return int(result["exit_code"])


def _split_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    import uvicorn

    from .control.manager import Manager
    from .httpapi import create_app

    config = _load(args)
    host, port = _split_addr(args.bind)
    manager = Manager(config, journal_path=args.journal)

    def launcher(mac: str) -> None:
        import subprocess
        subprocess.Popen(
            [sys.executable, "-m", "capcluster.cli",
             "--config", str(args.config), "agent", "--mac", mac,
             "--connect", f"{tcp_host}:{tcp_port}"],
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
        )

    manager.agent_launcher = launcher
    tcp_host, tcp_port = manager.start(host, port)
    console_dir = args.console_dir
    if console_dir is None and Path("frontend/dist").is_dir():
        console_dir = "frontend/dist"
    app = create_app(manager, console_dir=console_dir)
    http_host, http_port = _split_addr(args.http)
    startup = {"tcp": f"{tcp_host}:{tcp_port}", "http": f"{http_host}:{http_port}",
               "console": console_dir or None}
    print(json.dumps(startup) if args.json else
          f"manager on tcp://{startup['tcp']}, http://{startup['http']}"
          + (f", console from {console_dir}" if console_dir else ""))
    try:
        uvicorn.run(app, host=http_host, port=http_port, log_level="warning")
    finally:
        manager.stop()
    return 0


def cmd_agent(args) -> int:
    from .control.agent import Agent, AgentError

    config = _load(args)
    host, port = _split_addr(args.connect)
    agent = Agent.from_config(config, args.mac, host, port, real_time=True)
    try:
        agent.run_forever()
    except AgentError as exc:
        print(f"agent error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    finally:
        agent.close()
    return 0


_COMMANDS = {
    "report": cmd_report,
    "plan": cmd_plan,
    "boot": cmd_boot,
    "simulate": cmd_simulate,
    "serve": cmd_serve,
    "agent": cmd_agent,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
