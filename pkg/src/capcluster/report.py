"""Plan report: the capacity arithmetic for a cluster config, with the
published reference figures alongside each computed value."""

from __future__ import annotations

import json

from .capacity import (
    NODE_OPTIONS,
    PUBLISHED_CLUSTER_SCORES,
    CameraSpec,
    aggregate_ingest,
    benchmark_for,
    cluster_score,
    offload_time,
    raw_camera_rate,
    storage_cost,
)
from .config import ClusterConfig
from .units import GIB, MB, TB, format_bytes, format_duration, format_rate

# Published reference points the report compares against.
REFERENCE = {
    "ingest_rate": 7.6e9,  # "about 7.6 GBps"
    "storage_per_hour": 27e12,  # "about 27 TB per hour"
    "camera_gib_per_s": 1.05,
    "offload_network_days": 2.8,
    "offload_parallel_minutes": 130.0,
    "offload_assumed_total": 30 * TB,
    "gigabit_link_rate": 125 * MB,
    "hdd_rate": 240 * MB,  # assumed per-disk sustained rate
    "archive_usd_per_tb_month": 4.0,
    "archive_usd_month_30tb": 120.0,
}

FLAGSHIP_CAMERA = CameraSpec(width=2448, height=2048, fps=75)


def build_report(config: ClusterConfig) -> dict:
    totals = aggregate_ingest(config.suite, config.jpeg_ratio)
    per_hour = totals.total_rate * 3600
    cam_rate = raw_camera_rate(FLAGSHIP_CAMERA)

    network_s = offload_time(REFERENCE["offload_assumed_total"],
                             REFERENCE["gigabit_link_rate"], 1)
    parallel_s = offload_time(REFERENCE["offload_assumed_total"],
                              REFERENCE["hdd_rate"], len(config.nodes))
    run_network_s = (
        offload_time(totals.storage_for_run, REFERENCE["gigabit_link_rate"], 1)
        if totals.storage_for_run > 0 else 0.0
    )

    options = []
    for option in NODE_OPTIONS:
        entry = benchmark_for(option.cpu_name)
        options.append({
            "board": option.board,
            "cpu": option.cpu_name,
            "node_count": option.node_count,
            "single_core": entry.single_core,
            "multi_core": entry.multi_core,
            "cluster_score": cluster_score(entry),
            "published_cluster_score": PUBLISHED_CLUSTER_SCORES[option.cpu_name],
        })
    options.sort(key=lambda o: -o["cluster_score"])

    return {
        "config_sha256": config.sha256,
        "cluster": config.cluster_name,
        "suite": {
            "streams": len(config.suite.streams),
            "run_duration": config.suite.run_duration,
            "jpeg_ratio": config.jpeg_ratio,
        },
        "ingest": {
            "total_rate": totals.total_rate,
            "total_rate_text": format_rate(totals.total_rate),
            "per_hour": per_hour,
            "per_hour_text": format_bytes(per_hour),
            "storage_for_run": totals.storage_for_run,
            "storage_for_run_text": format_bytes(totals.storage_for_run),
            "published_rate": REFERENCE["ingest_rate"],
            "published_per_hour": REFERENCE["storage_per_hour"],
        },
        "camera": {
            "width": FLAGSHIP_CAMERA.width,
            "height": FLAGSHIP_CAMERA.height,
            "fps": FLAGSHIP_CAMERA.fps,
            "rate": cam_rate,
            "rate_text": format_rate(cam_rate),
            "rate_gib_per_s": cam_rate / GIB,
            "published_gib_per_s": REFERENCE["camera_gib_per_s"],
        },
        "offload": {
            "assumed_total": REFERENCE["offload_assumed_total"],
            "network_single_link": {
                "link_rate": REFERENCE["gigabit_link_rate"],
                "seconds": network_s,
                "text": format_duration(network_s),
                "published_days": REFERENCE["offload_network_days"],
            },
            "parallel_hdd": {
                "links": len(config.nodes),
                "per_link_rate": REFERENCE["hdd_rate"],
                "seconds": parallel_s,
                "text": format_duration(parallel_s),
                "published_minutes": REFERENCE["offload_parallel_minutes"],
            },
            "run_storage_over_network_seconds": run_network_s,
        },
        "power": {
            "fans_only": config.power.fans_only,
            "idle": config.power.idle,
            "full_load": config.power.full_load,
        },
        "options": options,
        "archive_cost": {
            "usd_per_tb_month": REFERENCE["archive_usd_per_tb_month"],
            "monthly_for_run": storage_cost(
                totals.storage_for_run, REFERENCE["archive_usd_per_tb_month"]),
            "published_monthly_for_30tb": REFERENCE["archive_usd_month_30tb"],
            "monthly_for_30tb": storage_cost(
                30 * TB, REFERENCE["archive_usd_per_tb_month"]),
        },
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_to_text(report: dict) -> str:
    lines = [
        f"Plan report for {report['cluster']} (config {report['config_sha256'][:12]})",
        "",
        f"Suite: {report['suite']['streams']} streams, "
        f"{format_duration(report['suite']['run_duration'])} run, "
        f"jpeg ratio {report['suite']['jpeg_ratio']:g}",
        "",
        "Ingest",
        f"  total rate       {report['ingest']['total_rate_text']:>14}   "
        f"(published ~{format_rate(report['ingest']['published_rate'])})",
        f"  per hour         {report['ingest']['per_hour_text']:>14}   "
        f"(published ~{format_bytes(report['ingest']['published_per_hour'])})",
        f"  run storage      {report['ingest']['storage_for_run_text']:>14}",
        "",
        "Flagship camera",
        f"  {report['camera']['width']}x{report['camera']['height']} @ "
        f"{report['camera']['fps']:g} Hz -> {report['camera']['rate_text']} "
        f"= {report['camera']['rate_gib_per_s']:.2f} GiB/s "
        f"(published {report['camera']['published_gib_per_s']} GiB/s)",
        "",
        f"Offload of {format_bytes(report['offload']['assumed_total'])}",
        f"  single gigabit link   {report['offload']['network_single_link']['text']:>10}   "
        f"(published ~{report['offload']['network_single_link']['published_days']} days)",
        f"  {report['offload']['parallel_hdd']['links']} parallel HDDs       "
        f"{report['offload']['parallel_hdd']['text']:>10}   "
        f"(published ~{report['offload']['parallel_hdd']['published_minutes']:g} min; "
        f"{format_rate(report['offload']['parallel_hdd']['per_link_rate'])} per disk assumed)",
        "",
        "Power anchors (W): "
        f"fans {report['power']['fans_only']:g} / idle {report['power']['idle']:g} / "
        f"full load {report['power']['full_load']:g}",
        "",
        "Compute options by cluster score",
    ]
    for option in report["options"]:
        published = option["published_cluster_score"]
        note = "" if option["cluster_score"] == published else \
            f"  [published: {published:,}]"
        lines.append(
            f"  {option['cluster_score']:>8,}  {option['board']:<22} "
            f"{option['cpu']:<28} x{option['node_count']:<3}"
            f" single {option['single_core']:>5,} multi {option['multi_core']:>6,}{note}"
        )
    cost = report["archive_cost"]
    lines += [
        "",
        f"Archive cost: {cost['monthly_for_run']:.2f} USD/month for this run "
        f"at {cost['usd_per_tb_month']:g} USD/TB/month "
        f"(published ~{cost['published_monthly_for_30tb']:g} USD/month for 30 TB)",
        "",
    ]
    return "\n".join(lines)
