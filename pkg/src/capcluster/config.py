"""Cluster configuration: one JSON document describing nodes, the MAC/IP
table, the sensor suite, power model and simulation knobs.

The schema ships in docs/cluster-config.schema.json; structural validation
runs through jsonschema so errors carry a JSON path, then semantic checks
(id resolution, MAC table coverage) run on top.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .capacity import PowerModel, SensorSuite, suite_from_json
from .netboot import BootConfig, REQUIRED_TFTP_FILES
from .placement import NodeSpec

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "capcluster cluster config",
    "type": "object",
    "required": ["cluster_name", "server", "nodes", "suite"],
    "additionalProperties": False,
    "properties": {
        "cluster_name": {"type": "string", "minLength": 1},
        "server": {"type": "string", "minLength": 1},
        "jpeg_ratio": {"type": "number", "minimum": 1},
        "nodes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "mac", "ip"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "mac": {"type": "string", "pattern": "^([0-9a-f]{2}:){5}[0-9a-f]{2}$"},
                    "ip": {"type": "string", "minLength": 7},
                    "usb3_ports": {"type": "integer", "minimum": 0},
                    "gige_ports": {"type": "integer", "minimum": 0},
                    "cpu_budget": {"type": "number", "minimum": 0},
                    "disk_write_rate": {"type": "number", "minimum": 0},
                    "disk_capacity": {"type": "number", "minimum": 0},
                },
            },
        },
        "suite": {
            "type": "object",
            "required": ["run_duration", "streams"],
            "additionalProperties": False,
            "properties": {
                "run_duration": {"type": "number", "exclusiveMinimum": 0},
                "streams": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "interface", "raw_rate"],
                        "additionalProperties": False,
                        "properties": {
                            "id": {"type": "string", "minLength": 1},
                            "interface": {"enum": ["usb3", "gige"]},
                            "raw_rate": {"type": "number", "minimum": 0},
                            "compress": {"enum": ["none", "jpeg"]},
                            "cpu_units": {"type": "number", "minimum": 0},
                        },
                    },
                },
            },
        },
        "power": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fans_only": {"type": "number", "minimum": 0},
                "idle": {"type": "number", "minimum": 0},
                "full_load": {"type": "number", "minimum": 0},
            },
        },
        "netboot": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tftp_files": {"type": "array", "items": {"type": "string"}},
                "nfs_root": {"type": "string", "minLength": 1},
                "tmpfs_paths": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                "data_mount": {"type": "string", "minLength": 1},
                "stage_latency": {"type": "number", "minimum": 0},
            },
        },
        "pipeline": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "queue_bound": {"type": "number", "minimum": 0},
                "tick": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "heartbeat": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "interval": {"type": "number", "exclusiveMinimum": 0},
                "degraded_after": {"type": "integer", "minimum": 1},
                "offline_after": {"type": "integer", "minimum": 1},
            },
        },
    },
}


class ConfigError(Exception):
    """Invalid cluster config; `path` points at the offending JSON node."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class HeartbeatPolicy:
    interval: float = 1.0
    degraded_after: int = 3  # missed intervals until Degraded
    offline_after: int = 10  # missed intervals until Offline


@dataclass(frozen=True)
class PipelineDefaults:
    queue_bound: int = 10**9
    tick: float = 0.1


@dataclass(frozen=True)
class ClusterConfig:
    cluster_name: str
    server_id: str
    nodes: tuple[NodeSpec, ...]
    macs: dict[str, str]  # node id -> MAC
    ips: dict[str, str]  # MAC -> IP
    suite: SensorSuite
    power: PowerModel
    jpeg_ratio: float
    netboot: BootConfig
    pipeline: PipelineDefaults
    heartbeat: HeartbeatPolicy
    sha256: str
    raw: dict

    def node_by_id(self, node_id: str) -> NodeSpec:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def node_id_for_mac(self, mac: str) -> str:
        for node_id, m in self.macs.items():
            if m == mac:
                return node_id
        raise KeyError(mac)

    def client_macs(self) -> list[str]:
        """MACs of the netbooted nodes, i.e. everything but the server."""
        return [self.macs[n.id] for n in self.nodes if n.id != self.server_id]


def parse_config(doc: dict, source_bytes: bytes | None = None) -> ClusterConfig:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: e.json_path)
    if errors:
        first = errors[0]
        raise ConfigError(first.message, first.json_path)

    node_ids = [n["id"] for n in doc["nodes"]]
    if len(node_ids) != len(set(node_ids)):
        raise ConfigError("node ids must be unique", "$.nodes")
    if doc["server"] not in node_ids:
        raise ConfigError(f"server {doc['server']!r} is not a configured node", "$.server")
    macs = {n["id"]: n["mac"] for n in doc["nodes"]}
    if len(set(macs.values())) != len(macs):
        raise ConfigError("node MACs must be unique", "$.nodes")
    ips = {n["mac"]: n["ip"] for n in doc["nodes"]}
    if len(set(ips.values())) != len(ips):
        raise ConfigError("node IPs must be unique", "$.nodes")

    try:
        suite = suite_from_json(doc["suite"])
    except ValueError as exc:
        raise ConfigError(str(exc), "$.suite") from exc

    nodes = tuple(
        NodeSpec(
            id=n["id"],
            usb3_ports=n.get("usb3_ports", 2),
            gige_ports=n.get("gige_ports", 1),
            cpu_budget=n.get("cpu_budget", 2.0),
            disk_write_rate=n.get("disk_write_rate", 1.7e9),
            disk_capacity=n.get("disk_capacity", 2e12),
        )
        for n in doc["nodes"]
    )

    nb = doc.get("netboot", {})
    server_mac = macs[doc["server"]]
    # Only clients appear in the DHCP table; the server carries the services.
    dhcp_table = {n["mac"]: n["ip"] for n in doc["nodes"] if n["id"] != doc["server"]}
    try:
        netboot = BootConfig(
            dhcp_table=dhcp_table,
            tftp_files=frozenset(nb.get("tftp_files", REQUIRED_TFTP_FILES)),
            nfs_root=nb.get("nfs_root", "/clusternfs"),
            tmpfs_paths=tuple(nb.get("tmpfs_paths", ("/tmp", "/var/log", "/var/tmp"))),
            data_mount=nb.get("data_mount", "/disk"),
            stage_latency=nb.get("stage_latency", 0.0),
            server_mac=server_mac,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "$.netboot") from exc

    power_doc = doc.get("power", {})
    try:
        power = PowerModel(
            fans_only=power_doc.get("fans_only", 50.0),
            idle=power_doc.get("idle", 130.0),
            full_load=power_doc.get("full_load", 750.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "$.power") from exc

    pipe = doc.get("pipeline", {})
    hb = doc.get("heartbeat", {})
    digest = hashlib.sha256(
        source_bytes if source_bytes is not None
        else json.dumps(doc, sort_keys=True).encode()
    ).hexdigest()

    return ClusterConfig(
        cluster_name=doc["cluster_name"],
        server_id=doc["server"],
        nodes=nodes,
        macs=macs,
        ips=ips,
        suite=suite,
        power=power,
        jpeg_ratio=float(doc.get("jpeg_ratio", 4.0)),
        netboot=netboot,
        pipeline=PipelineDefaults(
            queue_bound=int(pipe.get("queue_bound", 10**9)),
            tick=float(pipe.get("tick", 0.1)),
        ),
        heartbeat=HeartbeatPolicy(
            interval=float(hb.get("interval", 1.0)),
            degraded_after=int(hb.get("degraded_after", 3)),
            offline_after=int(hb.get("offline_after", 10)),
        ),
        sha256=digest,
        raw=doc,
    )


def load_config(path: str | Path) -> ClusterConfig:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}", "$") from exc
    return parse_config(doc, source_bytes=raw)


def load_suite(path: str | Path) -> SensorSuite:
    doc = json.loads(Path(path).read_text())
    return suite_from_json(doc)
