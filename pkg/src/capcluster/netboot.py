"""Simulated boot-on-LAN pipeline.

Each node walks a fixed nine-stage machine from power-off to a running agent:
DHCP by MAC, bootloader and kernel fetch over TFTP, read-only network root,
volatile overlays for the writable system paths, and the local data disk.
The simulation is in-process and deterministic; wire protocols are out of
scope. Fault injection covers the failure semantics instead.
"""

from __future__ import annotations

import posixpath
import re
from dataclasses import dataclass, field
from enum import Enum


class BootStage(str, Enum):
    POWER_OFF = "PowerOff"
    BIOS_PXE = "BiosPxe"
    DHCP_ASSIGNED = "DhcpAssigned"
    TFTP_LOADED = "TftpLoaded"
    KERNEL_BOOT = "KernelBoot"
    NFS_ROOT_MOUNTED = "NfsRootMounted"
    TMPFS_OVERLAID = "TmpfsOverlaid"
    DISK_MOUNTED = "DiskMounted"
    AGENT_UP = "AgentUp"


BOOT_ORDER: tuple[BootStage, ...] = tuple(BootStage)

# Artifacts the TFTP step must find, checked in this order.
REQUIRED_TFTP_FILES: tuple[str, ...] = ("pxelinux_image", "pxelinux_config", "kernel", "initrd")

_MAC_RE = re.compile(r"^([0-9a-f]{2}:){5}[0-9a-f]{2}$")


@dataclass(frozen=True)
class BootConfig:
    """Server-side state a client boot depends on."""

    dhcp_table: dict[str, str]  # MAC -> IP
    tftp_files: frozenset[str] = frozenset(REQUIRED_TFTP_FILES)
    nfs_root: str = "/clusternfs"
    tmpfs_paths: tuple[str, ...] = ("/tmp", "/var/log", "/var/tmp")
    data_mount: str = "/disk"
    stage_latency: float = 0.0  # simulated seconds per stage transition
    server_mac: str | None = None  # the server board itself; never netbooted

    def __post_init__(self) -> None:
        for mac in self.dhcp_table:
            if not _MAC_RE.match(mac):
                raise ValueError(f"malformed MAC {mac!r}")
        ips = list(self.dhcp_table.values())
        if len(ips) != len(set(ips)):
            raise ValueError("DHCP table IPs must be unique")
        if not self.tmpfs_paths:
            raise ValueError("tmpfs_paths must be non-empty")
        if not self.data_mount:
            raise ValueError("data_mount must be non-empty")
        if self.stage_latency < 0:
            raise ValueError("stage_latency must be >= 0")


@dataclass(frozen=True)
class BootFailure:
    stage: BootStage
    cause: str  # "UnknownMac", "MissingFile(<name>)", "Injected"


@dataclass
class BootTrace:
    """Ordered record of the stages one boot attempt completed."""

    mac: str
    states: list[tuple[BootStage, float]] = field(default_factory=list)
    mounts: list[tuple[str, str]] = field(default_factory=list)  # (path, mode)
    failure: BootFailure | None = None
    ip: str | None = None

    @property
    def agent_up(self) -> bool:
        return self.failure is None

    def to_json(self) -> dict:
        return {
            "mac": self.mac,
            "ip": self.ip,
            "states": [{"stage": s.value, "t": t} for s, t in self.states],
            "mounts": [{"path": p, "mode": m} for p, m in self.mounts],
            "terminal": "AgentUp" if self.agent_up else {
                "failed_stage": self.failure.stage.value,
                "cause": self.failure.cause,
            },
        }


def boot_node(
    mac: str,
    config: BootConfig,
    faults: set[BootStage] | None = None,
    start_time: float = 0.0,
) -> BootTrace:
    """Run one boot attempt. A stage listed in faults fails on entry; the
    trace keeps the stages completed before the failure."""
    if config.server_mac is not None and mac == config.server_mac:
        raise ValueError(f"{mac} is the server node; it is never netbooted")
    faults = faults or set()
    trace = BootTrace(mac=mac)
    t = start_time

    for stage in BOOT_ORDER:
        if stage in faults:
            trace.failure = BootFailure(stage, "Injected")
            return trace
        if stage is BootStage.DHCP_ASSIGNED:
            if mac not in config.dhcp_table:
                trace.failure = BootFailure(stage, "UnknownMac")
                return trace
            trace.ip = config.dhcp_table[mac]
        if stage is BootStage.TFTP_LOADED:
            for name in REQUIRED_TFTP_FILES:
                if name not in config.tftp_files:
                    trace.failure = BootFailure(stage, f"MissingFile({name})")
                    return trace
        if stage is BootStage.NFS_ROOT_MOUNTED:
            trace.mounts.append((config.nfs_root, "read_only"))
        if stage is BootStage.TMPFS_OVERLAID:
            for path in config.tmpfs_paths:
                trace.mounts.append((path, "volatile"))
        if stage is BootStage.DISK_MOUNTED:
            trace.mounts.append((config.data_mount, "writable"))
        trace.states.append((stage, t))
        t += config.stage_latency
    return trace


@dataclass(frozen=True)
class WriteResult:
    accepted: bool
    durability: str | None = None  # "volatile" | "persistent"
    reason: str | None = None  # "ReadOnlyRoot" on rejection


def classify_write(path: str, config: BootConfig) -> WriteResult:
    """Where a write at `path` would land on a booted client filesystem."""
    if not posixpath.isabs(path):
        raise ValueError(f"write path must be absolute, got {path!r}")
    norm = posixpath.normpath(path)
    if _under(norm, config.data_mount):
        return WriteResult(accepted=True, durability="persistent")
    for tmpfs in config.tmpfs_paths:
        if _under(norm, tmpfs):
            return WriteResult(accepted=True, durability="volatile")
    return WriteResult(accepted=False, reason="ReadOnlyRoot")


def _under(path: str, root: str) -> bool:
    root = posixpath.normpath(root)
    return path == root or path.startswith(root.rstrip("/") + "/")


@dataclass
class HostState:
    mac: str
    trace: BootTrace
    volatile_writes: set[str] = field(default_factory=set)
    persistent_writes: set[str] = field(default_factory=set)


class NetbootSim:
    """Boot-state and filesystem bookkeeping for a set of client nodes."""

    def __init__(self, config: BootConfig):
        self.config = config
        self.hosts: dict[str, HostState] = {}

    def power_on(
        self,
        mac: str,
        faults: set[BootStage] | None = None,
        at: float = 0.0,
    ) -> BootTrace:
        trace = boot_node(mac, self.config, faults, start_time=at)
        host = self.hosts.get(mac)
        if host is None:
            self.hosts[mac] = HostState(mac=mac, trace=trace)
        else:
            host.trace = trace
        return trace

    def write_probe(self, mac: str, path: str) -> WriteResult:
        host = self._booted(mac)
        result = classify_write(path, self.config)
        if result.accepted:
            norm = posixpath.normpath(path)
            if result.durability == "persistent":
                host.persistent_writes.add(norm)
            else:
                host.volatile_writes.add(norm)
        return result

    def reboot(self, mac: str, faults: set[BootStage] | None = None, at: float = 0.0) -> BootTrace:
        """Re-run the boot machine; volatile writes are lost, disk data stays."""
        host = self._booted(mac)
        host.volatile_writes.clear()
        host.trace = boot_node(mac, self.config, faults, start_time=at)
        return host.trace

    def _booted(self, mac: str) -> HostState:
        host = self.hosts.get(mac)
        if host is None or not host.trace.agent_up:
            raise RuntimeError(f"node {mac} is not booted")
        return host
