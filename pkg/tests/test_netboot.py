from __future__ import annotations

import pytest

from capcluster.netboot import (
    BOOT_ORDER,
    REQUIRED_TFTP_FILES,
    BootConfig,
    BootStage,
    NetbootSim,
    boot_node,
    classify_write,
)

MAC_A = "02:10:51:00:00:02"
MAC_B = "02:10:51:00:00:03"
SERVER = "02:10:51:00:00:01"


@pytest.fixture()
def config() -> BootConfig:
    return BootConfig(
        dhcp_table={MAC_A: "10.0.0.2", MAC_B: "10.0.0.3"},
        server_mac=SERVER,
    )


class TestBootSequence:
    def test_clean_boot_walks_all_nine_stages(self, config):
        trace = boot_node(MAC_A, config)
        assert trace.agent_up
        assert [s for s, _ in trace.states] == list(BOOT_ORDER)
        assert len(trace.states) == 9
        assert trace.ip == "10.0.0.2"

    def test_timestamps_nondecreasing_with_latency(self):
        config = BootConfig(dhcp_table={MAC_A: "10.0.0.2"}, stage_latency=0.5)
        trace = boot_node(MAC_A, config, start_time=10.0)
        times = [t for _, t in trace.states]
        assert times == sorted(times)
        assert times[0] == 10.0
        assert times[-1] == pytest.approx(10.0 + 0.5 * 8)

    def test_mount_modes_recorded(self, config):
        trace = boot_node(MAC_A, config)
        modes = dict(trace.mounts)
        assert modes["/clusternfs"] == "read_only"
        assert modes["/tmp"] == modes["/var/log"] == modes["/var/tmp"] == "volatile"
        assert modes["/disk"] == "writable"

    def test_unknown_mac_fails_at_dhcp(self, config):
        trace = boot_node("02:10:51:00:00:99", config)
        assert not trace.agent_up
        assert trace.failure.stage is BootStage.DHCP_ASSIGNED
        assert trace.failure.cause == "UnknownMac"
        assert [s for s, _ in trace.states] == [BootStage.POWER_OFF, BootStage.BIOS_PXE]

    @pytest.mark.parametrize("missing", REQUIRED_TFTP_FILES)
    def test_each_missing_tftp_artifact(self, missing, config):
        files = frozenset(f for f in REQUIRED_TFTP_FILES if f != missing)
        cfg = BootConfig(dhcp_table=config.dhcp_table, tftp_files=files)
        trace = boot_node(MAC_A, cfg)
        assert trace.failure.stage is BootStage.TFTP_LOADED
        assert trace.failure.cause == f"MissingFile({missing})"

    @pytest.mark.parametrize("stage", BOOT_ORDER)
    def test_injected_fault_at_every_stage(self, stage, config):
        trace = boot_node(MAC_A, config, faults={stage})
        assert not trace.agent_up
        assert trace.failure.stage is stage
        assert trace.failure.cause == "Injected"
        # trace holds exactly the stages before the failed one
        expected = list(BOOT_ORDER[: BOOT_ORDER.index(stage)])
        assert [s for s, _ in trace.states] == expected

    def test_server_mac_is_never_netbooted(self, config):
        with pytest.raises(ValueError):
            boot_node(SERVER, config)

    def test_dhcp_determinism(self, config):
        ips = {boot_node(MAC_A, config).ip for _ in range(5)}
        assert ips == {"10.0.0.2"}

    def test_malformed_mac_rejected_in_config(self):
        with pytest.raises(ValueError):
            BootConfig(dhcp_table={"not-a-mac": "10.0.0.2"})

    def test_duplicate_ips_rejected(self):
        with pytest.raises(ValueError):
            BootConfig(dhcp_table={MAC_A: "10.0.0.2", MAC_B: "10.0.0.2"})


class TestWriteProbe:
    def test_partition(self, config):
        assert classify_write("/var/log/syslog", config).durability == "volatile"
        assert classify_write("/tmp/x", config).durability == "volatile"
        assert classify_write("/disk/run1.bag", config).durability == "persistent"
        rejected = classify_write("/etc/hosts", config)
        assert not rejected.accepted
        assert rejected.reason == "ReadOnlyRoot"

    def test_every_accepted_write_is_exactly_one_kind(self, config):
        for path in ("/tmp/a", "/var/tmp/b", "/var/log/c", "/disk/d", "/usr/bin/e", "/home/f"):
            result = classify_write(path, config)
            if result.accepted:
                assert result.durability in ("volatile", "persistent")
                assert result.reason is None
            else:
                assert result.durability is None

    def test_prefix_matching_is_path_aware(self, config):
        # /diskette is not under /disk
        assert not classify_write("/diskette/x", config).accepted
        assert classify_write("/disk", config).accepted

    def test_relative_path_rejected(self, config):
        with pytest.raises(ValueError):
            classify_write("var/log/x", config)

    def test_probe_requires_booted_node(self, config):
        sim = NetbootSim(config)
        with pytest.raises(RuntimeError):
            sim.write_probe(MAC_A, "/disk/x")
        sim.power_on(MAC_A, faults={BootStage.KERNEL_BOOT})
        with pytest.raises(RuntimeError):
            sim.write_probe(MAC_A, "/disk/x")


class TestReboot:
    def test_volatile_writes_lost_persistent_survive(self, config):
        sim = NetbootSim(config)
        sim.power_on(MAC_A)
        sim.write_probe(MAC_A, "/var/log/session.log")
        sim.write_probe(MAC_A, "/tmp/scratch")
        sim.write_probe(MAC_A, "/disk/run1.bag")
        host = sim.hosts[MAC_A]
        assert host.volatile_writes == {"/var/log/session.log", "/tmp/scratch"}
        assert host.persistent_writes == {"/disk/run1.bag"}

        sim.reboot(MAC_A)
        assert host.volatile_writes == set()
        assert host.persistent_writes == {"/disk/run1.bag"}

    def test_reboot_reproduces_state_sequence(self, config):
        sim = NetbootSim(config)
        first = sim.power_on(MAC_A)
        second = sim.reboot(MAC_A)
        assert [s for s, _ in first.states] == [s for s, _ in second.states]
        assert second.agent_up

    def test_reboot_after_mac_removed_fails_dhcp(self, config):
        sim = NetbootSim(config)
        sim.power_on(MAC_A)
        sim.config = BootConfig(dhcp_table={MAC_B: "10.0.0.3"}, server_mac=SERVER)
        trace = sim.reboot(MAC_A)
        assert trace.failure.stage is BootStage.DHCP_ASSIGNED

    def test_reboot_requires_prior_agent_up(self, config):
        sim = NetbootSim(config)
        with pytest.raises(RuntimeError):
            sim.reboot(MAC_A)


class TestTraceJson:
    def test_success_shape(self, config):
        doc = boot_node(MAC_A, config).to_json()
        assert doc["terminal"] == "AgentUp"
        assert len(doc["states"]) == 9
        assert doc["ip"] == "10.0.0.2"

    def test_failure_shape(self, config):
        doc = boot_node(MAC_A, config, faults={BootStage.NFS_ROOT_MOUNTED}).to_json()
        assert doc["terminal"] == {"failed_stage": "NfsRootMounted", "cause": "Injected"}
