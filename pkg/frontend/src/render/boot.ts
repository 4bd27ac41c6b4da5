// Boot timelines: one row per node, nine stages left to right, the failed
// stage (if any) marked with its cause.

import type { BootTraceJson } from "../types.js";

export const BOOT_STAGES = [
    "PowerOff", "BiosPxe", "DhcpAssigned", "TftpLoaded", "KernelBoot",
    "NfsRootMounted", "TmpfsOverlaid", "DiskMounted", "AgentUp",
];

function row(nodeId: string, trace: BootTraceJson): string {
    const reached = new Set(trace.states.map((s) => s.stage));
    const failed = typeof trace.terminal === "object" ? trace.terminal : null;
    const cells = BOOT_STAGES.map((stage) => {
        if (failed && failed.failed_stage === stage) {
            return `<span class="stage failed" title="${failed.cause}">${stage}</span>`;
        }
        const cls = reached.has(stage) ? "stage done" : "stage pending";
        return `<span class="${cls}">${stage}</span>`;
    }).join("");
    const badge = failed
        ? `<span class="boot-bad">${failed.cause}</span>`
        : `<span class="boot-ok">up</span>`;
    return `<div class="boot-row" data-node="${nodeId}">` +
        `<span class="name">${nodeId}</span>${cells}${badge}</div>`;
}

export function renderBootTimelines(traces: Map<string, BootTraceJson>): string {
    if (traces.size === 0) {
        return `<div class="boot">no boots recorded</div>`;
    }
    const rows = [...traces.entries()]
        .sort(([a], [b]) => a.localeCompare(b))
        .map(([nodeId, trace]) => row(nodeId, trace))
        .join("");
    return `<div class="boot">${rows}</div>`;
}
