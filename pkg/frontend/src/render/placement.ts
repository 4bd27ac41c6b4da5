// Stream -> node matrix with a what-if selector per stream and violation
// badges straight from the verifier.

import { formatRate } from "../format.js";
import type { AssignmentJson, StreamJson, ViolationJson } from "../types.js";

export interface PlacementView {
    streams: StreamJson[];
    nodeIds: string[];
    placements: Record<string, string>;  // the scenario being shown
    assignment: AssignmentJson | null;  // the applied plan, for ledgers
    violations: ViolationJson[];
    feasible: boolean;
    whatIf: boolean;
}

function violationBadge(v: ViolationJson): string {
    const amount = v.constraint === "DiskWrite"
        ? `${formatRate(v.demanded)} &gt; ${formatRate(v.available)}`
        : v.constraint === "DiskCapacity"
            ? `${(v.demanded / 1e12).toFixed(2)} TB &gt; ${(v.available / 1e12).toFixed(2)} TB`
            : `${v.demanded} &gt; ${v.available}`;
    return `<span class="violation" data-node="${v.node}">` +
        `${v.node}: ${v.constraint} ${amount}</span>`;
}

export function renderPlacement(view: PlacementView): string {
    const offending = new Set(view.violations.map((v) => v.node));
    const rows = view.streams.map((stream) => {
        const placed = view.placements[stream.id] ?? "";
        const options = [`<option value=""${placed === "" ? " selected" : ""}>-</option>`]
            .concat(view.nodeIds.map((nid) =>
                `<option value="${nid}"${nid === placed ? " selected" : ""}>${nid}</option>`))
            .join("");
        const badge = offending.has(placed) ? " class=\"over\"" : "";
        return (
            `<tr${badge}><td>${stream.id}</td>` +
            `<td>${stream.interface}</td>` +
            `<td>${formatRate(stream.raw_rate)}${stream.compress === "jpeg" ? " (jpeg)" : ""}</td>` +
            `<td><select data-action="what-if" data-stream="${stream.id}">${options}</select></td>` +
            `</tr>`
        );
    }).join("");

    const ledgers = view.assignment
        ? view.nodeIds.map((nid) => {
            const ledger = view.assignment!.ledgers[nid];
            if (!ledger || ledger.streams.length === 0) return "";
            return `<span class="ledger">${nid}: ${ledger.streams.length} streams, ` +
                `${formatRate(ledger.disk_write_used)}, cpu ${ledger.cpu_used}</span>`;
        }).join("")
        : "";

    const status = view.whatIf
        ? (view.feasible
            ? `<div class="plan-ok">what-if verifies clean</div>`
            : `<div class="plan-bad">${view.violations.map(violationBadge).join("")}</div>`)
        : `<div class="plan-ok">applied plan</div>`;

    return (
        `<div class="placement">` +
        `<table><thead><tr><th>stream</th><th>if</th><th>rate</th><th>node</th></tr></thead>` +
        `<tbody>${rows}</tbody></table>` +
        status +
        `<div class="ledgers">${ledgers}</div>` +
        `</div>`
    );
}
