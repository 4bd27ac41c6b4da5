// Cluster summary strip: ingest rate, estimated watts, disk fill, lifecycle
// counts and active drop alarms.

import { formatPercent, formatRate, formatWatts } from "../format.js";
import type { Store } from "../state.js";

export function renderSummary(store: Store): string {
    const summary = store.summary;
    if (!summary) {
        return `<div class="strip">waiting for server…</div>`;
    }
    const counts = Object.entries(summary.lifecycle_counts)
        .filter(([, count]) => count > 0)
        .map(([state, count]) =>
            `<span class="count lifecycle-${state.toLowerCase()}">${count} ${state}</span>`)
        .join("");
    const alarms = store.dropAlarms();
    const alarmChip = alarms.length
        ? `<span class="count alarm" data-action="show-drops">` +
          `${alarms.length} dropping</span>`
        : "";
    return (
        `<div class="strip">` +
        `<span class="stat"><b>${formatRate(summary.ingest_rate)}</b> ingest</span>` +
        `<span class="stat"><b>${formatWatts(summary.estimated_watts)}</b> est. power</span>` +
        `<span class="stat"><b>${formatPercent(summary.disk_fill)}</b> disk fill</span>` +
        `<span class="stat"><b>${formatPercent(summary.cpu_utilization)}</b> cpu</span>` +
        counts + alarmChip +
        `<button data-action="replan">re-plan suite</button>` +
        `</div>`
    );
}
