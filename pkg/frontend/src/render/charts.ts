// Metric chart: SVG line over one /metrics response. Resolutions are pinned
// to the store's ladder (1/10/60 s) so the client never resamples.

import type { MetricsResponse } from "../types.js";

export const LADDER_RESOLUTIONS = [1, 10, 60] as const;
export const METRICS = [
    "CpuUtil", "MemUsed", "DiskUtil", "IoLoad", "NetRx", "NetTx", "Drops",
] as const;
export const WINDOWS: { label: string; seconds: number }[] = [
    { label: "5 min", seconds: 300 },
    { label: "1 h", seconds: 3600 },
    { label: "2 h", seconds: 7200 },
];

const WIDTH = 720;
const HEIGHT = 180;
const PAD = 28;

export function renderChartControls(
    metric: string, windowSeconds: number, resolution: number, node: string | null,
    nodeIds: string[],
): string {
    const metricOptions = METRICS.map((m) =>
        `<option value="${m}"${m === metric ? " selected" : ""}>${m}</option>`).join("");
    const windowOptions = WINDOWS.map((w) =>
        `<option value="${w.seconds}"${w.seconds === windowSeconds ? " selected" : ""}>` +
        `${w.label}</option>`).join("");
    const resolutionOptions = LADDER_RESOLUTIONS.map((r) =>
        `<option value="${r}"${r === resolution ? " selected" : ""}>${r} s</option>`).join("");
    const nodeOptions = [`<option value=""${node ? "" : " selected"}>cluster</option>`]
        .concat(nodeIds.map((nid) =>
            `<option value="${nid}"${nid === node ? " selected" : ""}>${nid}</option>`))
        .join("");
    return (
        `<div class="chart-controls">` +
        `<select data-chart="metric">${metricOptions}</select>` +
        `<select data-chart="window">${windowOptions}</select>` +
        `<select data-chart="resolution">${resolutionOptions}</select>` +
        `<select data-chart="node">${nodeOptions}</select>` +
        `</div>`
    );
}

export function renderChart(data: MetricsResponse): string {
    const points = data.points;
    if (points.length === 0) {
        return `<div class="chart empty">no data in window</div>`;
    }
    const xs = points.map((p) => p[0]);
    const ys = points.map((p) => p[1]);
    const xMin = Math.min(...xs);
    const xMax = Math.max(...xs);
    const yMax = Math.max(...ys, 1e-9);
    const plotW = WIDTH - 2 * PAD;
    const plotH = HEIGHT - 2 * PAD;
    const coords = points.map(([x, y]) => {
        const px = PAD + (xMax > xMin ? ((x - xMin) / (xMax - xMin)) * plotW : 0);
        const py = PAD + plotH - (y / yMax) * plotH;
        return `${px.toFixed(1)},${py.toFixed(1)}`;
    }).join(" ");
    const title = `${data.metric} — ${data.node ?? "cluster mean"} ` +
        `(${data.resolution} s resolution, ${points.length} points)`;
    return (
        `<div class="chart">` +
        `<div class="chart-title">${title}</div>` +
        `<svg width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">` +
        `<rect x="${PAD}" y="${PAD}" width="${plotW}" height="${plotH}" class="plot-bg"/>` +
        `<polyline points="${coords}" fill="none" stroke="currentColor" stroke-width="1.5"/>` +
        `<text x="${PAD}" y="${PAD - 8}" class="axis">${yMax.toPrecision(3)}</text>` +
        `<text x="${PAD}" y="${HEIGHT - 8}" class="axis">t=${xMin.toFixed(0)}</text>` +
        `<text x="${WIDTH - PAD}" y="${HEIGHT - 8}" text-anchor="end" class="axis">` +
        `t=${xMax.toFixed(0)}</text>` +
        `</svg></div>`
    );
}
