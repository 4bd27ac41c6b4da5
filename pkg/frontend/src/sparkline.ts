// Inline SVG polyline sparkline from (timestamp, value) points.

export function sparkline(
    points: [number, number][],
    width = 96,
    height = 24,
    max?: number,
): string {
    if (points.length === 0) {
        return `<svg class="spark" width="${width}" height="${height}"></svg>`;
    }
    const values = points.map((p) => p[1]);
    const top = max ?? Math.max(...values, 1e-9);
    const step = points.length > 1 ? width / (points.length - 1) : 0;
    const coords = values
        .map((v, i) => {
            const x = (i * step).toFixed(1);
            const y = (height - (Math.min(v, top) / top) * (height - 2) - 1).toFixed(1);
            return `${x},${y}`;
        })
        .join(" ");
    return (
        `<svg class="spark" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}"><polyline points="${coords}" ` +
        `fill="none" stroke="currentColor" stroke-width="1.5"/></svg>`
    );
}
