// Byte and rate rendering, decimal prefixes to match the backend reports.

const UNITS: [number, string][] = [
    [1e12, "TB"],
    [1e9, "GB"],
    [1e6, "MB"],
    [1e3, "kB"],
];

export function formatBytes(n: number): string {
    for (const [factor, suffix] of UNITS) {
        if (Math.abs(n) >= factor) {
            return `${(n / factor).toFixed(2)} ${suffix}`;
        }
    }
    return `${Math.round(n)} B`;
}

export function formatRate(bytesPerSecond: number): string {
    return `${formatBytes(bytesPerSecond)}/s`;
}

export function formatWatts(w: number): string {
    return `${Math.round(w)} W`;
}

export function formatPercent(fraction: number): string {
    return `${(fraction * 100).toFixed(1)}%`;
}
