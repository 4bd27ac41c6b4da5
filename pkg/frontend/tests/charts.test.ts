// Chart rendering from the recorded one-hour cluster CPU series.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import {
    LADDER_RESOLUTIONS,
    renderChart,
    renderChartControls,
} from "../src/render/charts.js";
import type { MetricsResponse } from "../src/types.js";

function fixture<T>(name: string): T {
    return JSON.parse(
        readFileSync(join(__dirname, "fixtures", name), "utf8")) as T;
}

describe("one-hour cluster CPU chart", () => {
    const data = fixture<MetricsResponse>("metrics_cpu_1h.json");

    it("covers a full hour at minute resolution", () => {
        expect(data.resolution).toBe(60);
        expect(data.points.length).toBeGreaterThan(55);
        expect(data.points.length).toBeLessThanOrEqual(60);
        const [first] = data.points[0];
        const [last] = data.points[data.points.length - 1];
        expect(last - first).toBeGreaterThanOrEqual(3420);
    });

    it("shows the sustained stress-load plateau", () => {
        // every minute of the recorded capture holds the same cluster mean
        const values = data.points.map(([, v]) => v);
        const max = Math.max(...values);
        const min = Math.min(...values);
        expect(max - min).toBeLessThan(0.01);
        expect(max).toBeGreaterThan(0.3);
    });

    it("renders one polyline with one coordinate per point", () => {
        const html = renderChart(data);
        const match = html.match(/<polyline points="([^"]+)"/);
        expect(match).not.toBeNull();
        expect(match![1].split(" ").length).toBe(data.points.length);
        expect(html).toContain("CpuUtil — cluster mean");
    });

    it("matches the recorded snapshot", () => {
        expect(renderChart(data)).toMatchSnapshot();
    });

    it("per-node series renders too", () => {
        const node = fixture<MetricsResponse>("metrics_cpu_node05.json");
        const html = renderChart(node);
        expect(html).toContain("node05");
    });
});

describe("chart controls", () => {
    it("only offers the store's ladder resolutions", () => {
        expect([...LADDER_RESOLUTIONS]).toEqual([1, 10, 60]);
        const html = renderChartControls("CpuUtil", 3600, 60, null, ["node01"]);
        const options = [...html.matchAll(/data-chart="resolution".*?<\/select>/gs)][0][0];
        expect(options).toContain('value="1"');
        expect(options).toContain('value="10"');
        expect(options).toContain('value="60"');
        expect((options.match(/<option/g) ?? []).length).toBe(3);
    });

    it("empty series render an explicit empty state", () => {
        const html = renderChart({
            metric: "Drops", node: null, window: 300, resolution: 1, points: [],
        });
        expect(html).toContain("no data in window");
    });
});
