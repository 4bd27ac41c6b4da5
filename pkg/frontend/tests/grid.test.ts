// Node grid snapshot from recorded server state.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { Store } from "../src/state.js";
import { renderGrid } from "../src/render/grid.js";
import { renderSummary } from "../src/render/summary.js";
import type { ClusterSummary, NodeState } from "../src/types.js";

function fixture<T>(name: string): T {
    return JSON.parse(
        readFileSync(join(__dirname, "fixtures", name), "utf8")) as T;
}

function storeFromFixtures(): Store {
    const store = new Store();
    store.apply({
        event: "snapshot",
        nodes: fixture<NodeState[]>("nodes.json"),
        summary: fixture<ClusterSummary>("summary.json"),
        assignment: null,
    });
    return store;
}

describe("node grid", () => {
    it("renders all 16 tiles from the recorded node list", () => {
        const html = renderGrid(storeFromFixtures());
        expect((html.match(/class="tile/g) ?? []).length).toBe(16);
        expect(html).toContain('data-node="node01"');
        expect(html).toContain('data-node="node16"');
    });

    it("offline nodes get a power button, running nodes do not", () => {
        const html = renderGrid(storeFromFixtures());
        expect(html).toContain(
            '<button class="power" data-action="power-on" data-node="node16">');
        expect(html).not.toContain('data-action="power-on" data-node="node05"');
    });

    it("lifecycle classes color the tiles", () => {
        const html = renderGrid(storeFromFixtures());
        expect(html).toContain("lifecycle-capturing");
        expect(html).toContain("lifecycle-offline");
    });

    it("capture apps are listed with stop buttons", () => {
        const html = renderGrid(storeFromFixtures());
        expect(html).toContain(
            'data-action="stop-app" data-node="node05" data-app="cap-cam01"');
    });

    it("sparklines render from pushed metric samples", () => {
        const store = storeFromFixtures();
        store.apply({
            event: "metrics",
            node: "node05",
            samples: [
                { metric: "CpuUtil", value: 0.5, timestamp: 1 },
                { metric: "CpuUtil", value: 0.5, timestamp: 2 },
                { metric: "DiskUtil", value: 0.1, timestamp: 2 },
            ],
        });
        const html = renderGrid(store);
        expect(html).toContain("polyline");
    });

    it("matches the recorded snapshot", () => {
        expect(renderGrid(storeFromFixtures())).toMatchSnapshot();
    });
});

describe("summary strip", () => {
    it("shows ingest, watts and disk fill from the fixture", () => {
        const html = renderSummary(storeFromFixtures());
        expect(html).toContain("7.65 GB/s");
        expect(html).toContain("343 W");
        expect(html).toContain("52.5%");
        expect(html).toContain("15 Capturing");
        expect(html).toContain("1 Offline");
    });

    it("matches the recorded snapshot", () => {
        expect(renderSummary(storeFromFixtures())).toMatchSnapshot();
    });
});
