// The store is a faithful mirror: after applying the recorded WebSocket
// stream, client state equals the last pushed value for every entity.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { Store } from "../src/state.js";
import type { AssignmentJson, NodeState, ServerEvent } from "../src/types.js";

const events: ServerEvent[] = JSON.parse(
    readFileSync(join(__dirname, "fixtures", "ws_events.json"), "utf8"));

function replay(): Store {
    const store = new Store();
    for (const event of events) store.apply(event);
    return store;
}

describe("store replay of recorded traffic", () => {
    it("starts from a snapshot", () => {
        expect(events[0].event).toBe("snapshot");
    });

    it("node state equals the last push per node", () => {
        const store = replay();
        const lastPush = new Map<string, NodeState>();
        for (const event of events) {
            if (event.event === "snapshot") {
                for (const n of event.nodes) lastPush.set(n.id, n);
            } else if (event.event === "node") {
                lastPush.set(event.node.id, event.node);
            }
        }
        expect(store.nodes.size).toBe(lastPush.size);
        for (const [id, pushed] of lastPush) {
            expect(store.nodes.get(id)).toEqual(pushed);
        }
    });

    it("assignment equals the last assignment push", () => {
        const store = replay();
        const last = [...events].reverse().find(
            (e): e is Extract<ServerEvent, { event: "assignment" }> =>
                e.event === "assignment");
        expect(last).toBeDefined();
        expect(store.assignment).toEqual(last!.assignment as AssignmentJson);
    });

    it("boot traces land per node and stay ordered", () => {
        const store = replay();
        const bootEvents = events.filter(
            (e): e is Extract<ServerEvent, { event: "boot" }> => e.event === "boot");
        expect(bootEvents.length).toBeGreaterThan(0);
        for (const event of bootEvents) {
            const trace = store.bootTraces.get(event.node)!;
            expect(trace).toEqual(event.trace);
            const times = trace.states.map((s) => s.t);
            expect([...times].sort((a, b) => a - b)).toEqual(times);
        }
    });

    it("metric pushes append to per-node series in order", () => {
        const store = replay();
        const metricEvents = events.filter(
            (e): e is Extract<ServerEvent, { event: "metrics" }> =>
                e.event === "metrics");
        expect(metricEvents.length).toBeGreaterThanOrEqual(10);
        const byNode = new Map<string, number[]>();
        for (const event of metricEvents) {
            for (const s of event.samples) {
                if (s.metric === "CpuUtil") {
                    byNode.set(event.node,
                        [...(byNode.get(event.node) ?? []), s.timestamp]);
                }
            }
        }
        for (const [node, timestamps] of byNode) {
            const series = store.seriesFor(node).cpu.map(([ts]) => ts);
            expect(series).toEqual(timestamps.slice(-60));
        }
    });

    it("replay count matches the recording", () => {
        expect(replay().eventsApplied).toBe(events.length);
    });

    it("derived view matches its snapshot", () => {
        const store = replay();
        const view = {
            lifecycles: Object.fromEntries(
                store.nodeList().map((n) => [n.id, n.lifecycle])),
            apps: Object.fromEntries(
                store.nodeList().map((n) => [n.id, n.running_apps])),
            bootNodes: [...store.bootTraces.keys()].sort(),
            placements: store.assignment?.placements ?? null,
        };
        expect(view).toMatchSnapshot();
    });
});
