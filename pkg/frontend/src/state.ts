// Client-side mirror of server state. Events apply in arrival order and the
// mirror never invents state: everything rendered came off the wire.

import type {
    AssignmentJson,
    BootTraceJson,
    ClusterSummary,
    NodeState,
    ServerEvent,
} from "./types.js";

const SPARK_POINTS = 60;

export interface NodeSeries {
    cpu: [number, number][];
    disk: [number, number][];
    drops: [number, number][];
}

export class Store {
    nodes = new Map<string, NodeState>();
    summary: ClusterSummary | null = null;
    assignment: AssignmentJson | null = null;
    bootTraces = new Map<string, BootTraceJson>();
    series = new Map<string, NodeSeries>();
    eventsApplied = 0;

    private listeners: (() => void)[] = [];

    onChange(listener: () => void): void {
        this.listeners.push(listener);
    }

    nodeList(): NodeState[] {
        return [...this.nodes.values()].sort((a, b) => a.id.localeCompare(b.id));
    }

    seriesFor(nodeId: string): NodeSeries {
        let s = this.series.get(nodeId);
        if (!s) {
            s = { cpu: [], disk: [], drops: [] };
            this.series.set(nodeId, s);
        }
        return s;
    }

    dropAlarms(): { node: string; bytesPerSecond: number }[] {
        const alarms: { node: string; bytesPerSecond: number }[] = [];
        for (const [node, series] of this.series) {
            const last = series.drops[series.drops.length - 1];
            if (last && last[1] > 0) {
                alarms.push({ node, bytesPerSecond: last[1] });
            }
        }
        return alarms.sort((a, b) => a.node.localeCompare(b.node));
    }

    apply(event: ServerEvent): void {
        switch (event.event) {
            case "snapshot":
                this.nodes = new Map(event.nodes.map((n) => [n.id, n]));
                this.summary = event.summary;
                this.assignment = event.assignment;
                break;
            case "node":
                this.nodes.set(event.node.id, event.node);
                break;
            case "metrics": {
                const series = this.seriesFor(event.node);
                for (const sample of event.samples) {
                    const point: [number, number] = [sample.timestamp, sample.value];
                    if (sample.metric === "CpuUtil") this.push(series.cpu, point);
                    else if (sample.metric === "DiskUtil") this.push(series.disk, point);
                    else if (sample.metric === "Drops") this.push(series.drops, point);
                }
                break;
            }
            case "boot":
                this.bootTraces.set(event.node, event.trace);
                break;
            case "assignment":
                this.assignment = event.assignment;
                break;
            case "app_status":
                break; // node events carry the authoritative app list
        }
        this.eventsApplied += 1;
        for (const listener of this.listeners) listener();
    }

    private push(series: [number, number][], point: [number, number]): void {
        series.push(point);
        if (series.length > SPARK_POINTS) series.shift();
    }
}
