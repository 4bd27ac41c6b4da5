// HTTP client for the manager. Every operator action maps to exactly one
// request; there is no retry or batching here, so the UI's call counts are
// the server's call counts.

import type {
    AssignmentJson,
    BootTraceJson,
    ClusterSummary,
    ConfigResponse,
    MetricsResponse,
    NodeState,
    PlanResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(public status: number, public code: string, detail: string) {
        super(`${code}: ${detail}`);
    }
}

export class ApiClient {
    constructor(
        private base: string = "",
        private fetchFn: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const init: RequestInit = { method };
        if (body !== undefined) {
            init.headers = { "content-type": "application/json" };
            init.body = JSON.stringify(body);
        }
        const response = await this.fetchFn(this.base + path, init);
        const doc = await response.json();
        if (!response.ok) {
            const detail = (doc as { detail?: { code?: string; detail?: string } }).detail;
            throw new ApiError(response.status,
                detail?.code ?? "Error", detail?.detail ?? response.statusText);
        }
        return doc as T;
    }

    listNodes(): Promise<NodeState[]> {
        return this.request("GET", "/nodes");
    }

    getNode(nodeId: string): Promise<NodeState> {
        return this.request("GET", `/nodes/${nodeId}`);
    }

    powerOn(nodeId: string): Promise<{ node: string; boot_trace: BootTraceJson | null }> {
        return this.request("POST", `/nodes/${nodeId}/power_on`);
    }

    startApp(nodeId: string, appId: string): Promise<{ app_id: string }> {
        return this.request("POST", `/nodes/${nodeId}/apps/${appId}/start`);
    }

    stopApp(nodeId: string, appId: string): Promise<{ app_id: string }> {
        return this.request("POST", `/nodes/${nodeId}/apps/${appId}/stop`);
    }

    summary(): Promise<ClusterSummary> {
        return this.request("GET", "/cluster/summary");
    }

    replan(apply: boolean): Promise<PlanResponse> {
        return this.request("POST", "/plan", { apply });
    }

    whatIf(placements: Record<string, string>, runDuration: number): Promise<PlanResponse> {
        return this.request("POST", "/plan",
            { assignment: placements, run_duration: runDuration });
    }

    metrics(metric: string, window: number, resolution: number,
            node?: string): Promise<MetricsResponse> {
        const params = new URLSearchParams({
            metric,
            window: String(window),
            resolution: String(resolution),
        });
        if (node) params.set("node", node);
        return this.request("GET", `/metrics?${params.toString()}`);
    }

    bootTraces(): Promise<Record<string, BootTraceJson>> {
        return this.request("GET", "/boot");
    }

    config(): Promise<ConfigResponse> {
        return this.request("GET", "/api/config");
    }

    currentAssignment(): Promise<AssignmentJson | null> {
        return this.request<PlanResponse>("POST", "/plan", {})
            .then((plan) => plan.assignment ?? null);
    }
}
