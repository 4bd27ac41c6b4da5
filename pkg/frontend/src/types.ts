// Wire types of the manager's HTTP + WebSocket contract.

export interface NodeState {
    id: string;
    mac: string;
    ip: string;
    lifecycle: "Offline" | "Booting" | "Ready" | "Capturing" | "Degraded";
    last_heartbeat: number;
    running_apps: string[];
}

export interface ClusterSummary {
    lifecycle_counts: Record<string, number>;
    ingest_rate: number;
    cpu_utilization: number;
    estimated_watts: number;
    disk_fill: number;
    nodes: number;
}

export interface LedgerJson {
    cpu_used: number;
    disk_write_used: number;
    gige_used: number;
    streams: string[];
    usb3_used: number;
}

export interface AssignmentJson {
    placements: Record<string, string>;
    ledgers: Record<string, LedgerJson>;
}

export interface ViolationJson {
    node: string;
    constraint: string;
    demanded: number;
    available: number;
}

export interface PlanResponse {
    feasible: boolean;
    assignment?: AssignmentJson;
    violations?: ViolationJson[];
    infeasible_stream?: string;
    reasons?: Record<string, { constraint: string; demanded: number; available: number }>;
}

export interface BootStateEntry {
    stage: string;
    t: number;
}

export interface BootTraceJson {
    mac: string;
    ip: string | null;
    states: BootStateEntry[];
    mounts: { path: string; mode: string }[];
    terminal: "AgentUp" | { failed_stage: string; cause: string };
}

export interface MetricsResponse {
    metric: string;
    node: string | null;
    window: number;
    resolution: number;
    points: [number, number][];
}

export interface StreamJson {
    id: string;
    interface: string;
    raw_rate: number;
    compress: string;
    cpu_units: number;
}

export interface ConfigResponse {
    cluster: string;
    server: string;
    sha256: string;
    jpeg_ratio: number;
    suite: { run_duration: number; streams: StreamJson[] };
    nodes: {
        id: string; mac: string; usb3_ports: number; gige_ports: number;
        cpu_budget: number; disk_write_rate: number; disk_capacity: number;
    }[];
}

export type ServerEvent =
    | { event: "snapshot"; nodes: NodeState[]; summary: ClusterSummary;
        assignment: AssignmentJson | null }
    | { event: "node"; node: NodeState }
    | { event: "metrics"; node: string;
        samples: { metric: string; value: number; timestamp: number }[] }
    | { event: "boot"; node: string; trace: BootTraceJson }
    | { event: "assignment"; assignment: AssignmentJson }
    | { event: "app_status"; mac: string; payload: Record<string, unknown> };
