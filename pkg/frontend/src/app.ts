// Console wiring: one WebSocket subscription feeding the store, DOM event
// delegation mapping each operator action to exactly one API call, and
// re-render on every applied event. No optimistic updates: the UI changes
// when the server says so.

import { ApiClient, ApiError } from "./api.js";
import { Store } from "./state.js";
import { renderGrid } from "./render/grid.js";
import { renderSummary } from "./render/summary.js";
import { renderPlacement, PlacementView } from "./render/placement.js";
import { renderChart, renderChartControls } from "./render/charts.js";
import { renderBootTimelines } from "./render/boot.js";
import type { ConfigResponse, MetricsResponse, ServerEvent } from "./types.js";

interface ChartState {
    metric: string;
    window: number;
    resolution: number;
    node: string | null;
    data: MetricsResponse | null;
}

export class ConsoleApp {
    store = new Store();
    private config: ConfigResponse | null = null;
    private chart: ChartState = {
        metric: "CpuUtil", window: 3600, resolution: 60, node: null, data: null,
    };
    private whatIf: PlacementView | null = null;
    private errorText = "";

    constructor(
        private api: ApiClient,
        private root: HTMLElement,
    ) {}

    async bootstrap(): Promise<void> {
        this.config = await this.api.config();
        const traces = await this.api.bootTraces();
        for (const [nodeId, trace] of Object.entries(traces)) {
            this.store.bootTraces.set(nodeId, trace);
        }
        this.store.onChange(() => this.render());
        this.render();
    }

    connect(wsUrl: string): void {
        const ws = new WebSocket(wsUrl);
        ws.onmessage = (event) => {
            this.store.apply(JSON.parse(event.data) as ServerEvent);
        };
        ws.onclose = () => {
            this.errorText = "connection lost; reload to reconnect";
            this.render();
        };
    }

    async onAction(target: HTMLElement): Promise<void> {
        const action = target.dataset.action;
        if (!action) return;
        try {
            this.errorText = "";
            if (action === "power-on") {
                await this.api.powerOn(target.dataset.node!);
            } else if (action === "stop-app") {
                await this.api.stopApp(target.dataset.node!, target.dataset.app!);
            } else if (action === "start-app") {
                await this.api.startApp(target.dataset.node!, target.dataset.app!);
            } else if (action === "replan") {
                const plan = await this.api.replan(true);
                if (plan.assignment) {
                    this.store.apply({ event: "assignment", assignment: plan.assignment });
                    this.whatIf = null;
                }
            } else if (action === "show-drops") {
                this.chart = { ...this.chart, metric: "Drops", node: null, data: null };
                await this.refreshChart();
            }
        } catch (error) {
            this.errorText = error instanceof ApiError
                ? `${target.dataset.node ?? ""} ${error.message}`.trim()
                : String(error);
            this.render();
        }
    }

    async onWhatIf(streamId: string, nodeId: string): Promise<void> {
        const placements: Record<string, string> = {
            ...(this.whatIf?.placements ?? this.store.assignment?.placements ?? {}),
        };
        if (nodeId === "") delete placements[streamId];
        else placements[streamId] = nodeId;
        const runDuration = this.config?.suite.run_duration ?? 3600;
        const result = await this.api.whatIf(placements, runDuration);
        this.whatIf = {
            streams: this.config?.suite.streams ?? [],
            nodeIds: this.config?.nodes.map((n) => n.id) ?? [],
            placements,
            assignment: this.store.assignment,
            violations: result.violations ?? [],
            feasible: result.feasible,
            whatIf: true,
        };
        this.render();
    }

    async onChartControl(control: string, value: string): Promise<void> {
        if (control === "metric") this.chart.metric = value;
        else if (control === "window") this.chart.window = Number(value);
        else if (control === "resolution") this.chart.resolution = Number(value);
        else if (control === "node") this.chart.node = value || null;
        await this.refreshChart();
    }

    async refreshChart(): Promise<void> {
        this.chart.data = await this.api.metrics(
            this.chart.metric, this.chart.window, this.chart.resolution,
            this.chart.node ?? undefined,
        );
        this.render();
    }

    placementView(): PlacementView {
        if (this.whatIf) return this.whatIf;
        return {
            streams: this.config?.suite.streams ?? [],
            nodeIds: this.config?.nodes.map((n) => n.id) ?? [],
            placements: this.store.assignment?.placements ?? {},
            assignment: this.store.assignment,
            violations: [],
            feasible: true,
            whatIf: false,
        };
    }

    render(): void {
        const chartHtml = this.chart.data
            ? renderChart(this.chart.data)
            : `<div class="chart empty">pick a metric</div>`;
        this.root.innerHTML =
            `<div id="error">${this.errorText}</div>` +
            renderSummary(this.store) +
            renderGrid(this.store) +
            `<h2>placement</h2>` + renderPlacement(this.placementView()) +
            `<h2>charts</h2>` +
            renderChartControls(this.chart.metric, this.chart.window,
                this.chart.resolution, this.chart.node,
                this.config?.nodes.map((n) => n.id) ?? []) +
            chartHtml +
            `<h2>boot timeline</h2>` + renderBootTimelines(this.store.bootTraces);
    }
}

export function mount(root: HTMLElement): ConsoleApp {
    const api = new ApiClient("");
    const app = new ConsoleApp(api, root);
    root.addEventListener("click", (event) => {
        const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
        if (target) void app.onAction(target);
    });
    root.addEventListener("change", (event) => {
        const el = event.target as HTMLSelectElement;
        if (el.dataset.action === "what-if") {
            void app.onWhatIf(el.dataset.stream!, el.value);
        } else if (el.dataset.chart) {
            void app.onChartControl(el.dataset.chart, el.value);
        }
    });
    void app.bootstrap().then(() => {
        const proto = location.protocol === "https:" ? "wss" : "ws";
        app.connect(`${proto}://${location.host}/ws/events`);
        void app.refreshChart();
    });
    return app;
}

declare global {
    interface Window { capclusterConsole?: ConsoleApp }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
    window.capclusterConsole = mount(document.getElementById("app")!);
}
