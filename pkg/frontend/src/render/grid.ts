// The 16-tile node grid: lifecycle color, cpu/disk sparklines, power button.

import { sparkline } from "../sparkline.js";
import type { Store } from "../state.js";
import type { NodeState } from "../types.js";

function tile(node: NodeState, store: Store): string {
    const series = store.seriesFor(node.id);
    const lastDrop = series.drops[series.drops.length - 1];
    const alarm = lastDrop && lastDrop[1] > 0
        ? `<span class="alarm" title="dropping data">DROPS</span>`
        : "";
    const powerButton = node.lifecycle === "Offline"
        ? `<button class="power" data-action="power-on" data-node="${node.id}">` +
          `power on</button>`
        : "";
    const apps = node.running_apps.length
        ? `<div class="apps">${node.running_apps
            .map((a) =>
                `<span class="app">${a}<button data-action="stop-app" ` +
                `data-node="${node.id}" data-app="${a}" title="stop">x</button></span>`)
            .join("")}</div>`
        : "";
    return (
        `<div class="tile lifecycle-${node.lifecycle.toLowerCase()}" data-node="${node.id}">` +
        `<header><span class="name">${node.id}</span>` +
        `<span class="state">${node.lifecycle}</span>${alarm}</header>` +
        `<div class="addr">${node.ip}</div>` +
        `<div class="sparks">` +
        `<label>cpu${sparkline(series.cpu, 96, 20, 1)}</label>` +
        `<label>disk${sparkline(series.disk, 96, 20, 1)}</label>` +
        `</div>` +
        apps +
        powerButton +
        `</div>`
    );
}

export function renderGrid(store: Store): string {
    const tiles = store.nodeList().map((n) => tile(n, store)).join("");
    return `<div class="grid">${tiles}</div>`;
}
