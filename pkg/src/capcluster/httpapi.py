"""HTTP + WebSocket surface over a running Manager, plus static hosting of
the operator console when a built console directory is available."""

from __future__ import annotations

import asyncio
import queue
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .capacity import suite_to_json
from .control.manager import ControlError, Manager
from .control.registry import AppDescriptor, AppKind, UnknownNode

_ERROR_STATUS = {
    "UnknownNode": 404,
    "NodeUnavailable": 409,
    "NotPlaced": 409,
    "UnknownStream": 404,
}


def _http_error(exc: ControlError) -> HTTPException:
    return HTTPException(
        status_code=_ERROR_STATUS.get(exc.code, 500),
        detail={"code": exc.code, "detail": exc.detail},
    )


def create_app(manager: Manager, console_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="capcluster manager", version="0.1.0")

    @app.get("/api/config")
    def get_config():
        return {
            "cluster": manager.config.cluster_name,
            "server": manager.config.server_id,
            "sha256": manager.config.sha256,
            "suite": suite_to_json(manager.config.suite),
            "jpeg_ratio": manager.config.jpeg_ratio,
            "nodes": [
                {
                    "id": n.id,
                    "mac": manager.config.macs[n.id],
                    "usb3_ports": n.usb3_ports,
                    "gige_ports": n.gige_ports,
                    "cpu_budget": n.cpu_budget,
                    "disk_write_rate": n.disk_write_rate,
                    "disk_capacity": n.disk_capacity,
                }
                for n in manager.config.nodes
            ],
        }

    @app.get("/nodes")
    def list_nodes():
        return [n.to_json() for n in manager.registry.nodes()]

    @app.get("/nodes/{node_id}")
    def get_node(node_id: str):
        try:
            state = manager.registry.by_node_id(node_id)
        except UnknownNode:
            raise HTTPException(404, detail={"code": "UnknownNode", "detail": node_id})
        doc = state.to_json()
        trace = manager.boot_traces.get(node_id)
        doc["boot_trace"] = trace.to_json() if trace else None
        doc["apps"] = [
            manager.apps[a].to_json() for a in sorted(state.running_apps)
            if a in manager.apps
        ]
        return doc

    @app.post("/nodes/{node_id}/power_on")
    def power_on(node_id: str):
        try:
            trace = manager.power_on(node_id)
        except KeyError:
            raise HTTPException(404, detail={"code": "UnknownNode", "detail": node_id})
        return {"node": node_id, "boot_trace": trace.to_json() if trace else None}

    @app.post("/nodes/{node_id}/apps/{app_id}/start")
    def start_app(node_id: str, app_id: str, body: dict | None = None):
        app_desc = manager.apps.get(app_id)
        if app_desc is None and body:
            try:
                app_desc = AppDescriptor(
                    app_id=app_id,
                    kind=AppKind(body.get("kind", "Custom")),
                    node_id=node_id,
                    stream_id=body.get("stream_id"),
                    command=body.get("command"),
                )
            except ValueError as exc:
                raise HTTPException(422, detail={"code": "BadDescriptor",
                                                 "detail": str(exc)})
        if app_desc is None:
            raise HTTPException(404, detail={"code": "UnknownApp", "detail": app_id})
        if app_desc.node_id != node_id:
            raise HTTPException(409, detail={
                "code": "NotPlaced",
                "detail": f"app {app_id} targets {app_desc.node_id}, not {node_id}",
            })
        try:
            return manager.start_app(app_desc)
        except ControlError as exc:
            raise _http_error(exc)

    @app.post("/nodes/{node_id}/apps/{app_id}/stop")
    def stop_app(node_id: str, app_id: str):
        try:
            return manager.stop_app(node_id, app_id)
        except ControlError as exc:
            raise _http_error(exc)

    @app.get("/cluster/summary")
    def cluster_summary():
        return manager.cluster_summary()

    @app.post("/plan")
    def plan(body: dict | None = None):
        body = body or {}
        try:
            return manager.plan(
                suite_doc=body.get("suite"),
                assignment_doc=body.get("assignment"),
                apply=bool(body.get("apply", False)),
                run_duration=body.get("run_duration"),
            )
        except (ValueError, KeyError) as exc:
            raise HTTPException(422, detail={"code": "BadRequest", "detail": str(exc)})

    @app.get("/metrics")
    def metrics(
        metric: str,
        node: str | None = None,
        window: float = Query(default=3600.0, gt=0),
        resolution: float = Query(default=1.0, gt=0),
    ):
        try:
            points = manager.monitor.query(
                metric, window=window, resolution=resolution, node=node
            )
        except ValueError as exc:
            raise HTTPException(404, detail={"code": "UnknownMetric", "detail": str(exc)})
        return {
            "metric": metric,
            "node": node,
            "window": window,
            "resolution": resolution,
            "points": [[ts, v] for ts, v in points],
        }

    @app.get("/metrics/export", response_class=PlainTextResponse)
    def metrics_export(node: str, metric: str):
        try:
            return manager.monitor.export_csv(node, metric)
        except ValueError as exc:
            raise HTTPException(404, detail={"code": "UnknownMetric", "detail": str(exc)})

    @app.get("/boot")
    def boot_traces():
        return {nid: t.to_json() for nid, t in manager.boot_traces.items()}

    def snapshot_event() -> dict:
        return {
            "event": "snapshot",
            "nodes": [n.to_json() for n in manager.registry.nodes()],
            "summary": manager.cluster_summary(),
            "assignment": manager.assignment.to_json() if manager.assignment else None,
        }

    @app.websocket("/ws/events")
    async def ws_events(websocket: WebSocket):
        await websocket.accept()
        events = manager.events.subscribe()
        loop = asyncio.get_running_loop()

        def next_event():
            try:
                return events.get(timeout=0.5)
            except queue.Empty:
                return None

        try:
            await websocket.send_json(snapshot_event())
            while True:
                event = await loop.run_in_executor(None, next_event)
                if event is not None:
                    await websocket.send_json(event)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            manager.events.unsubscribe(events)

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(console_dir), html=True), name="console")

    return app
