"""Live operator server: WebSocket JSON wire to the browser cockpit.

One planning loop runs at the configured rate against wall time. Operator
input arrives as "input" messages into a latest-value mailbox the planner
reads once per round; every round broadcasts a "state" frame (echoing the
consumed input sequence number), and a horizontal occupancy slice goes out
at a lower rate. A connection that sends malformed frames is closed.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import PlannerConfig
from .hca_planner import TeleopPipeline
from .motion_primitives import JoystickInput
from .occupancy_map import class_codes, world_to_voxel
from .sim_world import Scenario, scenario_to_dict

DEFAULT_PORT = 8642
DEADMAN_S = 0.2


def sanitize_axes(raw) -> tuple[float, float, float]:
    """Clamp a 3-element axes payload to [-1, 1]; raises on bad shape."""
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ValueError("axes must be a list of three numbers")
    out = []
    for v in raw:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ValueError("axes entries must be numbers")
        out.append(min(1.0, max(-1.0, float(v))))
    return tuple(out)


def rle_encode(codes: np.ndarray) -> list[list[int]]:
    """Run-length encode a class array as [count, class] pairs."""
    runs = []
    for code in codes:
        c = int(code)
        if runs and runs[-1][1] == c:
            runs[-1][0] += 1
        else:
            runs.append([1, c])
    return runs


def map_slice_message(local_map) -> dict:
    """Horizontal class slice at the vehicle's own height."""
    idx = world_to_voxel(local_map, np.zeros(3))
    z_index = idx[2] if idx is not None else local_map.counts.nz // 2
    codes = class_codes(local_map).reshape(local_map.counts.as_tuple())
    return {
        "type": "map_slice",
        "z_index": int(z_index),
        "voxel_size_m": local_map.voxel_size,
        "counts": [local_map.counts.nx, local_map.counts.ny],
        "classes": rle_encode(codes[:, :, z_index].ravel()),
    }


@dataclass
class _Mailbox:
    axes: tuple[float, float, float] = (0.0, 0.0, 0.0)
    seq: int = 0
    received_at: float = field(default_factory=time.monotonic)

    def put(self, axes, seq) -> None:
        self.axes = axes
        self.seq = seq
        self.received_at = time.monotonic()

    def read(self) -> tuple[tuple[float, float, float], int]:
        if time.monotonic() - self.received_at > DEADMAN_S:
            return (0.0, 0.0, 0.0), self.seq
        return self.axes, self.seq


def create_app(scenario: Scenario, cfg: PlannerConfig | None = None,
               rate_hz: float = 10.0, slice_hz: float = 5.0) -> FastAPI:
    cfg = cfg if cfg is not None else PlannerConfig(
        alpha_min=scenario.alpha_min, alpha_max=scenario.alpha_max)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.pipeline.keep_last_map = True
        task = asyncio.create_task(planning_loop())
        yield
        app.state.stop.set()
        await task

    app = FastAPI(lifespan=lifespan)
    app.state.mailbox = _Mailbox()
    app.state.clients = set()
    app.state.pipeline = TeleopPipeline(scenario=scenario, cfg=cfg,
                                        keep_last_map=True)
    app.state.stop = asyncio.Event()

    scenario_msg = {"type": "scenario", **scenario_to_dict(scenario),
                    "counts": list(cfg.counts.as_tuple())}

    async def broadcast(payload: dict) -> None:
        text = json.dumps(payload)
        dead = []
        for ws in list(app.state.clients):
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            app.state.clients.discard(ws)

    async def planning_loop() -> None:
        pipeline: TeleopPipeline = app.state.pipeline
        period = 1.0 / rate_hz
        slice_every = max(1, round(rate_hz / slice_hz))
        t0 = time.monotonic()
        k = 0
        while not app.state.stop.is_set():
            axes, seq = app.state.mailbox.read()
            record = pipeline.round(JoystickInput(*axes))
            state = pipeline.sim.vehicle
            half = 0.5 * record.voxel_size_m
            counts = cfg.counts.as_tuple()
            await broadcast({
                "type": "state",
                "time_s": record.time_s,
                "pos": [float(c) for c in state.position],
                "yaw": state.yaw,
                "speed_mps": state.speed,
                "voxel_size_m": record.voxel_size_m,
                "bbox": [[-half * n for n in counts],
                         [half * n for n in counts]],
                "outcome": record.outcome,
                "plan_time_s": record.plan_time_s,
                "seq": seq,
            })
            if k % slice_every == 0 and pipeline.last_map is not None:
                await broadcast(map_slice_message(pipeline.last_map))
            k += 1
            next_tick = t0 + k * period
            delay = next_tick - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        await ws.send_text(json.dumps(scenario_msg))
        app.state.clients.add(ws)
        last_seq = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if msg.get("type") != "input":
                        raise ValueError("expected an input message")
                    axes = sanitize_axes(msg["axes"])
                    seq = int(msg["seq"])
                    if last_seq is not None and seq <= last_seq:
                        raise ValueError("seq must increase")
                    last_seq = seq
                except (ValueError, KeyError, TypeError,
                        json.JSONDecodeError):
                    await ws.close(code=1003)
                    return
                app.state.mailbox.put(axes, seq)
        except WebSocketDisconnect:
            pass
        finally:
            app.state.clients.discard(ws)

    return app
