// Top-down cockpit view: world obstacles, vehicle and trail, the local
// map's bounding rectangle (which breathes with the voxel size), the
// latest occupancy slice, and speed / voxel-size gauges.

import {
  CLASS_OCCUPIED,
  CLASS_UNKNOWN,
  MapSliceMessage,
  ScenarioMessage,
  StateMessage,
  bboxExtent,
  decodeRuns,
} from "./protocol";

export interface Viewport {
  scale: number;      // px per meter
  cx: number;         // canvas px of world x = 0
  cy: number;         // canvas px of world y = 0
}

export function worldToCanvas(v: Viewport, x: number, y: number):
    [number, number] {
  // world x runs right, world y runs up-screen-left; top-down view keeps
  // x rightward and flips y so +y is up on screen
  return [v.cx + x * v.scale, v.cy - y * v.scale];
}

export function fitViewport(canvasW: number, canvasH: number,
                            xMin: number, xMax: number,
                            yMin: number, yMax: number): Viewport {
  const margin = 20;
  const scale = Math.min(
    (canvasW - 2 * margin) / Math.max(1e-6, xMax - xMin),
    (canvasH - 2 * margin) / Math.max(1e-6, yMax - yMin));
  return {
    scale,
    cx: margin - xMin * scale,
    cy: canvasH - margin + yMin * scale,
  };
}

const COLOR_FREE = "#dfe8df";
const COLOR_OCCUPIED = "#37352f";
const COLOR_UNKNOWN = "#9aa7b5";

export function classColor(cls: number): string {
  if (cls === CLASS_OCCUPIED) return COLOR_OCCUPIED;
  if (cls === CLASS_UNKNOWN) return COLOR_UNKNOWN;
  return COLOR_FREE;
}

export class CockpitRenderer {
  private trail: Array<[number, number]> = [];

  constructor(private ctx: CanvasRenderingContext2D,
              private width: number, private height: number) {}

  render(scenario: ScenarioMessage | null, state: StateMessage | null,
         slice: MapSliceMessage | null): void {
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.width, this.height);
    if (!scenario) return;

    const xs = scenario.boxes.flatMap((b) =>
      [b.center[0] - b.size[0] / 2, b.center[0] + b.size[0] / 2]);
    const ys = scenario.boxes.flatMap((b) =>
      [b.center[1] - b.size[1] / 2, b.center[1] + b.size[1] / 2]);
    xs.push(scenario.start.position[0] - 2, scenario.goal_x + 2);
    ys.push(scenario.start.position[1] - 6, scenario.start.position[1] + 6);
    const vp = fitViewport(this.width, this.height,
                           Math.min(...xs), Math.max(...xs),
                           Math.min(...ys), Math.max(...ys));

    if (state && slice) this.drawSlice(vp, state, slice);
    this.drawBoxes(vp, scenario);
    if (state) {
      this.drawBbox(vp, state, scenario);
      this.drawVehicle(vp, state);
      this.drawGauges(state);
    }
  }

  private drawBoxes(vp: Viewport, scenario: ScenarioMessage): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#5a5248";
    for (const b of scenario.boxes) {
      const [px, py] = worldToCanvas(vp, b.center[0] - b.size[0] / 2,
                                     b.center[1] + b.size[1] / 2);
      ctx.fillRect(px, py, b.size[0] * vp.scale, b.size[1] * vp.scale);
    }
  }

  private drawSlice(vp: Viewport, state: StateMessage,
                    slice: MapSliceMessage): void {
    const [nx, ny] = slice.counts;
    const cells = decodeRuns(slice.classes, nx * ny);
    const a = slice.voxel_size_m;
    const ctx = this.ctx;
    ctx.save();
    ctx.globalAlpha = 0.55;
    // slice cells live in the vehicle body frame; rotate by yaw
    const cos = Math.cos(state.yaw);
    const sin = Math.sin(state.yaw);
    for (let ix = 0; ix < nx; ix++) {
      for (let iy = 0; iy < ny; iy++) {
        const cls = cells[ix * ny + iy];
        if (cls === 0) continue;           // leave free space transparent
        const bx = (ix - nx / 2 + 0.5) * a;
        const by = (iy - ny / 2 + 0.5) * a;
        const wx = state.pos[0] + cos * bx - sin * by;
        const wy = state.pos[1] + sin * bx + cos * by;
        const [px, py] = worldToCanvas(vp, wx - a / 2, wy + a / 2);
        ctx.fillStyle = classColor(cls);
        ctx.fillRect(px, py, a * vp.scale, a * vp.scale);
      }
    }
    ctx.restore();
  }

  private drawBbox(vp: Viewport, state: StateMessage,
                   scenario: ScenarioMessage): void {
    const ctx = this.ctx;
    const w = bboxExtent(state.voxel_size_m, scenario.counts[0]);
    const h = bboxExtent(state.voxel_size_m, scenario.counts[1]);
    ctx.save();
    const [px, py] = worldToCanvas(vp, state.pos[0], state.pos[1]);
    ctx.translate(px, py);
    ctx.rotate(-state.yaw);
    ctx.strokeStyle = state.outcome === "fallback" ? "#c0392b" : "#2e86de";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(-w / 2 * vp.scale, -h / 2 * vp.scale,
                   w * vp.scale, h * vp.scale);
    ctx.restore();
  }

  private drawVehicle(vp: Viewport, state: StateMessage): void {
    const ctx = this.ctx;
    this.trail.push([state.pos[0], state.pos[1]]);
    if (this.trail.length > 600) this.trail.shift();
    ctx.strokeStyle = "#27ae60";
    ctx.lineWidth = 1;
    ctx.beginPath();
    this.trail.forEach(([x, y], i) => {
      const [px, py] = worldToCanvas(vp, x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();

    const [px, py] = worldToCanvas(vp, state.pos[0], state.pos[1]);
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(-state.yaw);
    ctx.fillStyle = state.outcome === "fallback" ? "#c0392b" : "#145a32";
    ctx.beginPath();
    ctx.moveTo(10, 0);
    ctx.lineTo(-6, 5);
    ctx.lineTo(-6, -5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }

  private drawGauges(state: StateMessage): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#111";
    ctx.font = "14px monospace";
    ctx.fillText(`speed ${state.speed_mps.toFixed(2)} m/s`, 12, 20);
    ctx.fillText(`voxel ${state.voxel_size_m.toFixed(2)} m`, 12, 38);
    ctx.fillText(`plan  ${(state.plan_time_s * 1e3).toFixed(1)} ms`, 12, 56);
    if (state.outcome === "fallback") {
      // stop indicator flashes with the frame counter
      if (Math.floor(state.time_s * 5) % 2 === 0) {
        ctx.fillStyle = "#c0392b";
        ctx.fillText("STOPPING", 12, 76);
      }
    }
  }
}
