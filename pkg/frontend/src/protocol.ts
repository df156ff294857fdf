// Wire protocol shared with the live server: JSON text frames over a
// WebSocket. Incoming frames are validated before use; a frame that does
// not parse is a protocol error and the caller should drop the session.

export type Vec3 = [number, number, number];

export interface InputMessage {
  type: "input";
  axes: Vec3;        // forward, vertical, yaw in [-1, 1]
  seq: number;       // strictly increasing per connection
}

export interface StateMessage {
  type: "state";
  time_s: number;
  pos: Vec3;
  yaw: number;
  speed_mps: number;
  voxel_size_m: number;
  bbox: [Vec3, Vec3];
  outcome: "planned" | "fallback";
  plan_time_s: number;
  seq: number;       // last input sequence the planner consumed
}

export interface MapSliceMessage {
  type: "map_slice";
  z_index: number;
  voxel_size_m: number;
  counts: [number, number];          // nx, ny
  classes: Array<[number, number]>;  // run-length [count, class]
}

export interface ScenarioBox {
  center: Vec3;
  size: Vec3;
}

export interface ScenarioMessage {
  type: "scenario";
  name: string;
  boxes: ScenarioBox[];
  start: { position: Vec3; yaw: number };
  goal_x: number;
  counts: [number, number, number];
}

export type ServerMessage = StateMessage | MapSliceMessage | ScenarioMessage;

// cell classes in map_slice runs
export const CLASS_FREE = 0;
export const CLASS_OCCUPIED = 1;
export const CLASS_UNKNOWN = 2;

function isVec3(v: unknown): v is Vec3 {
  return Array.isArray(v) && v.length === 3 &&
    v.every((x) => typeof x === "number" && Number.isFinite(x));
}

function isRuns(v: unknown): v is Array<[number, number]> {
  return Array.isArray(v) && v.every((run) =>
    Array.isArray(run) && run.length === 2 &&
    Number.isInteger(run[0]) && run[0] > 0 &&
    [CLASS_FREE, CLASS_OCCUPIED, CLASS_UNKNOWN].includes(run[1]));
}

export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("frame is not JSON");
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("frame is not an object");
  }
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "state": {
      if (!isVec3(msg.pos)) throw new Error("state.pos malformed");
      if (typeof msg.yaw !== "number") throw new Error("state.yaw malformed");
      if (typeof msg.speed_mps !== "number" ||
          typeof msg.voxel_size_m !== "number" ||
          typeof msg.time_s !== "number" ||
          typeof msg.plan_time_s !== "number" ||
          typeof msg.seq !== "number") {
        throw new Error("state scalars malformed");
      }
      const bbox = msg.bbox as unknown;
      if (!Array.isArray(bbox) || bbox.length !== 2 ||
          !isVec3(bbox[0]) || !isVec3(bbox[1])) {
        throw new Error("state.bbox malformed");
      }
      if (msg.outcome !== "planned" && msg.outcome !== "fallback") {
        throw new Error("state.outcome malformed");
      }
      return msg as unknown as StateMessage;
    }
    case "map_slice": {
      if (!Number.isInteger(msg.z_index) ||
          typeof msg.voxel_size_m !== "number") {
        throw new Error("map_slice header malformed");
      }
      const counts = msg.counts as unknown;
      if (!Array.isArray(counts) || counts.length !== 2 ||
          !counts.every(Number.isInteger)) {
        throw new Error("map_slice.counts malformed");
      }
      if (!isRuns(msg.classes)) throw new Error("map_slice.classes malformed");
      return msg as unknown as MapSliceMessage;
    }
    case "scenario": {
      if (!Array.isArray(msg.boxes)) throw new Error("scenario.boxes malformed");
      return msg as unknown as ScenarioMessage;
    }
    default:
      throw new Error(`unknown message type ${String(msg.type)}`);
  }
}

export function encodeInput(axes: Vec3, seq: number): string {
  const clamp = (v: number) => Math.min(1, Math.max(-1, v));
  const msg: InputMessage = {
    type: "input",
    axes: [clamp(axes[0]), clamp(axes[1]), clamp(axes[2])],
    seq,
  };
  return JSON.stringify(msg);
}

export function decodeRuns(runs: Array<[number, number]>,
                           expected: number): Uint8Array {
  const out = new Uint8Array(expected);
  let i = 0;
  for (const [count, cls] of runs) {
    if (i + count > expected) throw new Error("run-length overflow");
    out.fill(cls, i, i + count);
    i += count;
  }
  if (i !== expected) throw new Error("run-length underflow");
  return out;
}

// width of the local-map bounding box along an axis, in meters
export function bboxExtent(voxelSize: number, count: number): number {
  return voxelSize * count;
}
