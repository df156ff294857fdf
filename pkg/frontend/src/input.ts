// Operator input: gamepad when present, otherwise keyboard. Axes decay to
// zero when the source goes quiet (dead-man behavior) and the publisher
// sends latest-wins frames with a strictly increasing sequence number.

import { Vec3, encodeInput } from "./protocol";

export const DEADMAN_MS = 200;

// W/S forward, Q/E vertical, A/D yaw
const KEY_AXES: Record<string, { axis: number; sign: number }> = {
  KeyW: { axis: 0, sign: 1 },
  KeyS: { axis: 0, sign: -1 },
  KeyQ: { axis: 1, sign: 1 },
  KeyE: { axis: 1, sign: -1 },
  KeyA: { axis: 2, sign: 1 },
  KeyD: { axis: 2, sign: -1 },
};

export class KeyboardSource {
  private pressed = new Set<string>();
  private lastEvent = 0;

  constructor(private now: () => number = () => performance.now()) {}

  attach(target: EventTarget): void {
    target.addEventListener("keydown", (e) =>
      this.onKey((e as KeyboardEvent).code, true));
    target.addEventListener("keyup", (e) =>
      this.onKey((e as KeyboardEvent).code, false));
  }

  onKey(code: string, down: boolean): void {
    if (!(code in KEY_AXES)) return;
    if (down) {
      this.pressed.add(code);
    } else {
      this.pressed.delete(code);
    }
    this.lastEvent = this.now();
  }

  axes(): Vec3 {
    // keys held down keep the channel alive past the dead-man window
    if (this.pressed.size === 0 &&
        this.now() - this.lastEvent > DEADMAN_MS) {
      return [0, 0, 0];
    }
    const out: Vec3 = [0, 0, 0];
    for (const code of this.pressed) {
      const { axis, sign } = KEY_AXES[code];
      out[axis] = Math.min(1, Math.max(-1, out[axis] + sign));
    }
    return out;
  }
}

export class GamepadSource {
  constructor(
    private readGamepads: () => Array<Gamepad | null> =
      () => navigator.getGamepads(),
    private now: () => number = () => performance.now(),
  ) {}

  private lastSeen = 0;

  axes(): Vec3 | null {
    const pads = this.readGamepads();
    const pad = pads.find((p) => p !== null) ?? null;
    if (pad === null) return null;
    this.lastSeen = this.now();
    // left stick: forward on -Y; right stick X yaws; triggers climb
    const forward = -(pad.axes[1] ?? 0);
    const yaw = -(pad.axes[2] ?? 0);
    const up = (pad.buttons[7]?.value ?? 0) - (pad.buttons[6]?.value ?? 0);
    const clamp = (v: number) => Math.min(1, Math.max(-1, v));
    return [clamp(forward), clamp(up), clamp(yaw)];
  }
}

export class InputPublisher {
  private seq = 0;

  constructor(
    private send: (frame: string) => void,
    private keyboard: KeyboardSource,
    private gamepad: GamepadSource | null = null,
  ) {}

  currentAxes(): Vec3 {
    const padAxes = this.gamepad?.axes() ?? null;
    return padAxes ?? this.keyboard.axes();
  }

  publish(): number {
    this.seq += 1;
    this.send(encodeInput(this.currentAxes(), this.seq));
    return this.seq;
  }
}
