// WebSocket session against the live teleop server. The scenario arrives
// first on connect; state and map-slice frames stream afterwards. A frame
// that fails validation kills the session (the server does the same for
// malformed input frames).

import {
  MapSliceMessage,
  ScenarioMessage,
  ServerMessage,
  StateMessage,
  parseServerMessage,
} from "./protocol";

export interface SessionHandlers {
  onScenario?: (msg: ScenarioMessage) => void;
  onState?: (msg: StateMessage) => void;
  onSlice?: (msg: MapSliceMessage) => void;
  onClose?: (reason: string) => void;
}

export class TeleopSession {
  private ws: WebSocket;
  scenario: ScenarioMessage | null = null;
  lastState: StateMessage | null = null;
  lastSlice: MapSliceMessage | null = null;

  constructor(url: string, private handlers: SessionHandlers = {},
              socketFactory: (url: string) => WebSocket =
                (u) => new WebSocket(u)) {
    this.ws = socketFactory(url);
    this.ws.onmessage = (ev) => this.onFrame(String(ev.data));
    this.ws.onclose = () => this.handlers.onClose?.("closed");
    this.ws.onerror = () => this.handlers.onClose?.("error");
  }

  private onFrame(text: string): void {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(text);
    } catch (err) {
      this.ws.close();
      this.handlers.onClose?.(`protocol error: ${String(err)}`);
      return;
    }
    this.dispatch(msg);
  }

  dispatch(msg: ServerMessage): void {
    switch (msg.type) {
      case "scenario":
        this.scenario = msg;
        this.handlers.onScenario?.(msg);
        break;
      case "state":
        this.lastState = msg;
        this.handlers.onState?.(msg);
        break;
      case "map_slice":
        this.lastSlice = msg;
        this.handlers.onSlice?.(msg);
        break;
    }
  }

  sendRaw(frame: string): void {
    if (this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
    }
  }

  close(): void {
    this.ws.close();
  }
}

export function defaultServerUrl(port = 8642): string {
  const host = location.hostname || "127.0.0.1";
  return `ws://${host}:${port}/ws`;
}
