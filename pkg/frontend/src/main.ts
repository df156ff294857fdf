import { TeleopSession, defaultServerUrl } from "./client";
import { GamepadSource, InputPublisher, KeyboardSource } from "./input";
import { CockpitRenderer } from "./render";

const INPUT_HZ = 25;

function start(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");

  const renderer = new CockpitRenderer(ctx, canvas.width, canvas.height);
  const session = new TeleopSession(defaultServerUrl(), {
    onClose: (reason) => { status.textContent = `disconnected: ${reason}`; },
    onScenario: (msg) => { status.textContent = `scenario: ${msg.name}`; },
  });

  const keyboard = new KeyboardSource();
  keyboard.attach(window);
  const publisher = new InputPublisher(
    (frame) => session.sendRaw(frame), keyboard, new GamepadSource());

  setInterval(() => publisher.publish(), 1000 / INPUT_HZ);

  const draw = () => {
    renderer.render(session.scenario, session.lastState, session.lastSlice);
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

window.addEventListener("load", start);
