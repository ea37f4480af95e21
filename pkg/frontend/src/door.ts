// Door panel. The panel never guesses: it shows Unlocked only from a server
// response, and any failed or timed-out command falls back to Locked, matching
// the fail-secure door.
import { ApiError, DoorPayload } from "./api.js";

export type DoorApi = {
  door(): Promise<DoorPayload>;
  openDoor(): Promise<DoorPayload>;
  closeDoor(): Promise<DoorPayload>;
};

const TICK_MS = 500;

export class DoorPanel {
  private state: DoorPayload = { mode: "locked" };
  private pending = false;
  private modeLabel: HTMLParagraphElement;
  private countdown: HTMLParagraphElement;
  private banner: HTMLParagraphElement;
  private openButton: HTMLButtonElement;
  private closeButton: HTMLButtonElement;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    root: HTMLElement,
    private api: DoorApi,
    private now: () => number = () => Date.now() / 1000,
  ) {
    this.modeLabel = document.createElement("p");
    this.modeLabel.className = "door-mode";
    this.modeLabel.setAttribute("role", "status");
    this.countdown = document.createElement("p");
    this.countdown.className = "door-countdown";
    this.banner = document.createElement("p");
    this.banner.className = "door-banner";
    this.banner.setAttribute("role", "alert");
    this.openButton = document.createElement("button");
    this.openButton.type = "button";
    this.openButton.textContent = "Open";
    this.openButton.setAttribute("aria-label", "open the door");
    this.openButton.addEventListener("click", () => void this.command("open"));
    this.closeButton = document.createElement("button");
    this.closeButton.type = "button";
    this.closeButton.textContent = "Close";
    this.closeButton.setAttribute("aria-label", "close the door");
    this.closeButton.addEventListener("click", () => void this.command("close"));
    const controls = document.createElement("p");
    controls.className = "door-controls";
    controls.append(this.openButton, this.closeButton);
    root.append(this.modeLabel, this.countdown, controls, this.banner);
    this.render();
  }

  async refresh(): Promise<void> {
    try {
      this.apply(await this.api.door());
    } catch {
      this.apply({ mode: "locked" });
    }
  }

  private async command(kind: "open" | "close"): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.banner.textContent = "";
    this.render();
    try {
      const state = kind === "open" ? await this.api.openDoor() : await this.api.closeDoor();
      this.apply(state);
      if (kind === "close" && state.mode === "locked") {
        this.banner.textContent = "door is locked";
      }
    } catch (err) {
      this.apply({ mode: "locked" });
      if (err instanceof ApiError && (err.status === 401 || err.status === 403)) {
        this.banner.textContent = `not permitted: ${err.message}`;
      } else {
        this.banner.textContent = "command failed, door locked";
      }
    } finally {
      this.pending = false;
      this.render();
    }
  }

  private apply(state: DoorPayload): void {
    this.state = state;
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (state.mode === "unlocked") {
      this.timer = setInterval(() => this.tick(), TICK_MS);
    }
    this.render();
  }

  private tick(): void {
    if (this.state.mode !== "unlocked") return;
    if (this.state.auto_close_at - this.now() <= 0) {
      if (this.timer !== null) {
        clearInterval(this.timer);
        this.timer = null;
      }
      void this.refresh();
      return;
    }
    this.render();
  }

  private render(): void {
    const unlocked = this.state.mode === "unlocked";
    this.modeLabel.textContent = unlocked ? "Unlocked" : "Locked";
    this.modeLabel.classList.toggle("door-unlocked", unlocked);
    this.countdown.hidden = !unlocked;
    if (this.state.mode === "unlocked") {
      const remaining = Math.max(0, Math.ceil(this.state.auto_close_at - this.now()));
      this.countdown.textContent = `auto-closes in ${remaining} s`;
    } else {
      this.countdown.textContent = "";
    }
    this.openButton.disabled = this.pending;
    this.closeButton.disabled = this.pending;
  }
}
