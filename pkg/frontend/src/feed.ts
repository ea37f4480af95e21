// Live event feed. New events are prepended; scene images load lazily; each
// verdict class gets its own styling with Unknown the loudest.
import { EventPayload, sceneUrl } from "./api.js";
import type { StreamStatus } from "./sse.js";

export function relativeTime(iso: string, nowMs: number): string {
  const seconds = Math.max(0, Math.floor((nowMs - Date.parse(iso)) / 1000));
  if (seconds < 60) return `${seconds} s ago`;
  const minutes = Math.floor(seconds / 60);
  if (minutes < 60) return `${minutes} min ago`;
  const hours = Math.floor(minutes / 60);
  if (hours < 24) return `${hours} h ago`;
  return `${Math.floor(hours / 24)} d ago`;
}

const VERDICT_CLASSES: Record<string, string> = {
  Known: "event-known",
  Unknown: "event-unknown",
  PersonNoFace: "event-nonface",
};

export function renderEvent(event: EventPayload, nowMs: number): HTMLLIElement {
  const item = document.createElement("li");
  item.className = `event ${VERDICT_CLASSES[event.verdict.kind] ?? "event-other"}`;
  if (event.attributes.includes("Gun")) item.classList.add("event-alert");

  const badge = document.createElement("span");
  badge.className = "verdict-badge";
  badge.textContent = event.verdict.kind;
  item.append(badge);

  const headline = document.createElement("p");
  headline.className = "event-summary";
  headline.textContent = event.summary;
  item.append(headline);

  const meta = document.createElement("p");
  meta.className = "event-meta";
  meta.title = event.timestamp;
  meta.textContent = `#${event.event_id} · ${event.location} · ${event.camera_id} · ${relativeTime(event.timestamp, nowMs)}`;
  item.append(meta);

  if (event.attributes.length > 0) {
    const chips = document.createElement("p");
    chips.className = "event-chips";
    for (const attribute of event.attributes) {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.textContent = attribute;
      chips.append(chip);
    }
    item.append(chips);
  }

  const url = sceneUrl(event);
  if (url) {
    const image = document.createElement("img");
    image.className = "event-scene";
    image.setAttribute("loading", "lazy");
    image.src = url;
    image.alt = `scene for event ${event.event_id}`;
    item.append(image);
  }
  return item;
}

export class EventFeed {
  private status: HTMLParagraphElement;
  private empty: HTMLParagraphElement;
  private list: HTMLOListElement;

  constructor(root: HTMLElement, private now: () => number = Date.now) {
    this.status = document.createElement("p");
    this.status.className = "stream-status";
    this.status.setAttribute("role", "status");
    this.empty = document.createElement("p");
    this.empty.className = "feed-empty";
    this.empty.textContent = "No events yet.";
    this.list = document.createElement("ol");
    this.list.className = "feed-list";
    this.list.setAttribute("aria-label", "event feed");
    this.list.setAttribute("aria-live", "polite");
    root.append(this.status, this.empty, this.list);
  }

  setStatus(status: StreamStatus, retryMs?: number): void {
    if (status === "live") {
      this.status.textContent = "live";
      this.status.className = "stream-status stream-live";
    } else if (status === "reconnecting") {
      const wait = retryMs === undefined ? "" : ` in ${Math.round(retryMs / 1000)} s`;
      this.status.textContent = `connection lost, retrying${wait}`;
      this.status.className = "stream-status stream-reconnecting";
    } else {
      this.status.textContent = "connecting";
      this.status.className = "stream-status stream-connecting";
    }
  }

  prepend(event: EventPayload): void {
    this.empty.hidden = true;
    this.list.prepend(renderEvent(event, this.now()));
  }
}
