// Server-push subscription over EventSource. Reconnects resume from the last
// delivered event id so nothing is skipped, with delay doubling 1 s up to 30 s.
import type { EventPayload } from "./api.js";

export type StreamStatus = "connecting" | "live" | "reconnecting";

export type StreamHandlers = {
  onEvent: (event: EventPayload) => void;
  onStatus?: (status: StreamStatus, retryMs?: number) => void;
};

export type EventSourceLike = {
  onopen: ((ev: Event) => void) | null;
  onmessage: ((ev: MessageEvent<string>) => void) | null;
  onerror: ((ev: Event) => void) | null;
  close(): void;
};

export type EventSourceFactory = (url: string) => EventSourceLike;

const INITIAL_RETRY_MS = 1000;
const MAX_RETRY_MS = 30000;

export class EventStream {
  private source: EventSourceLike | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private retryMs = INITIAL_RETRY_MS;
  private lastId: number;
  private closed = false;

  constructor(
    since: number,
    private handlers: StreamHandlers,
    private factory: EventSourceFactory = (url) => new EventSource(url),
  ) {
    this.lastId = since;
    this.connect();
  }

  private connect(): void {
    this.handlers.onStatus?.("connecting");
    const source = this.factory(`/events/stream?since=${this.lastId}`);
    this.source = source;
    source.onopen = () => {
      this.retryMs = INITIAL_RETRY_MS;
      this.handlers.onStatus?.("live");
    };
    source.onmessage = (ev) => {
      this.retryMs = INITIAL_RETRY_MS;
      let payload: EventPayload;
      try {
        payload = JSON.parse(ev.data) as EventPayload;
      } catch {
        return;
      }
      if (payload.event_id > this.lastId) this.lastId = payload.event_id;
      this.handlers.onEvent(payload);
    };
    source.onerror = () => {
      if (this.closed) return;
      source.close();
      this.handlers.onStatus?.("reconnecting", this.retryMs);
      this.timer = setTimeout(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, MAX_RETRY_MS);
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.source?.close();
  }
}
