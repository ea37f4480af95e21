import type { EventPayload } from "../src/api.js";
import type { EventSourceLike } from "../src/sse.js";

export function makeEvent(id: number, overrides: Partial<EventPayload> = {}): EventPayload {
  return {
    event_id: id,
    timestamp: "2026-08-22T12:00:00+00:00",
    camera_id: "cam1",
    location: "entrance",
    verdict: { kind: "Known", subject_id: 1, name: "John", tombstoned: false },
    attributes: [],
    summary: "John at entrance",
    scene_path: `scenes/cam1-${id}.png`,
    notifications: [],
    ...overrides,
  };
}

// Stand-in for EventSource: tests push open/message/error by hand.
export class FakeSource implements EventSourceLike {
  onopen: ((ev: Event) => void) | null = null;
  onmessage: ((ev: MessageEvent<string>) => void) | null = null;
  onerror: ((ev: Event) => void) | null = null;
  closed = false;

  constructor(readonly url: string) {}

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.(new Event("open"));
  }

  emit(event: EventPayload): void {
    this.onmessage?.(new MessageEvent("message", { data: JSON.stringify(event) }));
  }

  fail(): void {
    this.onerror?.(new Event("error"));
  }
}

export class FakeSourceFactory {
  sources: FakeSource[] = [];

  factory = (url: string): EventSourceLike => {
    const source = new FakeSource(url);
    this.sources.push(source);
    return source;
  };

  get last(): FakeSource {
    const source = this.sources[this.sources.length - 1];
    if (!source) throw new Error("no source created yet");
    return source;
  }
}

export async function flush(times = 6): Promise<void> {
  for (let i = 0; i < times; i += 1) await Promise.resolve();
}

export function deferred<T>(): { promise: Promise<T>; resolve: (v: T) => void; reject: (e: unknown) => void } {
  let resolve!: (v: T) => void;
  let reject!: (e: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}
