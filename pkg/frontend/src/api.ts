// Thin typed client for the gatehouse HTTP API. The console never touches
// pixels; images travel as opaque base64 and all judgement comes from the
// server's responses.

export type VerdictPayload = {
  kind: string;
  subject_id: number | null;
  name: string | null;
  tombstoned: boolean;
};

export type NotificationPayload = {
  channel: string;
  destination: string;
  status: string;
};

export type EventPayload = {
  event_id: number;
  timestamp: string;
  camera_id: string;
  location: string;
  verdict: VerdictPayload;
  attributes: string[];
  summary: string;
  scene_path: string | null;
  notifications: NotificationPayload[];
};

export type DoorPayload =
  | { mode: "locked" }
  | { mode: "unlocked"; opened_at: number; auto_close_at: number };

export type ProfileViewPayload = { view_id: number; pose: string | null };

export type ProfilePayload = {
  subject_id: number;
  name: string;
  email: string;
  contact: string;
  address: string;
  relationship: string;
  views: ProfileViewPayload[];
};

export type ViewUpload = {
  png_base64: string;
  face_box: [number, number, number, number];
  pose?: string;
};

export type ProfileUpload = {
  name: string;
  email?: string;
  contact?: string;
  address?: string;
  relationship?: string;
  override_duplicate?: boolean;
  views: ViewUpload[];
};

export type AddProfileResult = {
  subject_id: number;
  accepted_views: number[];
  rejected: { index: number; reason: string }[];
};

export type AddViewsResult = {
  accepted_views: number[];
  rejected: { index: number; reason: string }[];
};

export type SummaryPayload = {
  period: string;
  window: { start: string; end: string };
  verdict_counts: Record<string, number>;
  location_counts: Record<string, number>;
  unknown_events: unknown[];
};

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export function sceneUrl(event: EventPayload): string | null {
  return event.scene_path ? `/events/${event.event_id}/scene` : null;
}

export class Api {
  token = "";

  constructor(
    private fetchImpl: typeof fetch = (...args) => fetch(...args),
    private timeoutMs = 5000,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["X-Operator-Token"] = this.token;
    const controller = new AbortController();
    const timer = setTimeout(() => controller.abort(), this.timeoutMs);
    try {
      const resp = await this.fetchImpl(path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
        signal: controller.signal,
      });
      if (!resp.ok) {
        let message = `HTTP ${resp.status}`;
        try {
          const parsed = await resp.json();
          if (parsed && parsed.detail && parsed.detail.error) message = parsed.detail.error;
        } catch {
          // non-JSON error body, keep the status line
        }
        throw new ApiError(resp.status, message);
      }
      return (await resp.json()) as T;
    } finally {
      clearTimeout(timer);
    }
  }

  async events(since = 0): Promise<EventPayload[]> {
    const body = await this.request<{ events: EventPayload[] }>("GET", `/events?since=${since}`);
    return body.events;
  }

  door(): Promise<DoorPayload> {
    return this.request("GET", "/door");
  }

  openDoor(): Promise<DoorPayload> {
    return this.request("POST", "/door/open", {});
  }

  closeDoor(): Promise<DoorPayload> {
    return this.request("POST", "/door/close", {});
  }

  summary(period: string): Promise<SummaryPayload> {
    return this.request("GET", `/summary?period=${encodeURIComponent(period)}`);
  }

  async profiles(): Promise<ProfilePayload[]> {
    const body = await this.request<{ persons: ProfilePayload[] }>("GET", "/profiles");
    return body.persons;
  }

  addProfile(upload: ProfileUpload): Promise<AddProfileResult> {
    return this.request("POST", "/profiles", upload);
  }

  addViews(subjectId: number, views: ViewUpload[]): Promise<AddViewsResult> {
    return this.request("POST", `/profiles/${subjectId}/views`, { views });
  }

  deleteProfile(subjectId: number): Promise<{ removed_views: number }> {
    return this.request("DELETE", `/profiles/${subjectId}`);
  }

  async guidance(view: { png_base64: string; face_box: [number, number, number, number] }): Promise<string> {
    const body = await this.request<{ guidance: string }>("POST", "/profiles/guidance", view);
    return body.guidance;
  }
}
