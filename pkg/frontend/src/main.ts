// Wires the panels to the live service. The page is served by the same host
// at /ui, so all request paths are root-relative.
import { Api } from "./api.js";
import { DoorPanel } from "./door.js";
import { EventFeed } from "./feed.js";
import { ProfilePanel } from "./profiles.js";
import { EventStream } from "./sse.js";
import { SummaryPanel } from "./summary.js";

const api = new Api();

const tokenInput = document.getElementById("token") as HTMLInputElement;
tokenInput.addEventListener("change", () => {
  api.token = tokenInput.value.trim();
});

const feed = new EventFeed(document.getElementById("feed")!);
const door = new DoorPanel(document.getElementById("door")!, api);
const profiles = new ProfilePanel(document.getElementById("profiles")!, api);
new SummaryPanel(document.getElementById("summary")!, api);

async function start(): Promise<void> {
  let lastId = 0;
  try {
    const history = await api.events(0);
    for (const event of history) {
      feed.prepend(event);
      if (event.event_id > lastId) lastId = event.event_id;
    }
  } catch {
    // feed stays in its empty state; the stream below will catch us up
  }
  new EventStream(lastId, {
    onEvent: (event) => feed.prepend(event),
    onStatus: (status, retryMs) => feed.setStatus(status, retryMs),
  });
  await door.refresh();
  await profiles.refresh();
}

void start();
