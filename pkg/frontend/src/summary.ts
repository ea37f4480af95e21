// Periodic summary reader: pick a period, show the server's counts.
import { SummaryPayload } from "./api.js";

export type SummaryApi = {
  summary(period: string): Promise<SummaryPayload>;
};

export class SummaryPanel {
  settled: Promise<void> = Promise.resolve();
  private select: HTMLSelectElement;
  private body: HTMLElement;

  constructor(root: HTMLElement, private api: SummaryApi) {
    const label = document.createElement("label");
    label.textContent = "period ";
    this.select = document.createElement("select");
    for (const period of ["daily", "weekly", "monthly"]) {
      const option = document.createElement("option");
      option.value = period;
      option.textContent = period;
      this.select.append(option);
    }
    label.append(this.select);
    const fetchButton = document.createElement("button");
    fetchButton.type = "button";
    fetchButton.textContent = "Fetch";
    fetchButton.addEventListener("click", () => {
      this.settled = this.load();
    });
    const controls = document.createElement("p");
    controls.className = "summary-controls";
    controls.append(label, fetchButton);
    this.body = document.createElement("div");
    this.body.className = "summary-body";
    root.append(controls, this.body);
  }

  private async load(): Promise<void> {
    let report: SummaryPayload;
    try {
      report = await this.api.summary(this.select.value);
    } catch {
      this.body.textContent = "summary unavailable";
      return;
    }
    this.body.textContent = "";
    const window = document.createElement("p");
    window.className = "summary-window";
    window.textContent = `${report.window.start} to ${report.window.end}`;
    this.body.append(window);
    this.body.append(countList("verdicts", report.verdict_counts));
    this.body.append(countList("locations", report.location_counts));
    const unknowns = document.createElement("p");
    unknowns.textContent = `unknown visitors: ${report.unknown_events.length}`;
    this.body.append(unknowns);
  }
}

function countList(title: string, counts: Record<string, number>): HTMLElement {
  const wrap = document.createElement("div");
  const heading = document.createElement("p");
  heading.className = "summary-heading";
  heading.textContent = title;
  wrap.append(heading);
  const list = document.createElement("ul");
  for (const [key, count] of Object.entries(counts)) {
    const item = document.createElement("li");
    item.textContent = `${key}: ${count}`;
    list.append(item);
  }
  wrap.append(list);
  return wrap;
}
