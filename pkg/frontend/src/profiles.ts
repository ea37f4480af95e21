// Profile management: list, add person, add views, delete. Every capture goes
// through the server's guidance check first; a too-small face blocks submission.
// Image bytes are forwarded as base64 untouched, the console reads no pixels.
import {
  AddProfileResult,
  ApiError,
  ProfilePayload,
  ViewUpload,
} from "./api.js";

export const BLOCKING_GUIDANCE = "Face is small. come closer";

export function encodeBytes(bytes: Uint8Array): string {
  let chars = "";
  for (let i = 0; i < bytes.length; i += 4096) {
    chars += String.fromCharCode(...bytes.subarray(i, i + 4096));
  }
  return btoa(chars);
}

export type GuidanceApi = {
  guidance(view: { png_base64: string; face_box: [number, number, number, number] }): Promise<string>;
};

export type ProfileApi = GuidanceApi & {
  profiles(): Promise<ProfilePayload[]>;
  addProfile(upload: {
    name: string;
    email: string;
    contact: string;
    address: string;
    relationship: string;
    views: ViewUpload[];
  }): Promise<AddProfileResult>;
  addViews(subjectId: number, views: ViewUpload[]): Promise<{ accepted_views: number[] }>;
  deleteProfile(subjectId: number): Promise<{ removed_views: number }>;
};

// File picker plus face-box fields. The chosen capture is sent to the guidance
// endpoint and the returned phrase is shown verbatim before submit unlocks.
export class GuidedViewPicker {
  settled: Promise<void> = Promise.resolve();
  private pngBase64: string | null = null;
  private phrase: string | null = null;
  private failure: string | null = null;
  private fileInput: HTMLInputElement;
  private boxInputs: HTMLInputElement[];
  private output: HTMLOutputElement;
  private blockNote: HTMLParagraphElement;

  constructor(root: HTMLElement, private api: GuidanceApi, private onUpdate: () => void) {
    const fileLabel = document.createElement("label");
    fileLabel.textContent = "capture ";
    this.fileInput = document.createElement("input");
    this.fileInput.type = "file";
    this.fileInput.accept = "image/png";
    fileLabel.append(this.fileInput);

    const boxRow = document.createElement("p");
    boxRow.className = "face-box";
    this.boxInputs = ["x", "y", "w", "h"].map((name, i) => {
      const label = document.createElement("label");
      label.textContent = `${name} `;
      const input = document.createElement("input");
      input.type = "number";
      input.min = i < 2 ? "0" : "1";
      input.value = i < 2 ? "0" : "120";
      label.append(input);
      boxRow.append(label);
      return input;
    });

    this.output = document.createElement("output");
    this.output.className = "guidance";
    this.output.setAttribute("role", "status");
    this.blockNote = document.createElement("p");
    this.blockNote.className = "guidance-block";
    this.blockNote.hidden = true;
    this.blockNote.textContent = "the face is too small to enroll; move closer and retake the capture";

    root.append(fileLabel, boxRow, this.output, this.blockNote);
    this.fileInput.addEventListener("change", () => this.schedule());
    for (const input of this.boxInputs) input.addEventListener("change", () => this.schedule());
  }

  private schedule(): void {
    this.settled = this.refresh();
  }

  private faceBox(): [number, number, number, number] {
    const [x, y, w, h] = this.boxInputs.map((input) => Number(input.value));
    return [x ?? 0, y ?? 0, w ?? 1, h ?? 1];
  }

  private async refresh(): Promise<void> {
    this.phrase = null;
    this.failure = null;
    const file = this.fileInput.files?.[0];
    if (!file) {
      this.pngBase64 = null;
      this.render();
      this.onUpdate();
      return;
    }
    try {
      this.pngBase64 = encodeBytes(new Uint8Array(await file.arrayBuffer()));
      this.phrase = await this.api.guidance({
        png_base64: this.pngBase64,
        face_box: this.faceBox(),
      });
    } catch (err) {
      this.pngBase64 = null;
      this.failure = err instanceof ApiError ? err.message : "guidance check failed";
    }
    this.render();
    this.onUpdate();
  }

  private render(): void {
    this.output.textContent = this.phrase ?? this.failure ?? "";
    this.blockNote.hidden = this.phrase !== BLOCKING_GUIDANCE;
  }

  // Submission stays blocked until the server has judged the capture usable.
  get blocked(): boolean {
    return this.phrase === null || this.phrase === BLOCKING_GUIDANCE;
  }

  view(): ViewUpload | null {
    if (this.blocked || this.pngBase64 === null) return null;
    return { png_base64: this.pngBase64, face_box: this.faceBox() };
  }

  reset(): void {
    this.fileInput.value = "";
    this.pngBase64 = null;
    this.phrase = null;
    this.failure = null;
    this.render();
    this.onUpdate();
  }
}

export class ProfilePanel {
  settled: Promise<void> = Promise.resolve();
  private rows: HTMLTableSectionElement;
  readonly addPicker: GuidedViewPicker;
  readonly viewsPicker: GuidedViewPicker;
  private addForm: HTMLFormElement;
  private addError: HTMLParagraphElement;
  private addSubmit: HTMLButtonElement;
  private viewsForm: HTMLFormElement;
  private viewsError: HTMLParagraphElement;
  private viewsSubmit: HTMLButtonElement;
  private subjectInput: HTMLInputElement;

  constructor(root: HTMLElement, private api: ProfileApi) {
    const table = document.createElement("table");
    table.className = "profile-table";
    const head = document.createElement("thead");
    head.innerHTML = "<tr><th>id</th><th>name</th><th>relationship</th><th>views</th><th></th></tr>";
    this.rows = document.createElement("tbody");
    table.append(head, this.rows);

    this.addForm = document.createElement("form");
    this.addForm.className = "profile-add";
    this.addForm.setAttribute("aria-label", "add person");
    const nameInput = textField(this.addForm, "name", true);
    const relationshipSelect = document.createElement("select");
    for (const value of ["Friend", "Family", "Caregiver"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      relationshipSelect.append(option);
    }
    const relationshipLabel = document.createElement("label");
    relationshipLabel.textContent = "relationship ";
    relationshipLabel.append(relationshipSelect);
    this.addForm.append(relationshipLabel);
    const emailInput = textField(this.addForm, "email", false);
    const contactInput = textField(this.addForm, "contact", false);
    const addressInput = textField(this.addForm, "address", false);
    this.addPicker = new GuidedViewPicker(this.addForm, api, () => this.renderControls());
    this.addError = errorLine(this.addForm);
    this.addSubmit = submitButton(this.addForm, "Add person");
    this.addForm.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const view = this.addPicker.view();
      if (view === null || nameInput.value.trim() === "") return;
      this.settled = this.runAdd({
        name: nameInput.value.trim(),
        email: emailInput.value.trim(),
        contact: contactInput.value.trim(),
        address: addressInput.value.trim(),
        relationship: relationshipSelect.value,
        views: [view],
      });
    });

    this.viewsForm = document.createElement("form");
    this.viewsForm.className = "profile-views";
    this.viewsForm.setAttribute("aria-label", "add views");
    const subjectLabel = document.createElement("label");
    subjectLabel.textContent = "subject id ";
    this.subjectInput = document.createElement("input");
    this.subjectInput.type = "number";
    this.subjectInput.min = "1";
    this.subjectInput.required = true;
    subjectLabel.append(this.subjectInput);
    this.viewsForm.append(subjectLabel);
    this.viewsPicker = new GuidedViewPicker(this.viewsForm, api, () => this.renderControls());
    this.viewsError = errorLine(this.viewsForm);
    this.viewsSubmit = submitButton(this.viewsForm, "Add views");
    this.viewsForm.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const view = this.viewsPicker.view();
      const subjectId = Number(this.subjectInput.value);
      if (view === null || !Number.isInteger(subjectId) || subjectId < 1) return;
      this.settled = this.runAddViews(subjectId, [view]);
    });

    root.append(table, this.addForm, this.viewsForm);
    this.renderControls();
  }

  private renderControls(): void {
    this.addSubmit.disabled = this.addPicker.blocked;
    this.viewsSubmit.disabled = this.viewsPicker.blocked;
  }

  private async runAdd(upload: Parameters<ProfileApi["addProfile"]>[0]): Promise<void> {
    this.addError.textContent = "";
    try {
      await this.api.addProfile(upload);
    } catch (err) {
      this.addError.textContent = err instanceof ApiError ? err.message : "request failed";
      return;
    }
    this.addForm.reset();
    this.addPicker.reset();
    await this.refresh();
  }

  private async runAddViews(subjectId: number, views: ViewUpload[]): Promise<void> {
    this.viewsError.textContent = "";
    try {
      await this.api.addViews(subjectId, views);
    } catch (err) {
      this.viewsError.textContent = err instanceof ApiError ? err.message : "request failed";
      return;
    }
    this.viewsForm.reset();
    this.viewsPicker.reset();
    await this.refresh();
  }

  async refresh(): Promise<void> {
    let persons: ProfilePayload[];
    try {
      persons = await this.api.profiles();
    } catch {
      return;
    }
    this.rows.textContent = "";
    for (const person of persons) {
      const row = document.createElement("tr");
      for (const text of [
        String(person.subject_id),
        person.name,
        person.relationship,
        String(person.views.length),
      ]) {
        const cell = document.createElement("td");
        cell.textContent = text;
        row.append(cell);
      }
      const actions = document.createElement("td");
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "Delete";
      remove.setAttribute("aria-label", `delete ${person.name}`);
      remove.addEventListener("click", () => {
        this.settled = this.runDelete(person.subject_id);
      });
      actions.append(remove);
      row.append(actions);
      this.rows.append(row);
    }
  }

  private async runDelete(subjectId: number): Promise<void> {
    try {
      await this.api.deleteProfile(subjectId);
    } catch {
      return;
    }
    await this.refresh();
  }
}

function textField(form: HTMLFormElement, name: string, required: boolean): HTMLInputElement {
  const label = document.createElement("label");
  label.textContent = `${name} `;
  const input = document.createElement("input");
  input.type = "text";
  input.name = name;
  input.required = required;
  label.append(input);
  form.append(label);
  return input;
}

function errorLine(form: HTMLFormElement): HTMLParagraphElement {
  const line = document.createElement("p");
  line.className = "form-error";
  line.setAttribute("role", "alert");
  form.append(line);
  return line;
}

function submitButton(form: HTMLFormElement, text: string): HTMLButtonElement {
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = text;
  form.append(button);
  return button;
}
