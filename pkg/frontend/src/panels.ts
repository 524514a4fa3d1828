/**
 * Panel controllers: wiring between form inputs, the API client, and the
 * renderers. One in-flight request per panel; every submission bumps a
 * sequence number and responses for anything but the latest sequence are
 * discarded, so the rendered report always corresponds to the last
 * completed request.
 */

import {
  ApiFailure,
  getJob,
  getVersions,
  postQuery,
  submitScenarioJob,
  type JobRecord,
} from "./api.js";
import {
  renderErrorBanner,
  renderJobCard,
  renderQueryResponse,
} from "./render.js";

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export class QueryPanel {
  private seq = 0;

  constructor(
    private input: HTMLTextAreaElement | HTMLInputElement,
    private modeSelect: HTMLSelectElement,
    private output: HTMLElement,
    private docView?: HTMLElement,
  ) {}

  async submit(): Promise<void> {
    const text = this.input.value.trim();
    if (!text) {
      clear(this.output);
      this.output.appendChild(
        renderErrorBanner(0, { code: "validation", message: "enter a query" }));
      return;
    }
    const mySeq = ++this.seq;
    try {
      const response = await postQuery(text, this.modeSelect.value);
      if (mySeq !== this.seq) return;           // a newer request superseded us
      clear(this.output);
      this.output.appendChild(
        renderQueryResponse(response, (docId) => void this.showDocument(docId)));
    } catch (error) {
      if (mySeq !== this.seq) return;
      clear(this.output);                        // the query input stays intact
      if (error instanceof ApiFailure) {
        this.output.appendChild(renderErrorBanner(error.status, error.body));
      } else {
        this.output.appendChild(renderErrorBanner(0, {
          code: "network", message: String(error) }));
      }
    }
  }

  private async showDocument(docId: string): Promise<void> {
    if (!this.docView) return;
    try {
      const listing = await getVersions(docId);
      clear(this.docView);
      const heading = document.createElement("h3");
      heading.textContent = `${listing.title} (${listing.doc_id})`;
      this.docView.appendChild(heading);
      const list = document.createElement("ul");
      for (const version of listing.versions) {
        const item = document.createElement("li");
        item.textContent =
          `v${version.version_no} — ${version.timestamp} (${version.chars} chars)`;
        list.appendChild(item);
      }
      this.docView.appendChild(list);
    } catch (error) {
      clear(this.docView);
      if (error instanceof ApiFailure) {
        this.docView.appendChild(renderErrorBanner(error.status, error.body));
      }
    }
  }
}

export interface JobsPanelOptions {
  pollIntervalMs?: number;
  onSettled?: (record: JobRecord) => void;
}

export class JobsPanel {
  private records = new Map<string, JobRecord>();
  private timer: ReturnType<typeof setInterval> | null = null;
  private pollIntervalMs: number;
  private onSettled?: (record: JobRecord) => void;

  constructor(
    private fsdInput: HTMLTextAreaElement,
    private sectionInput: HTMLInputElement,
    private languageInput: HTMLInputElement,
    private listOutput: HTMLElement,
    private errorOutput: HTMLElement,
    options: JobsPanelOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 500;
    this.onSettled = options.onSettled;
  }

  async submit(): Promise<void> {
    clear(this.errorOutput);
    const section = this.sectionInput.value.trim();
    const fsdText = this.fsdInput.value;
    if (!section) {
      this.errorOutput.appendChild(renderErrorBanner(0, {
        code: "validation", message: "section is required" }));
      return;
    }
    if (!fsdText.trim()) {
      this.errorOutput.appendChild(renderErrorBanner(0, {
        code: "validation", message: "paste the FSD text" }));
      return;
    }
    try {
      const submitted = await submitScenarioJob(
        fsdText, section, this.languageInput.value.trim() || null);
      await this.track(submitted.job_id);
    } catch (error) {
      if (error instanceof ApiFailure) {
        this.errorOutput.appendChild(renderErrorBanner(error.status, error.body));
      } else {
        this.errorOutput.appendChild(renderErrorBanner(0, {
          code: "network", message: String(error) }));
      }
    }
  }

  async track(jobId: string): Promise<void> {
    const record = await getJob(jobId);
    this.records.set(jobId, record);
    this.renderList();
    if (record.status === "queued" || record.status === "running") {
      this.ensurePolling();
    } else {
      this.onSettled?.(record);
    }
  }

  private ensurePolling(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.poll(), this.pollIntervalMs);
  }

  private async poll(): Promise<void> {
    const pending = [...this.records.values()].filter(
      (r) => r.status === "queued" || r.status === "running");
    if (pending.length === 0) {
      if (this.timer !== null) clearInterval(this.timer);
      this.timer = null;
      return;
    }
    for (const record of pending) {
      try {
        const fresh = await getJob(record.job_id);
        const settledNow = record.status !== fresh.status &&
          (fresh.status === "done" || fresh.status === "aborted");
        this.records.set(fresh.job_id, fresh);
        if (settledNow) this.onSettled?.(fresh);
      } catch {
        // transient poll failure: keep the last known record
      }
    }
    this.renderList();
  }

  renderList(): void {
    clear(this.listOutput);
    const ordered = [...this.records.values()].reverse();
    for (const record of ordered) {
      this.listOutput.appendChild(renderJobCard(record));
    }
  }
}
