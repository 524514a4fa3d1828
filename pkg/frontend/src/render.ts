/**
 * Pure DOM renderers: JSON report in, detached element out. No fetching, no
 * state — this is what the fixture tests exercise with the service absent.
 */

import type {
  ApiError,
  JobRecord,
  QAAnswer,
  QueryResponse,
  SearchRecord,
  SearchReport,
  TraceReport,
  ReadingReport,
} from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function referenceLabel(ref: { doc_id: string; version_no: number; span: [number, number] }): string {
  return `${ref.doc_id} v${ref.version_no} [${ref.span[0]}–${ref.span[1]}]`;
}

function searchCard(record: SearchRecord): HTMLElement {
  const card = el("article", "record-card");
  card.appendChild(el("p", "record-summary", record.summary));
  card.appendChild(el("blockquote", "record-excerpt", record.excerpt));
  card.appendChild(el("span", "record-reference", referenceLabel(record.reference)));
  const meta = el("dl", "record-metadata");
  for (const [key, value] of Object.entries(record.metadata)) {
    meta.appendChild(el("dt", undefined, key));
    meta.appendChild(el("dd", undefined, value));
  }
  card.appendChild(meta);
  return card;
}

export function renderSearchReport(report: SearchReport): HTMLElement {
  const root = el("div", "search-report");
  if (report.notice) {
    root.appendChild(el("p", "notice", report.notice));
  }
  const sections: [string, SearchRecord[]][] = [
    ["Most relevant documents", report.primary],
    ["Supplementary materials", report.supplementary],
  ];
  for (const [label, records] of sections) {
    const section = el("section", "search-section");
    section.appendChild(el("h3", undefined, label));
    for (const record of records) {
      section.appendChild(searchCard(record));
    }
    if (records.length === 0) {
      section.appendChild(el("p", "empty", "none"));
    }
    root.appendChild(section);
  }
  return root;
}

export function renderQAAnswer(
  report: QAAnswer,
  onDocumentLink?: (docId: string) => void,
): HTMLElement {
  const root = el("div", "qa-answer");
  root.appendChild(el("p", report.answerable ? "answer" : "notice", report.answer));
  if (report.quotations.length > 0) {
    const list = el("ul", "quotations");
    for (const quotation of report.quotations) {
      const item = el("li", "quotation");
      item.appendChild(el("q", undefined, quotation.quote));
      const link = el("a", "doc-link", referenceLabel(quotation.reference));
      link.href = `#doc/${quotation.reference.doc_id}`;
      if (onDocumentLink) {
        link.addEventListener("click", (event) => {
          event.preventDefault();
          onDocumentLink(quotation.reference.doc_id);
        });
      }
      item.appendChild(link);
      list.appendChild(item);
    }
    root.appendChild(list);
  }
  return root;
}

export function renderTraceTimelines(report: TraceReport): HTMLElement {
  const root = el("div", "trace-report");
  if (report.notice || report.history.groups.length === 0) {
    root.appendChild(el("p", "empty-state",
      report.notice ?? "No history to show."));
    return root;
  }
  root.appendChild(el("p", "narrative", report.narrative));
  const lanes = el("div", "timelines");
  for (const group of report.history.groups) {
    const lane = el("section", "timeline");
    lane.appendChild(el("h3", undefined, group.doc_id));
    const list = el("ol", "timeline-entries");
    for (const entry of group.entries) {
      const item = el("li", entry.extracted_text === null
        ? "timeline-entry absent" : "timeline-entry");
      item.appendChild(el("span", "version", `v${entry.version_no}`));
      item.appendChild(el("time", undefined, entry.timestamp));
      item.appendChild(el("p", "excerpt",
        entry.extracted_text ?? "not present"));
      item.appendChild(el("span", "change-note", entry.change_note));
      list.appendChild(item);
    }
    lane.appendChild(list);
    lanes.appendChild(lane);
  }
  root.appendChild(lanes);
  return root;
}

export function renderReadingReport(report: ReadingReport): HTMLElement {
  const root = el("div", "reading-report");
  root.appendChild(el("p", "answer", report.response));
  root.appendChild(el("p", "reading-meta",
    `${report.doc_id}: ${report.notes.blocks_consumed} blocks read`));
  const details = el("details");
  details.appendChild(el("summary", undefined, "notes"));
  details.appendChild(el("pre", "notes", report.notes.text));
  root.appendChild(details);
  return root;
}

export function renderQueryResponse(
  response: QueryResponse,
  onDocumentLink?: (docId: string) => void,
): HTMLElement {
  const root = el("div", "query-response");
  for (const result of response.results) {
    const block = el("section", `result result-${result.use_case}`);
    block.appendChild(el("h2", undefined, result.use_case));
    switch (result.use_case) {
      case "search":
        block.appendChild(renderSearchReport(result.report as SearchReport));
        break;
      case "qa":
        block.appendChild(renderQAAnswer(result.report as QAAnswer, onDocumentLink));
        break;
      case "trace":
        block.appendChild(renderTraceTimelines(result.report as TraceReport));
        break;
      case "reading":
        block.appendChild(renderReadingReport(result.report as ReadingReport));
        break;
    }
    root.appendChild(block);
  }
  return root;
}

export function renderErrorBanner(status: number, body: ApiError): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("strong", undefined, `${body.code} (${status})`));
  banner.appendChild(el("span", undefined, body.message));
  if (body.candidates?.length) {
    banner.appendChild(el("span", "candidates",
      `candidates: ${body.candidates.join(", ")}`));
  }
  return banner;
}

export function renderJobCard(record: JobRecord): HTMLElement {
  const card = el("article", `job-card job-${record.status}`);
  card.appendChild(el("span", "job-id", record.job_id));
  card.appendChild(el("span", "job-status", record.status));
  if (record.status === "done") {
    if (record.final_text) card.appendChild(el("p", "final-text", record.final_text));
    for (const [i, href] of record.downloads.entries()) {
      const link = el("a", "download", record.outputs[i] ?? href);
      link.href = href;
      card.appendChild(link);
    }
  }
  if (record.status === "aborted") {
    card.appendChild(el("p", "diagnostics", record.diagnostics));
  }
  return card;
}
