/**
 * Typed client for the docrelay HTTP API. The console never computes
 * anything itself: every displayed value originates from one of these
 * responses.
 */

export interface ApiError {
  code: string;
  message: string;
  candidates?: string[];
}

export interface DocReference {
  doc_id: string;
  version_no: number;
  span: [number, number];
}

export interface SearchRecord {
  excerpt: string;
  reference: DocReference;
  metadata: Record<string, string>;
  summary: string;
}

export interface SearchReport {
  primary: SearchRecord[];
  supplementary: SearchRecord[];
  notice: string | null;
}

export interface Quotation {
  quote: string;
  reference: DocReference;
}

export interface QAAnswer {
  answerable: boolean;
  answer: string;
  quotations: Quotation[];
}

export interface TraceEntry {
  version_no: number;
  timestamp: string;
  extracted_text: string | null;
  change_note: string;
}

export interface TraceGroup {
  doc_id: string;
  entries: TraceEntry[];
}

export interface TraceReport {
  history: { groups: TraceGroup[] };
  narrative: string;
  notice: string | null;
}

export interface ReadingReport {
  response: string;
  notes: { text: string; blocks_consumed: number };
  doc_id: string;
}

export type UseCaseReport = SearchReport | QAAnswer | TraceReport | ReadingReport;

export interface QueryResult {
  use_case: "search" | "qa" | "trace" | "reading";
  report: UseCaseReport;
}

export interface QueryResponse {
  mode: string;
  plan: { use_cases: string[]; rationale: string };
  results: QueryResult[];
  text: string;
}

export interface JobRecord {
  job_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "aborted";
  outputs: string[];
  diagnostics: string;
  final_text: string;
  downloads: string[];
}

export interface VersionListing {
  doc_id: string;
  title: string;
  versions: { version_no: number; timestamp: string; chars: number }[];
}

export class ApiFailure extends Error {
  constructor(public status: number, public body: ApiError) {
    super(body.message);
  }
}

const BASE = "/api/v1";

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(BASE + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: ApiError;
    try {
      body = (await response.json()) as ApiError;
    } catch {
      body = { code: "http", message: `HTTP ${response.status}` };
    }
    throw new ApiFailure(response.status, body);
  }
  return (await response.json()) as T;
}

export function postQuery(text: string, mode: string): Promise<QueryResponse> {
  return request<QueryResponse>("/query", {
    method: "POST",
    body: JSON.stringify({ text, mode }),
  });
}

export function submitScenarioJob(
  fsdText: string,
  section: string,
  targetLanguage: string | null,
): Promise<{ job_id: string; status: string }> {
  return request("/scenario-jobs", {
    method: "POST",
    body: JSON.stringify({
      fsd_text: fsdText,
      section,
      target_language: targetLanguage,
    }),
  });
}

export function getJob(jobId: string): Promise<JobRecord> {
  return request<JobRecord>(`/scenario-jobs/${jobId}`);
}

export function getVersions(docId: string): Promise<VersionListing> {
  return request<VersionListing>(`/documents/${encodeURIComponent(docId)}/versions`);
}
