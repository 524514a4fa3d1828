// @vitest-environment jsdom
/** Panel behavior with fetch stubbed: stale-response discard, inline
 * errors preserving the query, client-side validation, job polling. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it, vi } from "vitest";

import { JobsPanel, QueryPanel } from "../src/panels.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8"));
}

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function queryDom() {
  document.body.innerHTML = `
    <textarea id="q"></textarea>
    <select id="m"><option value="qa" selected>qa</option></select>
    <div id="out"></div><div id="doc"></div>`;
  return {
    input: document.getElementById("q") as HTMLTextAreaElement,
    mode: document.getElementById("m") as HTMLSelectElement,
    out: document.getElementById("out") as HTMLElement,
    doc: document.getElementById("doc") as HTMLElement,
  };
}

afterEach(() => {
  vi.unstubAllGlobals();
  vi.useRealTimers();
});

describe("QueryPanel", () => {
  it("renders the latest response and discards stale ones", async () => {
    const { input, mode, out } = queryDom();
    const panel = new QueryPanel(input, mode, out);

    let releaseFirst!: (value: Response) => void;
    const first = new Promise<Response>((resolve) => (releaseFirst = resolve));
    const fetchMock = vi.fn()
      .mockReturnValueOnce(first)
      .mockResolvedValueOnce(jsonResponse(fixture("query_qa")));
    vi.stubGlobal("fetch", fetchMock);

    input.value = "slow question";
    const slow = panel.submit();
    input.value = "fast question";
    const fast = panel.submit();
    await fast;
    // the slow (stale) response arrives afterwards and must be discarded
    releaseFirst(jsonResponse(fixture("query_qa_unanswerable")));
    await slow;

    expect(out.querySelector(".answer")?.textContent)
      .toBe("Yes: passwords must be at least 12 characters long.");
    expect(out.querySelectorAll(".query-response")).toHaveLength(1);
  });

  it("shows a 502 error inline and preserves the query text", async () => {
    const { input, mode, out } = queryDom();
    const panel = new QueryPanel(input, mode, out);
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(
      { code: "backend", message: "model backend unreachable" }, 502)));

    input.value = "my precious query";
    await panel.submit();

    const banner = out.querySelector(".error-banner");
    expect(banner?.textContent).toContain("backend (502)");
    expect(input.value).toBe("my precious query");
  });

  it("validates empty queries client-side without a request", async () => {
    const { input, mode, out } = queryDom();
    const panel = new QueryPanel(input, mode, out);
    const fetchMock = vi.fn();
    vi.stubGlobal("fetch", fetchMock);

    input.value = "   ";
    await panel.submit();

    expect(fetchMock).not.toHaveBeenCalled();
    expect(out.querySelector(".error-banner")?.textContent)
      .toContain("enter a query");
  });

  it("opens a document view from a quotation link", async () => {
    const { input, mode, out, doc } = queryDom();
    const panel = new QueryPanel(input, mode, out, doc);
    vi.stubGlobal("fetch", vi.fn()
      .mockResolvedValueOnce(jsonResponse(fixture("query_qa")))
      .mockResolvedValueOnce(jsonResponse(fixture("doc_versions"))));

    input.value = "how long must a password be?";
    await panel.submit();
    out.querySelector<HTMLAnchorElement>(".doc-link")!.click();
    await vi.waitFor(() => {
      expect(doc.querySelector("h3")?.textContent).toContain("Auth Spec");
    });
    expect(doc.querySelectorAll("li").length).toBeGreaterThan(0);
  });
});

function jobsDom() {
  document.body.innerHTML = `
    <textarea id="fsd"></textarea>
    <input id="section"><input id="lang">
    <div id="list"></div><div id="errors"></div>`;
  return {
    fsd: document.getElementById("fsd") as HTMLTextAreaElement,
    section: document.getElementById("section") as HTMLInputElement,
    lang: document.getElementById("lang") as HTMLInputElement,
    list: document.getElementById("list") as HTMLElement,
    errors: document.getElementById("errors") as HTMLElement,
  };
}

describe("JobsPanel", () => {
  it("rejects an empty section client-side", async () => {
    const dom = jobsDom();
    const panel = new JobsPanel(dom.fsd, dom.section, dom.lang, dom.list,
                                dom.errors);
    const fetchMock = vi.fn();
    vi.stubGlobal("fetch", fetchMock);

    dom.fsd.value = "1 Intro\nsome fsd";
    dom.section.value = "";
    await panel.submit();

    expect(fetchMock).not.toHaveBeenCalled();
    expect(dom.errors.textContent).toContain("section is required");
  });

  it("polls queued jobs until done and then shows the download link", async () => {
    vi.useFakeTimers();
    const dom = jobsDom();
    const settled: string[] = [];
    const panel = new JobsPanel(dom.fsd, dom.section, dom.lang, dom.list,
                                dom.errors,
                                { pollIntervalMs: 100,
                                  onSettled: (r) => settled.push(r.status) });
    const queued = fixture("job_queued") as { job_id: string };
    vi.stubGlobal("fetch", vi.fn()
      .mockResolvedValueOnce(jsonResponse({ job_id: queued.job_id,
                                            status: "queued" }))
      .mockResolvedValueOnce(jsonResponse(fixture("job_queued")))
      .mockResolvedValueOnce(jsonResponse(fixture("job_running")))
      .mockResolvedValueOnce(jsonResponse(fixture("job_done"))));

    dom.fsd.value = "1 Password\nrules";
    dom.section.value = "Password";
    await panel.submit();
    expect(dom.list.querySelector(".job-status")?.textContent).toBe("queued");

    await vi.advanceTimersByTimeAsync(100);
    expect(dom.list.querySelector(".job-status")?.textContent).toBe("running");

    await vi.advanceTimersByTimeAsync(100);
    expect(dom.list.querySelector(".job-status")?.textContent).toBe("done");
    expect(dom.list.querySelector("a.download")).not.toBeNull();
    expect(settled).toEqual(["done"]);

    // polling stops once nothing is pending
    const calls = (fetch as ReturnType<typeof vi.fn>).mock.calls.length;
    await vi.advanceTimersByTimeAsync(500);
    expect((fetch as ReturnType<typeof vi.fn>).mock.calls.length).toBe(calls);
  });

  it("shows diagnostics for aborted jobs", async () => {
    const dom = jobsDom();
    const panel = new JobsPanel(dom.fsd, dom.section, dom.lang, dom.list,
                                dom.errors, { pollIntervalMs: 50 });
    const aborted = fixture("job_aborted") as { job_id: string };
    vi.stubGlobal("fetch", vi.fn()
      .mockResolvedValueOnce(jsonResponse({ job_id: aborted.job_id,
                                            status: "queued" }))
      .mockResolvedValueOnce(jsonResponse(fixture("job_aborted"))));

    dom.fsd.value = "1 Intro\nfsd";
    dom.section.value = "Billing";
    await panel.submit();

    expect(dom.list.querySelector(".job-aborted .diagnostics")?.textContent)
      .toContain("chapter not found");
  });

  it("surfaces server-side validation errors inline", async () => {
    const dom = jobsDom();
    const panel = new JobsPanel(dom.fsd, dom.section, dom.lang, dom.list,
                                dom.errors);
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(
      { code: "validation", message: "one of fsd_text or fsd_path" }, 400)));

    dom.fsd.value = "text";
    dom.section.value = "Password";
    await panel.submit();

    expect(dom.errors.querySelector(".error-banner")?.textContent)
      .toContain("validation (400)");
  });
});
