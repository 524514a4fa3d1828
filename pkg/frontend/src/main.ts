/** Console boot: three panels over the HTTP API. */

import { JobsPanel, QueryPanel } from "./panels.js";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(): void {
  const queryPanel = new QueryPanel(
    byId<HTMLTextAreaElement>("query-text"),
    byId<HTMLSelectElement>("query-mode"),
    byId("query-output"),
    byId("doc-view"),
  );
  byId<HTMLButtonElement>("query-submit").addEventListener("click", () => {
    void queryPanel.submit();
  });

  const jobsPanel = new JobsPanel(
    byId<HTMLTextAreaElement>("job-fsd"),
    byId<HTMLInputElement>("job-section"),
    byId<HTMLInputElement>("job-language"),
    byId("job-list"),
    byId("job-errors"),
  );
  byId<HTMLButtonElement>("job-submit").addEventListener("click", () => {
    void jobsPanel.submit();
  });
}

if (typeof document !== "undefined" && document.getElementById("query-submit")) {
  boot();
}
