/**
 * Screen wiring: database picker -> sketch editor -> question loop ->
 * completion. Every button press issues exactly one API call; the whole
 * view re-renders from the store after each response, and the controls
 * disable while a request is in flight.
 */

import { Api } from "./api.js";
import { SessionStore } from "./model.js";
import { el, renderError, renderHistory, renderPreview, renderSketchDiff } from "./render.js";

const DEFAULT_SKETCH = `SELECT ??c_name:column
FROM (??t:table {(contains ??c_name:column ".*Church.*")
                 AND (1900 <= ??c_year:column <= 2020)})
WHERE ??c_year:column = 1948`;

function serviceUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? "http://127.0.0.1:8080";
}

const store = new SessionStore(new Api(serviceUrl()));
const root = document.getElementById("app") as HTMLElement;

let editorText = DEFAULT_SKETCH;
let schemaText = "";
const csvTexts: Record<string, string> = {};

function button(label: string, onClick: () => void, disabled = false): HTMLButtonElement {
  const node = el("button", "", label);
  node.disabled = disabled || store.state.busy;
  node.addEventListener("click", onClick);
  return node;
}

function renderPicker(): void {
  root.appendChild(el("h2", "", "Load a database"));
  const schemaBox = el("textarea", "schema-input");
  schemaBox.placeholder = "schema descriptor JSON";
  schemaBox.value = schemaText;
  schemaBox.addEventListener("input", () => { schemaText = schemaBox.value; });
  root.appendChild(schemaBox);

  const fileInput = el("input") as HTMLInputElement;
  fileInput.type = "file";
  fileInput.multiple = true;
  fileInput.addEventListener("change", async () => {
    for (const file of Array.from(fileInput.files ?? [])) {
      csvTexts[file.name.replace(/\.csv$/, "")] = await file.text();
    }
  });
  root.appendChild(el("div", "hint", "CSV files (one per table):"));
  root.appendChild(fileInput);

  root.appendChild(button("Create database", () => {
    void store.loadDatabase(JSON.parse(schemaText), csvTexts);
  }));

  const existing = el("input") as HTMLInputElement;
  existing.placeholder = "...or an existing database id";
  root.appendChild(existing);
  root.appendChild(button("Use database", () => {
    void store.useDatabase(existing.value.trim());
  }));
}

function renderEditor(): void {
  root.appendChild(el("h2", "", "Write a sketch"));
  root.appendChild(el("div", "hint", `tables: ${store.state.tables.join(", ")}`));
  const editor = el("textarea", "sketch-editor");
  editor.value = editorText;
  editor.addEventListener("input", () => { editorText = editor.value; });
  root.appendChild(editor);
  root.appendChild(button("Start session", () => {
    void store.submitSketch(editorText);
  }));
}

function renderQuestion(): void {
  const view = store.questionView();
  if (!view) return;
  root.appendChild(el("h2", "", "Proposed refinement"));
  root.appendChild(el("div", "summary", view.summary));
  root.appendChild(el("h3", "", "Resulting sketch"));
  root.appendChild(renderSketchDiff(view.diff));
  root.appendChild(el("h3", "", "Relevant tables"));
  for (const preview of view.previews) root.appendChild(renderPreview(preview));

  const controls = el("div", "controls");
  controls.appendChild(button("Accept", () => { void store.answer(true); }));
  controls.appendChild(button("Reject", () => { void store.answer(false); }));
  controls.appendChild(button("Undo", () => { void store.undo(); },
    view.history.length === 0));
  root.appendChild(controls);

  root.appendChild(el("h3", "", "History"));
  root.appendChild(renderHistory(view.history));
}

function renderComplete(): void {
  const view = store.completionView();
  if (!view) return;
  root.appendChild(el("h2", "", "Synthesis complete"));
  const query = el("pre", "final-query", view.query);
  root.appendChild(query);
  root.appendChild(button("Copy query", () => {
    void navigator.clipboard.writeText(view.query);
  }));
  root.appendChild(button("Download query", () => {
    const blob = new Blob([view.query], { type: "text/plain" });
    const link = el("a") as HTMLAnchorElement;
    link.href = URL.createObjectURL(blob);
    link.download = "query.txt";
    link.click();
  }));
  root.appendChild(el("h3", "", "Result"));
  root.appendChild(renderPreview({ table: "result", columns: view.columns, rows: view.rows }));
}

function renderFailed(): void {
  root.appendChild(el("h2", "", "Synthesis failed"));
  root.appendChild(el("div", "error", store.state.resource?.failure ?? "unknown failure"));
  root.appendChild(button("Undo last answer", () => { void store.undo(); }));
}

function render(): void {
  root.textContent = "";
  if (store.state.error) {
    root.appendChild(renderError(store.state.error, store.state.errorLocation));
  }
  switch (store.state.screen) {
    case "picker": renderPicker(); break;
    case "editor": renderEditor(); break;
    case "question": renderQuestion(); break;
    case "complete": renderComplete(); break;
    case "failed": renderFailed(); break;
  }
}

store.subscribe(render);
render();
