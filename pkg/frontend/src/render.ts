/** DOM rendering helpers: preview grids, highlighted sketches, history. */

import { TablePreview } from "./api.js";
import { SketchDiff } from "./model.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderPreview(preview: TablePreview): HTMLElement {
  const wrap = el("div", "preview");
  wrap.appendChild(el("div", "preview-title", preview.table));
  const table = el("table", "preview-grid");
  const head = el("tr");
  for (const column of preview.columns) head.appendChild(el("th", "", column));
  table.appendChild(head);
  for (const row of preview.rows) {
    const tr = el("tr");
    for (const cell of row) tr.appendChild(el("td", "", String(cell)));
    table.appendChild(tr);
  }
  wrap.appendChild(table);
  return wrap;
}

export function renderSketchDiff(diff: SketchDiff): HTMLElement {
  const pre = el("pre", "sketch");
  pre.appendChild(document.createTextNode(diff.prefix));
  pre.appendChild(el("mark", "changed", diff.changed));
  pre.appendChild(document.createTextNode(diff.suffix));
  return pre;
}

export function renderHistory(history: { question: string; answer: boolean }[]): HTMLElement {
  const list = el("ol", "history");
  for (const entry of history) {
    const item = el("li", entry.answer ? "accepted" : "rejected");
    item.appendChild(el("span", "verdict", entry.answer ? "✔" : "✘"));
    item.appendChild(el("span", "", " " + entry.question));
    list.appendChild(item);
  }
  return list;
}

export function renderError(message: string,
                            location: { line: number; column: number } | null): HTMLElement {
  const box = el("div", "error");
  box.appendChild(el("div", "", message));
  if (location) {
    box.appendChild(el("div", "error-loc",
      `at line ${location.line}, column ${location.column}`));
  }
  return box;
}
