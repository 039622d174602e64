/**
 * Session view-model: a small state machine the screens render from.
 *
 * All state is re-derived from the service's SessionResource after every
 * call; the client adds no synthesis logic of its own. One mutation may be
 * in flight per session, enforced by the `busy` flag.
 */

import { Api, ApiError, SessionConfig, SessionResource, TablePreview } from "./api.js";

export type Screen = "picker" | "editor" | "question" | "complete" | "failed";

export interface SketchDiff {
  prefix: string;
  changed: string;
  suffix: string;
}

export interface ViewState {
  screen: Screen;
  databaseId: string | null;
  tables: string[];
  resource: SessionResource | null;
  busy: boolean;
  error: string | null;
  errorLocation: { line: number; column: number } | null;
}

export interface QuestionView {
  summary: string;
  sketch: string;
  diff: SketchDiff;
  previews: TablePreview[];
  history: { question: string; answer: boolean }[];
}

/**
 * Marks the region of `next` that differs from `previous` by longest common
 * prefix/suffix; linked holes may change several spots, which the single
 * span then covers.
 */
export function diffSketch(previous: string, next: string): SketchDiff {
  let start = 0;
  const max = Math.min(previous.length, next.length);
  while (start < max && previous[start] === next[start]) start++;
  let endPrev = previous.length;
  let endNext = next.length;
  while (endPrev > start && endNext > start
         && previous[endPrev - 1] === next[endNext - 1]) {
    endPrev--;
    endNext--;
  }
  return {
    prefix: next.slice(0, start),
    changed: next.slice(start, endNext),
    suffix: next.slice(endNext),
  };
}

export class SessionStore {
  state: ViewState = {
    screen: "picker",
    databaseId: null,
    tables: [],
    resource: null,
    busy: false,
    error: null,
    errorLocation: null,
  };

  private listeners: (() => void)[] = [];

  constructor(private api: Api) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private setResource(resource: SessionResource): void {
    this.state.resource = resource;
    if (resource.status === "complete") {
      this.state.screen = "complete";
    } else if (resource.status === "failed") {
      this.state.screen = "failed";
    } else {
      this.state.screen = "question";
    }
  }

  private async run<T>(work: () => Promise<T>): Promise<T | undefined> {
    if (this.state.busy) return undefined;
    this.state.busy = true;
    this.state.error = null;
    this.state.errorLocation = null;
    this.emit();
    try {
      return await work();
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.error = error.message;
        if (error.line !== undefined && error.column !== undefined) {
          this.state.errorLocation = { line: error.line, column: error.column };
        }
      } else {
        this.state.error = String(error);
      }
      return undefined;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  async loadDatabase(schema: unknown, csv: Record<string, string>): Promise<void> {
    await this.run(async () => {
      const info = await this.api.createDatabase(schema, csv);
      this.state.databaseId = info.database_id;
      this.state.tables = info.tables;
      this.state.screen = "editor";
    });
  }

  async useDatabase(databaseId: string): Promise<void> {
    await this.run(async () => {
      this.state.tables = await this.api.listTables(databaseId);
      this.state.databaseId = databaseId;
      this.state.screen = "editor";
    });
  }

  async submitSketch(sketch: string, config?: SessionConfig): Promise<void> {
    const databaseId = this.state.databaseId;
    if (!databaseId) return;
    await this.run(async () => {
      this.setResource(await this.api.createSession(databaseId, sketch, config));
    });
  }

  async answer(accept: boolean): Promise<void> {
    const resource = this.state.resource;
    if (!resource) return;
    await this.run(async () => {
      this.setResource(await this.api.answer(resource.session_id, accept));
    });
  }

  async undo(): Promise<void> {
    const resource = this.state.resource;
    if (!resource) return;
    await this.run(async () => {
      this.setResource(await this.api.undo(resource.session_id));
    });
  }

  async refresh(): Promise<void> {
    const resource = this.state.resource;
    if (!resource) return;
    await this.run(async () => {
      this.setResource(await this.api.getSession(resource.session_id));
    });
  }

  /** The question screen's content, or null off that screen. */
  questionView(): QuestionView | null {
    const resource = this.state.resource;
    if (!resource || !resource.question) return null;
    return {
      summary: resource.question.summary,
      sketch: resource.sketch,
      diff: diffSketch(resource.sketch, resource.question.resulting_sketch),
      previews: resource.question.previews,
      history: resource.history,
    };
  }

  /** The completion screen's content, or null off that screen. */
  completionView(): { query: string; columns: string[]; rows: (string | number)[][] } | null {
    const resource = this.state.resource;
    if (!resource || !resource.final) return null;
    return {
      query: resource.final.query,
      columns: resource.final.result.columns,
      rows: resource.final.result.rows,
    };
  }
}
