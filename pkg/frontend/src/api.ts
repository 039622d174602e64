/**
 * Typed client for the querysketch HTTP service.
 *
 * Every response carries `v: 1`; errors arrive as JSON bodies with an
 * `error` message (plus line/column for sketch parse failures) and are
 * rethrown as ApiError so the UI can render them inline.
 */

export interface TablePreview {
  table: string;
  columns: string[];
  rows: (string | number)[][];
}

export interface QuestionPayload {
  summary: string;
  holes: string[];
  resulting_sketch: string;
  previews: TablePreview[];
  pi_plus_hat: number;
  score_hat: number;
}

export interface FinalPayload {
  query: string;
  result: { columns: string[]; rows: (string | number)[][]; row_count: number };
}

export interface SessionResource {
  v: number;
  session_id: string;
  status: "awaiting_answer" | "complete" | "failed";
  sketch: string;
  question: QuestionPayload | null;
  final: FinalPayload | null;
  failure: string | null;
  history: { question: string; answer: boolean }[];
  iteration: number;
}

export interface DatabaseInfo {
  database_id: string;
  tables: string[];
}

export interface SessionConfig {
  seed?: number;
  sample_count?: number;
  mh_steps?: number;
  max_join_depth?: number;
  lambda_size?: number;
  no_soft?: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public line?: number,
    public column?: number,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok || body.error) {
    throw new ApiError(response.status, body.error ?? response.statusText,
      body.line, body.column);
  }
  return body as T;
}

export class Api {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createDatabase(schema: unknown, csv: Record<string, string>): Promise<DatabaseInfo> {
    const response = await fetch(this.url("/databases"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ schema, csv }),
    });
    return unwrap<DatabaseInfo>(response);
  }

  async listTables(databaseId: string): Promise<string[]> {
    const response = await fetch(this.url(`/databases/${databaseId}/tables`));
    const body = await unwrap<{ tables: string[] }>(response);
    return body.tables;
  }

  async preview(databaseId: string, table: string, rows = 5): Promise<TablePreview> {
    const response = await fetch(
      this.url(`/databases/${databaseId}/tables/${table}/preview?rows=${rows}`));
    return unwrap<TablePreview>(response);
  }

  async createSession(databaseId: string, sketch: string,
                      config?: SessionConfig): Promise<SessionResource> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ database_id: databaseId, sketch, config }),
    });
    return unwrap<SessionResource>(response);
  }

  async getSession(sessionId: string): Promise<SessionResource> {
    const response = await fetch(this.url(`/sessions/${sessionId}`));
    return unwrap<SessionResource>(response);
  }

  async answer(sessionId: string, accept: boolean): Promise<SessionResource> {
    const response = await fetch(this.url(`/sessions/${sessionId}/answer`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ accept }),
    });
    return unwrap<SessionResource>(response);
  }

  async undo(sessionId: string): Promise<SessionResource> {
    const response = await fetch(this.url(`/sessions/${sessionId}/undo`), {
      method: "POST",
    });
    return unwrap<SessionResource>(response);
  }
}
