/**
 * Thin typed client over the edit service's HTTP+JSON API.
 *
 * Field names mirror the wire format (snake_case) so payloads pass
 * through untouched. Every mutating call in the whole UI goes through
 * sendUtterance; nothing else writes.
 */

export interface MaskSummary {
  source_id: string | null;
  confidence: number;
  member_count: number;
}

export interface StateSnapshot {
  refer: string | null;
  mask: MaskSummary | null;
  mask_confirmed: boolean;
  attribute: string | null;
  value: number | null;
  query_count: number;
  execute_count: number;
  turn_index: number;
}

export interface SessionPayload {
  session_id: string;
  image_id: string;
  state: StateSnapshot;
  closed: boolean;
  image_version: number;
  overlay_available: boolean;
  sliders: Record<string, number>;
  greeting?: string;
}

export interface ActPayload {
  kind: string;
  slot: string | null;
}

export interface TurnPayload extends SessionPayload {
  act: ActPayload;
  acts: ActPayload[];
  utterance: string;
  mask_overlay_present: boolean;
  image_updated: boolean;
}

export interface LogRecord {
  turn_index: number;
  speaker: "user" | "system";
  text: string;
  acts: ActPayload[];
  frame: unknown;
  state_after: StateSnapshot | null;
  rules: string[];
}

export interface LogPayload {
  session_id: string;
  image_id: string;
  query_count: number;
  execute_count: number;
  started_at: string | null;
  records: LogRecord[];
}

export type ImageVariant = "current" | "overlay" | "original";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class EditServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async listImages(): Promise<string[]> {
    const res = await this.fetchFn(`${this.baseUrl}/images`);
    const body = await parseOrThrow<{ images: string[] }>(res);
    return body.images;
  }

  async createSession(imageId: string): Promise<SessionPayload> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ image_id: imageId }),
    });
    return parseOrThrow<SessionPayload>(res);
  }

  async sendUtterance(sessionId: string, text: string): Promise<TurnPayload> {
    const res = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/utterances`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
    return parseOrThrow<TurnPayload>(res);
  }

  async getState(sessionId: string): Promise<SessionPayload> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/state`);
    return parseOrThrow<SessionPayload>(res);
  }

  async getLog(sessionId: string): Promise<LogPayload> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/log`);
    return parseOrThrow<LogPayload>(res);
  }

  async closeSession(sessionId: string): Promise<LogPayload> {
    const res = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}`, {
      method: "DELETE",
    });
    return parseOrThrow<LogPayload>(res);
  }

  /** URL for the image pane; the version tag busts the browser cache. */
  imageUrl(sessionId: string, variant: ImageVariant, version: number): string {
    return (
      `${this.baseUrl}/sessions/${sessionId}/image` +
      `?variant=${variant}&v=${version}`
    );
  }
}
