/**
 * Framework-free view-model for one editing dialogue.
 *
 * Holds everything the page renders: the transcript, the image URL for
 * the pane, the tracked refer, and the read-only slider positions. The
 * only way it mutates server state is ChatSession.send -> the
 * utterance endpoint; sliders and image fetches are pure reads.
 */

import {
  ApiError,
  ImageVariant,
  LogPayload,
  SessionPayload,
  TurnPayload,
} from "./api.js";

/** The five adjustable attributes, in display order. */
export const ATTRIBUTES = [
  "brightness",
  "contrast",
  "hue",
  "saturation",
  "lightness",
] as const;

export type Speaker = "user" | "system" | "notice";

export interface TranscriptEntry {
  speaker: Speaker;
  text: string;
}

export interface UiSessionView {
  sessionId: string | null;
  imageId: string | null;
  transcript: TranscriptEntry[];
  imageVersion: number;
  overlay: boolean;
  imageUrl: string | null;
  trackedRefer: string | null;
  maskConfirmed: boolean;
  sliders: Record<string, number>;
  busy: boolean;
  closed: boolean;
}

/** What ChatSession needs from the service client (fakeable in tests). */
export interface ServiceApi {
  createSession(imageId: string): Promise<SessionPayload>;
  sendUtterance(sessionId: string, text: string): Promise<TurnPayload>;
  getState(sessionId: string): Promise<SessionPayload>;
  getLog(sessionId: string): Promise<LogPayload>;
  imageUrl(sessionId: string, variant: ImageVariant, version: number): string;
}

function zeroSliders(): Record<string, number> {
  const sliders: Record<string, number> = {};
  for (const name of ATTRIBUTES) sliders[name] = 0;
  return sliders;
}

function emptyView(): UiSessionView {
  return {
    sessionId: null,
    imageId: null,
    transcript: [],
    imageVersion: 0,
    overlay: false,
    imageUrl: null,
    trackedRefer: null,
    maskConfirmed: false,
    sliders: zeroSliders(),
    busy: false,
    closed: false,
  };
}

/** Transcript as the server log tells it: one entry per record. */
export function transcriptFromLog(log: LogPayload): TranscriptEntry[] {
  return log.records.map((record) => ({
    speaker: record.speaker,
    text: record.text,
  }));
}

export class ChatSession {
  private view: UiSessionView = emptyView();

  constructor(
    private readonly api: ServiceApi,
    private readonly onChange: (view: UiSessionView) => void = () => {},
  ) {}

  /** A defensive copy; render code cannot corrupt the model. */
  snapshot(): UiSessionView {
    return {
      ...this.view,
      transcript: this.view.transcript.map((entry) => ({ ...entry })),
      sliders: { ...this.view.sliders },
    };
  }

  private emit(): void {
    this.onChange(this.snapshot());
  }

  private applySession(payload: SessionPayload): void {
    this.view.sessionId = payload.session_id;
    this.view.imageId = payload.image_id;
    this.view.imageVersion = payload.image_version;
    this.view.overlay = payload.overlay_available;
    this.view.trackedRefer = payload.state.refer;
    this.view.maskConfirmed = payload.state.mask_confirmed;
    this.view.sliders = { ...zeroSliders(), ...payload.sliders };
    this.view.closed = payload.closed;
    const variant: ImageVariant = payload.overlay_available
      ? "overlay"
      : "current";
    this.view.imageUrl = this.api.imageUrl(
      payload.session_id,
      variant,
      payload.image_version,
    );
  }

  async start(imageId: string): Promise<void> {
    const payload = await this.api.createSession(imageId);
    this.view = emptyView();
    this.applySession(payload);
    if (payload.greeting) {
      this.view.transcript.push({ speaker: "system", text: payload.greeting });
    }
    this.emit();
  }

  /**
   * Rebuild from a stored session id, transcript included. Returns
   * false when the server no longer knows the session (fall back to
   * the image chooser).
   */
  async resume(sessionId: string): Promise<boolean> {
    let payload: SessionPayload;
    let log: LogPayload;
    try {
      payload = await this.api.getState(sessionId);
      log = await this.api.getLog(sessionId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return false;
      throw err;
    }
    this.view = emptyView();
    this.applySession(payload);
    this.view.transcript = transcriptFromLog(log);
    this.emit();
    return true;
  }

  /**
   * One user turn. Empty text and turns while a request is in flight
   * are dropped client-side without touching the network.
   */
  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.view.busy || this.view.sessionId === null) return;
    if (this.view.closed) {
      this.view.transcript.push({
        speaker: "notice",
        text: "This session is closed. Start a new one to keep editing.",
      });
      this.emit();
      return;
    }
    this.view.busy = true;
    this.view.transcript.push({ speaker: "user", text: trimmed });
    this.emit();
    try {
      const turn = await this.api.sendUtterance(this.view.sessionId, trimmed);
      this.applySession(turn);
      this.view.transcript.push({ speaker: "system", text: turn.utterance });
    } catch (err) {
      const reason =
        err instanceof ApiError
          ? `${err.message} (HTTP ${err.status})`
          : "network error, please retry";
      this.view.transcript.push({ speaker: "notice", text: reason });
    } finally {
      this.view.busy = false;
      this.emit();
    }
  }

  /** The live transcript without client-side notices, for log parity. */
  spokenTranscript(): TranscriptEntry[] {
    return this.snapshot().transcript.filter(
      (entry) => entry.speaker !== "notice",
    );
  }
}
