/**
 * End-to-end pass against a real edit service spawned from the CLI.
 * Everything here goes over HTTP on a scratch port; nothing is faked.
 */
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PNG } from "pngjs";
import { JSDOM } from "jsdom";

import { EditServiceClient } from "../src/api.js";
import { ChatSession, transcriptFromLog } from "../src/view.js";
import { buildPage, renderView } from "../src/dom.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const IER = "increase the brightness of the left cow by 30";

let fixtureDir: string;
let logDir: string;
let server: ChildProcess | null = null;
let serverNoise = "";

let requestCount = 0;
const countingFetch: typeof fetch = (...args) => {
  requestCount += 1;
  return fetch(...args);
};

const client = new EditServiceClient(BASE, countingFetch);
const session = new ChatSession(client);

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 120; attempt += 1) {
    try {
      const res = await fetch(`${BASE}/images`, {
        signal: AbortSignal.timeout(1000),
      });
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`edit service never came up on ${BASE}\n${serverNoise}`);
}

async function fetchImage(variant: string): Promise<Buffer> {
  const view = session.snapshot();
  const url = client.imageUrl(
    view.sessionId!,
    variant as "current" | "overlay" | "original",
    view.imageVersion,
  );
  const res = await countingFetch(url);
  expect(res.status).toBe(200);
  expect(res.headers.get("content-type")).toBe("image/png");
  return Buffer.from(await res.arrayBuffer());
}

beforeAll(async () => {
  fixtureDir = mkdtempSync(join(tmpdir(), "chatedit-scenes-"));
  logDir = mkdtempSync(join(tmpdir(), "chatedit-logs-"));
  const seeded = spawnSync("chatedit", ["demo-scenes", "--out", fixtureDir], {
    encoding: "utf8",
  });
  if (seeded.status !== 0) {
    throw new Error(`demo-scenes failed: ${seeded.stderr}`);
  }
  server = spawn(
    "chatedit",
    [
      "serve",
      "--fixtures", fixtureDir,
      "--logs", logDir,
      "--host", "127.0.0.1",
      "--port", String(PORT),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk) => (serverNoise += chunk));
  server.stderr?.on("data", (chunk) => (serverNoise += chunk));
  await waitForService();
});

afterAll(() => {
  server?.kill();
  rmSync(fixtureDir, { recursive: true, force: true });
  rmSync(logDir, { recursive: true, force: true });
});

describe("editing over a live service", () => {
  it("lists the demo images", async () => {
    const images = await client.listImages();
    expect(images).toContain("farm");
  });

  it("starts a session with a greeting and zeroed sliders", async () => {
    await session.start("farm");
    const view = session.snapshot();
    expect(view.sessionId).not.toBeNull();
    expect(view.transcript).toHaveLength(1);
    expect(view.transcript[0].speaker).toBe("system");
    expect(view.overlay).toBe(false);
    expect(Object.values(view.sliders).every((v) => v === 0)).toBe(true);
    expect(view.imageUrl).toContain("variant=current&v=0");
  });

  it("an edit request produces a red overlay on the detected region", async () => {
    const before = await fetchImage("current");
    await session.send(IER);
    const view = session.snapshot();
    expect(view.overlay).toBe(true);
    expect(view.trackedRefer).toBe("the left cow");
    expect(view.imageUrl).toContain("variant=overlay");

    const overlayBytes = await fetchImage("overlay");
    expect(overlayBytes.equals(before)).toBe(false);

    const base = PNG.sync.read(before);
    const tinted = PNG.sync.read(overlayBytes);
    expect(tinted.width).toBe(base.width);
    let touched = 0;
    let redderOrEqual = 0;
    let greenDrops = 0;
    for (let i = 0; i < base.data.length; i += 4) {
      const changed =
        base.data[i] !== tinted.data[i] ||
        base.data[i + 1] !== tinted.data[i + 1] ||
        base.data[i + 2] !== tinted.data[i + 2];
      if (!changed) continue;
      touched += 1;
      if (tinted.data[i] >= base.data[i]) redderOrEqual += 1;
      if (tinted.data[i + 1] <= base.data[i + 1]) greenDrops += 1;
    }
    const total = base.data.length / 4;
    expect(touched).toBeGreaterThan(0);
    expect(touched).toBeLessThan(total); // the tint stays inside the region
    expect(redderOrEqual).toBe(touched); // red channel only ever goes up
    expect(greenDrops).toBe(touched);
  });

  it("confirming the region executes the edit and moves the slider", async () => {
    const before = await fetchImage("original");
    await session.send("yes");
    const view = session.snapshot();
    expect(view.overlay).toBe(false);
    expect(view.sliders.brightness).toBe(30);
    expect(view.imageVersion).toBe(1);
    expect(view.imageUrl).toContain("variant=current&v=1");
    const after = await fetchImage("current");
    expect(after.equals(before)).toBe(false);

    // the read-only slider on the rendered page follows suit
    const dom = new JSDOM("<!doctype html><body></body>");
    const page = buildPage(dom.window.document, dom.window.document.body);
    renderView(page, view);
    const slider = page.sliders.get("brightness")!;
    expect(slider.value).toBe("30");
    expect(slider.disabled).toBe(true);
  });

  it("slider drags on the rendered page send nothing to the service", async () => {
    const dom = new JSDOM("<!doctype html><body></body>");
    const page = buildPage(dom.window.document, dom.window.document.body);
    renderView(page, session.snapshot());
    const before = requestCount;
    for (const slider of page.sliders.values()) {
      slider.value = "55";
      for (const type of ["pointerdown", "input", "change", "pointerup"]) {
        slider.dispatchEvent(new dom.window.Event(type, { bubbles: true }));
      }
    }
    await new Promise((resolve) => setTimeout(resolve, 50));
    expect(requestCount).toBe(before);
  });

  it("the transcript rebuilt from the server log matches the live one", async () => {
    await session.send("decrease the brightness of the sky by 20");
    const view = session.snapshot();
    const log = await client.getLog(view.sessionId!);
    expect(transcriptFromLog(log)).toEqual(session.spokenTranscript());
    expect(log.execute_count).toBe(1);
    expect(log.query_count).toBeGreaterThanOrEqual(2);
  });

  it("a fresh session resumed by id replays the same transcript", async () => {
    const view = session.snapshot();
    const copy = new ChatSession(client);
    expect(await copy.resume(view.sessionId!)).toBe(true);
    expect(copy.spokenTranscript()).toEqual(session.spokenTranscript());
    expect(copy.snapshot().sliders).toEqual(view.sliders);
    expect(await copy.resume("no-such-session")).toBe(false);
  });
});
