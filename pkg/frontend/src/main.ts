/**
 * Page bootstrap: find the service, resume a stored session if the
 * server still knows it, otherwise offer the image chooser.
 *
 * The API base defaults to the page origin and can be overridden with
 * ?api=http://host:port for the common dev setup where the static
 * files and the service run on different ports.
 */

import { EditServiceClient } from "./api.js";
import { buildPage, fillChooser, renderView, wireComposer } from "./dom.js";
import { ChatSession } from "./view.js";

const SESSION_KEY = "chatedit.session_id";

function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  return override ?? window.location.origin;
}

export async function boot(root: HTMLElement): Promise<void> {
  const client = new EditServiceClient(apiBase());
  const page = buildPage(document, root);
  const session = new ChatSession(client, (view) => {
    renderView(page, view);
    if (view.sessionId) {
      window.localStorage.setItem(SESSION_KEY, view.sessionId);
    }
  });
  wireComposer(page, session);

  page.startButton.addEventListener("click", () => {
    const imageId = page.imageSelect.value;
    if (imageId) void session.start(imageId);
  });

  try {
    fillChooser(page, await client.listImages());
  } catch {
    page.status.textContent = "cannot reach the edit service";
    return;
  }

  const stored = window.localStorage.getItem(SESSION_KEY);
  if (stored) {
    const resumed = await session.resume(stored).catch(() => false);
    if (!resumed) {
      window.localStorage.removeItem(SESSION_KEY);
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app") as HTMLElement);
}
