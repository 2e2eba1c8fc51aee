/**
 * DOM construction and rendering. No framework: build the elements
 * once, then re-render from UiSessionView snapshots. Sliders are
 * created disabled and never get listeners, so dragging them cannot
 * reach the network by construction.
 */

import { ATTRIBUTES, ChatSession, UiSessionView } from "./view.js";

export interface PageElements {
  root: HTMLElement;
  chooser: HTMLDivElement;
  imageSelect: HTMLSelectElement;
  startButton: HTMLButtonElement;
  workspace: HTMLDivElement;
  imagePane: HTMLImageElement;
  referLabel: HTMLSpanElement;
  sliders: Map<string, HTMLInputElement>;
  sliderReadouts: Map<string, HTMLSpanElement>;
  transcriptList: HTMLUListElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
  form: HTMLFormElement;
  status: HTMLDivElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  return node;
}

export function buildPage(doc: Document, root: HTMLElement): PageElements {
  root.innerHTML = "";

  const status = el(doc, "div", "status");
  status.textContent = "pick an image to begin";

  const chooser = el(doc, "div", "chooser");
  const imageSelect = el(doc, "select", "image-select");
  const startButton = el(doc, "button", "start-button");
  startButton.type = "button";
  startButton.textContent = "Start editing";
  chooser.append(imageSelect, startButton);

  const workspace = el(doc, "div", "workspace");
  workspace.hidden = true;

  const imagePane = el(doc, "img", "image-pane");
  imagePane.alt = "image being edited";

  const side = el(doc, "div", "side");
  const referLine = el(doc, "div", "refer-line");
  referLine.append("tracked region: ");
  const referLabel = el(doc, "span", "refer-label");
  referLabel.textContent = "(none)";
  referLine.append(referLabel);

  const sliderBox = el(doc, "div", "sliders");
  const sliders = new Map<string, HTMLInputElement>();
  const sliderReadouts = new Map<string, HTMLSpanElement>();
  for (const name of ATTRIBUTES) {
    const row = el(doc, "label", "slider-row");
    row.append(`${name} `);
    const slider = el(doc, "input");
    slider.type = "range";
    slider.min = "-100";
    slider.max = "100";
    slider.value = "0";
    slider.disabled = true; // display-only: the dialogue is the input
    slider.dataset.attribute = name;
    const readout = el(doc, "span", "slider-readout");
    readout.textContent = "0";
    row.append(slider, readout);
    sliderBox.append(row);
    sliders.set(name, slider);
    sliderReadouts.set(name, readout);
  }

  const transcriptList = el(doc, "ul", "transcript");

  const form = el(doc, "form", "composer");
  const input = el(doc, "input", "composer-input");
  input.type = "text";
  input.placeholder = "describe your edit...";
  const sendButton = el(doc, "button", "send-button");
  sendButton.type = "submit";
  sendButton.textContent = "Send";
  form.append(input, sendButton);

  side.append(referLine, sliderBox, transcriptList, form);
  workspace.append(imagePane, side);
  root.append(status, chooser, workspace);

  return {
    root,
    chooser,
    imageSelect,
    startButton,
    workspace,
    imagePane,
    referLabel,
    sliders,
    sliderReadouts,
    transcriptList,
    input,
    sendButton,
    form,
    status,
  };
}

export function renderView(page: PageElements, view: UiSessionView): void {
  const doc = page.root.ownerDocument;
  const inSession = view.sessionId !== null;
  page.chooser.hidden = inSession;
  page.workspace.hidden = !inSession;

  if (view.imageUrl && page.imagePane.getAttribute("src") !== view.imageUrl) {
    page.imagePane.src = view.imageUrl;
  }

  page.referLabel.textContent = view.trackedRefer ?? "(none)";

  for (const [name, slider] of page.sliders) {
    const position = view.sliders[name] ?? 0;
    slider.value = String(position);
    slider.disabled = true;
    const readout = page.sliderReadouts.get(name);
    if (readout) readout.textContent = String(position);
  }

  page.transcriptList.innerHTML = "";
  for (const entry of view.transcript) {
    const item = doc.createElement("li");
    item.className = `turn turn-${entry.speaker}`;
    item.textContent = entry.text;
    page.transcriptList.append(item);
  }

  page.input.disabled = view.busy || view.closed;
  page.sendButton.disabled = view.busy || view.closed;
  if (view.closed) {
    page.status.textContent = "session closed";
  } else if (view.busy) {
    page.status.textContent = "thinking...";
  } else if (inSession) {
    page.status.textContent = `editing ${view.imageId}`;
  }
}

/** Hook the composer up; the form is the page's single write path. */
export function wireComposer(page: PageElements, session: ChatSession): void {
  page.form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = page.input.value;
    if (!text.trim()) return; // blocked before any request is made
    page.input.value = "";
    void session.send(text);
  });
}

export function fillChooser(page: PageElements, imageIds: string[]): void {
  page.imageSelect.innerHTML = "";
  const doc = page.root.ownerDocument;
  for (const id of imageIds) {
    const option = doc.createElement("option");
    option.value = id;
    option.textContent = id;
    page.imageSelect.append(option);
  }
}
