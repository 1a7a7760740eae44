/** Chat app wiring: one in-flight request at a time, turns rendered in
 * submission order, errors as retryable bubbles. */

import { ApiError, askQuestion, type AskResponse, type FetchLike } from "./api.js";
import { renderSentence } from "./highlight.js";
import {
  DEFAULTS,
  GRANULARITIES,
  clampK,
  resetSettings,
  snapMu,
  toOverrides,
  type Settings,
} from "./settings.js";

export interface ChatTurn {
  question: string;
  response: AskResponse | null;
  error: string | null;
  timestamp: number;
}

export interface AppHandles {
  submit(text: string): Promise<void>;
  setK(value: number): void;
  setMu(value: number): void;
  setGranularity(value: string): void;
  reset(): void;
  readonly settings: Settings;
  readonly turns: readonly ChatTurn[];
}

function latencyChips(doc: Document, response: AskResponse): HTMLElement {
  const chips = doc.createElement("div");
  chips.className = "chips";
  const pairs: [string, number][] = [
    ["retrieve", response.latency.retrieve_ms],
    ["read", response.latency.read_ms],
  ];
  for (const [label, ms] of pairs) {
    const chip = doc.createElement("span");
    chip.className = "chip";
    chip.textContent = `${label} ${ms.toFixed(0)} ms`;
    chips.appendChild(chip);
  }
  return chips;
}

export function createApp(
  doc: Document,
  root: HTMLElement,
  fetchImpl: FetchLike = fetch,
): AppHandles {
  const settings: Settings = resetSettings();
  const turns: ChatTurn[] = [];
  let pending = false;

  root.innerHTML = "";

  const panel = doc.createElement("form");
  panel.className = "settings";
  const kInput = doc.createElement("input");
  kInput.type = "number";
  kInput.min = "1";
  const muInput = doc.createElement("input");
  muInput.type = "range";
  muInput.min = "0";
  muInput.max = "1";
  muInput.step = "0.1";
  const muValue = doc.createElement("span");
  muValue.className = "mu-value";
  const granSelect = doc.createElement("select");
  for (const g of GRANULARITIES) {
    const opt = doc.createElement("option");
    opt.value = g;
    opt.textContent = g;
    granSelect.appendChild(opt);
  }
  const resetBtn = doc.createElement("button");
  resetBtn.type = "button";
  resetBtn.textContent = "Reset";
  for (const [label, control] of [
    ["k", kInput],
    ["μ", muInput],
    ["granularity", granSelect],
  ] as [string, HTMLElement][]) {
    const wrap = doc.createElement("label");
    wrap.appendChild(doc.createTextNode(label + " "));
    wrap.appendChild(control);
    if (control === muInput) wrap.appendChild(muValue);
    panel.appendChild(wrap);
  }
  panel.appendChild(resetBtn);
  root.appendChild(panel);

  const log = doc.createElement("div");
  log.className = "chat-log";
  root.appendChild(log);

  const form = doc.createElement("form");
  form.className = "composer";
  const input = doc.createElement("input");
  input.type = "text";
  input.placeholder = "Ask a question";
  const button = doc.createElement("button");
  button.type = "submit";
  button.textContent = "Ask";
  form.appendChild(input);
  form.appendChild(button);
  root.appendChild(form);

  function syncComposer(): void {
    button.disabled = pending || input.value.trim() === "";
  }
  input.addEventListener("input", syncComposer);
  syncComposer();

  function renderTurn(turn: ChatTurn): void {
    const bubble = doc.createElement("div");
    bubble.className = "turn";

    const q = doc.createElement("p");
    q.className = "question";
    q.textContent = turn.question;
    bubble.appendChild(q);

    if (turn.error !== null) {
      const err = doc.createElement("div");
      err.className = "bubble error";
      const msg = doc.createElement("span");
      msg.textContent = turn.error;
      err.appendChild(msg);
      const retry = doc.createElement("button");
      retry.type = "button";
      retry.className = "retry";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => {
        void submit(turn.question);
      });
      err.appendChild(retry);
      bubble.appendChild(err);
    } else if (turn.response && turn.response.answer !== null) {
      const resp = turn.response;
      const ans = doc.createElement("div");
      ans.className = "bubble answer-bubble";
      ans.appendChild(
        renderSentence(doc, resp.sentence ?? resp.answer ?? "", resp.highlight ?? { start: 0, end: 0 }),
      );
      ans.appendChild(latencyChips(doc, resp));
      bubble.appendChild(ans);
    } else {
      const none = doc.createElement("div");
      none.className = "bubble no-answer";
      none.textContent = "No answer found.";
      bubble.appendChild(none);
    }
    log.appendChild(bubble);
  }

  async function submit(text: string): Promise<void> {
    const question = text.trim();
    if (question === "" || pending) return;
    pending = true;
    syncComposer();
    const turn: ChatTurn = {
      question,
      response: null,
      error: null,
      timestamp: Date.now(),
    };
    try {
      turn.response = await askQuestion(question, toOverrides(settings), fetchImpl);
    } catch (err) {
      turn.error =
        err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    }
    turns.push(turn);
    renderTurn(turn);
    pending = false;
    syncComposer();
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = "";
    void submit(text);
  });

  function syncPanel(): void {
    kInput.value = String(settings.k);
    muInput.value = String(settings.mu);
    muValue.textContent = settings.mu.toFixed(1);
    granSelect.value = settings.granularity;
  }

  const handles: AppHandles = {
    submit,
    setK(value: number): void {
      settings.k = clampK(value);
      syncPanel();
    },
    setMu(value: number): void {
      settings.mu = snapMu(value);
      syncPanel();
    },
    setGranularity(value: string): void {
      if (GRANULARITIES.includes(value)) settings.granularity = value;
      syncPanel();
    },
    reset(): void {
      Object.assign(settings, DEFAULTS);
      syncPanel();
    },
    settings,
    turns,
  };

  kInput.addEventListener("change", () => handles.setK(Number(kInput.value)));
  muInput.addEventListener("input", () => handles.setMu(Number(muInput.value)));
  granSelect.addEventListener("change", () =>
    handles.setGranularity(granSelect.value),
  );
  resetBtn.addEventListener("click", () => handles.reset());
  syncPanel();

  return handles;
}
