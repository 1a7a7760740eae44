import type { AskResponse } from "../src/api.js";

/** Ten sentence/answer fixtures mirroring what the service returns:
 * highlight offsets index into the sentence and cover the answer. */
export const FIXTURES: AskResponse[] = [
  ["Hamlet was written by Shakespeare.", "Shakespeare"],
  ["The fresco was restored by Verrocchio.", "Verrocchio"],
  ["The treaty was signed in Vienna.", "Vienna"],
  ["Marie Curie discovered polonium in 1898.", "Marie Curie"],
  ["The river flows through Budapest.", "Budapest"],
  ["Penicillin was discovered by Fleming.", "Fleming"],
  ["The summit is called K2.", "K2"],
  ["Its caldera formed after the 1883 eruption.", "1883"],
  ["The engine was patented by Diesel.", "Diesel"],
  ["The palace stands in Granada, Spain.", "Granada, Spain"],
].map(([sentence, answer], i) => {
  const start = sentence.indexOf(answer);
  return {
    answer,
    sentence,
    highlight: { start, end: start + answer.length },
    fused_score: 1.5 + i,
    segment_id: `a${i}:paragraph:0`,
    status: "ok" as const,
    k: 10,
    mu: 0.5,
    granularity: "paragraph",
    latency: { retrieve_ms: 3.1, read_ms: 1.2, total_ms: 4.5 },
  };
});

/** fetch stub that answers /ask from a handler. */
export function fakeFetch(
  handler: (body: { question: string; k?: number; mu?: number; granularity?: string }) => AskResponse | { status: number; detail: string },
) {
  return async (_url: string, init?: RequestInit): Promise<Response> => {
    const body = JSON.parse(String(init?.body ?? "{}"));
    const result = handler(body);
    if ("detail" in result) {
      return new Response(JSON.stringify({ detail: result.detail }), {
        status: result.status,
      });
    }
    return new Response(JSON.stringify(result), { status: 200 });
  };
}

/** Echoing service stub: answers the first fixture, echoing overrides. */
export function echoFetch() {
  return fakeFetch((body) => ({
    ...FIXTURES[0],
    k: body.k ?? 10,
    mu: body.mu ?? 0.5,
    granularity: body.granularity ?? "paragraph",
  }));
}
