/** Render a sentence with the answer span wrapped in <mark>.
 *
 * Offsets are character positions into the sentence as served; the
 * marked substring must equal the answer character for character, so
 * everything is built with text nodes, never innerHTML. */

import type { Highlight } from "./api.js";

export function renderSentence(
  doc: Document,
  sentence: string,
  highlight: Highlight,
): HTMLElement {
  const el = doc.createElement("p");
  el.className = "sentence";
  const { start, end } = highlight;
  if (start < 0 || end > sentence.length || start >= end) {
    // Defensive: never drop the sentence over bad offsets.
    el.appendChild(doc.createTextNode(sentence));
    return el;
  }
  el.appendChild(doc.createTextNode(sentence.slice(0, start)));
  const mark = doc.createElement("mark");
  mark.className = "answer";
  mark.appendChild(doc.createTextNode(sentence.slice(start, end)));
  el.appendChild(mark);
  el.appendChild(doc.createTextNode(sentence.slice(end)));
  return el;
}
