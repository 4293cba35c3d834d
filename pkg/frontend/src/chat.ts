import type { ApiClient } from "./api.js";
import { escapeHtml, snippet } from "./format.js";
import type { Answer, DocumentDetail } from "./types.js";

/**
 * Chat session state. Citation chips resolve to document detail through
 * the API; abstentions render a distinct state with no chips.
 */
export class ChatController {
  answer: Answer | null = null;
  question = "";
  transcriptOpen = false;
  citationDetail: DocumentDetail | null = null;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async ask(question: string): Promise<Answer> {
    if (!question.trim()) {
      throw new Error("question must be non-empty");
    }
    this.question = question;
    this.transcriptOpen = false;
    this.citationDetail = null;
    this.error = null;
    this.answer = await this.api.chat(question);
    return this.answer;
  }

  toggleTranscript(): void {
    this.transcriptOpen = !this.transcriptOpen;
  }

  async openCitation(doi: string): Promise<DocumentDetail> {
    this.citationDetail = await this.api.document(doi);
    return this.citationDetail;
  }
}

function renderTranscript(answer: Answer, open: boolean): string {
  const body = open
    ? answer.transcript.kind === "react"
      ? (answer.transcript.steps ?? [])
          .map(
            (step, i) => `<li class="step">
  <span class="thought">${escapeHtml(step.thought)}</span>
  <code class="action">${escapeHtml(step.action)}(${escapeHtml(step.action_input)})</code>
  <pre class="observation">${escapeHtml(snippet(step.observation, 400))}</pre>
</li>`,
          )
          .join("\n")
      : (answer.transcript.events ?? [])
          .map((event) => `<li class="step"><code>${escapeHtml(JSON.stringify(event))}</code></li>`)
          .join("\n")
    : "";
  return `<details class="transcript"${open ? " open" : ""}>
  <summary data-action="toggle-transcript">${answer.transcript.kind === "react" ? "agent steps" : "audit trail"}</summary>
  <ol>${body}</ol>
</details>`;
}

export function renderAnswer(controller: ChatController): string {
  const answer = controller.answer;
  if (!answer) {
    return `<section class="chat"><p class="empty">Ask a question about the corpus.</p></section>`;
  }
  const chips = answer.citations
    .map(
      (c) =>
        `<button class="citation-chip" data-action="open-citation" data-doi="${escapeHtml(c.doi)}">${escapeHtml(c.doi)}${c.chunk_id === null ? "" : ` ¶${c.chunk_id}`}</button>`,
    )
    .join("\n  ");
  const abstention = answer.abstained ? " abstained" : "";
  const detail = controller.citationDetail
    ? `<aside class="document-detail" data-doi="${escapeHtml(controller.citationDetail.doi)}">
  <h4>${escapeHtml(controller.citationDetail.title)}</h4>
  <p>${escapeHtml(snippet(controller.citationDetail.abstract, 300))}</p>
  <p class="meta">${escapeHtml(controller.citationDetail.doi)}${controller.citationDetail.year ? ` · ${controller.citationDetail.year}` : ""}</p>
</aside>`
    : "";
  return `<section class="chat">
<p class="question">${escapeHtml(controller.question)}</p>
<div class="answer${abstention}">
  <span class="route-badge route-${escapeHtml(answer.route)}">${escapeHtml(answer.route)}</span>
  <p class="answer-text">${escapeHtml(answer.text)}</p>
  ${answer.abstained ? `<p class="abstention-note">The system declined to answer from the available sources.</p>` : ""}
  <div class="citations">${chips}</div>
  ${renderTranscript(answer, controller.transcriptOpen)}
</div>
${detail}
</section>`;
}
