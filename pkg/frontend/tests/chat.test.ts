import { beforeEach, describe, expect, it } from "vitest";

import { ChatController, renderAnswer } from "../src/chat.js";
import type { Answer, DocumentDetail } from "../src/types.js";
import { RecordedApi, fixture } from "./helpers.js";

const titleAnswer = fixture<Answer>("chat_title.json");
const abstention = fixture<Answer>("chat_abstention.json");
const detailFixture = fixture<DocumentDetail>("document_detail.json");

describe("ChatController", () => {
  let api: RecordedApi;
  let controller: ChatController;

  beforeEach(() => {
    api = new RecordedApi();
    controller = new ChatController(api);
  });

  it("rejects empty questions", async () => {
    await expect(controller.ask("  ")).rejects.toThrow(/non-empty/);
  });

  it("renders answer text, route badge, and citation chips", async () => {
    await controller.ask("What is the title of 10.5000/core.00?");
    const html = renderAnswer(controller);
    expect(html).toContain(titleAnswer.text.replace(/\[/, "[")); // exact answer text
    expect(html).toContain(`route-${titleAnswer.route}`);
    for (const citation of titleAnswer.citations) {
      expect(html).toContain(`data-doi="${citation.doi}"`);
      expect(html).toContain(`¶${citation.chunk_id}`); // paragraph id on the chip
    }
    expect(html).not.toContain("abstained");
    expect(html).toMatchSnapshot();
  });

  it("citation chips resolve through document detail", async () => {
    await controller.ask("What is the title of 10.5000/core.00?");
    const doi = titleAnswer.citations[0].doi;
    await controller.openCitation(doi);
    expect(api.documentRequests).toContain(doi);
    const html = renderAnswer(controller);
    expect(html).toContain(`data-doi="${detailFixture.doi}"`);
    expect(html).toContain(detailFixture.title);
  });

  it("abstentions render the distinct state with zero chips", async () => {
    await controller.ask("What is the title of 10.9/unknown?");
    expect(controller.answer?.abstained).toBe(true);
    const html = renderAnswer(controller);
    expect(html).toContain('class="answer abstained"');
    expect(html).toContain("declined to answer");
    expect(html).not.toContain("citation-chip");
    expect(html).toMatchSnapshot();
  });

  it("transcript is collapsed by default and toggles to show the tool call", async () => {
    await controller.ask("What is the title of 10.5000/core.00?");
    let html = renderAnswer(controller);
    expect(html).toContain("<details class=\"transcript\">");
    expect(html).not.toContain("vector_search(");

    controller.toggleTranscript();
    html = renderAnswer(controller);
    expect(html).toContain("<details class=\"transcript\" open>");
    const steps = titleAnswer.transcript.steps ?? [];
    expect(steps.length).toBeGreaterThan(0);
    expect(html).toContain(`${steps[0].action}(`);
  });

  it("renders the prompt state before any question", () => {
    expect(renderAnswer(controller)).toContain("Ask a question");
  });
});
