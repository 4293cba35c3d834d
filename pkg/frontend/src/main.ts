import { HttpApiClient } from "./api.js";
import { ChatController, renderAnswer } from "./chat.js";
import { ReviewController, renderReview } from "./review.js";

const api = new HttpApiClient("");
const review = new ReviewController(api);
const chat = new ChatController(api);

const reviewRoot = document.getElementById("review-root")!;
const chatRoot = document.getElementById("chat-root")!;
const tabs = document.querySelectorAll<HTMLButtonElement>("nav .tab");

function show(which: "review" | "chat") {
  document.getElementById("review-panel")!.hidden = which !== "review";
  document.getElementById("chat-panel")!.hidden = which !== "chat";
  tabs.forEach((tab) => tab.classList.toggle("active", tab.dataset.tab === which));
}

function paintReview() {
  reviewRoot.innerHTML = renderReview(review);
}

function paintChat() {
  chatRoot.innerHTML = renderAnswer(chat);
}

reviewRoot.addEventListener("click", async (event) => {
  const target = event.target as HTMLElement;
  const action = target.dataset.action;
  if (!action) return;
  const clusterId = Number(target.dataset.cluster);
  if (action === "keep" || action === "remove") {
    review.setVerdict(clusterId, action);
    paintReview();
  } else if (action === "add-anchor") {
    const input = reviewRoot.querySelector<HTMLInputElement>(
      `input[data-anchor-input="${clusterId}"]`,
    );
    if (input && input.value.trim()) {
      review.addAnchor(clusterId, input.value.trim());
      paintReview();
    }
  } else if (action === "submit") {
    try {
      await review.submit();
    } catch {
      // controller captured the error for rendering
    }
    paintReview();
  }
});

chatRoot.addEventListener("click", async (event) => {
  const target = event.target as HTMLElement;
  const action = target.dataset.action;
  if (action === "toggle-transcript") {
    event.preventDefault();
    chat.toggleTranscript();
    paintChat();
  } else if (action === "open-citation" && target.dataset.doi) {
    await chat.openCitation(target.dataset.doi);
    paintChat();
  }
});

document.getElementById("chat-form")!.addEventListener("submit", async (event) => {
  event.preventDefault();
  const input = document.getElementById("chat-input") as HTMLInputElement;
  if (!input.value.trim()) return;
  try {
    await chat.ask(input.value);
  } catch (err) {
    chat.error = err instanceof Error ? err.message : String(err);
  }
  paintChat();
});

tabs.forEach((tab) =>
  tab.addEventListener("click", () => show(tab.dataset.tab as "review" | "chat")),
);

async function init() {
  try {
    await review.load();
  } catch {
    review.state = null; // no active review session
  }
  paintReview();
  paintChat();
  show("chat");
}

void init();
