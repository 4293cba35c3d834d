import { describe, expect, it } from "vitest";

import { ApiError, HttpApiClient } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function fetchStub(status: number, body: unknown) {
  const calls: Call[] = [];
  const impl = (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return Promise.resolve({
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: () => Promise.resolve(body),
    } as Response);
  };
  return { calls, impl };
}

describe("HttpApiClient", () => {
  it("gets health from the expected path", async () => {
    const { calls, impl } = fetchStub(200, { status: "ok" });
    const api = new HttpApiClient("http://host:1", impl);
    expect(await api.health()).toEqual({ status: "ok" });
    expect(calls[0].url).toBe("http://host:1/health");
  });

  it("posts chat questions as JSON", async () => {
    const { calls, impl } = fetchStub(200, { text: "x" });
    const api = new HttpApiClient("", impl);
    await api.chat("What is the title of 10.5000/core.00?");
    expect(calls[0].url).toBe("/chat");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      question: "What is the title of 10.5000/core.00?",
    });
  });

  it("posts the decisions list unwrapped", async () => {
    const { calls, impl } = fetchStub(200, { status: "applied" });
    const api = new HttpApiClient("", impl);
    const decisions = [
      { cluster_id: 0, verdict: "keep" as const, decided_by: "sme", anchor_dois_added: [] },
    ];
    await api.submitDecisions(decisions);
    expect(JSON.parse(String(calls[0].init?.body))).toEqual(decisions);
  });

  it("encodes DOI path segments but keeps slashes", async () => {
    const { calls, impl } = fetchStub(200, { doi: "10.5000/core.00" });
    const api = new HttpApiClient("", impl);
    await api.document("10.5000/core a.00");
    expect(calls[0].url).toBe("/documents/10.5000/core%20a.00");
  });

  it("raises ApiError with the server detail on failure", async () => {
    const { impl } = fetchStub(422, { detail: "question must be non-empty" });
    const api = new HttpApiClient("", impl);
    await expect(api.chat("x")).rejects.toThrow(ApiError);
    await expect(api.chat("x")).rejects.toThrow(/question must be non-empty/);
  });
});
