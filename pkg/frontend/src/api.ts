import type {
  Answer,
  DecisionsResponse,
  DocumentDetail,
  PruneDecision,
  QueryResult,
  ReviewState,
  TopicSummary,
} from "./types.js";

/** Everything the console may ask the service; views never derive truth. */
export interface ApiClient {
  health(): Promise<{ status: string }>;
  reviewClusters(): Promise<ReviewState>;
  submitDecisions(decisions: PruneDecision[]): Promise<DecisionsResponse>;
  chat(question: string): Promise<Answer>;
  query(cypher: string): Promise<QueryResult>;
  topics(): Promise<{ topics: TopicSummary[] }>;
  document(doi: string): Promise<DocumentDetail>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export class HttpApiClient implements ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health() {
    return this.request<{ status: string }>("/health");
  }

  reviewClusters() {
    return this.request<ReviewState>("/review/clusters");
  }

  submitDecisions(decisions: PruneDecision[]) {
    return this.post<DecisionsResponse>("/review/decisions", decisions);
  }

  chat(question: string) {
    return this.post<Answer>("/chat", { question });
  }

  query(cypher: string) {
    return this.post<QueryResult>("/query", { cypher });
  }

  topics() {
    return this.request<{ topics: TopicSummary[] }>("/topics");
  }

  document(doi: string) {
    // DOIs contain slashes; the route accepts the raw path.
    const encoded = doi.split("/").map(encodeURIComponent).join("/");
    return this.request<DocumentDetail>(`/documents/${encoded}`);
  }
}
