import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ApiClient } from "../src/api.js";
import type {
  Answer,
  DecisionsResponse,
  DocumentDetail,
  PruneDecision,
  QueryResult,
  ReviewState,
  TopicSummary,
} from "../src/types.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

/** Replays the recorded server responses; never computes anything itself. */
export class RecordedApi implements ApiClient {
  submitted: PruneDecision[][] = [];
  documentRequests: string[] = [];

  health() {
    return Promise.resolve(fixture<{ status: string }>("health.json"));
  }

  reviewClusters() {
    return Promise.resolve(fixture<ReviewState>("review_clusters.json"));
  }

  submitDecisions(decisions: PruneDecision[]) {
    this.submitted.push(decisions);
    return Promise.resolve(fixture<DecisionsResponse>("review_decisions_response.json"));
  }

  chat(question: string) {
    if (question.includes("10.9/unknown")) {
      return Promise.resolve(fixture<Answer>("chat_abstention.json"));
    }
    return Promise.resolve(fixture<Answer>("chat_title.json"));
  }

  query(_cypher: string) {
    return Promise.reject(new Error("not recorded")) as Promise<QueryResult>;
  }

  topics() {
    return Promise.resolve(fixture<{ topics: TopicSummary[] }>("topics.json"));
  }

  document(doi: string) {
    this.documentRequests.push(doi);
    const centroids = fixture<Record<string, DocumentDetail>>("review_centroid_details.json");
    if (doi in centroids) return Promise.resolve(centroids[doi]);
    const detail = fixture<DocumentDetail>("document_detail.json");
    if (detail.doi === doi) return Promise.resolve(detail);
    return Promise.reject(new Error(`404: unknown document ${doi}`));
  }
}
