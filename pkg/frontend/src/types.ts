/** Payload shapes of the pipeline service API. */

export interface Citation {
  doi: string;
  chunk_id: number | null;
}

export interface ReactStep {
  thought: string;
  action: string;
  action_input: string;
  observation: string;
}

export interface Transcript {
  kind: "react" | "audit";
  steps?: ReactStep[];
  events?: Record<string, unknown>[];
}

export interface Answer {
  text: string;
  citations: Citation[];
  route: string;
  rationale: string;
  abstained: boolean;
  transcript: Transcript;
}

export interface ReviewCluster {
  cluster_id: number;
  member_dois: string[];
  centroid_doi: string;
  centroid_xy: [number, number];
}

export interface ReviewState {
  status: string;
  clusters: ReviewCluster[];
  points: [string, number, number][];
}

export type Verdict = "keep" | "remove";

export interface PruneDecision {
  cluster_id: number;
  verdict: Verdict;
  decided_by: string;
  anchor_dois_added: string[];
}

export interface DecisionsResponse {
  status: string;
  corpus_count: number;
  corpus_count_before: number;
  removed: number;
}

export interface DocumentDetail {
  doi: string;
  title: string;
  abstract: string;
  authors: { name: string; affiliation: string | null; country: string | null }[];
  year: number | null;
  publisher: string | null;
  is_core: boolean;
  topic_id: number | null;
}

export interface TopicSummary {
  topic_id: number;
  label: string;
  doc_count: number;
  percent: number;
  top_terms: [string, number][];
}

export interface QueryResult {
  rows: unknown[][];
  row_count: number;
  plan: string;
}
