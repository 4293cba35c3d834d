import type { ApiClient } from "./api.js";
import { clusterColor, escapeHtml, snippet } from "./format.js";
import type {
  DecisionsResponse,
  DocumentDetail,
  PruneDecision,
  ReviewState,
  Verdict,
} from "./types.js";

/**
 * Review triage state machine. Every cluster needs a keep/remove verdict
 * before submission unlocks; counts shown afterwards come verbatim from
 * the server response.
 */
export class ReviewController {
  state: ReviewState | null = null;
  centroids = new Map<string, DocumentDetail>();
  verdicts = new Map<number, Verdict>();
  anchors = new Map<number, string[]>();
  result: DecisionsResponse | null = null;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    this.state = await this.api.reviewClusters();
    this.centroids.clear();
    for (const cluster of this.state.clusters) {
      this.centroids.set(cluster.centroid_doi, await this.api.document(cluster.centroid_doi));
    }
    this.verdicts.clear();
    this.anchors.clear();
    this.result = null;
    this.error = null;
  }

  setVerdict(clusterId: number, verdict: Verdict): void {
    this.verdicts.set(clusterId, verdict);
  }

  addAnchor(clusterId: number, doi: string): void {
    const existing = this.anchors.get(clusterId) ?? [];
    if (!existing.includes(doi)) this.anchors.set(clusterId, [...existing, doi]);
  }

  /** Submission unlocks only once every cluster has a verdict. */
  isComplete(): boolean {
    if (!this.state) return false;
    return this.state.clusters.every((c) => this.verdicts.has(c.cluster_id));
  }

  decisions(): PruneDecision[] {
    if (!this.state) return [];
    return this.state.clusters.map((c) => ({
      cluster_id: c.cluster_id,
      verdict: this.verdicts.get(c.cluster_id) as Verdict,
      decided_by: "sme",
      anchor_dois_added: this.anchors.get(c.cluster_id) ?? [],
    }));
  }

  async submit(): Promise<DecisionsResponse> {
    if (!this.isComplete()) {
      throw new Error("every cluster needs a verdict before submitting");
    }
    try {
      this.result = await this.api.submitDecisions(this.decisions());
      this.error = null;
      return this.result;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }
}

const PLOT_SIZE = 420;

export function renderScatter(state: ReviewState): string {
  const xs = state.points.map((p) => p[1]);
  const ys = state.points.map((p) => p[2]);
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 1);
  const scale = (v: number, lo: number, hi: number) =>
    hi === lo ? PLOT_SIZE / 2 : 12 + ((v - lo) / (hi - lo)) * (PLOT_SIZE - 24);

  const clusterOf = new Map<string, number>();
  for (const cluster of state.clusters) {
    for (const doi of cluster.member_dois) clusterOf.set(doi, cluster.cluster_id);
  }
  const circles = state.points
    .map(([doi, x, y]) => {
      const cid = clusterOf.get(doi) ?? 0;
      return `<circle cx="${scale(x, minX, maxX).toFixed(1)}" cy="${scale(y, minY, maxY).toFixed(1)}" r="4" fill="${clusterColor(cid)}" data-doi="${escapeHtml(doi)}" data-cluster="${cid}"><title>${escapeHtml(doi)}</title></circle>`;
    })
    .join("\n    ");
  return `<svg class="scatter" viewBox="0 0 ${PLOT_SIZE} ${PLOT_SIZE}" role="img" aria-label="document map">
    ${circles}
  </svg>`;
}

export function renderReview(controller: ReviewController): string {
  const state = controller.state;
  if (!state) {
    return `<section class="review"><p class="empty">No review session. Run the prune stage first.</p></section>`;
  }
  const cards = state.clusters
    .map((cluster) => {
      const detail = controller.centroids.get(cluster.centroid_doi);
      const verdict = controller.verdicts.get(cluster.cluster_id);
      const anchors = controller.anchors.get(cluster.cluster_id) ?? [];
      const title = detail ? escapeHtml(detail.title) : escapeHtml(cluster.centroid_doi);
      const abstract = detail ? escapeHtml(snippet(detail.abstract)) : "";
      return `<article class="cluster-card" data-cluster="${cluster.cluster_id}" style="border-color: ${clusterColor(cluster.cluster_id)}">
  <header>
    <span class="swatch" style="background: ${clusterColor(cluster.cluster_id)}"></span>
    <h3>Cluster ${cluster.cluster_id}</h3>
    <span class="member-count">${cluster.member_dois.length} documents</span>
  </header>
  <p class="centroid-title">${title}</p>
  <p class="centroid-abstract">${abstract}</p>
  <p class="centroid-doi">centroid: ${escapeHtml(cluster.centroid_doi)}</p>
  <div class="verdict" role="radiogroup">
    <button class="keep${verdict === "keep" ? " selected" : ""}" data-action="keep" data-cluster="${cluster.cluster_id}">keep</button>
    <button class="remove${verdict === "remove" ? " selected" : ""}" data-action="remove" data-cluster="${cluster.cluster_id}">remove</button>
  </div>
  <div class="anchors">
    <input type="text" placeholder="anchor DOI" data-anchor-input="${cluster.cluster_id}" />
    <button data-action="add-anchor" data-cluster="${cluster.cluster_id}">add anchor</button>
    ${anchors.map((a) => `<span class="anchor-chip">${escapeHtml(a)}</span>`).join("")}
  </div>
</article>`;
    })
    .join("\n");

  const submitDisabled = controller.isComplete() ? "" : " disabled";
  const result = controller.result
    ? `<p class="submit-result">Corpus: <strong data-field="corpus_count">${controller.result.corpus_count}</strong> documents (was <span data-field="corpus_count_before">${controller.result.corpus_count_before}</span>, removed <span data-field="removed">${controller.result.removed}</span>)</p>`
    : "";
  const error = controller.error
    ? `<p class="submit-error">${escapeHtml(controller.error)}</p>`
    : "";

  return `<section class="review" data-status="${escapeHtml(state.status)}">
${renderScatter(state)}
<div class="clusters">
${cards}
</div>
<footer>
  <button class="submit" data-action="submit"${submitDisabled}>Submit decisions</button>
  ${result}${error}
</footer>
</section>`;
}
