export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function snippet(text: string, limit = 160): string {
  if (text.length <= limit) return text;
  return `${text.slice(0, limit).trimEnd()}…`;
}

/** Stable per-cluster display color; presentation only. */
export function clusterColor(clusterId: number): string {
  return `hsl(${(clusterId * 137) % 360}, 62%, 46%)`;
}
