// Wire types for the needlens HTTP API. These mirror the JSON the service
// emits; the console renders them verbatim and never recomputes analytics.

export type Wave = "M3" | "M6" | "M12" | "M24";

export const WAVES: Wave[] = ["M3", "M6", "M12", "M24"];

export type RunState = "idle" | "running" | "failed";

export interface RunStatus {
  state: RunState;
  detail: string | null;
}

export interface Health {
  status: string;
  run: RunStatus;
}

export interface TopTerm {
  token: string;
  weight: number;
}

export interface TopicSummary {
  topic_id: number;
  top_terms: TopTerm[];
  need_label: string | null;
  labeled: boolean;
}

export interface TopicDocument {
  doc_id: string;
  weight: number;
  wave: string;
  text: string;
}

export interface LexiconEntry {
  keywords: string[];
  topic_ids: number[];
  moa_concept: string | null;
  kind: "need" | "obstacle";
  created_at: string;
}

export interface Lexicon {
  version: string;
  entries: Record<string, LexiconEntry>;
}

export type GraphLayer = "Category" | "Need" | "Obstacle" | "ComB" | "BcioClass";

export interface GraphNode {
  node_id: string;
  layer: GraphLayer;
  label: string;
  first_seen: string;
}

export interface GraphEdge {
  src: string;
  dst: string;
  relation: string;
  first_seen: string;
  provenance: string[];
}

export interface GraphSnapshot {
  version: string;
  as_of: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface PrevalenceRow {
  need: string;
  wave: string;
  p: number;
}

export interface PrevalenceResponse {
  prevalence: PrevalenceRow[];
  waves: string[];
  unmapped: Record<string, number>;
}

export interface StratumRow {
  need: string;
  dim: string;
  subgroup: string;
  wave: string;
  p: number;
}

export interface Disparity {
  need: string;
  dimension: string;
  wave: string;
  higher: string;
  lower: string;
  ratio: number;
}

export interface StrataResponse {
  strata: StratumRow[];
  disparities: Disparity[];
}

export interface SentimentRow {
  wave: string;
  mean_valence: number;
  class_counts: Record<string, number>;
}

export interface SentimentResponse {
  sentiment: SentimentRow[];
}

export interface LabelResult {
  topic_id: number;
  need_label: string;
  reextract: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  state?: unknown;
}
