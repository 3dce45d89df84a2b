// Layered graph layout: the five layers become five fixed columns, nodes
// stack vertically within their column, edges connect column to column.

import type { GraphLayer, GraphSnapshot } from "./types.js";

export const LAYER_COLUMNS: GraphLayer[] = [
  "Category",
  "Need",
  "Obstacle",
  "ComB",
  "BcioClass",
];

export interface PlacedNode {
  node_id: string;
  label: string;
  layer: GraphLayer;
  column: number;
  row: number;
  x: number;
  y: number;
}

export interface PlacedEdge {
  src: string;
  dst: string;
  relation: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphLayout {
  width: number;
  height: number;
  nodes: PlacedNode[];
  edges: PlacedEdge[];
}

const COLUMN_WIDTH = 220;
const ROW_HEIGHT = 48;
const PADDING = 40;

export function layoutGraph(snapshot: GraphSnapshot): GraphLayout {
  const byLayer = new Map<GraphLayer, typeof snapshot.nodes>();
  for (const layer of LAYER_COLUMNS) byLayer.set(layer, []);
  for (const node of snapshot.nodes) {
    const bucket = byLayer.get(node.layer);
    if (bucket) bucket.push(node);
  }

  const placed = new Map<string, PlacedNode>();
  let maxRows = 0;
  LAYER_COLUMNS.forEach((layer, column) => {
    const nodes = [...(byLayer.get(layer) ?? [])].sort((a, b) =>
      a.node_id.localeCompare(b.node_id),
    );
    maxRows = Math.max(maxRows, nodes.length);
    nodes.forEach((node, row) => {
      placed.set(node.node_id, {
        node_id: node.node_id,
        label: node.label,
        layer,
        column,
        row,
        x: PADDING + column * COLUMN_WIDTH,
        y: PADDING + row * ROW_HEIGHT,
      });
    });
  });

  const edges: PlacedEdge[] = [];
  for (const edge of snapshot.edges) {
    const src = placed.get(edge.src);
    const dst = placed.get(edge.dst);
    if (!src || !dst) continue; // endpoint filtered out of the snapshot
    edges.push({
      src: edge.src,
      dst: edge.dst,
      relation: edge.relation,
      x1: src.x,
      y1: src.y,
      x2: dst.x,
      y2: dst.y,
    });
  }

  return {
    width: PADDING * 2 + (LAYER_COLUMNS.length - 1) * COLUMN_WIDTH,
    height: PADDING * 2 + Math.max(1, maxRows - 1) * ROW_HEIGHT,
    nodes: [...placed.values()],
    edges,
  };
}
