import type { KgDoc, KgEdge, TreeKind } from "./types.js";

export interface PlacedNode {
  id: number;
  x: number;
  y: number;
  depth: number;
}

export interface LayoutOptions {
  width: number;
  rowHeight: number;
  margin: number;
}

/**
 * Which endpoint of an edge is the tree parent. Inheritance arrows run
 * citing paper -> cited paper, so the parent is the target; relevance
 * arrows run issue finding -> issue resolved, parent first.
 */
export function parentChild(edge: KgEdge, kind: TreeKind): { parent: number; child: number } {
  return kind === "inheritance"
    ? { parent: edge.to, child: edge.from }
    : { parent: edge.from, child: edge.to };
}

/**
 * Hierarchical top-down placement: roots on the first row, every child one
 * row below its parent, parents centered over their subtrees. Deterministic
 * in the document's node and edge order.
 */
export function hierarchicalLayout(doc: KgDoc, opts: LayoutOptions): Map<number, PlacedNode> {
  const known = new Set(doc.nodes.map((n) => n.id));
  const children = new Map<number, number[]>();
  const hasParent = new Set<number>();
  for (const edge of doc.edges) {
    const { parent, child } = parentChild(edge, doc.kind);
    if (!known.has(parent) || !known.has(child)) continue;
    if (hasParent.has(child) || parent === child) continue; // defensive: forests only
    hasParent.add(child);
    const siblings = children.get(parent);
    if (siblings) siblings.push(child);
    else children.set(parent, [child]);
  }

  // Leaves claim slots left to right; parents sit at the mean of their
  // children. Slot coordinates turn into pixels at the end.
  const placed = new Map<number, PlacedNode>();
  const slots = new Map<number, number>();
  let nextSlot = 0;
  const assign = (id: number, depth: number): number => {
    const existing = slots.get(id);
    if (existing !== undefined) return existing;
    slots.set(id, -1); // claimed before descending so cycles cannot loop
    placed.set(id, { id, x: 0, y: 0, depth });
    const kids = children.get(id) ?? [];
    let slot: number;
    let sum = 0;
    let counted = 0;
    for (const kid of kids) {
      if (slots.has(kid)) continue; // cycle backedge; already claimed
      sum += assign(kid, depth + 1);
      counted++;
    }
    slot = counted > 0 ? sum / counted : nextSlot++;
    slots.set(id, slot);
    return slot;
  };
  for (const node of doc.nodes) {
    if (!hasParent.has(node.id)) assign(node.id, 0);
  }
  for (const node of doc.nodes) {
    if (!placed.has(node.id)) assign(node.id, 0); // defensive: cyclic input
  }

  const usable = Math.max(opts.width - 2 * opts.margin, 1);
  const span = Math.max(nextSlot, 1);
  for (const node of placed.values()) {
    const slot = slots.get(node.id) ?? 0;
    node.x = opts.margin + ((slot + 0.5) / span) * usable;
    node.y = opts.margin + node.depth * opts.rowHeight;
  }
  return placed;
}
