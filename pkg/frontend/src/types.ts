/** Payload shapes of the graph service, mirrored from its JSON schema. */

export type TreeKind = "inheritance" | "relevance";

export interface TreeParams {
  N: number;
  M: number;
  T: number;
}

export interface NodeTitle {
  keywords: string[];
  issue_resolved: string;
  issue_finding: string;
}

export interface KgNode {
  id: number;
  label: string;
  title: NodeTitle;
}

export interface KgEdge {
  from: number;
  to: number;
  /** Co-occurring vocabulary between the two papers. */
  label: string;
  /** Chain value for relevance edges, "cites" for inheritance ones. */
  title: string;
  arrows: "to";
}

export interface KgDoc {
  kind: TreeKind;
  params: TreeParams & { topic: string };
  nodes: KgNode[];
  edges: KgEdge[];
}

export interface PaperDetail {
  title: string;
  keywords: string[];
  resolved_text: string;
  finding_text: string;
  cited_by_count: number;
}

export interface MatrixRow {
  paper_id: number;
  /** Valid outgoing chain scores keyed by target paper id. */
  scores: Record<string, number>;
}

export interface Meta {
  config_hash: string;
  built_at: string;
  topic: string;
  provider_tag: string;
  counts: Record<string, number>;
  params: { inheritance: TreeParams; relevance: TreeParams };
}

export interface ViewState {
  kind: TreeKind;
  params: TreeParams;
  selectedId: number | null;
  hoverId: number | null;
  readonly layout: "hierarchical-top-down";
}
