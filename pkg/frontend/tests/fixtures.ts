import type { KgDoc, MatrixRow, PaperDetail } from "../src/types.js";

/**
 * Seven-paper inheritance tree, captured verbatim from the service for
 * N=1, M=4, T=3: one root (paper 1) with branches 1<-2<-4 and 1<-3<-7
 * plus the leaf children 5 and 6. Arrows run citing -> cited.
 */
const FIG1_INHERITANCE: KgDoc = {
  kind: "inheritance",
  params: { N: 1, M: 4, T: 3, topic: "hotpot" },
  nodes: [
    {
      id: 1,
      label: "HotpotQA saturation leakage",
      title: {
        keywords: ["leakage", "saturation", "decomposition", "retrieval", "confirm"],
        issue_resolved: "We confirm saturation and decomposition and retrieval.",
        issue_finding: "Open problem remains leakage.",
      },
    },
    {
      id: 2,
      label: "HotpotQA subquestions hops",
      title: {
        keywords: ["hops", "subquestions", "attention", "decomposition", "confirm"],
        issue_resolved: "We confirm subquestions and decomposition and attention.",
        issue_finding: "Open problem remains hops.",
      },
    },
    {
      id: 3,
      label: "HotpotQA ranker corpora",
      title: {
        keywords: ["corpora", "ranker", "memory", "retrieval", "confirm"],
        issue_resolved: "We confirm ranker and retrieval and memory.",
        issue_finding: "Open problem remains corpora.",
      },
    },
    {
      id: 4,
      label: "HotpotQA sparsity heads",
      title: {
        keywords: ["heads", "sparsity", "attention", "confirm", "hotpotqa"],
        issue_resolved: "We confirm sparsity and attention.",
        issue_finding: "Open problem remains heads.",
      },
    },
    {
      id: 5,
      label: "HotpotQA curricula distractors",
      title: {
        keywords: ["curricula", "distractors", "confirm", "hotpotqa", "open"],
        issue_resolved: "We confirm curricula.",
        issue_finding: "Open problem remains distractors.",
      },
    },
    {
      id: 6,
      label: "HotpotQA calibration abstention",
      title: {
        keywords: ["abstention", "calibration", "confirm", "hotpotqa", "open"],
        issue_resolved: "We confirm calibration.",
        issue_finding: "Open problem remains abstention.",
      },
    },
    {
      id: 7,
      label: "HotpotQA gating buffers",
      title: {
        keywords: ["buffers", "gating", "memory", "confirm", "hotpotqa"],
        issue_resolved: "We confirm gating and memory.",
        issue_finding: "Open problem remains buffers.",
      },
    },
  ],
  edges: [
    { from: 2, to: 1, label: "decomposition, confirm, hotpotqa", title: "cites", arrows: "to" },
    { from: 3, to: 1, label: "retrieval, confirm, hotpotqa", title: "cites", arrows: "to" },
    { from: 4, to: 2, label: "attention, confirm, hotpotqa", title: "cites", arrows: "to" },
    { from: 5, to: 1, label: "confirm, hotpotqa", title: "cites", arrows: "to" },
    { from: 6, to: 1, label: "confirm, hotpotqa", title: "cites", arrows: "to" },
    { from: 7, to: 3, label: "memory, confirm, hotpotqa", title: "cites", arrows: "to" },
  ],
};

/** Relevance view over the same papers; arrows run finding -> resolved. */
const FIG1_RELEVANCE: KgDoc = {
  kind: "relevance",
  params: { N: 3, M: 3, T: 3, topic: "hotpot" },
  nodes: FIG1_INHERITANCE.nodes,
  edges: [
    { from: 5, to: 1, label: "confirm, hotpotqa", title: "0.0000", arrows: "to" },
    { from: 5, to: 2, label: "confirm, hotpotqa", title: "0.0000", arrows: "to" },
    { from: 5, to: 6, label: "confirm, hotpotqa, open", title: "0.7464", arrows: "to" },
    { from: 6, to: 3, label: "confirm, hotpotqa", title: "0.0000", arrows: "to" },
    { from: 6, to: 4, label: "confirm, hotpotqa, open", title: "0.0000", arrows: "to" },
    { from: 6, to: 7, label: "confirm, hotpotqa, open", title: "0.0000", arrows: "to" },
  ],
};

export function fig1Inheritance(): KgDoc {
  return structuredClone(FIG1_INHERITANCE);
}

export function fig1Relevance(): KgDoc {
  return structuredClone(FIG1_RELEVANCE);
}

export function emptyKg(kind: "inheritance" | "relevance" = "inheritance"): KgDoc {
  return { kind, params: { N: 1, M: 1, T: 1, topic: "hotpot" }, nodes: [], edges: [] };
}

export function paper1Detail(): PaperDetail {
  return structuredClone({
    title: "HotpotQA saturation leakage",
    keywords: ["leakage", "saturation", "decomposition", "retrieval", "confirm"],
    resolved_text: "We confirm saturation and decomposition and retrieval.",
    finding_text: "Open problem remains leakage.",
    cited_by_count: 4,
  });
}

export function row(paperId: number, scores: Record<string, number>): MatrixRow {
  return { paper_id: paperId, scores };
}
