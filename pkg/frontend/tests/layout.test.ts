import { describe, expect, it } from "vitest";
import { hierarchicalLayout, parentChild } from "../src/layout.js";
import type { KgDoc } from "../src/types.js";
import { emptyKg, fig1Inheritance, fig1Relevance } from "./fixtures.js";

const OPTS = { width: 920, rowHeight: 120, margin: 50 };

function depths(doc: KgDoc): Map<number, number> {
  const placed = hierarchicalLayout(doc, OPTS);
  return new Map([...placed.values()].map((p) => [p.id, p.depth]));
}

describe("parentChild", () => {
  it("reads inheritance arrows as citing -> cited", () => {
    const edge = fig1Inheritance().edges[0]!;
    expect(parentChild(edge, "inheritance")).toEqual({ parent: 1, child: 2 });
  });

  it("reads relevance arrows as finding -> resolved, parent first", () => {
    const edge = fig1Relevance().edges[0]!;
    expect(parentChild(edge, "relevance")).toEqual({ parent: 5, child: 1 });
  });
});

describe("hierarchicalLayout", () => {
  it("places every node exactly once", () => {
    const doc = fig1Inheritance();
    const placed = hierarchicalLayout(doc, OPTS);
    expect([...placed.keys()].sort((a, b) => a - b)).toEqual([1, 2, 3, 4, 5, 6, 7]);
  });

  it("puts the root on the first row and children one row deeper", () => {
    const d = depths(fig1Inheritance());
    expect(d.get(1)).toBe(0);
    for (const child of [2, 3, 5, 6]) expect(d.get(child)).toBe(1);
    expect(d.get(4)).toBe(2);
    expect(d.get(7)).toBe(2);
    const placed = hierarchicalLayout(fig1Inheritance(), OPTS);
    expect(placed.get(1)?.y).toBe(OPTS.margin);
    expect(placed.get(2)?.y).toBe(OPTS.margin + OPTS.rowHeight);
  });

  it("follows the relevance parent direction", () => {
    const d = depths(fig1Relevance());
    // Node 5 is the only non-child, 6 sits under it, and 6's children
    // land on the third row.
    expect(d.get(5)).toBe(0);
    expect(d.get(1)).toBe(1);
    expect(d.get(2)).toBe(1);
    expect(d.get(6)).toBe(1);
    expect(d.get(3)).toBe(2);
    expect(d.get(4)).toBe(2);
    expect(d.get(7)).toBe(2);
  });

  it("centers a parent over its children", () => {
    const placed = hierarchicalLayout(fig1Inheritance(), OPTS);
    const kids = [2, 3, 5, 6].map((id) => placed.get(id)!.x);
    const mean = kids.reduce((a, b) => a + b, 0) / kids.length;
    expect(placed.get(1)?.x).toBeCloseTo(mean, 9);
    expect(placed.get(2)?.x).toBeCloseTo(placed.get(4)!.x, 9);
  });

  it("keeps every node inside the horizontal bounds", () => {
    for (const doc of [fig1Inheritance(), fig1Relevance()]) {
      for (const p of hierarchicalLayout(doc, OPTS).values()) {
        expect(p.x).toBeGreaterThanOrEqual(0);
        expect(p.x).toBeLessThanOrEqual(OPTS.width);
      }
    }
  });

  it("is deterministic for a given document", () => {
    const a = hierarchicalLayout(fig1Inheritance(), OPTS);
    const b = hierarchicalLayout(fig1Inheritance(), OPTS);
    expect([...a.entries()]).toEqual([...b.entries()]);
  });

  it("treats a node without edges as its own root", () => {
    const doc = emptyKg();
    doc.nodes = [
      { id: 9, label: "lone", title: { keywords: [], issue_resolved: "", issue_finding: "" } },
    ];
    const placed = hierarchicalLayout(doc, OPTS);
    expect(placed.get(9)?.depth).toBe(0);
  });

  it("still places all nodes when the input is cyclic", () => {
    const doc = fig1Inheritance();
    doc.edges = [
      { from: 1, to: 2, label: "", title: "", arrows: "to" },
      { from: 2, to: 1, label: "", title: "", arrows: "to" },
    ];
    const placed = hierarchicalLayout(doc, OPTS);
    expect(placed.size).toBe(7);
  });

  it("handles the empty graph", () => {
    expect(hierarchicalLayout(emptyKg(), OPTS).size).toBe(0);
  });
});
