import { hierarchicalLayout, type PlacedNode } from "./layout.js";
import type { KgDoc, KgNode, MatrixRow, PaperDetail } from "./types.js";

export interface ViewHandlers {
  onHover(id: number | null): void;
  onSelect(id: number): void;
  onReroot(id: number): void;
  onCloseDetail(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 920;
const ROW_HEIGHT = 120;
const MARGIN = 50;
const NODE_RADIUS = 14;
const TRUNCATE_AT = 120;

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

function truncate(text: string, limit: number): string {
  return text.length > limit ? text.slice(0, limit - 1) + "…" : text;
}

/**
 * Renders the graph stage and its satellite panels (tooltip, detail,
 * banner, empty state) into plain DOM. All numbers come from the layout
 * module so this stays testable without a real rendering engine.
 */
export class GraphView {
  private readonly stage: HTMLElement;
  private readonly svg: SVGSVGElement;
  private readonly tooltip: HTMLElement;
  private readonly empty: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly bannerText: HTMLElement;
  private readonly detail: HTMLElement;
  private nodeEls = new Map<number, SVGGElement>();

  constructor(
    root: HTMLElement,
    private readonly handlers: ViewHandlers,
  ) {
    this.banner = document.createElement("div");
    this.banner.className = "banner";
    this.banner.setAttribute("role", "alert");
    this.banner.hidden = true;
    this.bannerText = document.createElement("span");
    const dismiss = document.createElement("button");
    dismiss.type = "button";
    dismiss.className = "banner-dismiss";
    dismiss.textContent = "dismiss";
    dismiss.addEventListener("click", () => {
      this.banner.hidden = true;
    });
    this.banner.append(this.bannerText, dismiss);

    this.stage = document.createElement("div");
    this.stage.className = "stage";
    this.svg = svgEl("svg");
    this.svg.setAttribute("class", "graph");
    this.tooltip = document.createElement("div");
    this.tooltip.className = "tooltip";
    this.tooltip.hidden = true;
    this.empty = document.createElement("div");
    this.empty.className = "empty";
    this.empty.hidden = true;
    this.empty.textContent = "no trees for these parameters";
    this.stage.append(this.svg, this.tooltip, this.empty);

    this.detail = document.createElement("aside");
    this.detail.className = "detail";
    this.detail.hidden = true;

    root.append(this.banner, this.stage, this.detail);
  }

  renderGraph(doc: KgDoc): void {
    this.empty.hidden = true;
    this.hideTooltip();
    this.svg.replaceChildren();
    this.nodeEls = new Map();

    const placed = hierarchicalLayout(doc, {
      width: WIDTH,
      rowHeight: ROW_HEIGHT,
      margin: MARGIN,
    });
    let maxDepth = 0;
    for (const p of placed.values()) maxDepth = Math.max(maxDepth, p.depth);
    const height = 2 * MARGIN + maxDepth * ROW_HEIGHT + NODE_RADIUS;
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${height}`);

    const defs = svgEl("defs");
    const marker = svgEl("marker");
    marker.setAttribute("id", "arrow");
    marker.setAttribute("viewBox", "0 0 10 10");
    marker.setAttribute("refX", "9");
    marker.setAttribute("refY", "5");
    marker.setAttribute("markerWidth", "7");
    marker.setAttribute("markerHeight", "7");
    marker.setAttribute("orient", "auto-start-reverse");
    const tip = svgEl("path");
    tip.setAttribute("d", "M 0 0 L 10 5 L 0 10 z");
    marker.append(tip);
    defs.append(marker);
    this.svg.append(defs);

    const edgeLayer = svgEl("g");
    for (const edge of doc.edges) {
      const a = placed.get(edge.from);
      const b = placed.get(edge.to);
      if (!a || !b) continue;
      edgeLayer.append(this.edgeGroup(a, b, edge.label, edge.title));
    }
    this.svg.append(edgeLayer);

    const nodeLayer = svgEl("g");
    for (const node of doc.nodes) {
      const pos = placed.get(node.id);
      if (!pos) continue;
      const group = this.nodeGroup(node, pos);
      this.nodeEls.set(node.id, group);
      nodeLayer.append(group);
    }
    this.svg.append(nodeLayer);
  }

  renderEmpty(): void {
    this.hideTooltip();
    this.svg.replaceChildren();
    this.nodeEls = new Map();
    this.empty.hidden = false;
  }

  showBanner(message: string): void {
    this.bannerText.textContent = message;
    this.banner.hidden = false;
  }

  showTooltip(node: KgNode): void {
    this.tooltip.replaceChildren(tooltipContent(node));
    const el = this.nodeEls.get(node.id);
    const x = el ? Number(el.dataset.x) : 0;
    const y = el ? Number(el.dataset.y) : 0;
    // Percent coordinates track the responsive svg without measuring it.
    this.tooltip.style.left = `${(100 * (x + NODE_RADIUS)) / WIDTH}%`;
    this.tooltip.style.top = `${y}px`;
    this.tooltip.hidden = false;
  }

  hideTooltip(): void {
    this.tooltip.hidden = true;
  }

  showDetail(id: number, detail: PaperDetail, row: MatrixRow): void {
    this.detail.replaceChildren(...detailContent(id, detail, row, this.handlers));
    this.detail.hidden = false;
  }

  closeDetail(): void {
    this.detail.hidden = true;
    this.detail.replaceChildren();
  }

  setHighlight(ids: Set<number>): void {
    for (const [id, el] of this.nodeEls) {
      el.classList.toggle("highlight", ids.has(id));
    }
  }

  private edgeGroup(a: PlacedNode, b: PlacedNode, label: string, title: string): SVGGElement {
    const group = svgEl("g");
    group.setAttribute("class", "edge");
    // Stop the line at the circle border so the arrowhead stays visible.
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.hypot(dx, dy) || 1;
    const pad = NODE_RADIUS + 2;
    const x1 = a.x + (dx / len) * pad;
    const y1 = a.y + (dy / len) * pad;
    const x2 = b.x - (dx / len) * pad;
    const y2 = b.y - (dy / len) * pad;

    const line = svgEl("line");
    line.setAttribute("x1", String(x1));
    line.setAttribute("y1", String(y1));
    line.setAttribute("x2", String(x2));
    line.setAttribute("y2", String(y2));
    line.setAttribute("marker-end", "url(#arrow)");
    const caption = svgEl("title");
    caption.textContent = title;
    line.append(caption);
    group.append(line);

    const text = svgEl("text");
    text.setAttribute("class", "edge-label");
    text.setAttribute("x", String((x1 + x2) / 2));
    text.setAttribute("y", String((y1 + y2) / 2 - 4));
    text.textContent = label;
    group.append(text);
    return group;
  }

  private nodeGroup(node: KgNode, pos: PlacedNode): SVGGElement {
    const group = svgEl("g");
    group.setAttribute("class", "node");
    group.setAttribute("transform", `translate(${pos.x}, ${pos.y})`);
    group.dataset.id = String(node.id);
    group.dataset.x = String(pos.x);
    group.dataset.y = String(pos.y);

    const circle = svgEl("circle");
    circle.setAttribute("r", String(NODE_RADIUS));
    group.append(circle);

    const label = svgEl("text");
    label.setAttribute("class", "node-label");
    label.setAttribute("y", String(NODE_RADIUS + 14));
    label.setAttribute("text-anchor", "middle");
    label.textContent = node.label;
    group.append(label);

    group.addEventListener("mouseenter", () => {
      this.handlers.onHover(node.id);
      this.showTooltip(node);
    });
    group.addEventListener("mouseleave", () => {
      this.handlers.onHover(null);
      this.hideTooltip();
    });
    group.addEventListener("click", () => this.handlers.onSelect(node.id));
    return group;
  }
}

function field(term: string, name: string, value: string): [HTMLElement, HTMLElement] {
  const dt = document.createElement("dt");
  dt.textContent = term;
  const dd = document.createElement("dd");
  dd.dataset.field = name;
  dd.textContent = value;
  return [dt, dd];
}

function tooltipContent(node: KgNode): HTMLElement {
  const box = document.createElement("div");
  const head = document.createElement("div");
  head.className = "tooltip-head";
  head.textContent = node.label;
  const list = document.createElement("dl");
  list.append(
    ...field("keywords", "keywords", node.title.keywords.join(", ")),
    ...field("issue resolved", "issue_resolved", truncate(node.title.issue_resolved, TRUNCATE_AT)),
    ...field("issue finding", "issue_finding", truncate(node.title.issue_finding, TRUNCATE_AT)),
  );
  box.append(head, list);
  return box;
}

function detailContent(
  id: number,
  detail: PaperDetail,
  row: MatrixRow,
  handlers: ViewHandlers,
): HTMLElement[] {
  const head = document.createElement("h2");
  head.textContent = detail.title;

  const meta = document.createElement("p");
  meta.className = "detail-meta";
  meta.textContent = `cited by ${detail.cited_by_count} · ${detail.keywords.join(", ")}`;

  const resolved = section(
    "issue resolved",
    detail.resolved_text || "no issue-resolved text",
    "resolved_text",
  );
  const finding = section(
    "issue finding",
    detail.finding_text || "no issue-finding text",
    "finding_text",
  );

  const chainsHead = document.createElement("h3");
  chainsHead.textContent = "outgoing chains";
  const chains = document.createElement("ul");
  chains.className = "chains";
  const entries = Object.entries(row.scores)
    .map(([target, score]) => [Number(target), score] as const)
    .sort((a, b) => b[1] - a[1] || a[0] - b[0]);
  for (const [target, score] of entries) {
    const item = document.createElement("li");
    item.dataset.paper = String(target);
    item.textContent = `paper ${target}: ${score.toFixed(4)}`;
    chains.append(item);
  }
  if (entries.length === 0) {
    const none = document.createElement("li");
    none.className = "chains-none";
    none.textContent = "no valid chains";
    chains.append(none);
  }

  const reroot = document.createElement("button");
  reroot.type = "button";
  reroot.className = "reroot";
  reroot.textContent = "re-root here";
  reroot.addEventListener("click", () => handlers.onReroot(id));

  const close = document.createElement("button");
  close.type = "button";
  close.className = "detail-close";
  close.textContent = "close";
  close.addEventListener("click", () => handlers.onCloseDetail());

  return [close, head, meta, resolved, finding, chainsHead, chains, reroot];
}

function section(title: string, text: string, name: string): HTMLElement {
  const wrap = document.createElement("section");
  const head = document.createElement("h3");
  head.textContent = title;
  const body = document.createElement("p");
  body.dataset.field = name;
  body.textContent = text;
  wrap.append(head, body);
  return wrap;
}
