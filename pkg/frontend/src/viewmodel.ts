import { ApiClient, ApiError } from "./api.js";
import type { KgDoc, MatrixRow, PaperDetail, TreeKind, TreeParams, ViewState } from "./types.js";

export interface ExplorerEvents {
  onGraph(doc: KgDoc): void;
  onEmpty(): void;
  onError(message: string): void;
  onDetail(id: number, detail: PaperDetail, row: MatrixRow): void;
  onDetailClosed(): void;
  onHighlight(ids: Set<number>): void;
}

/** "3" -> 3; anything that is not a whole number >= 1 -> null. */
export function parseParam(raw: string): number | null {
  const text = raw.trim();
  if (!/^\d+$/.test(text)) return null;
  const value = Number(text);
  return value >= 1 ? value : null;
}

/** Strongest outgoing chains of a row: top m by score, ties to smaller id. */
export function topNeighbors(row: MatrixRow, m: number): Set<number> {
  const entries = Object.entries(row.scores).map(
    ([id, score]) => [Number(id), score] as const,
  );
  entries.sort((a, b) => b[1] - a[1] || a[0] - b[0]);
  return new Set(entries.slice(0, m).map(([id]) => id));
}

export const DEBOUNCE_MS = 300;

/**
 * Holds the view state and decides when the service is asked for a new
 * graph. Parameter edits are validated first (invalid input never reaches
 * the network) and debounced; at most one graph request is in flight, and
 * a newer request wins over any response still pending.
 */
export class ExplorerViewModel {
  readonly state: ViewState;
  private doc: KgDoc | null = null;
  private seq = 0;
  private controller: AbortController | null = null;
  private debounceHandle: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    private readonly events: ExplorerEvents,
    params: TreeParams = { N: 3, M: 3, T: 3 },
  ) {
    this.state = {
      kind: "inheritance",
      params,
      selectedId: null,
      hoverId: null,
      layout: "hierarchical-top-down",
    };
  }

  /** Currently loaded graph, if any. */
  graph(): KgDoc | null {
    return this.doc;
  }

  /** Resolves once the latest scheduled load has finished. */
  settled(): Promise<void> {
    return this.inflight;
  }

  refresh(): void {
    this.requestLoad(0);
  }

  setKind(kind: TreeKind): void {
    if (kind === this.state.kind) return;
    this.state.kind = kind;
    this.requestLoad(0);
  }

  setParam(name: keyof TreeParams, raw: string): void {
    const value = parseParam(raw);
    if (value === null) {
      this.events.onError(`${name} must be a whole number of at least 1`);
      return;
    }
    if (this.state.params[name] === value) return;
    this.state.params = { ...this.state.params, [name]: value };
    this.requestLoad(DEBOUNCE_MS);
  }

  hover(id: number | null): void {
    this.state.hoverId = id;
  }

  async select(id: number): Promise<void> {
    if (!this.doc || !this.doc.nodes.some((n) => n.id === id)) return;
    this.state.selectedId = id;
    try {
      const [detail, row] = await Promise.all([this.api.paper(id), this.api.matrixRow(id)]);
      if (this.state.selectedId !== id) return; // selection moved on meanwhile
      this.events.onDetail(id, detail, row);
    } catch (err) {
      this.events.onError(messageOf(err));
    }
  }

  closeDetail(): void {
    if (this.state.selectedId === null) return;
    this.state.selectedId = null;
    this.events.onDetailClosed();
  }

  /**
   * Re-root exploration at a paper: show the relevance view and highlight
   * its top-M outgoing chains. The filtering is client-side, from the
   * paper's matrix row.
   */
  async reroot(id: number): Promise<void> {
    let row: MatrixRow;
    try {
      row = await this.api.matrixRow(id);
    } catch (err) {
      this.events.onError(messageOf(err));
      return;
    }
    const ids = topNeighbors(row, this.state.params.M);
    if (this.state.kind !== "relevance") {
      this.state.kind = "relevance";
      this.requestLoad(0);
      await this.settled();
    }
    this.events.onHighlight(ids);
  }

  private requestLoad(delayMs: number): void {
    if (this.debounceHandle !== null) {
      clearTimeout(this.debounceHandle);
      this.debounceHandle = null;
    }
    if (delayMs <= 0) {
      this.load();
      return;
    }
    this.debounceHandle = setTimeout(() => {
      this.debounceHandle = null;
      this.load();
    }, delayMs);
  }

  private load(): Promise<void> {
    const run = this.doLoad();
    this.inflight = run;
    return run;
  }

  private async doLoad(): Promise<void> {
    const ticket = ++this.seq;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;

    let doc: KgDoc;
    try {
      doc = await this.api.kg(this.state.kind, this.state.params, controller.signal);
    } catch (err) {
      if (ticket !== this.seq) return; // superseded; stale failure is noise
      if (err instanceof Error && err.name === "AbortError") return;
      this.events.onError(messageOf(err));
      return;
    }
    if (ticket !== this.seq) return; // a newer request won

    this.doc = doc;
    if (this.state.selectedId !== null && !doc.nodes.some((n) => n.id === this.state.selectedId)) {
      this.closeDetail(); // stale selection after a param change
    }
    this.events.onHighlight(new Set());
    if (doc.nodes.length === 0) this.events.onEmpty();
    else this.events.onGraph(doc);
  }
}

function messageOf(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return "request failed";
}
