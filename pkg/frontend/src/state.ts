/**
 * Exploration state and the interaction flow behind every view.
 *
 * The store owns: which nodes and edges are displayed, the selection and
 * hover, the session profile, and the active ranking mode. Clicking a node
 * records a visit, then asks the server to rank its still-hidden neighbors
 * and merges the returned top-k into the display. Every score kept here is
 * a verbatim server value; the store performs no score arithmetic.
 *
 * At most one rank request is in flight per session: responses that arrive
 * after a newer interaction are discarded.
 */

import {
  ApiClient,
  FeatureScore,
  GraphSummary,
  ProfileSummary,
  RankMode,
  RankedNeighbor,
  SearchHit,
} from "./api.js";
import { DEFAULT_LEGEND, LegendParams } from "./color.js";

export interface DisplayedNode {
  id: string;
  label: string;
  degree: number;
  surprise: number | null;
  interest: number | null;
  blended: number | null;
  features: FeatureScore[];
  values: Record<string, number | string> | null;
  visited: boolean;
  via: string | null; // the focus whose ranking introduced this node
}

export type Listener = () => void;

export function edgeKey(a: string, b: string): string {
  return a < b ? `${a}|${b}` : `${b}|${a}`;
}

export class ExplorerStore {
  displayed = new Map<string, DisplayedNode>();
  edges = new Set<string>();
  selected: string | null = null;
  hover: string | null = null;
  mode: RankMode = "combined";
  coldStart = true;
  profile: ProfileSummary | null = null;
  graph: GraphSummary | null = null;
  notices: string[] = [];
  legend: LegendParams;
  k: number;

  private listeners = new Set<Listener>();
  private requestSeq = 0;

  constructor(
    readonly api: ApiClient,
    readonly sessionId: string,
    opts: { k?: number; legend?: LegendParams } = {},
  ) {
    this.k = opts.k ?? 8;
    this.legend = opts.legend ?? DEFAULT_LEGEND;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  private notice(message: string): void {
    this.notices.push(message);
    if (this.notices.length > 5) this.notices.shift();
  }

  /** Sum of the session's feature weights: the score normalizer. */
  get lambdaTotal(): number {
    if (!this.profile) return this.graph ? this.graph.features.length : 1;
    return Object.values(this.profile.lambda).reduce((a, b) => a + b, 0);
  }

  async init(): Promise<void> {
    try {
      this.graph = await this.api.graphSummary();
      this.profile = await this.api.profile(this.sessionId);
      this.coldStart = !this.profile.warm;
    } catch (err) {
      this.notice(`failed to load graph summary: ${(err as Error).message}`);
    }
    this.notify();
  }

  search(q: string, limit = 10): Promise<SearchHit[]> {
    return this.api.search(q, limit).then((r) => r.results);
  }

  /**
   * The core interaction: visit the node, rank its hidden neighbors, merge
   * the results. The clicked node always joins the display (so the display
   * covers every visited node) and becomes the selection.
   */
  async clickNode(id: string): Promise<void> {
    const seq = ++this.requestSeq;
    try {
      this.profile = await this.api.visit(this.sessionId, id);
    } catch (err) {
      this.notice(`visit failed: ${(err as Error).message}`);
      this.notify();
      return;
    }
    await this.ensureDisplayed(id, null, true);
    this.selected = id;
    this.notify();

    try {
      const exclude = [...this.displayed.keys()].filter((n) => n !== id);
      const response = await this.api.rank(this.sessionId, {
        focus: id,
        k: this.k,
        mode: this.mode,
        exclude,
      });
      if (seq !== this.requestSeq) return; // superseded by a newer click
      this.coldStart = response.cold_start;
      for (const neighbor of response.results) {
        this.mergeNeighbor(neighbor, id);
      }
      await this.fillValues(response.results.map((r) => r.id));
    } catch (err) {
      this.notice(`ranking failed: ${(err as Error).message}`);
    }
    if (seq === this.requestSeq) this.notify();
  }

  /** Add a single hidden neighbor (from the summary panel) to the display. */
  async addNode(id: string, via: string | null): Promise<void> {
    await this.ensureDisplayed(id, via, false);
    this.notify();
  }

  async setMode(mode: RankMode): Promise<void> {
    this.mode = mode;
    if (this.selected) await this.reRank();
    else this.notify();
  }

  /** Apply weight edits and re-rank the current selection with them. */
  async setWeights(weights: {
    lambda?: Record<string, number>;
    w_s?: number;
    w_r?: number;
  }): Promise<void> {
    try {
      const ack = await this.api.setWeights(this.sessionId, weights);
      this.profile = ack.profile;
    } catch (err) {
      this.notice(`weight update rejected: ${(err as Error).message}`);
      this.notify();
      return;
    }
    if (this.selected) await this.reRank();
    else this.notify();
  }

  hoverNode(id: string | null): void {
    this.hover = id;
    this.notify();
  }

  /**
   * Refresh ranking after a mode or weight change. Unlike a click, this
   * does not exclude displayed nodes: the point is to re-serve the current
   * neighborhood under the new weights so visible scores update, not to
   * fish for novel suggestions.
   */
  private async reRank(): Promise<void> {
    const focus = this.selected;
    if (!focus) return;
    const seq = ++this.requestSeq;
    try {
      const response = await this.api.rank(this.sessionId, {
        focus,
        k: this.k,
        mode: this.mode,
        exclude: [],
      });
      if (seq !== this.requestSeq) return;
      this.coldStart = response.cold_start;
      for (const neighbor of response.results) {
        this.mergeNeighbor(neighbor, focus);
      }
      await this.fillValues(response.results.map((r) => r.id));
    } catch (err) {
      this.notice(`ranking failed: ${(err as Error).message}`);
    }
    if (seq === this.requestSeq) this.notify();
  }

  private mergeNeighbor(neighbor: RankedNeighbor, via: string): void {
    const existing = this.displayed.get(neighbor.id);
    this.displayed.set(neighbor.id, {
      id: neighbor.id,
      label: neighbor.label,
      degree: neighbor.degree,
      surprise: neighbor.surprise,
      interest: neighbor.interest,
      blended: neighbor.blended,
      features: neighbor.features,
      values: existing?.values ?? null,
      visited: existing?.visited ?? false,
      via: existing?.via ?? via,
    });
    this.edges.add(edgeKey(via, neighbor.id));
  }

  private async ensureDisplayed(id: string, via: string | null, visited: boolean): Promise<void> {
    const existing = this.displayed.get(id);
    if (existing) {
      if (visited) existing.visited = true;
      return;
    }
    try {
      const details = await this.api.node(id);
      this.displayed.set(id, {
        id,
        label: details.label,
        degree: details.degree,
        surprise: details.surprise,
        interest: null,
        blended: null,
        features: Object.entries(details.feature_surprise).map(([name, s]) => ({
          name,
          surprise: s,
          interest: null,
          blended: null,
        })),
        values: details.values,
        visited,
        via,
      });
      if (via) this.edges.add(edgeKey(via, id));
    } catch (err) {
      this.notice(`could not load node ${id}: ${(err as Error).message}`);
    }
  }

  /** Table rows show feature values; rank payloads carry only scores, so
   * fill values from the node endpoint for newly merged nodes. */
  private async fillValues(ids: string[]): Promise<void> {
    for (const id of ids) {
      const node = this.displayed.get(id);
      if (!node || node.values !== null) continue;
      try {
        const details = await this.api.node(id);
        node.values = details.values;
      } catch (err) {
        this.notice(`could not load values for ${id}: ${(err as Error).message}`);
      }
    }
  }

  /** Deterministic snapshot used by tests and debugging. */
  snapshot(): {
    displayed: string[];
    visited: string[];
    edges: string[];
    selected: string | null;
    mode: RankMode;
    coldStart: boolean;
  } {
    return {
      displayed: [...this.displayed.keys()].sort(),
      visited: [...this.displayed.values()].filter((n) => n.visited).map((n) => n.id).sort(),
      edges: [...this.edges].sort(),
      selected: this.selected,
      mode: this.mode,
      coldStart: this.coldStart,
    };
  }
}
