/**
 * Small deterministic force layout.
 *
 * Positions are presentation-only state: new nodes enter near the node
 * that introduced them (plus seeded jitter) and existing nodes are never
 * re-seeded, so the user's mental map survives incremental growth. The
 * random source is a fixed-seed generator, making layouts reproducible.
 */

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

/** Deterministic 32-bit PRNG (mulberry32). */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class ForceLayout {
  readonly nodes = new Map<string, LayoutNode>();
  private springs: Array<[string, string]> = [];
  private springSet = new Set<string>();
  private readonly rand: () => number;
  private alpha = 0;

  constructor(
    private width: number,
    private height: number,
    seed = 42,
    private readonly linkLength = 80,
    private readonly repulsion = 2200,
  ) {
    this.rand = seededRandom(seed);
  }

  resize(width: number, height: number): void {
    this.width = width;
    this.height = height;
  }

  /** Add any new nodes/edges; never moves nodes that already exist. */
  merge(nodeIds: Iterable<string>, edges: Iterable<[string, string]>, anchors: Map<string, string | null>): void {
    let grew = false;
    for (const id of nodeIds) {
      if (this.nodes.has(id)) continue;
      grew = true;
      const anchor = anchors.get(id);
      const base = anchor ? this.nodes.get(anchor) : undefined;
      const cx = base ? base.x : this.width / 2;
      const cy = base ? base.y : this.height / 2;
      const angle = this.rand() * 2 * Math.PI;
      const radius = this.linkLength * (0.5 + this.rand());
      this.nodes.set(id, {
        id,
        x: cx + radius * Math.cos(angle),
        y: cy + radius * Math.sin(angle),
        vx: 0,
        vy: 0,
        pinned: false,
      });
    }
    for (const [a, b] of edges) {
      const key = a < b ? `${a}|${b}` : `${b}|${a}`;
      if (this.springSet.has(key)) continue;
      if (!this.nodes.has(a) || !this.nodes.has(b)) continue;
      this.springSet.add(key);
      this.springs.push([a, b]);
      grew = true;
    }
    if (grew) this.alpha = 1;
  }

  get settled(): boolean {
    return this.alpha < 0.005;
  }

  /** One simulation step; O(n^2) repulsion is fine at exploration scale. */
  tick(): void {
    if (this.settled) return;
    const nodes = [...this.nodes.values()];
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i];
        const b = nodes[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-4) {
          dx = this.rand() - 0.5;
          dy = this.rand() - 0.5;
          d2 = dx * dx + dy * dy;
        }
        const force = (this.repulsion * this.alpha) / d2;
        const dist = Math.sqrt(d2);
        const fx = (dx / dist) * force;
        const fy = (dy / dist) * force;
        a.vx += fx;
        a.vy += fy;
        b.vx -= fx;
        b.vy -= fy;
      }
    }
    for (const [ia, ib] of this.springs) {
      const a = this.nodes.get(ia)!;
      const b = this.nodes.get(ib)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(1e-2, Math.sqrt(dx * dx + dy * dy));
      const stretch = ((dist - this.linkLength) / dist) * 0.08 * this.alpha;
      a.vx += dx * stretch;
      a.vy += dy * stretch;
      b.vx -= dx * stretch;
      b.vy -= dy * stretch;
    }
    const cx = this.width / 2;
    const cy = this.height / 2;
    for (const node of nodes) {
      node.vx += (cx - node.x) * 0.002 * this.alpha;
      node.vy += (cy - node.y) * 0.002 * this.alpha;
      if (!node.pinned) {
        node.x += node.vx;
        node.y += node.vy;
      }
      node.vx *= 0.6;
      node.vy *= 0.6;
      node.x = Math.min(this.width - 10, Math.max(10, node.x));
      node.y = Math.min(this.height - 10, Math.max(10, node.y));
    }
    this.alpha *= 0.97;
  }
}
