/**
 * Force-directed graph view on SVG.
 *
 * Visited nodes render as labeled gray circles (the current selection in
 * orange); suggested neighbors are colored by the score encoding: hue from
 * the interest-surprise difference, saturation from their sum. Clicking a
 * node visits it and merges its ranked neighbors into the display.
 */

import { colorForScores } from "../color.js";
import { ForceLayout } from "../layout.js";
import { ExplorerStore } from "../state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class GraphView {
  private readonly svg: SVGSVGElement;
  private readonly layout: ForceLayout;
  private animating = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ExplorerStore,
    seed = 42,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("width", "100%");
    this.svg.setAttribute("height", "100%");
    root.appendChild(this.svg);
    const rect = root.getBoundingClientRect();
    this.layout = new ForceLayout(rect.width || 640, rect.height || 480, seed);
    store.subscribe(() => this.sync());
  }

  private sync(): void {
    const anchors = new Map<string, string | null>();
    for (const node of this.store.displayed.values()) anchors.set(node.id, node.via);
    this.layout.merge(
      this.store.displayed.keys(),
      [...this.store.edges].map((key) => key.split("|") as [string, string]),
      anchors,
    );
    if (!this.animating) {
      this.animating = true;
      const step = () => {
        this.layout.tick();
        this.draw();
        if (!this.layout.settled) requestAnimationFrame(step);
        else this.animating = false;
      };
      requestAnimationFrame(step);
    } else {
      this.draw();
    }
  }

  private draw(): void {
    const frag = document.createDocumentFragment();
    for (const key of this.store.edges) {
      const [a, b] = key.split("|");
      const pa = this.layout.nodes.get(a);
      const pb = this.layout.nodes.get(b);
      if (!pa || !pb) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(pa.x));
      line.setAttribute("y1", String(pa.y));
      line.setAttribute("x2", String(pb.x));
      line.setAttribute("y2", String(pb.y));
      line.setAttribute("stroke", "#ccc");
      frag.appendChild(line);
    }
    for (const node of this.store.displayed.values()) {
      const pos = this.layout.nodes.get(node.id);
      if (!pos) continue;
      const group = document.createElementNS(SVG_NS, "g");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(pos.x));
      circle.setAttribute("cy", String(pos.y));
      circle.setAttribute("r", node.visited ? "9" : "7");
      if (node.id === this.store.selected) {
        circle.setAttribute("fill", "#e8871e");
      } else if (node.visited) {
        circle.setAttribute("fill", "#9a9a9a");
      } else {
        circle.setAttribute(
          "fill",
          colorForScores(node.surprise, node.interest, this.store.lambdaTotal, this.store.legend).css,
        );
      }
      circle.setAttribute("stroke", "#333");
      circle.addEventListener("click", () => void this.store.clickNode(node.id));
      circle.addEventListener("mouseenter", () => this.store.hoverNode(node.id));
      group.appendChild(circle);
      if (node.visited || node.id === this.store.selected) {
        const text = document.createElementNS(SVG_NS, "text");
        text.setAttribute("x", String(pos.x + 11));
        text.setAttribute("y", String(pos.y + 4));
        text.setAttribute("class", "node-label");
        text.textContent = node.label;
        group.appendChild(text);
      }
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        `${node.label}\nsurprise ${node.surprise?.toFixed(6) ?? "-"} bits` +
        `\ninterest ${node.interest?.toFixed(6) ?? "-"} bits`;
      group.appendChild(title);
      frag.appendChild(group);
    }
    this.svg.replaceChildren(frag);
  }
}
