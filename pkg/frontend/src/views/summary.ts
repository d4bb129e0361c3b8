/**
 * Neighborhood summary for the hovered or selected node: a compact
 * heat-map strip per feature (cell darkness proportional to bin mass),
 * expandable into an overlaid histogram (local orange over global gray,
 * same bins, so alignment is preserved), plus the top still-hidden
 * neighbors with add buttons.
 */

import { NeighborhoodSummary } from "../api.js";
import { ExplorerStore } from "../state.js";

export class SummaryView {
  private shownFor: string | null = null;
  private expanded = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ExplorerStore,
  ) {
    store.subscribe(() => void this.maybeRefresh());
  }

  private async maybeRefresh(): Promise<void> {
    const target = this.store.hover ?? this.store.selected;
    if (!target || target === this.shownFor) return;
    this.shownFor = target;
    try {
      const summary = await this.store.api.neighborhoodSummary(target, {
        sid: this.store.sessionId,
        mode: this.store.mode,
        k: 5,
        exclude: [...this.store.displayed.keys()],
      });
      if (this.shownFor === target) this.render(summary);
    } catch {
      // hover raced a deleted element or the server; leave the old panel up
    }
  }

  private heatStrip(mass: number[], tone: string): HTMLElement {
    const strip = document.createElement("div");
    strip.className = "heat-strip";
    const top = Math.max(...mass, 1e-12);
    for (const m of mass) {
      const cell = document.createElement("span");
      cell.className = "heat-cell";
      cell.style.backgroundColor = tone;
      cell.style.opacity = String(m / top);
      cell.title = m.toFixed(4);
      strip.appendChild(cell);
    }
    return strip;
  }

  private overlaidHistogram(local: number[], global: number[]): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "histogram";
    const top = Math.max(...local, ...global, 1e-12);
    for (let b = 0; b < local.length; b++) {
      const slot = document.createElement("div");
      slot.className = "hist-slot";
      const gBar = document.createElement("div");
      gBar.className = "hist-bar global";
      gBar.style.height = `${(100 * global[b]) / top}%`;
      const lBar = document.createElement("div");
      lBar.className = "hist-bar local";
      lBar.style.height = `${(100 * local[b]) / top}%`;
      slot.title = `local ${local[b].toFixed(4)} / global ${global[b].toFixed(4)}`;
      slot.append(gBar, lBar);
      wrap.appendChild(slot);
    }
    return wrap;
  }

  private render(summary: NeighborhoodSummary): void {
    const panel = document.createElement("div");
    const heading = document.createElement("h3");
    const label = this.store.displayed.get(summary.id)?.label ?? summary.id;
    heading.textContent = `Neighborhood of ${label}`;
    panel.appendChild(heading);

    const list = document.createElement("ul");
    list.className = "hidden-neighbors";
    for (const neighbor of summary.results) {
      const item = document.createElement("li");
      const add = document.createElement("button");
      add.textContent = "+";
      add.title = "add to graph";
      add.onclick = () => void this.store.addNode(neighbor.id, summary.id);
      const text = document.createElement("span");
      const score = neighbor.blended ?? neighbor.surprise;
      text.textContent = ` ${neighbor.label} (${score === null ? "-" : score.toFixed(3)})`;
      item.append(add, text);
      list.appendChild(item);
    }
    panel.appendChild(list);

    for (const feature of summary.features) {
      const row = document.createElement("div");
      row.className = "feature-row";
      const name = document.createElement("div");
      name.className = "feature-name";
      name.textContent = feature.name;
      name.onclick = () => {
        if (this.expanded.has(feature.name)) this.expanded.delete(feature.name);
        else this.expanded.add(feature.name);
        this.render(summary);
      };
      row.appendChild(name);
      if (this.expanded.has(feature.name)) {
        row.appendChild(this.overlaidHistogram(feature.local_mass, feature.global_mass));
      } else {
        row.appendChild(this.heatStrip(feature.local_mass, "#e8871e"));
        row.appendChild(this.heatStrip(feature.global_mass, "#777"));
      }
      panel.appendChild(row);
    }
    this.root.replaceChildren(panel);
  }
}
