/**
 * Table view: one sortable row per displayed node with label, feature
 * values, degree, and the server's scores. Sorting is purely client-side
 * presentation; score cells render server values (interest shown as the
 * similarity form, raw divergence in the tooltip).
 */

import { ExplorerStore } from "../state.js";
import { interestSimilarity } from "../color.js";

type SortKey = { column: string; ascending: boolean };

export class TableView {
  private sort: SortKey = { column: "blended", ascending: false };

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ExplorerStore,
  ) {
    store.subscribe(() => this.render());
  }

  private featureNames(): string[] {
    return this.store.graph ? this.store.graph.features.map((f) => f.name) : [];
  }

  private cellValue(nodeId: string, column: string): string | number {
    const node = this.store.displayed.get(nodeId)!;
    switch (column) {
      case "label":
        return node.label;
      case "degree":
        return node.degree;
      case "surprise":
        return node.surprise ?? -1;
      case "interest":
        return node.interest === null
          ? -1
          : interestSimilarity(node.interest, this.store.lambdaTotal);
      case "blended":
        return node.blended ?? -1;
      default:
        return node.values?.[column] ?? "";
    }
  }

  render(): void {
    const names = this.featureNames();
    const columns = ["label", ...names, "degree", "surprise", "interest", "blended"];
    const ids = [...this.store.displayed.keys()];
    const { column, ascending } = this.sort;
    ids.sort((a, b) => {
      const va = this.cellValue(a, column);
      const vb = this.cellValue(b, column);
      const cmp =
        typeof va === "number" && typeof vb === "number"
          ? va - vb
          : String(va).localeCompare(String(vb));
      return (ascending ? cmp : -cmp) || a.localeCompare(b); // stable tiebreak
    });

    const table = document.createElement("table");
    const head = table.createTHead().insertRow();
    for (const col of columns) {
      const th = document.createElement("th");
      th.textContent = col + (col === column ? (ascending ? " ▴" : " ▾") : "");
      th.onclick = () => {
        this.sort =
          this.sort.column === col
            ? { column: col, ascending: !this.sort.ascending }
            : { column: col, ascending: false };
        this.render();
      };
      head.appendChild(th);
    }
    const body = table.createTBody();
    for (const id of ids) {
      const node = this.store.displayed.get(id)!;
      const row = body.insertRow();
      row.className =
        (node.visited ? "visited " : "") + (id === this.store.selected ? "selected" : "");
      row.onclick = () => void this.store.clickNode(id);
      row.onmouseenter = () => this.store.hoverNode(id);
      for (const col of columns) {
        const cell = row.insertCell();
        const value = this.cellValue(id, col);
        if (col === "interest" && node.interest !== null) {
          cell.textContent = (value as number).toFixed(3);
          cell.title = `divergence ${node.interest.toFixed(6)} bits`;
        } else if (typeof value === "number") {
          cell.textContent = value < 0 ? "-" : Number.isInteger(value) ? String(value) : value.toFixed(3);
        } else {
          cell.textContent = String(value);
        }
      }
    }
    this.root.replaceChildren(table);
  }
}
