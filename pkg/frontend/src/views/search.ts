/** Search box: label substring lookup; clicking a hit starts exploring it. */

import { ExplorerStore } from "../state.js";

export class SearchView {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: ExplorerStore,
  ) {
    const input = document.createElement("input");
    input.type = "search";
    input.placeholder = "search nodes";
    const results = document.createElement("ul");
    results.className = "search-results";
    let pending = 0;
    input.oninput = async () => {
      const seq = ++pending;
      if (!input.value) {
        results.replaceChildren();
        return;
      }
      try {
        const hits = await this.store.search(input.value);
        if (seq !== pending) return;
        results.replaceChildren(
          ...hits.map((hit) => {
            const item = document.createElement("li");
            item.textContent = `${hit.label} (deg ${hit.degree}, s ${hit.surprise.toFixed(3)})`;
            item.onclick = () => {
              results.replaceChildren();
              input.value = "";
              void this.store.clickNode(hit.id);
            };
            return item;
          }),
        );
      } catch {
        // transient search failures are non-blocking
      }
    };
    root.append(input, results);
  }
}
