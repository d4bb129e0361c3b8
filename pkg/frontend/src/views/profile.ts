/**
 * User profile view: per-feature heat maps of the session's visited-node
 * distributions, with controls for the feature weights and the
 * surprise/interest blend. Before the profile is warm a banner explains
 * that suggestions are ordered by surprise alone.
 */

import { ExplorerStore } from "../state.js";

export class ProfileView {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: ExplorerStore,
  ) {
    store.subscribe(() => this.render());
  }

  render(): void {
    const profile = this.store.profile;
    const panel = document.createElement("div");
    const heading = document.createElement("h3");
    heading.textContent = `Profile (${profile?.visit_count ?? 0} visits)`;
    panel.appendChild(heading);

    if (!profile || !profile.warm) {
      const banner = document.createElement("div");
      banner.className = "banner";
      banner.textContent = "exploring by surprise until enough nodes are visited";
      panel.appendChild(banner);
    }

    if (profile) {
      for (const feature of profile.features) {
        const row = document.createElement("div");
        row.className = "feature-row";
        const lam = profile.lambda[feature.name] ?? 1;

        const name = document.createElement("span");
        name.className = "feature-name" + (lam === 0 ? " ignored" : "");
        name.textContent = feature.name;
        row.appendChild(name);

        const weight = document.createElement("input");
        weight.type = "number";
        weight.min = "0";
        weight.step = "0.1";
        weight.value = String(lam);
        weight.onchange = () =>
          void this.store.setWeights({ lambda: { [feature.name]: Number(weight.value) } });
        row.appendChild(weight);

        if (feature.mass) {
          const strip = document.createElement("div");
          strip.className = "heat-strip";
          const top = Math.max(...feature.mass, 1e-12);
          for (const m of feature.mass) {
            const cell = document.createElement("span");
            cell.className = "heat-cell";
            cell.style.backgroundColor = "#4455cc";
            cell.style.opacity = String(m / top);
            cell.title = m.toFixed(4);
            strip.appendChild(cell);
          }
          row.appendChild(strip);
        }
        panel.appendChild(row);
      }

      const blendRow = document.createElement("div");
      blendRow.className = "blend-row";
      const blendLabel = document.createElement("label");
      blendLabel.textContent = `surprise ${profile.w_s.toFixed(2)} / interest ${profile.w_r.toFixed(2)}`;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = "1";
      slider.step = "0.05";
      slider.value = String(profile.w_s);
      slider.onchange = () => {
        const w_s = Number(slider.value);
        void this.store.setWeights({ w_s, w_r: 1 - w_s });
      };
      blendRow.append(blendLabel, slider);
      panel.appendChild(blendRow);
    }

    const modeRow = document.createElement("div");
    for (const mode of ["surprise", "interest", "combined"] as const) {
      const btn = document.createElement("button");
      btn.textContent = mode;
      btn.disabled = mode === this.store.mode;
      btn.onclick = () => void this.store.setMode(mode);
      modeRow.appendChild(btn);
    }
    panel.appendChild(modeRow);

    for (const notice of this.store.notices) {
      const div = document.createElement("div");
      div.className = "notice";
      div.textContent = notice;
      panel.appendChild(div);
    }
    this.root.replaceChildren(panel);
  }
}
