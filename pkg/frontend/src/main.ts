import { ApiClient } from "./api.js";
import { ExplorerStore } from "./state.js";
import { GraphView } from "./views/graph.js";
import { ProfileView } from "./views/profile.js";
import { SearchView } from "./views/search.js";
import { SummaryView } from "./views/summary.js";
import { TableView } from "./views/table.js";

function sessionId(): string {
  const existing = sessionStorage.getItem("egoscout-session");
  if (existing) return existing;
  const fresh = `ui-${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6).toString(36)}`;
  sessionStorage.setItem("egoscout-session", fresh);
  return fresh;
}

const params = new URLSearchParams(location.search);
const base = params.get("api") ?? "http://127.0.0.1:8765";

const store = new ExplorerStore(new ApiClient(base), sessionId());
new SearchView(document.getElementById("search")!, store);
new TableView(document.getElementById("table")!, store);
new GraphView(document.getElementById("graph")!, store);
new SummaryView(document.getElementById("summary")!, store);
new ProfileView(document.getElementById("profile")!, store);
void store.init();
