/**
 * Typed client for the exploration engine's HTTP/JSON API.
 *
 * The transport is injectable so tests can drive the whole client stack
 * against a stubbed server. All score values flow through verbatim; the
 * client never computes or adjusts a score.
 */

export type RankMode = "surprise" | "interest" | "combined";

export interface FeatureScore {
  name: string;
  surprise: number | null;
  interest: number | null;
  blended: number | null;
}

export interface RankedNeighbor {
  id: string;
  label: string;
  degree: number;
  surprise: number | null;
  interest: number | null;
  blended: number | null;
  features: FeatureScore[];
}

export interface RankResponse {
  mode_requested: RankMode;
  mode_used: RankMode;
  cold_start: boolean;
  results: RankedNeighbor[];
}

export interface FeatureInfo {
  name: string;
  kind: "numerical" | "categorical";
  bins: number;
}

export interface GraphSummary {
  nodes: number;
  edges: number;
  features: FeatureInfo[];
}

export interface NodeDetails {
  id: string;
  label: string;
  degree: number;
  values: Record<string, number | string>;
  surprise: number;
  feature_surprise: Record<string, number>;
}

export interface NeighborhoodFeature {
  name: string;
  kind: string;
  local_mass: number[];
  global_mass: number[];
  edges?: number[];
  categories?: string[];
}

export interface NeighborhoodSummary extends RankResponse {
  id: string;
  features: NeighborhoodFeature[];
}

export interface ProfileFeature {
  name: string;
  mass: number[] | null;
}

export interface ProfileSummary {
  session_id: string;
  visit_count: number;
  window: number | null;
  warm: boolean;
  empty: boolean;
  features: ProfileFeature[];
  lambda: Record<string, number>;
  w_s: number;
  w_r: number;
}

export interface SearchHit {
  id: string;
  label: string;
  degree: number;
  surprise: number;
}

export interface RankRequest {
  focus: string;
  k?: number;
  mode?: RankMode;
  exclude?: string[];
}

export interface WeightsRequest {
  lambda?: Record<string, number>;
  w_s?: number;
  w_r?: number;
}

/** Minimal structural subset of fetch that both browsers and stubs provide. */
export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

interface ErrorEnvelope {
  error: { code: string; message: string };
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchLike: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: { method?: string; body?: unknown }): Promise<T> {
    const resp = await this.fetchLike(`${this.base}${path}`, {
      method: init?.method ?? "GET",
      headers: init?.body === undefined ? {} : { "content-type": "application/json" },
      body: init?.body === undefined ? undefined : JSON.stringify(init.body),
    });
    const payload = (await resp.json()) as unknown;
    if (resp.status >= 400) {
      const envelope = payload as ErrorEnvelope;
      if (envelope && envelope.error) {
        throw new ApiError(resp.status, envelope.error.code, envelope.error.message);
      }
      throw new ApiError(resp.status, "unknown", `request failed with ${resp.status}`);
    }
    return payload as T;
  }

  graphSummary(): Promise<GraphSummary> {
    return this.request("/graph/summary");
  }

  node(id: string): Promise<NodeDetails> {
    return this.request(`/nodes/${encodeURIComponent(id)}`);
  }

  neighborhoodSummary(
    id: string,
    opts: { sid?: string; mode?: RankMode; k?: number; exclude?: string[] } = {},
  ): Promise<NeighborhoodSummary> {
    const params = new URLSearchParams();
    if (opts.sid) params.set("sid", opts.sid);
    if (opts.mode) params.set("mode", opts.mode);
    if (opts.k) params.set("k", String(opts.k));
    if (opts.exclude && opts.exclude.length) params.set("exclude", opts.exclude.join(","));
    const query = params.toString();
    return this.request(
      `/nodes/${encodeURIComponent(id)}/neighborhood-summary${query ? `?${query}` : ""}`,
    );
  }

  rank(sid: string, req: RankRequest): Promise<RankResponse> {
    return this.request(`/sessions/${encodeURIComponent(sid)}/rank`, {
      method: "POST",
      body: req,
    });
  }

  visit(sid: string, node: string): Promise<ProfileSummary> {
    return this.request(`/sessions/${encodeURIComponent(sid)}/visits`, {
      method: "POST",
      body: { node },
    });
  }

  profile(sid: string): Promise<ProfileSummary> {
    return this.request(`/sessions/${encodeURIComponent(sid)}`);
  }

  setWeights(sid: string, weights: WeightsRequest): Promise<{ ok: boolean; profile: ProfileSummary }> {
    return this.request(`/sessions/${encodeURIComponent(sid)}/weights`, {
      method: "PUT",
      body: weights,
    });
  }

  search(q: string, limit = 10): Promise<{ results: SearchHit[] }> {
    const params = new URLSearchParams({ q, limit: String(limit) });
    return this.request(`/search?${params}`);
  }
}
