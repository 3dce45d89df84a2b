import type {
  ApiErrorBody,
  GraphSnapshot,
  Health,
  LabelResult,
  Lexicon,
  PrevalenceResponse,
  RunStatus,
  SentimentResponse,
  StrataResponse,
  TopicDocument,
  TopicSummary,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly body: ApiErrorBody | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body?.message ?? `HTTP ${status}`);
    this.status = status;
    this.code = body?.code ?? "http_error";
    this.body = body;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the service endpoints. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { Accept: "application/json" } };
    if (body !== undefined) {
      init.headers = { ...init.headers, "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let parsed: ApiErrorBody | null = null;
      try {
        parsed = (await res.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep null
      }
      throw new ApiError(res.status, parsed);
    }
    return (await res.json()) as T;
  }

  health(): Promise<Health> {
    return this.request("GET", "/api/health");
  }

  runStatus(): Promise<RunStatus> {
    return this.request("GET", "/api/runs/status");
  }

  startExtract(): Promise<{ reextract: string }> {
    return this.request("POST", "/api/runs/extract", {});
  }

  topics(): Promise<{ topics: TopicSummary[] }> {
    return this.request("GET", "/api/topics");
  }

  topicDocs(topicId: number, n = 5): Promise<{ topic_id: number; documents: TopicDocument[] }> {
    return this.request("GET", `/api/topics/${topicId}/docs?n=${n}`);
  }

  labelTopic(topicId: number, needLabel: string, kind = "need"): Promise<LabelResult> {
    return this.request("POST", `/api/topics/${topicId}/label`, {
      need_label: needLabel,
      kind,
    });
  }

  lexicon(): Promise<Lexicon> {
    return this.request("GET", "/api/lexicon");
  }

  addKeywords(needLabel: string, keywords: string[]): Promise<Lexicon> {
    return this.request("POST", "/api/lexicon", { need_label: needLabel, keywords });
  }

  graphSnapshot(wave = "all"): Promise<GraphSnapshot> {
    return this.request("GET", `/api/graph/snapshot?wave=${encodeURIComponent(wave)}`);
  }

  prevalence(wave = "all"): Promise<PrevalenceResponse> {
    return this.request("GET", `/api/analytics/prevalence?wave=${encodeURIComponent(wave)}`);
  }

  strata(dim: string): Promise<StrataResponse> {
    return this.request("GET", `/api/analytics/strata?dim=${encodeURIComponent(dim)}`);
  }

  sentiment(): Promise<SentimentResponse> {
    return this.request("GET", "/api/analytics/sentiment");
  }

  report(): Promise<{ markdown: string }> {
    return this.request("GET", "/api/report");
  }
}
