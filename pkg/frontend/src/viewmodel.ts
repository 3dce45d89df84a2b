// Console state and the labeling workflow. All analytics arrive pre-computed
// from the API; this module only orchestrates loading, label submission,
// status polling, and conflict recovery.

import { ApiClient, ApiError } from "./api.js";
import type {
  GraphSnapshot,
  Lexicon,
  PrevalenceResponse,
  RunStatus,
  SentimentResponse,
  StrataResponse,
  TopicSummary,
} from "./types.js";

export class ConflictError extends Error {
  constructor(message: string) {
    super(message);
  }
}

export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
  }
}

export interface ConsoleState {
  topics: TopicSummary[];
  lexicon: Lexicon | null;
  graph: GraphSnapshot | null;
  prevalence: PrevalenceResponse | null;
  strata: Record<string, StrataResponse>;
  sentiment: SentimentResponse | null;
  runStatus: RunStatus;
  pendingLabels: number[]; // topic ids with a submitted label still re-extracting
}

export const STRATUM_DIMENSIONS = ["age_band", "gender", "imd_band"];

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export interface ViewModelOptions {
  /** Status poll interval while a re-extraction runs (ms). */
  pollIntervalMs?: number;
  /** Give up waiting for a run after this long (ms). */
  pollTimeoutMs?: number;
  sleepFn?: (ms: number) => Promise<void>;
}

export class ConsoleViewModel {
  readonly state: ConsoleState = {
    topics: [],
    lexicon: null,
    graph: null,
    prevalence: null,
    strata: {},
    sentiment: null,
    runStatus: { state: "idle", detail: null },
    pendingLabels: [],
  };

  private readonly pollIntervalMs: number;
  private readonly pollTimeoutMs: number;
  private readonly sleepFn: (ms: number) => Promise<void>;

  constructor(
    private readonly api: ApiClient,
    opts: ViewModelOptions = {},
  ) {
    this.pollIntervalMs = opts.pollIntervalMs ?? 1000;
    this.pollTimeoutMs = opts.pollTimeoutMs ?? 120_000;
    this.sleepFn = opts.sleepFn ?? sleep;
  }

  /** Topics with no need label yet get flagged in the UI until labeled. */
  unlabeledTopicIds(): number[] {
    return this.state.topics.filter((t) => !t.labeled).map((t) => t.topic_id);
  }

  async loadAll(): Promise<void> {
    const [topics, lexicon, graph, prevalence, sentiment] = await Promise.all([
      this.api.topics(),
      this.api.lexicon(),
      this.api.graphSnapshot(),
      this.api.prevalence(),
      this.api.sentiment(),
    ]);
    this.state.topics = topics.topics;
    this.state.lexicon = lexicon;
    this.state.graph = graph;
    this.state.prevalence = prevalence;
    this.state.sentiment = sentiment;
    for (const dim of STRATUM_DIMENSIONS) {
      this.state.strata[dim] = await this.api.strata(dim);
    }
    this.state.runStatus = await this.api.runStatus();
  }

  /**
   * Submit a need label for a topic, wait for the background re-extraction,
   * then refresh everything. Throws ValidationError before any network call
   * for an empty label, ConflictError (after reloading state) when another
   * writer holds the service lock.
   */
  async submitLabel(topicId: number, needLabel: string, kind = "need"): Promise<void> {
    const label = needLabel.trim();
    if (!label) {
      throw new ValidationError("need label must not be empty");
    }
    try {
      await this.api.labelTopic(topicId, label, kind);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        await this.loadAll(); // pick up whoever won the race
        throw new ConflictError(err.message);
      }
      throw err;
    }
    this.state.pendingLabels.push(topicId);
    try {
      await this.awaitRun();
    } finally {
      this.state.pendingLabels = this.state.pendingLabels.filter((t) => t !== topicId);
    }
    await this.loadAll();
  }

  /** Poll run status until the service goes idle (or reports failure). */
  async awaitRun(): Promise<RunStatus> {
    const deadline = Date.now() + this.pollTimeoutMs;
    for (;;) {
      const status = await this.api.runStatus();
      this.state.runStatus = status;
      if (status.state !== "running") {
        if (status.state === "failed") {
          throw new Error(`re-extraction failed: ${status.detail ?? "unknown"}`);
        }
        return status;
      }
      if (Date.now() > deadline) {
        throw new Error("timed out waiting for re-extraction");
      }
      await this.sleepFn(this.pollIntervalMs);
    }
  }

  async triggerExtract(): Promise<void> {
    try {
      await this.api.startExtract();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        throw new ConflictError(err.message);
      }
      throw err;
    }
    await this.awaitRun();
    await this.loadAll();
  }
}
