// In-memory implementation of the needlens HTTP contract, close enough for
// the console tests: the same endpoints, payload shapes, 409 lock semantics,
// and a background "re-extraction" that flips run status and refreshes the
// dashboard after a short delay.

import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";
import type { AddressInfo } from "node:net";

interface MockState {
  topics: {
    topic_id: number;
    top_terms: { token: string; weight: number }[];
    need_label: string | null;
    labeled: boolean;
  }[];
  lexicon: {
    version: string;
    entries: Record<
      string,
      {
        keywords: string[];
        topic_ids: number[];
        moa_concept: string | null;
        kind: string;
        created_at: string;
      }
    >;
  };
  prevalence: { need: string; wave: string; p: number }[];
  runStatus: { state: string; detail: string | null };
  locked: boolean;
  requestLog: string[];
}

function initialState(): MockState {
  return {
    topics: [
      {
        topic_id: 0,
        top_terms: [
          { token: "food", weight: 0.21 },
          { token: "groceries", weight: 0.12 },
        ],
        need_label: "food needs",
        labeled: true,
      },
      {
        topic_id: 1,
        top_terms: [
          { token: "anxious", weight: 0.18 },
          { token: "lonely", weight: 0.11 },
        ],
        need_label: null,
        labeled: false,
      },
      {
        topic_id: 2,
        top_terms: [
          { token: "walking", weight: 0.17 },
          { token: "exercise", weight: 0.1 },
        ],
        need_label: null,
        labeled: false,
      },
    ],
    lexicon: {
      version: "lex/1",
      entries: {
        "food needs": {
          keywords: ["food", "groceries"],
          topic_ids: [0],
          moa_concept: "moa:material-resources",
          kind: "need",
          created_at: "seed",
        },
      },
    },
    prevalence: [
      { need: "food needs", wave: "M3", p: 1.0 },
      { need: "food needs", wave: "M6", p: 1.0 },
    ],
    runStatus: { state: "idle", detail: null },
    locked: false,
    requestLog: [],
  };
}

const GRAPH = {
  version: "ng/1",
  as_of: "M6",
  nodes: [
    { node_id: "category:need", layer: "Category", label: "Need", first_seen: "T0" },
    { node_id: "category:obstacle", layer: "Category", label: "Obstacle", first_seen: "T0" },
    { node_id: "comb:opportunity-physical", layer: "ComB", label: "physical opportunity", first_seen: "T0" },
    { node_id: "bcio:resource-provision", layer: "BcioClass", label: "resource provision", first_seen: "T0" },
    { node_id: "need:food-needs", layer: "Need", label: "food needs", first_seen: "M3" },
  ],
  edges: [
    {
      src: "bcio:resource-provision",
      dst: "comb:opportunity-physical",
      relation: "belongs_to",
      first_seen: "T0",
      provenance: [],
    },
    {
      src: "need:food-needs",
      dst: "category:need",
      relation: "belongs_to",
      first_seen: "M3",
      provenance: ["d1"],
    },
  ],
};

const STRATA = {
  strata: [
    { need: "food needs", dim: "gender", subgroup: "female", wave: "M6", p: 0.7 },
    { need: "food needs", dim: "gender", subgroup: "male", wave: "M6", p: 0.5 },
  ],
  disparities: [
    {
      need: "food needs",
      dimension: "gender",
      wave: "M6",
      higher: "female",
      lower: "male",
      ratio: 1.4,
    },
  ],
};

const SENTIMENT = {
  sentiment: [
    { wave: "M3", mean_valence: -0.1, class_counts: { negative: 3, neutral: 4, positive: 2 } },
    { wave: "M6", mean_valence: 0.2, class_counts: { negative: 1, neutral: 4, positive: 5 } },
  ],
};

export interface MockServer {
  url: string;
  state: MockState;
  close(): Promise<void>;
}

export async function startMockServer(reextractMs = 40): Promise<MockServer> {
  const state = initialState();

  const json = (res: ServerResponse, status: number, body: unknown) => {
    res.writeHead(status, { "Content-Type": "application/json" });
    res.end(JSON.stringify(body));
  };

  const readBody = (req: IncomingMessage): Promise<Record<string, unknown>> =>
    new Promise((resolve) => {
      let data = "";
      req.on("data", (chunk) => (data += chunk));
      req.on("end", () => resolve(data ? JSON.parse(data) : {}));
    });

  const finishRun = () => {
    // "re-extraction" recomputes prevalence with every labeled need present
    const needs = Object.keys(state.lexicon.entries).sort();
    state.prevalence = [];
    for (const wave of ["M3", "M6"]) {
      for (const need of needs) {
        state.prevalence.push({ need, wave, p: 1 / needs.length });
      }
    }
    state.runStatus = { state: "idle", detail: null };
    state.locked = false;
  };

  const server: Server = createServer(async (req, res) => {
    const url = new URL(req.url ?? "/", "http://localhost");
    const path = url.pathname;
    state.requestLog.push(`${req.method} ${path}`);

    if (req.method === "GET" && path === "/api/health") {
      return json(res, 200, { status: "ok", run: state.runStatus });
    }
    if (req.method === "GET" && path === "/api/runs/status") {
      return json(res, 200, state.runStatus);
    }
    if (req.method === "GET" && path === "/api/topics") {
      return json(res, 200, { topics: state.topics });
    }
    const docsMatch = path.match(/^\/api\/topics\/(\d+)\/docs$/);
    if (req.method === "GET" && docsMatch) {
      const k = Number(docsMatch[1]);
      if (!state.topics.some((t) => t.topic_id === k)) {
        return json(res, 404, { code: "unknown_topic", message: `topic ${k} out of range` });
      }
      return json(res, 200, {
        topic_id: k,
        documents: [
          { doc_id: "d1", weight: 0.9, wave: "M3", text: "sample document one" },
          { doc_id: "d2", weight: 0.6, wave: "M6", text: "sample document two" },
        ],
      });
    }
    const labelMatch = path.match(/^\/api\/topics\/(\d+)\/label$/);
    if (req.method === "POST" && labelMatch) {
      const k = Number(labelMatch[1]);
      const body = await readBody(req);
      const label = String(body.need_label ?? "").trim().toLowerCase();
      if (state.locked) {
        return json(res, 409, {
          code: "conflict",
          message: "another labeling or extraction run is in progress",
          state: { run: state.runStatus, lexicon: state.lexicon },
        });
      }
      if (!label) {
        return json(res, 400, { code: "bad_label", message: "need label must not be empty" });
      }
      state.locked = true;
      // single-owner: remove the topic from any previous entry
      for (const entry of Object.values(state.lexicon.entries)) {
        entry.topic_ids = entry.topic_ids.filter((t) => t !== k);
      }
      const entry = (state.lexicon.entries[label] ??= {
        keywords: [],
        topic_ids: [],
        moa_concept: null,
        kind: String(body.kind ?? "need"),
        created_at: "M6",
      });
      entry.topic_ids.push(k);
      const topic = state.topics.find((t) => t.topic_id === k)!;
      topic.need_label = label;
      topic.labeled = true;
      state.runStatus = { state: "running", detail: "extract" };
      setTimeout(finishRun, reextractMs);
      return json(res, 200, { topic_id: k, need_label: label, reextract: "started" });
    }
    if (req.method === "GET" && path === "/api/lexicon") {
      return json(res, 200, state.lexicon);
    }
    if (req.method === "POST" && path === "/api/runs/extract") {
      if (state.locked) {
        return json(res, 409, { code: "conflict", message: "a run is already in progress" });
      }
      state.locked = true;
      state.runStatus = { state: "running", detail: "extract" };
      setTimeout(finishRun, reextractMs);
      return json(res, 200, { reextract: "started" });
    }
    if (req.method === "GET" && path === "/api/graph/snapshot") {
      return json(res, 200, GRAPH);
    }
    if (req.method === "GET" && path === "/api/analytics/prevalence") {
      return json(res, 200, {
        prevalence: state.prevalence,
        waves: ["M3", "M6"],
        unmapped: { M3: 1, M6: 0 },
      });
    }
    if (req.method === "GET" && path === "/api/analytics/strata") {
      const dim = url.searchParams.get("dim") ?? "gender";
      if (dim !== "gender") return json(res, 200, { strata: [], disparities: [] });
      return json(res, 200, STRATA);
    }
    if (req.method === "GET" && path === "/api/analytics/sentiment") {
      return json(res, 200, SENTIMENT);
    }
    if (req.method === "GET" && path === "/api/report") {
      return json(res, 200, { markdown: "```json\n{}\n```\n# Need analysis report\n" });
    }
    json(res, 404, { code: "not_found", message: `no route ${path}` });
  });

  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const { port } = server.address() as AddressInfo;
  return {
    url: `http://127.0.0.1:${port}`,
    state,
    close: () => new Promise((resolve) => server.close(() => resolve())),
  };
}
