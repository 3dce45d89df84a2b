import { ApiClient, ApiError } from "./api.js";
import { disparityBadges, prevalenceSeries, sentimentSeries, strataSeries } from "./charts.js";
import { layoutGraph } from "./layout.js";
import {
  renderDisparityBadges,
  renderEmptyState,
  renderGraph,
  renderLexiconTable,
  renderLineChart,
  renderTopicList,
} from "./render.js";
import { ConflictError, ConsoleViewModel, ValidationError } from "./viewmodel.js";

const API_BASE = (window as { NEEDLENS_API?: string }).NEEDLENS_API ?? "http://127.0.0.1:8400";

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function setStatus(text: string, isError = false): void {
  const bar = byId("status");
  bar.textContent = text;
  bar.className = isError ? "status error" : "status";
}

async function refreshViews(vm: ConsoleViewModel): Promise<void> {
  const s = vm.state;
  renderTopicList(byId("topics"), s.topics, (topicId) => {
    const selected = s.topics.find((t) => t.topic_id === topicId);
    byId("label-topic-id").textContent = String(topicId);
    (byId("label-input") as HTMLInputElement).value = selected?.need_label ?? "";
  });
  if (s.lexicon) renderLexiconTable(byId("lexicon"), s.lexicon);
  if (s.graph) renderGraph(byId("graph"), layoutGraph(s.graph));
  if (s.prevalence) {
    renderLineChart(byId("prevalence-chart"), prevalenceSeries(s.prevalence), {
      min: 0,
      max: 1,
    });
  } else {
    renderEmptyState(byId("prevalence-chart"), "needlens analyze");
  }
  if (s.sentiment) {
    renderLineChart(byId("sentiment-chart"), [sentimentSeries(s.sentiment)], {
      min: -1,
      max: 1,
    });
  }
  const gender = s.strata["gender"];
  if (gender) {
    const needSelect = byId("strata-need") as HTMLSelectElement;
    const needs = [...new Set(gender.strata.map((r) => r.need))].sort();
    needSelect.replaceChildren(
      ...needs.map((n) => new Option(n, n, false, n === needSelect.value)),
    );
    const need = needSelect.value || needs[0];
    if (need) renderLineChart(byId("strata-chart"), strataSeries(gender, need), { min: 0, max: 1 });
    renderDisparityBadges(byId("disparities"), disparityBadges(gender.disparities));
  }
  setStatus(`run: ${s.runStatus.state}${s.runStatus.detail ? ` (${s.runStatus.detail})` : ""}`);
}

async function main(): Promise<void> {
  const vm = new ConsoleViewModel(new ApiClient(API_BASE));
  try {
    await vm.loadAll();
  } catch (err) {
    if (err instanceof ApiError) {
      renderEmptyState(byId("prevalence-chart"), "needlens demo");
      setStatus(`service error: ${err.message}`, true);
      return;
    }
    throw err;
  }
  await refreshViews(vm);

  byId("label-submit").addEventListener("click", async () => {
    const topicId = Number(byId("label-topic-id").textContent);
    const label = (byId("label-input") as HTMLInputElement).value;
    try {
      setStatus("submitting label…");
      await vm.submitLabel(topicId, label);
      await refreshViews(vm);
      setStatus(`labeled topic ${topicId} as "${label.trim().toLowerCase()}"`);
    } catch (err) {
      if (err instanceof ValidationError) {
        setStatus(err.message, true);
      } else if (err instanceof ConflictError) {
        await refreshViews(vm); // state was reloaded by the view-model
        setStatus("another run is in progress — state reloaded, retry", true);
      } else {
        setStatus(String(err), true);
      }
    }
  });

  byId("strata-need").addEventListener("change", () => void refreshViews(vm));
  byId("reextract").addEventListener("click", async () => {
    try {
      setStatus("re-extracting…");
      await vm.triggerExtract();
      await refreshViews(vm);
    } catch (err) {
      setStatus(String(err), true);
    }
  });
}

void main();
