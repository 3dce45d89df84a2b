// Pure chart-dataset builders. Every number comes straight out of an API
// payload; the only transformation allowed here is grouping and zero-filling
// waves so lines have a point per follow-up.

import { WAVES } from "./types.js";
import type {
  Disparity,
  PrevalenceResponse,
  SentimentResponse,
  StrataResponse,
} from "./types.js";

export interface LinePoint {
  wave: string;
  value: number;
}

export interface LineSeries {
  name: string;
  points: LinePoint[];
}

function waveOrder(wave: string): number {
  const i = (WAVES as string[]).indexOf(wave);
  return i === -1 ? -1 : i;
}

/** One line per need across the follow-up waves, zero-filled. */
export function prevalenceSeries(resp: PrevalenceResponse): LineSeries[] {
  const needs = [...new Set(resp.prevalence.map((r) => r.need))].sort();
  const waves = [...resp.waves].sort((a, b) => waveOrder(a) - waveOrder(b));
  return needs.map((need) => ({
    name: need,
    points: waves.map((wave) => {
      const row = resp.prevalence.find((r) => r.need === need && r.wave === wave);
      return { wave, value: row ? row.p : 0 };
    }),
  }));
}

/** Per-subgroup lines for one need within a stratum dimension. */
export function strataSeries(resp: StrataResponse, need: string): LineSeries[] {
  const rows = resp.strata.filter((r) => r.need === need);
  const subgroups = [...new Set(rows.map((r) => r.subgroup))].sort();
  const waves = [...new Set(rows.map((r) => r.wave))].sort(
    (a, b) => waveOrder(a) - waveOrder(b),
  );
  return subgroups.map((subgroup) => ({
    name: subgroup,
    points: waves.map((wave) => {
      const row = rows.find((r) => r.subgroup === subgroup && r.wave === wave);
      return { wave, value: row ? row.p : 0 };
    }),
  }));
}

export function sentimentSeries(resp: SentimentResponse): LineSeries {
  const rows = [...resp.sentiment].sort((a, b) => waveOrder(a.wave) - waveOrder(b.wave));
  return {
    name: "mean valence",
    points: rows.map((r) => ({ wave: r.wave, value: r.mean_valence })),
  };
}

export interface DisparityBadge {
  need: string;
  wave: string;
  text: string;
}

/** Badge per disparity the service flagged (threshold applied server-side). */
export function disparityBadges(disparities: Disparity[]): DisparityBadge[] {
  return disparities.map((d) => ({
    need: d.need,
    wave: d.wave,
    text: `${d.need}: ${d.higher} ${d.ratio.toFixed(2)}x ${d.lower} (${d.dimension}, ${d.wave})`,
  }));
}
