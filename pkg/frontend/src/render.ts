/**
 * Panel definitions and the render entry point.
 *
 * The usage panels (fig1a, fig1b) plot baseline versus cap-and-trade FLOP
 * usage over the cost axis; the utility panels (fig2a, fig2b) plot the two
 * utilities, and the budget sweep draws a vertical line at the breakeven
 * budget read from the CSV's crossover marker. Rendering is read-only over
 * the dataset: no equilibrium math happens on this side.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { parseFigureCsv, CsvError, FigureData } from "./csv.js";
import { renderChart, Series } from "./svg.js";

export const PANELS = ["fig1a", "fig1b", "fig2a", "fig2b"] as const;
export type Panel = (typeof PANELS)[number];

export interface FigureSpec {
  input: string;
  output: string;
  panel: Panel;
  xLabel?: string;
  yLabel?: string;
  logX?: boolean;
}

interface PanelConfig {
  title: string;
  xLabel: string;
  yLabel: string;
  logX: boolean;
  columns: [keyof SeriesColumns, keyof SeriesColumns];
  labels: [string, string];
  marker: boolean;
}

interface SeriesColumns {
  x_base: number;
  x_ct: number;
  u_base: number;
  u_ct: number;
}

const PANEL_CONFIG: Record<Panel, PanelConfig> = {
  fig1a: {
    title: "FLOP usage, fixed trade price",
    xLabel: "cost per FLOP a",
    yLabel: "FLOPs used x*",
    logX: true,
    columns: ["x_base", "x_ct"],
    labels: ["no governance", "cap-and-trade"],
    marker: false,
  },
  fig1b: {
    title: "FLOP usage, price scaled with sqrt(a)",
    xLabel: "cost per FLOP a",
    yLabel: "FLOPs used x*",
    logX: true,
    columns: ["x_base", "x_ct"],
    labels: ["no governance", "cap-and-trade"],
    marker: false,
  },
  fig2a: {
    title: "Utility versus allowed FLOPs",
    xLabel: "allowed FLOPs F",
    yLabel: "utility",
    logX: false,
    columns: ["u_base", "u_ct"],
    labels: ["no governance", "cap-and-trade"],
    marker: true,
  },
  fig2b: {
    title: "Utility versus cost per FLOP",
    xLabel: "cost per FLOP a",
    yLabel: "utility",
    logX: true,
    columns: ["u_base", "u_ct"],
    labels: ["no governance", "cap-and-trade"],
    marker: false,
  },
};

export function buildSvg(data: FigureData, spec: FigureSpec): string {
  const config = PANEL_CONFIG[spec.panel];
  if (!config) {
    throw new CsvError(`unknown panel: ${spec.panel}`);
  }
  const [baseColumn, ctColumn] = config.columns;
  const series: Series[] = [
    {
      label: config.labels[0],
      points: data.rows.map((r) => [r.axis_value, r[baseColumn]] as [number, number]),
      stroke: "#1f4e99",
    },
    {
      label: config.labels[1],
      points: data.rows.map((r) => [r.axis_value, r[ctColumn]] as [number, number]),
      stroke: "#c23b22",
      dash: "6,4",
    },
  ];
  return renderChart({
    title: config.title,
    xLabel: spec.xLabel ?? config.xLabel,
    yLabel: spec.yLabel ?? config.yLabel,
    logX: spec.logX ?? config.logX,
    series,
    markerX: config.marker && data.crossover !== null ? data.crossover : undefined,
    markerLabel:
      config.marker && data.crossover !== null
        ? `breakeven F = ${Number(data.crossover.toPrecision(8))}`
        : undefined,
  });
}

export function render(spec: FigureSpec): string {
  const text = readFileSync(spec.input, "utf-8");
  const data = parseFigureCsv(text);
  const svg = buildSvg(data, spec);
  writeFileSync(spec.output, svg, "utf-8");
  return spec.output;
}
