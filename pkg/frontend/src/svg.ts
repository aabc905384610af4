/**
 * Minimal deterministic SVG line-chart builder.
 *
 * No plotting library: the charts here are two labeled series over one axis
 * pair, which a few hundred lines of path generation covers without native
 * canvas dependencies. Output is byte-stable for identical inputs (fixed
 * precision, no timestamps).
 */

export interface Series {
  label: string;
  points: Array<[number, number]>;
  stroke: string;
  dash?: string;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title: string;
  xLabel: string;
  yLabel: string;
  logX: boolean;
  series: Series[];
  /** Vertical reference line at this x value, with a label. */
  markerX?: number;
  markerLabel?: string;
}

const MARGIN = { top: 44, right: 24, bottom: 52, left: 72 };

function fmt(value: number): string {
  return Number(value.toPrecision(6)).toString();
}

type Scale = (value: number) => number;

function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

function logScale(domain: [number, number], range: [number, number]): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  return (v) => inner(Math.log10(v));
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / chosen) * chosen; t <= hi + 1e-12; t += chosen) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-12); Math.pow(10, e) <= hi * (1 + 1e-12); e += 1) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

export function renderChart(options: ChartOptions): string {
  const width = options.width ?? 640;
  const height = options.height ?? 440;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = options.series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = options.series.flatMap((s) => s.points.map((p) => p[1]));
  if (options.markerX !== undefined) {
    xs.push(options.markerX);
  }
  const xDomain: [number, number] = [Math.min(...xs), Math.max(...xs)];
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  const pad = (yHi - yLo || Math.abs(yHi) || 1) * 0.05;
  yLo -= pad;
  yHi += pad;

  const xScale = options.logX
    ? logScale(xDomain, [MARGIN.left, MARGIN.left + plotW])
    : linearScale(xDomain, [MARGIN.left, MARGIN.left + plotW]);
  const yScale = linearScale([yLo, yHi], [MARGIN.top + plotH, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">` +
      `${escapeXml(options.title)}</text>`,
  );

  const xTicks = options.logX ? decadeTicks(xDomain[0], xDomain[1]) : niceTicks(xDomain[0], xDomain[1]);
  const yTicks = niceTicks(yLo, yHi);
  const axisY = MARGIN.top + plotH;

  for (const tick of yTicks) {
    const y = yScale(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${fmt(tick)}</text>`,
    );
  }
  for (const tick of xTicks) {
    const x = xScale(tick);
    parts.push(
      `<line x1="${fmt(x)}" y1="${axisY}" x2="${fmt(x)}" y2="${axisY + 5}" stroke="black" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${axisY + 18}" text-anchor="middle" font-size="11">${fmt(tick)}</text>`,
    );
  }

  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}" stroke="black" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 14}" text-anchor="middle" font-size="12">` +
      `${escapeXml(options.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`,
  );

  if (options.markerX !== undefined) {
    const x = xScale(options.markerX);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${axisY}" ` +
        `stroke="#888888" stroke-width="1" stroke-dasharray="2,3" data-role="crossover" ` +
        `data-x="${fmt(options.markerX)}"/>`,
    );
    if (options.markerLabel) {
      parts.push(
        `<text x="${fmt(x + 4)}" y="${MARGIN.top + 14}" font-size="11" fill="#555555">` +
          `${escapeXml(options.markerLabel)}</text>`,
      );
    }
  }

  options.series.forEach((series, index) => {
    const path = series.points
      .map(([px, py], i) => `${i === 0 ? "M" : "L"}${fmt(xScale(px))},${fmt(yScale(py))}`)
      .join(" ");
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    parts.push(
      `<path d="${path}" fill="none" stroke="${series.stroke}" stroke-width="2"${dash} ` +
        `data-series="${escapeXml(series.label)}"/>`,
    );
    const legendY = MARGIN.top + 8 + index * 18;
    const legendX = MARGIN.left + plotW - 180;
    parts.push(
      `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 26}" y2="${legendY}" ` +
        `stroke="${series.stroke}" stroke-width="2"${dash}/>`,
    );
    parts.push(
      `<text x="${legendX + 32}" y="${legendY + 4}" font-size="12">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
