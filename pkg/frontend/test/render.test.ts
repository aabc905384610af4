import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { parseFigureCsv, CsvError, EXPECTED_HEADER } from "../src/csv.js";
import { buildSvg, render } from "../src/render.js";
import { main } from "../src/cli.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const FIG1A = join(FIXTURES, "fig1a.csv");
const FIG2A = join(FIXTURES, "fig2a.csv");
const BREAKEVEN = 8.2842712474619;

function tempOut(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "render-figure-")), name);
}

describe("parseFigureCsv", () => {
  it("reads the frozen usage dataset", () => {
    const data = parseFigureCsv(readFileSync(FIG1A, "utf-8"));
    expect(data.rows.length).toBeGreaterThanOrEqual(50);
    expect(data.crossover).toBeNull();
  });

  it("cap-and-trade usage sits strictly below the baseline on every row", () => {
    const data = parseFigureCsv(readFileSync(FIG1A, "utf-8"));
    for (const row of data.rows) {
      expect(row.x_ct).toBeLessThan(row.x_base);
    }
  });

  it("extracts the crossover marker from the budget sweep", () => {
    const data = parseFigureCsv(readFileSync(FIG2A, "utf-8"));
    expect(data.crossover).not.toBeNull();
    expect(Math.abs((data.crossover as number) - BREAKEVEN)).toBeLessThan(1e-3);
  });

  it("rejects an empty body", () => {
    expect(() => parseFigureCsv(`# comment\n${EXPECTED_HEADER.join(",")}\n`)).toThrow(
      /no data rows/,
    );
  });

  it("names a missing column", () => {
    const text = "axis_value,x_base,u_base,u_ct,b\n1,2,3,4,5\n";
    expect(() => parseFigureCsv(text)).toThrow(/missing column: x_ct/);
  });

  it("rejects non-numeric cells", () => {
    const text = `${EXPECTED_HEADER.join(",")}\n1,2,three,4,5,6\n`;
    expect(() => parseFigureCsv(text)).toThrow(CsvError);
  });
});

describe("buildSvg", () => {
  it("draws two labeled series for the usage panel", () => {
    const data = parseFigureCsv(readFileSync(FIG1A, "utf-8"));
    const svg = buildSvg(data, { input: FIG1A, output: "unused.svg", panel: "fig1a" });
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain('data-series="no governance"');
    expect(svg).toContain('data-series="cap-and-trade"');
  });

  it("places the crossover marker within 1e-3 of the breakeven budget", () => {
    const data = parseFigureCsv(readFileSync(FIG2A, "utf-8"));
    const svg = buildSvg(data, { input: FIG2A, output: "unused.svg", panel: "fig2a" });
    const match = svg.match(/data-role="crossover" data-x="([^"]+)"/);
    expect(match).not.toBeNull();
    expect(Math.abs(Number(match![1]) - BREAKEVEN)).toBeLessThan(1e-3);
  });

  it("is deterministic for identical input", () => {
    const data = parseFigureCsv(readFileSync(FIG2A, "utf-8"));
    const spec = { input: FIG2A, output: "unused.svg", panel: "fig2a" as const };
    expect(buildSvg(data, spec)).toEqual(buildSvg(data, spec));
  });
});

describe("render", () => {
  it("writes an image file for each fixture panel", () => {
    for (const [input, panel] of [
      [FIG1A, "fig1a"],
      [FIG2A, "fig2a"],
    ] as const) {
      const output = tempOut(`${panel}.svg`);
      render({ input, output, panel });
      expect(existsSync(output)).toBe(true);
      const content = readFileSync(output, "utf-8");
      expect(content).toMatch(/^<svg/);
      expect(content).toContain("</svg>");
    }
  });
});

describe("cli", () => {
  it("renders via flags and exits zero", () => {
    const output = tempOut("fig1a.svg");
    expect(main(["--input", FIG1A, "--panel", "fig1a", "--output", output])).toBe(0);
    expect(existsSync(output)).toBe(true);
  });

  it("rejects an unknown panel", () => {
    expect(main(["--input", FIG1A, "--panel", "fig9z", "--output", "x.svg"])).toBe(2);
  });

  it("reports schema mismatches as dataset errors", () => {
    const broken = tempOut("broken.csv");
    writeFileSync(broken, "axis_value,x_base\n1,2\n", "utf-8");
    expect(main(["--input", broken, "--panel", "fig1a", "--output", tempOut("x.svg")])).toBe(3);
  });

  it("fails on a missing input file", () => {
    expect(main(["--input", "/nonexistent.csv", "--panel", "fig1a", "--output", "x.svg"])).toBe(1);
  });
});
