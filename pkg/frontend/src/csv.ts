/**
 * Parser for the sweep CSV datasets.
 *
 * The files carry leading `#` comment lines (tool version/config hash, and
 * for the budget-sweep panel a `# crossover axis_value=...` marker), then an
 * exact six-column header. The renderer computes nothing itself: everything
 * it draws, including the crossover position, comes from this file.
 */

export const EXPECTED_HEADER = ["axis_value", "x_base", "x_ct", "u_base", "u_ct", "b"];

export interface FigureRow {
  axis_value: number;
  x_base: number;
  x_ct: number;
  u_base: number;
  u_ct: number;
  b: number;
}

export interface FigureData {
  rows: FigureRow[];
  crossover: number | null;
  comments: string[];
}

export class CsvError extends Error {}

const CROSSOVER_PREFIX = "# crossover axis_value=";

export function parseFigureCsv(text: string): FigureData {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  const comments = lines.filter((line) => line.startsWith("#"));
  const data = lines.filter((line) => !line.startsWith("#"));

  if (data.length === 0) {
    throw new CsvError("no header row");
  }
  const header = data[0].split(",");
  for (const column of EXPECTED_HEADER) {
    if (!header.includes(column)) {
      throw new CsvError(`missing column: ${column}`);
    }
  }
  for (const column of header) {
    if (!EXPECTED_HEADER.includes(column)) {
      throw new CsvError(`unexpected column: ${column}`);
    }
  }

  const body = data.slice(1);
  if (body.length === 0) {
    throw new CsvError("no data rows");
  }

  const rows: FigureRow[] = body.map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new CsvError(`row ${i + 1} has ${cells.length} cells, expected ${header.length}`);
    }
    const record: Record<string, number> = {};
    header.forEach((column, j) => {
      const value = Number(cells[j]);
      if (!Number.isFinite(value)) {
        throw new CsvError(`row ${i + 1} column ${column} is not a finite number: ${cells[j]}`);
      }
      record[column] = value;
    });
    return record as unknown as FigureRow;
  });

  let crossover: number | null = null;
  for (const comment of comments) {
    if (comment.startsWith(CROSSOVER_PREFIX)) {
      const value = Number(comment.slice(CROSSOVER_PREFIX.length));
      if (!Number.isFinite(value)) {
        throw new CsvError(`unreadable crossover marker: ${comment}`);
      }
      crossover = value;
    }
  }

  return { rows, crossover, comments };
}
