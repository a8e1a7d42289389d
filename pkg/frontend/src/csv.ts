/** Strict CSV loading for the solver's artifact files.
 *
 * The renderer never recomputes model quantities: a file missing one of the
 * columns a figure needs is rejected loudly instead of being patched up.
 */

export interface Table {
  columns: string[];
  rows: string[][];
}

export class CsvError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty file: expected at least a header row");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(`row ${i + 2}: expected ${columns.length} cells, got ${cells.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

/** Pull named columns as numbers; blank cells become null. */
export function numericColumns(
  table: Table,
  names: string[],
): Record<string, (number | null)[]> {
  const missing = names.filter((n) => !table.columns.includes(n));
  if (missing.length > 0) {
    throw new CsvError(
      `missing column(s) ${missing.join(", ")}; file has [${table.columns.join(", ")}]`,
    );
  }
  const out: Record<string, (number | null)[]> = {};
  for (const name of names) {
    const idx = table.columns.indexOf(name);
    out[name] = table.rows.map((row, i) => {
      const cell = row[idx];
      if (cell === "") {
        return null;
      }
      const value = Number(cell);
      if (Number.isNaN(value)) {
        throw new CsvError(`row ${i + 2}, column ${name}: not a number: ${cell}`);
      }
      return value;
    });
  }
  return out;
}

/** Pull one column as raw strings (for labels). */
export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`missing column ${name}; file has [${table.columns.join(", ")}]`);
  }
  return table.rows.map((row) => row[idx]);
}
