/**
 * Parsers for the solver's CSV outputs.
 *
 * Two shapes exist: field CSVs carrying a `# n=<n> ell=<ell>` header line
 * followed by an n x n value block, and plain header CSVs (sweep, probes,
 * phase). Parsing is strict; a missing or non-numeric column fails loudly
 * with the column named, so a schema mismatch never renders garbage.
 */

export class SchemaError extends Error {}

export interface FieldData {
  n: number;
  ell: number;
  /** row-major, rows are the y index */
  values: number[][];
}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseField(text: string): FieldData {
  const lines = text.trim().split(/\r?\n/);
  const header = lines[0]?.match(/^#\s*n=(\d+)\s+ell=([^\s]+)\s*$/);
  if (!header) {
    throw new SchemaError("field CSV: missing '# n=<n> ell=<ell>' header line");
  }
  const n = Number(header[1]);
  const ell = Number(header[2]);
  if (!Number.isFinite(ell) || ell <= 0) {
    throw new SchemaError(`field CSV: bad ell value '${header[2]}'`);
  }
  const body = lines.slice(1);
  if (body.length !== n) {
    throw new SchemaError(`field CSV: expected ${n} rows, got ${body.length}`);
  }
  const values = body.map((line, i) => {
    const row = line.split(",").map(Number);
    if (row.length !== n || row.some((v) => !Number.isFinite(v))) {
      throw new SchemaError(`field CSV: row ${i} is not ${n} finite values`);
    }
    return row;
  });
  return { n, ell, values };
}

export function parseTable(text: string, required: string[]): Table {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length < 2) {
    throw new SchemaError("CSV has no data rows");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(`missing column '${col}' (found: ${columns.join(",")})`);
    }
  }
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`row ${i + 1} has ${cells.length} cells, expected ${columns.length}`);
    }
    return Object.fromEntries(columns.map((c, j) => [c, cells[j]]));
  });
  return { columns, rows };
}

/** Pull a numeric column, naming it on any parse failure. */
export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((row, i) => {
    const v = Number(row[name]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`column '${name}', row ${i + 1}: not a number ('${row[name]}')`);
    }
    return v;
  });
}
