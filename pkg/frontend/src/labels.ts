/**
 * Native label text codec: one object per line,
 * `class cx cy cz l w h theta`, floats at 9 significant digits, `#` lines
 * ignored. The number formatter reproduces C's %.9g byte for byte so a
 * re-encoded file matches what the augmentation CLI writes.
 */

export interface LabelRecord {
  label: string;
  cx: number;
  cy: number;
  cz: number;
  l: number;
  w: number;
  h: number;
  theta: number;
}

const FIELDS = ["cx", "cy", "cz", "l", "w", "h", "theta"] as const;

/**
 * Format like C's "%.9g": 9 significant digits, trailing zeros stripped,
 * scientific notation for decimal exponents < -4 or >= 9 with a signed,
 * zero-padded (>= 2 digit) exponent.
 */
export function formatG9(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`cannot format non-finite value ${value}`);
  }
  if (value === 0) {
    return Object.is(value, -0) ? "-0" : "0";
  }
  const sci = value.toExponential(8); // correctly rounded 9 significant digits
  const [mantissaRaw, expRaw] = sci.split("e");
  const exp = parseInt(expRaw, 10);
  const negative = mantissaRaw.startsWith("-");
  const digits = mantissaRaw.replace("-", "").replace(".", ""); // 9 digits
  const sign = negative ? "-" : "";

  if (exp < -4 || exp >= 9) {
    const mantissa = stripTrailingZeros(`${digits[0]}.${digits.slice(1)}`);
    const expSign = exp < 0 ? "-" : "+";
    const expDigits = String(Math.abs(exp)).padStart(2, "0");
    return `${sign}${mantissa}e${expSign}${expDigits}`;
  }
  let fixed: string;
  if (exp >= digits.length - 1) {
    fixed = digits + "0".repeat(exp - digits.length + 1);
  } else if (exp >= 0) {
    fixed = `${digits.slice(0, exp + 1)}.${digits.slice(exp + 1)}`;
  } else {
    fixed = `0.${"0".repeat(-exp - 1)}${digits}`;
  }
  return sign + stripTrailingZeros(fixed);
}

function stripTrailingZeros(text: string): string {
  if (!text.includes(".")) return text;
  return text.replace(/0+$/, "").replace(/\.$/, "");
}

/** Serialize records exactly the way the augmentation CLI does. */
export function formatLabels(records: LabelRecord[]): string {
  if (records.length === 0) return "";
  const lines = records.map(
    (r) => `${r.label} ${FIELDS.map((f) => formatG9(r[f])).join(" ")}`,
  );
  return lines.join("\n") + "\n";
}

/** Parse native label text; unknown classes are kept (the CLI filters). */
export function parseLabels(text: string): LabelRecord[] {
  const records: LabelRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const stripped = lines[i].trim();
    if (!stripped || stripped.startsWith("#")) continue;
    const fields = stripped.split(/\s+/);
    if (fields.length !== 8) {
      throw new Error(`label line ${i + 1}: expected 8 fields, got ${fields.length}`);
    }
    const values = fields.slice(1).map((v) => {
      const num = Number(v);
      if (!Number.isFinite(num)) {
        throw new Error(`label line ${i + 1}: bad number ${v}`);
      }
      return num;
    });
    records.push({
      label: fields[0],
      cx: values[0],
      cy: values[1],
      cz: values[2],
      l: values[3],
      w: values[4],
      h: values[5],
      theta: values[6],
    });
  }
  return records;
}
