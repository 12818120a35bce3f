/** Minimal parser for flat MiniCQ scripts (the bridge's mapped subset).
 *
 * A script is a sequence of `target = op(arg, ...)` statements, optional
 * numeric binds `name = <number>`, `#` comments, and one final
 * `result = <name>` line.
 */

export type Arg =
  | { kind: "num"; value: number }
  | { kind: "str"; value: string }
  | { kind: "ref"; name: string };

export interface Statement {
  target: string;
  op: string;
  args: Arg[];
  line: number;
}

export interface Script {
  statements: Statement[];
  binds: Map<string, number>;
  result: string;
}

export class McqError extends Error {
  constructor(message: string, public line?: number) {
    super(line === undefined ? message : `${message} (line ${line})`);
  }
}

/** op -> [requiredArgs, maxArgs]; string slots are validated per op below. */
const ARITY: Record<string, [number, number]> = {
  workplane: [1, 5],
  rect: [3, 5],
  circle: [2, 4],
  extrude: [2, 2],
  box: [3, 6],
  cylinder: [2, 6],
  sphere: [1, 4],
  union: [2, 2],
  cut: [2, 2],
  intersect: [2, 2],
  translate: [4, 4],
  // Remaining language ops are recognized so the bridge can report them as
  // unmapped rather than as parse errors.
  move_to: [3, 3], line_to: [3, 3], arc_to: [5, 5], close: [1, 1],
  polygon: [3, 5], rect_array: [5, 5], polar_array: [2, 3],
  revolve: [3, 3], loft: [2, 2], sweep: [4, 4], rotate: [3, 3],
  mirror: [2, 2], hole: [8, 8], shell: [2, 2], fillet: [2, 2],
  chamfer: [2, 2], scale: [2, 2],
};

const NAME = /^[A-Za-z_][A-Za-z0-9_]*$/;
const NUMBER = /^-?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

function splitArgs(body: string, line: number): string[] {
  if (body.trim() === "") return [];
  const parts = body.split(",").map((s) => s.trim());
  if (parts.some((p) => p === "")) throw new McqError("empty argument", line);
  return parts;
}

export function parseScript(text: string): Script {
  const statements: Statement[] = [];
  const binds = new Map<string, number>();
  const defined = new Set<string>();
  let result: string | null = null;

  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const lineNo = i + 1;
    const raw = lines[i].split("#", 1)[0].trim();
    if (!raw) continue;
    if (result !== null) throw new McqError("statements after result line", lineNo);

    const eq = raw.indexOf("=");
    if (eq < 0) throw new McqError("expected an assignment", lineNo);
    const target = raw.slice(0, eq).trim();
    const rhs = raw.slice(eq + 1).trim();
    if (!NAME.test(target)) throw new McqError(`bad identifier ${target}`, lineNo);

    if (target === "result") {
      if (!NAME.test(rhs)) throw new McqError("result must name a temporary", lineNo);
      if (!defined.has(rhs)) throw new McqError(`result names undefined ${rhs}`, lineNo);
      result = rhs;
      continue;
    }
    if (defined.has(target)) throw new McqError(`duplicate definition ${target}`, lineNo);

    const call = rhs.match(/^([a-z_][a-z0-9_]*)\((.*)\)$/s);
    if (!call) {
      if (!NUMBER.test(rhs)) throw new McqError("expected a call or numeric bind", lineNo);
      binds.set(target, Number(rhs));
      defined.add(target);
      continue;
    }
    const op = call[1];
    const arity = ARITY[op];
    if (!arity) throw new McqError(`unknown op ${op}`, lineNo);
    const rawArgs = splitArgs(call[2], lineNo);
    if (rawArgs.length < arity[0] || rawArgs.length > arity[1]) {
      throw new McqError(`${op} takes ${arity[0]}..${arity[1]} args`, lineNo);
    }
    const args: Arg[] = rawArgs.map((token) => {
      if (token.startsWith('"') && token.endsWith('"')) {
        return { kind: "str", value: token.slice(1, -1) };
      }
      if (NUMBER.test(token)) return { kind: "num", value: Number(token) };
      if (NAME.test(token)) {
        if (binds.has(token)) return { kind: "num", value: binds.get(token)! };
        if (!defined.has(token)) throw new McqError(`use of undefined ${token}`, lineNo);
        return { kind: "ref", name: token };
      }
      throw new McqError(`bad argument ${token}`, lineNo);
    });
    statements.push({ target, op, args, line: lineNo });
    defined.add(target);
  }
  if (result === null) throw new McqError("missing result line");
  return { statements, binds, result };
}
