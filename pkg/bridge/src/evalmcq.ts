/** Native evaluator for the mapped MiniCQ subset.
 *
 * Independent of the Python kernel: fresh voxelization of the same
 * documented geometry semantics, used to cross-validate it. Ops outside
 * the mapped subset raise UnmappedOpError.
 */

import { Arg, McqError, Script, Statement, parseScript } from "./mcq.js";
import { Grid } from "./voxel.js";

export class UnmappedOpError extends Error {
  constructor(public ops: string[]) {
    super(`unmapped ops: ${ops.join(", ")}`);
  }
}

export class GeometryError extends Error {}

export const MAPPED_OPS = new Set([
  "workplane", "rect", "circle", "extrude",
  "box", "cylinder", "sphere",
  "union", "cut", "intersect", "translate",
]);

type Vec3 = [number, number, number];

const PLANE_BASES: Record<string, [Vec3, Vec3, Vec3]> = {
  XY: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
  YX: [[0, 1, 0], [1, 0, 0], [0, 0, -1]],
  YZ: [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
  ZY: [[0, 0, 1], [0, 1, 0], [-1, 0, 0]],
  ZX: [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
  XZ: [[1, 0, 0], [0, 0, 1], [0, -1, 0]],
};

interface Plane {
  kind: "plane";
  origin: Vec3;
  xdir: Vec3;
  ydir: Vec3;
  normal: Vec3;
}

type Loop =
  | { kind: "rect"; cx: number; cy: number; w: number; h: number }
  | { kind: "circle"; cx: number; cy: number; r: number };

interface Sketch {
  kind: "sketch";
  plane: Plane;
  loops: Loop[];
}

interface Solid {
  kind: "solid";
  grid: Grid;
}

type Value = Plane | Sketch | Solid;

function num(arg: Arg, what: string, line: number): number {
  if (arg.kind !== "num") throw new McqError(`${what} must be numeric`, line);
  return arg.value;
}

function str(arg: Arg, what: string, line: number): string {
  if (arg.kind !== "str") throw new McqError(`${what} must be a string`, line);
  return arg.value;
}

function optNum(args: Arg[], i: number, fallback: number, line: number): number {
  return i < args.length ? num(args[i], `argument ${i + 1}`, line) : fallback;
}

function inLoops(loops: Loop[], u: number, v: number): boolean {
  let inside = false;
  for (const loop of loops) {
    let hit: boolean;
    if (loop.kind === "rect") {
      hit = Math.abs(u - loop.cx) <= loop.w / 2 && Math.abs(v - loop.cy) <= loop.h / 2;
    } else {
      const du = u - loop.cx;
      const dv = v - loop.cy;
      hit = du * du + dv * dv <= loop.r * loop.r;
    }
    if (hit) inside = !inside;
  }
  return inside;
}

export function evaluateScript(script: Script, resolution = 128, half = 110): {
  grid: Grid;
  solidCount: number;
  volume: number;
  aabb: number[] | null;
} {
  const env = new Map<string, Value>();
  const blank = Grid.cube(resolution, half);

  const unmapped = script.statements
    .map((s) => s.op)
    .filter((op) => !MAPPED_OPS.has(op));
  if (unmapped.length) throw new UnmappedOpError([...new Set(unmapped)]);

  for (const stmt of script.statements) {
    env.set(stmt.target, execStatement(stmt, env, blank));
  }
  const result = env.get(script.result);
  if (!result || result.kind !== "solid") {
    throw new GeometryError("result is not a solid");
  }
  const grid = result.grid;
  return {
    grid,
    solidCount: grid.componentCount(),
    volume: grid.volume(),
    aabb: grid.aabb(),
  };
}

function ref(env: Map<string, Value>, arg: Arg, line: number): Value {
  if (arg.kind !== "ref") throw new McqError("expected a temporary reference", line);
  const value = env.get(arg.name);
  if (!value) throw new McqError(`undefined ${arg.name}`, line);
  return value;
}

function asSolid(value: Value, line: number): Solid {
  if (value.kind !== "solid") throw new McqError("expected a solid", line);
  return value;
}

function execStatement(stmt: Statement, env: Map<string, Value>, blank: Grid): Value {
  const { op, args, line } = stmt;
  switch (op) {
    case "workplane": {
      const name = str(args[0], "plane", line);
      const base = PLANE_BASES[name];
      if (!base) throw new McqError(`unknown plane ${name}`, line);
      const rot = optNum(args, 4, 0, line);
      if (rot % 360 !== 0) throw new UnmappedOpError(["workplane(rot)"]);
      return {
        kind: "plane",
        origin: [optNum(args, 1, 0, line), optNum(args, 2, 0, line), optNum(args, 3, 0, line)],
        xdir: base[0], ydir: base[1], normal: base[2],
      };
    }
    case "rect": {
      const sk = toSketch(ref(env, args[0], line), line);
      const w = num(args[1], "w", line);
      const h = num(args[2], "h", line);
      return {
        ...sk,
        loops: [...sk.loops, {
          kind: "rect", w, h,
          cx: optNum(args, 3, 0, line), cy: optNum(args, 4, 0, line),
        }],
      };
    }
    case "circle": {
      const sk = toSketch(ref(env, args[0], line), line);
      const r = num(args[1], "r", line);
      return {
        ...sk,
        loops: [...sk.loops, {
          kind: "circle", r,
          cx: optNum(args, 2, 0, line), cy: optNum(args, 3, 0, line),
        }],
      };
    }
    case "extrude":
      return extrude(toSketch(ref(env, args[0], line), line), num(args[1], "dist", line), blank, line);
    case "box":
      return primitive(blank, (x, y, z) => {
        const w = num(args[0], "w", line), d = num(args[1], "d", line), h = num(args[2], "h", line);
        const cx = optNum(args, 3, 0, line), cy = optNum(args, 4, 0, line), cz = optNum(args, 5, 0, line);
        return Math.abs(x - cx) <= w / 2 && Math.abs(y - cy) <= d / 2 && Math.abs(z - cz) <= h / 2;
      });
    case "cylinder": {
      const r = num(args[0], "r", line), h = num(args[1], "h", line);
      const axis = args.length > 2 ? str(args[2], "axis", line) : "Z";
      const cx = optNum(args, 3, 0, line), cy = optNum(args, 4, 0, line), cz = optNum(args, 5, 0, line);
      return primitive(blank, (x, y, z) => {
        const dx = x - cx, dy = y - cy, dz = z - cz;
        if (axis === "Z") return dx * dx + dy * dy <= r * r && Math.abs(dz) <= h / 2;
        if (axis === "Y") return dx * dx + dz * dz <= r * r && Math.abs(dy) <= h / 2;
        return dy * dy + dz * dz <= r * r && Math.abs(dx) <= h / 2;
      });
    }
    case "sphere": {
      const r = num(args[0], "r", line);
      const cx = optNum(args, 1, 0, line), cy = optNum(args, 2, 0, line), cz = optNum(args, 3, 0, line);
      return primitive(blank, (x, y, z) => {
        const dx = x - cx, dy = y - cy, dz = z - cz;
        return dx * dx + dy * dy + dz * dz <= r * r;
      });
    }
    case "union":
      return { kind: "solid", grid: asSolid(ref(env, args[0], line), line).grid.union(asSolid(ref(env, args[1], line), line).grid) };
    case "cut":
      return { kind: "solid", grid: asSolid(ref(env, args[0], line), line).grid.cut(asSolid(ref(env, args[1], line), line).grid) };
    case "intersect":
      return { kind: "solid", grid: asSolid(ref(env, args[0], line), line).grid.intersect(asSolid(ref(env, args[1], line), line).grid) };
    case "translate": {
      const solid = asSolid(ref(env, args[0], line), line);
      const sp = solid.grid.spacing;
      return {
        kind: "solid",
        grid: solid.grid.shift(
          Math.round(num(args[1], "dx", line) / sp),
          Math.round(num(args[2], "dy", line) / sp),
          Math.round(num(args[3], "dz", line) / sp),
        ),
      };
    }
    default:
      throw new UnmappedOpError([op]);
  }
}

function toSketch(value: Value, line: number): Sketch {
  if (value.kind === "plane") return { kind: "sketch", plane: value, loops: [] };
  if (value.kind === "sketch") return value;
  throw new McqError("expected a sketch or workplane", line);
}

function primitive(blank: Grid, member: (x: number, y: number, z: number) => boolean): Solid {
  const grid = blank.blank();
  const r = grid.resolution;
  for (let x = 0; x < r; x++) {
    const wx = grid.center(0, x);
    for (let y = 0; y < r; y++) {
      const wy = grid.center(1, y);
      for (let z = 0; z < r; z++) {
        if (member(wx, wy, grid.center(2, z))) grid.data[grid.index(x, y, z)] = 1;
      }
    }
  }
  return { kind: "solid", grid };
}

function extrude(sketch: Sketch, dist: number, blank: Grid, line: number): Solid {
  if (dist === 0) throw new GeometryError(`zero extrusion (line ${line})`);
  if (!sketch.loops.length) throw new GeometryError(`empty sketch (line ${line})`);
  const { origin, xdir, ydir, normal } = sketch.plane;
  const lo = Math.min(0, dist);
  const hi = Math.max(0, dist);
  const grid = blank.blank();
  const r = grid.resolution;
  let any = false;
  for (let x = 0; x < r; x++) {
    const px = grid.center(0, x) - origin[0];
    for (let y = 0; y < r; y++) {
      const py = grid.center(1, y) - origin[1];
      for (let z = 0; z < r; z++) {
        const pz = grid.center(2, z) - origin[2];
        const w = px * normal[0] + py * normal[1] + pz * normal[2];
        if (w < lo || w > hi) continue;
        const u = px * xdir[0] + py * xdir[1] + pz * xdir[2];
        const v = px * ydir[0] + py * ydir[1] + pz * ydir[2];
        if (inLoops(sketch.loops, u, v)) {
          grid.data[grid.index(x, y, z)] = 1;
          any = true;
        }
      }
    }
  }
  if (!any) throw new GeometryError(`empty extrusion (line ${line})`);
  return { kind: "solid", grid };
}

export function evaluateSource(text: string, resolution = 128, half = 110) {
  return evaluateScript(parseScript(text), resolution, half);
}
