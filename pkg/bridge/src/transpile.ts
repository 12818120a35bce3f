/** MiniCQ -> CadQuery transpilation for the mapped op subset. */

import { Arg, McqError, Script, parseScript } from "./mcq.js";
import { UnmappedOpError } from "./evalmcq.js";

const TRANSPILED_PLANES = new Set(["XY", "YZ", "ZX"]);
const CYL_PLANE: Record<string, string> = { Z: "XY", X: "YZ", Y: "ZX" };

function lit(arg: Arg): string {
  if (arg.kind === "num") return formatNumber(arg.value);
  if (arg.kind === "str") return JSON.stringify(arg.value);
  return arg.name;
}

function formatNumber(v: number): string {
  return Number.isInteger(v) ? String(v) : String(v);
}

function optLit(args: Arg[], i: number, fallback: string): string {
  return i < args.length ? lit(args[i]) : fallback;
}

/** Transpile MiniCQ source into a CadQuery program ending in `result = ...`.
 *
 * Throws UnmappedOpError listing every op without a CadQuery mapping.
 */
export function transpile(text: string): string {
  const script = parseScript(text);
  const unmapped = collectUnmapped(script);
  if (unmapped.length) throw new UnmappedOpError(unmapped);

  const lines: string[] = ["import cadquery as cq", ""];
  for (const stmt of script.statements) {
    const a = stmt.args;
    let rhs: string;
    switch (stmt.op) {
      case "workplane": {
        const plane = a[0].kind === "str" ? a[0].value : "";
        rhs = `cq.Workplane(${JSON.stringify(plane)}, origin=(${optLit(a, 1, "0")}, ${optLit(a, 2, "0")}, ${optLit(a, 3, "0")}))`;
        break;
      }
      case "rect":
        rhs = `${lit(a[0])}.pushPoints([(${optLit(a, 3, "0")}, ${optLit(a, 4, "0")})]).rect(${lit(a[1])}, ${lit(a[2])})`;
        break;
      case "circle":
        rhs = `${lit(a[0])}.pushPoints([(${optLit(a, 2, "0")}, ${optLit(a, 3, "0")})]).circle(${lit(a[1])})`;
        break;
      case "extrude":
        rhs = `${lit(a[0])}.extrude(${lit(a[1])})`;
        break;
      case "box":
        rhs = `cq.Workplane("XY", origin=(${optLit(a, 3, "0")}, ${optLit(a, 4, "0")}, ${optLit(a, 5, "0")})).box(${lit(a[0])}, ${lit(a[1])}, ${lit(a[2])})`;
        break;
      case "cylinder": {
        const axis = a.length > 2 && a[2].kind === "str" ? a[2].value : "Z";
        rhs = `cq.Workplane(${JSON.stringify(CYL_PLANE[axis])}, origin=(${optLit(a, 3, "0")}, ${optLit(a, 4, "0")}, ${optLit(a, 5, "0")})).cylinder(${lit(a[1])}, ${lit(a[0])})`;
        break;
      }
      case "sphere":
        rhs = `cq.Workplane("XY", origin=(${optLit(a, 1, "0")}, ${optLit(a, 2, "0")}, ${optLit(a, 3, "0")})).sphere(${lit(a[0])})`;
        break;
      case "union":
        rhs = `${lit(a[0])}.union(${lit(a[1])})`;
        break;
      case "cut":
        rhs = `${lit(a[0])}.cut(${lit(a[1])})`;
        break;
      case "intersect":
        rhs = `${lit(a[0])}.intersect(${lit(a[1])})`;
        break;
      case "translate":
        rhs = `${lit(a[0])}.translate((${lit(a[1])}, ${lit(a[2])}, ${lit(a[3])}))`;
        break;
      default:
        throw new UnmappedOpError([stmt.op]);
    }
    lines.push(`${stmt.target} = ${rhs}`);
  }
  lines.push(`result = ${script.result}`);
  lines.push("");
  return lines.join("\n");
}

function collectUnmapped(script: Script): string[] {
  const bad = new Set<string>();
  for (const stmt of script.statements) {
    switch (stmt.op) {
      case "workplane": {
        const plane = stmt.args[0].kind === "str" ? stmt.args[0].value : "?";
        if (!TRANSPILED_PLANES.has(plane)) bad.add(`workplane(${plane})`);
        const rot = stmt.args.length > 4 && stmt.args[4].kind === "num" ? stmt.args[4].value : 0;
        if (rot % 360 !== 0) bad.add("workplane(rot)");
        break;
      }
      case "rect": case "circle": case "extrude": case "box":
      case "cylinder": case "sphere": case "union": case "cut":
      case "intersect": case "translate":
        break;
      default:
        bad.add(stmt.op);
    }
  }
  return [...bad].sort();
}

/** Runnable CadQuery script: transpiled body + STL export and a JSON
 * report on stdout (consumed by the runner). */
export function executableScript(text: string, stlPath: string): string {
  const body = transpile(text);
  return (
    body +
    `
import json
from cadquery import exporters

exporters.export(result, ${JSON.stringify(stlPath)})
shape = result.val()
bb = shape.BoundingBox()
print(json.dumps({
    "success": True,
    "solid_count": result.solids().size(),
    "aabb": [bb.xmin, bb.ymin, bb.zmin, bb.xmax, bb.ymax, bb.zmax],
}))
`
  );
}
