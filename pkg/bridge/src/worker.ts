/** Per-script worker: evaluates one MiniCQ file natively and writes the STL.
 *
 * Prints a JSON report to stdout; structured failures exit 0 with
 * success=false, so the parent only treats crashes/timeouts as abnormal.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { GeometryError, UnmappedOpError, evaluateSource } from "./evalmcq.js";
import { McqError } from "./mcq.js";
import { gridToStl } from "./stl.js";

function main(): number {
  const [scriptPath, stlPath, resolutionArg, halfArg] = process.argv.slice(2);
  const resolution = Number(resolutionArg ?? 128);
  const half = Number(halfArg ?? 110);
  try {
    const text = readFileSync(scriptPath, "utf-8");
    const out = evaluateSource(text, resolution, half);
    const report = {
      success: out.solidCount === 1 && out.volume > 0,
      solid_count: out.solidCount,
      volume: out.volume,
      aabb: out.aabb,
      error: out.solidCount === 1 && out.volume > 0
        ? null
        : `solid_count=${out.solidCount}, volume=${out.volume}`,
    };
    if (out.volume > 0) {
      writeFileSync(stlPath, gridToStl(out.grid));
    }
    console.log(JSON.stringify(report));
    return 0;
  } catch (err) {
    const kind =
      err instanceof UnmappedOpError ? "unmapped"
      : err instanceof McqError ? "parse"
      : err instanceof GeometryError ? "geometry"
      : "internal";
    console.log(JSON.stringify({
      success: false,
      solid_count: 0,
      aabb: null,
      error: `${kind}: ${(err as Error).message}`,
    }));
    return 0;
  }
}

process.exit(main());
