/** Subprocess execution with wall-clock timeouts.
 *
 * Every script runs isolated in its own child process; crashes, hangs and
 * structured failures all come back as BridgeReport values, never as
 * exceptions in the caller.
 */

import { spawn } from "node:child_process";
import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { basename, dirname, extname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import { executableScript } from "./transpile.js";
import { UnmappedOpError } from "./evalmcq.js";

export interface BridgeReport {
  version: 1;
  script: string;
  backend: "native" | "cadquery";
  success: boolean;
  solid_count: number;
  aabb: number[] | null;
  stl_path: string | null;
  error: string | null;
  elapsed_s: number;
}

export interface ExecuteOptions {
  timeoutMs?: number;        // default 30 s wall clock
  backend?: "native" | "cadquery";
  resolution?: number;
  half?: number;
  python?: string;
}

function workerPath(): string {
  const here = dirname(fileURLToPath(import.meta.url));
  const sibling = join(here, "worker.js");
  if (existsSync(sibling)) return sibling;
  // Source-tree execution (tests): use the built worker.
  return join(here, "..", "dist", "worker.js");
}

const WORKER = workerPath();

interface SpawnOutcome {
  status: "ok" | "crash" | "timeout";
  stdout: string;
  stderr: string;
  code: number | null;
}

function runChild(cmd: string, args: string[], timeoutMs: number): Promise<SpawnOutcome> {
  return new Promise((resolvePromise) => {
    const child = spawn(cmd, args, { stdio: ["ignore", "pipe", "pipe"] });
    let stdout = "";
    let stderr = "";
    let timedOut = false;
    const timer = setTimeout(() => {
      timedOut = true;
      child.kill("SIGKILL");
    }, timeoutMs);
    child.stdout.on("data", (d) => (stdout += d));
    child.stderr.on("data", (d) => (stderr += d));
    child.on("error", (err) => {
      clearTimeout(timer);
      resolvePromise({ status: "crash", stdout, stderr: String(err), code: null });
    });
    child.on("close", (code) => {
      clearTimeout(timer);
      if (timedOut) resolvePromise({ status: "timeout", stdout, stderr, code });
      else if (code === 0) resolvePromise({ status: "ok", stdout, stderr, code });
      else resolvePromise({ status: "crash", stdout, stderr, code });
    });
  });
}

function failed(script: string, backend: "native" | "cadquery", error: string,
                elapsed: number): BridgeReport {
  return {
    version: 1, script, backend, success: false, solid_count: 0,
    aabb: null, stl_path: null, error, elapsed_s: elapsed,
  };
}

/** Execute one script (.mcq or .py) to STL + report under outDir. */
export async function execute(
  scriptPath: string,
  outDir: string,
  options: ExecuteOptions = {},
): Promise<BridgeReport> {
  const timeoutMs = options.timeoutMs ?? 30_000;
  const backend = options.backend ?? (extname(scriptPath) === ".py" ? "cadquery" : "native");
  const started = Date.now();
  mkdirSync(outDir, { recursive: true });
  const stem = basename(scriptPath).replace(/\.(mcq|py)$/, "");
  const stlPath = resolve(join(outDir, `${stem}.stl`));

  let cmd: string;
  let args: string[];
  if (backend === "native") {
    if (extname(scriptPath) !== ".mcq") {
      return failed(scriptPath, backend, "native backend runs .mcq scripts only",
                    (Date.now() - started) / 1000);
    }
    cmd = process.execPath;
    args = [WORKER, resolve(scriptPath), stlPath,
            String(options.resolution ?? 128), String(options.half ?? 110)];
  } else {
    let pyPath = resolve(scriptPath);
    if (extname(scriptPath) === ".mcq") {
      // Transpile to a self-reporting CadQuery program first.
      const { readFileSync } = await import("node:fs");
      try {
        const source = executableScript(readFileSync(scriptPath, "utf-8"), stlPath);
        pyPath = join(outDir, `${stem}.cq.py`);
        writeFileSync(pyPath, source);
      } catch (err) {
        const reason = err instanceof UnmappedOpError
          ? `unmapped: ${err.ops.join(", ")}` : String(err);
        return failed(scriptPath, backend, reason, (Date.now() - started) / 1000);
      }
    }
    cmd = options.python ?? "python3";
    args = [pyPath];
  }

  const outcome = await runChild(cmd, args, timeoutMs);
  const elapsed = (Date.now() - started) / 1000;
  if (outcome.status === "timeout") {
    return failed(scriptPath, backend, `timeout after ${timeoutMs / 1000}s`, elapsed);
  }
  if (outcome.status === "crash") {
    const tail = outcome.stderr.trim().split("\n").slice(-3).join(" | ");
    return failed(scriptPath, backend, `exit ${outcome.code}: ${tail}`, elapsed);
  }
  let parsed: { success: boolean; solid_count: number; aabb: number[] | null; error?: string | null };
  try {
    const lastLine = outcome.stdout.trim().split("\n").pop() ?? "";
    parsed = JSON.parse(lastLine);
  } catch {
    return failed(scriptPath, backend, "worker produced no report", elapsed);
  }
  return {
    version: 1,
    script: scriptPath,
    backend,
    success: Boolean(parsed.success),
    solid_count: parsed.solid_count ?? 0,
    aabb: parsed.aabb ?? null,
    stl_path: parsed.success && existsSync(stlPath) ? stlPath : null,
    error: parsed.error ?? null,
    elapsed_s: elapsed,
  };
}
