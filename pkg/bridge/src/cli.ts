/** cq-bridge command line: run script directories, transpile single files. */

import { mkdirSync, readFileSync, readdirSync, statSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import { transpile } from "./transpile.js";
import { BridgeReport, ExecuteOptions, execute } from "./runner.js";

function usage(): never {
  console.error(
    "usage: cq-bridge run <dir|script> [--out DIR] [--timeout SECONDS]\n" +
    "                     [--backend native|cadquery] [--resolution N]\n" +
    "       cq-bridge transpile <file.mcq> [-o out.py]",
  );
  process.exit(1);
}

function parseFlags(argv: string[]): { positional: string[]; flags: Map<string, string> } {
  const positional: string[] = [];
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith("--") || arg === "-o") {
      const key = arg.replace(/^--?/, "");
      flags.set(key, argv[++i]);
    } else {
      positional.push(arg);
    }
  }
  return { positional, flags };
}

async function cmdRun(argv: string[]): Promise<number> {
  const { positional, flags } = parseFlags(argv);
  if (positional.length !== 1) usage();
  const target = positional[0];
  const outDir = flags.get("out") ?? "bridge-out";
  const options: ExecuteOptions = {
    timeoutMs: flags.has("timeout") ? Number(flags.get("timeout")) * 1000 : undefined,
    backend: flags.get("backend") as ExecuteOptions["backend"],
    resolution: flags.has("resolution") ? Number(flags.get("resolution")) : undefined,
  };

  const scripts: string[] = [];
  if (statSync(target).isDirectory()) {
    for (const name of readdirSync(target).sort()) {
      if (name.endsWith(".mcq") || name.endsWith(".py")) scripts.push(join(target, name));
    }
  } else {
    scripts.push(target);
  }
  if (!scripts.length) {
    console.error("no .mcq or .py scripts found");
    return 1;
  }

  mkdirSync(outDir, { recursive: true });
  const reports: BridgeReport[] = [];
  for (const script of scripts) {
    const report = await execute(script, outDir, options);
    reports.push(report);
    const stem = basename(script).replace(/\.(mcq|py)$/, "");
    writeFileSync(join(outDir, `${stem}.report.json`), JSON.stringify(report, null, 2));
    console.log(`${report.success ? "ok  " : "FAIL"} ${basename(script)}` +
                (report.error ? `  (${report.error})` : ""));
  }
  writeFileSync(
    join(outDir, "reports.jsonl"),
    reports.map((r) => JSON.stringify(r)).join("\n") + "\n",
  );
  const failures = reports.filter((r) => !r.success).length;
  console.log(`${reports.length - failures}/${reports.length} succeeded`);
  return failures ? 2 : 0;
}

function cmdTranspile(argv: string[]): number {
  const { positional, flags } = parseFlags(argv);
  if (positional.length !== 1) usage();
  const source = readFileSync(positional[0], "utf-8");
  const output = transpile(source);
  const outPath = flags.get("o");
  if (outPath) writeFileSync(outPath, output);
  else process.stdout.write(output);
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "run") return cmdRun(rest);
  if (command === "transpile") return cmdTranspile(rest);
  usage();
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err?.message ?? err}`);
    process.exit(1);
  },
);
