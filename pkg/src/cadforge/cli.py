"""Operator command line: pipeline stages wired over JSONL manifests.

Exit codes: 0 success, 2 partial failures (some scripts rejected),
1 fatal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import augment as augment_mod
from . import canon as canon_mod
from . import manifest
from .config import PipelineConfig, load_config
from .errors import CadforgeError, ConfigError
from .evolve import EvolveConfig, Pool, run
from .kernel import read_stl, to_stl, try_evaluate
from .lang import emit, parse
from .metrics import evaluate_pair, normalize_unit, iou as iou_pct, reward as reward_fn, summarize, voxelize_unit
from .propose import HttpProposer, MockProposer, ProposerConfig
from .qd import PenaltyConfig, sample_generator
from .render import render_grid, write_pgm
from .seedlib import SEED_DIR, load_seed_pool
from .traceslice import slice_trace, trace


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if getattr(args, "seed_override", None) is not None:
        for name in ("evolve", "sample", "augment", "metrics"):
            setattr(cfg.seeds, name, args.seed_override)
    return cfg


def _plan(args, description: str) -> bool:
    if getattr(args, "dry_run", False):
        print(f"[dry-run] {description}")
        return True
    return False


def _make_proposer(cfg: PipelineConfig, kind: str):
    kind = kind or cfg.proposer.kind
    if kind == "mock":
        return MockProposer(seed=cfg.seeds.evolve, invalid_every=cfg.proposer.mock_invalid_every)
    if kind == "http":
        return HttpProposer(
            ProposerConfig(
                endpoint=cfg.proposer.endpoint,
                model=cfg.proposer.model,
                api_key_env=cfg.proposer.api_key_env,
                timeout=cfg.proposer.timeout,
            )
        )
    raise ConfigError(f"unknown proposer kind {kind!r}")


def _read_scripts(directory):
    pairs = manifest.stage_inputs(directory)
    return [(sid, path.read_text()) for sid, path in pairs]


def cmd_evolve(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out)
    if _plan(args, f"evolve {cfg.evolve.budget} iterations into {out_dir}"):
        return 0
    if (out_dir / "pool.jsonl").exists():
        pool = Pool.load(out_dir)
        print(f"resuming from {len(pool)} tuples in {out_dir}")
    else:
        seeds_dir = cfg.paths.seeds or SEED_DIR
        pool = load_seed_pool(seeds_dir)
    proposer = _make_proposer(cfg, args.proposer)
    evolve_cfg = EvolveConfig(
        parents_k=cfg.evolve.parents_k,
        children_k=cfg.evolve.children_k,
        neighbors_m=cfg.evolve.neighbors_m,
        repairs=cfg.evolve.repairs,
        seed=cfg.seeds.evolve,
        resolution=cfg.kernel.resolution,
        domain=cfg.kernel.domain(),
        montage_views=7,
        acceptance_floor=cfg.evolve.acceptance_floor,
        floor_window=cfg.evolve.floor_window,
    )
    pool, stats = run(pool, proposer, evolve_cfg, budget_iterations=cfg.evolve.budget)
    out_dir.mkdir(parents=True, exist_ok=True)
    pool.save(out_dir)
    (out_dir / "stats.jsonl").write_text(
        "\n".join(json.dumps(s.to_dict()) for s in stats) + ("\n" if stats else "")
    )
    manifest.write_rows(
        out_dir,
        [
            {"id": tid, "path": f"code/{tid}.mcq", "stage": "evolve",
             "generation": pool.generation_of[tid], "valid": True}
            for tid in pool.ids()
        ],
    )
    print(f"pool size {len(pool)} after {len(stats)} iterations")
    return 0


def cmd_sample(args) -> int:
    cfg = _load_cfg(args)
    in_dir = Path(args.in_dir) if args.in_dir else Path(cfg.paths.seeds or SEED_DIR)
    out_dir = Path(args.out)
    if _plan(args, f"QD-sample generators from {in_dir} into {out_dir}"):
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    pcfg = PenaltyConfig(
        invalid_penalty=cfg.penalty.invalid_penalty,
        size_min=cfg.penalty.size_min,
        size_max=cfg.penalty.size_max,
        cube_half=cfg.penalty.cube_half,
        w_size=cfg.penalty.w_size,
        w_cube=cfg.penalty.w_cube,
        w_novelty=cfg.penalty.w_novelty,
        epsilon=cfg.penalty.epsilon,
    )
    rows = []
    failures = 0
    inputs = manifest.stage_inputs(in_dir)
    for sid, path in inputs:
        generator = parse(path.read_text())
        res = sample_generator(
            generator,
            n_samples=cfg.sample.n_samples,
            cfg=pcfg,
            budget=cfg.sample.budget,
            seed=cfg.seeds.sample,
            resolution=cfg.sample.resolution,
            domain=cfg.kernel.domain(),
        )
        record = {
            "generator": sid,
            "evals": res.evals,
            "accepted": res.accepted,
            "zero_accepted": res.zero_accepted,
            "vectors": [list(map(float, e[0])) for e in res.archive.entries],
            # Admission requires an exactly-zero penalty; recorded per entry.
            "penalties": [0.0] * len(res.archive.entries),
            "descriptors": [list(map(float, e[1])) for e in res.archive.entries],
        }
        (out_dir / f"{sid}.archive.json").write_text(json.dumps(record, indent=2))
        for i, (z, _, _) in enumerate(res.archive.entries):
            zmap = {p.name: float(v) for p, v in zip(generator.params, z)}
            script = slice_trace(
                trace(generator, zmap),
                resolution=cfg.kernel.resolution,
                domain=cfg.kernel.domain(),
            )
            name = f"{sid}__s{i:02d}.mcq"
            (out_dir / name).write_text(emit(script))
            rows.append({"id": f"{sid}__s{i:02d}", "path": name, "stage": "sample",
                         "generator": sid, "valid": True})
        if res.zero_accepted:
            failures += 1
            rows.append({"id": sid, "path": f"{sid}.archive.json", "stage": "sample",
                         "valid": False, "reject_reason": "zero accepted"})
    manifest.write_rows(out_dir, rows)
    print(f"sampled {len(inputs)} generators, {failures} with zero acceptances")
    return 2 if failures else 0


def cmd_slice(args) -> int:
    cfg = _load_cfg(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    if _plan(args, f"slice generators from {in_dir} at defaults into {out_dir}"):
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failures = 0
    for sid, path in manifest.stage_inputs(in_dir):
        try:
            generator = parse(path.read_text())
            script = slice_trace(
                trace(generator, {}),
                resolution=cfg.kernel.resolution,
                domain=cfg.kernel.domain(),
                keep_binds=args.keep_binds,
            )
        except CadforgeError as err:
            failures += 1
            rows.append({"id": sid, "path": "", "stage": "slice", "valid": False,
                         "reject_reason": str(err)})
            continue
        name = f"{sid}__sliced.mcq"
        (out_dir / name).write_text(emit(script))
        rows.append({"id": sid, "path": name, "stage": "slice", "valid": True})
    manifest.write_rows(out_dir, rows)
    print(f"sliced {len(rows) - failures} scripts, {failures} failures")
    return 2 if failures else 0


def cmd_canon(args) -> int:
    cfg = _load_cfg(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    if _plan(args, f"canonicalize scripts from {in_dir} into {out_dir}"):
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    ccfg = canon_mod.CanonConfig(
        resolution=cfg.kernel.resolution, domain=cfg.kernel.domain()
    )
    scripts = _read_scripts(in_dir)

    def one(item):
        sid, text = item
        out, report = canon_mod.canonicalize(parse(text), ccfg)
        return sid, out, report

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, scripts))

    def report_dict(report):
        return report.__dict__ | {
            "center_shift": list(report.center_shift),
            "post_scale_shift": list(report.post_scale_shift),
        }

    canonical = []
    reports = {}
    rows = []
    for sid, out, report in results:
        if out is None:
            rows.append({"id": sid, "path": "", "stage": "canon", "valid": False,
                         "reject_reason": report.reject_reason,
                         "canon_report": report_dict(report)})
            continue
        canonical.append((sid, emit(out)))
        reports[sid] = report_dict(report)

    filtered = canon_mod.length_filter(canonical, cfg=ccfg)
    survivors = filtered.kept + [(sid, text) for sid, text, _ in filtered.truncated]
    for sid, text, trunc_report in filtered.truncated:
        reports[sid] = report_dict(trunc_report) | {"truncated": True}
    for sid, reason in filtered.rejected:
        rows.append({"id": sid, "path": "", "stage": "canon", "valid": False,
                     "reject_reason": reason})
    deduped = canon_mod.dedup(survivors)
    for sid, text in deduped:
        name = f"{sid}.mcq"
        (out_dir / name).write_text(text)
        rows.append({"id": sid, "path": name, "stage": "canon", "valid": True,
                     "chars": len(text), "canon_report": reports.get(sid)})
    manifest.write_rows(out_dir, rows)
    rejected = sum(1 for r in rows if not r["valid"])
    print(f"canonical {len(deduped)} scripts, rejected {rejected}, "
          f"truncated {len(filtered.truncated)}")
    return 2 if rejected else 0


def cmd_augment(args) -> int:
    cfg = _load_cfg(args)
    in_dir = Path(args.in_dir)
    out_dir = Path(args.out)
    if _plan(args, f"augment scripts from {in_dir} into {out_dir}"):
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    scripts = [(sid, parse(text)) for sid, text in _read_scripts(in_dir)]
    variants, skipped = augment_mod.rotational_augment(scripts, seed=cfg.seeds.augment)
    rows = []
    for sid, ridx, script in variants:
        name = f"{sid}__rot{ridx:02d}.mcq"
        (out_dir / name).write_text(emit(script))
        rows.append({"id": f"{sid}__rot{ridx:02d}", "path": name, "stage": "augment",
                     "tag": f"aug:rot:{ridx}", "valid": True})
    for sid, reason in skipped:
        rows.append({"id": sid, "path": "", "stage": "augment", "valid": False,
                     "reject_reason": reason})
    swaps = 0
    if args.donors or cfg.paths.donors:
        donor_dir = Path(args.donors or cfg.paths.donors)
        donors = [parse(p.read_text()) for p in sorted(donor_dir.glob("*.mcq"))]
        for sid, script in scripts:
            swapped = augment_mod.sketch_swap(
                script, donors, seed=cfg.seeds.augment,
                resolution=cfg.kernel.resolution, domain=cfg.kernel.domain(),
            )
            if swapped is not None:
                name = f"{sid}__swap.mcq"
                (out_dir / name).write_text(emit(swapped))
                rows.append({"id": f"{sid}__swap", "path": name, "stage": "augment",
                             "tag": "aug:sketch", "valid": True})
                swaps += 1
    manifest.write_rows(out_dir, rows)
    print(f"augmented {len(variants)} rotations, {swaps} sketch swaps, "
          f"{len(skipped)} skipped")
    return 2 if skipped else 0


def cmd_render(args) -> int:
    cfg = _load_cfg(args)
    script_path = Path(args.script)
    if _plan(args, f"render {script_path} with {args.views or cfg.render.views} views"):
        return 0
    script = parse(script_path.read_text())
    solid, report = try_evaluate(script, cfg.kernel.resolution, cfg.kernel.domain())
    if solid is None:
        print(f"error: {report.failure_reason}", file=sys.stderr)
        return 1
    views = args.views or cfg.render.views
    grid = render_grid(solid, views, near_bright=cfg.render.near_bright)
    out = Path(args.out) if args.out else script_path.with_suffix(".pgm")
    out.write_bytes(write_pgm(grid))
    print(f"wrote {out} ({grid.shape[1]}x{grid.shape[0]})")
    return 0


def _mesh_from_file(path: Path, cfg: PipelineConfig):
    """(mesh, valid) from a .mcq script or binary .stl file."""
    if path.suffix == ".stl":
        return read_stl(path.read_bytes()), True
    script = parse(path.read_text())
    solid, report = try_evaluate(script, cfg.kernel.resolution, cfg.kernel.domain())
    if solid is None or not report.success or solid.is_empty():
        return None, False
    return to_stl(solid), True


def cmd_eval(args) -> int:
    cfg = _load_cfg(args)
    pred_dir = Path(args.pred)
    target_dir = Path(args.target)
    if _plan(args, f"evaluate {pred_dir} against {target_dir}"):
        return 0
    preds = {p.stem: p for p in sorted(pred_dir.iterdir())
             if p.suffix in (".mcq", ".stl")}
    targets = {p.stem: p for p in sorted(target_dir.iterdir())
               if p.suffix in (".mcq", ".stl")}
    shared = sorted(set(preds) & set(targets))
    if not shared:
        print("error: no shared prediction/target stems", file=sys.stderr)
        return 1

    def one(stem):
        target_mesh, target_ok = _mesh_from_file(targets[stem], cfg)
        if not target_ok:
            raise CadforgeError(f"target {stem} is invalid")
        try:
            pred_mesh, pred_ok = _mesh_from_file(preds[stem], cfg)
        except CadforgeError:
            pred_mesh, pred_ok = None, False
        report = evaluate_pair(
            pred_mesh, target_mesh, pred_valid=pred_ok,
            n_points=cfg.metrics.points, seed=cfg.seeds.metrics,
            iou_resolution=cfg.metrics.iou_resolution,
        )
        return stem, report

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, shared))
    out_dir = Path(args.out) if args.out else pred_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "metrics.jsonl").open("w") as fh:
        for stem, report in results:
            fh.write(json.dumps({"id": stem, "cd": report.cd, "iou": report.iou,
                                 "valid": report.valid}) + "\n")
    summary = summarize([r for _, r in results])
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))
    return 0


def cmd_reward(args) -> int:
    cfg = _load_cfg(args)
    if _plan(args, f"reward of {args.pred} against {args.target}"):
        return 0
    target_mesh, target_ok = _mesh_from_file(Path(args.target), cfg)
    if not target_ok:
        print("error: invalid target", file=sys.stderr)
        return 1
    try:
        pred_mesh, pred_ok = _mesh_from_file(Path(args.pred), cfg)
    except CadforgeError:
        pred_mesh, pred_ok = None, False
    if not pred_ok:
        print(json.dumps({"compiled": False, "reward": reward_fn(False)}))
        return 0
    a = voxelize_unit(normalize_unit(pred_mesh), cfg.metrics.iou_resolution)
    b = voxelize_unit(normalize_unit(target_mesh), cfg.metrics.iou_resolution)
    iou01 = iou_pct(a, b) / 100.0
    print(json.dumps({"compiled": True, "iou": iou01, "reward": reward_fn(True, iou01)}))
    return 0


def cmd_stats(args) -> int:
    pool_dir = Path(args.pool)
    stats_path = pool_dir / "stats.jsonl"
    if not stats_path.exists():
        print("error: no stats.jsonl in pool directory", file=sys.stderr)
        return 1
    rows = [json.loads(line) for line in stats_path.read_text().splitlines() if line.strip()]
    print(f"{'iter':>5s} {'proposed':>9s} {'invalid%':>9s} {'novel-acc%':>11s} {'pool-growth':>12s}")
    for row in rows:
        proposed = row["proposed"] or 1
        invalid_share = 100.0 * (row["invalid"] + row["repair_exhausted"]) / proposed
        novel = proposed - row["non_novel"]
        acc_share = 100.0 * row["accepted"] / novel if novel else 0.0
        print(f"{row['iteration']:>5d} {row['proposed']:>9d} {invalid_share:>9.1f} "
              f"{acc_share:>11.1f} {row['accepted']:>12d}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cadforge",
        description="MiniCQ CAD-program data pipeline",
    )
    parser.add_argument("--config", help="JSON pipeline config")
    parser.add_argument("--jobs", type=int, default=1, help="stage-internal parallelism")
    parser.add_argument("--seed-override", type=int, default=None)
    parser.add_argument("--dry-run", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="grow a generator pool with a proposer")
    p.add_argument("--out", required=True)
    p.add_argument("--proposer", choices=["mock", "http"], default=None)
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("sample", help="QD-sample parameter vectors per generator")
    p.add_argument("--in", dest="in_dir", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("slice", help="trace and slice generators at defaults")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-binds", action="store_true")
    p.set_defaults(fn=cmd_slice)

    p = sub.add_parser("canon", help="canonicalize a script corpus")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_canon)

    p = sub.add_parser("augment", help="rotational and sketch augmentation")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--donors", default=None)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("render", help="render a script to a multi-view PGM grid")
    p.add_argument("script")
    p.add_argument("--views", type=int, choices=[7, 8], default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("eval", help="CD/IoU/IR of predictions vs targets")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("reward", help="scalar reward for one prediction")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(fn=cmd_reward)

    p = sub.add_parser("stats", help="novelty/invalidity rates of a pool run")
    p.add_argument("--pool", required=True)
    p.set_defaults(fn=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except CadforgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
