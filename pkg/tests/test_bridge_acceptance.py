"""Secondary-component acceptance: bridge STL output cross-validates the
kernel, and the runner converts crashes and hangs into structured reports.

Skipped entirely when the bridge has not been built (the primary suite
must pass without it)."""

import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from cadforge.kernel import Aabb, evaluate, iou_grids, read_stl, voxelize_mesh
from cadforge.lang import parse

BRIDGE_CLI = Path(__file__).resolve().parents[1] / "bridge" / "dist" / "cli.js"
DOMAIN = Aabb.cube(110.0)

pytestmark = pytest.mark.skipif(
    not BRIDGE_CLI.exists() or shutil.which("node") is None,
    reason="bridge not built",
)


def mapped_corpus(n=22, seed=13):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        kind = i % 5
        a = int(rng.integers(30, 70))
        b = int(rng.integers(25, 60))
        c = int(rng.integers(20, 50))
        ox, oy = int(rng.integers(-10, 11)), int(rng.integers(-10, 11))
        if kind == 0:
            src = f"s = box({2 * a}, {a + b}, {c}, {ox}, {oy}, 0)\nresult = s\n"
        elif kind == 1:
            axis = ("X", "Y", "Z")[i % 3]
            src = (
                f"s1 = box({2 * a}, {2 * a}, {b}, 0, 0, 0)\n"
                f's2 = cylinder({a // 2}, {2 * b + 20}, "{axis}", 0, 0, 0)\n'
                "s3 = union(s1, s2)\nresult = s3\n"
            )
        elif kind == 2:
            src = (
                f"s1 = sphere({a}, {ox}, {oy}, 0)\n"
                f"s2 = box({a}, {a}, {a}, {ox}, {oy}, {a // 2})\n"
                "s3 = cut(s1, s2)\nresult = s3\n"
            )
        elif kind == 3:
            src = (
                f'wp1 = workplane("XY", {ox}, {oy}, {-c // 2})\n'
                f"wp2 = rect(wp1, {2 * a}, {a + b})\n"
                f"wp3 = circle(wp2, {a // 2})\n"
                f"wp4 = extrude(wp3, {c})\n"
                "result = wp4\n"
            )
        else:
            src = (
                f"s1 = cylinder({a}, {b})\n"
                f"s2 = translate(s1, {ox}, {oy}, 0)\n"
                f"s3 = box({a}, {a}, {2 * b}, {ox}, {oy}, 0)\n"
                "s4 = union(s2, s3)\nresult = s4\n"
            )
        out.append((f"m{i:03d}", src))
    return out


def run_bridge(target: Path, out_dir: Path, extra=()):
    cmd = ["node", str(BRIDGE_CLI), "run", str(target), "--out", str(out_dir), *extra]
    return subprocess.run(cmd, capture_output=True, text=True, timeout=600)


def test_bridge_cross_validation(tmp_path):
    scripts_dir = tmp_path / "scripts"
    scripts_dir.mkdir()
    corpus = mapped_corpus()
    assert len(corpus) >= 20
    for sid, src in corpus:
        (scripts_dir / f"{sid}.mcq").write_text(src)
    out_dir = tmp_path / "out"
    proc = run_bridge(scripts_dir, out_dir, ("--resolution", "128"))
    assert proc.returncode in (0, 2), proc.stderr

    checked = 0
    worst = 1.0
    for sid, src in corpus:
        report = json.loads((out_dir / f"{sid}.report.json").read_text())
        assert report["success"], f"{sid}: {report['error']}"
        mesh = read_stl(Path(report["stl_path"]).read_bytes())
        bridged = voxelize_mesh(mesh, 128, DOMAIN)
        ours, eval_report = evaluate(parse(src), 128, DOMAIN)
        assert eval_report.success
        score = iou_grids(bridged, ours)
        worst = min(worst, score)
        assert score >= 0.95, f"{sid}: IoU {score:.4f}"
        checked += 1
    assert checked >= 20
    print(f"\n[PASS] S01 bridge cross-validation: {checked} mapped scripts, "
          f"IoU >= 0.95 (worst {worst:.4f})")


def test_bridge_crash_and_hang_reports(tmp_path):
    crash = tmp_path / "crash.py"
    crash.write_text("raise RuntimeError('synthetic kernel crash')\n")
    hang = tmp_path / "hang.py"
    hang.write_text("while True:\n    pass\n")
    out_dir = tmp_path / "out"
    proc = run_bridge(tmp_path, out_dir, ("--timeout", "2"))
    assert proc.returncode == 2
    crash_report = json.loads((out_dir / "crash.report.json").read_text())
    hang_report = json.loads((out_dir / "hang.report.json").read_text())
    assert not crash_report["success"]
    assert "crash" in crash_report["error"] or "exit" in crash_report["error"]
    assert not hang_report["success"]
    assert "timeout" in hang_report["error"]
    print("\n[PASS] S02 bridge converts crashing and hanging scripts into "
          "structured failure reports")


def test_bridge_transpile_round_trip(tmp_path):
    src = 'wp1 = workplane("XY")\nwp2 = rect(wp1, 40, 30)\nwp3 = extrude(wp2, 12)\nresult = wp3\n'
    script = tmp_path / "part.mcq"
    script.write_text(src)
    proc = subprocess.run(
        ["node", str(BRIDGE_CLI), "transpile", str(script)],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "import cadquery as cq" in proc.stdout
    assert "result = wp3" in proc.stdout

    bad = tmp_path / "bad.mcq"
    bad.write_text("a = box(10, 10, 10)\nb = scale(a, 2)\nresult = b\n")
    proc2 = subprocess.run(
        ["node", str(BRIDGE_CLI), "transpile", str(bad)],
        capture_output=True, text=True, timeout=60,
    )
    assert proc2.returncode != 0
    assert "scale" in proc2.stderr
