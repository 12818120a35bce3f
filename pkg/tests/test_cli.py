import json
from pathlib import Path

import pytest

from cadforge.cli import main
from cadforge.config import load_config
from cadforge.errors import ConfigError
from cadforge.render import read_pgm


@pytest.fixture
def config_file(tmp_path):
    cfg = {
        "kernel": {"resolution": 64},
        "evolve": {"budget": 2, "children_k": 2},
        "sample": {"n_samples": 3, "budget": 400},
        "metrics": {"points": 512},
        "seeds": {"evolve": 3, "sample": 1, "augment": 2, "metrics": 0},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.fixture
def script_dir(tmp_path):
    d = tmp_path / "scripts"
    d.mkdir()
    (d / "block.mcq").write_text("a = box(120, 90, 60)\nresult = a\n")
    (d / "tube.mcq").write_text(
        "o = cylinder(70, 110)\ni = cylinder(50, 130)\nb = cut(o, i)\nresult = b\n"
    )
    return d


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kernel": {"resolutionn": 64}}))
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "kernel.resolutionn" in str(err.value)


def test_config_defaults(tmp_path):
    path = tmp_path / "ok.json"
    path.write_text(json.dumps({"render": {"views": 7}}))
    cfg = load_config(path)
    assert cfg.render.views == 7
    assert cfg.kernel.resolution == 128


def test_render_command(tmp_path, config_file, script_dir):
    out = tmp_path / "grid.pgm"
    rc = main(["--config", config_file, "render", str(script_dir / "block.mcq"),
               "--views", "8", "-o", str(out)])
    assert rc == 0
    img = read_pgm(out.read_bytes())
    assert img.shape == (476, 952)


def test_canon_command_and_manifest(tmp_path, config_file, script_dir):
    out = tmp_path / "canon"
    rc = main(["--config", config_file, "canon", "--in", str(script_dir),
               "--out", str(out)])
    assert rc in (0, 2)
    rows = [json.loads(l) for l in (out / "manifest.jsonl").read_text().splitlines()]
    valid = [r for r in rows if r["valid"]]
    assert valid
    for row in valid:
        text = (out / row["path"]).read_text()
        assert len(text) <= 3000
        assert row["stage"] == "canon"


def test_canon_rerun_byte_identical(tmp_path, config_file, script_dir):
    out = tmp_path / "canon"
    main(["--config", config_file, "canon", "--in", str(script_dir), "--out", str(out)])
    first = {p.name: p.read_bytes() for p in out.glob("*.mcq")}
    main(["--config", config_file, "canon", "--in", str(script_dir), "--out", str(out)])
    second = {p.name: p.read_bytes() for p in out.glob("*.mcq")}
    assert first == second


def test_augment_command(tmp_path, config_file, script_dir):
    canon_dir = tmp_path / "canon"
    main(["--config", config_file, "canon", "--in", str(script_dir), "--out", str(canon_dir)])
    out = tmp_path / "aug"
    rc = main(["--config", config_file, "augment", "--in", str(canon_dir),
               "--out", str(out)])
    assert rc == 0
    rows = [json.loads(l) for l in (out / "manifest.jsonl").read_text().splitlines()]
    assert all(r["tag"].startswith("aug:rot:") for r in rows if r["valid"])


def test_slice_command(tmp_path, config_file):
    gen_dir = tmp_path / "gens"
    gen_dir.mkdir()
    (gen_dir / "g1.mcq").write_text(
        "param r = 40\nbase = cylinder(r, 30)\ndead = box(5, 5, 5, 90, 90, 90)\n"
        "out = union(base, dead)\nresult = base\n"
    )
    out = tmp_path / "sliced"
    rc = main(["--config", config_file, "slice", "--in", str(gen_dir), "--out", str(out)])
    assert rc == 0
    text = (out / "g1__sliced.mcq").read_text()
    assert "box" not in text  # dead chain removed


def test_evolve_and_stats_commands(tmp_path, config_file, capsys):
    out = tmp_path / "pool"
    rc = main(["--config", config_file, "evolve", "--out", str(out), "--proposer", "mock"])
    assert rc == 0
    assert (out / "pool.jsonl").exists()
    assert (out / "stats.jsonl").exists()
    rc = main(["stats", "--pool", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "proposed" in captured.out


def test_eval_and_reward_commands(tmp_path, config_file, script_dir, capsys):
    rc = main(["--config", config_file, "eval", "--pred", str(script_dir),
               "--target", str(script_dir), "--out", str(tmp_path / "metrics")])
    assert rc == 0
    summary = json.loads((tmp_path / "metrics" / "summary.json").read_text())
    assert summary["ir"] == 0.0
    assert summary["median_cd"] < 0.5
    capsys.readouterr()
    rc = main(["--config", config_file, "reward", "--pred", str(script_dir / "block.mcq"),
               "--target", str(script_dir / "block.mcq")])
    assert rc == 0
    record = json.loads(capsys.readouterr().out.strip())
    assert record["compiled"] is True
    assert record["reward"] > 9.5


def test_reward_invalid_pred(tmp_path, config_file, script_dir, capsys):
    bad = tmp_path / "bad.mcq"
    bad.write_text("a = box(10, 10, 10, -60, 0, 0)\nb = box(10, 10, 10, 60, 0, 0)\nc = union(a, b)\nresult = c\n")
    rc = main(["--config", config_file, "reward", "--pred", str(bad),
               "--target", str(script_dir / "block.mcq")])
    assert rc == 0
    record = json.loads(capsys.readouterr().out.strip())
    assert record["compiled"] is False
    assert record["reward"] == -10.0


def test_sample_command(tmp_path, config_file):
    gen_dir = tmp_path / "gens"
    gen_dir.mkdir()
    (gen_dir / "boxgen.mcq").write_text(
        "param a = 100\nparam b = 100\nparam c = 100\nbody = box(a, b, c)\nresult = body\n"
    )
    out = tmp_path / "sampled"
    rc = main(["--config", config_file, "sample", "--in", str(gen_dir), "--out", str(out)])
    assert rc == 0
    archive = json.loads((out / "boxgen.archive.json").read_text())
    assert archive["accepted"] == 3
    scripts = sorted(out.glob("boxgen__s*.mcq"))
    assert len(scripts) == 3


def test_dry_run_writes_nothing(tmp_path, config_file, script_dir):
    out = tmp_path / "nothing"
    rc = main(["--config", config_file, "--dry-run", "canon", "--in", str(script_dir),
               "--out", str(out)])
    assert rc == 0
    assert not out.exists()


def test_evolve_resume(tmp_path, config_file):
    out = tmp_path / "pool"
    main(["--config", config_file, "evolve", "--out", str(out), "--proposer", "mock"])
    import json as _json

    n1 = len((out / "pool.jsonl").read_text().splitlines())
    rc = main(["--config", config_file, "evolve", "--out", str(out), "--proposer", "mock"])
    assert rc == 0
    n2 = len((out / "pool.jsonl").read_text().splitlines())
    assert n2 > n1  # resumed run keeps prior tuples and grows further
