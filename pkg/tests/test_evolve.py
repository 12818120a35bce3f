import numpy as np
import pytest

from cadforge.errors import EmptyPoolError
from cadforge.evolve import (
    EvolveConfig,
    Pool,
    ShapeTuple,
    retrieve_neighbors,
    run,
    run_iteration,
    sample_parents,
)
from cadforge.kernel import try_evaluate
from cadforge.lang import parse
from cadforge.propose import MockProposer
from cadforge.seedlib import load_seed_pool
from cadforge.traceslice import to_script, trace

CFG = EvolveConfig(resolution=64, seed=7)


def small_pool(n=3):
    pool = Pool()
    specs = [
        ("base_plate", "a plate", "A flat rectangular plate with configurable thickness."),
        ("round_boss", "a boss", "A cylindrical boss rising from a round pad, one solid."),
        ("cut_block", "a block", "A block with a rectangular notch cut from one side."),
    ]
    codes = [
        "param w = 100\nbody = box(w, 70, 20)\nresult = body\n",
        "param r = 30\npad = cylinder(r, 16)\ntop = cylinder(r - 12, 40)\nbody = union(pad, top)\nresult = body\n",
        "param w = 90\nblk = box(w, 60, 40)\nnotch = box(30, 61, 20, 30, 0, 15)\nbody = cut(blk, notch)\nresult = body\n",
    ]
    for (name, ab, det), code in zip(specs[:n], codes[:n]):
        pool.add(ShapeTuple(name, ab, det, code, []), generation=0)
    return pool


# --- seeds ---

def test_seed_pool_loads_and_validates():
    pool = load_seed_pool()
    assert len(pool) >= 10
    for tid, tup in pool.tuples.items():
        g = parse(tup.code)
        script = to_script(trace(g, {}))
        solid, report = try_evaluate(script, 64)
        assert report.success, f"{tup.name}: {report.failure_reason}"
        assert max(abs(v) for v in report.aabb.min + report.aabb.max) <= 100.0


# --- parent sampling ---

def test_sample_parents_forced_replacement():
    pool = small_pool(1)
    rng = np.random.default_rng(0)
    picks = sample_parents(pool, 3, rng)
    assert len(picks) == 3
    assert set(picks) == set(pool.ids())


def test_sample_parents_without_replacement():
    pool = small_pool(3)
    rng = np.random.default_rng(0)
    picks = sample_parents(pool, 3, rng)
    assert sorted(picks) == sorted(pool.ids())


def test_sample_parents_empty():
    with pytest.raises(EmptyPoolError):
        sample_parents(Pool(), 2, np.random.default_rng(0))


def test_sample_parents_seeded():
    pool = small_pool(3)
    a = sample_parents(pool, 2, np.random.default_rng(5))
    b = sample_parents(pool, 2, np.random.default_rng(5))
    assert a == b


# --- retrieval ---

def test_retrieve_exact_match_first():
    pool = small_pool(3)
    query = pool.tuples[pool.ids()[1]].detailed
    ranked = retrieve_neighbors(pool, query, m=3)
    assert ranked[0] == pool.ids()[1]


def test_retrieve_m_larger_than_pool():
    pool = small_pool(2)
    assert len(retrieve_neighbors(pool, "anything", m=10)) == 2


def test_retrieve_disjoint_vocab_ties_by_id():
    pool = small_pool(3)
    ranked = retrieve_neighbors(pool, "zzz qqq xxx", m=3)
    assert ranked == sorted(pool.ids())


# --- iterations ---

def test_iteration_grows_pool_with_mock():
    pool = small_pool(3)
    before = len(pool)
    pool, stats = run_iteration(pool, MockProposer(seed=1), CFG, 0, np.random.default_rng(1))
    assert stats.partition_holds()
    assert stats.accepted >= 1
    assert len(pool) == before + stats.accepted
    for tid in pool.ids()[before:]:
        tup = pool.tuples[tid]
        assert all(p in pool.tuples for p in tup.parents)


def test_iteration_adversarial_verifier_rejects_all():
    pool = small_pool(3)
    proposer = MockProposer(seed=2, adversarial_verify=True)
    pool, stats = run_iteration(pool, proposer, CFG, 0, np.random.default_rng(2))
    assert stats.accepted == 0
    assert stats.repair_exhausted == stats.proposed
    assert stats.partition_holds()
    assert len(pool) == 3


def test_repair_path_fixes_disjoint_children():
    pool = small_pool(3)
    proposer = MockProposer(seed=3, invalid_every=1)  # every child starts broken
    pool, stats = run_iteration(pool, proposer, CFG, 0, np.random.default_rng(3))
    assert stats.repairs_used > 0
    assert stats.accepted >= 1
    assert stats.partition_holds()


def test_run_budget_zero():
    pool = small_pool(3)
    out, stats = run(pool, MockProposer(seed=4), CFG, budget_iterations=0)
    assert len(out) == 3
    assert stats == []


def test_run_deterministic():
    def final_state(seed):
        pool = small_pool(3)
        cfg = EvolveConfig(resolution=64, seed=seed)
        out, stats = run(pool, MockProposer(seed=9), cfg, budget_iterations=5)
        rows = [(tid, t.name, t.code, tuple(t.parents)) for tid, t in out.tuples.items()]
        return rows, [s.to_dict() for s in stats]

    assert final_state(11) == final_state(11)


def test_admission_soundness_recheck():
    pool = small_pool(3)
    out, _ = run(pool, MockProposer(seed=5), CFG, budget_iterations=4)
    for tid, tup in out.tuples.items():
        script = to_script(trace(parse(tup.code), {}))
        _, report = try_evaluate(script, 64)
        assert report.success
    assert out.lineage_acyclic()


def test_pool_round_trip(tmp_path):
    pool = small_pool(3)
    out, _ = run(pool, MockProposer(seed=6), CFG, budget_iterations=2)
    out.save(tmp_path)
    back = Pool.load(tmp_path)
    assert back.ids() == out.ids()
    assert back.generation_of == out.generation_of
    for tid in out.ids():
        assert back.tuples[tid].code == out.tuples[tid].code
