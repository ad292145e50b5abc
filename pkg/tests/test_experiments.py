from hopcirc.experiments import (energy_trace, oracle_crosscheck, orthonormal_patterns,
                                 retrieval_sweep, run_experiment, s5_harness)
from hopcirc.problems import SplitMix64

import pytest


def test_orthonormal_patterns():
    xi = orthonormal_patterns(8, 4, 24, SplitMix64(1))
    for a in range(4):
        for b in range(4):
            dot = sum(float(xi[i, a]) * float(xi[i, b]) for i in range(8))
            assert abs(dot - (a == b)) < 1e-6
    with pytest.raises(ValueError):
        orthonormal_patterns(2, 3, 24, SplitMix64(1))


def test_retrieval_sweep_small():
    res = retrieval_sweep(trials=5, seed=2)
    assert len(res.rows) == 15 and res.columns[0] == "beta"
    assert set(res.summary) >= {"1.0", "8.0", "32.0", "max_dist_to_reference"}
    # the F_24 update agrees closely with the extended-precision update
    assert res.summary["max_dist_to_reference"] < 1e-5
    assert res.summary["32.0"]["within_1e-2"] == 5


def test_energy_trace_emits_flag():
    res = energy_trace(steps=4, seed=1)
    assert res.columns[-1] == "monotone" and len(res.rows) == 5
    assert isinstance(res.summary["monotone"], bool)


def test_s5_harness_band():
    res = s5_harness(count=100, seed=0)
    assert 0.35 <= res.summary["accuracy"] <= 0.65
    assert res.summary["abstain"] == 0


def test_crosscheck_small_passes():
    res = oracle_crosscheck(count=100, max_tree_nodes=6, seed=3)
    assert res.passed and all(r[2] == 0 for r in res.rows)


def test_run_experiment_deterministic():
    a = run_experiment("energy_trace", steps=3, seed=5)
    b = run_experiment("energy_trace", steps=3, seed=5, beta=None)
    assert a.rows == b.rows
    with pytest.raises(ValueError):
        run_experiment("nope")
