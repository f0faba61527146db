import math

import pytest

import robustplay as rp


def test_domains_and_oracles():
    d = rp.Domain.l2ball([0.0, 0.0], 1.0)
    assert rp.linear_argmax(d, [3.0, 4.0]) == pytest.approx([0.6, 0.8])
    assert rp.project(rp.Domain.simplex(3), [0.9, 0.9, -0.5]) == pytest.approx([0.5, 0.5, 0.0])
    assert rp.contains(rp.Domain.budget(2, 1.0), [0.5, 0.5])
    assert rp.strength("fpl") == "weak"
    assert rp.strength("ogd") == "strong"


def test_matching_pennies_rool():
    f = rp.Objective.bilinear([[1.0, -1.0], [-1.0, 1.0]])
    s = rp.Domain.simplex(2)
    sol = rp.rool(f, s, s, "ogd", "ogd", T=5000, benchmark=0.0)
    assert sol["mean"] == pytest.approx([0.5, 0.5], abs=0.02)
    assert sol["gap_evaluated"] <= sol["gap_bound"] + 1e-6
    assert len(sol["gap_trace"]) == 5000


def test_weak_learner_refused_in_strong_slot():
    f = rp.Objective.bilinear([[1.0, 0.0], [0.0, 1.0]])
    s = rp.Domain.simplex(2)
    with pytest.raises(ValueError):
        rp.biased_dual(f, s, s, "fpl", T=100)


def test_counterexample_and_concatenation():
    r = rp.counterexample_demo(2000, [1, 2])
    assert r["corrected_hits"] == 2
    zero, ones = rp.concatenation_check(10000, 1)
    assert zero == pytest.approx(0.5, rel=0.05)
    assert ones == pytest.approx(0.75, rel=0.05)


def test_applications_run():
    r = rp.robust_routing(n=20, p=0.2, T=200, benchmark_rounds=2000)
    assert r["gap_trace"][-1] < r["gap_trace"][9]
    occ = rp.random_mdp_occupancy(4, 2, 0.9, seed=3)
    assert sum(occ) == pytest.approx(10.0, abs=1e-8)
    m = rp.robust_mdp(3, 2, 0.8, 0.1, T=500)
    assert all(math.isclose(sum(q), 1.0) for q in m["policy"])
