import numpy as np
import pytest

from dpl.dyadic import DyadicCube, HaarIndex, e_set, haar_indices
from dpl.grid import GridFunction
from dpl.lab import (
    CarlesonSequence,
    bellman_b,
    bellman_lmwce_check,
    bilinear_embedding_check,
    carleson_sum,
    half_region_sums,
    induction_in_scales_check,
    mmte_suite,
    mwce_instance,
    proposition_suite,
    region_sums,
    sample_domain,
    scaling_experiment,
    weighted_carleson_embedding_check,
    wp1_instance,
)
from dpl.weights import cascade_weight, log_symbol, power_weight, reciprocal

STEP = GridFunction(1, 1, [1.0, 3.0])
ROOT1 = HaarIndex(DyadicCube(1, 0, (0,)), 1)


def brute_carleson(alpha, base, kernel=lambda idx: 1.0):
    outer = e_set(base)
    total = sum(alpha[idx] * kernel(idx) for idx in haar_indices(alpha.dim, alpha.depth)
                if outer.contains(e_set(idx)))
    return total / float(base.volume)


def test_carleson_sum_trivial():
    alpha = CarlesonSequence.zeros(2, 3)
    base = HaarIndex(DyadicCube(2, 1, (1, 0)), 2)
    assert carleson_sum(alpha, base) == 0.0
    alpha[base] = 1.0
    assert carleson_sum(alpha, base) == pytest.approx(1 / float(base.volume))


def test_carleson_sum_matches_brute_force(rng):
    for n, depth in ((1, 4), (2, 3), (3, 2)):
        alpha = CarlesonSequence.random(n, depth, rng)
        kern = {idx: float(rng.uniform(0.5, 2)) for idx in haar_indices(n, depth)}
        for base in haar_indices(n, depth):
            assert carleson_sum(alpha, base) == pytest.approx(brute_carleson(alpha, base), rel=1e-12)
            assert carleson_sum(alpha, base, kern.__getitem__) == pytest.approx(
                brute_carleson(alpha, base, kern.__getitem__), rel=1e-12)


def test_half_regions_add_up(rng):
    alpha = CarlesonSequence.random(2, 3, rng)
    full = region_sums(alpha.levels, 2)
    h1, h2 = half_region_sums(alpha.levels, 2)
    for k in range(3):
        assert np.allclose(h1[k] + h2[k], full[k] - alpha.levels[k])


def test_carleson_sequence_rejects_negative():
    with pytest.raises(ValueError):
        CarlesonSequence(1, 1, [np.array([[-1.0]])])


@pytest.mark.parametrize("which,ratio,companion", [
    ("wp1", 3 / 4, 3 / 4), ("wp2", 3 / 4, 3 / 4), ("wp3", 1.0, 1.0), ("wp4", 3 / 4, None),
])
def test_propositions_on_step_weight(which, ratio, companion):
    rep = proposition_suite(STEP, which)
    assert rep.empirical_constant == pytest.approx(ratio, abs=1e-12)
    if companion is not None:
        assert rep.params["companion_constant"] == pytest.approx(companion, abs=1e-12)
    assert rep.params["characteristic"] == pytest.approx(4 / 3)


@pytest.mark.parametrize("which", ["wp2", "wp3", "wp4"])
def test_constant_weight_gives_zero(which):
    for n in (1, 2):
        rep = proposition_suite(GridFunction.constant(n, 3, 2.0), which, "anisotropic")
        assert rep.empirical_constant == 0.0
        assert all(np.all(x == 0) for x in rep.lhs)


@pytest.mark.parametrize("which", ["wp1", "wp2", "wp3", "wp4"])
def test_scale_invariance(which):
    w = cascade_weight(2, 3, 0.5, 4)
    a = proposition_suite(w, which).empirical_constant
    b = proposition_suite(w * 7.0, which).empirical_constant
    assert b == pytest.approx(a, rel=1e-10)


def test_mmte_step_weight_by_hand():
    rep = mmte_suite(STEP)
    for key, val in {"mmte1": 3 / 4, "mmte2": 1.0, "mmte3": 3 / 4, "mmte4": 3 / 4, "mmte5": 3 / 4}.items():
        assert rep.params[key] == pytest.approx(val, abs=1e-12)
    assert rep.passed  # the chain is an equality here


def test_mmte_chain_on_cascades():
    for seed in range(4):
        rep = mmte_suite(cascade_weight(2, 4, 0.6, seed))
        assert rep.passed, rep.violations
        assert rep.params["chain_relative_gap"] <= 1e-12
    assert mmte_suite(GridFunction.constant(2, 3)).empirical_constant == 0.0


def test_weighted_embedding_trivial_cases(rng):
    f = GridFunction.random(1, 2, rng)
    rep = weighted_carleson_embedding_check(CarlesonSequence.zeros(1, 2), GridFunction.constant(1, 2), f)
    assert rep.empirical_constant == 0.0
    alpha = CarlesonSequence.zeros(1, 2)
    alpha[ROOT1] = 1.0
    rep = weighted_carleson_embedding_check(alpha, GridFunction.constant(1, 2), GridFunction.constant(1, 2))
    assert rep.params["A"] == pytest.approx(1.0)
    assert rep.empirical_constant == pytest.approx(1.0)


def test_weighted_embedding_cascade_sweep(rng):
    w = cascade_weight(2, 4, 0.5, 1)
    alpha = CarlesonSequence.from_symbol(GridFunction.random(2, 4, rng))
    fs = [GridFunction.random(2, 4, rng) for _ in range(50)]
    rep = weighted_carleson_embedding_check(alpha, w, fs)
    assert np.isfinite(rep.empirical_constant) and rep.empirical_constant <= 4.0


def test_bilinear_trivial_and_sweep(rng):
    one = GridFunction.constant(1, 1)
    alpha = CarlesonSequence.zeros(1, 1)
    assert bilinear_embedding_check(alpha, one, one, one, one).empirical_constant == 0.0
    alpha[ROOT1] = 1.0
    rep = bilinear_embedding_check(alpha, one, one, one, one, "PMBE")
    assert rep.params["A"] == pytest.approx(1.0) and rep.empirical_constant == pytest.approx(1.0)
    w = cascade_weight(2, 3, 0.5, 2)
    alpha = CarlesonSequence.from_symbol(GridFunction.random(2, 3, rng))
    fs = [GridFunction.random(2, 3, rng) for _ in range(50)]
    gs = [GridFunction.random(2, 3, rng) for _ in range(50)]
    for variant in ("PMBE", "MBE"):
        rep = bilinear_embedding_check(alpha, w, reciprocal(w), fs, gs, variant)
        assert np.isfinite(rep.empirical_constant)
        assert "hypothesis_note" in rep.params


def test_bellman_function_edge_cases():
    # equal endpoints with no jump: zero defect
    F, f, u, Y = 0.8, 0.5, 0.6, 0.3
    b = bellman_b(F, f, u, Y)
    assert b - (b + b) / 2 == 0.0
    # boundary f^2 = F u, Y = u still keeps B nonnegative
    F, u = 0.5, 0.8
    assert bellman_b(F, np.sqrt(F * u), u, u) >= 0
    pts = sample_domain(np.random.default_rng(0), 1000)
    assert np.all(pts[:, 1] ** 2 <= pts[:, 0] * pts[:, 2]) and np.all(pts[:, 3] <= pts[:, 2])


def test_bellman_sampling_run():
    rep = bellman_lmwce_check(100_000, seed=11)
    assert rep.passed, rep.violations
    assert rep.params["min_convexity_slack"] >= 0
    with pytest.raises(ValueError):
        bellman_lmwce_check(0, 0)


def test_induction_wp1_holds_and_fault_injection_fails(rng):
    w = cascade_weight(2, 4, 0.5, 3)
    alpha = CarlesonSequence.random(2, 4, rng)
    inst = wp1_instance(w, alpha)
    root = HaarIndex(DyadicCube(2, 0, (0, 0)), 1)
    rep = induction_in_scales_check(inst, root)
    assert rep.passed and rep.params["slack"] > 0
    inst.c = [c * 1e6 for c in inst.c]
    assert not induction_in_scales_check(inst, root).passed
    inst.c = [np.zeros_like(c) for c in inst.c]
    assert induction_in_scales_check(inst, root).empirical_constant == 0.0


def test_induction_mwce_with_bellman_nodes(rng):
    w = cascade_weight(1, 5, 0.6, 2)
    f = GridFunction.random(1, 5, rng, positive=True)
    inst = mwce_instance(w, f, CarlesonSequence.random(1, 5, rng))
    for root in (ROOT1, HaarIndex(DyadicCube(1, 2, (3,)), 1)):
        rep = induction_in_scales_check(inst, root)
        assert rep.passed, rep.violations
        assert rep.params["min_convexity_defect"] >= -1e-12


def test_induction_rejects_inconsistent_data(rng):
    inst = wp1_instance(cascade_weight(1, 3, 0.5, 0), CarlesonSequence.random(1, 3, rng))
    inst.m = inst.m[:-1]
    with pytest.raises(ValueError):
        induction_in_scales_check(inst, ROOT1)


def test_scaling_degenerate_family_and_ratios():
    one = GridFunction.constant(1, 4)
    with pytest.raises(ValueError):
        scaling_experiment([(0.0, one)], log_symbol(1, 4), "paraproduct")
    fam = [(a, power_weight(1, 5, a)) for a in (0.0, 0.5, -0.5)]
    for kind in ("paraproduct", "martingale", "square"):
        table = scaling_experiment(fam, log_symbol(1, 5), kind)
        assert all(np.isfinite(r["ratio"]) and r["ratio"] > 0 for r in table.rows)
    with pytest.raises(ValueError):
        scaling_experiment(fam, None, "paraproduct")
