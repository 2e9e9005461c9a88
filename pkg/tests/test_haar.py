import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpl.dyadic import DyadicCube, HaarIndex, e_set, haar_indices
from dpl.grid import GridFunction
from dpl.haar import (
    TensorHaarIndex,
    analyze,
    average_from_coefficients,
    bessel_sum,
    orthogonal_haar,
    orthogonal_norm_slack,
    parseval_defect,
    project_wq,
    signatures,
    synthesize,
    tensor_haar,
    weighted_wilson_haar,
    wilson_haar,
    wilson_matrix,
)

ROOT1 = HaarIndex(DyadicCube(1, 0, (0,)), 1)


def test_classical_haar_in_one_dim():
    assert list(wilson_haar(ROOT1, 1).values) == [-1.0, 1.0]


def test_two_dim_j3_by_hand():
    h = wilson_haar(HaarIndex(DyadicCube(2, 0, (0, 0)), 3), 1)
    r2 = math.sqrt(2)
    assert np.allclose(h.values, [[0, -r2], [0, r2]])


def test_depth_too_shallow():
    with pytest.raises(ValueError):
        wilson_haar(HaarIndex(DyadicCube(1, 2, (0,)), 1), 2)


@pytest.mark.parametrize("n,depth", [(1, 4), (2, 3), (3, 2)])
def test_normalized_mean_zero_supported(n, depth):
    for idx in haar_indices(n, depth):
        h = wilson_haar(idx, depth)
        assert h.integral() == pytest.approx(0.0, abs=1e-14)
        assert h.norm() == pytest.approx(1.0, abs=1e-14)
        inside = np.zeros_like(h.values, dtype=bool)
        inside[e_set(idx).slices(depth)] = True
        assert not np.any(h.values[~inside])


def test_weighted_haar_two_cell_weight():
    w = GridFunction(1, 1, [1.0, 3.0])
    h = weighted_wilson_haar(ROOT1, w)
    # w(E) = 2, w(E1) = 1/2, w(E2) = 3/2
    assert h.values[0] == pytest.approx(-math.sqrt(3) / math.sqrt(2), abs=1e-15)
    assert h.values[1] == pytest.approx(math.sqrt(1 / 3) / math.sqrt(2), abs=1e-15)
    assert h.norm(w) == pytest.approx(1.0, abs=1e-15)
    assert h.inner(GridFunction.constant(1, 1), w) == pytest.approx(0.0, abs=1e-15)


def test_weighted_haar_reduces_to_plain():
    w = GridFunction.constant(2, 2)
    for idx in haar_indices(2, 2):
        assert np.allclose(weighted_wilson_haar(idx, w).values, wilson_haar(idx, 2).values, atol=1e-15)


def test_orthogonal_haar_hand_case():
    H, A = orthogonal_haar(ROOT1, GridFunction(1, 1, [1.0, 3.0]))
    assert A == pytest.approx(0.5)
    assert list(H.values) == pytest.approx([-1.5, 0.5])
    H1, A1 = orthogonal_haar(ROOT1, GridFunction.constant(1, 1))
    assert A1 == 0.0
    assert list(H1.values) == pytest.approx([-1.0, 1.0])


def test_orthogonal_system_pairwise_and_norm_bound(rng):
    w = GridFunction.random(2, 3, rng, positive=True)
    idxs = list(haar_indices(2, 3))
    vecs = []
    for idx in idxs:
        H, _ = orthogonal_haar(idx, w)
        vecs.append(H.values.reshape(-1) * np.sqrt(w.flat))
    G = np.array(vecs) @ np.array(vecs).T * w.cell_volume
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-12
    bounds = np.array([float(idx.volume) * w.average(e_set(idx)) for idx in idxs])
    assert np.all(np.diag(G) <= bounds * (1 + 1e-12))
    assert orthogonal_norm_slack(w) >= 0


def test_bessel_sum_matches_loop(rng):
    w = GridFunction.random(2, 2, rng, positive=True)
    g = GridFunction.random(2, 2, rng)
    direct = 0.0
    for idx in haar_indices(2, 2):
        H, _ = orthogonal_haar(idx, w)
        ip = (g.values * np.sqrt(w.values) * H.values).sum() * g.cell_volume
        direct += ip**2 / (float(idx.volume) * w.average(e_set(idx)))
    assert bessel_sum(g, w) == pytest.approx(direct, rel=1e-12)
    assert bessel_sum(g, w) <= g.norm() ** 2


@pytest.mark.parametrize("n,depth", [(1, 4), (2, 4), (3, 3)])
def test_gram_identity(n, depth):
    _, H = wilson_matrix(n, depth)
    G = H.T @ H * 2.0 ** (-n * depth)
    assert np.abs(G - np.eye(G.shape[0])).max() < 1e-12


def test_analyze_constant_and_single_haar():
    t = analyze(GridFunction.constant(2, 3, 2.5))
    assert t.mean == 2.5 and t.sum_squares() == 0.0
    idx = HaarIndex(DyadicCube(2, 1, (1, 0)), 2)
    t = analyze(wilson_haar(idx, 3))
    assert t[idx] == pytest.approx(1.0)
    assert t.sum_squares() == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1), st.booleans())
def test_roundtrip_and_parseval(n, depth, seed, weighted):
    rng = np.random.default_rng(seed)
    f = GridFunction.random(n, depth, rng)
    w = GridFunction.random(n, depth, rng, positive=True) if weighted else None
    back = synthesize(analyze(f, w))
    assert np.abs(back.values - f.values).max() < 1e-12
    assert parseval_defect(f, w) < 1e-10


@pytest.mark.parametrize("n,depth", [(1, 4), (2, 3), (3, 2)])
def test_average_from_coefficients(rng, n, depth):
    f = GridFunction.random(n, depth, rng)
    w = GridFunction.random(n, depth, rng, positive=True)
    for weight in (None, w):
        t = analyze(f, weight)
        for idx in haar_indices(n, depth):
            rect = e_set(idx)
            if weight is None:
                direct = f.average(rect)
            else:
                direct = (f * w).integral(rect) / w.integral(rect)
            assert average_from_coefficients(t, idx) == pytest.approx(direct, abs=1e-12)
    assert average_from_coefficients(analyze(GridFunction.constant(n, depth, 4.0)), idx) == pytest.approx(4.0)


def test_tensor_haar_forms():
    q = DyadicCube(2, 0, (0, 0))
    h = tensor_haar(TensorHaarIndex(q, (0, 1)), 1)
    assert np.allclose(h.values, [[-1, -1], [1, 1]])
    h1 = tensor_haar(TensorHaarIndex(DyadicCube(1, 0, (0,)), (0,)), 1)
    assert list(h1.values) == [-1.0, 1.0]
    with pytest.raises(ValueError):
        TensorHaarIndex(q, (1, 1))
    hs = np.array([tensor_haar(TensorHaarIndex(q, s), 2).flat for s in signatures(2)])
    assert np.allclose(hs @ hs.T / 16, np.eye(3))


def test_projection_two_bases_agree(rng):
    for _ in range(100):
        n = int(rng.integers(1, 4))
        depth = int(rng.integers(1, 4))
        f = GridFunction.random(n, depth, rng)
        level = int(rng.integers(0, depth))
        cube = DyadicCube(n, level, tuple(int(c) for c in rng.integers(0, 2**level, n)))
        a = project_wq(f, cube, "wilson").values
        b = project_wq(f, cube, "tensor").values
        assert np.abs(a - b).max() < 1e-12


def test_projection_fixes_haar_and_kills_constants():
    q = DyadicCube(2, 0, (0, 0))
    assert np.abs(project_wq(GridFunction.constant(2, 2, 3.0), q).values).max() < 1e-15
    h = wilson_haar(HaarIndex(q, 2), 2)
    assert np.allclose(project_wq(h, q).values, h.values)
