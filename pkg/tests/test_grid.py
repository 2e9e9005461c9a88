import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpl.dyadic import DyadicCube, DyadicRectangle
from dpl.grid import (
    GridFunction,
    SummedAreaTable,
    block_means,
    dumps_gfn,
    level_tuples,
    loads_gfn,
    merge_children,
    split_children,
)


def test_average_is_cell_mean(rng):
    f = GridFunction.random(2, 3, rng)
    q = DyadicCube(2, 1, (1, 0))
    assert f.average(q) == pytest.approx(f.values[4:8, 0:4].mean(), abs=1e-15)
    assert f.integral() == pytest.approx(f.values.mean(), abs=1e-15)


def test_split_merge_roundtrip(rng):
    a = rng.standard_normal((8, 8, 8))
    assert np.array_equal(merge_children(split_children(a)), a)
    # child order is lexicographic with axis 0 most significant
    cs = split_children(np.arange(16.0).reshape(4, 4))
    assert list(cs[0, 0]) == [0.0, 1.0, 4.0, 5.0]


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError, match="shape mismatch"):
        GridFunction.zeros(1, 2) + GridFunction.zeros(1, 3)


def test_values_are_read_only():
    f = GridFunction.zeros(1, 2)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_summed_area_table_matches_direct(n, depth, seed):
    vals = np.random.default_rng(seed).standard_normal((2**depth,) * n)
    sat = SummedAreaTable(vals)
    for levels in level_tuples(n, depth):
        sums = sat.rect_sums(levels)
        for pos in np.ndindex(*sums.shape):
            rect = DyadicRectangle(levels, pos)
            direct = vals[rect.slices(depth)].sum()
            assert sums[pos] == pytest.approx(direct, abs=1e-10)
            assert sat.rect_sum(rect) == pytest.approx(direct, abs=1e-10)


def test_block_means_levels(rng):
    v = rng.standard_normal((8,))
    assert block_means(v, 0)[0] == pytest.approx(v.mean())
    assert np.allclose(block_means(v, 2), v.reshape(4, 2).mean(axis=1))


def test_gfn_roundtrip_exact(rng):
    f = GridFunction.random(2, 2, rng)
    g = loads_gfn(dumps_gfn(f))
    assert np.array_equal(f.values, g.values)


def test_gfn_rejects_count_mismatch():
    with pytest.raises(ValueError, match="count mismatch"):
        loads_gfn("gfn 1\ndim=1 depth=2\n1 2 3\n")
    with pytest.raises(ValueError):
        loads_gfn("gfn 2\ndim=1 depth=0\n1\n")
