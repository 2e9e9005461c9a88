import math

import numpy as np
import pytest

from dpl.dyadic import DyadicCube, HaarIndex, e_set, haar_indices
from dpl.grid import GridFunction
from dpl.haar import wilson_haar
from dpl.operators import (
    ConvergenceError,
    OperatorMatrix,
    SignPattern,
    bilinear_form,
    difference_domination_constant,
    difference_witness,
    dumps_opm,
    loads_opm,
    martingale_transform,
    matrix_from_operator,
    operator_matrix,
    operator_norm,
    paraproduct,
    paraproduct_adjoint,
    paraproduct_difference,
    power_norm,
    product_decomposition,
    square_function,
    square_function_form,
    square_function_norm,
    tensor_paraproduct,
)
from dpl.weights import log_symbol


def test_paraproduct_trivial_cases(rng):
    f = GridFunction.random(2, 3, rng)
    b = GridFunction.random(2, 3, rng)
    assert np.abs(paraproduct(GridFunction.constant(2, 3, 4.0), f).values).max() < 1e-14
    assert np.abs(paraproduct_adjoint(GridFunction.constant(2, 3, 4.0), f).values).max() < 1e-14
    out = paraproduct(b, GridFunction.constant(2, 3, 2.0))
    assert np.allclose(out.values, 2.0 * (b.values - b.values.mean()), atol=1e-13)


def test_single_haar_symbol_is_rank_one(rng):
    idx = HaarIndex(DyadicCube(2, 1, (0, 1)), 3)
    b = wilson_haar(idx, 3)
    f = GridFunction.random(2, 3, rng)
    expected = f.average(e_set(idx)) * b.values
    assert np.allclose(paraproduct(b, f).values, expected, atol=1e-13)
    op = operator_matrix("paraproduct", 2, 3, b=b)
    assert np.linalg.matrix_rank(op.matrix, tol=1e-10) == 1
    # ||pi_b|| = |E|^{-1/2} for the normalized Haar symbol
    assert operator_norm(op) == pytest.approx(float(idx.volume) ** -0.5, rel=1e-12)
    assert operator_norm(operator_matrix("paraproduct", 2, 3, b=b * 3.0)) == pytest.approx(
        3 * float(idx.volume) ** -0.5, rel=1e-12)


def test_linearity(rng):
    b1, b2, f, g = (GridFunction.random(2, 3, rng) for _ in range(4))
    a, c = 1.7, -0.4
    lhs = paraproduct(b1 * a + b2 * c, f).values
    assert np.abs(lhs - (a * paraproduct(b1, f).values + c * paraproduct(b2, f).values)).max() < 1e-12
    lhs = paraproduct(b1, f * a + g * c).values
    assert np.abs(lhs - (a * paraproduct(b1, f).values + c * paraproduct(b1, g).values)).max() < 1e-12


def test_adjoint_identity(rng):
    b = GridFunction.random(2, 3, rng)
    for _ in range(100):
        f, g = GridFunction.random(2, 3, rng), GridFunction.random(2, 3, rng)
        assert paraproduct(b, f).inner(g) == pytest.approx(f.inner(paraproduct_adjoint(b, g)), abs=1e-11)
    A = operator_matrix("paraproduct", 2, 3, b=b).matrix
    At = operator_matrix("adjoint", 2, 3, b=b).matrix
    assert np.abs(A.T - At).max() < 1e-12


@pytest.mark.parametrize("kind,fn", [
    ("paraproduct", paraproduct), ("adjoint", paraproduct_adjoint),
    ("tensor", tensor_paraproduct), ("difference", paraproduct_difference),
])
def test_matrix_matches_direct_application(rng, kind, fn):
    b = GridFunction.random(2, 3, rng)
    op = operator_matrix(kind, 2, 3, b=b)
    ref = matrix_from_operator(lambda f: fn(b, f), 2, 3)
    assert np.abs(op.matrix - ref.matrix).max() < 1e-12
    f = GridFunction.random(2, 3, rng)
    assert np.abs(op.apply(f).values - fn(b, f).values).max() < 1e-12


def test_tensor_forms_and_one_dim(rng):
    b, f = GridFunction.random(2, 3, rng), GridFunction.random(2, 3, rng)
    assert np.abs(tensor_paraproduct(b, f, "tensor").values - tensor_paraproduct(b, f, "wilson").values).max() < 1e-12
    d = tensor_paraproduct(b, f).values - paraproduct(b, f).values
    assert np.abs(d - paraproduct_difference(b, f).values).max() < 1e-12
    b1 = GridFunction.random(1, 5, rng)
    assert np.array_equal(operator_matrix("tensor", 1, 5, b=b1).matrix, operator_matrix("paraproduct", 1, 5, b=b1).matrix)
    assert np.abs(paraproduct_difference(b1, GridFunction.random(1, 5, rng)).values).max() < 1e-14
    assert np.abs(paraproduct_difference(b, GridFunction.constant(2, 3, 1.0)).values).max() < 1e-14


def test_difference_witness_closed_form():
    ib, jf, val = difference_witness(2, 2)
    assert val > 1e-3
    q = DyadicCube(2, 1, (0, 0))
    b, f = wilson_haar(HaarIndex(q, 2), 2), wilson_haar(HaarIndex(q, 1), 2)
    # <f>_Q = 0, <f>_{E_{2,Q}} = -|Q|^{-1/2} = -2, so the difference is 2 h_{2,Q}
    assert np.allclose(paraproduct_difference(b, f).values, 2 * b.values, atol=1e-14)


def test_difference_domination(rng):
    for n, expected in ((1, 0.0), (2, None)):
        for _ in range(10):
            b, f = GridFunction.random(n, 3, rng), GridFunction.random(n, 3, rng)
            const, bad = difference_domination_constant(b, f)
            assert bad == 0 and math.isfinite(const)
            if expected is not None:
                assert const == pytest.approx(expected, abs=1e-12)


def test_martingale_transform(rng):
    f = GridFunction.random(2, 3, rng)
    plus, minus = SignPattern.constant(2, 3, 1), SignPattern.constant(2, 3, -1)
    assert np.allclose(martingale_transform(plus, f).values, f.values - f.values.mean(), atol=1e-13)
    assert np.allclose(martingale_transform(minus, f).values, f.values.mean() - f.values, atol=1e-13)
    s = SignPattern.random(2, 3, 5)
    twice = martingale_transform(s, martingale_transform(s, f))
    assert np.allclose(twice.values, f.values - f.values.mean(), atol=1e-13)
    for depth in (1, 2, 4):
        op = operator_matrix("martingale", 2, depth, sigma=SignPattern.random(2, depth, depth))
        assert operator_norm(op) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        SignPattern(2, 2, [np.ones((1, 1, 3))])


def test_square_function_forms(rng):
    h = wilson_haar(HaarIndex(DyadicCube(1, 0, (0,)), 1), 3)
    for form in ("increment", "wilson"):
        assert np.allclose(square_function(h, form).values, 1.0)
        assert np.abs(square_function(GridFunction.constant(2, 2, 3.0), form).values).max() < 1e-14
    differ = False
    for _ in range(20):
        f = GridFunction.random(2, 3, rng)
        a, b = square_function(f, "increment"), square_function(f, "wilson")
        assert a.norm() == pytest.approx(b.norm(), abs=1e-11)
        differ |= np.abs(a.values - b.values).max() > 1e-6
    assert differ


def test_square_function_quadratic_form(rng):
    w = GridFunction.random(2, 2, rng, positive=True)
    f = GridFunction.random(2, 2, rng)
    for form in ("increment", "wilson"):
        K = square_function_form(w, form)
        assert f.flat @ K @ f.flat == pytest.approx(square_function(f, form).norm(w) ** 2, rel=1e-12)
    assert square_function_norm(GridFunction.constant(1, 4)) == pytest.approx(1.0, abs=1e-12)


def test_decomposition_hand_cases(rng):
    one = GridFunction.constant(2, 2, 1.0)
    for part in product_decomposition(one, one):
        assert np.abs(part.values).max() < 1e-15
    idx = HaarIndex(DyadicCube(2, 0, (0, 0)), 2)
    h = wilson_haar(idx, 2)
    I, II, III = product_decomposition(h, h)
    assert np.allclose(I.values, (h * h).values, atol=1e-13)
    assert np.abs(II.values).max() < 1e-13 and np.abs(III.values).max() < 1e-13


def test_decomposition_identity(rng):
    for n, depth in ((1, 4), (2, 3), (3, 2)):
        f, g = GridFunction.random(n, depth, rng), GridFunction.random(n, depth, rng)
        I, II, III = product_decomposition(f, g)
        resid = f.values * g.values - f.values.mean() * g.values.mean() - I.values - II.values - III.values
        assert np.abs(resid).max() < 1e-11


def test_bilinear_form_duality(rng):
    b = GridFunction.random(1, 4, rng)
    w = GridFunction.random(1, 4, rng, positive=True)
    assert bilinear_form(GridFunction.constant(1, 4, 2.0), b, b, w) == pytest.approx(0.0, abs=1e-14)
    f, g = GridFunction.random(1, 4, rng), GridFunction.random(1, 4, rng)
    assert bilinear_form(b, f, g, GridFunction.constant(1, 4)) == pytest.approx(paraproduct(b, f).inner(g))
    op = operator_matrix("paraproduct", 1, 4, b=b)
    norm = operator_norm(op, w)
    for _ in range(50):
        f, g = GridFunction.random(1, 4, rng), GridFunction.random(1, 4, rng)
        assert abs(bilinear_form(b, f, g, w)) <= norm * f.norm() * g.norm() * (1 + 1e-12)
    # the cell measure is uniform, so singular vectors of the similarity are unit vectors after scaling
    u, s, vt = np.linalg.svd(np.sqrt(w.flat)[:, None] * op.matrix / np.sqrt(w.flat)[None, :])
    scale = 1 / math.sqrt(w.cell_volume)
    top = bilinear_form(b, f.with_values(vt[0] * scale), g.with_values(u[:, 0] * scale), w)
    assert top == pytest.approx(norm, abs=1e-9)


def test_norm_methods_agree(rng):
    b = log_symbol(2, 3)
    w = GridFunction.random(2, 3, rng, positive=True)
    op = operator_matrix("paraproduct", 2, 3, b=b)
    assert operator_norm(op, w, "power") == pytest.approx(operator_norm(op, w, "dense"), abs=1e-8)
    assert operator_norm(OperatorMatrix(np.zeros((4, 4)), 1, 2, "zero")) == 0.0
    with pytest.raises(ConvergenceError):
        power_norm(np.diag([1.0, 0.999999, 0.5]), tol=1e-15, maxit=3)


def test_opm_roundtrip(rng):
    op = operator_matrix("paraproduct", 1, 3, b=GridFunction.random(1, 3, rng))
    back = loads_opm(dumps_opm(op))
    assert np.array_equal(back.matrix, op.matrix) and back.kind == "paraproduct"
    with pytest.raises(ValueError):
        loads_opm("opm 1\ndim=1 depth=1 kind=x\n1 2 3\n")
