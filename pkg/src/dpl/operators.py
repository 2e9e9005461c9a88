"""Paraproducts, martingale transforms, square functions and weighted norms on a finite grid.

All sums run over cubes of level 0..L-1, so every output is exactly a depth-L
grid function. Pairings are unweighted: <u, v> = int u v over [0,1)^n.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from dpl.dyadic import HaarIndex, haar_indices
from dpl.grid import GridFunction, block_means, child_sums, merge_children, upsample
from dpl.haar import (
    CoefficientTree,
    analyze,
    flatten_levels,
    masks,
    pair_averages,
    pair_volume_factors,
    signatures,
    subtree_matrix,
    synthesize,
    wilson_matrix,
)


class ConvergenceError(RuntimeError):
    pass


def _mean_zero_tree(f: GridFunction, levels: list[np.ndarray]) -> GridFunction:
    return synthesize(CoefficientTree(f.dim, f.depth, 0.0, levels), include_mean=False)


def _region_values(dim: int, depth: int, level: int, per_pair: np.ndarray) -> np.ndarray:
    """Depth-L array equal to sum_j per_pair[..., j] chi_{E_{j,Q}} for the cubes of ``level``."""
    m1, m2 = masks(dim)
    child_vals = per_pair @ (m1 + m2)
    return upsample(merge_children(child_vals), 2 ** (depth - level - 1))


def _pair_volumes(dim: int, level: int) -> np.ndarray:
    return pair_volume_factors(dim) * 2.0 ** (-dim * level)


def paraproduct(b: GridFunction, f: GridFunction) -> GridFunction:
    """pi_b f = sum_Q sum_j <f>_{E_{j,Q}} <b, h_{j,Q}> h_{j,Q}."""
    b.check_compatible(f)
    tb = analyze(b)
    levels = [pair_averages(f.values, k)[0] * tb.levels[k] for k in range(f.depth)]
    return _mean_zero_tree(f, levels)


def paraproduct_adjoint(b: GridFunction, f: GridFunction) -> GridFunction:
    """pi*_b f = sum_Q sum_j <f, h_{j,Q}> <b, h_{j,Q}> chi_{E_{j,Q}} / |E_{j,Q}|."""
    b.check_compatible(f)
    tb, tf = analyze(b), analyze(f)
    out = np.zeros_like(f.values)
    for k in range(f.depth):
        out = out + _region_values(f.dim, f.depth, k, tb.levels[k] * tf.levels[k] / _pair_volumes(f.dim, k))
    return f.with_values(out)


def _tensor_patterns(dim: int) -> np.ndarray:
    """(|Sigma|, 2^n) sign patterns of h^s_sigma on the children, in units of |Q|^{-1/2}."""
    import itertools

    children = list(itertools.product((0, 1), repeat=dim))
    sigs = signatures(dim)
    out = np.ones((len(sigs), len(children)))
    for s, sig in enumerate(sigs):
        for c, bits in enumerate(children):
            for sa, ba in zip(sig, bits):
                if sa == 0:
                    out[s, c] *= 1.0 if ba else -1.0
    return out


def _wq_projection_children(b: GridFunction, level: int, basis: str) -> np.ndarray:
    """Child values of Proj_{W(Q)} b for every cube of ``level``: (2^k,)*n + (2^n,)."""
    n = b.dim
    vol_q = 2.0 ** (-n * level)
    if basis == "tensor":
        pat = _tensor_patterns(n)
        child_int = child_sums(b.values, level) * b.cell_volume
        coef = child_int @ pat.T * vol_q**-0.5
        return coef @ pat * vol_q**-0.5
    if basis == "wilson":
        from dpl.haar import haar_child_values

        coef = analyze(b).levels[level]
        return np.einsum("...j,...jc->...c", coef, haar_child_values(n, b.depth, level))
    raise ValueError(f"unknown basis {basis!r}")


def tensor_paraproduct(b: GridFunction, f: GridFunction, form: str = "tensor") -> GridFunction:
    """pi^s_b f = sum_Q <f>_Q Proj_{W(Q)} b, with the projection taken in either basis."""
    b.check_compatible(f)
    out = np.zeros_like(f.values)
    for k in range(f.depth):
        child_vals = _wq_projection_children(b, k, form) * block_means(f.values, k)[..., None]
        out = out + upsample(merge_children(child_vals), 2 ** (f.depth - k - 1))
    return f.with_values(out)


def paraproduct_difference(b: GridFunction, f: GridFunction) -> GridFunction:
    """sum_Q sum_j (<f>_Q - <f>_{E_{j,Q}}) <b, h_{j,Q}> h_{j,Q}."""
    b.check_compatible(f)
    tb = analyze(b)
    levels = []
    for k in range(f.depth):
        avg_e = pair_averages(f.values, k)[0]
        levels.append((block_means(f.values, k)[..., None] - avg_e) * tb.levels[k])
    return _mean_zero_tree(f, levels)


def difference_dominator(b: GridFunction, f: GridFunction) -> GridFunction:
    """sum_Q sum_j sum_{i: E_i strictly contains E_j} |<f,h_i>| |<b,h_j>| chi_{E_j} / |E_j|."""
    b.check_compatible(f)
    tb, tf = analyze(b), analyze(f)
    strict = subtree_matrix(f.dim) - np.eye(2**f.dim - 1)
    out = np.zeros_like(f.values)
    for k in range(f.depth):
        anc = np.abs(tf.levels[k]) @ strict
        out = out + _region_values(f.dim, f.depth, k, anc * np.abs(tb.levels[k]) / _pair_volumes(f.dim, k))
    return f.with_values(out)


def difference_domination_constant(b: GridFunction, f: GridFunction) -> tuple[float, int]:
    """(max |pi^s_b f - pi_b f| / dominator over cells, count of cells where the dominator vanishes
    but the difference does not)."""
    diff = np.abs(paraproduct_difference(b, f).values)
    dom = difference_dominator(b, f).values
    scale = max(float(np.abs(diff).max()), 1.0)
    pos = dom > 0
    bad = int(np.count_nonzero(~pos & (diff > 1e-12 * scale)))
    const = float((diff[pos] / dom[pos]).max()) if np.any(pos) else 0.0
    return const, bad


@dataclass
class SignPattern:
    """sigma_{E_{j,Q}} in {-1, +1} for every pair at levels 0..L-1 (same layout as CoefficientTree)."""

    dim: int
    depth: int
    levels: list[np.ndarray]

    def __post_init__(self):
        if len(self.levels) != self.depth:
            raise ValueError("sign pattern must cover every level below the depth")
        for k, arr in enumerate(self.levels):
            if arr.shape != (2**k,) * self.dim + (2**self.dim - 1,):
                raise ValueError(f"missing signs at level {k}")
            if not np.all(np.abs(arr) == 1):
                raise ValueError("signs must be +1 or -1")

    @classmethod
    def constant(cls, dim: int, depth: int, sign: int = 1) -> SignPattern:
        return cls(dim, depth, [np.full((2**k,) * dim + (2**dim - 1,), float(sign)) for k in range(depth)])

    @classmethod
    def random(cls, dim: int, depth: int, seed: int) -> SignPattern:
        rng = np.random.default_rng(seed)
        return cls(dim, depth, [rng.choice([-1.0, 1.0], size=(2**k,) * dim + (2**dim - 1,))
                                for k in range(depth)])

    def __getitem__(self, idx: HaarIndex) -> float:
        return float(self.levels[idx.cube.level][idx.cube.coords + (idx.j - 1,)])


def martingale_transform(sigma: SignPattern, f: GridFunction) -> GridFunction:
    if (sigma.dim, sigma.depth) != (f.dim, f.depth):
        raise ValueError("sign pattern and function shapes differ")
    tf = analyze(f)
    return _mean_zero_tree(f, [s * c for s, c in zip(sigma.levels, tf.levels)])


def square_function(f: GridFunction, form: str = "increment") -> GridFunction:
    """Dyadic square function, as parent-to-child increments or through Wilson coefficients."""
    if f.depth < 1:
        raise ValueError("square function needs depth >= 1")
    sq = np.zeros_like(f.values)
    if form == "increment":
        for k in range(1, f.depth + 1):
            inc = block_means(f.values, k) - upsample(block_means(f.values, k - 1), 2)
            sq = sq + upsample(inc**2, 2 ** (f.depth - k))
    elif form == "wilson":
        tf = analyze(f)
        for k in range(f.depth):
            dens = np.sum(tf.levels[k] ** 2, axis=-1) * 2.0 ** (f.dim * k)
            sq = sq + upsample(dens, 2 ** (f.depth - k))
    else:
        raise ValueError(f"unknown square function form {form!r}")
    return f.with_values(np.sqrt(sq))


def product_decomposition(f: GridFunction, g: GridFunction) -> tuple[GridFunction, GridFunction, GridFunction]:
    """(I, II, III) with fg = <f><g> + I + II + III on the unit cube.

    I is the diagonal term, II = sum <f,h_{j,Q}> <g>_{E_{j,Q}} h_{j,Q} (upper
    triangle) and III the same with f and g exchanged.
    """
    f.check_compatible(g)
    return paraproduct_adjoint(g, f), paraproduct(f, g), paraproduct(g, f)


def bilinear_form(b: GridFunction, f: GridFunction, g: GridFunction, w: GridFunction) -> float:
    """<pi_b(f w^{-1/2}), g w^{1/2}>."""
    if not np.all(w.values > 0):
        raise ValueError("weight must be strictly positive")
    root = np.sqrt(w.values)
    return paraproduct(b, f.with_values(f.values / root)).inner(g.with_values(g.values * root))


# --- matrices -------------------------------------------------------------------------------


@dataclass
class OperatorMatrix:
    """Dense matrix of a linear operator acting on cell-value vectors."""

    matrix: np.ndarray
    dim: int
    depth: int
    kind: str
    symbol_hash: str = ""
    meta: dict = field(default_factory=dict)

    def apply(self, f: GridFunction) -> GridFunction:
        if (f.dim, f.depth) != (self.dim, self.depth):
            raise ValueError("operator and function shapes differ")
        return f.with_values(self.matrix @ f.flat)


def symbol_hash(b: GridFunction | None) -> str:
    if b is None:
        return ""
    return hashlib.sha256(np.ascontiguousarray(b.values, dtype="<f8").tobytes()).hexdigest()[:16]


def _average_rows(dim: int, depth: int, which: str) -> np.ndarray:
    """(K, N) matrix of averages over E_{j,Q} (``which='E'``) or over Q (``'Q'``) per Haar index."""
    idxs = list(haar_indices(dim, depth))
    rows = np.zeros((len(idxs), 2 ** (dim * depth)))
    grid = np.zeros((2**depth,) * dim)
    for r, idx in enumerate(idxs):
        from dpl.dyadic import e_set

        rect = e_set(idx) if which == "E" else idx.cube.rectangle()
        grid[...] = 0.0
        grid[rect.slices(depth)] = 1.0
        rows[r] = grid.reshape(-1) / grid.sum()
    return rows


def operator_matrix(kind: str, dim: int, depth: int, b: GridFunction | None = None,
                    sigma: SignPattern | None = None) -> OperatorMatrix:
    """Assemble an operator from the Wilson basis matrix H (cells x indices).

    Kinds: paraproduct, adjoint, tensor, difference (need ``b``), martingale (needs ``sigma``).
    """
    _, H = wilson_matrix(dim, depth)
    vol = 2.0 ** (-dim * depth)
    if kind == "martingale":
        if sigma is None:
            raise ValueError("martingale operator needs a sign pattern")
        mat = (H * flatten_levels(sigma.levels)) @ H.T * vol
        return OperatorMatrix(mat, dim, depth, kind)
    if b is None:
        raise ValueError(f"{kind} operator needs a symbol")
    cb = flatten_levels(analyze(b).levels)
    if kind == "paraproduct":
        mat = (H * cb) @ _average_rows(dim, depth, "E")
    elif kind == "adjoint":
        mat = (_average_rows(dim, depth, "E").T * cb) @ H.T
    elif kind == "tensor":
        mat = (H * cb) @ _average_rows(dim, depth, "Q")
    elif kind == "difference":
        mat = (H * cb) @ (_average_rows(dim, depth, "Q") - _average_rows(dim, depth, "E"))
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return OperatorMatrix(mat, dim, depth, kind, symbol_hash(b))


def matrix_from_operator(fn: Callable[[GridFunction], GridFunction], dim: int, depth: int,
                         kind: str = "custom") -> OperatorMatrix:
    """Columns are the images of the cell indicators."""
    size = 2 ** (dim * depth)
    mat = np.empty((size, size))
    e = np.zeros(size)
    for c in range(size):
        e[:] = 0.0
        e[c] = 1.0
        mat[:, c] = fn(GridFunction(dim, depth, e)).flat
    return OperatorMatrix(mat, dim, depth, kind)


def dumps_opm(op: OperatorMatrix) -> str:
    lines = ["opm 1", f"dim={op.dim} depth={op.depth} kind={op.kind}"]
    lines += [" ".join(format(float(v), ".17g") for v in row) for row in op.matrix]
    return "\n".join(lines) + "\n"


def loads_opm(text: str) -> OperatorMatrix:
    lines = text.strip().splitlines()
    if len(lines) < 2 or lines[0].split() != ["opm", "1"]:
        raise ValueError("not an OPM1 file: first line must be 'opm 1'")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[1].split())
        dim, depth, kind = int(fields["dim"]), int(fields["depth"]), fields["kind"]
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed OPM1 header line: {lines[1]!r}") from exc
    size = 2 ** (dim * depth)
    vals = " ".join(lines[2:]).split()
    if len(vals) != size * size:
        raise ValueError(f"OPM1 count mismatch: expected {size * size} values, found {len(vals)}")
    return OperatorMatrix(np.array([float(v) for v in vals]).reshape(size, size), dim, depth, kind)


def write_opm(op: OperatorMatrix, path: str | Path) -> None:
    Path(path).write_text(dumps_opm(op))


# --- norms -----------------------------------------------------------------------------------


def weighted_similarity(op: OperatorMatrix | np.ndarray, w: GridFunction | None) -> np.ndarray:
    """D M D^{-1} with D the square root of the cell masses w |cell|.

    The uniform |cell| factor cancels, leaving conjugation by sqrt(w).
    """
    mat = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)
    if w is None:
        return mat
    if w.size != mat.shape[0]:
        raise ValueError("weight and operator shapes differ")
    if not np.all(w.values > 0):
        raise ValueError("weight must be strictly positive")
    root = np.sqrt(w.flat)
    return root[:, None] * mat / root[None, :]


def power_norm(mat: np.ndarray, tol: float = 1e-12, maxit: int = 200000, seed: int = 0) -> float:
    """Largest singular value by power iteration on M^T M.

    Stops when the eigen-residual ||M^T M x - theta x|| falls below tol * theta.
    """
    if not np.any(mat):
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(mat.shape[1])
    x /= np.linalg.norm(x)
    theta = 0.0
    for _ in range(maxit):
        y = mat.T @ (mat @ x)
        theta = float(x @ y)
        resid = np.linalg.norm(y - theta * x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        if resid <= tol * theta:
            return float(np.sqrt(theta))
        x = y / ny
    raise ConvergenceError(f"power iteration did not converge in {maxit} iterations (theta={theta})")


def operator_norm(op: OperatorMatrix | np.ndarray, w: GridFunction | None = None, method: str = "dense",
                  tol: float = 1e-12, maxit: int = 200000) -> float:
    """Norm of the operator on L^2(w)."""
    mat = weighted_similarity(op, w)
    if method == "dense":
        return float(np.linalg.norm(mat, 2)) if mat.size else 0.0
    if method == "power":
        return power_norm(mat, tol=tol, maxit=maxit)
    raise ValueError(f"unknown norm method {method!r}")


def _level_mean_matrix(dim: int, depth: int, level: int) -> np.ndarray:
    """(2^{n level}, N) matrix of cube averages at ``level``, cubes in C-order of their coords."""
    cells = np.array(np.unravel_index(np.arange(2 ** (dim * depth)), (2**depth,) * dim))
    cube = np.ravel_multi_index(tuple(cells >> (depth - level)), (2**level,) * dim)
    out = np.zeros((2 ** (dim * level), cells.shape[1]))
    out[cube, np.arange(cells.shape[1])] = 2.0 ** (-dim * (depth - level))
    return out


def _increment_rows(dim: int, depth: int) -> np.ndarray:
    """Rows f -> <f>_Q - <f>_{parent(Q)} for every cube of level 1..L, level-major."""
    rows = []
    for k in range(1, depth + 1):
        coords = np.array(np.unravel_index(np.arange(2 ** (dim * k)), (2**k,) * dim))
        parent = np.ravel_multi_index(tuple(coords >> 1), (2 ** (k - 1),) * dim)
        rows.append(_level_mean_matrix(dim, depth, k) - _level_mean_matrix(dim, depth, k - 1)[parent])
    return np.vstack(rows)


def square_function_form(w: GridFunction, form: str = "increment") -> np.ndarray:
    """PSD matrix K with ||S_d f||^2_{L^2(w)} = f^T K f (f as cell vector)."""
    dim, depth = w.dim, w.depth
    if form == "increment":
        rows = _increment_rows(dim, depth)
        masses = []
        for k in range(1, depth + 1):
            masses.append(block_means(w.values, k).reshape(-1) * 2.0 ** (-dim * k))
        wq = np.concatenate(masses)
        return rows.T @ (wq[:, None] * rows)
    if form == "wilson":
        idxs, H = wilson_matrix(dim, depth)
        vol = w.cell_volume
        coeff = H.T * vol
        weights = np.array([w.average(i.cube) for i in idxs])
        return coeff.T @ (weights[:, None] * coeff)
    raise ValueError(f"unknown square function form {form!r}")


def square_function_norm(w: GridFunction, form: str = "increment") -> float:
    """sup ||S_d f||_{L^2(w)} / ||f||_{L^2(w)}: top generalized Rayleigh quotient of the form."""
    K = square_function_form(w, form)
    mass = w.flat * w.cell_volume
    inv_root = 1.0 / np.sqrt(mass)
    sym = inv_root[:, None] * K * inv_root[None, :]
    return float(np.sqrt(max(np.linalg.eigvalsh(sym)[-1], 0.0)))


def difference_witness(dim: int = 2, depth: int = 2) -> tuple[HaarIndex, HaarIndex, float]:
    """Search single-Haar pairs b = h_{j,Q}, f = h_{i,Q'} for the largest ||pi^s_b f - pi_b f||."""
    from dpl.haar import wilson_haar

    idxs = list(haar_indices(dim, depth))
    funcs = {idx: wilson_haar(idx, depth) for idx in idxs}
    best = (idxs[0], idxs[0], 0.0)
    for ib in idxs:
        for jf in idxs:
            val = paraproduct_difference(funcs[ib], funcs[jf]).norm()
            if val > best[2]:
                best = (ib, jf, val)
    return best
