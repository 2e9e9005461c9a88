"""Weight and symbol diagnostics: A_p characteristics, BMO norms, generators.

The discretized weight is the object of study: w^{-1} is the cellwise
reciprocal and every supremum is exact over the dyadic cubes (or dyadic
rectangles) of level <= L.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from dpl.dyadic import DyadicCube, DyadicRectangle, HaarIndex
from dpl.grid import GridFunction, SummedAreaTable, block_means, block_sums, level_tuples, read_gfn, upsample
from dpl.haar import analyze
from dpl.report import CharacteristicReport, CheckReport

JN_FACTOR = math.exp(1 + 2 / math.e)
JN_RATE = 2 / math.e


def as_weight(w: GridFunction) -> GridFunction:
    if not np.all(np.isfinite(w.values)) or not np.all(w.values > 0):
        raise ValueError("weight must be finite and strictly positive on every cell")
    return w


def reciprocal(w: GridFunction) -> GridFunction:
    return w.with_values(1.0 / as_weight(w).values)


def _cube_at(dim: int, level: int, flat_pos: int) -> DyadicCube:
    return DyadicCube(dim, level, tuple(int(c) for c in np.unravel_index(flat_pos, (2**level,) * dim)))


def apd_characteristic(w: GridFunction, p: float = 2.0) -> CharacteristicReport:
    """sup over dyadic cubes of <w>_Q <w^{-1/(p-1)}>_Q^{p-1}."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    as_weight(w)
    dual = w.values ** (-1.0 / (p - 1))
    best, arg = -np.inf, None
    for k in range(w.depth + 1):
        prod = block_means(w.values, k) * block_means(dual, k) ** (p - 1)
        pos = int(np.argmax(prod))
        if prod.flat[pos] > best:
            best, arg = float(prod.flat[pos]), _cube_at(w.dim, k, pos)
    return CharacteristicReport(best, str(arg), float(p))


def _rect_at(levels: tuple[int, ...], flat_pos: int) -> DyadicRectangle:
    idx = np.unravel_index(flat_pos, tuple(2**lev for lev in levels))
    return DyadicRectangle(tuple(levels), tuple(int(i) for i in idx))


def a2r_characteristic(w: GridFunction) -> CharacteristicReport:
    """sup of <w>_R <w^{-1}>_R over dyadic rectangles with per-axis levels <= L."""
    as_weight(w)
    sat_w = SummedAreaTable(w.values)
    sat_inv = SummedAreaTable(1.0 / w.values)
    best, arg = -np.inf, None
    for levels in level_tuples(w.dim, w.depth):
        cells = 2 ** (w.dim * w.depth - sum(levels))
        prod = sat_w.rect_sums(levels) * sat_inv.rect_sums(levels) / cells**2
        pos = int(np.argmax(prod))
        if prod.flat[pos] > best:
            best, arg = float(prod.flat[pos]), _rect_at(levels, pos)
    return CharacteristicReport(best, str(arg), 2.0)


def rectangle_product(w: GridFunction, rect: DyadicRectangle) -> float:
    """<w>_R <w^{-1}>_R for a single rectangle."""
    sl = rect.slices(w.depth)
    return float(w.values[sl].mean() * (1.0 / w.values[sl]).mean())


def _oscillation_levels(b: np.ndarray, levels: tuple[int, ...], p: float) -> np.ndarray:
    """(1/|R|) int_R |b - <b>_R|^p for every dyadic rectangle with the given levels."""
    n = b.ndim
    depth = int(np.log2(b.shape[0]))
    blocks = tuple(x for lev in levels for x in (2**lev, 2 ** (depth - lev)))
    shaped = b.reshape(blocks)
    inner = tuple(range(1, 2 * n, 2))
    mean = shaped.mean(axis=inner, keepdims=True)
    return (np.abs(shaped - mean) ** p).mean(axis=inner)


def bmod_norm(b: GridFunction, variant: str = "L1") -> float:
    """Dyadic BMO norm.

    ``L1``: sup_Q mean oscillation. ``L2``: sup_Q |Q|^{-1} sum over pairs inside Q
    of squared Haar coefficients, i.e. the squared norm of the quadratic form.
    """
    if variant == "L1":
        return max(float(_oscillation_levels(b.values, (k,) * b.dim, 1.0).max()) for k in range(b.depth + 1))
    if variant == "L2":
        return float(max(local_square_sums(b)))
    raise ValueError(f"unknown BMO variant {variant!r}")


def local_square_sums(b: GridFunction) -> list[float]:
    """Per level k: max over cubes Q of level k of |Q|^{-1} sum_{Q' in D(Q)} sum_j <b,h_{j,Q'}>^2."""
    t = analyze(b)
    n = b.dim
    acc = np.zeros((2**b.depth,) * n)
    out = [0.0] * (b.depth + 1)
    for k in range(b.depth - 1, -1, -1):
        acc = block_sums(acc, k) + np.sum(t.levels[k] ** 2, axis=-1)
        out[k] = float(acc.max() * 2 ** (n * k))
    return out


def local_variances(b: GridFunction, level: int) -> np.ndarray:
    """|Q|^{-1} ||b - <b>_Q||^2_{L^2(Q)} for every cube of ``level``."""
    return _oscillation_levels(b.values, (level,) * b.dim, 2.0)


def bmor_norm(b: GridFunction) -> float:
    """sup of mean oscillation over dyadic rectangles with per-axis levels <= L."""
    return _rect_oscillation_sup(b, 1.0)[0]


def _rect_oscillation_sup(b: GridFunction, p: float) -> tuple[float, DyadicRectangle | None]:
    best, arg = 0.0, None
    for levels in level_tuples(b.dim, b.depth):
        osc = _oscillation_levels(b.values, levels, p)
        pos = int(np.argmax(osc))
        if osc.flat[pos] > best:
            best, arg = float(osc.flat[pos]), _rect_at(levels, pos)
    return best, arg


def self_improving_ratio(b: GridFunction, p: float) -> float:
    """sup_R (|R|^{-1} int_R |b - <b>_R|^p)^{1/p} divided by the BMO^R norm."""
    if p < 1:
        raise ValueError("p must be at least 1")
    norm = bmor_norm(b)
    if norm <= 0:
        raise ValueError("symbol has zero rectangular oscillation")
    if p == 1:
        return 1.0
    top, _ = _rect_oscillation_sup(b, p)
    return top ** (1.0 / p) / norm


def john_nirenberg_profile(b: GridFunction, rect: DyadicRectangle, lambdas) -> CheckReport:
    """Level-set measures of |b - <b>_R| on R against e^{1+2/e}|R| exp(-(2/e) lambda / ||b||_{BMO^R})."""
    norm = bmor_norm(b)
    if norm <= 0:
        raise ValueError("symbol has zero rectangular oscillation")
    sl = rect.slices(b.depth)
    block = b.values[sl]
    dev = np.abs(block - block.mean())
    vol = float(rect.volume)
    cell = b.cell_volume
    report = CheckReport(check="john-nirenberg", dim=b.dim, depth=b.depth,
                         params={"rect": str(rect), "bmo_r": norm})
    measures, bounds = [], []
    for lam in lambdas:
        meas = float(np.count_nonzero(dev > lam)) * cell
        bound = JN_FACTOR * vol * math.exp(-JN_RATE * lam / norm)
        measures.append(meas)
        bounds.append(bound)
        if meas > bound:
            report.violations.append(f"lambda={lam}: measure {meas} > bound {bound}")
    ratios = [m / bd for m, bd in zip(measures, bounds)]
    report.empirical_constant = max(ratios) if ratios else 0.0
    report.params.update(lambdas=list(map(float, lambdas)), measures=measures, bounds=bounds)
    report.lhs, report.rhs = measures, bounds
    return report


# --- generators --------------------------------------------------------------------------


def power_weight(dim: int, depth: int, alpha: float) -> GridFunction:
    """|x|^alpha: exact cell averages in 1-d, cell-midpoint values for n >= 2."""
    if not alpha > -dim:
        raise ValueError(f"power weight needs alpha > -n (got alpha={alpha}, n={dim})")
    m = 2**depth
    if alpha == 0:
        return GridFunction.constant(dim, depth, 1.0)
    if dim == 1:
        edges = np.arange(m + 1) / m
        vals = (edges[1:] ** (alpha + 1) - edges[:-1] ** (alpha + 1)) / ((alpha + 1) * (1.0 / m))
        return GridFunction(1, depth, vals)
    mid = (np.arange(m) + 0.5) / m
    grids = np.meshgrid(*([mid] * dim), indexing="ij")
    r = np.sqrt(sum(g**2 for g in grids))
    return GridFunction(dim, depth, r**alpha)


def cascade_weight(dim: int, depth: int, delta: float, seed: int) -> GridFunction:
    """Multiplicative dyadic cascade: each child multiplies its parent by 1 + delta U, U ~ U(-1, 1).

    Factors are drawn level by level from one generator, so the depth-L cascade
    is the coarse part of the depth-(L+1) cascade with the same seed.
    """
    if not 0 < delta < 1:
        raise ValueError("cascade needs 0 < delta < 1")
    rng = np.random.default_rng(seed)
    vals = np.ones((1,) * dim)
    for _ in range(depth):
        vals = upsample(vals, 2) * (1.0 + delta * rng.uniform(-1.0, 1.0, size=(2 * vals.shape[0],) * dim))
    return GridFunction(dim, depth, vals)


def make_weight(kind: str, dim: int, depth: int, **params) -> GridFunction:
    """Build a weight from a kind name: ``power`` (alpha), ``cascade`` (delta, seed), ``explicit`` (path)."""
    if kind == "power":
        return power_weight(dim, depth, float(params.get("alpha", 0.0)))
    if kind == "cascade":
        return cascade_weight(dim, depth, float(params["delta"]), int(params.get("seed", 0)))
    if kind == "constant":
        return GridFunction.constant(dim, depth, float(params.get("value", 1.0)))
    if kind == "explicit":
        w = read_gfn(Path(params["path"]))
        if (w.dim, w.depth) != (dim, depth):
            raise ValueError(f"weight file has dim={w.dim} depth={w.depth}, expected dim={dim} depth={depth}")
        return as_weight(w)
    raise ValueError(f"unknown weight kind {kind!r}")


def log_symbol(dim: int, depth: int) -> GridFunction:
    """Cell averages of log t along axis 0 (exact), the standard unbounded BMO example."""
    m = 2**depth
    edges = np.arange(m + 1) / m
    prim = np.where(edges > 0, edges * np.log(np.where(edges > 0, edges, 1.0)) - edges, 0.0)
    vals = (prim[1:] - prim[:-1]) * m
    shape = (m,) + (1,) * (dim - 1)
    return GridFunction(dim, depth, np.broadcast_to(vals.reshape(shape), (m,) * dim).copy())


def haar_symbol(idx: HaarIndex, depth: int, c: float = 1.0) -> GridFunction:
    from dpl.haar import wilson_haar

    return wilson_haar(idx, depth) * c
