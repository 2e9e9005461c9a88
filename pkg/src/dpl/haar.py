"""Wilson's Haar system (plain, weighted, orthogonalized) and the tensor Haar basis.

The vectorized transforms work level by level: every cube of level k carries
2^n child block sums, and the Wilson pairs are fixed boolean masks over those
children (:func:`dpl.dyadic.pair_masks`). The single-function constructors
(:func:`wilson_haar`, :func:`weighted_wilson_haar`, ...) build their output
directly from rectangles and serve as the reference for the fast paths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from dpl.dyadic import DyadicCube, HaarIndex, e_set, containment_matrix, pair_masks, pair_sets
from dpl.grid import GridFunction, child_sums, merge_children, upsample


@lru_cache(maxsize=None)
def _masks(dim: int) -> tuple[np.ndarray, np.ndarray]:
    m1, m2 = pair_masks(dim)
    return m1.astype(float), m2.astype(float)


@lru_cache(maxsize=None)
def _subtree(dim: int) -> np.ndarray:
    return containment_matrix(dim).astype(float)


def pair_volume_factors(dim: int) -> np.ndarray:
    """|E_{j,Q}| / |Q| for j = 1..2^n-1."""
    return np.array([2.0 ** -(j.bit_length() - 1) for j in range(1, 2**dim)])


def _check_weight(w: GridFunction) -> None:
    if not np.all(w.values > 0):
        raise ValueError("weight must be strictly positive on every cell")


def pair_integrals(values: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Integrals of a cell array over E^1 and E^2 for every pair of cubes at ``level``.

    Returns two arrays of shape (2^level,)*n + (2^n - 1,).
    """
    n = values.ndim
    depth = int(np.log2(values.shape[0]))
    cs = child_sums(values, level) * 2.0 ** (-n * depth)
    m1, m2 = _masks(n)
    return cs @ m1.T, cs @ m2.T


def pair_averages(values: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Averages over (E, E^1, E^2) for every pair of cubes at ``level``."""
    n = values.ndim
    i1, i2 = pair_integrals(values, level)
    vol_e = pair_volume_factors(n) * 2.0 ** (-n * level)
    return (i1 + i2) / vol_e, i1 / (vol_e / 2), i2 / (vol_e / 2)


def _amplitudes(dim: int, depth: int, level: int, w: GridFunction | None):
    """(a1, a2): h^w equals -a1 on E^1 and +a2 on E^2."""
    shape = (2**level,) * dim + (2**dim - 1,)
    if w is None:
        vol_e = pair_volume_factors(dim) * 2.0 ** (-dim * level)
        a = np.broadcast_to(vol_e**-0.5, shape)
        return a, a
    w1, w2 = pair_integrals(w.values, level)
    we = w1 + w2
    return np.sqrt(w2 / w1) / np.sqrt(we), np.sqrt(w1 / w2) / np.sqrt(we)


@dataclass
class CoefficientTree:
    """Haar coefficients of a grid function.

    ``levels[k]`` has shape (2^k,)*n + (2^n - 1,); entry [coords + (j-1,)] is the
    coefficient of (Q, j). ``mean`` is the (weighted) average over [0,1)^n and
    ``weight`` the weight the expansion refers to (None for Lebesgue measure).
    """

    dim: int
    depth: int
    mean: float
    levels: list[np.ndarray]
    weight: GridFunction | None = field(default=None, repr=False)

    @classmethod
    def zeros(cls, dim: int, depth: int, weight: GridFunction | None = None) -> CoefficientTree:
        levels = [np.zeros((2**k,) * dim + (2**dim - 1,)) for k in range(depth)]
        return cls(dim, depth, 0.0, levels, weight)

    def __getitem__(self, idx: HaarIndex) -> float:
        return float(self.levels[idx.cube.level][idx.cube.coords + (idx.j - 1,)])

    def __setitem__(self, idx: HaarIndex, value: float) -> None:
        self.levels[idx.cube.level][idx.cube.coords + (idx.j - 1,)] = value

    def items(self) -> Iterator[tuple[HaarIndex, float]]:
        for k, arr in enumerate(self.levels):
            for pos in itertools.product(range(2**k), repeat=self.dim):
                cube = DyadicCube(self.dim, k, pos)
                for j in range(1, 2**self.dim):
                    yield HaarIndex(cube, j), float(arr[pos + (j - 1,)])

    def sum_squares(self) -> float:
        return float(sum(np.sum(a**2) for a in self.levels))

    def map(self, fn) -> CoefficientTree:
        return CoefficientTree(self.dim, self.depth, self.mean, [fn(k, a) for k, a in enumerate(self.levels)],
                               self.weight)


# --- single functions -------------------------------------------------------------


def _indicator(rect, dim: int, depth: int) -> np.ndarray:
    out = np.zeros((2**depth,) * dim)
    out[rect.slices(depth)] = 1.0
    return out


def _require_depth(idx: HaarIndex, depth: int) -> None:
    if depth < idx.cube.level + 1:
        raise ValueError(f"depth {depth} too shallow for a Haar function on a level-{idx.cube.level} cube")


def wilson_haar(idx: HaarIndex, depth: int) -> GridFunction:
    """h_{j,Q} = |E|^{-1/2} (chi_{E2} - chi_{E1})."""
    _require_depth(idx, depth)
    n = idx.cube.dim
    e1, e2 = pair_sets(idx)
    amp = float(idx.volume) ** -0.5
    return GridFunction(n, depth, amp * (_indicator(e2, n, depth) - _indicator(e1, n, depth)))


def weighted_wilson_haar(idx: HaarIndex, w: GridFunction) -> GridFunction:
    _require_depth(idx, w.depth)
    _check_weight(w)
    n = idx.cube.dim
    e1, e2 = pair_sets(idx)
    w1, w2 = w.integral(e1), w.integral(e2)
    we = w1 + w2
    vals = (np.sqrt(w1 / w2) * _indicator(e2, n, w.depth) - np.sqrt(w2 / w1) * _indicator(e1, n, w.depth))
    return GridFunction(n, w.depth, vals / np.sqrt(we))


def orthogonal_haar(idx: HaarIndex, w: GridFunction) -> tuple[GridFunction, float]:
    """H^w = h sqrt|E| - A^w chi_E with A^w = (<w>_{E2} - <w>_{E1}) / (2 <w>_E)."""
    _require_depth(idx, w.depth)
    _check_weight(w)
    e1, e2 = pair_sets(idx)
    e = e_set(idx)
    a = (w.average(e2) - w.average(e1)) / (2.0 * w.average(e))
    h = wilson_haar(idx, w.depth)
    vals = h.values * np.sqrt(float(idx.volume)) - a * _indicator(e, idx.cube.dim, w.depth)
    return GridFunction(idx.cube.dim, w.depth, vals), float(a)


@dataclass(frozen=True)
class TensorHaarIndex:
    cube: DyadicCube
    sigma: tuple[int, ...]

    def __post_init__(self):
        if len(self.sigma) != self.cube.dim or any(s not in (0, 1) for s in self.sigma):
            raise ValueError(f"signature {self.sigma} must be a 0/1 tuple of length {self.cube.dim}")
        if all(self.sigma):
            raise ValueError("the all-ones signature is not part of the tensor Haar basis")


def signatures(dim: int) -> list[tuple[int, ...]]:
    return [s for s in itertools.product((0, 1), repeat=dim) if not all(s)]


def tensor_haar(idx: TensorHaarIndex, depth: int) -> GridFunction:
    """Product of 1-d factors: sigma_i = 0 gives the Haar function, 1 the normalized indicator."""
    cube = idx.cube
    if depth < cube.level + 1:
        raise ValueError(f"depth {depth} too shallow for a level-{cube.level} cube")
    m = 2**depth
    step = 2 ** (depth - cube.level)
    out = np.ones(())
    for c, s in zip(cube.coords, idx.sigma):
        fac = np.zeros(m)
        lo = c * step
        amp = 2.0 ** (cube.level / 2)
        if s == 0:
            fac[lo:lo + step // 2] = -amp
            fac[lo + step // 2:lo + step] = amp
        else:
            fac[lo:lo + step] = amp
        out = np.multiply.outer(out, fac)
    return GridFunction(cube.dim, depth, out)


def project_wq(f: GridFunction, cube: DyadicCube, basis: str = "wilson") -> GridFunction:
    """Orthogonal projection of f onto W(Q), via the Wilson or the tensor basis."""
    if cube.level >= f.depth:
        raise ValueError("cube level must be below the grid depth")
    if basis == "wilson":
        funcs = [wilson_haar(HaarIndex(cube, j), f.depth) for j in range(1, 2**f.dim)]
    elif basis == "tensor":
        funcs = [tensor_haar(TensorHaarIndex(cube, s), f.depth) for s in signatures(f.dim)]
    else:
        raise ValueError(f"unknown basis {basis!r}")
    out = np.zeros_like(f.values)
    for h in funcs:
        out = out + f.inner(h) * h.values
    return f.with_values(out)


# --- transforms -----------------------------------------------------------------------


def analyze(f: GridFunction, w: GridFunction | None = None) -> CoefficientTree:
    """Coefficients <f, h^w>_w for every pair at levels 0..L-1, plus the w-mean of f."""
    if w is not None:
        f.check_compatible(w)
        _check_weight(w)
    n, depth = f.dim, f.depth
    fw = f.values if w is None else f.values * w.values
    mean = float(fw.sum() / (w.values.sum() if w is not None else fw.size))
    levels = []
    for k in range(depth):
        i1, i2 = pair_integrals(fw, k)
        a1, a2 = _amplitudes(n, depth, k, w)
        levels.append(a2 * i2 - a1 * i1)
    return CoefficientTree(n, depth, mean, levels, w)


def haar_child_values(dim: int, depth: int, level: int, w: GridFunction | None = None) -> np.ndarray:
    """Values of every h^w_{j,Q} on the children of Q: shape (2^level,)*n + (J, 2^n)."""
    m1, m2 = _masks(dim)
    a1, a2 = _amplitudes(dim, depth, level, w)
    return a2[..., None] * m2 - a1[..., None] * m1


def synthesize(t: CoefficientTree, include_mean: bool = True) -> GridFunction:
    n, depth = t.dim, t.depth
    out = np.full((2**depth,) * n, t.mean if include_mean else 0.0)
    for k, coef in enumerate(t.levels):
        hv = haar_child_values(n, depth, k, t.weight)
        child_vals = np.einsum("...j,...jc->...c", coef, hv)
        out = out + upsample(merge_children(child_vals), 2 ** (depth - k - 1))
    return GridFunction(n, depth, out)


def parseval_defect(f: GridFunction, w: GridFunction | None = None) -> float:
    """| ||f||^2_w - (mean term + sum of squared coefficients) |."""
    t = analyze(f, w)
    total_w = 1.0 if w is None else w.integral()
    return abs(f.norm(w) ** 2 - (t.mean**2 * total_w + t.sum_squares()))


def _haar_value_on_child(cube: DyadicCube, i: int, child: int, w: GridFunction | None, depth: int) -> float:
    """Value of h^w_{i,cube} on the child with lexicographic number ``child``."""
    m1, m2 = _masks(cube.dim)
    if not (m1[i - 1, child] or m2[i - 1, child]):
        return 0.0
    idx = HaarIndex(cube, i)
    if w is None:
        amp = float(idx.volume) ** -0.5
        return amp if m2[i - 1, child] else -amp
    e1, e2 = pair_sets(idx)
    w1, w2 = w.integral(e1), w.integral(e2)
    we = w1 + w2
    return float(np.sqrt(w1 / w2) / np.sqrt(we)) if m2[i - 1, child] else float(-np.sqrt(w2 / w1) / np.sqrt(we))


def _child_number(parent: DyadicCube, child_coords: tuple[int, ...], child_level: int) -> int:
    shift = child_level - parent.level - 1
    num = 0
    for c in child_coords:
        num = 2 * num + ((c >> shift) & 1)
    return num


def average_from_coefficients(t: CoefficientTree, idx: HaarIndex) -> float:
    """Weighted average of f over E_{j,Q} rebuilt from the coefficients of larger pairs.

    Sums <f, h^w_{i,Q'}>_w h^w_{i,Q'}(E_{j,Q}) over all (Q', i) whose support
    strictly contains E_{j,Q}, plus the global weighted mean.
    """
    cube = idx.cube
    if cube.level >= t.depth:
        raise ValueError("index level must be below the tree depth")
    total = t.mean
    anc = cube
    while anc.level > 0:
        parent = anc.parent()
        child = _child_number(parent, anc.coords, anc.level)
        for i in range(1, 2**cube.dim):
            val = _haar_value_on_child(parent, i, child, t.weight, t.depth)
            if val:
                total += t[HaarIndex(parent, i)] * val
        anc = parent
    m1, m2 = _masks(cube.dim)
    child = int(np.flatnonzero(m1[idx.j - 1] + m2[idx.j - 1])[0])
    sub = _subtree(cube.dim)
    for i in range(1, 2**cube.dim):
        if i != idx.j and sub[i - 1, idx.j - 1]:
            # h_i is constant on E_j, so any child inside E_j gives its value
            total += t[HaarIndex(cube, i)] * _haar_value_on_child(cube, i, child, t.weight, t.depth)
    return float(total)


def wilson_matrix(dim: int, depth: int) -> tuple[list[HaarIndex], np.ndarray]:
    """Columns are the cell values of every h_{j,Q}, level-major order."""
    from dpl.dyadic import haar_indices

    idxs = list(haar_indices(dim, depth))
    mat = np.empty((2 ** (dim * depth), len(idxs)))
    for c, idx in enumerate(idxs):
        mat[:, c] = wilson_haar(idx, depth).flat
    return idxs, mat


def flatten_levels(levels: list[np.ndarray]) -> np.ndarray:
    """Concatenate per-level coefficient arrays in :func:`dpl.dyadic.haar_indices` order."""
    if not levels:
        return np.zeros(0)
    return np.concatenate([a.reshape(-1) for a in levels])


def unflatten_levels(vec: np.ndarray, dim: int, depth: int) -> list[np.ndarray]:
    out, pos = [], 0
    J = 2**dim - 1
    for k in range(depth):
        size = 2 ** (dim * k) * J
        out.append(np.asarray(vec[pos:pos + size], dtype=float).reshape((2**k,) * dim + (J,)))
        pos += size
    return out


def subtree_matrix(dim: int) -> np.ndarray:
    return _subtree(dim)


def masks(dim: int) -> tuple[np.ndarray, np.ndarray]:
    return _masks(dim)


def orthogonal_coefficients(w: GridFunction) -> list[np.ndarray]:
    """A^w_{j,Q} for every pair, per level."""
    _check_weight(w)
    out = []
    for k in range(w.depth):
        ae, a1, a2 = pair_averages(w.values, k)
        out.append((a2 - a1) / (2.0 * ae))
    return out


def bessel_sum(g: GridFunction, w: GridFunction) -> float:
    """sum over pairs of <g w^{1/2}, H^w>^2 / (|E| <w>_E), never above ||g||^2."""
    g.check_compatible(w)
    u = g.values * np.sqrt(w.values)
    total = 0.0
    for k, a in enumerate(orthogonal_coefficients(w)):
        i1, i2 = pair_integrals(u, k)
        w1, w2 = pair_integrals(w.values, k)
        # H^w is -1 - A on E^1 and 1 - A on E^2
        total += float(np.sum((i2 - i1 - a * (i1 + i2)) ** 2 / (w1 + w2)))
    return total


def orthogonal_norm_slack(w: GridFunction) -> float:
    """min over pairs of |E| <w>_E - ||w^{1/2} H^w||^2 (nonnegative when the norm bound holds)."""
    slack = np.inf
    for k, a in enumerate(orthogonal_coefficients(w)):
        w1, w2 = pair_integrals(w.values, k)
        sq = w1 * (1 + a) ** 2 + w2 * (1 - a) ** 2
        slack = min(slack, float(((w1 + w2) - sq).min()))
    return slack
