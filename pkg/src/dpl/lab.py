"""Numerical verification of the weighted embedding and Bellman-function inequalities.

Every localized sum has the shape

    (1/|E_{i,Q'}|) sum_{Q in D(Q')} sum_{j: E_{j,Q} in E_{i,Q'}} q_{j,Q}

and is evaluated for all regions (Q', i) at once by :func:`region_sums`. The
absolute constants in these inequalities are unknown, so each check reports the largest
LHS/RHS ratio (the empirical constant) rather than a pass/fail against C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from dpl.dyadic import DyadicCube, HaarIndex, e_set, half_containment
from dpl.grid import GridFunction, block_means, split_children
from dpl.haar import analyze, masks, pair_averages, pair_volume_factors, subtree_matrix
from dpl.report import CheckReport, to_json
from dpl.weights import a2r_characteristic, apd_characteristic, as_weight, bmod_norm

Levels = list  # list of per-level arrays shaped (2^k,)*n + (2^n - 1,)


def pair_volumes(dim: int, level: int) -> np.ndarray:
    return pair_volume_factors(dim) * 2.0 ** (-dim * level)


def region_sums(values: Levels, dim: int) -> Levels:
    """out[k][pos + (i-1,)] = sum of values over all (Q, j) with E_{j,Q} inside E_{i,Q'}, Q' = (k, pos)."""
    sub = subtree_matrix(dim)
    m1, m2 = masks(dim)
    depth = len(values)
    below = np.zeros((2**depth,) * dim)
    out: Levels = [None] * depth
    for k in range(depth - 1, -1, -1):
        r = values[k] @ sub.T + split_children(below) @ (m1 + m2).T
        out[k] = r
        below = r[..., 0]
    return out


def half_region_sums(values: Levels, dim: int) -> tuple[Levels, Levels]:
    """Same as :func:`region_sums` but over E^1_{i,Q'} and E^2_{i,Q'}."""
    sub1, sub2 = (c.astype(float) for c in half_containment(dim))
    m1, m2 = masks(dim)
    full = region_sums(values, dim)
    depth = len(values)
    h1, h2 = [], []
    for k in range(depth):
        below = full[k + 1][..., 0] if k + 1 < depth else np.zeros((2 ** (k + 1),) * dim)
        cs = split_children(below)
        h1.append(values[k] @ sub1.T + cs @ m1.T)
        h2.append(values[k] @ sub2.T + cs @ m2.T)
    return h1, h2


def normalized_region_sums(values: Levels, dim: int) -> Levels:
    return [r / pair_volumes(dim, k) for k, r in enumerate(region_sums(values, dim))]


def _region_label(dim: int, level: int, flat: int) -> str:
    J = 2**dim - 1
    pos, j0 = divmod(flat, J)
    coords = tuple(int(c) for c in np.unravel_index(pos, (2**level,) * dim))
    return str(HaarIndex(DyadicCube(dim, level, coords), j0 + 1))


def _max_ratio(lhs: Levels, rhs: Levels, dim: int) -> tuple[float, str | None]:
    best, where = 0.0, None
    for k, (l, r) in enumerate(zip(lhs, rhs)):
        r = np.broadcast_to(r, l.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(l == 0, 0.0, l / r)
        pos = int(np.argmax(ratio))
        if ratio.flat[pos] > best:
            best, where = float(ratio.flat[pos]), _region_label(dim, k, pos)
    return best, where


@dataclass
class CarlesonSequence:
    """Nonnegative alpha_{j,Q} for the pairs at levels 0..L-1."""

    dim: int
    depth: int
    levels: Levels

    def __post_init__(self):
        if len(self.levels) != self.depth:
            raise ValueError("sequence must cover every level below the depth")
        for k, arr in enumerate(self.levels):
            if arr.shape != (2**k,) * self.dim + (2**self.dim - 1,):
                raise ValueError(f"bad shape at level {k}")
            if np.any(arr < 0):
                raise ValueError("Carleson sequences are nonnegative")

    @classmethod
    def zeros(cls, dim: int, depth: int) -> CarlesonSequence:
        return cls(dim, depth, [np.zeros((2**k,) * dim + (2**dim - 1,)) for k in range(depth)])

    @classmethod
    def from_symbol(cls, b: GridFunction) -> CarlesonSequence:
        """alpha_{j,Q} = <b, h_{j,Q}>^2."""
        return cls(b.dim, b.depth, [c**2 for c in analyze(b).levels])

    @classmethod
    def volumes(cls, dim: int, depth: int) -> CarlesonSequence:
        """alpha_{j,Q} = |E_{j,Q}|."""
        return cls(dim, depth, [np.broadcast_to(pair_volumes(dim, k), (2**k,) * dim + (2**dim - 1,)).copy()
                                for k in range(depth)])

    @classmethod
    def random(cls, dim: int, depth: int, rng: np.random.Generator) -> CarlesonSequence:
        return cls(dim, depth, [rng.uniform(0, 1, (2**k,) * dim + (2**dim - 1,)) * pair_volumes(dim, k)
                                for k in range(depth)])

    def __getitem__(self, idx: HaarIndex) -> float:
        return float(self.levels[idx.cube.level][idx.cube.coords + (idx.j - 1,)])

    def __setitem__(self, idx: HaarIndex, value: float) -> None:
        self.levels[idx.cube.level][idx.cube.coords + (idx.j - 1,)] = value


def carleson_sum(alpha: CarlesonSequence, base: HaarIndex,
                 kernel: Levels | Callable[[HaarIndex], float] | None = None) -> float:
    """(1/|E_base|) sum over (Q, j) with E_{j,Q} inside E_base of alpha_{j,Q} kernel(j, Q)."""
    if base.cube.level >= alpha.depth:
        raise ValueError("base index must sit below the sequence depth")
    vals = alpha.levels
    if callable(kernel):
        vals = [a.copy() for a in alpha.levels]
        for k in range(alpha.depth):
            for pos in np.ndindex(*(2**k,) * alpha.dim):
                cube = DyadicCube(alpha.dim, k, pos)
                for j in range(1, 2**alpha.dim):
                    vals[k][pos + (j - 1,)] *= kernel(HaarIndex(cube, j))
    elif kernel is not None:
        vals = [a * kv for a, kv in zip(alpha.levels, kernel)]
    sums = region_sums(vals, alpha.dim)
    return float(sums[base.cube.level][base.cube.coords + (base.j - 1,)] / float(base.volume))


def carleson_constant(alpha: CarlesonSequence, kernel: Levels | None = None) -> float:
    vals = alpha.levels if kernel is None else [a * kv for a, kv in zip(alpha.levels, kernel)]
    return max(float(r.max()) for r in normalized_region_sums(vals, alpha.dim)) if alpha.depth else 0.0


# --- weight data shared by the checks -------------------------------------------------------------


@dataclass
class PairData:
    """Averages of w and w^{-1} over E, E^1, E^2 for every pair."""

    dim: int
    depth: int
    w: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    vol: list[np.ndarray]

    @classmethod
    def of(cls, w: GridFunction) -> PairData:
        as_weight(w)
        inv = 1.0 / w.values
        return cls(
            w.dim, w.depth,
            [pair_averages(w.values, k) for k in range(w.depth)],
            [pair_averages(inv, k) for k in range(w.depth)],
            [np.broadcast_to(pair_volumes(w.dim, k), (2**k,) * w.dim + (2**w.dim - 1,)) for k in range(w.depth)],
        )


def characteristic(w: GridFunction, variant: str) -> float:
    if variant == "dyadic":
        return apd_characteristic(w, 2.0).value
    if variant == "anisotropic":
        return a2r_characteristic(w).value
    raise ValueError(f"unknown variant {variant!r}")


def _ratio_report(check: str, variant: str, w: GridFunction, lhs: Levels, rhs: Levels,
                  cap: float | None, params: dict) -> CheckReport:
    const, where = _max_ratio(lhs, rhs, w.dim)
    rep = CheckReport(check=check, variant=variant, dim=w.dim, depth=w.depth, empirical_constant=const,
                      worst_region=where, params=params, cap=cap)
    rep.lhs, rep.rhs = lhs, rhs
    if not all(np.all(np.isfinite(x)) for x in lhs):
        rep.violations.append("non-finite left-hand side")
    return rep


PROPOSITION_FACTORS = {
    # multiplier of A [w] (wp1) or C [w] (wp2-wp4) in the stated bound, by variant
    "wp1": lambda n, variant: 4.0 * (4.0 ** (n - 1) if variant == "dyadic" else 1.0),
    "wp2": lambda n, variant: 4.0 ** (n - 1) if variant == "dyadic" else 1.0,
    "wp3": lambda n, variant: 4.0 ** (n - 1) if variant == "dyadic" else 1.0,
    "wp4": lambda n, variant: 4.0 ** (n - 1) if variant == "dyadic" else 1.0,
}


def proposition_suite(w: GridFunction, which: str, variant: str = "dyadic",
                      alpha: CarlesonSequence | None = None, cap: float | None = None) -> CheckReport:
    """Empirical constant of wp1..wp4 over every region (Q', i) at levels < L.

    The main inequality uses [w]_{A_2^d} (dyadic) or [w]_{A_2^R} (anisotropic).
    The characteristic-free companion inequality of each proposition is
    reported in ``params['companion_constant']``.
    """
    n = w.dim
    pd = PairData.of(w)
    char = characteristic(w, variant)
    params: dict = {"characteristic": char, "stated_factor": PROPOSITION_FACTORS[which](n, variant)}
    aE = [t[0] for t in pd.w]
    iE = [t[0] for t in pd.v]
    dw = [(t[1] - t[2]) / t[0] for t in pd.w]  # (<w>_{E1} - <w>_{E2}) / <w>_E
    if which == "wp1":
        if alpha is None:
            alpha = CarlesonSequence.volumes(n, w.depth)
        A = carleson_constant(alpha)
        params["carleson_constant"] = A
        if A == 0:
            lhs = [np.zeros_like(a) for a in aE]
            return _ratio_report(which, variant, w, lhs, aE, cap, {**params, "companion_constant": 0.0})
        lhs = normalized_region_sums([a * e for a, e in zip(alpha.levels, aE)], n)
        rhs = [A * char * e for e in aE]
        comp_lhs = normalized_region_sums([a / i for a, i in zip(alpha.levels, iE)], n)
        params["companion_constant"] = _max_ratio(comp_lhs, [A * e for e in aE], n)[0]
        params["companion_stated"] = 4.0
    elif which == "wp2":
        lhs = normalized_region_sums([d**2 * v * i for d, v, i in zip(dw, pd.vol, iE)], n)
        rhs = [char * i for i in iE]
        comp = normalized_region_sums([(t[1] - t[2]) ** 2 / t[0] ** 3 * v for t, v in zip(pd.w, pd.vol)], n)
        params["companion_constant"] = _max_ratio(comp, iE, n)[0]
    elif which == "wp3":
        lhs = normalized_region_sums([d**2 * v * a * i for d, v, a, i in zip(dw, pd.vol, aE, iE)], n)
        rhs = [np.full_like(a, char) for a in aE]
        quart = [(a * i) ** 0.25 for a, i in zip(aE, iE)]
        comp = normalized_region_sums([d**2 * v * q for d, v, q in zip(dw, pd.vol, quart)], n)
        params["companion_constant"] = _max_ratio(comp, quart, n)[0]
    elif which == "wp4":
        lhs = normalized_region_sums([d**2 * v * a for d, v, a in zip(dw, pd.vol, aE)], n)
        rhs = [char * a for a in aE]
    else:
        raise ValueError(f"unknown proposition {which!r}")
    return _ratio_report(which, variant, w, lhs, rhs, cap, params)


def mmte_suite(w: GridFunction, variant: str = "dyadic", cap: float | None = None) -> CheckReport:
    """Martingale-transform weight inequalities and the Cauchy-Schwarz chain behind the third one.

    Differences are taken termwise in absolute value. The chain compares, for
    every region, sum |dw dv| |E| / <v>_E with the square roots of
    sum dw^2 |E| / <w>_E and sum (dv / <v>_E)^2 |E| <w>_E (v = w^{-1}).
    """
    n = w.dim
    pd = PairData.of(w)
    char = characteristic(w, variant)
    aE = [t[0] for t in pd.w]
    iE = [t[0] for t in pd.v]
    dw = [t[1] - t[2] for t in pd.w]
    dv = [t[1] - t[2] for t in pd.v]
    s1 = region_sums([d**2 * v * a for d, v, a in zip(dv, pd.vol, aE)], n)
    s2 = region_sums([np.abs(x * y) * v for x, y, v in zip(dw, dv, pd.vol)], n)
    s3 = region_sums([np.abs(x * y) / i * v for x, y, i, v in zip(dw, dv, iE, pd.vol)], n)
    s4 = region_sums([d**2 * v / a for d, v, a in zip(dw, pd.vol, aE)], n)
    s5 = region_sums([(d / i) ** 2 * v * a for d, i, v, a in zip(dv, iE, pd.vol, aE)], n)
    vol = [pair_volumes(n, k) for k in range(w.depth)]

    def norm(levels):
        return [x / v for x, v in zip(levels, vol)]

    consts = {
        "mmte1": _max_ratio(norm(s1), [char**2 * i for i in iE], n),
        "mmte2": _max_ratio(norm(s2), [np.full_like(a, char) for a in aE], n),
        "mmte3": _max_ratio(norm(s3), [char * a for a in aE], n),
        "mmte4": _max_ratio(norm(s4), [char * a for a in aE], n),
        "mmte5": _max_ratio(norm(s5), [char * a for a in aE], n),
    }
    chain_gap = 0.0
    violations = []
    for k in range(w.depth):
        bound = np.sqrt(s4[k] * s5[k])
        gap = (s3[k] - bound) / np.maximum(bound, np.finfo(float).tiny)
        chain_gap = max(chain_gap, float(gap.max()))
        bad = s3[k] > bound * (1 + 1e-12)
        if np.any(bad):
            violations.append(f"chain fails at level {k} on {int(bad.sum())} regions")
    rep = CheckReport(check="mmte", variant=variant, dim=n, depth=w.depth,
                      empirical_constant=max(c for c, _ in consts.values()),
                      worst_region=max(consts.values(), key=lambda t: t[0])[1],
                      violations=violations, cap=cap,
                      params={"characteristic": char, "chain_relative_gap": chain_gap,
                              **{k: c for k, (c, _) in consts.items()}})
    rep.lhs = {"mmte3": s3, "mmte4": s4, "mmte5": s5}
    return rep


def _as_list(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


def weighted_carleson_embedding_check(alpha: CarlesonSequence, w: GridFunction,
                                      f: GridFunction | Sequence[GridFunction],
                                      cap: float | None = None) -> CheckReport:
    """Minimal A with (1/|E_i|) sum alpha <w>_E^2 <= A <w>_{E_i}, then sum alpha <f w^{1/2}>_E^2 / (A ||f||^2)."""
    n = w.dim
    pd = PairData.of(w)
    aE = [t[0] for t in pd.w]
    cond = normalized_region_sums([a * e**2 for a, e in zip(alpha.levels, aE)], n)
    A = max((float((c / e).max()) for c, e in zip(cond, aE)), default=0.0)
    ratios = []
    root = np.sqrt(w.values)
    for fi in _as_list(f):
        fw = fi.values * root
        lhs = sum(float(np.sum(a * pair_averages(fw, k)[0] ** 2)) for k, a in enumerate(alpha.levels))
        norm2 = fi.norm() ** 2
        ratios.append(0.0 if lhs == 0 else lhs / (A * norm2))
    return CheckReport(check="mwce", dim=n, depth=w.depth, empirical_constant=max(ratios, default=0.0),
                       cap=cap, params={"A": A, "samples": len(ratios), "stated_factor": 4.0})


def bilinear_embedding_check(alpha: CarlesonSequence, w: GridFunction, v: GridFunction,
                             f: GridFunction | Sequence[GridFunction], g: GridFunction | Sequence[GridFunction],
                             variant: str = "PMBE", cap: float | None = None) -> CheckReport:
    """Minimal A over the three embedding conditions (and <w>_Q <v>_Q <= A), then the bilinear ratio.

    PMBE: sum alpha <f>_{E,w} <g>_{E,v} against A ||f||_{L^2(w)} ||g||_{L^2(v)}.
    MBE:  sum alpha <f w^{1/2}>_E <g v^{1/2}>_E |E| against A ||f|| ||g||.
    """
    n = w.dim
    pw, pv = PairData.of(w), PairData.of(v)
    aw = [t[0] for t in pw.w]
    av = [t[0] for t in pv.w]
    vol = pw.vol
    if variant == "PMBE":
        terms = [
            ([a / x for a, x in zip(alpha.levels, aw)], av),
            ([a / y for a, y in zip(alpha.levels, av)], aw),
            (alpha.levels, None),
        ]
    elif variant == "MBE":
        terms = [
            ([a * y * s for a, y, s in zip(alpha.levels, av, vol)], av),
            ([a * x * s for a, x, s in zip(alpha.levels, aw, vol)], aw),
            ([a * x * y * s for a, x, y, s in zip(alpha.levels, aw, av, vol)], None),
        ]
    else:
        raise ValueError(f"unknown bilinear variant {variant!r}")
    conds = []
    for vals, denom in terms:
        sums = normalized_region_sums(vals, n)
        if denom is None:
            conds.append(max((float(s.max()) for s in sums), default=0.0))
        else:
            conds.append(max((float((s / d).max()) for s, d in zip(sums, denom)), default=0.0))
    hyp = max(float((block_means(w.values, k) * block_means(v.values, k)).max()) for k in range(w.depth + 1))
    A = max(conds + [hyp])
    ratios = []
    for fi, gi in zip(_as_list(f), _as_list(g)):
        total = 0.0
        for k, a in enumerate(alpha.levels):
            if variant == "PMBE":
                fa = pair_averages(fi.values * w.values, k)[0] / aw[k]
                ga = pair_averages(gi.values * v.values, k)[0] / av[k]
                total += float(np.sum(a * fa * ga))
            else:
                fa = pair_averages(fi.values * np.sqrt(w.values), k)[0]
                ga = pair_averages(gi.values * np.sqrt(v.values), k)[0]
                total += float(np.sum(a * fa * ga * vol[k]))
        if variant == "PMBE":
            denom = fi.norm(w) * gi.norm(v)
        else:
            denom = fi.norm() * gi.norm()
        ratios.append(0.0 if total == 0 else abs(total) / (A * denom))
    return CheckReport(check="bilinear-embedding", variant=variant, dim=n, depth=w.depth,
                       empirical_constant=max(ratios, default=0.0), cap=cap,
                       params={"A": A, "conditions": conds, "weight_product_sup": hyp,
                               "hypothesis_note": "uses <w>_Q <v>_Q < A for the stated <w>_Q <w>_Q < A",
                               "samples": len(ratios)})


# --- Bellman function of the weighted Carleson embedding -----------------------------------------


def bellman_b(F, f, u, Y, A: float = 1.0):
    return 4.0 * A * (F - f**2 / (u + Y))


def sample_domain(rng: np.random.Generator, size: int) -> np.ndarray:
    """Rejection sampling of (F, f, u, Y) from U(0,1]^4 restricted to f^2 <= F u and Y <= u."""
    out = np.empty((0, 4))
    while out.shape[0] < size:
        cand = 1.0 - rng.uniform(0.0, 1.0, size=(2 * size, 4))
        F, f, u, Y = cand.T
        keep = (f**2 <= F * u) & (Y <= u)
        out = np.vstack([out, cand[keep]])
    return out[:size]


def bellman_lmwce_check(samples: int, seed: int, A: float = 1.0) -> CheckReport:
    """Size 0 <= B <= 4AF and convexity B - (B1 + B2)/2 >= (f^2/u^2) M on sampled midpoint triples."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    p1 = np.empty((0, 4))
    p2 = np.empty((0, 4))
    ms = np.empty(0)
    while ms.size < samples:
        need = samples - ms.size
        a = sample_domain(rng, 2 * need)
        b = sample_domain(rng, 2 * need)
        m = rng.uniform(0.0, 1.0, 2 * need)
        mid = (a + b) / 2
        keep = m + mid[:, 3] <= mid[:, 2]
        p1, p2, ms = np.vstack([p1, a[keep]]), np.vstack([p2, b[keep]]), np.concatenate([ms, m[keep]])
    p1, p2, ms = p1[:samples], p2[:samples], ms[:samples]
    mid = (p1 + p2) / 2
    mid[:, 3] += ms
    B = bellman_b(*mid.T, A=A)
    B1 = bellman_b(*p1.T, A=A)
    B2 = bellman_b(*p2.T, A=A)
    F, f, u, _ = mid.T
    size_low = B
    size_high = 4 * A * F - B
    convex = B - (B1 + B2) / 2 - f**2 / u**2 * ms
    # round-off guard relative to the magnitude of the terms involved
    tol = 1e-12 * (np.abs(B) + np.abs(B1) + np.abs(B2) + 1.0)
    violations = []
    for name, arr in (("size lower", size_low), ("size upper", size_high), ("convexity", convex)):
        bad = int(np.count_nonzero(arr < -tol))
        if bad:
            violations.append(f"{name}: {bad} samples")
    min_slack = float(convex.min())
    return CheckReport(check="bellman-lmwce", dim=0, depth=0, empirical_constant=0.0,
                       violations=violations,
                       params={"samples": samples, "seed": seed, "min_convexity_slack": min_slack,
                               "min_size_slack": float(min(size_low.min(), size_high.min()))})


# --- induction in scales ---------------------------------------------------------------------------


@dataclass
class InductionInstance:
    """Data for one run of the induction-in-scales summation.

    ``x_cells`` holds the cell values of the X variables, shape (2^L,)*n + (d,);
    X over a region is their average, so the midpoint relation for X holds by
    construction. Y over a region E is |E|^{-1} sum_{E' in E} M_{E'} |E'|, which
    makes Y_E = M_E + (Y_{E1} + Y_{E2}) / 2. ``c`` holds the per-pair quantities
    C_{j,Q} being summed, ``bound`` the constant A and ``b`` the size function.
    """

    dim: int
    depth: int
    x_cells: np.ndarray
    m: Levels
    c: Levels
    bound: float
    b: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bellman: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        shape = (2**self.depth,) * self.dim
        if self.x_cells.shape[:-1] != shape:
            raise ValueError(f"x_cells must have shape {shape} + (d,)")
        for name, levels in (("m", self.m), ("c", self.c)):
            if len(levels) != self.depth:
                raise ValueError(f"{name} must cover every level below the depth")
            for k, arr in enumerate(levels):
                if arr.shape != (2**k,) * self.dim + (2**self.dim - 1,):
                    raise ValueError(f"{name} has a bad shape at level {k}")
                if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                    raise ValueError(f"{name} must be finite and nonnegative")

    def region_data(self):
        """Per level: (X_E, X_E1, X_E2, Y_E, Y_E1, Y_E2)."""
        n = self.dim
        d = self.x_cells.shape[-1]
        mass = [mk * pair_volumes(n, k) for k, mk in enumerate(self.m)]
        ys = region_sums(mass, n)
        y1, y2 = half_region_sums(mass, n)
        out = []
        for k in range(self.depth):
            comps = [pair_averages(self.x_cells[..., c], k) for c in range(d)]
            xe = np.stack([t[0] for t in comps], axis=-1)
            x1 = np.stack([t[1] for t in comps], axis=-1)
            x2 = np.stack([t[2] for t in comps], axis=-1)
            vol = pair_volumes(n, k)
            out.append((xe, x1, x2, ys[k] / vol, y1[k] / (vol / 2), y2[k] / (vol / 2)))
        return out


def induction_in_scales_check(inst: InductionInstance, root: HaarIndex, cap: float | None = 1.0) -> CheckReport:
    """sum over pairs inside E_root of C <= |E_root| A b(X_root, Y_root), plus node-wise Bellman checks."""
    inst.validate()
    n = inst.dim
    data = inst.region_data()
    for k, (xe, x1, x2, ye, y1, y2) in enumerate(data):
        mk = inst.m[k]
        scale = np.abs(ye) + np.abs(mk) + 1.0
        if np.any(np.abs(ye - (mk + (y1 + y2) / 2)) > 1e-9 * scale):
            raise ValueError(f"inconsistent instance: Y midpoint relation fails at level {k}")
        if np.any(np.abs(xe - (x1 + x2) / 2) > 1e-9 * (np.abs(xe) + 1.0)):
            raise ValueError(f"inconsistent instance: X midpoint relation fails at level {k}")
    lev, pos, j0 = root.cube.level, root.cube.coords, root.j - 1
    total = region_sums(inst.c, n)[lev][pos + (j0,)]
    xe, _, _, ye, _, _ = data[lev]
    vol = float(root.volume)
    rhs = vol * inst.bound * float(inst.b(xe[pos + (j0,)], ye[pos + (j0,)]))
    ratio = 0.0 if total == 0 else float(total / rhs)
    rep = CheckReport(check="induction-in-scales", variant=inst.label, dim=n, depth=inst.depth,
                      empirical_constant=ratio, worst_region=str(root), cap=cap,
                      params={"lhs": float(total), "rhs": rhs, "slack": rhs - float(total)})
    if inst.bellman is not None:
        rootrect = e_set(root)
        size_bad = conv_bad = 0
        min_defect = math.inf
        for k, (xe, x1, x2, ye, y1, y2) in enumerate(data):
            if k < lev:
                continue
            inside = _regions_inside(rootrect, n, k, root)
            Be = inst.bellman(xe, ye)
            defect = (Be - (inst.bellman(x1, y1) + inst.bellman(x2, y2)) / 2) * pair_volumes(n, k) - inst.c[k]
            size = inst.bound * inst.b(xe, ye) - Be
            tol = 1e-12 * (np.abs(Be) + 1.0)
            size_bad += int(np.count_nonzero(inside & ((Be < -tol) | (size < -tol))))
            conv_bad += int(np.count_nonzero(inside & (defect < -tol * pair_volumes(n, k))))
            if np.any(inside):
                min_defect = min(min_defect, float(defect[inside].min()))
        if size_bad:
            rep.violations.append(f"Bellman size property fails at {size_bad} regions")
        if conv_bad:
            rep.violations.append(f"Bellman convexity property fails at {conv_bad} regions")
        rep.params["min_convexity_defect"] = min_defect
    return rep


def _regions_inside(root_rect, dim: int, level: int, root: HaarIndex) -> np.ndarray:
    """Boolean mask over the (cube, j) regions of ``level`` that lie inside the root region."""
    J = 2**dim - 1
    shape = (2**level,) * dim + (J,)
    out = np.zeros(shape, dtype=bool)
    if level == root.cube.level:
        sub = subtree_matrix(dim)
        out[root.cube.coords] = sub[root.j - 1].astype(bool)
        return out
    for pos in np.ndindex(*(2**level,) * dim):
        if root_rect.contains(DyadicCube(dim, level, pos).rectangle()):
            out[pos] = True
    return out


def wp1_instance(w: GridFunction, alpha: CarlesonSequence) -> InductionInstance:
    """X = (<w>, <w^{-1}>), M_E = alpha_E / (A |E|), C = alpha / <w^{-1}>_E, bound 4A <w>."""
    n = w.dim
    A = carleson_constant(alpha)
    if A <= 0:
        raise ValueError("Carleson sequence is identically zero")
    pd = PairData.of(w)
    x = np.stack([w.values, 1.0 / w.values], axis=-1)
    m = [a / (A * pair_volumes(n, k)) for k, a in enumerate(alpha.levels)]
    c = [a / t[0] for a, t in zip(alpha.levels, pd.v)]
    return InductionInstance(n, w.depth, x, m, c, 4.0 * A, lambda X, Y: X[..., 0], label="wp1",
                             meta={"A": A})


def mwce_instance(w: GridFunction, f: GridFunction, alpha: CarlesonSequence) -> InductionInstance:
    """Weighted Carleson embedding through the Bellman function 4(F - f^2 / (u + Y)).

    X = (<f^2>, <f w^{1/2}>, <w>), M_E = alpha_E <w>_E^2 / (A |E|) with A the
    embedding constant, and C_E = alpha_E <f w^{1/2}>_E^2 / A.
    """
    n = w.dim
    if not np.all(f.values > 0):
        raise ValueError("the embedding instance needs a positive f")
    pd = PairData.of(w)
    aE = [t[0] for t in pd.w]
    cond = normalized_region_sums([a * e**2 for a, e in zip(alpha.levels, aE)], n)
    A = max(float((c / e).max()) for c, e in zip(cond, aE))
    if A <= 0:
        raise ValueError("Carleson sequence is identically zero")
    fw = f.values * np.sqrt(w.values)
    x = np.stack([f.values**2, fw, w.values], axis=-1)
    m = [a * e**2 / (A * pair_volumes(n, k)) for k, (a, e) in enumerate(zip(alpha.levels, aE))]
    c = [a * pair_averages(fw, k)[0] ** 2 / A for k, a in enumerate(alpha.levels)]

    def size(X, Y):
        return X[..., 0]

    def bellman(X, Y):
        return bellman_b(X[..., 0], X[..., 1], X[..., 2], Y)

    return InductionInstance(n, w.depth, x, m, c, 4.0, size, bellman, label="mwce", meta={"A": A})


# --- scaling --------------------------------------------------------------------------------------


@dataclass
class ScalingTable:
    op_kind: str
    rows: list[dict]
    slope: float
    header: list[str] = field(default_factory=lambda: ["alpha", "a2d", "a2r", "norm", "ratio", "slope"])

    def ratio_spread(self) -> float:
        r = [row["ratio"] for row in self.rows]
        return max(r) / min(r)

    def to_dict(self) -> dict:
        return {"op_kind": self.op_kind, "rows": self.rows, "slope": self.slope}


def scaling_experiment(family: Sequence[tuple[float, GridFunction]], b: GridFunction | None, op_kind: str,
                       seed: int = 0) -> ScalingTable:
    """Weighted norms across a weight family, with the log-log slope of norm against [w]_{A_2^d}.

    ``ratio`` divides the norm by [w] ||b||_{BMO^d} (paraproduct), [w]
    (martingale transform) or [w]^{1/2} (square function).
    """
    from dpl.operators import SignPattern, operator_matrix, operator_norm, square_function_norm

    family = list(family)
    if not family:
        raise ValueError("empty weight family")
    dim, depth = family[0][1].dim, family[0][1].depth
    for _, w in family:
        if (w.dim, w.depth) != (dim, depth):
            raise ValueError("all weights in a family must share dim and depth")
    op = None
    bmo = 1.0
    if op_kind == "paraproduct":
        if b is None:
            raise ValueError("paraproduct scaling needs a symbol")
        bmo = bmod_norm(b, "L1")
        if bmo <= 0:
            raise ValueError("symbol has zero BMO norm")
        op = operator_matrix("paraproduct", dim, depth, b=b)
    elif op_kind == "martingale":
        op = operator_matrix("martingale", dim, depth, sigma=SignPattern.random(dim, depth, seed))
    elif op_kind != "square":
        raise ValueError(f"unknown operator kind {op_kind!r}")
    rows = []
    for label, w in family:
        a2d = apd_characteristic(w, 2.0).value
        a2r = a2r_characteristic(w).value
        if op_kind == "square":
            norm = square_function_norm(w)
            ratio = norm / math.sqrt(a2d)
        else:
            norm = operator_norm(op, w)
            ratio = norm / (a2d * bmo)
        rows.append({"alpha": float(label), "a2d": a2d, "a2r": a2r, "norm": norm, "ratio": ratio})
    xs = np.log([r["a2d"] for r in rows])
    if len(rows) < 2 or np.ptp(xs) == 0:
        raise ValueError("slope fit needs at least two weights with distinct characteristics")
    slope = float(np.polyfit(xs, np.log([r["norm"] for r in rows]), 1)[0])
    for r in rows:
        r["slope"] = slope
    return ScalingTable(op_kind, rows, slope)


def report_json(rep: CheckReport) -> str:
    return to_json(rep)
