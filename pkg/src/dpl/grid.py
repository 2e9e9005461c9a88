"""Piecewise-constant functions on the depth-L dyadic grid of [0,1)^n.

Values live in an ndarray of shape (2^L,)*n; a C-order flatten gives the
lexicographic cell order with axis 0 most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dpl.dyadic import DyadicCube, DyadicRectangle, HaarIndex, e_set


@dataclass(frozen=True, eq=False)
class GridFunction:
    dim: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        shape = (2**self.depth,) * self.dim
        if vals.size != 2 ** (self.dim * self.depth):
            raise ValueError(f"expected {2 ** (self.dim * self.depth)} cell values, got {vals.size}")
        vals = vals.reshape(shape)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, dim: int, depth: int, c: float = 1.0) -> GridFunction:
        return cls(dim, depth, np.full((2**depth,) * dim, float(c)))

    @classmethod
    def zeros(cls, dim: int, depth: int) -> GridFunction:
        return cls.constant(dim, depth, 0.0)

    @classmethod
    def random(cls, dim: int, depth: int, rng: np.random.Generator, positive: bool = False) -> GridFunction:
        vals = rng.uniform(0.05, 1.0, (2**depth,) * dim) if positive else rng.standard_normal((2**depth,) * dim)
        return cls(dim, depth, vals)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def cell_volume(self) -> float:
        return 2.0 ** (-self.dim * self.depth)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def with_values(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.dim, self.depth, values)

    def check_compatible(self, other: GridFunction) -> None:
        if (self.dim, self.depth) != (other.dim, other.depth):
            raise ValueError(
                f"shape mismatch: (dim={self.dim}, depth={self.depth}) vs (dim={other.dim}, depth={other.depth})"
            )

    def integral(self, region: DyadicRectangle | DyadicCube | None = None) -> float:
        if region is None:
            return float(self.values.sum()) * self.cell_volume
        if isinstance(region, DyadicCube):
            region = region.rectangle()
        return float(self.values[region.slices(self.depth)].sum()) * self.cell_volume

    def average(self, region: DyadicRectangle | DyadicCube | HaarIndex | None = None) -> float:
        if isinstance(region, HaarIndex):
            region = e_set(region)
        if region is None:
            return float(self.values.mean())
        if isinstance(region, DyadicCube):
            region = region.rectangle()
        return float(self.values[region.slices(self.depth)].mean())

    def inner(self, other: GridFunction, weight: GridFunction | None = None) -> float:
        """Integral of f g (times w) over the unit cube."""
        self.check_compatible(other)
        prod = self.values * other.values
        if weight is not None:
            prod = prod * weight.values
        return float(prod.sum()) * self.cell_volume

    def norm(self, weight: GridFunction | None = None) -> float:
        return float(np.sqrt(self.inner(self, weight)))

    def __add__(self, other: GridFunction) -> GridFunction:
        self.check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self.check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, other: GridFunction | float) -> GridFunction:
        if isinstance(other, GridFunction):
            self.check_compatible(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> GridFunction:
        return self.with_values(-self.values)


# --- block helpers -----------------------------------------------------------


def block_sums(values: np.ndarray, level: int) -> np.ndarray:
    """Sum of ``values`` over every dyadic cube of ``level`` -> shape (2^level,)*n."""
    n = values.ndim
    depth = int(np.log2(values.shape[0])) if values.shape[0] > 0 else 0
    if level > depth:
        raise ValueError(f"level {level} exceeds depth {depth}")
    b = 2 ** (depth - level)
    shaped = values.reshape(tuple(x for _ in range(n) for x in (2**level, b)))
    return shaped.sum(axis=tuple(range(1, 2 * n, 2)))


def block_means(values: np.ndarray, level: int) -> np.ndarray:
    n = values.ndim
    depth = int(np.log2(values.shape[0]))
    return block_sums(values, level) / 2 ** (n * (depth - level))


def split_children(arr: np.ndarray) -> np.ndarray:
    """(2^(k+1),)*n -> (2^k,)*n + (2^n,) grouping each cube's children in lexicographic order."""
    n = arr.ndim
    half = arr.shape[0] // 2
    shaped = arr.reshape(tuple(x for _ in range(n) for x in (half, 2)))
    order = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    return shaped.transpose(order).reshape((half,) * n + (2**n,))


def merge_children(arr: np.ndarray) -> np.ndarray:
    """Inverse of :func:`split_children`."""
    n = arr.ndim - 1
    half = arr.shape[0]
    shaped = arr.reshape((half,) * n + (2,) * n)
    order = tuple(i for a in range(n) for i in (a, n + a))
    return shaped.transpose(order).reshape((2 * half,) * n)


def upsample(arr: np.ndarray, factor: int) -> np.ndarray:
    """Repeat each cell ``factor`` times along every axis."""
    out = arr
    for ax in range(arr.ndim):
        out = np.repeat(out, factor, axis=ax)
    return out


def child_sums(values: np.ndarray, level: int) -> np.ndarray:
    """Per cube of ``level``: sums over its 2^n children -> (2^level,)*n + (2^n,)."""
    return split_children(block_sums(values, level + 1))


class SummedAreaTable:
    """n-dimensional inclusive prefix sums with a zero leading face.

    ``rect_sums(levels)`` returns the sums over every dyadic rectangle with the
    given per-axis levels, using n-fold differences of the table sampled on the
    rectangle boundaries.
    """

    def __init__(self, values: np.ndarray):
        self.depth = int(np.log2(values.shape[0]))
        self.dim = values.ndim
        table = np.zeros(tuple(s + 1 for s in values.shape))
        acc = values.astype(float)
        for ax in range(values.ndim):
            acc = np.cumsum(acc, axis=ax)
        table[(slice(1, None),) * values.ndim] = acc
        self.table = table

    def rect_sums(self, levels: tuple[int, ...]) -> np.ndarray:
        edges = [np.arange(0, 2**self.depth + 1, 2 ** (self.depth - lev)) for lev in levels]
        out = self.table[np.ix_(*edges)]
        for ax in range(self.dim):
            out = np.diff(out, axis=ax)
        return out

    def rect_sum(self, rect: DyadicRectangle) -> float:
        lo, hi = [], []
        for sl in rect.slices(self.depth):
            lo.append(sl.start)
            hi.append(sl.stop)
        total = 0.0
        for corner in itertools.product((0, 1), repeat=self.dim):
            idx = tuple(hi[a] if c else lo[a] for a, c in enumerate(corner))
            sign = (-1) ** (self.dim - sum(corner))
            total += sign * self.table[idx]
        return float(total)


def level_tuples(dim: int, depth: int):
    return itertools.product(range(depth + 1), repeat=dim)


# --- GFN1 text format ----------------------------------------------------------


def dumps_gfn(f: GridFunction) -> str:
    lines = ["gfn 1", f"dim={f.dim} depth={f.depth}"]
    lines.append(" ".join(format(float(v), ".17g") for v in f.flat))
    return "\n".join(lines) + "\n"


def loads_gfn(text: str) -> GridFunction:
    lines = text.strip().splitlines()
    if len(lines) < 2 or lines[0].split() != ["gfn", "1"]:
        raise ValueError("not a GFN1 file: first line must be 'gfn 1'")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[1].split())
        dim, depth = int(fields["dim"]), int(fields["depth"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed GFN1 header line: {lines[1]!r}") from exc
    if dim < 1 or depth < 0:
        raise ValueError(f"invalid GFN1 shape dim={dim} depth={depth}")
    tokens = " ".join(lines[2:]).split()
    expected = 2 ** (dim * depth)
    if len(tokens) != expected:
        raise ValueError(f"GFN1 count mismatch: header implies {expected} values, found {len(tokens)}")
    try:
        vals = np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise ValueError("GFN1 values must be decimal numbers") from exc
    return GridFunction(dim, depth, vals)


def read_gfn(path: str | Path) -> GridFunction:
    return loads_gfn(Path(path).read_text())


def write_gfn(f: GridFunction, path: str | Path) -> None:
    Path(path).write_text(dumps_gfn(f))
