"""Dyadic geometry on the unit cube [0,1)^n.

Cubes and rectangles are stored as integer (level, index) pairs per axis, so
containment and intersection are exact. Axes are numbered 0..n-1 in code; axis
``n-1`` is the "last" axis that the pair-set recursion splits first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from dpl.report import CheckReport


@dataclass(frozen=True)
class DyadicRectangle:
    """Product of dyadic intervals [index_i 2^-level_i, (index_i + 1) 2^-level_i)."""

    levels: tuple[int, ...]
    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.levels) != len(self.indices) or not self.levels:
            raise ValueError("levels and indices must be non-empty and of equal length")
        for lev, idx in zip(self.levels, self.indices):
            if lev < 0 or not 0 <= idx < 2**lev:
                raise ValueError(f"invalid dyadic interval (level={lev}, index={idx})")

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def volume(self) -> Fraction:
        return Fraction(1, 2 ** sum(self.levels))

    def contains(self, other: DyadicRectangle) -> bool:
        for lev, idx, olev, oidx in zip(self.levels, self.indices, other.levels, other.indices):
            if olev < lev or oidx >> (olev - lev) != idx:
                return False
        return True

    def intersects(self, other: DyadicRectangle) -> bool:
        for lev, idx, olev, oidx in zip(self.levels, self.indices, other.levels, other.indices):
            if lev <= olev:
                if oidx >> (olev - lev) != idx:
                    return False
            elif idx >> (lev - olev) != oidx:
                return False
        return True

    def halves(self, axis: int) -> tuple[DyadicRectangle, DyadicRectangle]:
        """Split along ``axis`` into (lower, upper)."""
        lo_levels = list(self.levels)
        lo_levels[axis] += 1
        lo, hi = list(self.indices), list(self.indices)
        lo[axis] = 2 * self.indices[axis]
        hi[axis] = 2 * self.indices[axis] + 1
        return (DyadicRectangle(tuple(lo_levels), tuple(lo)),
                DyadicRectangle(tuple(lo_levels), tuple(hi)))

    def slices(self, depth: int) -> tuple[slice, ...]:
        """Index slices selecting the depth-``depth`` cells covered by the rectangle."""
        out = []
        for lev, idx in zip(self.levels, self.indices):
            if lev > depth:
                raise ValueError(f"rectangle level {lev} exceeds grid depth {depth}")
            step = 2 ** (depth - lev)
            out.append(slice(idx * step, (idx + 1) * step))
        return tuple(out)

    def __str__(self) -> str:
        parts = []
        for lev, idx in zip(self.levels, self.indices):
            den = 2**lev
            parts.append(f"[{Fraction(idx, den)},{Fraction(idx + 1, den)})")
        return "x".join(parts)


@dataclass(frozen=True)
class DyadicCube:
    dim: int
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.dim < 1 or self.level < 0 or len(self.coords) != self.dim:
            raise ValueError(f"invalid cube dim={self.dim} level={self.level} coords={self.coords}")
        if any(not 0 <= c < 2**self.level for c in self.coords):
            raise ValueError(f"coords {self.coords} out of range at level {self.level}")

    @classmethod
    def unit(cls, dim: int) -> DyadicCube:
        return cls(dim, 0, (0,) * dim)

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2**self.level)

    @property
    def volume(self) -> Fraction:
        return Fraction(1, 2 ** (self.dim * self.level))

    def rectangle(self) -> DyadicRectangle:
        return DyadicRectangle((self.level,) * self.dim, self.coords)

    def children(self) -> list[DyadicCube]:
        """The 2^n children in lexicographic order (axis 0 most significant)."""
        return [
            DyadicCube(self.dim, self.level + 1, tuple(2 * c + b for c, b in zip(self.coords, bits)))
            for bits in itertools.product((0, 1), repeat=self.dim)
        ]

    def parent(self) -> DyadicCube | None:
        if self.level == 0:
            return None
        return DyadicCube(self.dim, self.level - 1, tuple(c >> 1 for c in self.coords))

    def contains(self, other: DyadicCube) -> bool:
        return self.rectangle().contains(other.rectangle())

    def descendants(self, max_level: int) -> Iterator[DyadicCube]:
        """All dyadic subcubes (including self) of level <= max_level, level-major."""
        for lev in range(self.level, max_level + 1):
            shift = lev - self.level
            base = tuple(c << shift for c in self.coords)
            for off in itertools.product(range(2**shift), repeat=self.dim):
                yield DyadicCube(self.dim, lev, tuple(b + o for b, o in zip(base, off)))

    def __str__(self) -> str:
        return str(self.rectangle())


def cubes_at_level(dim: int, level: int) -> Iterator[DyadicCube]:
    for coords in itertools.product(range(2**level), repeat=dim):
        yield DyadicCube(dim, level, coords)


@dataclass(frozen=True)
class HaarIndex:
    """One of the 2^n - 1 Wilson pairs attached to a cube."""

    cube: DyadicCube
    j: int

    def __post_init__(self):
        if not 1 <= self.j <= 2**self.cube.dim - 1:
            raise ValueError(f"j={self.j} outside [1, {2**self.cube.dim - 1}]")

    @property
    def m(self) -> int:
        return self.j.bit_length() - 1

    @property
    def volume(self) -> Fraction:
        return self.cube.volume / 2**self.m

    def __str__(self) -> str:
        return f"({self.cube}, j={self.j})"


def haar_indices(dim: int, depth: int) -> Iterator[HaarIndex]:
    """Every HaarIndex on cubes of level 0..depth-1, level-major then lexicographic then j."""
    for lev in range(depth):
        for cube in cubes_at_level(dim, lev):
            for j in range(1, 2**dim):
                yield HaarIndex(cube, j)


def pair_sets(idx: HaarIndex) -> tuple[DyadicRectangle, DyadicRectangle]:
    """(E^1, E^2) for a Haar index, lower half first.

    With j = 2^m + sum_{i<m} c_i 2^i, bit c_i restricts axis n-1-i (0-based) to
    its lower or upper half and the pair splits the result along axis n-1-m.
    """
    rect = e_set(idx)
    return rect.halves(idx.cube.dim - 1 - idx.m)


def e_set(idx: HaarIndex) -> DyadicRectangle:
    cube = idx.cube
    n = cube.dim
    levels = [cube.level] * n
    coords = list(cube.coords)
    for i in range(idx.m):
        axis = n - 1 - i
        levels[axis] = cube.level + 1
        coords[axis] = 2 * cube.coords[axis] + ((idx.j >> i) & 1)
    return DyadicRectangle(tuple(levels), tuple(coords))


ChildSet = frozenset  # of child bit tuples, e.g. {(0, 1), (1, 1)}


def pair_sets_recursive(dim: int) -> dict[int, tuple[ChildSet, ChildSet]]:
    """Pairs for the unit cube built by induction on the dimension.

    Children are named by their bit tuples. The first pair splits along the
    appended (last) axis; pairs 2j and 2j+1 are the (n-1)-dimensional pair j
    crossed with the lower and upper half of that axis.
    """
    if dim == 1:
        return {1: (frozenset({(0,)}), frozenset({(1,)}))}
    prev = pair_sets_recursive(dim - 1)
    flat = list(itertools.product((0, 1), repeat=dim - 1))
    pairs = {1: (frozenset(t + (0,) for t in flat), frozenset(t + (1,) for t in flat))}
    for j, (e1, e2) in prev.items():
        for half in (0, 1):
            pairs[2 * j + half] = (
                frozenset(t + (half,) for t in e1),
                frozenset(t + (half,) for t in e2),
            )
    return pairs


def rectangle_children(rect: DyadicRectangle, cube: DyadicCube) -> ChildSet | None:
    """Children of ``cube`` (as bit tuples) making up ``rect``, or None if rect is not such a union."""
    if not cube.rectangle().contains(rect):
        return None
    choices = []
    for lev, idx in zip(rect.levels, rect.indices):
        if lev == cube.level:
            choices.append((0, 1))
        elif lev == cube.level + 1:
            choices.append((idx & 1,))
        else:
            return None
    return frozenset(itertools.product(*choices))


def closed_form_child_pairs(cube: DyadicCube) -> dict[int, tuple[ChildSet | None, ChildSet | None]]:
    out = {}
    for j in range(1, 2**cube.dim):
        e1, e2 = pair_sets(HaarIndex(cube, j))
        out[j] = (rectangle_children(e1, cube), rectangle_children(e2, cube))
    return out


def pair_masks(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (2^n - 1, 2^n) matrices: row j-1 marks the children in E^1 / E^2.

    Children are enumerated in lexicographic bit order, matching a C-order
    reshape of a trailing (2,)*n block.
    """
    unit = DyadicCube.unit(dim)
    pairs = closed_form_child_pairs(unit)
    children = list(itertools.product((0, 1), repeat=dim))
    m1 = np.zeros((2**dim - 1, 2**dim), dtype=bool)
    m2 = np.zeros_like(m1)
    for j, (e1, e2) in pairs.items():
        for c, bits in enumerate(children):
            m1[j - 1, c] = bits in e1
            m2[j - 1, c] = bits in e2
    return m1, m2


def containment_matrix(dim: int) -> np.ndarray:
    """(J, J) boolean matrix, [i-1, j-1] true iff E_j is contained in E_i within one cube."""
    m1, m2 = pair_masks(dim)
    e = m1 | m2
    return np.all(e[None, :, :] <= e[:, None, :], axis=-1)


def half_containment(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """[i-1, j-1] true iff E_j lies inside E^1_i (first array) or E^2_i (second)."""
    m1, m2 = pair_masks(dim)
    e = m1 | m2
    return (np.all(e[None, :, :] <= m1[:, None, :], axis=-1),
            np.all(e[None, :, :] <= m2[:, None, :], axis=-1))


def verify_partition_properties(
    cube: DyadicCube,
    construction: Callable[[DyadicCube], dict[int, tuple[ChildSet | None, ChildSet | None]]] | None = None,
) -> CheckReport:
    """Check the four pair-set properties plus the level-set partition facts.

    ``construction`` maps a cube to {j: (E1, E2)} with each set given as child
    bit tuples (None when the set is not a union of children). Defaults to the
    closed form. The report lists the first violated clause.
    """
    n = cube.dim
    pairs = (construction or closed_form_child_pairs)(cube)
    report = CheckReport(check="partition", dim=n, depth=cube.level, params={"cube": str(cube)})
    all_children = frozenset(itertools.product((0, 1), repeat=n))
    top = 2**n - 1

    def fail(clause: str, msg: str) -> CheckReport:
        report.violations.append(f"clause {clause}: {msg}")
        report.worst_region = clause
        return report

    if sorted(pairs) != list(range(1, top + 1)):
        return fail("index", f"expected j in 1..{top}, got {sorted(pairs)}")
    for j, (e1, e2) in pairs.items():
        if e1 is None or e2 is None or not e1 or not e2 or not (e1 | e2) <= all_children:
            return fail("2", f"j={j}: halves are not non-empty unions of children")
    for j, (e1, e2) in pairs.items():
        if len(e1) != len(e2):
            return fail("1", f"j={j}: |E1|={len(e1)} != |E2|={len(e2)}")
    for j, (e1, e2) in pairs.items():
        if e1 & e2:
            return fail("3", f"j={j}: halves intersect")
    for j, k in itertools.permutations(range(1, top + 1), 2):
        ej = pairs[j][0] | pairs[j][1]
        ek = pairs[k][0] | pairs[k][1]
        a = ej <= pairs[k][0] or ej <= pairs[k][1]
        b = ek <= pairs[j][0] or ek <= pairs[j][1]
        c = not (ej & ek)
        if not (a or b or c):
            return fail("4", f"j={j}, k={k}: supports neither nested nor disjoint")
    for m in range(n):
        covered: set = set()
        for j in range(2**m, 2 ** (m + 1)):
            e = pairs[j][0] | pairs[j][1]
            if covered & e:
                return fail("levels", f"m={m}: E_j overlap")
            covered |= e
        if covered != all_children:
            return fail("levels", f"m={m}: E_j do not cover the cube")
    bottom = [s for j in range(2 ** (n - 1), top + 1) for s in pairs[j]]
    if sorted(len(s) for s in bottom) != [1] * 2**n or frozenset().union(*bottom) != all_children:
        return fail("children", "bottom-level halves are not the 2^n children")
    return report
