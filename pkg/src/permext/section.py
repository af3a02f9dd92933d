"""Sections of an extension, the induced action on component functions, isotropy groups.

A section is stored as a table indexed like :class:`~permext.permgroup.PermutationIndex`:
row ``k`` is ``s(lambda_vertex(perms[k]))``.  Every equality question about
component functions goes through integer value codes, so comparisons stay
exact while the exhaustive scans run vectorized.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .permgroup import (
    DEFAULT_CAP,
    Permutation,
    PermSet,
    alternating_group,
    lambda_vertex,
    pointwise_stabilizer_in_alternating,
    permutation_index,
    vertex_permutation,
)


class Section:
    """A map from the ``n!`` permutahedron vertices to points of ``R^d``."""

    def __init__(self, n: int, d: int, rule: Callable[[Permutation], Sequence] | None = None,
                 table: Sequence[Sequence] | None = None, cap: int = DEFAULT_CAP):
        if (rule is None) == (table is None):
            raise ValueError("give exactly one of rule or table")
        self.n = n
        self.d = d
        self.index = permutation_index(n, cap)
        self._rule = rule
        self._table = None
        self._codes = None
        self._verified_partitions: set = set()
        if table is not None:
            self._table = self._checked(table)

    def _checked(self, table):
        rows = [tuple(Fraction(v) for v in row) for row in table]
        if len(rows) != len(self.index):
            raise ValueError(f"section table has {len(rows)} rows, expected {len(self.index)}")
        for row in rows:
            if len(row) != self.d:
                raise ValueError(f"section value of dimension {len(row)}, expected {self.d}")
        return rows

    @classmethod
    def from_mapping(cls, n: int, d: int, values: Mapping[Permutation, Sequence], cap: int = DEFAULT_CAP) -> Section:
        idx = permutation_index(n, cap)
        missing = [p for p in idx.perms if p not in values]
        if missing:
            raise ValueError(f"section undefined at {len(missing)} vertices, e.g. zeta={missing[0]}")
        return cls(n, d, table=[values[p] for p in idx.perms], cap=cap)

    @property
    def table(self) -> list[tuple]:
        if self._table is None:
            self._table = self._checked([self._rule(z) for z in self.index.perms])
        return self._table

    @property
    def codes(self) -> np.ndarray:
        """``codes[k, j]`` labels the value ``s_j`` at vertex ``k``; equal labels iff equal values."""
        if self._codes is None:
            labels: dict[Fraction, int] = {}
            self._codes = np.array([[labels.setdefault(v, len(labels)) for v in row] for row in self.table],
                                   dtype=np.int64).reshape(len(self.index), self.d)
        return self._codes

    def at(self, zeta: Permutation) -> tuple:
        return self.table[self.index.index(zeta)]

    def __call__(self, x: Sequence) -> tuple:
        return self.at(vertex_permutation(x))

    def fingerprint(self, j: int) -> tuple:
        """Values of ``s_j`` over the fixed vertex enumeration."""
        return tuple(row[j] for row in self.table)

    def identical(self, j: int, k: int) -> bool:
        return bool(np.array_equal(self.codes[:, j], self.codes[:, k]))

    def moved_codes(self, pi: Permutation) -> np.ndarray:
        """``codes`` of ``x -> s(pi.x)``."""
        return self.codes[self.index.left_mult(pi)]

    def integer_table(self) -> tuple[np.ndarray, int]:
        """Exact integer numerators (object dtype) over one common denominator."""
        den = math.lcm(*(v.denominator for row in self.table for v in row))
        arr = np.array([[int(v * den) for v in row] for row in self.table], dtype=object)
        return arr.reshape(len(self.index), self.d), den


def canonical_birkhoff_section(n: int, cap: int = DEFAULT_CAP) -> Section:
    """``s(lambda(zeta))[i*n + v] = 1`` iff ``zeta(i) == v``: the permutation matrix of zeta."""

    def rule(zeta):
        row = [Fraction(0)] * (n * n)
        for i in range(n):
            row[i * n + zeta(i)] = Fraction(1)
        return row

    return Section(n, n * n, rule=rule, cap=cap)


def verify_section(s: Section, E) -> bool:
    """Every value is nonnegative, satisfies the affine rows and projects back to its vertex."""
    if s.d != E.d or s.n != E.m:
        return False
    for zeta, y in zip(s.index.perms, s.table):
        if not E.contains(y):
            return False
        if E.project(y) != lambda_vertex(zeta):
            return False
    return True


# -- weak symmetry ------------------------------------------------------------


@dataclass(frozen=True)
class WeakSymmetryWitness:
    """``s(pi.x) == kappa.s(x)`` for each listed generator, where ``(kappa.y)_j = y_{kappa^-1(j)}``."""

    pairs: tuple  # ((pi, kappa), ...)

    @property
    def generator_kappas(self) -> dict:
        return dict(self.pairs)

    @property
    def generators(self) -> tuple:
        return tuple(p for p, _ in self.pairs)


def kappa_satisfies(s: Section, pi: Permutation, kappa: Permutation) -> bool:
    if kappa.n != s.d:
        return False
    inv = np.asarray(kappa.inverse().images, dtype=np.int64)
    return bool(np.array_equal(s.moved_codes(pi), s.codes[:, inv]))


def find_kappa(s: Section, pi: Permutation) -> Permutation | None:
    """Match each column of ``x -> s(pi.x)`` to an unused identical column of ``s`` (lowest index first)."""
    moved = s.moved_codes(pi)
    pools: dict[bytes, deque] = {}
    for j in range(s.d):
        pools.setdefault(s.codes[:, j].tobytes(), deque()).append(j)
    kappa = [0] * s.d
    for j in range(s.d):
        pool = pools.get(moved[:, j].tobytes())
        if not pool:
            return None
        src = pool.popleft()
        kappa[src] = j  # kappa^-1(j) = src
    return Permutation(tuple(kappa))


def derive_weak_symmetry_witness(s: Section, generators: Iterable[Permutation]) -> WeakSymmetryWitness | None:
    pairs = []
    for pi in generators:
        kappa = find_kappa(s, pi)
        if kappa is None:
            return None
        pairs.append((pi, kappa))
    return WeakSymmetryWitness(tuple(pairs))


def verify_witness(s: Section, witness: WeakSymmetryWitness) -> bool:
    return all(kappa_satisfies(s, pi, kappa) for pi, kappa in witness.pairs)


def group_kappas(witness: WeakSymmetryWitness, n: int) -> dict:
    """``pi -> kappa_pi`` for the whole generated group, using ``kappa_{g h} = kappa_g kappa_h``."""
    pairs = witness.pairs
    d = pairs[0][1].n if pairs else None
    ident = Permutation.identity(n)
    out = {ident: Permutation.identity(d) if d is not None else None}
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for h, kh in pairs:
            hg = h * g
            if hg not in out:
                out[hg] = kh * out[g]
                queue.append(hg)
    return out


def component_action(pi: Permutation, j: int, witness: WeakSymmetryWitness, s: Section,
                     kappas: Mapping | None = None) -> int:
    """The index ``j'`` with ``s_{j'} == pi.s_j``, i.e. ``s_{j'}(x) = s_j(pi^-1.x)``."""
    if pi.is_identity():
        return j
    if kappas is None:
        kappas = group_kappas(witness, s.n)
    kinv = kappas.get(pi.inverse())
    if kinv is None:
        raise ValueError(f"{pi} is not generated by the witness generators")
    return kinv.inverse()(j)


# -- isotropy -------------------------------------------------------------


def isotropy_table(s: Section, elements: Sequence[Permutation]) -> np.ndarray:
    """``table[g, j]`` is True iff ``s_j(pi_g.x) == s_j(x)`` for every vertex."""
    out = np.empty((len(elements), s.d), dtype=bool)
    for g, pi in enumerate(elements):
        out[g] = (s.moved_codes(pi) == s.codes).all(axis=0)
    return out


def isotropy_group(s: Section, j: int, G: PermSet) -> PermSet:
    col = s.codes[:, j]
    members = [pi for pi in G if np.array_equal(col[s.index.left_mult(pi)], col)]
    return PermSet(G.n, members)


class Essential(enum.Enum):
    ALL = "all"  # A_n leaves the component invariant
    NONE = "none"  # no single point works


def essential_elements(s: Section) -> list:
    """For every component: the point ``v`` whose A_n-stabilizer lies in the isotropy group.

    Returns ``Essential.ALL`` when A_n is contained in it and ``Essential.NONE``
    when no single point suffices.  Ties (possible only for small n) go to the
    lowest point.
    """
    An = alternating_group(s.n, cap=s.n)
    elems = An.elements
    table = isotropy_table(s, elems)
    fixers = [np.array([p(v) == v for p in elems]) for v in range(s.n)]
    out = []
    for j in range(s.d):
        col = table[:, j]
        if col.all():
            out.append(Essential.ALL)
            continue
        v = next((v for v in range(s.n) if col[fixers[v]].all()), None)
        out.append(Essential.NONE if v is None else v)
    return out


def essential_element(s: Section, j: int):
    return essential_elements(s)[j]


def yannakakis_witness(U: PermSet, k: int, n: int):
    """Smallest ``W`` (lexicographic among equals) with ``|W| <= k`` whose A_n pointwise stabilizer lies in U."""
    for size in range(k + 1):
        for W in itertools.combinations(range(n), size):
            if pointwise_stabilizer_in_alternating(W, n, cap=n).issubset(U):
                return frozenset(W)
    return None
