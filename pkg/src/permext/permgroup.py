"""Permutations of ``{0, .., n-1}``, enumerated subgroups and the coordinate action on vertices.

Points are 0-based internally.  The textual forms (one-line ``[2,3,1]`` and
cycle ``(1 2 3)``) are 1-based, as is customary when writing permutations down.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CAP = 8


class CapExceeded(ValueError):
    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what} needs about {size} elements; refusing above cap n <= {cap}")
        self.size = size


@dataclass(frozen=True, order=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection of [0, {len(images)}): {images}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        """Build from 0-based cycles; (a, b, c) sends a to b, b to c and c to a."""
        images = list(range(n))
        seen = set()
        for cyc in cycles:
            for k, a in enumerate(cyc):
                if a in seen or not 0 <= a < n:
                    raise ValueError(f"bad cycle {tuple(cyc)} for n={n}")
                seen.add(a)
                images[a] = cyc[(k + 1) % len(cyc)]
        return cls(tuple(images))

    def __call__(self, v: int) -> int:
        return self.images[v]

    def __mul__(self, other: Permutation) -> Permutation:
        """Composition: ``(p * q)(v) == p(q(v))``."""
        if other.n != self.n:
            raise ValueError(f"cannot compose permutations of degree {self.n} and {other.n}")
        return Permutation(tuple(self.images[v] for v in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for v, img in enumerate(self.images):
            inv[img] = v
        return Permutation(tuple(inv))

    def __pow__(self, k: int) -> Permutation:
        result = Permutation.identity(self.n)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = base * result
        return result

    def is_identity(self) -> bool:
        return all(v == img for v, img in enumerate(self.images))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(self.n):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            v = self.images[start]
            while v != start:
                cyc.append(v)
                seen.add(v)
                v = self.images[v]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def is_even(self) -> bool:
        return sum(len(c) - 1 for c in self.cycles()) % 2 == 0

    def one_line(self) -> str:
        return "[" + ",".join(str(v + 1) for v in self.images) + "]"

    def cycle_string(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(v + 1) for v in c) + ")" for c in cyc)

    def __str__(self) -> str:
        return self.one_line()


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, n: int | None = None) -> Permutation:
    """Parse one-line ``[2,3,1]`` or cycle ``(1 2 3)(4 5)`` notation (1-based).

    Cycle notation needs ``n`` unless the largest point mentioned is the degree.
    """
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValueError(f"unterminated one-line permutation: {text!r}")
        body = text[1:-1].strip()
        images = [int(t) - 1 for t in re.split(r"[,\s]+", body) if t] if body else []
        p = Permutation(tuple(images))
        if n is not None and p.n != n:
            raise ValueError(f"permutation {text} has degree {p.n}, expected {n}")
        return p
    if text.startswith("("):
        if _CYCLE_RE.sub("", text).strip():
            raise ValueError(f"malformed cycle notation: {text!r}")
        cycles = []
        for body in _CYCLE_RE.findall(text):
            pts = [int(t) - 1 for t in re.split(r"[,\s]+", body.strip()) if t]
            if pts:
                cycles.append(pts)
        top = max((max(c) + 1 for c in cycles), default=0)
        if n is None:
            n = top
        elif top > n:
            raise ValueError(f"cycle point {top} exceeds degree {n}")
        return Permutation.from_cycles(n, cycles)
    raise ValueError(f"unrecognized permutation syntax: {text!r}")


class PermSet:
    """An explicitly enumerated permutation group (closure verified on construction)."""

    def __init__(self, n: int, elements: Iterable[Permutation], generators: Iterable[Permutation] = (),
                 check: bool = True):
        self.n = n
        self.elements = tuple(sorted(set(elements)))
        self.generators = tuple(generators)
        self._members = frozenset(self.elements)
        if check:
            self._check_group()

    def _check_group(self):
        for p in self.elements:
            if p.n != self.n:
                raise ValueError(f"element of degree {p.n} in a group on {self.n} points")
        if Permutation.identity(self.n) not in self._members:
            raise ValueError("set does not contain the identity")
        for p in self.elements:
            if p.inverse() not in self._members:
                raise ValueError(f"not closed under inverse: {p}")
        for p in self.elements:
            for q in self.elements:
                if p * q not in self._members:
                    raise ValueError(f"not closed under composition: {p} * {q}")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p: Permutation) -> bool:
        return p in self._members

    def issubset(self, other: PermSet | Iterable[Permutation]) -> bool:
        return all(p in other for p in self.elements)

    def index_in(self, order: int) -> Fraction:
        return Fraction(order, len(self))

    def __repr__(self) -> str:
        return f"PermSet(n={self.n}, size={len(self)})"


def _check_cap(n: int, cap: int, what: str):
    if n > cap:
        raise CapExceeded(what, math.factorial(n), cap)


def symmetric_group(n: int, cap: int = DEFAULT_CAP) -> PermSet:
    _check_cap(n, cap, "S_n")
    elems = [Permutation(p) for p in itertools.permutations(range(n))]
    return PermSet(n, elems, check=False)


def enumerate_group(gens: Iterable[Permutation], n: int, cap: int = DEFAULT_CAP) -> PermSet:
    """Breadth-first closure of the generators under left multiplication."""
    _check_cap(n, cap, "group enumeration")
    gens = list(gens)
    for g in gens:
        if g.n != n:
            raise ValueError(f"generator {g} is not a permutation of {n} points")
    ident = Permutation.identity(n)
    seen = {ident}
    queue = deque([ident])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = g * p
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return PermSet(n, seen, gens, check=False)


def alternating_group(n: int, cap: int = DEFAULT_CAP) -> PermSet:
    _check_cap(n, cap, "A_n")
    elems = [Permutation(p) for p in itertools.permutations(range(n))]
    return PermSet(n, [p for p in elems if p.is_even()], check=False)


def h_star_subgroup(w: int, n: int, cap: int = DEFAULT_CAP) -> PermSet:
    """Even permutations mapping the first ``w`` points onto themselves."""
    if not 1 <= w <= n - 1:
        raise ValueError(f"w must lie in 1..{n - 1}, got {w}")
    head = set(range(w))
    return PermSet(n, [p for p in alternating_group(n, cap) if {p(v) for v in head} == head], check=False)


def pointwise_stabilizer_in_alternating(W: Iterable[int], n: int, cap: int = DEFAULT_CAP) -> PermSet:
    W = set(W)
    if any(not 0 <= v < n for v in W):
        raise ValueError(f"W must be a subset of range({n})")
    return PermSet(n, [p for p in alternating_group(n, cap) if all(p(v) == v for v in W)], check=False)


def rho_generator(v: int, n: int) -> Permutation:
    """The 3-cycle ``v -> v+1 -> v+2 -> v`` (0-based, ``0 <= v <= n-3``)."""
    if not 0 <= v <= n - 3:
        raise ValueError(f"rho index must lie in 0..{n - 3}, got {v}")
    return Permutation.from_cycles(n, [(v, v + 1, v + 2)])


def rho_generators(n: int) -> list[Permutation]:
    return [rho_generator(v, n) for v in range(n - 2)]


def lambda_vertex(zeta: Permutation) -> tuple:
    """The vertex ``(zeta^-1(1), .., zeta^-1(n))`` of the permutahedron (values are 1..n)."""
    inv = zeta.inverse()
    return tuple(Fraction(v + 1) for v in inv.images)


def vertex_permutation(x: Sequence) -> Permutation:
    """Inverse of :func:`lambda_vertex`."""
    vals = [int(Fraction(v)) - 1 for v in x]
    if any(Fraction(v) != int(Fraction(v)) for v in x):
        raise ValueError(f"not a permutahedron vertex: {tuple(x)}")
    return Permutation(tuple(vals)).inverse()


def act_on_vertex(pi: Permutation, x: Sequence) -> tuple:
    """``(pi.x)_v = x_{pi^-1(v)}``."""
    if len(x) != pi.n:
        raise ValueError(f"dimension mismatch: permutation of {pi.n} points, vector of length {len(x)}")
    inv = pi.inverse()
    return tuple(x[inv(v)] for v in range(pi.n))


class PermutationIndex:
    """Lexicographic enumeration of S_n with vectorized left-multiplication lookups.

    Vertex ``k`` of the permutahedron is ``lambda_vertex(perms[k])``; the table
    returned by :meth:`left_mult` sends ``k`` to the index of ``pi * perms[k]``,
    i.e. of the vertex ``pi.x``.
    """

    def __init__(self, n: int, cap: int = DEFAULT_CAP):
        _check_cap(n, cap, "vertex enumeration")
        self.n = n
        self.array = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
        self.perms = [Permutation(tuple(row)) for row in self.array.tolist()]
        self._radix = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self._codes = self.array @ self._radix
        self._cache: dict[Permutation, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.perms)

    def index(self, p: Permutation) -> int:
        code = int(np.dot(np.array(p.images, dtype=np.int64), self._radix))
        k = int(np.searchsorted(self._codes, code))
        return k

    def left_mult(self, pi: Permutation) -> np.ndarray:
        table = self._cache.get(pi)
        if table is None:
            composed = np.asarray(pi.images, dtype=np.int64)[self.array]
            table = np.searchsorted(self._codes, composed @ self._radix)
            if len(self.perms) <= 720:
                self._cache[pi] = table
        return table


_INDEX_CACHE: dict[int, PermutationIndex] = {}


def permutation_index(n: int, cap: int = DEFAULT_CAP) -> PermutationIndex:
    _check_cap(n, cap, "vertex enumeration")
    if n not in _INDEX_CACHE:
        _INDEX_CACHE[n] = PermutationIndex(n, cap)
    return _INDEX_CACHE[n]
