"""The permutahedron: facet system, vertex set and violation queries."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .permgroup import DEFAULT_CAP, lambda_vertex, permutation_index


def subset_of(mask: int, n: int) -> tuple[int, ...]:
    return tuple(v for v in range(n) if mask >> v & 1)


def subset_mask(S) -> int:
    mask = 0
    for v in S:
        mask |= 1 << v
    return mask


def triangular(k: int) -> Fraction:
    return Fraction(k * (k + 1), 2)


@dataclass(frozen=True)
class FacetSystem:
    """``sum(x) == n(n+1)/2`` plus ``sum_{v in S} x_v >= |S|(|S|+1)/2`` per proper nonempty S.

    Inequalities are keyed by bitmask, in increasing order.
    """

    n: int
    equation: tuple  # (coefficients, rhs)
    inequalities: tuple  # ((mask, rhs), ...)

    def coefficients(self, mask: int) -> tuple:
        return tuple(Fraction(mask >> v & 1) for v in range(self.n))


@dataclass(frozen=True)
class FacetViolation:
    facet: str | tuple  # "equation" or the 0-based subset S
    lhs: Fraction
    rhs: Fraction
    amount: Fraction


def permutahedron_facets(n: int) -> FacetSystem:
    if n < 2:
        raise ValueError("the permutahedron needs n >= 2 (for n = 1 it is a single point)")
    eq = (tuple(Fraction(1) for _ in range(n)), triangular(n))
    ineqs = tuple((mask, triangular(mask.bit_count())) for mask in range(1, (1 << n) - 1))
    return FacetSystem(n, eq, ineqs)


def permutahedron_vertices(n: int, cap: int = DEFAULT_CAP) -> list[tuple]:
    """All ``n!`` vertices, in the lexicographic order of the permutations that label them."""
    return [lambda_vertex(z) for z in permutation_index(n, cap).perms]


def facet_violation(x: Sequence, fs: FacetSystem) -> FacetViolation | None:
    if len(x) != fs.n:
        raise ValueError(f"dimension mismatch: point of length {len(x)}, system for n={fs.n}")
    x = [Fraction(v) for v in x]
    total = sum(x, Fraction(0))
    coeffs, rhs = fs.equation
    if total != rhs:
        return FacetViolation("equation", total, rhs, abs(total - rhs))
    for mask, rhs in fs.inequalities:
        lhs = sum((x[v] for v in range(fs.n) if mask >> v & 1), Fraction(0))
        if lhs < rhs:
            return FacetViolation(subset_of(mask, fs.n), lhs, rhs, rhs - lhs)
    return None


def prefix_facet_value(x: Sequence, w: int) -> Fraction:
    """``sum_{v < w} x_v``, the left side of the facet for the first ``w`` coordinates."""
    return sum((Fraction(v) for v in x[:w]), Fraction(0))
