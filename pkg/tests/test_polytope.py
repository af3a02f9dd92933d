from fractions import Fraction
from math import factorial

import pytest

from permext.polytope import (
    facet_violation,
    permutahedron_facets,
    permutahedron_vertices,
    prefix_facet_value,
    subset_of,
)


@pytest.mark.parametrize("n", range(2, 11))
def test_counts(n):
    fs = permutahedron_facets(n)
    assert len(fs.inequalities) == 2 ** n - 2
    assert fs.equation[1] == Fraction(n * (n + 1), 2)


def test_degenerate():
    with pytest.raises(ValueError):
        permutahedron_facets(1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_vertices_and_tightness(n):
    fs = permutahedron_facets(n)
    verts = permutahedron_vertices(n)
    assert len(set(verts)) == len(verts)
    for x in verts:
        assert facet_violation(x, fs) is None
    # each facet is tight on exactly |S|!(n-|S|)! vertices
    for mask, rhs in fs.inequalities:
        S = subset_of(mask, n)
        tight = sum(1 for x in verts if sum(x[v] for v in S) == rhs)
        assert tight == factorial(len(S)) * factorial(n - len(S))


def test_violations():
    fs = permutahedron_facets(3)
    v = facet_violation((Fraction(1, 2), 3, Fraction(5, 2)), fs)
    assert v.facet == (0,) and v.amount == Fraction(1, 2)
    assert facet_violation((1, 1, 1), fs).facet == "equation"
    assert facet_violation((2, 2, 2), fs) is None  # barycenter


def test_prefix():
    assert prefix_facet_value((1, 2, 3, 4), 2) == 3
