import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from permext.formulation import birkhoff_z_extension
from permext.permgroup import (
    Permutation,
    PermSet,
    act_on_vertex,
    alternating_group,
    lambda_vertex,
    parse_permutation,
    rho_generator,
    rho_generators,
    symmetric_group,
)
from permext.section import (
    Essential,
    Section,
    canonical_birkhoff_section,
    component_action,
    derive_weak_symmetry_witness,
    essential_elements,
    find_kappa,
    group_kappas,
    isotropy_group,
    kappa_satisfies,
    verify_section,
    verify_witness,
    yannakakis_witness,
)
from permext.synthetic import block_section, doubled_birkhoff_section


@pytest.mark.parametrize("n", [3, 4, 5])
def test_birkhoff_section_valid(n):
    assert verify_section(canonical_birkhoff_section(n), birkhoff_z_extension(n))


def test_bad_section_rejected():
    s = canonical_birkhoff_section(3)
    table = [list(r) for r in s.table]
    table[0][0], table[0][1] = table[0][1], table[0][0]
    assert not verify_section(Section(3, 9, table=table), birkhoff_z_extension(3))
    with pytest.raises(ValueError):
        Section(3, 9, table=table[:-1])


def test_value_at_vertex():
    s = canonical_birkhoff_section(3)
    z = parse_permutation("[2,3,1]")
    y = s(lambda_vertex(z))
    assert [j for j, v in enumerate(y) if v] == [1, 5, 6]  # (i, zeta(i)) for i = 0, 1, 2


@pytest.mark.parametrize("n", [4, 5])
def test_birkhoff_kappa(n):
    s = canonical_birkhoff_section(n)
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    assert verify_witness(s, w)
    for rho, kappa in w.pairs:
        assert all(kappa(i * n + u) == i * n + rho(u) for i in range(n) for u in range(n))


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(4)))
def test_weak_symmetry_pointwise(p):
    # s(pi.x) == kappa.s(x) with (kappa.y)_j = y_{kappa^-1(j)}
    n = 4
    pi = Permutation(tuple(p))
    s = canonical_birkhoff_section(n)
    kappa = find_kappa(s, pi)
    inv = kappa.inverse()
    for z in s.index.perms[::5]:
        x = lambda_vertex(z)
        y = s(x)
        assert s(act_on_vertex(pi, x)) == tuple(y[inv(j)] for j in range(s.d))


def test_group_kappas_homomorphism():
    n = 4
    s = canonical_birkhoff_section(n)
    gens = [parse_permutation("(1 2)", n), parse_permutation("(1 2 3 4)", n)]
    table = group_kappas(derive_weak_symmetry_witness(s, gens), n)
    assert len(table) == 24
    for pi, kappa in table.items():
        assert kappa_satisfies(s, pi, kappa)


def test_component_action_birkhoff():
    # pi = rho_1 = (1 2 3) sends the component (i,1) to (i,2)
    n = 6
    s = canonical_birkhoff_section(n)
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    rho = rho_generator(0, n)
    for i in range(n):
        assert component_action(rho, i * n + 0, w, s) == i * n + 1
    assert component_action(Permutation.identity(n), 7, w, s) == 7


def test_component_action_definition():
    # (pi.s_j)(x) = s_j(pi^-1.x), checked on every vertex
    n = 5
    s = canonical_birkhoff_section(n)
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    kappas = group_kappas(w, n)
    pi = rho_generator(1, n) * rho_generator(0, n)
    for j in (0, 7, 13):
        jj = component_action(pi, j, w, s, kappas)
        for z in s.index.perms:
            x = lambda_vertex(z)
            assert s(x)[jj] == s(act_on_vertex(pi.inverse(), x))[j]


@pytest.mark.parametrize("n", [5, 6])
def test_birkhoff_isotropy_and_essential(n):
    s = canonical_birkhoff_section(n)
    Sn = symmetric_group(n)
    for j in (0, n + 2, n * n - 1):
        v = j % n
        iso = isotropy_group(s, j, Sn)
        assert set(iso) == {p for p in Sn if p(v) == v}
        assert iso.index_in(math.factorial(n)) == n
    assert essential_elements(s) == [j % n for j in range(n * n)]


def test_essential_tristate():
    s = block_section(6, [range(1, 7)], constants=(5,))
    ess = essential_elements(s)
    assert ess[:6] == list(range(6)) and ess[6] is Essential.ALL
    # x_1 + x_2 is invariant only under the setwise stabilizer of {1, 2}
    pair = Section(6, 1, rule=lambda z: [lambda_vertex(z)[0] + lambda_vertex(z)[1]])
    assert essential_elements(pair) == [Essential.NONE]


def test_yannakakis():
    n = 6
    A = alternating_group(n)
    stab = [p for p in A if p(2) == 2]
    assert yannakakis_witness(PermSet(n, stab), 2, n) == frozenset({2})
    assert yannakakis_witness(A, 2, n) == frozenset()


def test_fingerprint_soundness():
    # equal fingerprints make indices interchangeable in kappa
    s = doubled_birkhoff_section(4)
    d = 16
    rho = rho_generator(0, 4)
    kappa = find_kappa(s, rho)
    assert all(s.identical(j, j + d) for j in range(d))
    swap = Permutation.from_cycles(2 * d, [(j, j + d) for j in range(d)])
    assert kappa_satisfies(s, rho, kappa * swap)
    assert kappa_satisfies(s, rho, swap * kappa)


def test_integer_table():
    s = block_section(4, [(Fraction(1, 2), Fraction(1, 3), 0, 1)])
    ints, den = s.integer_table()
    assert den == 6
    assert all(Fraction(int(v), den) == f for row, frow in zip(ints, s.table) for v, f in zip(row, frow))
