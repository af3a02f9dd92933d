from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permext.audit import (
    HypothesisFailure,
    InadmissibleEpsilon,
    Partition,
    Verdict,
    audit_extension,
    average_section,
    averaged_vertex,
    averaged_vertex_bruteforce,
    build_violating_point,
    chain_partition,
    default_zeta,
    find_split_element,
    find_zeta,
    h_star_average,
    max_admissible_epsilon,
    normalize_kappa_cycles,
    partition_values,
    split_violations,
    verify_partition,
    verify_violation_certificate,
    zeta_conditions,
)
from permext.exactnum import RatMatrix
from permext.formulation import SubspaceExtension, birkhoff_z_extension
from permext.permgroup import Permutation, lambda_vertex, parse_permutation, rho_generator, rho_generators
from permext.section import (
    Section,
    canonical_birkhoff_section,
    derive_weak_symmetry_witness,
    essential_elements,
    kappa_satisfies,
)
from permext.synthetic import (
    block_extension,
    block_section,
    doubled_birkhoff_section,
    doubled_six_cycle_kappa,
    indicator,
    indicator_pair,
    small_counterexample,
)


def birkhoff_chain(n):
    s = canonical_birkhoff_section(n)
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    ess = essential_elements(s)
    norm = {v: normalize_kappa_cycles(k, rho_generator(v, n), s, ess) for v, (_, k) in enumerate(w.pairs)}
    return s, norm


def test_normalize_identity():
    s = canonical_birkhoff_section(4)
    # the identity kappa does not satisfy the equation for rho, so use a constant section
    c = block_section(4, [], constants=(1, 2))
    out = normalize_kappa_cycles(Permutation.identity(2), rho_generator(0, 4), c)
    assert out.cycles == () and out.kappa.is_identity()
    with pytest.raises(ValueError):
        normalize_kappa_cycles(Permutation.identity(16), rho_generator(0, 4), s)


def test_normalize_birkhoff():
    n = 6
    s, norm = birkhoff_chain(n)
    assert norm[0].cycles == tuple((i * n, i * n + 1, i * n + 2) for i in range(n))


def test_normalize_six_cycle():
    n = 5
    s = doubled_birkhoff_section(n)
    kappa = doubled_six_cycle_kappa(n, 0)
    assert kappa_satisfies(s, rho_generator(0, n), kappa)
    assert sorted(len(c) for c in kappa.cycles()) == [6] * n
    out = normalize_kappa_cycles(kappa, rho_generator(0, n), s)
    assert len(out.cycles) == 2 * n
    d = n * n
    assert out.cycles[:2] == ((0, d + 1, 2), (d, 1, d + 2))
    # same action on every section value
    a = np.asarray(kappa.inverse().images)
    b = np.asarray(out.kappa.inverse().images)
    assert np.array_equal(s.codes[:, a], s.codes[:, b])


def test_normalize_drops_identical_triples():
    n = 5
    s = block_section(n, [indicator(n, 1)], constants=(1, 1, 1, 2, 2))
    rho = rho_generator(0, n)
    kappa = derive_weak_symmetry_witness(s, [rho]).pairs[0][1]
    extra = Permutation.from_cycles(s.d, [(5, 6, 7), (8, 9)])
    assert kappa_satisfies(s, rho, kappa * extra)
    out = normalize_kappa_cycles(kappa * extra, rho, s)
    assert out.cycles == ((0, 1, 2),)
    assert sorted(out.identified) == [(5, 6, 7), (8, 9)]


def test_normalize_reports_missing_essential():
    # pair sums x_a + x_b: rho permutes them, but no single point is essential
    n = 6
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    s = Section(n, len(pairs), rule=lambda z: [lambda_vertex(z)[a] + lambda_vertex(z)[b] for a, b in pairs])
    rho = rho_generator(0, n)
    kappa = derive_weak_symmetry_witness(s, [rho]).pairs[0][1]
    with pytest.raises(HypothesisFailure) as exc:
        normalize_kappa_cycles(kappa, rho, s)
    assert exc.value.stage == "cycle lemma"


def test_chain_birkhoff():
    n = 6
    s, norm = birkhoff_chain(n)
    part = chain_partition(norm, s)
    assert part.a_sets == tuple(tuple(i * n + t for t in range(n)) for i in range(n))
    assert part.b_singletons == ()
    assert verify_partition(part, s)


def test_chain_with_constant():
    n = 6
    blocks = [indicator(n, i + 1) for i in range(n)]
    s = block_section(n, blocks, constants=(Fraction(1, 3),))
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    norm = {v: normalize_kappa_cycles(k, rho_generator(v, n), s) for v, (_, k) in enumerate(w.pairs)}
    part = chain_partition(norm, s)
    assert len(part.a_sets) == n and part.b_singletons == (n * n,)
    assert verify_partition(part, s)


def test_chain_constant_section():
    n = 6
    s = block_section(n, [], constants=(1, 2, 3))
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    norm = {v: normalize_kappa_cycles(k, rho_generator(v, n), s) for v, (_, k) in enumerate(w.pairs)}
    part = chain_partition(norm, s)
    assert part == Partition((), (0, 1, 2))
    assert verify_partition(part, s)


def test_chain_surgery():
    # build kappa for rho_1 from the doubled section so that case (b) applies
    n = 6
    s = doubled_birkhoff_section(n)
    d = n * n
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    kappas = {v: k for v, (_, k) in enumerate(w.pairs)}
    # rho_2 (0-based v = 1): cross the copies for row 0
    cycles = []
    for i in range(2 * n):
        base = i * n if i < n else d + (i - n) * n
        cycles.append((base + 1, base + 2, base + 3))
    cycles[0] = (1, d + 2, 3)
    cycles[n] = (d + 1, 2, d + 3)
    kappas[1] = Permutation.from_cycles(2 * d, cycles)
    assert kappa_satisfies(s, rho_generator(1, n), kappas[1])
    norm = {v: normalize_kappa_cycles(k, rho_generator(v, n), s) for v, k in kappas.items()}
    part = chain_partition(norm, s)
    assert len(part.a_sets) == 2 * n
    assert part.a_sets[0] == (0, 1, 2, 3, 4, 5)
    assert verify_partition(part, s)


def test_verify_partition_rejects_swap():
    n = 5
    s, norm = birkhoff_chain(n)
    part = chain_partition(norm, s)
    assert verify_partition(part, s)
    A0 = list(part.a_sets[0])
    A0[1], A0[2] = A0[2], A0[1]
    bad = Partition((tuple(A0),) + part.a_sets[1:], ())
    assert not verify_partition(bad, s)
    assert not verify_partition(Partition(part.a_sets[1:], ()), s)  # does not cover [d]


def test_average_birkhoff_examples():
    n, w = 6, 2
    s, norm = birkhoff_chain(n)
    part = chain_partition(norm, s)
    y = average_section(s, part, lambda_vertex(Permutation.identity(n)), w)
    for i in range(n):
        for t in range(n):
            expect = (Fraction(1, 2) if i < 2 else 0) if t < 2 else (Fraction(1, 4) if i >= 2 else 0)
            assert y[i * n + t] == expect
    assert y == h_star_average(s, Permutation.identity(n), w)
    assert birkhoff_z_extension(n).contains(y)


def test_average_requires_verified_partition():
    s = canonical_birkhoff_section(5)
    with pytest.raises(ValueError):
        average_section(s, Partition((), tuple(range(25))), Permutation.identity(5), 2)


@settings(max_examples=40, deadline=None)
@given(st.permutations(range(5)), st.integers(1, 4))
def test_vertex_average_closed_form(p, w):
    x = lambda_vertex(Permutation(tuple(p)))
    assert averaged_vertex(x, w) == averaged_vertex_bruteforce(x, w)


def test_split_examples():
    assert find_split_element([(1, 0, 0, 0, 0, 0)]) == 2
    assert find_split_element([(0,) * 6]) == 1
    assert find_split_element([(0, 0, 0, 0, 0, 1), (1, 0, 0, 0, 0, 0)]) == 2
    assert split_violations([(0, 0, 0, 0, 0, 1), (1, 0, 0, 0, 0, 0)], 5) == ["start[0]"]
    assert find_split_element([]) == 1
    # premise fails: n = 3, one set per w
    assert find_split_element([(1, 0, 0), (0, 0, 1)]) is None


def _split_ok(values, w):
    # literal restatement of (end) and (start)
    for a in values:
        if a[w - 1] > 0 and sum(a[w:]) == 0:
            return False
        if a[w] > 0 and sum(a[:w]) == 0:
            return False
    return True


@st.composite
def tables(draw):
    n = draw(st.integers(6, 8))
    k = draw(st.integers(0, (n - 2) // 2))  # k < (n-1)/2
    val = st.one_of(st.just(Fraction(0)), st.fractions(min_value=0, max_value=5, max_denominator=7))
    return [draw(st.lists(val, min_size=n, max_size=n)) for _ in range(k)]


@settings(max_examples=300, deadline=None)
@given(tables())
def test_split_exists(values):
    w = find_split_element(values)
    assert w is not None and _split_ok(values, w)
    assert all(not _split_ok(values, u) for u in range(1, w))


def test_default_zeta():
    z = default_zeta(2, 6)
    assert z == parse_permutation("[1,4,2,3,5,6]")  # 2 -> 4 -> 3 -> 2
    assert z.is_even() and not zeta_conditions(z, 2)
    for n in (6, 7):
        for w in range(1, n):
            assert not zeta_conditions(find_zeta(w, n), w)
    with pytest.raises(ValueError):
        default_zeta(5, 6)


def test_zeta_condition_names():
    assert zeta_conditions(parse_permutation("(1 2)", 6), 2) == ["zeta must be even", "zeta must map point 3 into 1..2"]


def _fixture_pipeline(s):
    n = s.n
    w = derive_weak_symmetry_witness(s, rho_generators(n))
    norm = {v: normalize_kappa_cycles(k, rho_generator(v, n), s) for v, (_, k) in enumerate(w.pairs)}
    part = chain_partition(norm, s)
    assert verify_partition(part, s)
    return part


def test_indicator_fixture():
    affine, s = indicator_pair(6)
    part = _fixture_pipeline(s)
    values = partition_values(s, part)
    assert values == [(0, 0, 0, 0, 0, 1), (1, 0, 0, 0, 0, 0)]
    w = find_split_element(values)
    assert w == 2
    assert max_admissible_epsilon(s, part, w) is None  # neither set constrains epsilon
    cert = build_violating_point(s, part, w, default_zeta(w, 6), Fraction(1, 10))
    assert all(v >= 0 for v in cert.y)
    assert cert.projected_value < 3
    assert verify_violation_certificate(cert, affine=affine)


def test_epsilon_zero_is_tight():
    E, s = small_counterexample(6)
    part = _fixture_pipeline(s)
    cert = build_violating_point(s, part, 2, default_zeta(2, 6), 0)
    assert cert.y == average_section(s, part, Permutation.identity(6), 2)
    assert cert.projected_value == 3 and cert.amount == 0
    assert E.contains(cert.y)


def test_small_counterexample_values():
    E, s = small_counterexample(6)
    part = _fixture_pipeline(s)
    # x-block head: (1+2)/2 - eps/2 >= 0 gives eps <= 3
    assert max_admissible_epsilon(s, part, 2) == 3
    cert = build_violating_point(s, part, 2, default_zeta(2, 6), Fraction(3, 2))
    half = Fraction(3, 4)
    assert cert.y[:2] == (half, half) and cert.y[2:6] == (Fraction(39, 8),) * 4
    assert cert.y[6:] == (Fraction(1, 2),) * 2 + (0,) * 4
    assert cert.amount == Fraction(3, 2)
    assert verify_violation_certificate(cert, extension=E)
    with pytest.raises(InadmissibleEpsilon) as exc:
        build_violating_point(s, part, 2, default_zeta(2, 6), 4)
    assert exc.value.max_epsilon == 3


def test_violation_grows_with_epsilon():
    E, s = small_counterexample(6)
    part = _fixture_pipeline(s)
    amounts = [build_violating_point(s, part, 2, default_zeta(2, 6), Fraction(k, 4)).amount for k in range(1, 12)]
    assert all(a < b for a, b in zip(amounts, amounts[1:]))


def test_b_components_constant():
    n = 6
    blocks = [tuple(range(1, n + 1)), indicator(n, 1)]
    E, s = block_extension(n, blocks, (Fraction(2, 3),)), block_section(n, blocks, (Fraction(2, 3),))
    part = _fixture_pipeline(s)
    assert part.b_singletons == (12,)
    for eps in (Fraction(1, 3), Fraction(5, 2)):
        cert = build_violating_point(s, part, 2, default_zeta(2, n), eps)
        assert cert.y[12] == Fraction(2, 3)
        assert E.contains(cert.y)


def test_build_rejects_bad_inputs():
    E, s = small_counterexample(6)
    part = _fixture_pipeline(s)
    with pytest.raises(ValueError, match="end"):
        build_violating_point(s, part, 1, default_zeta(1, 6), 1)
    with pytest.raises(ValueError, match="even"):
        build_violating_point(s, part, 2, parse_permutation("(2 3)", 6), 1)


def test_tampered_certificate_fails():
    E, s = small_counterexample(6)
    cert = audit_extension(E, s).certificate
    y = list(cert.y)
    y[0] += 1
    assert not verify_violation_certificate(type(cert)(**{**cert.__dict__, "y": tuple(y)}), extension=E)
    assert not verify_violation_certificate(type(cert)(**{**cert.__dict__, "epsilon": cert.epsilon + 1}))


def test_audit_verdicts():
    r = audit_extension(birkhoff_z_extension(6), canonical_birkhoff_section(6))
    assert r.verdict is Verdict.CONSISTENT and r.bound == 15
    r = audit_extension(birkhoff_z_extension(5), canonical_birkhoff_section(5))
    assert r.verdict is Verdict.INCONCLUSIVE and "n ≥ 6" in r.note
    E, s = small_counterexample(6)
    r = audit_extension(E, s)
    assert r.verdict is Verdict.REFUTED and verify_violation_certificate(r.certificate, extension=E)
    assert r.certificate.w == 2 and r.certificate.epsilon == Fraction(3, 2)


def test_audit_rejects_bad_section():
    E, s = small_counterexample(6)
    with pytest.raises(ValueError):
        audit_extension(birkhoff_z_extension(6), s)


def test_audit_rejects_non_symmetric_section():
    n = 6
    base = block_extension(n, [tuple(range(1, n + 1))])
    A = RatMatrix.from_rows([list(r) + [0] for r in base.A.rows] + [[1, 1, 0, 0, 0, 0, -1]], n + 1)
    P = RatMatrix.from_rows([list(r) + [0] for r in base.projection.rows], n + 1)
    E = SubspaceExtension(A, base.b + (0,), P)
    s = Section(n, n + 1, rule=lambda z: list(lambda_vertex(z)) + [lambda_vertex(z)[0] + lambda_vertex(z)[1]])
    with pytest.raises(ValueError, match="not weakly symmetric"):
        audit_extension(E, s)
