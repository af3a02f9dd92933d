"""Executable lower-bound pipeline for weakly symmetric subspace extensions of the permutahedron.

Given a section with generator permutations ``kappa`` for the 3-cycles
``rho_v = (v, v+1, v+2)``, the pipeline normalizes each ``kappa`` to aligned
3-cycles, chains them into a partition of the variable indices, averages the
section over ``H*_w`` and builds an affine combination ``y`` of points of ``Q``
that stays nonnegative while its projection leaves the permutahedron.

Indices are 0-based: ``w`` counts the leading coordinates, so the facet in
question is ``x_0 + .. + x_{w-1} >= w(w+1)/2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exactnum import ZERO, format_rational, vadd, vscale
from .permgroup import (
    Permutation,
    act_on_vertex,
    alternating_group,
    h_star_subgroup,
    lambda_vertex,
    rho_generator,
    vertex_permutation,
)
from .polytope import facet_violation, permutahedron_facets, prefix_facet_value, triangular
from .section import (
    Essential,
    Section,
    WeakSymmetryWitness,
    derive_weak_symmetry_witness,
    essential_elements,
    group_kappas,
    kappa_satisfies,
    verify_section,
    verify_witness,
)

MIN_N = 6


class HypothesisFailure(Exception):
    """A stage of the pipeline met an input outside the hypotheses it relies on."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage
        self.detail = detail


class InadmissibleEpsilon(ValueError):
    def __init__(self, epsilon: Fraction, max_epsilon: Fraction):
        super().__init__(f"epsilon {format_rational(epsilon)} makes y negative; "
                         f"largest admissible value is {format_rational(max_epsilon)}")
        self.max_epsilon = max_epsilon


# -- kappa normalization ----------------------------------------------------


@dataclass(frozen=True)
class NormalizedKappa:
    pi: Permutation
    kappa: Permutation
    cycles: tuple  # aligned 3-cycles (j1, j2, j3) with essential elements (w1, w2, w3)
    identified: tuple  # index groups shown to carry identical component functions


def three_cycle(pi: Permutation) -> tuple[int, int, int]:
    cyc = pi.cycles()
    if len(cyc) != 1 or len(cyc[0]) != 3:
        raise ValueError(f"{pi.cycle_string()} is not a 3-cycle")
    return cyc[0]


def _equivalent(s: Section, k1: Permutation, k2: Permutation) -> bool:
    a = np.asarray(k1.inverse().images, dtype=np.int64)
    b = np.asarray(k2.inverse().images, dtype=np.int64)
    return bool(np.array_equal(s.codes[:, a], s.codes[:, b]))


def normalize_kappa_cycles(kappa: Permutation, pi: Permutation, s: Section, essentials=None) -> NormalizedKappa:
    """Replace ``kappa`` by an equivalent permutation made of aligned 3-cycles only.

    Cycles whose length is not a multiple of three, and 3-cycles over identical
    components, are dropped; longer cycles are cut into consecutive triples;
    each surviving triple is rotated so its essential elements read ``pi``'s
    cycle ``(w1, w2, w3)`` in order.
    """
    w = three_cycle(pi)
    if not kappa_satisfies(s, pi, kappa):
        raise ValueError(f"kappa does not satisfy s(pi.x) = kappa.s(x) for pi = {pi.cycle_string()}")
    ess = essentials if essentials is not None else essential_elements(s)
    cycles, identified = [], []
    for C in kappa.cycles():
        if len(C) % 3:
            if not all(s.identical(C[0], j) for j in C[1:]):
                raise HypothesisFailure("cycle lemma", f"cycle {C} of length {len(C)} over distinct components")
            identified.append(C)
            continue
        for k in range(0, len(C), 3):
            trip = C[k:k + 3]
            if s.identical(trip[0], trip[1]) and s.identical(trip[0], trip[2]):
                identified.append(trip)
                continue
            marks = [ess[j] for j in trip]
            rot = next((r for r in range(3) if marks[r] == w[0]), None)
            if rot is not None:
                trip = trip[rot:] + trip[:rot]
                marks = marks[rot:] + marks[:rot]
            if rot is None or tuple(marks) != w:
                shown = [m.value if isinstance(m, Essential) else m + 1 for m in marks]
                raise HypothesisFailure(
                    "cycle lemma", f"3-cycle {tuple(j + 1 for j in trip)} has essential elements {shown}, "
                    f"not a rotation of {tuple(v + 1 for v in w)}")
            cycles.append(tuple(trip))
    normalized = Permutation.from_cycles(s.d, cycles)
    if not _equivalent(s, normalized, kappa):
        raise HypothesisFailure("cycle lemma", "normalized permutation is not equivalent to kappa")
    return NormalizedKappa(pi, normalized, tuple(cycles), tuple(identified))


# -- partition ------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    a_sets: tuple  # tuples (a_0, .., a_{n-1})
    b_singletons: tuple

    def is_partition_of(self, d: int, n: int) -> bool:
        flat = [j for A in self.a_sets for j in A] + list(self.b_singletons)
        return sorted(flat) == list(range(d)) and all(len(A) == n for A in self.a_sets)


def chain_partition(kappas: Mapping[int, NormalizedKappa], s: Section) -> Partition:
    """Grow each 3-cycle of ``kappa_{rho_0}`` into an ordered n-set along ``rho_1, .., rho_{n-3}``.

    ``kappas[v]`` is the normalized permutation for ``rho_v``.  When the cycle
    through the current pair is split across two cycles of the next
    generator, the two cycles are rewired (after checking the identities that
    make the rewiring an equivalence) and the chain continues.
    """
    n = s.n
    work = {v: [list(c) for c in kappas[v].cycles] for v in range(n - 2)}

    def locate(v, j):
        for ci, c in enumerate(work[v]):
            if j in c:
                return ci, c.index(j)
        return None

    sets = []
    for start in list(work[0]):
        S = list(start)
        for v in range(1, n - 2):
            a, b = S[v], S[v + 1]
            la, lb = locate(v, a), locate(v, b)
            if la is None or lb is None or la[1] != 0 or lb[1] != 1:
                raise HypothesisFailure(
                    "structure lemma", f"no cycle of kappa for rho_{v + 1} continues ({a + 1}, {b + 1})")
            if la[0] == lb[0]:
                S.append(work[v][la[0]][2])
                continue
            c1, c2 = work[v][la[0]], work[v][lb[0]]
            j3p, j4p = c1[1], c1[2]
            j2pp, j4pp = c2[0], c2[2]
            if not (s.identical(b, j3p) and s.identical(a, j2pp)):
                raise HypothesisFailure(
                    "structure lemma", f"rewiring at rho_{v + 1} needs identical components "
                    f"{b + 1}~{j3p + 1} and {a + 1}~{j2pp + 1}")
            work[v][la[0]] = [a, b, j4p]
            work[v][lb[0]] = [j2pp, j3p, j4pp]
            S.append(j4p)
        sets.append(tuple(S))

    used = [j for S in sets for j in S]
    if len(used) != len(set(used)):
        raise HypothesisFailure("partition theorem", "chained sets overlap")
    for v in range(n - 2):
        for c in work[v]:
            if not any(tuple(c) == S[v:v + 3] for S in sets):
                raise HypothesisFailure(
                    "partition theorem", f"cycle {tuple(j + 1 for j in c)} of rho_{v + 1} lies outside the chained sets")
    singles = tuple(j for j in range(s.d) if j not in set(used))
    return Partition(tuple(sets), singles)


def verify_partition(part: Partition, s: Section, n: int | None = None) -> bool:
    """Check ``s_{a_t}(rho.x) = s_{a_{rho^-1(t)}}(x)`` and ``s_b(rho.x) = s_b(x)`` for every rho_v and vertex."""
    n = s.n if n is None else n
    if n != s.n or not part.is_partition_of(s.d, n):
        return False
    if part in s._verified_partitions:
        return True
    A = np.array(part.a_sets, dtype=np.int64).reshape(len(part.a_sets), n)
    B = np.array(part.b_singletons, dtype=np.int64)
    for v in range(n - 2):
        rho = rho_generator(v, n)
        moved = s.moved_codes(rho)
        inv = np.asarray(rho.inverse().images, dtype=np.int64)
        if A.size and not np.array_equal(moved[:, A], s.codes[:, A[:, inv]]):
            return False
        if B.size and not np.array_equal(moved[:, B], s.codes[:, B]):
            return False
    s._verified_partitions.add(part)
    return True


def partition_values(s: Section, part: Partition, zeta: Permutation | None = None) -> list[tuple]:
    """Per A-set, the values ``(s_{a_0}(x), .., s_{a_{n-1}}(x))`` at ``x = lambda(zeta)`` (identity by default)."""
    row = s.at(zeta if zeta is not None else Permutation.identity(s.n))
    return [tuple(row[j] for j in A) for A in part.a_sets]


# -- averaging over H*_w --------------------------------------------------------


def _as_zeta(x) -> Permutation:
    return x if isinstance(x, Permutation) else vertex_permutation(x)


def average_section(s: Section, part: Partition, x, w: int) -> tuple:
    """``s*(x, w)`` from the per-set closed forms (``x`` is a vertex or its permutation)."""
    if not verify_partition(part, s):
        raise ValueError("partition does not satisfy the equivariance equations for this section")
    n = s.n
    if not 1 <= w <= n - 1:
        raise ValueError(f"w must lie in 1..{n - 1}")
    row = s.at(_as_zeta(x))
    out = list(row)
    for A in part.a_sets:
        head = sum((row[j] for j in A[:w]), ZERO) / w
        tail = sum((row[j] for j in A[w:]), ZERO) / (n - w)
        for t, j in enumerate(A):
            out[j] = head if t < w else tail
    return tuple(out)


def h_star_average(s: Section, x, w: int) -> tuple:
    """Definitional average ``sum_{pi in H*_w} s(pi.x) / |H*_w|``."""
    H = h_star_subgroup(w, s.n, cap=s.n)
    k = s.index.index(_as_zeta(x))
    ints, den = s.integer_table()
    acc = sum((ints[s.index.left_mult(pi)[k]] for pi in H), np.zeros(s.d, dtype=object))
    return tuple(Fraction(int(v), den * len(H)) for v in acc)


def h_star_average_table(s: Section, w: int) -> list[tuple]:
    """:func:`h_star_average` at every vertex at once (same vertex order as the section)."""
    H = h_star_subgroup(w, s.n, cap=s.n)
    ints, den = s.integer_table()
    acc = np.zeros_like(ints)
    for pi in H:
        acc = acc + ints[s.index.left_mult(pi)]
    scale = den * len(H)
    return [tuple(Fraction(int(v), scale) for v in row) for row in acc]


def averaged_vertex(x: Sequence, w: int) -> tuple:
    """Closed form of the ``H*_w`` average of a vertex: block means over the first w and the rest."""
    n = len(x)
    head = sum((Fraction(v) for v in x[:w]), ZERO) / w
    tail = sum((Fraction(v) for v in x[w:]), ZERO) / (n - w)
    return tuple(head if t < w else tail for t in range(n))


def averaged_vertex_bruteforce(x: Sequence, w: int) -> tuple:
    n = len(x)
    H = h_star_subgroup(w, n, cap=n)
    acc = [ZERO] * n
    for pi in H:
        acc = vadd(acc, act_on_vertex(pi, x))
    return vscale(Fraction(1, len(H)), acc)


# -- split element and zeta ---------------------------------------------------------


def split_violations(values: Sequence[Sequence], w: int) -> list[str]:
    """Names of the conditions ("end"/"start") that fail at ``w``, with the offending set index."""
    bad = []
    for i, a in enumerate(values):
        if a[w - 1] > 0 and not sum(a[w:], ZERO) > 0:
            bad.append(f"end[{i}]")
        if a[w] > 0 and not sum(a[:w], ZERO) > 0:
            bad.append(f"start[{i}]")
    return bad


def find_split_element(values: Sequence[Sequence]) -> int | None:
    """Smallest ``w`` in ``1..n-1`` satisfying (end) and (start) for every set.

    (end): if the w-th value is positive, something after it is positive.
    (start): if the (w+1)-th value is positive, something up to w is positive.
    """
    values = [tuple(Fraction(v) for v in a) for a in values]
    if any(v < 0 for a in values for v in a):
        raise ValueError("values must be nonnegative")
    if not values:
        return 1
    n = len(values[0])
    for w in range(1, n):
        if not split_violations(values, w):
            return w
    return None


def zeta_conditions(zeta: Permutation, w: int) -> list[str]:
    """Failed conditions among: even, zeta maps the first w-1 points into the first w, zeta(w) < w."""
    bad = []
    if not zeta.is_even():
        bad.append("zeta must be even")
    if any(zeta(v) >= w for v in range(w - 1)):
        bad.append(f"zeta must map points 1..{w - 1} into 1..{w}")
    if w >= zeta.n or zeta(w) >= w:
        bad.append(f"zeta must map point {w + 1} into 1..{w}")
    return bad


def default_zeta(w: int, n: int) -> Permutation:
    """The 3-cycle ``w -> w+2 -> w+1 -> w`` (1-based points), fixing the first w-1 points."""
    if not 1 <= w <= n - 2:
        raise ValueError(f"default zeta needs 1 <= w <= n-2, got w={w}, n={n}")
    return Permutation.from_cycles(n, [(w - 1, w + 1, w)])


def find_zeta(w: int, n: int) -> Permutation:
    if w <= n - 2:
        return default_zeta(w, n)
    for p in alternating_group(n, cap=n):
        if not zeta_conditions(p, w):
            return p
    raise ValueError(f"no even zeta satisfies the conditions for w={w}, n={n}")


# -- violating point ----------------------------------------------------------


@dataclass(frozen=True)
class ViolationCertificate:
    n: int
    w: int
    zeta: Permutation
    epsilon: Fraction
    y: tuple
    point: tuple  # (1+eps) avg(lambda(id)) - eps avg(lambda(zeta)), which equals p(y) for any valid extension
    projected_value: Fraction

    @property
    def violated_facet(self) -> tuple:
        return tuple(range(self.w))

    @property
    def rhs(self) -> Fraction:
        return triangular(self.w)

    @property
    def amount(self) -> Fraction:
        return self.rhs - self.projected_value


def _epsilon_coefficients(values, w, n):
    """Per A-set ``(alpha, beta)`` pairs for the head and tail components of y = alpha + eps*beta."""
    out = []
    for a in values:
        head, tail = sum(a[:w], ZERO), sum(a[w:], ZERO)
        out.append(((head / w, (a[w - 1] - a[w]) / w), (tail / (n - w), (a[w] - a[w - 1]) / (n - w))))
    return out


def max_admissible_epsilon(s: Section, part: Partition, w: int) -> Fraction | None:
    """Largest epsilon keeping every component of y nonnegative (``None`` if unbounded)."""
    best = None
    for pair in _epsilon_coefficients(partition_values(s, part), w, s.n):
        for alpha, beta in pair:
            if beta < 0:
                lim = alpha / -beta
                best = lim if best is None else min(best, lim)
    return best


def build_violating_point(s: Section, part: Partition, w: int, zeta: Permutation,
                          epsilon: Fraction) -> ViolationCertificate:
    epsilon = Fraction(epsilon)
    n = s.n
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if not verify_partition(part, s):
        raise ValueError("partition does not satisfy the equivariance equations for this section")
    values = partition_values(s, part)
    bad = split_violations(values, w) if 1 <= w <= n - 1 else [f"w out of range 1..{n - 1}"]
    if bad:
        raise ValueError(f"w={w} violates condition(s) {', '.join(bad)}")
    bad = zeta_conditions(zeta, w)
    if bad:
        raise ValueError("; ".join(bad))

    ident = Permutation.identity(n)
    # even zeta acts on each A-set by relabelling the base values
    zinv = zeta.inverse()
    for A, base in zip(part.a_sets, values):
        row = s.at(zeta)
        if any(row[A[t]] != base[zinv(t)] for t in range(n)):
            raise ValueError("section values at lambda(zeta) disagree with the partition equations")

    s_id = average_section(s, part, ident, w)
    s_z = average_section(s, part, zeta, w)
    y = vadd(vscale(1 + epsilon, s_id), vscale(-epsilon, s_z))

    simplified = list(s_id)
    for A, base, ((h_a, h_b), (t_a, t_b)) in zip(part.a_sets, values, _epsilon_coefficients(values, w, n)):
        for t, j in enumerate(A):
            simplified[j] = h_a + epsilon * h_b if t < w else t_a + epsilon * t_b
    if tuple(simplified) != y:
        raise AssertionError("affine combination and simplified closed form disagree")

    if any(v < 0 for v in y):
        raise InadmissibleEpsilon(epsilon, max_admissible_epsilon(s, part, w))

    p_id = averaged_vertex(lambda_vertex(ident), w)
    p_z = averaged_vertex(lambda_vertex(zeta), w)
    point = vadd(vscale(1 + epsilon, p_id), vscale(-epsilon, p_z))
    return ViolationCertificate(n, w, zeta, epsilon, y, point, prefix_facet_value(point, w))


def verify_violation_certificate(cert: ViolationCertificate, extension=None, affine=None) -> bool:
    """Re-check a certificate from its own data.

    ``extension`` (a SubspaceExtension) supplies affine rows and a projection
    that must send ``y`` to ``cert.point``; ``affine=(A, b)`` supplies rows only.
    The projected point is recomputed by brute-force ``H*_w`` averaging.
    """
    n, w = cert.n, cert.w
    if not 1 <= w <= n - 1 or zeta_conditions(cert.zeta, w):
        return False
    if any(v < 0 for v in cert.y):
        return False
    if extension is not None:
        if len(cert.y) != extension.d or extension.A.matvec(cert.y) != extension.b:
            return False
        if extension.project(cert.y) != tuple(cert.point):
            return False
    if affine is not None:
        A, b = affine
        if A.matvec(cert.y) != tuple(Fraction(v) for v in b):
            return False
    eps = cert.epsilon
    p_id = averaged_vertex_bruteforce(lambda_vertex(Permutation.identity(n)), w)
    p_z = averaged_vertex_bruteforce(lambda_vertex(cert.zeta), w)
    point = vadd(vscale(1 + eps, p_id), vscale(-eps, p_z))
    if point != tuple(cert.point):
        return False
    value = prefix_facet_value(point, w)
    if value != cert.projected_value or not value < triangular(w):
        return False
    return facet_violation(point, permutahedron_facets(n)) is not None


# -- end-to-end audit -------------------------------------------------------


class Verdict(enum.Enum):
    CONSISTENT = "consistent"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass
class AuditReport:
    n: int
    d: int
    bound: Fraction
    verdict: Verdict
    note: str = ""
    certificate: ViolationCertificate | None = None
    partition: Partition | None = None
    stages: list = field(default_factory=list)


def _rho_kappas(witness: WeakSymmetryWitness, s: Section) -> dict:
    direct = witness.generator_kappas
    out = {}
    table = None
    for v in range(s.n - 2):
        rho = rho_generator(v, s.n)
        if rho in direct:
            out[v] = direct[rho]
            continue
        if table is None:
            table = group_kappas(witness, s.n)
        if rho not in table:
            raise ValueError(f"rho_{v + 1} is not generated by the witness generators")
        out[v] = table[rho]
    return out


def audit_extension(E, s: Section, generators_kappas: WeakSymmetryWitness | Mapping | None = None) -> AuditReport:
    """Run the lower-bound pipeline on a claimed weakly symmetric subspace extension."""
    n, d = s.n, E.d
    bound = Fraction(n * (n - 1), 2)
    if not verify_section(s, E):
        raise ValueError("the section is not a section of this extension")
    if generators_kappas is None:
        witness = derive_weak_symmetry_witness(s, [rho_generator(v, n) for v in range(n - 2)])
        if witness is None:
            raise ValueError("no kappa satisfies s(rho.x) = kappa.s(x); the section is not weakly symmetric")
    elif isinstance(generators_kappas, WeakSymmetryWitness):
        witness = generators_kappas
    else:
        witness = WeakSymmetryWitness(tuple(generators_kappas.items()))
    if not verify_witness(s, witness):
        raise ValueError("weak-symmetry witness fails s(pi.x) = kappa.s(x)")

    report = AuditReport(n, d, bound, Verdict.INCONCLUSIVE)
    if n < MIN_N:
        report.note = f"theorem stated for n ≥ {MIN_N} (got n = {n})"
        return report
    if d >= bound:
        report.verdict = Verdict.CONSISTENT
        report.note = f"d = {d} >= n(n-1)/2 = {format_rational(bound)}; no violation expected"
        return report

    try:
        kappas = _rho_kappas(witness, s)
        ess = essential_elements(s)
        none = [j for j, e in enumerate(ess) if e is Essential.NONE]
        if none:
            raise HypothesisFailure("essential-element lemma", f"components {[j + 1 for j in none]} have no essential element")
        report.stages.append("essential elements")
        normalized = {v: normalize_kappa_cycles(kappas[v], rho_generator(v, n), s, ess) for v in kappas}
        report.stages.append("cycle normalization")
        part = chain_partition(normalized, s)
        report.partition = part
        if not verify_partition(part, s):
            raise HypothesisFailure("partition theorem", "chained partition fails the equivariance equations")
        report.stages.append("partition")
        values = partition_values(s, part)
        w = find_split_element(values)
        if w is None:
            raise HypothesisFailure("split-element lemma", f"no w works for {len(part.a_sets)} sets")
        report.stages.append(f"split element w={w}")
        zeta = find_zeta(w, n)
        emax = max_admissible_epsilon(s, part, w)
        if emax is not None and emax <= 0:
            raise HypothesisFailure("violating point", "no positive epsilon keeps y nonnegative")
        eps = Fraction(1) if emax is None else emax / 2
        cert = build_violating_point(s, part, w, zeta, eps)
    except HypothesisFailure as exc:
        report.note = str(exc)
        return report

    if verify_violation_certificate(cert, extension=E):
        report.verdict = Verdict.REFUTED
        report.certificate = cert
        report.note = (f"y >= 0 lies in Q but its projection violates the facet on coordinates 1..{cert.w} "
                       f"by {format_rational(cert.amount)}")
    else:
        report.note = "constructed point failed independent re-verification"
        report.certificate = cert
    return report
