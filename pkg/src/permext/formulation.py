"""Extended formulations of the permutahedron and their verification.

A :class:`Formulation` is ``{y : A_eq y = b_eq, A_le y <= b_le}`` with a linear
projection ``p``; a :class:`SubspaceExtension` is ``{y >= 0 : A y = b}`` with a
projection.  Variable order for the Birkhoff system is the x block first, then
``z[i][v]`` row-major at index ``n + i*n + v`` (all 0-based).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import (
    ONE,
    ZERO,
    RatMatrix,
    check_feasible,
    solve_exact_lp,
)
from .permgroup import DEFAULT_CAP, Permutation
from .polytope import FacetSystem, permutahedron_vertices, subset_of


@dataclass(frozen=True)
class Formulation:
    eq_A: RatMatrix
    eq_b: tuple
    ineq_A: RatMatrix
    ineq_b: tuple
    projection: RatMatrix
    names: tuple = ()

    def __post_init__(self):
        d = self.projection.ncols
        object.__setattr__(self, "eq_b", tuple(Fraction(v) for v in self.eq_b))
        object.__setattr__(self, "ineq_b", tuple(Fraction(v) for v in self.ineq_b))
        if self.eq_A.ncols != d or self.ineq_A.ncols != d:
            raise ValueError("constraint matrices and projection disagree on the number of variables")
        if self.eq_A.nrows != len(self.eq_b) or self.ineq_A.nrows != len(self.ineq_b):
            raise ValueError("right-hand side length does not match the row count")
        if self.names and len(self.names) != d:
            raise ValueError("one name per variable expected")

    @property
    def d(self) -> int:
        return self.projection.ncols

    @property
    def m(self) -> int:
        return self.projection.nrows

    @property
    def f(self) -> int:
        return self.ineq_A.nrows

    def contains(self, y) -> bool:
        return check_feasible(y, (self.eq_A, self.eq_b), (self.ineq_A, self.ineq_b))

    def project(self, y) -> tuple:
        return self.projection.matvec(y)


@dataclass(frozen=True)
class SubspaceExtension:
    A: RatMatrix
    b: tuple
    projection: RatMatrix
    names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(Fraction(v) for v in self.b))
        if self.A.ncols != self.projection.ncols:
            raise ValueError("affine rows and projection disagree on the number of variables")
        if self.A.nrows != len(self.b):
            raise ValueError("right-hand side length does not match the row count")

    @property
    def d(self) -> int:
        return self.projection.ncols

    @property
    def m(self) -> int:
        return self.projection.nrows

    def contains(self, y) -> bool:
        return len(y) == self.d and all(v >= 0 for v in y) and self.A.matvec(y) == self.b

    def project(self, y) -> tuple:
        return self.projection.matvec(y)

    def as_formulation(self) -> Formulation:
        """The same polyhedron with the sign constraints written as rows ``-y_j <= 0``."""
        neg = RatMatrix(tuple(tuple(-ONE if i == j else ZERO for j in range(self.d)) for i in range(self.d)), self.d)
        return Formulation(self.A, self.b, neg, (ZERO,) * self.d, self.projection, self.names)


@dataclass(frozen=True)
class SymmetryCertificate:
    pi: Permutation
    kappa: Permutation
    rho_eq: Permutation
    rho_ineq: Permutation

    def compose(self, other: SymmetryCertificate) -> SymmetryCertificate:
        return SymmetryCertificate(self.pi * other.pi, self.kappa * other.kappa,
                                   self.rho_eq * other.rho_eq, self.rho_ineq * other.rho_ineq)


def _as_formulation(E) -> Formulation:
    return E.as_formulation() if isinstance(E, SubspaceExtension) else E


# -- constructions ----------------------------------------------------------


def birkhoff_names(n: int) -> tuple:
    return tuple(f"x{v + 1}" for v in range(n)) + tuple(
        f"z{i + 1}_{v + 1}" for i in range(n) for v in range(n))


def build_birkhoff_extension(n: int) -> Formulation:
    """``sum_i i z[i][v] = x_v``, doubly stochastic ``z``, ``z >= 0``; projection onto x."""
    if n < 1:
        raise ValueError("n must be positive")
    d = n * n + n

    def z(i, v):
        return n + i * n + v

    eq_rows, eq_b = [], []
    for v in range(n):
        row = [ZERO] * d
        for i in range(n):
            row[z(i, v)] = Fraction(i + 1)
        row[v] = -ONE
        eq_rows.append(row)
        eq_b.append(ZERO)
    for i in range(n):
        row = [ZERO] * d
        for v in range(n):
            row[z(i, v)] = ONE
        eq_rows.append(row)
        eq_b.append(ONE)
    for v in range(n):
        row = [ZERO] * d
        for i in range(n):
            row[z(i, v)] = ONE
        eq_rows.append(row)
        eq_b.append(ONE)
    in_rows = []
    for i in range(n):
        for v in range(n):
            row = [ZERO] * d
            row[z(i, v)] = -ONE
            in_rows.append(row)
    proj = [[ONE if c == v else ZERO for c in range(d)] for v in range(n)]
    return Formulation(RatMatrix.from_rows(eq_rows, d), tuple(eq_b), RatMatrix.from_rows(in_rows, d),
                       (ZERO,) * (n * n), RatMatrix.from_rows(proj, d), birkhoff_names(n))


def birkhoff_z_extension(n: int) -> SubspaceExtension:
    """Doubly stochastic matrices ``z`` (index ``i*n + v``) with ``p(z)_v = sum_i (i+1) z[i][v]``."""
    if n < 1:
        raise ValueError("n must be positive")
    d = n * n
    rows = []
    for i in range(n):
        rows.append([ONE if c // n == i else ZERO for c in range(d)])
    for v in range(n):
        rows.append([ONE if c % n == v else ZERO for c in range(d)])
    proj = [[Fraction(c // n + 1) if c % n == v else ZERO for c in range(d)] for v in range(n)]
    names = tuple(f"z{i + 1}_{v + 1}" for i in range(n) for v in range(n))
    return SubspaceExtension(RatMatrix.from_rows(rows, d), (ONE,) * (2 * n), RatMatrix.from_rows(proj, d), names)


# -- symmetric formulation -> subspace extension ------------------------------


@dataclass(frozen=True)
class SubspaceLayout:
    """How the variables of a formulation sit inside its subspace transform."""

    columns: tuple  # per original variable: (plus_col, minus_col or None)
    sign_rows: frozenset  # inequality rows absorbed by the nonnegative orthant
    slack_rows: tuple  # inequality rows that received a slack, in slack order
    d: int


def subspace_layout(F: Formulation) -> SubspaceLayout:
    sign_rows = set()
    nonneg = set()
    for r, (row, rhs) in enumerate(zip(F.ineq_A.rows, F.ineq_b)):
        nz = [(j, v) for j, v in enumerate(row) if v]
        if len(nz) == 1 and nz[0][1] < 0 and rhs <= 0:
            nonneg.add(nz[0][0])
            if rhs == 0:
                sign_rows.add(r)
    cols = []
    k = 0
    for j in range(F.d):
        if j in nonneg:
            cols.append((k, None))
            k += 1
        else:
            cols.append((k, k + 1))
            k += 2
    slack_rows = tuple(r for r in range(F.f) if r not in sign_rows)
    return SubspaceLayout(tuple(cols), frozenset(sign_rows), slack_rows, k + len(slack_rows))


def to_subspace_extension(F: Formulation) -> SubspaceExtension:
    """Rewrite ``F`` as ``{y' >= 0 : A' y' = b'}`` with at most ``2*d + f`` variables.

    Variables that already carry a row ``-c*y_j <= b`` (c > 0, b <= 0) stay as
    they are; all others are split into ``y+ - y-``.  Every inequality row other
    than a plain ``y_j >= 0`` gets one slack.
    """
    lay = subspace_layout(F)
    nvar = lay.d - len(lay.slack_rows)

    def lift(row):
        out = [ZERO] * lay.d
        for j, v in enumerate(row):
            if v:
                p, m = lay.columns[j]
                out[p] = v
                if m is not None:
                    out[m] = -v
        return out

    rows = [lift(r) for r in F.eq_A.rows]
    b = list(F.eq_b)
    for k, r in enumerate(lay.slack_rows):
        row = lift(F.ineq_A.rows[r])
        row[nvar + k] = ONE
        rows.append(row)
        b.append(F.ineq_b[r])
    proj = [lift(r) for r in F.projection.rows]
    names = ()
    if F.names:
        nm = [""] * lay.d
        for j, (p, m) in enumerate(lay.columns):
            if m is None:
                nm[p] = F.names[j]
            else:
                nm[p], nm[m] = F.names[j] + "+", F.names[j] + "-"
        for k, r in enumerate(lay.slack_rows):
            nm[nvar + k] = f"s{r + 1}"
        names = tuple(nm)
    return SubspaceExtension(RatMatrix.from_rows(rows, lay.d), tuple(b), RatMatrix.from_rows(proj, lay.d), names)


def lift_certificate(F: Formulation, cert: SymmetryCertificate) -> SymmetryCertificate:
    """Carry a certificate of ``F`` over to ``to_subspace_extension(F).as_formulation()``.

    Split pairs follow ``kappa``; slacks and their rows follow ``rho_ineq``.
    """
    lay = subspace_layout(F)
    nvar = lay.d - len(lay.slack_rows)
    kappa = [0] * lay.d
    for j, (p, m) in enumerate(lay.columns):
        tp, tm = lay.columns[cert.kappa(j)]
        if (m is None) != (tm is None):
            raise ValueError("kappa does not respect the sign structure of the formulation")
        kappa[p] = tp
        if m is not None:
            kappa[m] = tm
    slack_pos = {r: k for k, r in enumerate(lay.slack_rows)}
    for k, r in enumerate(lay.slack_rows):
        kappa[nvar + k] = nvar + slack_pos[cert.rho_ineq(r)]
    neq = F.eq_A.nrows
    rho_eq = [cert.rho_eq(r) for r in range(neq)]
    rho_eq += [neq + slack_pos[cert.rho_ineq(r)] for r in lay.slack_rows]
    kappa = Permutation(tuple(kappa))
    return SymmetryCertificate(cert.pi, kappa, Permutation(tuple(rho_eq)), kappa)


# -- projection verification ------------------------------------------------


@dataclass
class ProjectionReport:
    passed: bool
    vertices_checked: int
    coverage_failures: list = field(default_factory=list)  # vertices with no preimage in Q
    facet_failures: list = field(default_factory=list)  # (facet label, minimum or "unbounded"/"infeasible")
    equation_ok: bool = True

    def lines(self) -> list[str]:
        from .exactnum import format_rational

        out = [f"vertices {self.vertices_checked} uncovered {len(self.coverage_failures)}"]
        for x in self.coverage_failures:
            out.append("uncovered " + " ".join(format_rational(v) for v in x))
        out.append(f"equation {'ok' if self.equation_ok else 'FAILED'}")
        for label, val in self.facet_failures:
            shown = val if isinstance(val, str) else format_rational(val)
            out.append(f"facet-failure {label} min={shown}")
        out.append("PASS" if self.passed else "FAIL")
        return out


def _lp_blocks(E):
    if isinstance(E, SubspaceExtension):
        return (E.A, E.b), None, range(E.d), E.projection
    return (E.eq_A, E.eq_b), (E.ineq_A, E.ineq_b), (), E.projection


def facet_label(S: Sequence[int]) -> str:
    return "{" + ",".join(str(v + 1) for v in S) + "}"


def _coverage_task(args):
    eq, ineq, mask, proj, x = args
    A, b = eq
    A2 = A.vstack(proj)
    b2 = tuple(b) + tuple(x)
    res = solve_exact_lp((ZERO,) * A.ncols, (A2, b2), ineq, mask, "min")
    return res.optimal and check_feasible(res.optimizer, (A2, b2), ineq, mask)


def _min_task(args):
    eq, ineq, mask, c = args
    res = solve_exact_lp(c, eq, ineq, mask, "min")
    return res.status, res.value


def _map(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def verify_projection(E, target: FacetSystem, cap: int = DEFAULT_CAP, jobs: int = 1) -> ProjectionReport:
    """Certify ``p(Q) == Pi_n``: every vertex has a preimage, and every facet is valid on ``p(Q)``."""
    if E.m != target.n:
        raise ValueError(f"projection has {E.m} rows but the target lives in dimension {target.n}")
    eq, ineq, mask, proj = _lp_blocks(E)
    mask = tuple(mask)
    verts = permutahedron_vertices(target.n, cap)
    covered = _map(_coverage_task, [(eq, ineq, mask, proj, x) for x in verts], jobs)
    report = ProjectionReport(False, len(verts))
    report.coverage_failures = [x for x, ok in zip(verts, covered) if not ok]

    def objective(coeffs):
        # c . p(y) as a row over y
        return tuple(sum((c * proj.rows[v][j] for v, c in enumerate(coeffs) if c), ZERO) for j in range(E.d))

    tasks = []
    coeffs, rhs = target.equation
    tasks.append((eq, ineq, mask, objective(coeffs)))
    tasks.append((eq, ineq, mask, objective(tuple(-c for c in coeffs))))
    for m, _ in target.inequalities:
        tasks.append((eq, ineq, mask, objective(target.coefficients(m))))
    results = _map(_min_task, tasks, jobs)
    (st_lo, lo), (st_hi, hi) = results[0], results[1]
    report.equation_ok = st_lo == "optimal" and st_hi == "optimal" and lo == rhs and -hi == rhs
    for (m, r), (status, val) in zip(target.inequalities, results[2:]):
        label = facet_label(subset_of(m, target.n))
        if status != "optimal":
            report.facet_failures.append((label, status))
        elif val < r:
            report.facet_failures.append((label, val))
    report.passed = not report.coverage_failures and not report.facet_failures and report.equation_ok
    return report


# -- symmetry certificates ----------------------------------------------------


def _check_block(A: RatMatrix, b, kappa: Permutation, rho: Permutation) -> bool:
    if rho.n != A.nrows:
        return False
    for r, row in enumerate(A.rows):
        target = A.rows[rho(r)]
        if b[rho(r)] != b[r]:
            return False
        if any(target[kappa(c)] != v for c, v in enumerate(row)):
            return False
    return True


def verify_symmetry_certificate(F, cert: SymmetryCertificate) -> bool:
    """Rows and columns permuted together reproduce the system, and ``p(kappa.y) == pi.p(y)``."""
    F = _as_formulation(F)
    if cert.kappa.n != F.d or cert.pi.n != F.m:
        return False
    if not _check_block(F.eq_A, F.eq_b, cert.kappa, cert.rho_eq):
        return False
    if not _check_block(F.ineq_A, F.ineq_b, cert.kappa, cert.rho_ineq):
        return False
    p = F.projection.rows
    return all(p[cert.pi(u)][cert.kappa(c)] == p[u][c] for u in range(F.m) for c in range(F.d))


def _refine(rows, row_color, col_color, ncols):
    """Colour refinement on the bipartite row/column incidence structure."""
    while True:
        new_cols = []
        for c in range(ncols):
            sig = sorted((row_color[r], rows[r][c]) for r in range(len(rows)) if rows[r][c])
            new_cols.append((col_color[c], tuple(sig)))
        new_rows = []
        for r, row in enumerate(rows):
            sig = sorted((col_color[c], v) for c, v in enumerate(row) if v)
            new_rows.append((row_color[r], tuple(sig)))
        cmap = {k: i for i, k in enumerate(sorted(set(new_cols)))}
        rmap = {k: i for i, k in enumerate(sorted(set(new_rows)))}
        nc = [cmap[k] for k in new_cols]
        nr = [rmap[k] for k in new_rows]
        if len(cmap) == len(set(col_color)) and len(rmap) == len(set(row_color)):
            return nr, nc
        row_color, col_color = nr, nc


def _match(options: list[list[int]], size: int) -> list[int] | None:
    """Perfect matching ``r -> options[r]`` (Kuhn's augmenting paths)."""
    owner = [-1] * size

    def augment(r, seen):
        for t in options[r]:
            if t in seen:
                continue
            seen.add(t)
            if owner[t] == -1 or augment(owner[t], seen):
                owner[t] = r
                return True
        return False

    for r in range(len(options)):
        if not augment(r, set()):
            return None
    out = [0] * len(options)
    for t, r in enumerate(owner):
        out[r] = t
    return out


def find_symmetry_certificate(F, pi: Permutation, cap: int = 400) -> SymmetryCertificate | None:
    """Search for ``kappa`` and row permutations completing ``pi`` to a certificate.

    Colour refinement narrows the candidates, then a backtracking search over
    column images keeps, for every row, the set of rows it could still map to.
    The projection rows are pinned to ``pi``.
    """
    F = _as_formulation(F)
    if F.d > cap:
        raise ValueError(f"certificate search over {F.d} variables exceeds cap {cap}")
    if pi.n != F.m:
        raise ValueError(f"pi acts on {pi.n} points but the projection has {F.m} rows")
    if pi.is_identity():
        return SymmetryCertificate(pi, Permutation.identity(F.d), Permutation.identity(F.eq_A.nrows),
                                   Permutation.identity(F.f))

    codes: dict[Fraction, int] = {ZERO: 0}

    def code(v):
        return codes.setdefault(v, len(codes))

    neq, nin, m, d = F.eq_A.nrows, F.f, F.m, F.d
    rows = ([[code(v) for v in r] for r in F.eq_A.rows] + [[code(v) for v in r] for r in F.ineq_A.rows]
            + [[code(v) for v in r] for r in F.projection.rows])
    tags = ([(0, code(b)) for b in F.eq_b] + [(1, code(b)) for b in F.ineq_b] + [(2, 0)] * m)
    tmap = {t: i for i, t in enumerate(sorted(set(tags)))}
    row_color, col_color = _refine(rows, [tmap[t] for t in tags], [0] * d, d)

    nrows = len(rows)
    R = []
    for r in range(nrows):
        if r >= neq + nin:
            u = r - neq - nin
            t = neq + nin + pi(u)
            R.append({t} if row_color[t] == row_color[r] else set())
        else:
            R.append({t for t in range(neq + nin) if row_color[t] == row_color[r]})
    if any(not s for s in R):
        return None

    order = sorted(range(d), key=lambda c: (sum(1 for k in col_color if k == col_color[c]), c))
    kappa = [-1] * d
    used = [False] * d

    def viable(c, t):
        for r in range(nrows):
            v = rows[r][c]
            if not any(rows[s][t] == v for s in R[r]):
                return False
        return True

    def search(k):
        nonlocal R
        if k == d:
            return _finish() is not None
        c = order[k]
        for t in range(d):
            if used[t] or col_color[t] != col_color[c] or not viable(c, t):
                continue
            saved = R
            R = [{s for s in R[r] if rows[s][t] == rows[r][c]} for r in range(nrows)]
            kappa[c] = t
            used[t] = True
            if search(k + 1):
                return True
            used[t] = False
            kappa[c] = -1
            R = saved
        return False

    result = {}

    def _finish():
        eq_opts = [sorted(R[r]) for r in range(neq)]
        in_opts = [sorted(s - neq for s in R[neq + r]) for r in range(nin)]
        rho_eq = _match(eq_opts, neq)
        rho_in = _match(in_opts, nin)
        if rho_eq is None or rho_in is None:
            return None
        result["cert"] = SymmetryCertificate(pi, Permutation(tuple(kappa)), Permutation(tuple(rho_eq)),
                                             Permutation(tuple(rho_in)))
        return result["cert"]

    if d == 0:
        _finish()
    elif not search(0):
        return None
    cert = result.get("cert")
    if cert is None or not verify_symmetry_certificate(F, cert):
        return None
    return cert


def birkhoff_certificate(n: int, pi: Permutation) -> SymmetryCertificate:
    """The natural certificate of the Birkhoff system: ``x_v -> x_pi(v)``, ``z[i][v] -> z[i][pi(v)]``."""
    kappa = list(range(n)) + [0] * (n * n)
    for v in range(n):
        kappa[v] = pi(v)
        for i in range(n):
            kappa[n + i * n + v] = n + i * n + pi(v)
    rho_eq = [pi(v) for v in range(n)] + [n + i for i in range(n)] + [2 * n + pi(v) for v in range(n)]
    rho_in = [i * n + pi(v) for i in range(n) for v in range(n)]
    return SymmetryCertificate(pi, Permutation(tuple(kappa)), Permutation(tuple(rho_eq)), Permutation(tuple(rho_in)))


# -- bounds ---------------------------------------------------------------


def face_count_lower_bound(n: int) -> int:
    """``ceil(log2(n!))``: an extension with f facets has at most 2**f faces."""
    if n < 1:
        raise ValueError("n must be positive")
    return (math.factorial(n) - 1).bit_length()


def symmetric_variable_bound(n: int) -> Fraction:
    return Fraction(n * (n - 1), 2)


def combined_lower_bound(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(n * (n - 1), 4)
