"""Exact rational scalars, vectors, matrices, Gaussian elimination and an exact LP solver.

Scalars are :class:`fractions.Fraction`.  Vectors are tuples of fractions and
matrices are :class:`RatMatrix` (row tuples plus an explicit column count, so
that empty systems keep their width).  Nothing in here touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
RatVector = tuple  # tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def rational_normalize(num: int, den: int) -> Fraction:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    return Fraction(num, den)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; anything else (floats included) is rejected."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"not an exact rational: {text!r}") from None
    return rational_normalize(p, q)


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def vec(values: Iterable) -> tuple:
    return tuple(Fraction(v) for v in values)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b) if x and y), ZERO)


def vadd(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vscale(c, a) -> tuple:
    c = Fraction(c)
    return tuple(c * x for x in a)


@dataclass(frozen=True)
class RatMatrix:
    rows: tuple
    ncols: int

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in r) for r in self.rows)
        for r in rows:
            if len(r) != self.ncols:
                raise ValueError(f"row of length {len(r)} in a matrix with {self.ncols} columns")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], ncols: int | None = None) -> RatMatrix:
        rows = [list(r) for r in rows]
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for an empty matrix")
            ncols = len(rows[0])
        return cls(tuple(rows), ncols)

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> RatMatrix:
        return cls(tuple((ZERO,) * ncols for _ in range(nrows)), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, idx):
        return self.rows[idx]

    def __iter__(self):
        return iter(self.rows)

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def matvec(self, y: Sequence[Fraction]) -> tuple:
        if len(y) != self.ncols:
            raise ValueError(f"dimension mismatch: matrix has {self.ncols} columns, vector has {len(y)}")
        return tuple(dot(r, y) for r in self.rows)

    def matmul(self, other: RatMatrix) -> RatMatrix:
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch in matrix product")
        cols = [other.column(j) for j in range(other.ncols)]
        return RatMatrix(tuple(tuple(dot(r, c) for c in cols) for r in self.rows), other.ncols)

    def transpose(self) -> RatMatrix:
        return RatMatrix(tuple(self.column(j) for j in range(self.ncols)), self.nrows)

    def delete_row(self, i: int) -> RatMatrix:
        return RatMatrix(self.rows[:i] + self.rows[i + 1:], self.ncols)

    def vstack(self, other: RatMatrix) -> RatMatrix:
        if self.ncols != other.ncols:
            raise ValueError("column mismatch in vstack")
        return RatMatrix(self.rows + other.rows, self.ncols)


# -- linear systems ---------------------------------------------------------


@dataclass(frozen=True)
class LinearSolution:
    particular: tuple
    nullspace: tuple  # tuple of basis vectors


def rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form of an augmented or plain matrix (in place).

    Only the first ``ncols`` columns are eligible as pivots.
    """
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            rows[r] = pr = [v * inv for v in pr]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b if b else a for a, b in zip(rows[i], pr)]
        pivots.append(c)
        r += 1
    return rows, pivots


def solve_linear_system(A: RatMatrix, b: Sequence) -> LinearSolution | None:
    """Solve ``A y = b`` exactly; ``None`` when the system is inconsistent."""
    if A.nrows != len(b):
        raise ValueError(f"dimension mismatch: {A.nrows} rows, rhs of length {len(b)}")
    n = A.ncols
    aug = [list(r) + [Fraction(bi)] for r, bi in zip(A.rows, b)]
    aug, pivots = rref(aug, n)
    for row in aug[len(pivots):]:
        if row[n] != 0:
            return None
    particular = [ZERO] * n
    for r, c in enumerate(pivots):
        particular[c] = aug[r][n]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, c in enumerate(pivots):
            v[c] = -aug[r][f]
        basis.append(tuple(v))
    return LinearSolution(tuple(particular), tuple(basis))


# -- linear programming -----------------------------------------------------

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    optimizer: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Dense simplex tableau over fractions; Bland's rule throughout.

    Rows are ``[a_1 .. a_N | rhs]``; ``cost`` holds reduced costs with the
    negated objective value in its last slot.
    """

    def __init__(self, rows, basis, ncols):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols

    def set_cost(self, c):
        cost = list(c) + [ZERO]
        for r, bv in enumerate(self.basis):
            f = cost[bv]
            if f:
                row = self.rows[r]
                cost = [a - f * b if b else a for a, b in zip(cost, row)]
        self.cost = cost

    def pivot(self, r, c):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            row = [v / piv for v in row]
            self.rows[r] = row
        nz = [(k, v) for k, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f:
                    for k, v in nz:
                        other[k] -= f * v
        f = self.cost[c]
        if f:
            for k, v in nz:
                self.cost[k] -= f * v
        self.basis[r] = c

    def run(self, allowed) -> bool:
        """Optimize the current cost; False when unbounded."""
        while True:
            c = next((j for j in range(self.ncols) if allowed[j] and self.cost[j] < 0), None)
            if c is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                a = row[c]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], c)


def _single_sign_rows(ineq_A: RatMatrix, ineq_b):
    """Indices of rows of the form ``-c*y_j <= 0`` (c > 0), which just say ``y_j >= 0``."""
    out = {}
    for r, (row, rhs) in enumerate(zip(ineq_A.rows, ineq_b)):
        if rhs != 0:
            continue
        nz = [(j, v) for j, v in enumerate(row) if v]
        if len(nz) == 1 and nz[0][1] < 0:
            out[r] = nz[0][0]
    return out


def solve_exact_lp(
    objective: Sequence,
    eq: tuple[RatMatrix, Sequence] | None = None,
    ineq: tuple[RatMatrix, Sequence] | None = None,
    nonneg_mask: Iterable[int] = (),
    sense: str = "max",
) -> LPResult:
    """Optimize ``objective . y`` over ``{A_eq y = b_eq, A_le y <= b_le, y_j >= 0 for j in mask}``.

    Two-phase simplex over fractions with Bland's rule.  Free variables are
    split into differences of nonnegative ones; inequality rows get slacks;
    rows that merely state ``y_j >= 0`` are folded into the sign constraints.
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', not {sense!r}")
    d = len(objective)
    eq_A, eq_b = eq if eq is not None else (RatMatrix.zeros(0, d), ())
    in_A, in_b = ineq if ineq is not None else (RatMatrix.zeros(0, d), ())
    for name, (M, rhs) in (("equality", (eq_A, eq_b)), ("inequality", (in_A, in_b))):
        if M.ncols != d or M.nrows != len(rhs):
            raise ValueError(f"{name} block has shape {M.shape} with rhs {len(rhs)}; expected {d} columns")
    nonneg = set(nonneg_mask)
    if any(j < 0 or j >= d for j in nonneg):
        raise ValueError("nonneg_mask index out of range")

    sign_rows = _single_sign_rows(in_A, in_b)
    nonneg.update(sign_rows.values())
    kept_ineq = [r for r in range(in_A.nrows) if r not in sign_rows]

    # column layout: one column per nonneg variable, two per free variable, then slacks
    var_cols: list[tuple[int, int | None]] = []
    ncols = 0
    for j in range(d):
        if j in nonneg:
            var_cols.append((ncols, None))
            ncols += 1
        else:
            var_cols.append((ncols, ncols + 1))
            ncols += 2
    nslack = len(kept_ineq)
    nstruct = ncols + nslack

    def expand(row):
        out = [ZERO] * nstruct
        for j, v in enumerate(row):
            if v:
                p, m = var_cols[j]
                out[p] = v
                if m is not None:
                    out[m] = -v
        return out

    rows = []
    for row, rhs in zip(eq_A.rows, eq_b):
        rows.append(expand(row) + [Fraction(rhs)])
    for k, r in enumerate(kept_ineq):
        ext = expand(in_A.rows[r])
        ext[ncols + k] = ONE
        rows.append(ext + [Fraction(in_b[r])])
    for row in rows:
        if row[-1] < 0:
            row[:] = [-v for v in row]

    m = len(rows)
    total = nstruct + m
    for i, row in enumerate(rows):
        art = [ZERO] * m
        art[i] = ONE
        row[nstruct:nstruct] = art
    tab = _Tableau(rows, list(range(nstruct, total)), total)

    # phase 1
    tab.set_cost([ZERO] * nstruct + [ONE] * m)
    tab.run([True] * total)
    if tab.cost[-1] != 0:
        return LPResult(INFEASIBLE)
    # drive artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= nstruct:
            c = next((j for j in range(nstruct) if tab.rows[i][j] != 0), None)
            if c is None:
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, c)
        i += 1

    # phase 2
    sign = -1 if sense == "max" else 1
    c = [ZERO] * total
    for j, v in enumerate(objective):
        v = Fraction(v) * sign
        if v:
            p, mcol = var_cols[j]
            c[p] = v
            if mcol is not None:
                c[mcol] = -v
    tab.set_cost(c)
    if not tab.run([j < nstruct for j in range(total)]):
        return LPResult(UNBOUNDED)

    x = [ZERO] * total
    for r, bv in enumerate(tab.basis):
        x[bv] = tab.rows[r][-1]
    y = []
    for p, mcol in var_cols:
        y.append(x[p] - (x[mcol] if mcol is not None else ZERO))
    y = tuple(y)
    return LPResult(OPTIMAL, dot(vec(objective), y), y)


def check_feasible(y, eq=None, ineq=None, nonneg_mask=()) -> bool:
    """Exact substitution check of a candidate point."""
    if eq is not None and eq[0].matvec(y) != tuple(Fraction(v) for v in eq[1]):
        return False
    if ineq is not None:
        lhs = ineq[0].matvec(y)
        if any(a > b for a, b in zip(lhs, ineq[1])):
            return False
    return all(y[j] >= 0 for j in nonneg_mask)
