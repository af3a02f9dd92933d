"""Small hand-made extensions and sections used to exercise the audit.

An *equivariant block* with base values ``(c_1, .., c_n)`` is the n-vector
``y_t = c_{x_t}``; permuting coordinates of ``x`` permutes the block in the
same way, so ``rho`` generators act on it by 3-cycles.  Stacking blocks (plus
constant components) gives sections with prescribed partition structure.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exactnum import ONE, ZERO, RatMatrix
from .formulation import SubspaceExtension
from .permgroup import DEFAULT_CAP, Permutation
from .section import Section


def block_section(n: int, blocks: Sequence[Sequence], constants: Sequence = (), cap: int = DEFAULT_CAP) -> Section:
    """``s_{i*n + t}(x) = blocks[i][x_t - 1]``, followed by the constant components."""
    blocks = [tuple(Fraction(c) for c in base) for base in blocks]
    if any(len(base) != n for base in blocks):
        raise ValueError(f"every block needs {n} base values")
    constants = tuple(Fraction(c) for c in constants)

    def rule(zeta: Permutation):
        inv = zeta.inverse()  # x_t - 1 = zeta^-1(t)
        return [base[inv(t)] for base in blocks for t in range(n)] + list(constants)

    return Section(n, n * len(blocks) + len(constants), rule=rule, cap=cap)


def block_affine_rows(n: int, blocks: Sequence[Sequence], constants: Sequence = ()) -> tuple[RatMatrix, tuple]:
    """Rows fixing each block sum and each constant: invariant under every relabelling."""
    d = n * len(blocks) + len(constants)
    rows, rhs = [], []
    for i, base in enumerate(blocks):
        rows.append([ONE if i * n <= c < (i + 1) * n else ZERO for c in range(d)])
        rhs.append(sum((Fraction(v) for v in base), ZERO))
    for k, c in enumerate(constants):
        j = n * len(blocks) + k
        rows.append([ONE if col == j else ZERO for col in range(d)])
        rhs.append(Fraction(c))
    return RatMatrix.from_rows(rows, d), tuple(rhs)


def block_extension(n: int, blocks: Sequence[Sequence], constants: Sequence = ()) -> SubspaceExtension:
    """Extension whose first block is ``x`` itself (base ``1..n``), projected onto that block.

    Valid as a section of the returned system, but ``Q`` is larger than the
    permutahedron whenever the audit refutes it.
    """
    if tuple(Fraction(v) for v in blocks[0]) != tuple(Fraction(v + 1) for v in range(n)):
        raise ValueError("the first block must have base values 1..n so that it projects to x")
    A, b = block_affine_rows(n, blocks, constants)
    proj = [[ONE if c == v else ZERO for c in range(A.ncols)] for v in range(n)]
    names = tuple(f"y{i + 1}_{t + 1}" for i in range(len(blocks)) for t in range(n))
    names += tuple(f"c{k + 1}" for k in range(len(constants)))
    return SubspaceExtension(A, b, RatMatrix.from_rows(proj, A.ncols), names)


def indicator(n: int, value: int) -> tuple:
    """Base values of the block ``[x_t == value]`` (1-based value)."""
    return tuple(ONE if v + 1 == value else ZERO for v in range(n))


def small_counterexample(n: int = 6, cap: int = DEFAULT_CAP) -> tuple[SubspaceExtension, Section]:
    """``d = 2n``: x itself plus the indicator block of ``x_t = 1``."""
    blocks = [tuple(range(1, n + 1)), indicator(n, 1)]
    return block_extension(n, blocks), block_section(n, blocks, cap=cap)


def indicator_pair(n: int = 6) -> tuple[tuple[RatMatrix, tuple], Section]:
    """Two indicator blocks, ``[x_t = n]`` and ``[x_t = 1]``, with their sum rows (no projection)."""
    blocks = [indicator(n, n), indicator(n, 1)]
    return block_affine_rows(n, blocks), block_section(n, blocks)


def doubled_birkhoff_section(n: int, cap: int = DEFAULT_CAP) -> Section:
    """Permutation matrix of zeta, written twice: component ``j`` and ``j + n^2`` agree."""
    d = n * n

    def rule(zeta):
        row = [ZERO] * (2 * d)
        for i in range(n):
            row[i * n + zeta(i)] = ONE
            row[d + i * n + zeta(i)] = ONE
        return row

    return Section(n, 2 * d, rule=rule, cap=cap)


def doubled_six_cycle_kappa(n: int, v: int) -> Permutation:
    """For ``rho_v``: per row i one 6-cycle alternating between the two copies."""
    d = n * n
    cycles = []
    for i in range(n):
        a, b, c = (i * n + v, i * n + v + 1, i * n + v + 2)
        cycles.append((a, d + b, c, d + a, b, d + c))
    return Permutation.from_cycles(2 * d, cycles)
