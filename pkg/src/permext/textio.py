"""Line-oriented text formats for formulations, sections, witnesses and certificates.

All numbers are exact rationals written ``p/q`` (or ``p``).  Permutations are
written in 1-based cycle notation; the degree comes from the header.  Blank
lines and ``#`` comments are ignored.  Every parser reports the offending line
number through :class:`ParseError`.

Formulation file::

    kind formulation            # or: subspace, facets
    dims m=3 d=12 eq=9 ineq=9
    vars x1 x2 ...              # optional
    eq 1 0 -1 ... = 0
    ineq 0 0 -1 ... <= 0        # facets files write ">=" rows instead
    proj 1 0 0 ...
    end
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .audit import AuditReport, ViolationCertificate
from .exactnum import RatMatrix, format_rational, parse_rational
from .formulation import Formulation, SubspaceExtension, SymmetryCertificate
from .permgroup import DEFAULT_CAP, Permutation, parse_permutation
from .polytope import FacetSystem, subset_mask
from .section import Section, WeakSymmetryWitness


class ParseError(ValueError):
    def __init__(self, lineno: int | None, message: str, source: str = "<input>"):
        where = f"{source}:{lineno}" if lineno is not None else source
        super().__init__(f"{where}: {message}")
        self.lineno = lineno


def _lines(text: str):
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield k, line


def _header(line: str, k: int, keyword: str, source: str) -> dict:
    head, *fields = line.split()
    if head != keyword:
        raise ParseError(k, f"expected '{keyword}' header, got {head!r}", source)
    out = {}
    for f in fields:
        key, sep, val = f.partition("=")
        if not sep:
            raise ParseError(k, f"header field {f!r} is not key=value", source)
        try:
            out[key] = int(val)
        except ValueError:
            raise ParseError(k, f"header field {key} must be an integer", source) from None
    return out


def _rationals(tokens, k, source) -> list[Fraction]:
    try:
        return [parse_rational(t) for t in tokens]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(k, str(exc), source) from None


def _perm(text: str, n: int, k: int, source: str) -> Permutation:
    try:
        return parse_permutation(text, n)
    except ValueError as exc:
        raise ParseError(k, str(exc), source) from None


def _fmt_row(row) -> str:
    return " ".join(format_rational(v) for v in row)


# -- formulations ---------------------------------------------------------


def emit_formulation(E) -> str:
    if isinstance(E, SubspaceExtension):
        out = ["kind subspace", f"dims m={E.m} d={E.d} eq={E.A.nrows} ineq=0"]
        eqs, ineqs = zip(E.A.rows, E.b), ()
    else:
        out = ["kind formulation", f"dims m={E.m} d={E.d} eq={E.eq_A.nrows} ineq={E.ineq_A.nrows}"]
        eqs, ineqs = zip(E.eq_A.rows, E.eq_b), zip(E.ineq_A.rows, E.ineq_b)
    if E.names:
        out.append("vars " + " ".join(E.names))
    out += [f"eq {_fmt_row(r)} = {format_rational(b)}" for r, b in eqs]
    out += [f"ineq {_fmt_row(r)} <= {format_rational(b)}" for r, b in ineqs]
    out += [f"proj {_fmt_row(r)}" for r in E.projection.rows]
    out.append("end")
    return "\n".join(out) + "\n"


def emit_facets(fs: FacetSystem) -> str:
    n = fs.n
    out = ["kind facets", f"dims m={n} d={n} eq=1 ineq={len(fs.inequalities)}",
           "vars " + " ".join(f"x{v + 1}" for v in range(n))]
    coeffs, rhs = fs.equation
    out.append(f"eq {_fmt_row(coeffs)} = {format_rational(rhs)}")
    out += [f"ineq {_fmt_row(fs.coefficients(m))} >= {format_rational(r)}" for m, r in fs.inequalities]
    out += [f"proj {_fmt_row(1 if c == v else 0 for c in range(n))}" for v in range(n)]
    out.append("end")
    return "\n".join(out) + "\n"


def _parse_blocks(text: str, source: str):
    it = _lines(text)
    try:
        k, line = next(it)
    except StopIteration:
        raise ParseError(None, "empty formulation file", source) from None
    parts = line.split()
    if parts[0] != "kind" or len(parts) != 2 or parts[1] not in ("formulation", "subspace", "facets"):
        raise ParseError(k, "expected 'kind formulation|subspace|facets'", source)
    kind = parts[1]
    try:
        k, line = next(it)
    except StopIteration:
        raise ParseError(k, "missing dims line", source) from None
    dims = _header(line, k, "dims", source)
    for key in ("m", "d", "eq", "ineq"):
        if key not in dims:
            raise ParseError(k, f"dims line lacks {key}=", source)
    d = dims["d"]
    names, eqs, ineqs, proj = (), [], [], []
    ended = False
    for k, line in it:
        if ended:
            raise ParseError(k, "content after 'end'", source)
        tag, _, rest = line.partition(" ")
        toks = rest.split()
        if tag == "end":
            ended = True
        elif tag == "vars":
            if len(toks) != d:
                raise ParseError(k, f"{len(toks)} variable names for d={d}", source)
            names = tuple(toks)
        elif tag in ("eq", "ineq"):
            ops = [t for t in toks if t in ("=", "<=", ">=")]
            if len(ops) != 1 or toks[-2] != ops[0]:
                raise ParseError(k, "row must end with '= r', '<= r' or '>= r'", source)
            op = ops[0]
            coeffs = _rationals(toks[:-2], k, source)
            (rhs,) = _rationals(toks[-1:], k, source)
            if len(coeffs) != d:
                raise ParseError(k, f"row has {len(coeffs)} coefficients, expected d={d}", source)
            if tag == "eq" and op != "=":
                raise ParseError(k, "eq rows use '='", source)
            if tag == "ineq" and op == "=":
                raise ParseError(k, "ineq rows use '<=' or '>='", source)
            (eqs if tag == "eq" else ineqs).append((coeffs, op, rhs, k))
        elif tag == "proj":
            row = _rationals(toks, k, source)
            if len(row) != d:
                raise ParseError(k, f"projection row has {len(row)} entries, expected d={d}", source)
            proj.append(row)
        else:
            raise ParseError(k, f"unknown line tag {tag!r}", source)
    if not ended:
        raise ParseError(None, "missing 'end'", source)
    if len(eqs) != dims["eq"] or len(ineqs) != dims["ineq"] or len(proj) != dims["m"]:
        raise ParseError(None, f"row counts eq={len(eqs)} ineq={len(ineqs)} proj={len(proj)} "
                         f"disagree with the dims line", source)
    return kind, d, names, eqs, ineqs, proj


def parse_formulation(text: str, source: str = "<input>"):
    """Parse a ``formulation`` or ``subspace`` file (``facets`` files load as a Formulation too)."""
    kind, d, names, eqs, ineqs, proj = _parse_blocks(text, source)
    P = RatMatrix.from_rows(proj, d)
    if kind == "subspace":
        if ineqs:
            raise ParseError(ineqs[0][3], "subspace files carry equations only", source)
        return SubspaceExtension(RatMatrix.from_rows([c for c, *_ in eqs], d), tuple(r for _, _, r, _ in eqs), P, names)
    rows, rhs = [], []
    for coeffs, op, r, _ in ineqs:
        if op == ">=":
            coeffs, r = [-c for c in coeffs], -r
        rows.append(coeffs)
        rhs.append(r)
    return Formulation(RatMatrix.from_rows([c for c, *_ in eqs], d), tuple(r for _, _, r, _ in eqs),
                       RatMatrix.from_rows(rows, d), tuple(rhs), P, names)


def parse_facets(text: str, source: str = "<input>") -> FacetSystem:
    """Read a ``facets`` file back; rows must be 0/1 subset rows with ``>=``."""
    kind, d, names, eqs, ineqs, proj = _parse_blocks(text, source)
    if kind != "facets":
        raise ParseError(1, f"expected kind facets, got {kind}", source)
    if len(eqs) != 1:
        raise ParseError(None, "facets file needs exactly one equation", source)
    coeffs, _, rhs, _ = eqs[0]
    out = []
    for c, op, r, k in ineqs:
        if op != ">=" or any(v not in (0, 1) for v in c):
            raise ParseError(k, "facet rows must be 0/1 coefficient rows with '>='", source)
        out.append((subset_mask(v for v in range(d) if c[v] == 1), r))
    return FacetSystem(d, (tuple(coeffs), rhs), tuple(out))


# -- sections and witnesses -------------------------------------------------


def emit_section(s: Section) -> str:
    out = [f"section n={s.n} d={s.d}"]
    out += [f"{z.one_line()} : " + ",".join(format_rational(v) for v in row) for z, row in zip(s.index.perms, s.table)]
    return "\n".join(out) + "\n"


def parse_section(text: str, source: str = "<input>", cap: int = DEFAULT_CAP) -> Section:
    it = _lines(text)
    try:
        k, line = next(it)
    except StopIteration:
        raise ParseError(None, "empty section file", source) from None
    hdr = _header(line, k, "section", source)
    if "n" not in hdr or "d" not in hdr:
        raise ParseError(k, "section header needs n= and d=", source)
    n, d = hdr["n"], hdr["d"]
    values = {}
    for k, line in it:
        lhs, sep, rhs = line.partition(":")
        if not sep:
            raise ParseError(k, "expected 'zeta : v1,v2,...'", source)
        zeta = _perm(lhs.strip(), n, k, source)
        row = _rationals([t for t in rhs.split(",")], k, source) if rhs.strip() else []
        if len(row) != d:
            raise ParseError(k, f"{len(row)} values, expected d={d}", source)
        if zeta in values:
            raise ParseError(k, f"duplicate vertex {zeta.one_line()}", source)
        values[zeta] = row
    try:
        return Section.from_mapping(n, d, values, cap=cap)
    except ValueError as exc:
        raise ParseError(None, str(exc), source) from None


def emit_witness(witness: WeakSymmetryWitness, n: int, d: int) -> str:
    out = [f"witness n={n} d={d}"]
    out += [f"{pi.cycle_string()} -> {kappa.cycle_string()}" for pi, kappa in witness.pairs]
    return "\n".join(out) + "\n"


def parse_witness(text: str, source: str = "<input>") -> WeakSymmetryWitness:
    it = _lines(text)
    try:
        k, line = next(it)
    except StopIteration:
        raise ParseError(None, "empty witness file", source) from None
    hdr = _header(line, k, "witness", source)
    if "n" not in hdr or "d" not in hdr:
        raise ParseError(k, "witness header needs n= and d=", source)
    pairs = []
    for k, line in it:
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise ParseError(k, "expected 'pi -> kappa'", source)
        pairs.append((_perm(lhs, hdr.get("n"), k, source), _perm(rhs, hdr.get("d"), k, source)))
    return WeakSymmetryWitness(tuple(pairs))


# -- symmetry certificates ----------------------------------------------------


def emit_symmetry_certificate(cert: SymmetryCertificate) -> str:
    c = cert
    return "\n".join([
        f"symmetry-certificate m={c.pi.n} d={c.kappa.n} eq={c.rho_eq.n} ineq={c.rho_ineq.n}",
        f"pi {c.pi.cycle_string()}",
        f"kappa {c.kappa.cycle_string()}",
        f"rho-eq {c.rho_eq.cycle_string()}",
        f"rho-ineq {c.rho_ineq.cycle_string()}",
        "end",
    ]) + "\n"


def parse_symmetry_certificate(text: str, source: str = "<input>") -> SymmetryCertificate:
    it = _lines(text)
    try:
        k, line = next(it)
    except StopIteration:
        raise ParseError(None, "empty certificate file", source) from None
    hdr = _header(line, k, "symmetry-certificate", source)
    degree = {"pi": hdr.get("m"), "kappa": hdr.get("d"), "rho-eq": hdr.get("eq"), "rho-ineq": hdr.get("ineq")}
    if None in degree.values():
        raise ParseError(k, "header needs m=, d=, eq= and ineq=", source)
    got = {}
    for k, line in it:
        tag, _, rest = line.partition(" ")
        if tag == "end":
            break
        if tag not in degree:
            raise ParseError(k, f"unknown line tag {tag!r}", source)
        got[tag] = _perm(rest, degree[tag], k, source)
    missing = [t for t in degree if t not in got]
    if missing:
        raise ParseError(None, f"certificate lacks {', '.join(missing)}", source)
    return SymmetryCertificate(got["pi"], got["kappa"], got["rho-eq"], got["rho-ineq"])


# -- audit reports ------------------------------------------------------------


def _csv(values: Iterable) -> str:
    return ",".join(format_rational(v) for v in values)


def emit_violation_certificate(cert: ViolationCertificate) -> str:
    return "\n".join([
        f"violation-certificate n={cert.n} d={len(cert.y)}",
        f"w {cert.w}",
        f"zeta {cert.zeta.one_line()}",
        f"epsilon {format_rational(cert.epsilon)}",
        f"y {_csv(cert.y)}",
        f"point {_csv(cert.point)}",
        "facet " + ",".join(str(v + 1) for v in cert.violated_facet),
        f"rhs {format_rational(cert.rhs)}",
        f"projected-value {format_rational(cert.projected_value)}",
        "end",
    ]) + "\n"


def parse_violation_certificate(text: str, source: str = "<input>") -> ViolationCertificate:
    """Parse a certificate, embedded in an audit report or standalone."""
    lines = list(_lines(text))
    start = next((i for i, (_, l) in enumerate(lines) if l.startswith("violation-certificate")), None)
    if start is None:
        raise ParseError(None, "no violation-certificate block", source)
    k0, head = lines[start]
    hdr = _header(head, k0, "violation-certificate", source)
    n, d = hdr.get("n"), hdr.get("d")
    if n is None or d is None:
        raise ParseError(k0, "header needs n= and d=", source)
    got = {}
    for k, line in lines[start + 1:]:
        tag, _, rest = line.partition(" ")
        if tag == "end":
            break
        got[tag] = (k, rest.strip())
    need = ("w", "zeta", "epsilon", "y", "point", "projected-value")
    missing = [t for t in need if t not in got]
    if missing:
        raise ParseError(None, f"certificate lacks {', '.join(missing)}", source)
    k, w = got["w"]
    try:
        w = int(w)
    except ValueError:
        raise ParseError(k, "w must be an integer", source) from None
    zeta = _perm(got["zeta"][1], n, got["zeta"][0], source)
    (eps,) = _rationals([got["epsilon"][1]], got["epsilon"][0], source)
    y = _rationals(got["y"][1].split(","), got["y"][0], source)
    if len(y) != d:
        raise ParseError(got["y"][0], f"y has {len(y)} entries, expected d={d}", source)
    point = _rationals(got["point"][1].split(","), got["point"][0], source)
    if len(point) != n:
        raise ParseError(got["point"][0], f"point has {len(point)} entries, expected n={n}", source)
    (value,) = _rationals([got["projected-value"][1]], got["projected-value"][0], source)
    return ViolationCertificate(n, w, zeta, eps, tuple(y), tuple(point), value)


def emit_audit_report(report: AuditReport) -> str:
    out = [f"audit n={report.n} d={report.d} bound={format_rational(report.bound)}",
           f"verdict {report.verdict.value}"]
    if report.note:
        out.append(f"note {report.note}")
    for stage in report.stages:
        out.append(f"stage {stage}")
    if report.partition is not None:
        for A in report.partition.a_sets:
            out.append("a-set " + ",".join(str(j + 1) for j in A))
        if report.partition.b_singletons:
            out.append("b-singletons " + ",".join(str(j + 1) for j in report.partition.b_singletons))
    text = "\n".join(out) + "\n"
    if report.certificate is not None:
        text += emit_violation_certificate(report.certificate)
    return text
