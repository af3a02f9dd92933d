"""Command-line entry point: ``permext <subcommand> ...``.

Exit codes: 0 verified/consistent, 1 refuted or failed verification,
2 inconclusive, 64 usage error or malformed input.
"""

from __future__ import annotations

import argparse
import sys

from . import textio
from .audit import Verdict, audit_extension, verify_violation_certificate
from .exactnum import format_rational
from .formulation import (
    SubspaceExtension,
    birkhoff_z_extension,
    build_birkhoff_extension,
    combined_lower_bound,
    face_count_lower_bound,
    find_symmetry_certificate,
    symmetric_variable_bound,
    to_subspace_extension,
    verify_projection,
    verify_symmetry_certificate,
)
from .permgroup import CapExceeded, parse_permutation, rho_generators
from .polytope import permutahedron_facets
from .section import canonical_birkhoff_section, derive_weak_symmetry_witness, verify_section
from .synthetic import small_counterexample

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_CLI_CAP = 7


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read(), path
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _size(source: str, prefix: str) -> int | None:
    if not source.startswith(prefix + ":"):
        return None
    try:
        n = int(source[len(prefix) + 1:])
    except ValueError:
        raise UsageError(f"bad size in {source!r}") from None
    if n < 1:
        raise UsageError(f"size must be positive in {source!r}")
    return n


def load_formulation(source: str):
    for prefix, build in (("birkhoff-z", birkhoff_z_extension), ("birkhoff", build_birkhoff_extension)):
        n = _size(source, prefix)
        if n is not None:
            return build(n)
    n = _size(source, "fixture")
    if n is not None:
        return small_counterexample(n)[0]
    text, src = _read(source)
    return textio.parse_formulation(text, src)


def load_section(source: str, cap: int):
    n = _size(source, "birkhoff")
    if n is not None:
        return canonical_birkhoff_section(n, cap=cap)
    n = _size(source, "fixture")
    if n is not None:
        return small_counterexample(n, cap=cap)[1]
    text, src = _read(source)
    return textio.parse_section(text, src, cap=cap)


def _target(source: str):
    n = _size(source, "perm")
    if n is not None:
        return permutahedron_facets(n)
    text, src = _read(source)
    return textio.parse_facets(text, src)


# -- subcommands ------------------------------------------------------------


def cmd_gen_facets(args, out):
    out.write(textio.emit_facets(permutahedron_facets(args.n)))
    return EXIT_OK


def cmd_gen_birkhoff(args, out):
    out.write(textio.emit_formulation(build_birkhoff_extension(args.n)))
    return EXIT_OK


def cmd_gen_birkhoff_z(args, out):
    out.write(textio.emit_formulation(birkhoff_z_extension(args.n)))
    return EXIT_OK


def cmd_to_subspace(args, out):
    F = load_formulation(args.file)
    if isinstance(F, SubspaceExtension):
        raise UsageError("input is already a subspace extension")
    out.write(textio.emit_formulation(to_subspace_extension(F)))
    return EXIT_OK


def cmd_verify_projection(args, out):
    E = load_formulation(args.file)
    report = verify_projection(E, _target(args.target), cap=args.cap, jobs=args.jobs)
    out.write("\n".join(report.lines()) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify_symmetry(args, out):
    F = load_formulation(args.file)
    if args.cert:
        text, src = _read(args.cert)
        cert = textio.parse_symmetry_certificate(text, src)
        ok = verify_symmetry_certificate(F, cert)
        out.write("certificate verified\n" if ok else "certificate FAILED\n")
        return EXIT_OK if ok else EXIT_FAIL
    try:
        pi = parse_permutation(args.pi, F.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cert = find_symmetry_certificate(F, pi)
    if cert is None:
        out.write(f"no certificate found for pi = {pi.cycle_string()}\n")
        return EXIT_FAIL
    out.write(textio.emit_symmetry_certificate(cert))
    return EXIT_OK


def cmd_derive_witness(args, out):
    s = load_section(args.section, args.cap)
    if args.generators:
        try:
            gens = [parse_permutation(g, s.n) for g in args.generators]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        gens = rho_generators(s.n)
    witness = derive_weak_symmetry_witness(s, gens)
    if witness is None:
        out.write("no kappa found: the section is not weakly symmetric for these generators\n")
        return EXIT_FAIL
    out.write(textio.emit_witness(witness, s.n, s.d))
    return EXIT_OK


def cmd_audit(args, out):
    E = load_formulation(args.extension)
    if not isinstance(E, SubspaceExtension):
        raise UsageError("audit needs a subspace extension (run to-subspace first)")
    s = load_section(args.section, args.cap)
    if args.certificate:
        text, src = _read(args.certificate)
        cert = textio.parse_violation_certificate(text, src)
        if not verify_section(s, E):
            out.write("section does not verify against the extension\n")
            return EXIT_FAIL
        ok = verify_violation_certificate(cert, extension=E)
        out.write("certificate verified: extension refuted\n" if ok else "certificate rejected\n")
        return EXIT_FAIL if ok else EXIT_INCONCLUSIVE
    witness = None
    if args.witness:
        text, src = _read(args.witness)
        witness = textio.parse_witness(text, src)
    try:
        report = audit_extension(E, s, witness)
    except ValueError as exc:
        out.write(f"rejected: {exc}\n")
        return EXIT_FAIL
    out.write(textio.emit_audit_report(report))
    return {Verdict.CONSISTENT: EXIT_OK, Verdict.REFUTED: EXIT_FAIL, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.verdict]


def cmd_bounds(args, out):
    n = args.n
    out.write(f"facets={2 ** n - 2} nonsym≥{face_count_lower_bound(n)} "
              f"sym-vars≥{format_rational(symmetric_variable_bound(n))} "
              f"sym-total≥{format_rational(combined_lower_bound(n))}\n")
    return EXIT_OK


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    cap_help = f"largest n for exhaustive work (default {DEFAULT_CLI_CAP})"
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", dest="sub_cap", type=_positive, help=cap_help)
    p = _Parser(prog="permext", description="Extended formulations of the permutahedron, exactly.")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CLI_CAP, help=cap_help)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    for name, fn, what in (("gen-facets", cmd_gen_facets, "facet description of the permutahedron"),
                           ("gen-birkhoff", cmd_gen_birkhoff, "Birkhoff formulation with x and z"),
                           ("gen-birkhoff-z", cmd_gen_birkhoff_z, "doubly stochastic z only")):
        add(name, fn, what).add_argument("n", type=_positive)

    sp = add("to-subspace", cmd_to_subspace, "rewrite a formulation as a subspace extension")
    sp.add_argument("file", nargs="?", default="-")

    sp = add("verify-projection", cmd_verify_projection, "certify p(Q) equals the target polytope")
    sp.add_argument("file", nargs="?", default="-")
    sp.add_argument("--target", required=True, help="perm:N or a facets file")
    sp.add_argument("--jobs", type=_positive, default=1)

    sp = add("verify-symmetry", cmd_verify_symmetry, "find or check a symmetry certificate")
    sp.add_argument("file", nargs="?", default="-")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--pi", help="permutation, e.g. '(1 2)' or '[2,1,3]'")
    g.add_argument("--cert", help="certificate file to check")

    sp = add("derive-witness", cmd_derive_witness, "find kappa permutations for a section")
    sp.add_argument("--section", required=True, help="birkhoff:N, fixture:N or a section file")
    sp.add_argument("--generators", nargs="*", help="default: the 3-cycles (v v+1 v+2)")

    sp = add("audit", cmd_audit, "run the lower-bound pipeline on an extension and section")
    sp.add_argument("--extension", required=True, help="birkhoff-z:N, fixture:N or a subspace file")
    sp.add_argument("--section", required=True, help="birkhoff:N, fixture:N or a section file")
    sp.add_argument("--witness", help="witness file (derived when omitted)")
    sp.add_argument("--certificate", help="re-check a violation certificate instead of auditing")

    add("bounds", cmd_bounds, "closed-form size bounds").add_argument("n", type=_positive)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.sub_cap is not None:
        args.cap = args.sub_cap
    try:
        return args.func(args, out)
    except textio.ParseError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
    except CapExceeded as exc:
        print(f"refused: {exc} (raise --cap to allow)", file=sys.stderr)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
    return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
