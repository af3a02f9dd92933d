import io

import pytest

from permext import textio
from permext.cli import main
from permext.formulation import birkhoff_z_extension, build_birkhoff_extension, to_subspace_extension
from permext.polytope import permutahedron_facets
from permext.section import canonical_birkhoff_section, derive_weak_symmetry_witness
from permext.permgroup import rho_generators
from permext.synthetic import small_counterexample


def run(argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_bounds():
    assert run(["bounds", "6"]) == (0, "facets=62 nonsym≥10 sym-vars≥15 sym-total≥15/2\n")


@pytest.mark.parametrize("F", [build_birkhoff_extension(3), birkhoff_z_extension(3),
                               to_subspace_extension(build_birkhoff_extension(2))])
def test_formulation_roundtrip(F):
    text = textio.emit_formulation(F)
    assert textio.parse_formulation(text) == F
    assert textio.emit_formulation(textio.parse_formulation(text)) == text


def test_facets_roundtrip():
    fs = permutahedron_facets(4)
    assert textio.parse_facets(textio.emit_facets(fs)) == fs


def test_section_and_witness_roundtrip():
    s = canonical_birkhoff_section(3)
    s2 = textio.parse_section(textio.emit_section(s))
    assert s2.table == s.table
    w = derive_weak_symmetry_witness(s, rho_generators(3))
    assert textio.parse_witness(textio.emit_witness(w, 3, 9)) == w


def test_pipe_verify_projection(monkeypatch):
    code, text = run(["gen-birkhoff", "3"])
    assert code == 0
    code, report = run(["verify-projection", "--target", "perm:3"], stdin=text, monkeypatch=monkeypatch)
    assert code == 0 and report.strip().endswith("PASS")


def test_mutilated_file_fails(tmp_path):
    code, text = run(["gen-birkhoff", "3"])
    lines = text.splitlines()
    first_ineq = next(k for k, l in enumerate(lines) if l.startswith("ineq"))
    del lines[first_ineq]
    lines = [l.replace("ineq=9", "ineq=8") for l in lines]
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(lines) + "\n")
    code, report = run(["verify-projection", str(path), "--target", "perm:3"])
    assert code == 1
    assert "facet-failure {2,3}" in report


def test_facets_file_target(tmp_path):
    path = tmp_path / "facets.txt"
    path.write_text(run(["gen-facets", "3"])[1])
    assert run(["verify-projection", "birkhoff:3", "--target", str(path)])[0] == 0


def test_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("kind formulation\ndims m=1 d=2 eq=1 ineq=0\neq 1 x = 3\nproj 1 0\nend\n")
    code, _ = run(["verify-projection", str(path), "--target", "perm:2"])
    assert code == 64
    assert f"{path}:3:" in capsys.readouterr().err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "zero"])
    assert exc.value.code == 64
    assert run(["audit", "--extension", "birkhoff:6", "--section", "birkhoff:6"])[0] == 64


def test_cap_refusal(capsys):
    code, _ = run(["--cap", "5", "audit", "--extension", "birkhoff-z:6", "--section", "birkhoff:6"])
    assert code == 64
    assert "cap" in capsys.readouterr().err


def test_symmetry_roundtrip(tmp_path):
    code, cert = run(["verify-symmetry", "birkhoff:4", "--pi", "(1 2 3 4)"])
    assert code == 0
    path = tmp_path / "cert.txt"
    path.write_text(cert)
    assert run(["verify-symmetry", "birkhoff:4", "--cert", str(path)]) == (0, "certificate verified\n")
    assert run(["verify-symmetry", "birkhoff-z:4", "--cert", str(path)])[0] == 1


def test_derive_witness():
    code, text = run(["derive-witness", "--section", "birkhoff:4"])
    assert code == 0
    assert text.splitlines()[1] == "(1 2 3) -> (1 2 3)(5 6 7)(9 10 11)(13 14 15)"


def test_audit_exit_codes(tmp_path):
    assert run(["audit", "--extension", "birkhoff-z:6", "--section", "birkhoff:6"])[0] == 0
    code, text = run(["audit", "--extension", "birkhoff-z:5", "--section", "birkhoff:5"])
    assert code == 2 and "n ≥ 6" in text
    code, report = run(["audit", "--extension", "fixture:6", "--section", "fixture:6"])
    assert code == 1 and "verdict refuted" in report
    path = tmp_path / "report.txt"
    path.write_text(report)
    code, text = run(["audit", "--extension", "fixture:6", "--section", "fixture:6", "--certificate", str(path)])
    assert code == 1 and "verified" in text
    path.write_text(report.replace("epsilon 3/2", "epsilon 2"))
    assert run(["audit", "--extension", "fixture:6", "--section", "fixture:6", "--certificate", str(path)])[0] == 2


def test_audit_with_witness_file(tmp_path):
    wpath = tmp_path / "w.txt"
    wpath.write_text(run(["derive-witness", "--section", "fixture:6"])[1])
    spath = tmp_path / "s.txt"
    spath.write_text(textio.emit_section(small_counterexample(6)[1]))
    epath = tmp_path / "e.txt"
    epath.write_text(textio.emit_formulation(small_counterexample(6)[0]))
    code, text = run(["audit", "--extension", str(epath), "--section", str(spath), "--witness", str(wpath)])
    assert code == 1


def test_deterministic_output():
    a = run(["audit", "--extension", "fixture:6", "--section", "fixture:6"])
    b = run(["audit", "--extension", "fixture:6", "--section", "fixture:6"])
    assert a == b


def test_to_subspace():
    code, text = run(["to-subspace", "birkhoff:3"])
    E = textio.parse_formulation(text)
    assert code == 0 and E.d <= 2 * 12 + 9
