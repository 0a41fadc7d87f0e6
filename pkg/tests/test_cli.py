import io
import json
import subprocess
import sys

import pytest

from almostlie import gallery
from almostlie.algebroid import AlgebroidSpec
from almostlie.cli import RECIPES, main, make_recipe
from almostlie.specfile import dumps, loads

BROKEN = """\
ALMOSTLIE-SPEC v1
base_dim 1
rank 2
kernel_rank 1
ANCHOR
1 1 : 1
STRUCTURE
1 2 1 : 1
KERNEL_FRAME
2 1 : 1
KERNEL_PROJECTION
1 2 : 1
END
"""


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def spec_file(tmp_path):
    def write(spec_or_text, name="a.spec"):
        text = spec_or_text if isinstance(spec_or_text, str) else dumps(spec_or_text)
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def status(out, name):
    for line in out.splitlines():
        if line.split()[:1] == [name]:
            return line.split()[1]
    raise KeyError(name)


def test_check_tangent(capsys, spec_file):
    code, out, _ = run(capsys, "check", spec_file(gallery.build_tangent_model(2)))
    assert code == 0
    assert status(out, "result") == "PASS"
    assert status(out, "d_squared") == "PASS"
    assert "(25 checked)" in out


def test_check_broken_morphism(capsys, spec_file):
    code, out, _ = run(capsys, "check", spec_file(BROKEN))
    assert code == 1
    assert status(out, "morphism") == "FAIL"
    assert status(out, "dj_zero") == "SKIP"
    assert status(out, "result") == "FAIL"


def test_check_triple_reports_jacobiator(capsys, spec_file):
    triple = gallery.build_almost_lie_algebra(gallery.named_algebra("triple"))
    code, out, _ = run(capsys, "check", spec_file(triple))
    assert code == 0
    assert "nonzero (3 components)" in out
    for B in (1, 2, 3):
        assert f"J^{B}_1,2,3 = 1" in out


def test_check_escaping_jacobiator(capsys, spec_file):
    # triple bracket plus a central e4; the kernel frame spans e4 only
    _, table = gallery.named_algebra("triple")
    spec = AlgebroidSpec.build(
        0, 4, brackets={k: v + [0] for k, v in table.items()},
        kernel_frame=[[0], [0], [0], [1]], kernel_projection=[[0, 0, 0, 1]],
    )
    code, out, _ = run(capsys, "check", spec_file(spec))
    assert code == 1
    assert status(out, "kernel_closed") == "PASS"
    assert status(out, "jacobiator") == "FAIL"
    assert "escapes kernel frame" in out


def test_check_reads_stdin(capsys, monkeypatch):
    text = dumps(gallery.build_tangent_model(1))
    code, out, _ = run(capsys, "check", "-", stdin=text, monkeypatch=monkeypatch)
    assert code == 0 and status(out, "result") == "PASS"


def test_check_parse_error(capsys, spec_file):
    code, out, err = run(capsys, "check", spec_file(BROKEN.replace("rank 2", "rank 2 3")))
    assert code == 2
    assert out == ""
    assert "line 3" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.spec"))
    assert code == 2 and "error:" in err


def test_report_is_byte_identical(capsys, spec_file):
    path = spec_file(gallery.random_almost_lie_algebra(4, 3))
    first = run(capsys, "check", path, "--seed", "5")[1]
    second = run(capsys, "check", path, "--seed", "5")[1]
    assert first == second
    assert "time" not in first


def test_timings_go_to_stderr(capsys, spec_file):
    path = spec_file(gallery.build_tangent_model(2))
    code, out, err = run(capsys, "check", path, "--timings")
    assert out == run(capsys, "check", path)[1]
    assert "time axioms" in err and "time d_squared" in err


def test_structured_output(capsys, spec_file):
    code, out, _ = run(capsys, "check", spec_file(BROKEN), "--structured")
    report = json.loads(out)
    assert code == 1
    assert report["result"] == "FAIL"
    assert {c["name"]: c["status"] for c in report["checks"]}["morphism"] == "FAIL"
    code, out, _ = run(capsys, "cohomology", spec_file(gallery.build_tangent_model(2)), "--structured")
    assert json.loads(out)["betti"] == [1, 2, 1, 0]


def test_cohomology_examples(capsys, spec_file):
    g = gallery.random_almost_lie_algebra(3, 1)
    code, out, _ = run(capsys, "cohomology", spec_file(g), "--max-degree", "5")
    assert code == 0 and out.splitlines()[-1] == "betti 1 0 0 0 0 0"
    code, out, _ = run(capsys, "cohomology", spec_file(gallery.build_tangent_model(2)))
    assert out.splitlines()[-1] == "betti 1 2 1 0"
    prod = gallery.build_product_model(1, gallery.named_algebra("abelian:1"))
    code, out, _ = run(capsys, "cohomology", spec_file(prod), "--max-degree", "3")
    assert out.splitlines()[-1] == "betti 1 1 0 0"
    assert "composite_zero PASS" in out


def test_cohomology_infinite_dimensional(capsys, spec_file):
    text = run(capsys, "recipe", "b-twist")[1]
    code, _, err = run(capsys, "cohomology", spec_file(text))
    assert code == 2 and "infinite-dimensional piece" in err


@pytest.mark.parametrize(
    "name, params",
    [
        ("tangent", ["m=2"]),
        ("product", ["m=1", "algebra=so3"]),
        ("b-twist", []),
        ("twisted-poisson", []),
        ("twisted-poisson", ["preset=nonclosed"]),
        ("twisted-poisson", ["preset=degenerate"]),
        ("twisted-poisson", ["m=4", "pi=1 2 : 1; 3 4 : 1"]),
        ("twisted-action", []),
        ("twisted-action", ["preset=kernel-twist"]),
        ("random-algebra", ["dim=4", "seed=7"]),
    ],
)
def test_recipes_pass_check(capsys, tmp_path, name, params):
    out_path = tmp_path / "r.spec"
    assert run(capsys, "recipe", name, *params, "-o", str(out_path))[0] == 0
    code, out, _ = run(capsys, "check", str(out_path))
    assert code == 0, out


def test_symplectic_recipe_has_zero_jacobiator(capsys, spec_file):
    text = run(capsys, "recipe", "twisted-poisson")[1]
    code, out, _ = run(capsys, "check", spec_file(text))
    assert code == 0
    assert "jacobiator           PASS  zero" in out


def test_broken_recipe_fails_morphism(capsys, spec_file):
    text = run(capsys, "recipe", "twisted-poisson", "preset=broken")[1]
    code, out, _ = run(capsys, "check", spec_file(text))
    assert code == 1 and status(out, "morphism") == "FAIL"


def test_random_algebra_recipe_is_deterministic(capsys):
    a = run(capsys, "recipe", "random-algebra", "dim=4", "seed=7")[1]
    b = run(capsys, "recipe", "random-algebra", "dim=4", "seed=7")[1]
    assert a == b
    assert loads(a) == gallery.random_almost_lie_algebra(4, 7)


def test_recipe_errors(capsys):
    assert run(capsys, "recipe", "tangent", "m=x")[0] == 2
    assert run(capsys, "recipe", "tangent", "q=1")[0] == 2
    assert run(capsys, "recipe", "tangent", "m")[0] == 2
    assert run(capsys, "recipe", "twisted-poisson", "preset=nope")[0] == 2
    with pytest.raises(SystemExit):
        main(["recipe", "nope"])


def test_all_recipes_registered():
    assert set(RECIPES) == {
        "tangent", "product", "b-twist", "twisted-poisson", "twisted-action", "random-algebra",
    }
    assert make_recipe("tangent", {"m": "1"}) == gallery.build_tangent_model(1)


def test_module_entry_point(tmp_path):
    path = tmp_path / "t.spec"
    path.write_text(dumps(gallery.build_tangent_model(1)))
    proc = subprocess.run(
        [sys.executable, "-m", "almostlie", "check", str(path)], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].split() == ["result", "PASS"]
