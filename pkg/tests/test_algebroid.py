import random

import pytest
from hypothesis import given, strategies as st

from almostlie import gallery
from almostlie.algebroid import (
    AlgebroidSpec,
    KernelEscapeError,
    SpecError,
    anchor_of,
    bracket,
    check_axioms,
    connection,
    frame_connection,
    jacobiator,
    jacobiator_tensor,
    permute_frame,
)
from almostlie.cochain import random_polynomial
from almostlie.scalars import Derivation, Polynomial, derivation_commutator

from corpus import gallery_specs, reference_form, random_algebras, random_section

SPEC_NAMES = sorted(gallery_specs())
seeds = st.integers(0, 10 ** 6)


def triple():
    return gallery.build_almost_lie_algebra(gallery.named_algebra("triple"))


def so3():
    return gallery.build_almost_lie_algebra(gallery.named_algebra("so3"))


def test_bracket_of_equal_sections_vanishes():
    spec = gallery_specs()["twisted_poisson"]
    phi = random_section(spec, random.Random(1))
    assert bracket(spec, phi, phi).is_zero()


def test_so3_table_lookup():
    g = so3()
    assert bracket(g, g.frame_section(0), g.frame_section(1)) == g.frame_section(2)


def test_vector_field_commutator():
    t = gallery.build_tangent_model(2)
    x1, x2 = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    phi = t.section([x2, 0])
    psi = t.section([0, x1])
    assert bracket(t, phi, psi) == t.section([-x1, x2])


def test_anchor_examples():
    assert anchor_of(so3(), so3().frame_section(0)).is_zero()
    t = gallery.build_tangent_model(3)
    assert anchor_of(t, t.frame_section(0)) == Derivation.coordinate(0, 3)
    tp = gallery_specs()["twisted_poisson"]
    Pi, _ = gallery.twisted_poisson_from_form(reference_form())
    assert list(anchor_of(tp, tp.frame_section(0)).components) == list(Pi.matrix[0])


def test_rank_mismatch_rejected():
    t = gallery.build_tangent_model(2)
    with pytest.raises(SpecError):
        bracket(so3(), so3().frame_section(0), t.frame_section(0))


def test_lie_algebras_pass_axioms():
    for name in ("so3", "sl2", "heisenberg", "abelian:3"):
        assert check_axioms(gallery.build_almost_lie_algebra(gallery.named_algebra(name))).passed


def test_broken_morphism_detected():
    spec = AlgebroidSpec.build(
        1, 2, anchor=[[1], [0]], brackets={(0, 1): [1, 0]},
        kernel_frame=[[0], [1]], kernel_projection=[[0, 1]],
    )
    report = check_axioms(spec)
    assert not report["morphism"].passed
    assert report["anchor_kills_kernel"].passed
    assert "d/dx1" in report["morphism"].detail


def test_non_skew_table_detected():
    n = 2
    zero = Polynomial.zero(0)
    struct = [[[zero] * n for _ in range(n)] for _ in range(n)]
    struct[0][1][0] = Polynomial.constant(1, 0)
    spec = AlgebroidSpec(0, n, [[], []], struct, 2, [[1, 0], [0, 1]], [[1, 0], [0, 1]])
    assert not check_axioms(spec)["skew"].passed


def test_bad_split_detected():
    spec = AlgebroidSpec.build(1, 2, anchor=[[1], [0]], kernel_frame=[[0], [2]],
                               kernel_projection=[[0, 1]])
    assert not check_axioms(spec)["projection_splits"].passed


def test_twisted_action_passes_axioms():
    assert check_axioms(gallery_specs()["kernel_twist"]).passed


def test_jacobiator_triple_table():
    g = triple()
    e = [g.frame_section(a) for a in range(3)]
    assert jacobiator(g, *e) == g.section([1, 1, 1])
    J = jacobiator_tensor(g)
    assert J[0][1][2] == (1, 1, 1)
    assert J[1][0][2] == (-1, -1, -1)
    assert J[2][0][1] == (1, 1, 1)


def test_jacobiator_lie_zero():
    J = jacobiator_tensor(so3())
    assert not any(v for blk in J for row in blk for vec in row for v in vec)
    e = [so3().frame_section(a) for a in range(3)]
    assert jacobiator(so3(), *e).is_zero()


def test_b_twist_jacobiator_nonzero():
    spec = gallery_specs()["b_twist_so3"]
    J = jacobiator_tensor(spec)
    assert any(v for blk in J for row in blk for vec in row for v in vec)


def test_jacobiator_escape():
    # t spans e3 only but J(e1,e2,e3) = e1+e2+e3
    g = triple()
    spec = AlgebroidSpec(0, 3, g.anchor, g.structure, 1, [[0], [0], [1]], [[0, 0, 1]])
    with pytest.raises(KernelEscapeError, match="jacobiator escapes kernel frame"):
        jacobiator_tensor(spec)


@pytest.mark.parametrize("name", SPEC_NAMES)
@given(seed=seeds)
def test_leibniz(name, seed):
    spec = gallery_specs()[name]
    rng = random.Random(seed)
    phi, psi = random_section(spec, rng), random_section(spec, rng)
    f = random_polynomial(spec.base_dim, rng, 2)
    lhs = bracket(spec, phi, psi * f)
    rhs = psi * anchor_of(spec, phi)(f) + bracket(spec, phi, psi) * f
    assert lhs == rhs


@pytest.mark.parametrize("name", SPEC_NAMES)
@given(seed=seeds)
def test_morphism_on_all_sections(name, seed):
    spec = gallery_specs()[name]
    rng = random.Random(seed)
    phi, psi = random_section(spec, rng), random_section(spec, rng)
    assert anchor_of(spec, bracket(spec, phi, psi)) == derivation_commutator(
        anchor_of(spec, phi), anchor_of(spec, psi)
    )


@pytest.mark.parametrize("name", SPEC_NAMES)
@given(seed=seeds)
def test_jacobiator_tensorial_and_alternating(name, seed):
    spec = gallery_specs()[name]
    if spec.rank > 4:
        return
    rng = random.Random(seed)
    phi, psi, chi = (random_section(spec, rng) for _ in range(3))
    f = random_polynomial(spec.base_dim, rng, 2)
    J = jacobiator(spec, phi, psi, chi)
    assert jacobiator(spec, phi, psi * f, chi) == J * f
    assert jacobiator(spec, psi, phi, chi) == -J
    assert jacobiator(spec, phi, phi, chi).is_zero()
    assert anchor_of(spec, J).is_zero()


@pytest.mark.parametrize("name", SPEC_NAMES)
def test_jacobiator_tensor_matches_frame_values(name):
    spec = gallery_specs()[name]
    J = jacobiator_tensor(spec)
    e = [spec.frame_section(a) for a in range(spec.rank)]
    for a in range(spec.rank):
        for b in range(spec.rank):
            for c in range(spec.rank):
                assert spec.embed(spec.section(J[a][b][c], "F")) == jacobiator(spec, e[a], e[b], e[c])


@pytest.mark.parametrize("name", [n for n in SPEC_NAMES if gallery_specs()[n].kernel_rank])
@given(seed=seeds)
def test_connection_axioms(name, seed):
    spec = gallery_specs()[name]
    rng = random.Random(seed)
    phi = random_section(spec, rng)
    v = random_section(spec, rng, "F")
    f = random_polynomial(spec.base_dim, rng, 2)
    assert connection(spec, phi * f, v) == connection(spec, phi, v) * f
    assert connection(spec, phi, v * f) == v * anchor_of(spec, phi)(f) + connection(spec, phi, v) * f


def test_connection_examples():
    ab = gallery.build_almost_lie_algebra(gallery.named_algebra("abelian:2"))
    assert connection(ab, ab.frame_section(0), ab.section([1, 1], "F")).is_zero()
    g = so3()
    v = g.section([0, 1, 0], "F")
    assert g.embed(connection(g, g.frame_section(0), v)) == bracket(g, g.frame_section(0), g.embed(v))
    prod = gallery.build_product_model(1, gallery.named_algebra("so3"))
    x1 = Polynomial.variable(0, 1)
    got = connection(prod, prod.frame_section(0), prod.section([x1 * x1, 0, 0], "F"))
    assert got == prod.section([x1 * 2, 0, 0], "F")


def test_connection_leaving_kernel():
    g = so3()
    bad = AlgebroidSpec(0, 3, g.anchor, g.structure, 1, [[1], [0], [0]], [[1, 0, 0]])
    with pytest.raises(KernelEscapeError, match="bracket leaves kernel"):
        connection(bad, bad.frame_section(1), bad.section([1], "F"))


def test_frame_connection_examples():
    t = gallery.build_tangent_model(1)
    assert frame_connection(t, t.frame_section(0), [5, 2]) == (0, 0)
    assert frame_connection(t, t.frame_section(0), ["x1"]) == (Polynomial.constant(1, 1),)
    assert frame_connection(so3(), so3().frame_section(0), [1]) == (0,)


def test_corpus_specs_are_almost_lie():
    for spec in random_algebras():
        assert check_axioms(spec).passed
    for spec in gallery_specs().values():
        assert check_axioms(spec).passed


def test_permute_frame_preserves_axioms():
    spec = gallery_specs()["b_twist_so3"]
    p = permute_frame(spec, [3, 1, 0, 2])
    assert check_axioms(p).passed
    J, Jp = jacobiator_tensor(spec), jacobiator_tensor(p)
    assert Jp[0][1][2] == J[3][1][0]
