import random

import pytest
from hypothesis import given, strategies as st

from almostlie import gallery
from almostlie.algebroid import SpecError, anchor_of, check_axioms, jacobiator_tensor
from almostlie.cochain import check_dj_zero, random_polynomial
from almostlie.gallery import (
    BivectorField,
    FormField,
    NotALieAlgebraError,
    TwistError,
    build_b_twist,
    build_product_model,
    build_tangent_model,
    build_twisted_action,
    build_twisted_poisson,
    cartan_contract,
    cartan_d,
    cartan_lie,
    named_algebra,
    twisted_poisson_from_form,
)
from almostlie.scalars import Derivation, Polynomial

from corpus import gallery_specs, reference_form

seeds = st.integers(0, 10 ** 6)


def jacobiator_is_zero(spec):
    J = jacobiator_tensor(spec)
    return not any(v for blk in J for row in blk for vec in row for v in vec)


def random_form(m, k, rng):
    coeffs = {}
    for _ in range(3):
        key = tuple(sorted(rng.sample(range(m), k)))
        coeffs[key] = random_polynomial(m, rng, 2)
    return FormField(m, k, coeffs)


def random_field(m, rng):
    return Derivation([random_polynomial(m, rng, 2) for _ in range(m)])


# --- Cartan calculus -------------------------------------------------------


@given(seeds, st.integers(0, 2))
def test_d_squared_zero(seed, k):
    rng = random.Random(seed)
    w = random_form(4, k, rng)
    assert cartan_d(cartan_d(w)).is_zero()


@given(seeds)
def test_lie_derivative_on_functions(seed):
    rng = random.Random(seed)
    X = random_field(3, rng)
    f = random_polynomial(3, rng, 3)
    assert cartan_lie(X, FormField(3, 0, {(): f})) == FormField(3, 0, {(): X(f)})


def test_contract_example():
    dx12 = FormField(2, 2, {(0, 1): 1})
    assert cartan_contract(Derivation.coordinate(0, 2), dx12) == FormField(2, 1, {(1,): 1})
    assert cartan_contract(Derivation.coordinate(1, 2), dx12) == FormField(2, 1, {(0,): -1})


@given(seeds)
def test_lie_derivative_of_coordinate_forms(seed):
    rng = random.Random(seed)
    X = random_field(3, rng)
    for j in range(3):
        dxj = FormField(3, 1, {(j,): 1})
        assert cartan_lie(X, dxj) == cartan_d(FormField(3, 0, {(): X.components[j]}))


@given(seeds)
def test_lie_derivative_of_one_forms_direct(seed):
    # (L_X a)_j = X^i d_i a_j + a_i d_j X^i
    rng = random.Random(seed)
    m = 3
    X = random_field(m, rng)
    a = random_form(m, 1, rng)
    comp = [a.coeffs.get((i,), Polynomial.zero(m)) for i in range(m)]
    direct = {}
    for j in range(m):
        v = X(comp[j])
        for i in range(m):
            v = v + comp[i] * X.components[i].diff(j)
        direct[(j,)] = v
    assert cartan_lie(X, a) == FormField(m, 1, direct)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cartan_contract(Derivation.coordinate(0, 3), FormField(2, 1, {(0,): 1}))


# --- builders ---------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_tangent_model(m):
    t = build_tangent_model(m)
    assert (t.base_dim, t.rank, t.kernel_rank) == (m, m, 0)
    assert check_axioms(t).passed and jacobiator_is_zero(t) and check_dj_zero(t).passed


def test_tangent_model_needs_positive_dimension():
    with pytest.raises(SpecError):
        build_tangent_model(0)


def test_product_model():
    spec = build_product_model(2, named_algebra("sl2"))
    assert (spec.rank, spec.kernel_rank) == (5, 3)
    assert check_axioms(spec).passed and jacobiator_is_zero(spec)
    g = gallery.build_almost_lie_algebra(named_algebra("sl2"))
    assert build_product_model(0, named_algebra("sl2")) == g


def test_product_model_rejects_non_lie():
    with pytest.raises(NotALieAlgebraError, match="not a Lie algebra"):
        build_product_model(1, named_algebra("triple"))


def test_b_twist():
    base = build_product_model(1, named_algebra("abelian:1"))
    assert build_b_twist(base, {}) == base
    assert build_b_twist(base, {(0, 1): [0]}) == base
    spec = build_b_twist(base, {(0, 1): ["x1"]})
    assert check_axioms(spec).passed and check_dj_zero(spec).passed
    assert spec.structure[0][1][1] == Polynomial.variable(0, 1)


def test_b_twist_must_be_kernel_valued():
    base = build_product_model(1, named_algebra("abelian:1"))
    with pytest.raises(SpecError, match="kernel-valued"):
        build_b_twist(base, {(0, 1): [1, 0]}, in_ambient=True)
    with pytest.raises(SpecError, match="kernel-valued"):
        build_b_twist(base, {(0, 1): [1, 0]})


def test_b_twist_needs_lie_algebroid():
    with pytest.raises(SpecError):
        build_b_twist(gallery_specs()["triple"], {})


@given(seeds)
def test_random_b_twists_satisfy_dj(seed):
    rng = random.Random(seed)
    base = build_product_model(1, named_algebra("so3"))
    B = {}
    for a in range(4):
        for b in range(a + 1, 4):
            if rng.random() < 0.5:
                B[(a, b)] = [random_polynomial(1, rng, 1) for _ in range(3)]
    spec = build_b_twist(base, B)
    assert check_axioms(spec).passed and check_dj_zero(spec).passed


# --- twisted Poisson --------------------------------------------------------


def test_constant_symplectic_is_lie():
    spec = build_twisted_poisson(BivectorField.from_entries(2, {(0, 1): 1}))
    assert check_axioms(spec).passed and jacobiator_is_zero(spec)
    assert spec.kernel_rank == 0


def test_anchor_is_pi_sharp():
    Pi, H = twisted_poisson_from_form(reference_form())
    spec = build_twisted_poisson(Pi, H)
    for i in range(4):
        assert list(anchor_of(spec, spec.frame_section(i)).components) == list(Pi.matrix[i])


def test_degenerate_pi_needs_kernel_frame():
    with pytest.raises(SpecError, match="degenerate"):
        build_twisted_poisson(BivectorField.from_entries(3, {(0, 1): 1}))


@pytest.mark.parametrize("f", ["1", "x1", "x3", "x1 x2 - 2"])
def test_rank_two_pi_on_three_space(f):
    # Pi# has a 2-dimensional image, so every 3-form H satisfies the condition
    Pi = BivectorField.from_entries(3, {(0, 1): 1})
    H = FormField(3, 3, {(0, 1, 2): f})
    spec = build_twisted_poisson(Pi, H, kernel_frame=[[0], [0], [1]], kernel_projection=[[0, 0, 1]])
    assert check_axioms(spec).passed and check_dj_zero(spec).passed


def test_nondegenerate_constant_pi_rejects_nonzero_h():
    Pi = BivectorField.from_entries(4, {(0, 1): 1, (2, 3): 1})
    with pytest.raises(SpecError, match="not twisted Poisson: morphism"):
        build_twisted_poisson(Pi, FormField(4, 3, {(0, 1, 2): "x1"}))


def test_reference_family_sign_convention():
    omega = reference_form()
    assert not cartan_d(omega).is_zero()
    Pi, H = twisted_poisson_from_form(omega)
    assert H == -cartan_d(omega)
    spec = build_twisted_poisson(Pi, H)
    assert check_axioms(spec).passed and check_dj_zero(spec).passed
    with pytest.raises(SpecError, match="morphism"):
        build_twisted_poisson(Pi, -H)
    neg = BivectorField([[-v for v in row] for row in Pi.matrix])
    assert check_axioms(build_twisted_poisson(neg, -H)).passed
    with pytest.raises(SpecError, match="morphism"):
        build_twisted_poisson(neg, H)


def test_morphism_iff_condition_on_broken_h():
    Pi, H = twisted_poisson_from_form(reference_form())
    broken = build_twisted_poisson(Pi, H + FormField(4, 3, {(0, 1, 3): 1}), validate=False)
    assert not check_axioms(broken)["morphism"].passed


def test_invertible_pi_has_vanishing_jacobiator():
    # injective anchor and rho(J) = 0 force J = 0
    Pi, H = twisted_poisson_from_form(reference_form())
    assert jacobiator_is_zero(build_twisted_poisson(Pi, H))


def test_degenerate_twisted_poisson_has_jacobiator():
    spec = gallery_specs()["degenerate_poisson"]
    J = jacobiator_tensor(spec)
    assert J[0][1][2] == (Polynomial.constant(1, 5),)
    assert check_dj_zero(spec).passed


# --- twisted actions --------------------------------------------------------


def test_untwisted_action_is_lie():
    spec = build_twisted_action((2, {(0, 1): [1, 0]}), [[1], ["x1"]])
    assert check_axioms(spec).passed and jacobiator_is_zero(spec)


def test_kernel_twist():
    spec = gallery_specs()["kernel_twist"]
    assert check_axioms(spec).passed and check_dj_zero(spec).passed
    assert spec.structure[0][1][2] == Polynomial.variable(0, 2)


def test_twist_on_kernel_vector_rejected():
    # the twist k(e1, e2) = x1 e2 does not vanish when e2 spans ker rho
    with pytest.raises(TwistError, match="does not vanish on the kernel"):
        build_twisted_action(
            (2, {}), [[1], [0]], {(0, 1): [0, "x1"]},
            kernel_frame=[[0], [1]], kernel_projection=[[0, 1]],
        )


def test_anchor_compatibility_enforced():
    # abelian g acting by d/dx1, x1 d/dx1 is not an action; no twist repairs it here
    with pytest.raises(TwistError, match="anchor compatibility"):
        build_twisted_action((2, {}), [[1], ["x1"]])


def test_twist_needs_lie_algebra():
    with pytest.raises(NotALieAlgebraError):
        build_twisted_action(named_algebra("triple"), [[0], [0], [0]])


# --- algebras ---------------------------------------------------------------


def test_random_algebra_is_deterministic():
    a = gallery.random_almost_lie_algebra(4, 7)
    b = gallery.random_almost_lie_algebra(4, random.Random(7))
    assert a == b
    for row in a.structure:
        for vec in row:
            for v in vec:
                assert -2 <= v.constant_value() <= 2


def test_unknown_algebra():
    with pytest.raises(SpecError):
        named_algebra("e8")
