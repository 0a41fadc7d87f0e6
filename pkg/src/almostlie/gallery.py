"""Constructors for standard almost Lie algebroids.

Besides the builders this module carries a small Cartan calculus on
polynomial differential forms, used to evaluate the twisted Poisson bracket
on ``T*M``.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Mapping, Sequence

from .algebroid import AlgebroidSpec, SpecError, anchor_of, check_axioms, jacobiator_tensor
from .scalars import Derivation, Polynomial, VariableCountError, derivation_commutator

__all__ = [
    "FormField",
    "BivectorField",
    "cartan_d",
    "cartan_contract",
    "cartan_lie",
    "form_wedge",
    "build_almost_lie_algebra",
    "build_tangent_model",
    "build_product_model",
    "build_b_twist",
    "build_twisted_poisson",
    "build_twisted_action",
    "twisted_poisson_from_form",
    "named_algebra",
    "random_almost_lie_algebra",
    "NotALieAlgebraError",
    "TwistError",
]


class NotALieAlgebraError(SpecError):
    pass


class TwistError(SpecError):
    pass


# ---------------------------------------------------------------------------
# forms and bivectors


def _sort_sign(idx: Sequence[int]):
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return tuple(sorted(idx)), sign


class FormField:
    """Polynomial differential ``degree``-form on ``Q^m``.

    ``coeffs`` maps increasing index tuples ``(i1<...<ik)`` to the
    coefficient of ``dx^{i1} ^ ... ^ dx^{ik}``.  Non-increasing keys are
    accepted and normalized with the permutation sign.
    """

    __slots__ = ("nvars", "degree", "coeffs")

    def __init__(self, nvars: int, degree: int, coeffs: Mapping | None = None):
        self.nvars = nvars
        self.degree = degree
        clean: dict = {}
        for key, f in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree or any(not 0 <= i < nvars for i in key):
                raise ValueError(f"bad form index {key}")
            skey, sign = _sort_sign(key)
            if skey is None:
                continue
            f = Polynomial.coerce(f, nvars)
            v = clean.get(skey, Polynomial.zero(nvars)) + (f if sign > 0 else -f)
            if v:
                clean[skey] = v
            else:
                clean.pop(skey, None)
        self.coeffs = clean

    def __call__(self, *vectors: Derivation) -> Polynomial:
        """Evaluate on vector fields (determinant convention)."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        total = Polynomial.zero(self.nvars)
        for key, f in self.coeffs.items():
            for perm in itertools.permutations(range(self.degree)):
                _, sign = _sort_sign(perm)
                prod = f if sign > 0 else -f
                for slot, j in enumerate(perm):
                    prod = prod * vectors[slot].components[key[j]]
                    if not prod:
                        break
                total = total + prod
        return total

    def __add__(self, other: "FormField") -> "FormField":
        self._same(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Polynomial.zero(self.nvars)) + v
        return FormField(self.nvars, self.degree, out)

    def __neg__(self):
        return FormField(self.nvars, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        return FormField(self.nvars, self.degree, {k: f * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def _same(self, other):
        if self.nvars != other.nvars or self.degree != other.degree:
            raise VariableCountError("forms of different type")

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, FormField):
            return NotImplemented
        return (self.nvars, self.degree, self.coeffs) == (other.nvars, other.degree, other.coeffs)

    __hash__ = None

    def __repr__(self):
        parts = [
            f"({f})" + "".join(f" dx{i + 1}" for i in k) for k, f in sorted(self.coeffs.items())
        ]
        return f"FormField({self.degree}: " + (" + ".join(parts) or "0") + ")"

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence]) -> "FormField":
        """2-form with ``omega(d_i, d_j) = matrix[i][j]`` (must be antisymmetric)."""
        m = len(matrix)
        coeffs = {}
        for i in range(m):
            for j in range(m):
                a = Polynomial.coerce(matrix[i][j], m)
                if a + Polynomial.coerce(matrix[j][i], m):
                    raise ValueError("matrix is not antisymmetric")
                if i < j and a:
                    coeffs[(i, j)] = a
        return cls(m, 2, coeffs)

    def matrix(self):
        if self.degree != 2:
            raise ValueError("only 2-forms have a matrix")
        zero = Polynomial.zero(self.nvars)
        out = [[zero] * self.nvars for _ in range(self.nvars)]
        for (i, j), f in self.coeffs.items():
            out[i][j] = f
            out[j][i] = -f
        return out


class BivectorField:
    """Antisymmetric matrix ``Pi^{ij}`` of polynomials."""

    __slots__ = ("nvars", "matrix")

    def __init__(self, matrix: Sequence[Sequence]):
        m = len(matrix)
        rows = [tuple(Polynomial.coerce(v, m) for v in row) for row in matrix]
        if any(len(r) != m for r in rows):
            raise ValueError("bivector matrix must be square")
        for i in range(m):
            for j in range(i, m):
                if rows[i][j] + rows[j][i]:
                    raise ValueError(f"Pi is not antisymmetric at ({i + 1},{j + 1})")
        self.nvars = m
        self.matrix = tuple(rows)

    @classmethod
    def from_entries(cls, m: int, entries: Mapping[tuple[int, int], object]) -> "BivectorField":
        """Build from upper entries ``{(i, j): Pi^{ij}}`` (0-based)."""
        zero = Polynomial.zero(m)
        mat = [[zero] * m for _ in range(m)]
        for (i, j), v in entries.items():
            v = Polynomial.coerce(v, m)
            mat[i][j] = v
            mat[j][i] = -v
        return cls(mat)

    def sharp(self, one_form: Sequence) -> Derivation:
        """``Pi#(alpha) = Pi^{ik} alpha_i d/dx_k``."""
        m = self.nvars
        comps = []
        for k in range(m):
            acc = Polynomial.zero(m)
            for i in range(m):
                if one_form[i] and self.matrix[i][k]:
                    acc = acc + one_form[i] * self.matrix[i][k]
            comps.append(acc)
        return Derivation(comps)

    def __call__(self, alpha: Sequence, beta: Sequence) -> Polynomial:
        """``Pi(alpha, beta) = alpha(Pi# beta)``."""
        X = self.sharp(beta)
        acc = Polynomial.zero(self.nvars)
        for i in range(self.nvars):
            acc = acc + alpha[i] * X.components[i]
        return acc


def cartan_d(w: FormField) -> FormField:
    """Exterior derivative."""
    out = {}
    for key, f in w.coeffs.items():
        for j in range(w.nvars):
            df = f.diff(j)
            if not df:
                continue
            skey, sign = _sort_sign((j,) + key)
            if skey is None:
                continue
            out[skey] = out.get(skey, Polynomial.zero(w.nvars)) + (df if sign > 0 else -df)
    return FormField(w.nvars, w.degree + 1, out)


def cartan_contract(X: Derivation, w: FormField) -> FormField:
    """Interior product ``i_X w``, inserting ``X`` in the first slot."""
    if X.nvars != w.nvars:
        raise VariableCountError("vector field and form over different bases")
    if w.degree == 0:
        raise ValueError("cannot contract a 0-form")
    out = {}
    for key, f in w.coeffs.items():
        for s, i in enumerate(key):
            xi = X.components[i]
            if not xi:
                continue
            rest = key[:s] + key[s + 1:]
            term = f * xi
            if s & 1:
                term = -term
            out[rest] = out.get(rest, Polynomial.zero(w.nvars)) + term
    return FormField(w.nvars, w.degree - 1, out)


def cartan_lie(X: Derivation, w: FormField) -> FormField:
    """Lie derivative by the Cartan formula ``L_X = i_X d + d i_X``."""
    dw = cartan_d(w)
    first = cartan_contract(X, dw)
    if w.degree == 0:
        return first
    return first + cartan_d(cartan_contract(X, w))


def form_wedge(a: FormField, b: FormField) -> FormField:
    out = {}
    for k1, f1 in a.coeffs.items():
        for k2, f2 in b.coeffs.items():
            skey, sign = _sort_sign(k1 + k2)
            if skey is None:
                continue
            v = f1 * f2
            out[skey] = out.get(skey, Polynomial.zero(a.nvars)) + (v if sign > 0 else -v)
    return FormField(a.nvars, a.degree + b.degree, out)


def _one_form(m: int, i: int) -> FormField:
    return FormField(m, 1, {(i,): 1})


def _one_form_vector(w: FormField) -> list:
    return [w.coeffs.get((k,), Polynomial.zero(w.nvars)) for k in range(w.nvars)]


# ---------------------------------------------------------------------------
# algebras


def _table_to_brackets(table) -> tuple[int, dict]:
    """Normalize a bracket table.

    Accepts either a mapping ``{(a, b): vector}`` together with an explicit
    dimension in ``table["dim"]``, a pair ``(dim, mapping)``, or a nested
    sequence ``table[a][b] = vector``.
    """
    if isinstance(table, tuple) and len(table) == 2 and isinstance(table[0], int):
        dim, mapping = table
        return dim, dict(mapping)
    if isinstance(table, Mapping):
        raise SpecError("pass bracket mappings as (dim, mapping)")
    dim = len(table)
    mapping = {}
    for a in range(dim):
        for b in range(dim):
            vec = list(table[a][b])
            if any(vec):
                mapping[(a, b)] = vec
    return dim, mapping


def build_almost_lie_algebra(table) -> AlgebroidSpec:
    """Almost Lie algebra (base a point) from a bracket table."""
    dim, mapping = _table_to_brackets(table)
    return AlgebroidSpec.build(0, dim, brackets=mapping)


def _require_lie(dim: int, mapping: dict) -> AlgebroidSpec:
    g = AlgebroidSpec.build(0, dim, brackets=mapping)
    report = check_axioms(g)
    if not report["skew"].passed:
        raise NotALieAlgebraError("not a Lie algebra: bracket table is not skew")
    J = jacobiator_tensor(g)
    for a, b, c in itertools.combinations(range(dim), 3):
        if any(J[a][b][c]):
            raise NotALieAlgebraError(
                f"not a Lie algebra: Jacobi fails on (e{a + 1},e{b + 1},e{c + 1})"
            )
    return g


def named_algebra(name: str):
    """Bracket table ``(dim, mapping)`` for a few standard algebras.

    ``abelian:k``, ``so3``, ``sl2``, ``heisenberg`` are Lie algebras;
    ``triple`` is the almost Lie algebra ``[e1,e2]=e1, [e2,e3]=e2,
    [e3,e1]=e3`` whose Jacobiator is ``e1+e2+e3``.
    """
    if name.startswith("abelian"):
        k = int(name.split(":")[1]) if ":" in name else 1
        return k, {}
    tables = {
        "so3": (3, {(0, 1): [0, 0, 1], (1, 2): [1, 0, 0], (2, 0): [0, 1, 0]}),
        # basis h, e, f
        "sl2": (3, {(0, 1): [0, 2, 0], (0, 2): [0, 0, -2], (1, 2): [1, 0, 0]}),
        "heisenberg": (3, {(0, 1): [0, 0, 1]}),
        "triple": (3, {(0, 1): [1, 0, 0], (1, 2): [0, 1, 0], (2, 0): [0, 0, 1]}),
    }
    try:
        return tables[name]
    except KeyError:
        raise SpecError(f"unknown algebra {name!r}") from None


def random_almost_lie_algebra(dim: int, rng: random.Random | int) -> AlgebroidSpec:
    """Random skew bracket on ``Q^dim`` with entries in ``[-2, 2]``.

    Entries are ``p/q`` with ``q`` in ``{1, 2, 3}``; about a third are zero.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    mapping = {}
    for a, b in itertools.combinations(range(dim), 2):
        vec = []
        for _ in range(dim):
            if rng.random() < 1 / 3:
                vec.append(0)
            else:
                q = rng.randint(1, 3)
                vec.append(Fraction(rng.randint(-2 * q, 2 * q), q))
        mapping[(a, b)] = vec
    return AlgebroidSpec.build(0, dim, brackets=mapping)


# ---------------------------------------------------------------------------
# algebroids


def build_tangent_model(m: int) -> AlgebroidSpec:
    """``A = TM`` with identity anchor and the coordinate frame."""
    if m < 1:
        raise SpecError("tangent model needs m >= 1")
    anchor = [[int(i == a) for i in range(m)] for a in range(m)]
    return AlgebroidSpec.build(m, m, anchor=anchor)


def build_product_model(m: int, lie_table) -> AlgebroidSpec:
    """``A = TM x g``: frame ``d/dx_1..d/dx_m`` followed by a basis of ``g``.

    The kernel frame is the ``g`` block.  With ``m == 0`` this is ``g`` itself.
    """
    k, mapping = _table_to_brackets(lie_table)
    _require_lie(k, mapping)
    n = m + k
    anchor = [[int(i == a) for i in range(m)] for a in range(n)]
    brackets = {}
    for (a, b), vec in mapping.items():
        brackets[(m + a, m + b)] = [0] * m + list(vec)
    frame = [[int(a == m + B) for B in range(k)] for a in range(n)]
    proj = [[int(a == m + B) for a in range(n)] for B in range(k)]
    return AlgebroidSpec.build(m, n, anchor=anchor, brackets=brackets, kernel_frame=frame,
                               kernel_projection=proj)


def _is_lie(spec: AlgebroidSpec) -> bool:
    J = jacobiator_tensor(spec)
    return not any(any(v) for block in J for row in block for v in row)


def build_b_twist(spec: AlgebroidSpec, B: Mapping[tuple[int, int], Sequence], in_ambient: bool = False):
    """Twist the bracket by a kernel-valued 2-form: ``[.,.]_B = [.,.] + B``.

    ``B`` maps ``(a, b)`` to kernel-frame components (length ``kernel_rank``),
    or with ``in_ambient=True`` to ``A``-vectors that must lie in the span of
    the kernel frame.  Entries for ``(b, a)`` follow by skew-symmetry.
    """
    check_axioms(spec).raise_if_failed()
    if not _is_lie(spec):
        raise SpecError("b-twist needs a Lie algebroid to start from")
    m, n, r = spec.base_dim, spec.rank, spec.kernel_rank
    full: dict = {}
    for (a, b), vec in B.items():
        vec = [Polynomial.coerce(v, m) for v in vec]
        if in_ambient:
            sec = spec.section(vec)
            if not spec.in_kernel_span(sec):
                raise SpecError(f"B not kernel-valued at ({a + 1},{b + 1})")
            vec = list(spec.project(sec).coeffs)
        elif len(vec) != r:
            raise SpecError(
                f"B not kernel-valued: ({a + 1},{b + 1}) has {len(vec)} components, "
                f"kernel rank is {r}"
            )
        if a == b and any(vec):
            raise SpecError("B must be skew")
        if (b, a) in full and full[(b, a)] != [-v for v in vec]:
            raise SpecError(f"B is not skew at ({a + 1},{b + 1})")
        full[(a, b)] = vec
        full.setdefault((b, a), [-v for v in vec])
    struct = [[list(spec.structure[a][b]) for b in range(n)] for a in range(n)]
    for (a, b), vec in full.items():
        for c in range(n):
            add = Polynomial.zero(m)
            for Bi in range(r):
                if vec[Bi] and spec.kernel_frame[c][Bi]:
                    add = add + spec.kernel_frame[c][Bi] * vec[Bi]
            struct[a][b][c] = struct[a][b][c] + add
    return AlgebroidSpec(m, n, spec.anchor, struct, r, spec.kernel_frame, spec.kernel_projection)


def _poly_det(mat, nvars: int) -> Polynomial:
    m = len(mat)
    total = Polynomial.zero(nvars)
    for perm in itertools.permutations(range(m)):
        _, sign = _sort_sign(perm)
        prod = Polynomial.constant(sign, nvars)
        for i, j in enumerate(perm):
            prod = prod * mat[i][j]
            if not prod:
                break
        total = total + prod
    return total


def build_twisted_poisson(
    Pi: BivectorField,
    H: FormField | None = None,
    kernel_frame=None,
    kernel_projection=None,
    validate: bool = True,
) -> AlgebroidSpec:
    """Almost Lie algebroid on ``T*M`` from a twisted Poisson pair ``(Pi, H)``.

    Frame ``dx^1..dx^m``; anchor ``rho(dx^i) = Pi^{ik} d/dx_k``; bracket

        [a, b] = L_{Pi# a} b - L_{Pi# b} a + d(Pi(a, b)) + H(Pi# a, Pi# b, .)

    with ``Pi(a, b) = a(Pi# b)``.  Under these conventions the pair built by
    :func:`twisted_poisson_from_form` passes the morphism axiom.  A degenerate
    ``Pi`` needs a kernel frame for ``ker Pi#``; an invertible one (constant
    nonzero determinant) gets kernel rank 0.  ``validate=False`` skips the
    axiom check, for producing counterexample files.
    """
    m = Pi.nvars
    if H is None:
        H = FormField(m, 3)
    if H.nvars != m or H.degree != 3:
        raise SpecError("H must be a 3-form on the same base")
    sharp = [Pi.sharp(_one_form_vector(_one_form(m, i))) for i in range(m)]
    anchor = [list(X.components) for X in sharp]
    brackets = {}
    for i, j in itertools.combinations(range(m), 2):
        a, b = _one_form(m, i), _one_form(m, j)
        pij = Pi(_one_form_vector(a), _one_form_vector(b))
        w = cartan_lie(sharp[i], b) - cartan_lie(sharp[j], a) + cartan_d(FormField(m, 0, {(): pij}))
        hterm = cartan_contract(sharp[j], cartan_contract(sharp[i], H))
        w = w + hterm
        vec = _one_form_vector(w)
        if any(vec):
            brackets[(i, j)] = vec
    if kernel_frame is None and kernel_projection is None:
        det = _poly_det(Pi.matrix, m)
        if not (det.is_constant() and det.constant_value() != 0):
            raise SpecError("Pi is degenerate: supply a kernel frame for ker Pi#")
        kernel_frame, kernel_projection = [[] for _ in range(m)], []
    spec = AlgebroidSpec.build(
        m, m, anchor=anchor, brackets=brackets, kernel_frame=kernel_frame,
        kernel_projection=kernel_projection,
    )
    report = check_axioms(spec)
    if validate and not report.passed:
        raise SpecError(
            "not twisted Poisson: "
            + "; ".join(f"{r.name}: {r.detail}" for r in report.failures())
        )
    return spec


def twisted_poisson_from_form(omega: FormField) -> tuple[BivectorField, FormField]:
    """``(Pi, H)`` for a nondegenerate 2-form ``omega`` with polynomial inverse.

    ``Pi`` is the inverse matrix of ``omega`` (``Pi^{ik} omega_kj = delta^i_j``,
    so ``Pi#`` inverts ``X -> omega(X, .)``) and ``H = -d omega``.  This is the
    pairing :func:`build_twisted_poisson` accepts; ``H = +d omega`` fails the
    morphism axiom unless ``omega`` is closed.
    """
    W = omega.matrix()
    inv = _poly_inverse(W)
    return BivectorField(inv), -cartan_d(omega)


def _poly_inverse(W):
    m = len(W)
    det = _poly_det(W, m)
    if not (det.is_constant() and det.constant_value() != 0):
        raise SpecError("matrix is not invertible over the polynomial ring")
    dinv = 1 / det.constant_value()
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            minor = [[W[r][c] for c in range(m) if c != i] for r in range(m) if r != j]
            cof = _poly_det(minor, m)
            row.append(cof.scale(dinv if (i + j) % 2 == 0 else -dinv))
        out.append(row)
    return out


def build_twisted_action(
    lie_table,
    anchor: Sequence[Sequence],
    twist: Mapping[tuple[int, int], Sequence] | None = None,
    kernel_frame=None,
    kernel_projection=None,
) -> AlgebroidSpec:
    """Almost Lie algebroid ``M x g`` from a twisted action ``(rho, k)``.

    ``anchor[a][i]`` is the ``d/dx_i`` component of ``rho(e_a)``;
    ``twist[(a, b)]`` is ``k(e_a, e_b)`` in the basis of ``g``.  Both defining
    conditions are verified: the twist must vanish when one argument is a
    kernel frame vector, and
    ``rho([e1,e2]_g) = [rho e1, rho e2] - rho(k(e1, e2))`` on the frame.
    """
    k, mapping = _table_to_brackets(lie_table)
    g = _require_lie(k, mapping)
    anchor = [list(row) for row in anchor]
    if len(anchor) != k:
        raise SpecError(f"anchor needs one row per basis vector of g ({k})")
    m = len(anchor[0]) if anchor else 0
    zero = Polynomial.zero(m)
    twist = dict(twist or {})
    plain: dict = {}
    kvals: dict = {}
    for a, b in itertools.combinations(range(k), 2):
        plain[(a, b)] = [Polynomial.constant(c.constant_value(), m) for c in g.structure[a][b]]
        if (a, b) in twist:
            tw = [Polynomial.coerce(v, m) for v in twist[(a, b)]]
        elif (b, a) in twist:
            tw = [-Polynomial.coerce(v, m) for v in twist[(b, a)]]
        else:
            tw = [zero] * k
        if len(tw) != k:
            raise SpecError(f"twist ({a + 1},{b + 1}) must have {k} components")
        kvals[(a, b)] = tw
    if kernel_frame is None and kernel_projection is None and m:
        kernel_frame, kernel_projection = [[] for _ in range(k)], []
    brackets = {key: [x + y for x, y in zip(plain[key], kvals[key])] for key in plain}
    spec = AlgebroidSpec.build(m, k, anchor=anchor, brackets=brackets,
                               kernel_frame=kernel_frame, kernel_projection=kernel_projection)
    _check_twist_conditions(spec, plain, kvals)
    report = check_axioms(spec)
    if not report.passed:
        raise TwistError(
            "twisted action does not give an almost Lie algebroid: "
            + "; ".join(f"{r.name}: {r.detail}" for r in report.failures())
        )
    return spec


def _check_twist_conditions(spec: AlgebroidSpec, plain: dict, kvals: dict):
    k, m = spec.rank, spec.base_dim
    zero = Polynomial.zero(m)

    def kval(a, b):
        if a == b:
            return [zero] * k
        if a < b:
            return kvals[(a, b)]
        return [-v for v in kvals[(b, a)]]

    for B in range(spec.kernel_rank):
        for b in range(k):
            acc = [zero] * k
            for a in range(k):
                t = spec.kernel_frame[a][B]
                if t:
                    acc = [x + t * y for x, y in zip(acc, kval(a, b))]
            if any(acc):
                raise TwistError(
                    f"twist does not vanish on the kernel: k(t e{B + 1}, e{b + 1}) = "
                    f"{[str(x) for x in acc]}"
                )
    # on constant frame sections the induced bracket is the pointwise g-bracket
    rho = [anchor_of(spec, spec.frame_section(a)) for a in range(k)]
    for (a, b), vec in plain.items():
        lhs = anchor_of(spec, spec.section(vec))
        rhs = derivation_commutator(rho[a], rho[b]) - anchor_of(spec, spec.section(kvals[(a, b)]))
        if lhs != rhs:
            diff = lhs - rhs
            i = next(i for i, c in enumerate(diff.components) if c)
            raise TwistError(
                f"twist violates the anchor compatibility condition at (e{a + 1},e{b + 1}): "
                f"d/dx{i + 1} component off by {diff.components[i]}"
            )
