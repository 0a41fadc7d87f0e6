"""Graded commutative cochain algebra and its derivations.

A cochain of total degree ``n`` is a finite sum of terms

    f(x) * xi^{a1} ^ ... ^ xi^{ap} * b^{B1} ... b^{Bq},   p + 2q = n,

with ``xi^a`` the dual frame of ``A`` (degree 1, anticommuting) and ``b^B``
the dual frame of the kernel ``F`` (degree 2, commuting).  A term key is the
pair ``(lam, sym)`` of a strictly increasing tuple and a weakly increasing
tuple of 0-based indices; signs from reordering are absorbed into the
coefficient.

Each operator below is a graded derivation fixed by its values on the
generators ``f``, ``xi^a`` and ``b^B``:

==========  ======  =====================================================
operator    parity  generator values
==========  ======  =====================================================
D           odd     rho^i_a d_i f xi^a;  -1/2 C^c_ab xi^a xi^b;  -Gamma^B_aC xi^a b^C
delta_hat   odd     0;  t^a_B b^B;  0
j_hat       odd     0;  0;  J^B_abc xi^a xi^b xi^c  (a<b<c)
j_tilde     even    0;  t^c_B J^B_abd xi^a xi^b xi^d  (a<b<d);  0
l_star      even    0;  0;  t^d_C J^B_dab xi^a xi^b b^C  (a<b)
==========  ======  =====================================================

and ``d = D + j_hat + delta_hat``.  ``Gamma`` are the coefficients of the
kernel connection, ``nabla_{e_a} e_C = Gamma^B_aC e_B``.  Forms pair with
frame tuples by the determinant convention,
``<xi^{a1}^...^xi^{ap}, e_{b1},...,e_{bp}> = det(delta^{ai}_{bj})``.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebroid import (
    AlgebroidSpec,
    Section,
    SpecError,
    anchor_of,
    check_axioms,
    clear_jacobiator_cache,
    connection,
    connection_coefficients,
    jacobiator_tensor,
)
from .scalars import Polynomial, format_polynomial, parse_polynomial

__all__ = [
    "Cochain",
    "CochainOperator",
    "CochainAlgebra",
    "algebra",
    "wedge",
    "d_operator",
    "delta_hat",
    "j_hat",
    "l_star",
    "j_tilde",
    "total_differential",
    "check_dj_zero",
    "q_coordinate_check",
    "random_cochain",
    "check_d_squared",
    "clear_caches",
    "basis_keys",
    "format_cochain",
    "parse_cochain",
    "evaluate",
    "CheckReport",
]

Key = tuple  # (lam, sym)
EMPTY: Key = ((), ())


# ---------------------------------------------------------------------------
# raw term-map arithmetic: dict[Key, Polynomial]


def _merge_lam(l1: tuple, l2: tuple):
    """Sorted union of two increasing tuples and the sign of the shuffle."""
    if not l1:
        return l2, 1
    if not l2:
        return l1, 1
    out = []
    sign = 1
    i = j = 0
    n1, n2 = len(l1), len(l2)
    while i < n1 and j < n2:
        x, y = l1[i], l2[j]
        if x == y:
            return None, 0
        if x < y:
            out.append(x)
            i += 1
        else:
            out.append(y)
            j += 1
            if (n1 - i) & 1:
                sign = -sign
    out.extend(l1[i:])
    out.extend(l2[j:])
    return tuple(out), sign


def _merge_sym(s1: tuple, s2: tuple) -> tuple:
    if not s1:
        return s2
    if not s2:
        return s1
    return tuple(sorted(s1 + s2))


def _mul_keys(k1: Key, k2: Key):
    lam, sign = _merge_lam(k1[0], k2[0])
    if lam is None:
        return None, 0
    return (lam, _merge_sym(k1[1], k2[1])), sign


def _add_into(acc: dict, key: Key, value: Polynomial):
    cur = acc.get(key)
    if cur is None:
        acc[key] = value
    else:
        s = cur + value
        if s:
            acc[key] = s
        else:
            del acc[key]


def _wedge_terms(t1: dict, t2: dict) -> dict:
    out: dict = {}
    for k1, f1 in t1.items():
        for k2, f2 in t2.items():
            key, sign = _mul_keys(k1, k2)
            if key is None:
                continue
            v = f1 * f2
            _add_into(out, key, v if sign > 0 else -v)
    return out


def _key_degree(key: Key) -> int:
    return len(key[0]) + 2 * len(key[1])


# ---------------------------------------------------------------------------


class Cochain:
    """Homogeneous element of the cochain algebra of ``spec``."""

    __slots__ = ("spec", "degree", "_terms")

    def __init__(self, spec: AlgebroidSpec, degree: int, terms: dict | None = None):
        self.spec = spec
        self.degree = degree
        clean = {}
        m = spec.base_dim
        for key, f in (terms or {}).items():
            lam, sym = tuple(key[0]), tuple(key[1])
            if any(not 0 <= a < spec.rank for a in lam) or any(
                not 0 <= B < spec.kernel_rank for B in sym
            ):
                raise SpecError(f"cochain key {key} out of range for {spec.summary()}")
            if len(lam) + 2 * len(sym) != degree:
                raise SpecError(f"key {key} does not have degree {degree}")
            f = Polynomial.coerce(f, m)
            order = sorted(range(len(lam)), key=lambda i: lam[i])
            slam = tuple(lam[i] for i in order)
            if len(set(slam)) != len(slam):
                continue
            sign = _perm_sign(order)
            if f:
                _add_into(clean, (slam, tuple(sorted(sym))), f if sign > 0 else -f)
        self._terms = clean

    @classmethod
    def _raw(cls, spec, degree, terms) -> "Cochain":
        c = object.__new__(cls)
        c.spec = spec
        c.degree = degree
        c._terms = terms
        return c

    @classmethod
    def zero(cls, spec, degree) -> "Cochain":
        return cls._raw(spec, degree, {})

    @classmethod
    def function(cls, spec, f) -> "Cochain":
        f = Polynomial.coerce(f, spec.base_dim)
        return cls._raw(spec, 0, {EMPTY: f} if f else {})

    @classmethod
    def xi(cls, spec, a: int) -> "Cochain":
        return cls(spec, 1, {((a,), ()): 1})

    @classmethod
    def b(cls, spec, B: int) -> "Cochain":
        return cls(spec, 2, {((), (B,)): 1})

    @classmethod
    def monomial(cls, spec, lam: Sequence[int], sym: Sequence[int] = (), coeff=1) -> "Cochain":
        return cls(spec, len(lam) + 2 * len(sym), {(tuple(lam), tuple(sym)): coeff})

    @property
    def terms(self) -> dict:
        return {k: self._terms[k] for k in sorted(self._terms, key=_key_order)}

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def _check(self, other: "Cochain", same_degree=True):
        if other.spec is not self.spec and other.spec != self.spec:
            raise SpecError("cochains over different specs")
        if same_degree and other.degree != self.degree:
            raise SpecError(f"cannot add cochains of degree {self.degree} and {other.degree}")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            _add_into(out, k, v)
        return Cochain._raw(self.spec, self.degree, out)

    def __neg__(self) -> "Cochain":
        return Cochain._raw(self.spec, self.degree, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Cochain):
            return wedge(self, other)
        f = Polynomial.coerce(other, self.spec.base_dim)
        if not f:
            return Cochain.zero(self.spec, self.degree)
        return Cochain._raw(self.spec, self.degree, {k: f * v for k, v in self._terms.items()})

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.spec == other.spec and self.degree == other.degree and self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        body = format_cochain(self).strip().replace("\n", "; ")
        return f"<Cochain {body}>"


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def _key_order(key: Key):
    # graded lexicographic: lower symmetric degree first, then lexicographic
    return (len(key[1]), key[0], key[1])


def wedge(g1: Cochain, g2: Cochain) -> Cochain:
    """Graded commutative product; the sign comes from the odd generators only."""
    g1._check(g2, same_degree=False)
    return Cochain._raw(g1.spec, g1.degree + g2.degree, _wedge_terms(g1._terms, g2._terms))


# ---------------------------------------------------------------------------
# derivations


class CochainOperator:
    """Graded derivation of the cochain algebra determined by generators.

    ``parity`` is 1 for odd derivations (sign ``(-1)^{|g|}`` when passing a
    generator ``g``) and 0 for even ones.  ``shift`` is the degree change.
    ``function_part`` maps a polynomial ``f`` to its image term map (or is
    ``None`` when the operator kills ``C^0``); ``xi_images`` and ``b_images``
    are term maps for the images of ``xi^a`` and ``b^B``.
    """

    def __init__(self, spec, name, parity, shift, xi_images, b_images, function_part=None):
        self.spec = spec
        self.name = name
        self.parity = parity
        self.shift = shift
        self.xi_images = list(xi_images)
        self.b_images = list(b_images)
        self.function_part = function_part
        self._memo: dict = {EMPTY: {}}

    def _mono(self, key: Key) -> dict:
        """Image of the coefficient-1 monomial ``key``."""
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        lam, sym = key
        if lam:
            head, rest = lam[0], (lam[1:], sym)
            img = self.xi_images[head]
            odd_sign = -1 if self.parity else 1
            hkey = ((head,), ())
        else:
            head, rest = sym[0], ((), sym[1:])
            img = self.b_images[head]
            odd_sign = 1
            hkey = ((), (head,))
        out: dict = {}
        if img:
            for k, v in img.items():
                nk, s = _mul_keys(k, rest)
                if nk is not None:
                    _add_into(out, nk, v if s > 0 else -v)
        sub = self._mono(rest)
        for k, v in sub.items():
            nk, s = _mul_keys(hkey, k)
            if nk is not None:
                s *= odd_sign
                _add_into(out, nk, v if s > 0 else -v)
        self._memo[key] = out
        return out

    def apply_terms(self, terms: dict) -> dict:
        out: dict = {}
        for key, f in terms.items():
            if self.function_part is not None and not f.is_constant():
                fimg = self.function_part(f)
                for k, v in fimg.items():
                    nk, s = _mul_keys(k, key)
                    if nk is not None:
                        _add_into(out, nk, v if s > 0 else -v)
            for k, v in self._mono(key).items():
                _add_into(out, k, f * v)
        return out

    def __call__(self, g: Cochain) -> Cochain:
        if g.spec is not self.spec and g.spec != self.spec:
            raise SpecError("cochain belongs to a different spec")
        return Cochain._raw(self.spec, g.degree + self.shift, self.apply_terms(g._terms))

    def __repr__(self):
        return f"<CochainOperator {self.name} parity={self.parity} shift={self.shift}>"


def _sum_images(*maps: dict) -> dict:
    out: dict = {}
    for m in maps:
        for k, v in m.items():
            _add_into(out, k, v)
    return out


class CochainAlgebra:
    """The operators of one spec, built lazily and memoized."""

    def __init__(self, spec: AlgebroidSpec):
        self.spec = spec
        self._ops: dict = {}
        self._validated = None

    def validate(self):
        if self._validated is None:
            report = check_axioms(self.spec)
            self._validated = report
        if not self._validated.passed:
            raise SpecError("spec not validated: " + "; ".join(
                f"{r.name}: {r.detail}" for r in self._validated.failures()
            ))

    def _get(self, name, builder):
        op = self._ops.get(name)
        if op is None:
            op = builder()
            self._ops[name] = op
        return op

    # generator tables

    def _function_part(self, f: Polynomial) -> dict:
        spec = self.spec
        out = {}
        for a in range(spec.rank):
            v = anchor_of(spec, spec.frame_section(a)).apply(f)
            if v:
                out[((a,), ())] = v
        return out

    def _D_tables(self):
        self.validate()
        spec = self.spec
        n, r = spec.rank, spec.kernel_rank
        xi_img = []
        for c in range(n):
            img = {}
            for a, b in itertools.combinations(range(n), 2):
                v = spec.structure[a][b][c]
                if v:
                    img[((a, b), ())] = -v
            xi_img.append(img)
        gamma = connection_coefficients(spec)
        b_img = []
        for B in range(r):
            img = {}
            for a in range(n):
                for C in range(r):
                    v = gamma[a][C][B]
                    if v:
                        img[((a,), (C,))] = -v
            b_img.append(img)
        return xi_img, b_img

    def _delta_tables(self):
        spec = self.spec
        xi_img = []
        for a in range(spec.rank):
            img = {}
            for B in range(spec.kernel_rank):
                v = spec.kernel_frame[a][B]
                if v:
                    img[((), (B,))] = v
            xi_img.append(img)
        return xi_img, [{} for _ in range(spec.kernel_rank)]

    def _J(self):
        self.validate()
        return jacobiator_tensor(self.spec)

    def _jhat_tables(self):
        spec = self.spec
        J = self._J()
        b_img = []
        for B in range(spec.kernel_rank):
            img = {}
            for a, b, c in itertools.combinations(range(spec.rank), 3):
                v = J[a][b][c][B]
                if v:
                    img[((a, b, c), ())] = v
            b_img.append(img)
        return [{} for _ in range(spec.rank)], b_img

    def _jtilde_tables(self):
        spec = self.spec
        J = self._J()
        zero = Polynomial.zero(spec.base_dim)
        xi_img = []
        for c in range(spec.rank):
            img = {}
            for a, b, d in itertools.combinations(range(spec.rank), 3):
                acc = zero
                for B in range(spec.kernel_rank):
                    t = spec.kernel_frame[c][B]
                    if t and J[a][b][d][B]:
                        acc = acc + t * J[a][b][d][B]
                if acc:
                    img[((a, b, d), ())] = acc
            xi_img.append(img)
        return xi_img, [{} for _ in range(spec.kernel_rank)]

    def _lstar_tables(self):
        spec = self.spec
        J = self._J()
        zero = Polynomial.zero(spec.base_dim)
        b_img = []
        for B in range(spec.kernel_rank):
            img = {}
            for C in range(spec.kernel_rank):
                for a, b in itertools.combinations(range(spec.rank), 2):
                    acc = zero
                    for d in range(spec.rank):
                        t = spec.kernel_frame[d][C]
                        if t and J[d][a][b][B]:
                            acc = acc + t * J[d][a][b][B]
                    if acc:
                        img[((a, b), (C,))] = acc
            b_img.append(img)
        return [{} for _ in range(spec.rank)], b_img

    # operators

    @property
    def D(self) -> CochainOperator:
        def build():
            xi, b = self._D_tables()
            fp = self._function_part if self.spec.base_dim else None
            return CochainOperator(self.spec, "D", 1, 1, xi, b, fp)

        return self._get("D", build)

    @property
    def delta_hat(self) -> CochainOperator:
        return self._get(
            "delta_hat", lambda: CochainOperator(self.spec, "delta_hat", 1, 1, *self._delta_tables())
        )

    @property
    def j_hat(self) -> CochainOperator:
        return self._get(
            "j_hat", lambda: CochainOperator(self.spec, "j_hat", 1, 1, *self._jhat_tables())
        )

    @property
    def j_tilde(self) -> CochainOperator:
        return self._get(
            "j_tilde", lambda: CochainOperator(self.spec, "j_tilde", 0, 2, *self._jtilde_tables())
        )

    @property
    def l_star(self) -> CochainOperator:
        return self._get(
            "l_star", lambda: CochainOperator(self.spec, "l_star", 0, 2, *self._lstar_tables())
        )

    @property
    def d(self) -> CochainOperator:
        def build():
            D, dh, jh = self.D, self.delta_hat, self.j_hat
            xi = [_sum_images(*imgs) for imgs in zip(D.xi_images, dh.xi_images, jh.xi_images)]
            b = [_sum_images(*imgs) for imgs in zip(D.b_images, dh.b_images, jh.b_images)]
            return CochainOperator(self.spec, "d", 1, 1, xi, b, D.function_part)

        return self._get("d", build)


_ALGEBRAS: dict = {}


def algebra(spec: AlgebroidSpec) -> CochainAlgebra:
    """Shared (memoized) operator set for ``spec``."""
    alg = _ALGEBRAS.get(spec)
    if alg is None:
        if len(_ALGEBRAS) > 256:
            _ALGEBRAS.clear()
        alg = _ALGEBRAS[spec] = CochainAlgebra(spec)
    return alg


def clear_caches() -> None:
    """Drop memoized operator tables and Jacobiator tensors."""
    _ALGEBRAS.clear()
    clear_jacobiator_cache()


def d_operator(g: Cochain) -> Cochain:
    """Exterior covariant derivative ``D``."""
    return algebra(g.spec).D(g)


def delta_hat(g: Cochain) -> Cochain:
    return algebra(g.spec).delta_hat(g)


def j_hat(g: Cochain) -> Cochain:
    return algebra(g.spec).j_hat(g)


def l_star(g: Cochain) -> Cochain:
    return algebra(g.spec).l_star(g)


def j_tilde(g: Cochain) -> Cochain:
    return algebra(g.spec).j_tilde(g)


def total_differential(g: Cochain) -> Cochain:
    """``d = D + j_hat + delta_hat``."""
    return algebra(g.spec).d(g)


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    mismatches: tuple = ()
    checked: int = 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.checked} checked)" if self.checked else ""
        if self.mismatches:
            extra += f"  first mismatch: {self.mismatches[0]}"
        return f"{self.name:<20} {status}{extra}"


def covariant_derivative_of_jacobiator(spec: AlgebroidSpec) -> dict:
    """Components ``DJ(e_a, e_b, e_c, e_d)`` for ``a<b<c<d`` as kernel sections.

    Uses the alternating-sum formula for F-valued forms: connection terms
    ``nabla_{e_i} J(...)`` and bracket terms ``J([e_i, e_j], ...)``, the
    latter by tensoriality ``J([e_i,e_j],..) = C^k_ij J(e_k,..)``.
    """
    J = jacobiator_tensor(spec)
    n, r, m = spec.rank, spec.kernel_rank, spec.base_dim
    zero = Polynomial.zero(m)
    out = {}
    for quad in itertools.combinations(range(n), 4):
        acc = [zero] * r
        for i in range(4):
            rest = quad[:i] + quad[i + 1:]
            v = spec.section(J[rest[0]][rest[1]][rest[2]], ambient="F")
            w = connection(spec, spec.frame_section(quad[i]), v)
            sign = -1 if i & 1 else 1
            acc = [x + y if sign > 0 else x - y for x, y in zip(acc, w.coeffs)]
        for i, j in itertools.combinations(range(4), 2):
            rest = [quad[k] for k in range(4) if k not in (i, j)]
            sign = -1 if (i + j) & 1 else 1
            C = spec.structure[quad[i]][quad[j]]
            for e in range(n):
                if not C[e]:
                    continue
                vals = J[e][rest[0]][rest[1]]
                for B in range(r):
                    if vals[B]:
                        term = C[e] * vals[B]
                        acc[B] = acc[B] + term if sign > 0 else acc[B] - term
        out[quad] = tuple(acc)
    return out


def check_dj_zero(spec: AlgebroidSpec) -> CheckReport:
    """Every almost Lie algebroid has ``DJ = 0``; a nonzero entry is a bug."""
    algebra(spec).validate()
    comps = covariant_derivative_of_jacobiator(spec)
    bad = tuple(
        f"DJ(e{q[0] + 1},e{q[1] + 1},e{q[2] + 1},e{q[3] + 1}) = {[str(x) for x in v]}"
        for q, v in comps.items()
        if any(v)
    )
    return CheckReport("dj_zero", not bad, bad, len(comps))


def coordinate_generator_images(spec: AlgebroidSpec, jacobiator_weight=Fraction(1, 6)):
    """Images of ``x^i``, ``xi^c``, ``b^C`` under the coordinate vector field Q.

    ``Q = rho^i_a xi^a d/dx^i - 1/2 C^c_ab xi^a xi^b d/dxi^c + t^a_B b^B d/dxi^a
          - Gamma^C_aB xi^a b^B d/db^C + 1/6 J^C_abc xi^a xi^b xi^c d/db^C``

    summed over all index values.  The sign of the last term is the one for
    which Q squares to zero together with the others; ``jacobiator_weight``
    replaces the 1/6 so that other choices can be tested.
    """
    n, r, m = spec.rank, spec.kernel_rank, spec.base_dim
    xi = [Cochain.xi(spec, a) for a in range(n)]
    bb = [Cochain.b(spec, B) for B in range(r)]
    half = Fraction(1, 2)
    sixth = Fraction(jacobiator_weight)
    gamma = connection_coefficients(spec)
    J = jacobiator_tensor(spec)

    x_imgs = []
    for i in range(m):
        acc = Cochain.zero(spec, 1)
        for a in range(n):
            acc = acc + xi[a] * spec.anchor[a][i]
        x_imgs.append(acc)
    xi_imgs = []
    for c in range(n):
        acc = Cochain.zero(spec, 2)
        for a in range(n):
            for b in range(n):
                C = spec.structure[a][b][c]
                if C:
                    acc = acc - wedge(xi[a], xi[b]) * (C * half)
        for B in range(r):
            acc = acc + bb[B] * spec.kernel_frame[c][B]
        xi_imgs.append(acc)
    b_imgs = []
    for C in range(r):
        acc = Cochain.zero(spec, 3)
        for a in range(n):
            for B in range(r):
                g = gamma[a][B][C]
                if g:
                    acc = acc - wedge(xi[a], bb[B]) * g
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    v = J[a][b][c][C]
                    if v:
                        acc = acc + wedge(wedge(xi[a], xi[b]), xi[c]) * (v * sixth)
        b_imgs.append(acc)
    return x_imgs, xi_imgs, b_imgs


def _apply_vector_field(spec, x_imgs, xi_imgs, b_imgs, key: Key, f: Polynomial) -> Cochain:
    """``Q(f xi^I b^K)`` via left partial derivatives in every coordinate."""
    lam, sym = key
    deg = _key_degree(key)
    mono = Cochain._raw(spec, deg, {key: Polynomial.constant(1, spec.base_dim)})
    out = Cochain.zero(spec, deg + 1)
    for i in range(spec.base_dim):
        df = f.diff(i)
        if df:
            out = out + wedge(x_imgs[i], mono) * df
    for pos, a in enumerate(lam):
        rest = Cochain._raw(
            spec, deg - 1, {(lam[:pos] + lam[pos + 1:], sym): Polynomial.constant(1, spec.base_dim)}
        )
        sign = -1 if pos & 1 else 1
        out = out + wedge(xi_imgs[a], rest) * (f * sign)
    for B in sorted(set(sym)):
        count = sym.count(B)
        rsym = list(sym)
        rsym.remove(B)
        rest = Cochain._raw(spec, deg - 2, {(lam, tuple(rsym)): Polynomial.constant(1, spec.base_dim)})
        out = out + wedge(b_imgs[B], rest) * (f * count)
    return out


def _poly_monomials(m: int, max_deg: int):
    for total in range(max_deg + 1):
        for exps in itertools.product(range(total + 1), repeat=m):
            if sum(exps) == total:
                yield exps


def basis_keys(spec: AlgebroidSpec, degree: int) -> list:
    """Monomial keys ``(lam, sym)`` of total degree ``degree``, graded lex order."""
    keys = []
    for q in range(degree // 2 + 1):
        p = degree - 2 * q
        if p > spec.rank:
            continue
        for lam in itertools.combinations(range(spec.rank), p):
            for sym in itertools.combinations_with_replacement(range(spec.kernel_rank), q):
                keys.append((lam, sym))
    keys.sort(key=_key_order)
    return keys


def q_coordinate_check(spec: AlgebroidSpec, degree_cutoff: int = 3) -> CheckReport:
    """Compare ``total_differential`` with the coordinate vector field Q.

    First on the generators, then on every monomial ``x^alpha xi^I b^K`` with
    ``|alpha| + |I| + 2|K| <= degree_cutoff``, where Q acts through partial
    derivatives rather than through the derivation tables used by ``d``.
    """
    alg = algebra(spec)
    alg.validate()
    x_imgs, xi_imgs, b_imgs = coordinate_generator_images(spec)
    m = spec.base_dim
    mismatches = []
    checked = 0
    for i in range(m):
        got = total_differential(Cochain.function(spec, Polynomial.variable(i, m)))
        checked += 1
        if got != x_imgs[i]:
            mismatches.append(f"generator x{i + 1}")
    for a in range(spec.rank):
        checked += 1
        if total_differential(Cochain.xi(spec, a)) != xi_imgs[a]:
            mismatches.append(f"generator xi({a + 1})")
    for B in range(spec.kernel_rank):
        checked += 1
        if total_differential(Cochain.b(spec, B)) != b_imgs[B]:
            mismatches.append(f"generator b({B + 1})")
    for deg in range(degree_cutoff + 1):
        for key in basis_keys(spec, deg):
            for exps in _poly_monomials(m, degree_cutoff - deg):
                f = Polynomial(m, {exps: 1})
                g = Cochain._raw(spec, deg, {key: f})
                checked += 1
                if total_differential(g) != _apply_vector_field(spec, x_imgs, xi_imgs, b_imgs, key, f):
                    mismatches.append(f"monomial {f} * {_format_key(key)}")
    return CheckReport("q_coordinate", not mismatches, tuple(mismatches), checked)


# ---------------------------------------------------------------------------
# random cochains, pairing


def random_polynomial(m: int, rng: random.Random, max_degree: int = 2, max_terms: int = 3) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * m
        for _ in range(rng.randint(0, max_degree) if m else 0):
            exps[rng.randrange(m)] += 1
        terms[tuple(exps)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return Polynomial(m, terms)


def random_cochain(
    spec: AlgebroidSpec,
    degree: int,
    rng: random.Random,
    n_terms: int = 3,
    max_poly_degree: int = 2,
) -> Cochain:
    """A random homogeneous cochain (may be zero if ``C^degree`` is)."""
    keys = basis_keys(spec, degree)
    if not keys:
        return Cochain.zero(spec, degree)
    terms: dict = {}
    for _ in range(n_terms):
        key = rng.choice(keys)
        f = random_polynomial(spec.base_dim, rng, max_poly_degree)
        if f:
            _add_into(terms, key, f)
    return Cochain._raw(spec, degree, terms)


def check_d_squared(spec: AlgebroidSpec, seed: int = 0, count: int = 25, max_degree: int = 6) -> CheckReport:
    """``d(d g) = 0`` on ``count`` random cochains of degree ``0..max_degree``."""
    d = algebra(spec).d
    rng = random.Random(seed)
    bad = []
    for i in range(count):
        g = random_cochain(spec, rng.randint(0, max_degree), rng)
        dd = d(d(g))
        if dd:
            bad.append(f"sample {i} (degree {g.degree}): {len(dd)} nonzero terms")
    return CheckReport("d_squared", not bad, tuple(bad), count)


def evaluate(g: Cochain, a_sections: Sequence[Section], f_sections: Sequence[Section] = ()) -> Polynomial:
    """Pair ``g`` with ``psi_1 ^ ... ^ psi_p`` and ``v_1 ... v_q``.

    The exterior part uses the determinant convention, the symmetric part
    the permanent of the matrix ``<b^{K_i}, v_j>``.
    """
    spec = g.spec
    p, q = len(a_sections), len(f_sections)
    zero = Polynomial.zero(spec.base_dim)
    total = zero
    for (lam, sym), f in g._terms.items():
        if len(lam) != p or len(sym) != q:
            continue
        det = zero
        for perm in itertools.permutations(range(p)):
            prod = Polynomial.constant(_perm_sign(perm), spec.base_dim)
            for i, j in enumerate(perm):
                prod = prod * a_sections[j].coeffs[lam[i]]
                if not prod:
                    break
            det = det + prod
        if not det:
            continue
        perm_sum = zero
        for perm in itertools.permutations(range(q)):
            prod = Polynomial.constant(1, spec.base_dim)
            for i, j in enumerate(perm):
                prod = prod * f_sections[j].coeffs[sym[i]]
            perm_sum = perm_sum + prod
        total = total + f * det * perm_sum
    return total


# ---------------------------------------------------------------------------
# text format


def _format_key(key: Key) -> str:
    lam, sym = key
    parts = []
    if lam:
        parts.append("^".join(f"xi({a + 1})" for a in lam))
    if sym:
        parts.append("".join(f"b({B + 1})" for B in sym))
    return " ".join(parts) if parts else "1"


def format_cochain(g: Cochain) -> str:
    """Text form: a ``degree n`` header, then ``<key> : <polynomial>`` lines."""
    lines = [f"degree {g.degree}"]
    for key in sorted(g._terms, key=_key_order):
        lines.append(f"{_format_key(key)} : {format_polynomial(g._terms[key])}")
    return "\n".join(lines) + "\n"


_KEY_TOKEN = re.compile(r"\s*(\^)?\s*(xi|b)\((\d+)\)")


def _parse_key(text: str, lineno: int):
    text = text.strip()
    if text == "1":
        return (), ()
    lam: list = []
    sym: list = []
    pos = 0
    while pos < len(text):
        mt = _KEY_TOKEN.match(text, pos)
        if not mt:
            raise SpecError(f"line {lineno}: cannot parse cochain key {text!r}")
        idx = int(mt.group(3)) - 1
        (lam if mt.group(2) == "xi" else sym).append(idx)
        pos = mt.end()
    return tuple(lam), tuple(sym)


def parse_cochain(text: str, spec: AlgebroidSpec) -> Cochain:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or not lines[0].startswith("degree"):
        raise SpecError("cochain text must start with 'degree <n>'")
    degree = int(lines[0].split()[1])
    terms: dict = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if ":" not in line:
            raise SpecError(f"line {lineno}: expected '<key> : <polynomial>'")
        k, poly = line.split(":", 1)
        key = _parse_key(k, lineno)
        if key in terms:
            raise SpecError(f"line {lineno}: duplicate key")
        terms[key] = parse_polynomial(poly, spec.base_dim)
    return Cochain(spec, degree, terms)
