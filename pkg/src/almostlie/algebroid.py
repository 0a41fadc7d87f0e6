"""Almost Lie algebroids on a free module with a chosen frame.

An :class:`AlgebroidSpec` stores everything in a frame ``e_1..e_n`` of ``A``
over ``Q[x1..xm]``:

* ``anchor[a][i]``          -- component ``rho^i_a`` of ``rho(e_a)``
* ``structure[a][b][c]``    -- ``C^c_ab`` with ``[e_a, e_b] = C^c_ab e_c``
* ``kernel_frame[a][B]``    -- ``t^a_B``, the embedding ``F -> A`` of the kernel
* ``kernel_projection[B][a]`` -- ``s^B_a``, a left inverse of ``t``

All indices are 0-based in the Python API.  ``base_dim == 0`` is the almost
Lie algebra case: the anchor is empty and the kernel frame is the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .scalars import Derivation, Polynomial, derivation_commutator

__all__ = [
    "AlgebroidSpec",
    "Section",
    "AxiomResult",
    "AxiomReport",
    "SpecError",
    "KernelEscapeError",
    "bracket",
    "anchor_of",
    "check_axioms",
    "jacobiator",
    "jacobiator_tensor",
    "connection",
    "connection_coefficients",
    "frame_connection",
    "permute_frame",
]


class SpecError(ValueError):
    """Malformed or inconsistent algebroid data."""


class KernelEscapeError(SpecError):
    """A quantity that must lie in the span of the kernel frame does not."""


def _poly_matrix(rows, nrows: int, ncols: int, nvars: int, what: str):
    rows = list(rows)
    if len(rows) != nrows:
        raise SpecError(f"{what}: expected {nrows} rows, got {len(rows)}")
    out = []
    for r in rows:
        r = list(r)
        if len(r) != ncols:
            raise SpecError(f"{what}: expected {ncols} columns, got {len(r)}")
        out.append(tuple(Polynomial.coerce(v, nvars) for v in r))
    return tuple(out)


@dataclass(frozen=True)
class AlgebroidSpec:
    base_dim: int
    rank: int
    anchor: tuple
    structure: tuple
    kernel_rank: int
    kernel_frame: tuple
    kernel_projection: tuple

    def __post_init__(self):
        m, n, r = self.base_dim, self.rank, self.kernel_rank
        if m < 0 or n < 0 or r < 0:
            raise SpecError("dimensions must be non-negative")
        if r > n:
            raise SpecError("kernel rank exceeds rank")
        set_ = object.__setattr__
        set_(self, "anchor", _poly_matrix(self.anchor, n, m, m, "anchor"))
        struct = list(self.structure)
        if len(struct) != n:
            raise SpecError(f"structure: expected {n} rows, got {len(struct)}")
        set_(
            self,
            "structure",
            tuple(_poly_matrix(block, n, n, m, f"structure[{a}]") for a, block in enumerate(struct)),
        )
        set_(self, "kernel_frame", _poly_matrix(self.kernel_frame, n, r, m, "kernel_frame"))
        set_(
            self,
            "kernel_projection",
            _poly_matrix(self.kernel_projection, r, n, m, "kernel_projection"),
        )

    @classmethod
    def build(
        cls,
        base_dim: int,
        rank: int,
        anchor=None,
        brackets: Mapping[tuple[int, int], Sequence] | None = None,
        kernel_frame=None,
        kernel_projection=None,
    ) -> "AlgebroidSpec":
        """Convenience constructor.

        ``brackets`` maps ``(a, b)`` to the coefficient vector of ``[e_a, e_b]``;
        the entry for ``(b, a)`` is filled in by skew-symmetry unless given.
        Omitted kernel data defaults to the identity when ``base_dim == 0``
        and to a zero-rank kernel otherwise.
        """
        m, n = base_dim, rank
        zero = Polynomial.zero(m)
        if anchor is None:
            anchor = [[zero] * m for _ in range(n)]
        struct = [[[zero] * n for _ in range(n)] for _ in range(n)]
        brackets = dict(brackets or {})
        for (a, b), vec in brackets.items():
            vec = [Polynomial.coerce(v, m) for v in vec]
            if len(vec) != n:
                raise SpecError(f"bracket ({a},{b}) has {len(vec)} components, expected {n}")
            struct[a][b] = vec
            if (b, a) not in brackets and a != b:
                struct[b][a] = [-v for v in vec]
        if kernel_frame is None and kernel_projection is None:
            if m == 0:
                ident = [[int(i == j) for j in range(n)] for i in range(n)]
                kernel_frame, kernel_projection = ident, ident
            else:
                kernel_frame, kernel_projection = [[] for _ in range(n)], []
        elif kernel_frame is None or kernel_projection is None:
            raise SpecError("kernel frame and projection must be given together")
        r = len(kernel_projection)
        return cls(m, n, anchor, struct, r, kernel_frame, kernel_projection)

    # frame helpers

    def zero_section(self, ambient: str = "A") -> "Section":
        size = self.rank if ambient == "A" else self.kernel_rank
        return Section(ambient, (Polynomial.zero(self.base_dim),) * size)

    def frame_section(self, a: int) -> "Section":
        """``e_a`` as a section of ``A``."""
        return self.section([int(i == a) for i in range(self.rank)])

    def kernel_frame_section(self, B: int) -> "Section":
        """``e_B`` as a section of ``F``."""
        return self.section([int(i == B) for i in range(self.kernel_rank)], ambient="F")

    def section(self, coeffs: Iterable, ambient: str = "A") -> "Section":
        coeffs = tuple(Polynomial.coerce(c, self.base_dim) for c in coeffs)
        size = self.rank if ambient == "A" else self.kernel_rank
        if len(coeffs) != size:
            raise SpecError(f"section of {ambient} needs {size} coefficients, got {len(coeffs)}")
        return Section(ambient, coeffs)

    def embed(self, v: "Section") -> "Section":
        """``t(v)`` for ``v`` in ``F``."""
        _expect(v, "F", self.kernel_rank)
        zero = Polynomial.zero(self.base_dim)
        out = []
        for a in range(self.rank):
            acc = zero
            for B, vB in enumerate(v.coeffs):
                if vB and self.kernel_frame[a][B]:
                    acc = acc + self.kernel_frame[a][B] * vB
            out.append(acc)
        return Section("A", tuple(out))

    def project(self, phi: "Section") -> "Section":
        """``s(phi)`` for ``phi`` in ``A``."""
        _expect(phi, "A", self.rank)
        zero = Polynomial.zero(self.base_dim)
        out = []
        for B in range(self.kernel_rank):
            acc = zero
            for a, pa in enumerate(phi.coeffs):
                if pa and self.kernel_projection[B][a]:
                    acc = acc + self.kernel_projection[B][a] * pa
            out.append(acc)
        return Section("F", tuple(out))

    def in_kernel_span(self, phi: "Section") -> bool:
        return self.embed(self.project(phi)) == phi

    def is_constant(self) -> bool:
        """True when every structure function is a constant polynomial."""
        blocks = [self.anchor, self.kernel_frame, self.kernel_projection, *self.structure]
        return all(p.is_constant() for block in blocks for row in block for p in row)

    def summary(self) -> str:
        return f"m={self.base_dim} n={self.rank} r={self.kernel_rank}"


@dataclass(frozen=True)
class Section:
    """Coefficient vector of a section of ``A`` or of the kernel ``F``."""

    ambient: str
    coeffs: tuple = field(default=())

    def __post_init__(self):
        if self.ambient not in ("A", "F"):
            raise SpecError(f"unknown ambient {self.ambient!r}")

    def _same(self, other: "Section"):
        if self.ambient != other.ambient or len(self.coeffs) != len(other.coeffs):
            raise SpecError("sections of different modules")

    def __add__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.ambient, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Section") -> "Section":
        self._same(other)
        return Section(self.ambient, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Section":
        return Section(self.ambient, tuple(-a for a in self.coeffs))

    def __mul__(self, f) -> "Section":
        return Section(self.ambient, tuple(f * a for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]


def _expect(s: Section, ambient: str, size: int):
    if s.ambient != ambient or len(s.coeffs) != size:
        raise SpecError(
            f"expected a section of {ambient} with {size} components, "
            f"got {s.ambient} with {len(s.coeffs)}"
        )


def anchor_of(spec: AlgebroidSpec, phi: Section) -> Derivation:
    """The vector field ``rho(phi) = phi^a rho^i_a d/dx_i``."""
    _expect(phi, "A", spec.rank)
    m = spec.base_dim
    comps = [Polynomial.zero(m) for _ in range(m)]
    for a, pa in enumerate(phi.coeffs):
        if not pa:
            continue
        for i, rho in enumerate(spec.anchor[a]):
            if rho:
                comps[i] = comps[i] + pa * rho
    return Derivation(comps)


def bracket(spec: AlgebroidSpec, phi: Section, psi: Section) -> Section:
    """Bracket of two sections, extended from the frame by the Leibniz rule.

    ``[phi, psi]^c = phi^a psi^b C^c_ab + rho(phi)[psi^c] - rho(psi)[phi^c]``
    """
    _expect(phi, "A", spec.rank)
    _expect(psi, "A", spec.rank)
    n = spec.rank
    out = [Polynomial.zero(spec.base_dim) for _ in range(n)]
    nz_phi = [(a, p) for a, p in enumerate(phi.coeffs) if p]
    nz_psi = [(b, p) for b, p in enumerate(psi.coeffs) if p]
    for a, pa in nz_phi:
        row = spec.structure[a]
        for b, pb in nz_psi:
            coeffs = row[b]
            f = None
            for c in range(n):
                if coeffs[c]:
                    if f is None:
                        f = pa * pb
                    out[c] = out[c] + f * coeffs[c]
    if spec.base_dim:
        X = anchor_of(spec, phi)
        Y = anchor_of(spec, psi)
        if not X.is_zero():
            for c, pc in nz_psi:
                out[c] = out[c] + X.apply(pc)
        if not Y.is_zero():
            for c, pc in nz_phi:
                out[c] = out[c] - Y.apply(pc)
    return Section("A", tuple(out))


def jacobiator(spec: AlgebroidSpec, phi: Section, psi: Section, chi: Section) -> Section:
    """``[phi,[psi,chi]] + [psi,[chi,phi]] + [chi,[phi,psi]]``."""
    return (
        bracket(spec, phi, bracket(spec, psi, chi))
        + bracket(spec, psi, bracket(spec, chi, phi))
        + bracket(spec, chi, bracket(spec, phi, psi))
    )


@dataclass(frozen=True)
class AxiomResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class AxiomReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self) -> list[AxiomResult]:
        return [r for r in self.results if not r.passed]

    def raise_if_failed(self):
        bad = self.failures()
        if bad:
            raise SpecError("; ".join(f"{r.name}: {r.detail}" for r in bad))

    def lines(self) -> list[str]:
        return [
            f"{r.name:<20} {'PASS' if r.passed else 'FAIL'}" + (f"  {r.detail}" if r.detail else "")
            for r in self.results
        ]


def _check_skew(spec: AlgebroidSpec) -> AxiomResult:
    n = spec.rank
    for a in range(n):
        for b in range(a, n):
            for c in range(n):
                s = spec.structure[a][b][c] + spec.structure[b][a][c]
                if s:
                    return AxiomResult(
                        "skew",
                        False,
                        f"C^{c + 1}_{a + 1}{b + 1} + C^{c + 1}_{b + 1}{a + 1} = {s}",
                    )
    return AxiomResult("skew", True)


def _check_morphism(spec: AlgebroidSpec) -> AxiomResult:
    n, m = spec.rank, spec.base_dim
    rho = [anchor_of(spec, spec.frame_section(a)) for a in range(n)]
    for a in range(n):
        for b in range(n):
            lhs = anchor_of(spec, spec.section(spec.structure[a][b]))
            rhs = derivation_commutator(rho[a], rho[b])
            if lhs != rhs:
                for i in range(m):
                    diff = lhs.components[i] - rhs.components[i]
                    if diff:
                        return AxiomResult(
                            "morphism",
                            False,
                            f"rho([e{a + 1},e{b + 1}]) - [rho e{a + 1}, rho e{b + 1}] "
                            f"has d/dx{i + 1} component {diff}",
                        )
    return AxiomResult("morphism", True)


def _check_anchor_kernel(spec: AlgebroidSpec) -> AxiomResult:
    for B in range(spec.kernel_rank):
        X = anchor_of(spec, spec.embed(spec.kernel_frame_section(B)))
        for i, comp in enumerate(X.components):
            if comp:
                return AxiomResult(
                    "anchor_kills_kernel", False, f"rho(t e{B + 1}) has d/dx{i + 1} component {comp}"
                )
    return AxiomResult("anchor_kills_kernel", True)


def _check_split(spec: AlgebroidSpec) -> AxiomResult:
    r = spec.kernel_rank
    for B in range(r):
        img = spec.project(spec.embed(spec.kernel_frame_section(B)))
        for C in range(r):
            if img.coeffs[C] != int(B == C):
                return AxiomResult(
                    "projection_splits", False, f"(s t)^{C + 1}_{B + 1} = {img.coeffs[C]}"
                )
    return AxiomResult("projection_splits", True)


def _check_kernel_closed(spec: AlgebroidSpec) -> AxiomResult:
    for a in range(spec.rank):
        for B in range(spec.kernel_rank):
            v = bracket(spec, spec.frame_section(a), spec.embed(spec.kernel_frame_section(B)))
            if not spec.in_kernel_span(v):
                return AxiomResult(
                    "kernel_closed", False, f"[e{a + 1}, t e{B + 1}] leaves the kernel frame"
                )
    return AxiomResult("kernel_closed", True)


def check_axioms(spec: AlgebroidSpec) -> AxiomReport:
    """Verify the almost Lie algebroid axioms on frame sections.

    Every check is an exact polynomial identity.  The Leibniz rule is not
    tested here since :func:`bracket` enforces it; it is listed for
    completeness.  ``kernel_closed`` checks that ``[e_a, t e_B]`` stays in the
    span of the kernel frame, which is what makes the kernel connection
    well defined.
    """
    results = [
        _check_skew(spec),
        AxiomResult("leibniz", True, "holds by construction of the bracket"),
        _check_morphism(spec),
        _check_anchor_kernel(spec),
        _check_split(spec),
    ]
    if results[3].passed and results[4].passed:
        results.append(_check_kernel_closed(spec))
    else:
        results.append(AxiomResult("kernel_closed", False, "skipped: kernel frame invalid"))
    return AxiomReport(tuple(results))


def _jacobiator_tensor_uncached(spec: AlgebroidSpec):
    n, r, m = spec.rank, spec.kernel_rank, spec.base_dim
    zero = Polynomial.zero(m)
    zeros = (zero,) * r
    table = [[[zeros] * n for _ in range(n)] for _ in range(n)]
    frame = [spec.frame_section(a) for a in range(n)]
    brk = [[bracket(spec, frame[a], frame[b]) for b in range(n)] for a in range(n)]
    for a, b, c in itertools.combinations(range(n), 3):
        J = (
            bracket(spec, frame[a], brk[b][c])
            + bracket(spec, frame[b], brk[c][a])
            + bracket(spec, frame[c], brk[a][b])
        )
        if J.is_zero():
            continue
        if not anchor_of(spec, J).is_zero():
            raise SpecError(f"rho(J(e{a + 1},e{b + 1},e{c + 1})) != 0; run check_axioms first")
        comps = spec.project(J)
        if spec.embed(comps) != J:
            raise KernelEscapeError(
                f"jacobiator escapes kernel frame at (e{a + 1},e{b + 1},e{c + 1})"
            )
        v = comps.coeffs
        neg = tuple(-x for x in v)
        for (i, j, k), sign in _signed_perms(a, b, c):
            table[i][j][k] = v if sign > 0 else neg
    return tuple(tuple(tuple(row) for row in block) for block in table)


def _signed_perms(a, b, c):
    return [
        ((a, b, c), 1),
        ((b, c, a), 1),
        ((c, a, b), 1),
        ((b, a, c), -1),
        ((a, c, b), -1),
        ((c, b, a), -1),
    ]


_JACOBIATOR_CACHE: dict = {}


def jacobiator_tensor(spec: AlgebroidSpec):
    """Components ``J[a][b][c][B]`` of the Jacobiator in the kernel frame.

    ``J(e_a, e_b, e_c) = J[a][b][c][B] t(e_B)``.  Computed on increasing
    triples and filled in by antisymmetry.  Raises :class:`KernelEscapeError`
    when a Jacobiator value is not in the span of the kernel frame.
    """
    try:
        return _JACOBIATOR_CACHE[spec]
    except KeyError:
        pass
    result = _jacobiator_tensor_uncached(spec)
    if len(_JACOBIATOR_CACHE) > 512:
        _JACOBIATOR_CACHE.clear()
    _JACOBIATOR_CACHE[spec] = result
    return result


def clear_jacobiator_cache() -> None:
    _JACOBIATOR_CACHE.clear()


def connection(spec: AlgebroidSpec, phi: Section, v: Section) -> Section:
    """The kernel connection: ``t(nabla_phi v) = [phi, t(v)]``."""
    w = bracket(spec, phi, spec.embed(v))
    out = spec.project(w)
    if spec.embed(out) != w:
        raise KernelEscapeError("bracket leaves kernel")
    return out


def connection_coefficients(spec: AlgebroidSpec):
    """``Gamma[a][B][C]`` with ``nabla_{e_a} e_B = Gamma[a][B][C] e_C``."""
    return tuple(
        tuple(
            connection(spec, spec.frame_section(a), spec.kernel_frame_section(B)).coeffs
            for B in range(spec.kernel_rank)
        )
        for a in range(spec.rank)
    )


def frame_connection(spec: AlgebroidSpec, phi: Section, w: Sequence) -> tuple:
    """Flat connection of a trivial bundle: ``nabla_phi (w^b e_b) = rho(phi)[w^b] e_b``.

    Only the anchor of ``spec`` is used.
    """
    X = anchor_of(spec, phi)
    return tuple(X.apply(Polynomial.coerce(c, spec.base_dim)) for c in w)


def permute_frame(spec: AlgebroidSpec, perm: Sequence[int]) -> AlgebroidSpec:
    """Relabel the frame of ``A``: new ``e_i`` is old ``e_{perm[i]}``."""
    n = spec.rank
    if sorted(perm) != list(range(n)):
        raise SpecError("perm must be a permutation of range(rank)")
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    anchor = [spec.anchor[perm[i]] for i in range(n)]
    struct = [
        [[spec.structure[perm[a]][perm[b]][perm[c]] for c in range(n)] for b in range(n)]
        for a in range(n)
    ]
    frame = [spec.kernel_frame[perm[a]] for a in range(n)]
    proj = [[row[perm[a]] for a in range(n)] for row in spec.kernel_projection]
    return AlgebroidSpec(spec.base_dim, n, anchor, struct, spec.kernel_rank, frame, proj)
