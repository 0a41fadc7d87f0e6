"""Finite-dimensional slices of the cochain complex and their Betti numbers.

Two cases are finite-dimensional and handled exactly:

* ``base_dim == 0`` (almost Lie algebras): ``C^n`` is spanned by the
  monomials ``xi^I b^K``.
* every structure function constant: the constant-coefficient cochains form
  a subcomplex with the same monomial basis.

Anything else raises :class:`InfiniteDimensionalError`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .algebroid import AlgebroidSpec, SpecError
from .cochain import Cochain, _format_key, algebra, basis_keys

__all__ = [
    "ComplexSlice",
    "BettiRow",
    "BettiTable",
    "InfiniteDimensionalError",
    "assemble_slice",
    "exact_rank",
    "betti_table",
    "matmul",
]


class InfiniteDimensionalError(SpecError):
    pass


@dataclass(frozen=True)
class ComplexSlice:
    """Matrix of ``d: C^n -> C^{n+1}``; columns follow ``source``, rows ``target``."""

    degree: int
    source: tuple
    target: tuple
    matrix: tuple

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.target), len(self.source)

    def basis_labels(self) -> list[str]:
        return [_format_key(k) for k in self.source]


def _require_finite(spec: AlgebroidSpec):
    if spec.base_dim and not spec.is_constant():
        raise InfiniteDimensionalError(
            "infinite-dimensional piece: structure functions are not constant"
        )


def assemble_slice(spec: AlgebroidSpec, n: int) -> ComplexSlice:
    _require_finite(spec)
    d = algebra(spec).d
    source = basis_keys(spec, n)
    target = basis_keys(spec, n + 1)
    row_of = {k: i for i, k in enumerate(target)}
    rows = [[Fraction(0)] * len(source) for _ in target]
    for j, key in enumerate(source):
        img = d(Cochain.monomial(spec, key[0], key[1]))
        for k, f in img.items():
            if not f.is_constant():
                raise InfiniteDimensionalError(
                    f"d({_format_key(key)}) has non-constant coefficient {f}"
                )
            rows[row_of[k]][j] = f.constant_value()
    return ComplexSlice(n, tuple(source), tuple(target), tuple(tuple(r) for r in rows))


def exact_rank(matrix: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers; every division in the elimination is
    then exact.
    """
    rows = []
    for row in matrix:
        row = [Fraction(x) for x in row]
        den = lcm(*(x.denominator for x in row)) if row else 1
        irow = [int(x * den) for x in row]
        if any(irow):
            rows.append(irow)
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        pv = p[col]
        for i in range(rank + 1, len(rows)):
            r = rows[i]
            rc = r[col]
            rows[i] = [(pv * r[k] - rc * p[k]) // prev for k in range(ncols)]
        prev = pv
        rank += 1
        if rank == len(rows):
            break
    return rank


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    inner = len(b)
    cols = len(b[0])
    return [
        [sum(a[i][k] * b[k][j] for k in range(inner) if a[i][k]) for j in range(cols)]
        for i in range(len(a))
    ]


@dataclass(frozen=True)
class BettiRow:
    degree: int
    kernel: int
    incoming_rank: int
    betti: int


@dataclass(frozen=True)
class BettiTable:
    rows: tuple
    composite_zero: bool = True

    @property
    def betti(self) -> tuple[int, ...]:
        return tuple(r.betti for r in self.rows)

    def format_text(self) -> str:
        header = ("degree", "dim ker", "rank in", "betti")
        data = [(str(r.degree), str(r.kernel), str(r.incoming_rank), str(r.betti)) for r in self.rows]
        widths = [max(len(h), *(len(d[i]) for d in data)) if data else len(h) for i, h in enumerate(header)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(d, widths)) for d in data]
        return "\n".join(lines) + "\n"

    def format_lines(self) -> str:
        """Machine-readable ``degree kernel rank betti`` lines."""
        return "".join(f"{r.degree} {r.kernel} {r.incoming_rank} {r.betti}\n" for r in self.rows)


def betti_table(spec: AlgebroidSpec, max_degree: int) -> BettiTable:
    """Betti numbers of degrees ``0..max_degree``.

    Raises :class:`SpecError` if two consecutive assembled matrices do not
    compose to zero.
    """
    slices = [assemble_slice(spec, n) for n in range(max_degree + 1)]
    for lo, hi in zip(slices, slices[1:]):
        prod = matmul(hi.matrix, lo.matrix)
        if any(x for row in prod for x in row):
            raise SpecError(f"d o d != 0 between degrees {lo.degree} and {hi.degree + 1}")
    ranks = [exact_rank(s.matrix) for s in slices]
    rows = []
    for n, s in enumerate(slices):
        kernel = len(s.source) - ranks[n]
        incoming = ranks[n - 1] if n else 0
        rows.append(BettiRow(n, kernel, incoming, kernel - incoming))
    return BettiTable(tuple(rows))
