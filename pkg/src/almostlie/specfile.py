"""Text format for :class:`~almostlie.algebroid.AlgebroidSpec`.

::

    ALMOSTLIE-SPEC v1
    base_dim 1
    rank 2
    kernel_rank 1
    ANCHOR
    1 1 : 1
    STRUCTURE
    1 2 2 : x1
    KERNEL_FRAME
    2 1 : 1
    KERNEL_PROJECTION
    1 2 : 1
    END

Entries are sparse and 1-based.  ``ANCHOR`` lines are ``a i : rho^i_a``,
``KERNEL_FRAME`` lines ``a B : t^a_B``, ``KERNEL_PROJECTION`` lines
``B a : s^B_a``.  ``STRUCTURE`` lines ``a b c : C^c_ab`` with ``a < b`` also
set ``C^c_ba = -C^c_ab``; a line with ``a >= b`` is only written when the
table is not skew there, and then overrides the implied value.  Blank lines
and ``#`` comments are ignored on input.  :func:`dumps` output is canonical,
so ``dumps(loads(text)) == text`` for any text it produced.
"""

from __future__ import annotations

from pathlib import Path

from .algebroid import AlgebroidSpec, SpecError
from .scalars import Polynomial, PolynomialSyntaxError, format_polynomial, parse_polynomial

__all__ = ["dumps", "loads", "read_spec", "write_spec", "SpecFileError", "HEADER"]

HEADER = "ALMOSTLIE-SPEC v1"
_BLOCKS = ("ANCHOR", "STRUCTURE", "KERNEL_FRAME", "KERNEL_PROJECTION")


class SpecFileError(SpecError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def dumps(spec: AlgebroidSpec) -> str:
    m, n, r = spec.base_dim, spec.rank, spec.kernel_rank
    out = [HEADER, f"base_dim {m}", f"rank {n}", f"kernel_rank {r}", "ANCHOR"]
    for a in range(n):
        for i in range(m):
            if spec.anchor[a][i]:
                out.append(f"{a + 1} {i + 1} : {format_polynomial(spec.anchor[a][i])}")
    out.append("STRUCTURE")
    C = spec.structure
    for a in range(n):
        for b in range(n):
            for c in range(n):
                v = C[a][b][c]
                if a < b:
                    if v:
                        out.append(f"{a + 1} {b + 1} {c + 1} : {format_polynomial(v)}")
                elif a == b:
                    if v:
                        out.append(f"{a + 1} {b + 1} {c + 1} : {format_polynomial(v)}")
                elif v != -C[b][a][c]:
                    out.append(f"{a + 1} {b + 1} {c + 1} : {format_polynomial(v)}")
    out.append("KERNEL_FRAME")
    for a in range(n):
        for B in range(r):
            if spec.kernel_frame[a][B]:
                out.append(f"{a + 1} {B + 1} : {format_polynomial(spec.kernel_frame[a][B])}")
    out.append("KERNEL_PROJECTION")
    for B in range(r):
        for a in range(n):
            if spec.kernel_projection[B][a]:
                out.append(
                    f"{B + 1} {a + 1} : {format_polynomial(spec.kernel_projection[B][a])}"
                )
    out.append("END")
    return "\n".join(out) + "\n"


def _indices(text: str, count: int, bounds: tuple, lineno: int) -> tuple:
    parts = text.split()
    if len(parts) != count:
        raise SpecFileError(lineno, f"expected {count} indices, got {text.strip()!r}")
    try:
        idx = tuple(int(p) - 1 for p in parts)
    except ValueError:
        raise SpecFileError(lineno, f"indices must be integers: {text.strip()!r}") from None
    for i, hi in zip(idx, bounds):
        if not 0 <= i < hi:
            raise SpecFileError(lineno, f"index {i + 1} out of range 1..{hi}")
    return idx


def loads(text: str) -> AlgebroidSpec:
    lines = [
        (no, ln.split("#", 1)[0].strip()) for no, ln in enumerate(text.splitlines(), start=1)
    ]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines or lines[0][1] != HEADER:
        raise SpecFileError(lines[0][0] if lines else 1, f"expected header {HEADER!r}")
    dims = {}
    pos = 1
    for name in ("base_dim", "rank", "kernel_rank"):
        if pos >= len(lines):
            raise SpecFileError(lines[-1][0], f"missing {name}")
        no, ln = lines[pos]
        parts = ln.split()
        if len(parts) != 2 or parts[0] != name or not parts[1].isdigit():
            raise SpecFileError(no, f"expected '{name} <int>'")
        dims[name] = int(parts[1])
        pos += 1
    m, n, r = dims["base_dim"], dims["rank"], dims["kernel_rank"]
    zero = Polynomial.zero(m)
    anchor = [[zero] * m for _ in range(n)]
    frame = [[zero] * r for _ in range(n)]
    proj = [[zero] * n for _ in range(r)]
    upper: dict = {}
    explicit: dict = {}
    block = None
    seen = []
    ended = False
    for no, ln in lines[pos:]:
        if ended:
            raise SpecFileError(no, "content after END")
        if ln in _BLOCKS:
            expected = _BLOCKS[len(seen)] if len(seen) < len(_BLOCKS) else None
            if ln != expected:
                raise SpecFileError(no, f"expected block {expected}, got {ln}")
            seen.append(ln)
            block = ln
            continue
        if ln == "END":
            if len(seen) != len(_BLOCKS):
                raise SpecFileError(no, f"END before block {_BLOCKS[len(seen)]}")
            ended = True
            continue
        if block is None:
            raise SpecFileError(no, f"unexpected line {ln!r}")
        if ":" not in ln:
            raise SpecFileError(no, "expected '<indices> : <polynomial>'")
        idx_text, poly_text = ln.split(":", 1)
        try:
            value = parse_polynomial(poly_text, m)
        except PolynomialSyntaxError as exc:
            raise SpecFileError(no, str(exc)) from None
        if block == "ANCHOR":
            a, i = _indices(idx_text, 2, (n, m), no)
            anchor[a][i] = value
        elif block == "STRUCTURE":
            a, b, c = _indices(idx_text, 3, (n, n, n), no)
            key = (a, b, c)
            if key in upper or key in explicit:
                raise SpecFileError(no, f"duplicate structure entry {a + 1} {b + 1} {c + 1}")
            (upper if a < b else explicit)[key] = value
        elif block == "KERNEL_FRAME":
            a, B = _indices(idx_text, 2, (n, r), no)
            frame[a][B] = value
        else:
            B, a = _indices(idx_text, 2, (r, n), no)
            proj[B][a] = value
    if not ended:
        raise SpecFileError(lines[-1][0], "missing END")
    struct = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for (a, b, c), v in upper.items():
        struct[a][b][c] = v
        if (b, a, c) not in explicit:
            struct[b][a][c] = -v
    for (a, b, c), v in explicit.items():
        struct[a][b][c] = v
    return AlgebroidSpec(m, n, anchor, struct, r, frame, proj)


def read_spec(path) -> AlgebroidSpec:
    return loads(Path(path).read_text())


def write_spec(spec: AlgebroidSpec, path) -> None:
    Path(path).write_text(dumps(spec))
