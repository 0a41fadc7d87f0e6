"""Exact scalars: rationals, sparse multivariate polynomials and derivations.

The coefficient ring used throughout the package is ``Q[x1, ..., xm]``.
Rationals are :class:`fractions.Fraction`; polynomials are immutable sparse
maps from exponent tuples to nonzero rationals, printed in graded
lexicographic order.

Text syntax (shared by spec files and cochain text)::

    3/2 x1^2 x2 - x1 + 4

Terms are separated by ``+`` or ``-``; a term is a product of an optional
rational coefficient and factors ``x<i>`` or ``x<i>^<e>`` (1-based indices).
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "Polynomial",
    "Derivation",
    "VariableCountError",
    "PolynomialSyntaxError",
    "as_rational",
    "parse_polynomial",
    "format_polynomial",
]


class VariableCountError(ValueError):
    """Raised when operands live over different numbers of base variables."""


class PolynomialSyntaxError(ValueError):
    pass


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class Polynomial:
    """Sparse polynomial over Q in ``nvars`` variables.

    Instances are immutable and hashable.  Zero coefficients are never stored,
    so equality is a plain comparison of the term maps.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(exps)
                if len(exps) != nvars or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent tuple {exps} for {nvars} variables")
                c = as_rational(coeff)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
            clean = {k: v for k, v in clean.items() if v}
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Polynomial":
        # terms already canonical: no zero values, correct key length
        p = object.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # construction helpers

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, value, nvars: int) -> "Polynomial":
        c = as_rational(value)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Polynomial":
        """The coordinate ``x_{index+1}`` (0-based ``index``)."""
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw(nvars, {tuple(exps): Fraction(1)})

    @classmethod
    def coerce(cls, value, nvars: int) -> "Polynomial":
        if isinstance(value, Polynomial):
            if value.nvars != nvars:
                raise VariableCountError(f"expected {nvars} variables, got {value.nvars}")
            return value
        if isinstance(value, str):
            return parse_polynomial(value, nvars)
        return cls.constant(value, nvars)

    # inspection

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        """Copy of the term map, in descending graded lexicographic order."""
        return {k: self._terms[k] for k in sorted(self._terms, key=_grlex_key, reverse=True)}

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and (0,) * self.nvars in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(k) for k in self._terms), default=-1)

    def __len__(self) -> int:
        return len(self._terms)

    # arithmetic

    def _check(self, other: "Polynomial"):
        if other.nvars != self.nvars:
            raise VariableCountError(
                f"polynomials over {self.nvars} and {other.nvars} variables"
            )

    def _lift(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Polynomial.constant(other, self.nvars)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for k, v in other._terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "Polynomial":
        c = as_rational(c)
        if not c:
            return Polynomial._raw(self.nvars, {})
        if c == 1:
            return self
        return Polynomial._raw(self.nvars, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return Polynomial._raw(self.nvars, {})
        if len(b) == 1 and len(a) > 1:
            a, b = b, a
        if self.nvars == 0:
            return Polynomial._raw(0, {(): a[()] * b[()]})
        out: dict[tuple[int, ...], Fraction] = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return Polynomial._raw(self.nvars, {k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(1, self.nvars)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def diff(self, index: int) -> "Polynomial":
        """Partial derivative with respect to ``x_{index+1}``."""
        if not 0 <= index < self.nvars:
            raise IndexError(f"variable index {index} out of range")
        out = {}
        for k, v in self._terms.items():
            e = k[index]
            if e:
                nk = k[:index] + (e - 1,) + k[index + 1:]
                out[nk] = v * e
        return Polynomial._raw(self.nvars, out)

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise VariableCountError("point has wrong dimension")
        pt = [as_rational(x) for x in point]
        total = Fraction(0)
        for k, v in self._terms.items():
            term = v
            for x, e in zip(pt, k):
                if e:
                    term *= x ** e
            total += term
        return total

    # comparison / hashing

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {format_polynomial(self)!r})"


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    """Canonical text form; ``parse_polynomial`` inverts it exactly."""
    if not p._terms:
        return "0"
    pieces = []
    for k in sorted(p._terms, key=_grlex_key, reverse=True):
        c = p._terms[k]
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(k) if e]
        mag = abs(c)
        if factors:
            body = " ".join(factors) if mag == 1 else _format_coeff(mag) + " " + " ".join(factors)
        else:
            body = _format_coeff(mag)
        if not pieces:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append(("+ " if c > 0 else "- ") + body)
    return " ".join(pieces)


_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")
_NUMBER = re.compile(r"^\d+(?:/\d+)?$")


def parse_polynomial(text: str, nvars: int) -> Polynomial:
    """Parse the text syntax described in the module docstring."""
    src = text.replace("*", " ").strip()
    if not src:
        raise PolynomialSyntaxError("empty polynomial")
    chunks = re.split(r"([+-])", src)
    terms: dict[tuple[int, ...], Fraction] = {}
    sign = 1
    pending = False
    for chunk in chunks:
        if chunk in ("+", "-"):
            if chunk == "-":
                sign = -sign
            pending = True
            continue
        body = chunk.strip()
        if not body:
            continue
        coeff = Fraction(sign)
        exps = [0] * nvars
        for tok in body.split():
            if _NUMBER.match(tok):
                num = Fraction(tok)
                if num.denominator == 0:
                    raise PolynomialSyntaxError(f"zero denominator in {tok!r}")
                coeff *= num
                continue
            m = _FACTOR.match(tok)
            if not m:
                raise PolynomialSyntaxError(f"unrecognized token {tok!r} in {text!r}")
            idx = int(m.group(1)) - 1
            if not 0 <= idx < nvars:
                raise PolynomialSyntaxError(
                    f"variable x{idx + 1} out of range for {nvars} variables"
                )
            exps[idx] += int(m.group(2)) if m.group(2) else 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff
        sign = 1
        pending = False
    if pending:
        raise PolynomialSyntaxError(f"dangling sign in {text!r}")
    return Polynomial(nvars, terms)


class Derivation:
    """Vector field ``sum_i f_i d/dx_i`` acting on ``Q[x1..xm]``."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable):
        comps = tuple(components)
        self.components: tuple[Polynomial, ...] = comps
        if comps:
            m = comps[0].nvars
            if len(comps) != m or any(c.nvars != m for c in comps):
                raise VariableCountError("derivation needs one component per variable")

    @classmethod
    def zero(cls, nvars: int) -> "Derivation":
        return cls(Polynomial.zero(nvars) for _ in range(nvars))

    @classmethod
    def coordinate(cls, index: int, nvars: int) -> "Derivation":
        return cls(Polynomial.constant(int(i == index), nvars) for i in range(nvars))

    @property
    def nvars(self) -> int:
        return len(self.components)

    def _check(self, nvars: int):
        if nvars != self.nvars:
            raise VariableCountError(
                f"derivation over {self.nvars} variables applied to {nvars}"
            )

    def apply(self, f: Polynomial) -> Polynomial:
        self._check(f.nvars)
        out = Polynomial.zero(f.nvars)
        if f.is_constant():
            return out
        for i, c in enumerate(self.components):
            if c:
                out = out + c * f.diff(i)
        return out

    __call__ = apply

    def __add__(self, other: "Derivation") -> "Derivation":
        other._check(self.nvars)
        return Derivation(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: "Derivation") -> "Derivation":
        other._check(self.nvars)
        return Derivation(a - b for a, b in zip(self.components, other.components))

    def __neg__(self):
        return Derivation(-a for a in self.components)

    def __mul__(self, f):
        """Left multiplication by a function or scalar."""
        if isinstance(f, Polynomial):
            self._check(f.nvars)
        return Derivation(f * a for a in self.components)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.components)

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        parts = [f"({c}) d/dx{i + 1}" for i, c in enumerate(self.components) if c]
        return "Derivation(" + (" + ".join(parts) or "0") + ")"


def derivation_commutator(X: Derivation, Y: Derivation) -> Derivation:
    """``[X, Y]`` with components ``X[Y_i] - Y[X_i]``."""
    if X.nvars != Y.nvars:
        raise VariableCountError("derivations over different variable counts")
    return Derivation(X.apply(y) - Y.apply(x) for x, y in zip(X.components, Y.components))


__all__.append("derivation_commutator")
