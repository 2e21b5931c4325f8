#!/usr/bin/env python3
"""
critpoly.py — exact periodicity polynomials f_c^n(a) - b in Z[c].

- Builds P_0 = a, P_{k+1} = P_k^2 + c with Python's arbitrary-precision ints,
  then subtracts b. Coefficients reach thousands of bits by n = 11.
- Squaring goes through Kronecker substitution (pack the coefficients into one
  big integer, square it, unpack); the schoolbook product is kept as the oracle.
- Small integer roots (always c = 0 for the periodicity equations) are divided
  out exactly by synthetic division.
- Text format: one header line, then one decimal coefficient per line, lowest
  order first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

Number = Union[int, Fraction]


class DeflationError(RuntimeError):
    """Exact division by a verified linear factor left a remainder."""


class PolyFormatError(ValueError):
    """A polynomial text file could not be parsed."""


@dataclass(frozen=True)
class IterationSpec:
    """Equation f_c^n(a) = b for the family f_c(z) = z^2 + c."""
    a: int
    b: int
    n: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "n"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"IterationSpec.{name} must be an int, got {value!r}")
        if self.n < 1:
            raise ValueError(f"iteration depth must be >= 1, got n={self.n}")

    @classmethod
    def periodic(cls, a: int, n: int) -> "IterationSpec":
        return cls(a=a, b=a, n=n)

    @property
    def expected_degree(self) -> int:
        return 2 ** (self.n - 1)

    @property
    def label(self) -> str:
        if self.a == self.b:
            return f"a={self.a},n={self.n}"
        return f"a={self.a},b={self.b},n={self.n}"


class IntPoly:
    """Univariate polynomial in c with exact integer coefficients.

    coeffs[k] is the coefficient of c^k. Trailing zeros are stripped, so the zero
    polynomial has an empty coefficient tuple (its degree is reported as 0).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        values = [int(x) for x in coeffs]
        while values and values[-1] == 0:
            values.pop()
        self.coeffs: tuple[int, ...] = tuple(values)

    # ---------------- basic properties ----------------

    @property
    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    @property
    def constant(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def coeff(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, IntPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if len(self.coeffs) <= 8:
            return f"IntPoly({list(self.coeffs)})"
        head = ", ".join(str(x) for x in self.coeffs[:3])
        tail = ", ".join(str(x) for x in self.coeffs[-3:])
        return f"IntPoly(degree={self.degree}, [{head}, ..., {tail}])"

    # ---------------- arithmetic ----------------

    def __add__(self, other: "IntPoly") -> "IntPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPoly(self.coeff(k) + other.coeff(k) for k in range(n))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPoly(self.coeff(k) - other.coeff(k) for k in range(n))

    def __neg__(self) -> "IntPoly":
        return IntPoly(-x for x in self.coeffs)

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        if self.is_zero or other.is_zero:
            return IntPoly(())
        if min(self.coeffs) >= 0 and min(other.coeffs) >= 0 and min(len(self), len(other)) > 16:
            return IntPoly(_kronecker_mul(self.coeffs, other.coeffs))
        return schoolbook_mul(self, other)

    def square(self) -> "IntPoly":
        return self * self

    def shift(self, k: int) -> "IntPoly":
        """Multiply by c^k (k >= 0) or drop the k lowest coefficients (k < 0)."""
        if k >= 0:
            return IntPoly((0,) * k + self.coeffs)
        return IntPoly(self.coeffs[-k:])

    @classmethod
    def constant_poly(cls, value: int) -> "IntPoly":
        return cls((value,))

    @classmethod
    def variable(cls) -> "IntPoly":
        return cls((0, 1))


def schoolbook_mul(p: IntPoly, q: IntPoly) -> IntPoly:
    """Quadratic-time product; independent of the packed multiplication path."""
    if p.is_zero or q.is_zero:
        return IntPoly(())
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p.coeffs):
        if x == 0:
            continue
        for j, y in enumerate(q.coeffs):
            out[i + j] += x * y
    return IntPoly(out)


def _kronecker_mul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    # Nonnegative coefficients only: each product coefficient must fit its slot.
    bound = max(p).bit_length() + max(q).bit_length() + min(len(p), len(q)).bit_length() + 1
    nbytes = (bound + 7) // 8
    count = len(p) + len(q) - 1
    packed_p = int.from_bytes(b"".join(x.to_bytes(nbytes, "little") for x in p), "little")
    packed_q = int.from_bytes(b"".join(x.to_bytes(nbytes, "little") for x in q), "little")
    raw = (packed_p * packed_q).to_bytes(nbytes * count, "little")
    return [int.from_bytes(raw[k * nbytes:(k + 1) * nbytes], "little") for k in range(count)]


# ---------------- periodicity polynomials ----------------

def iterate_orbit_poly(spec: IterationSpec) -> IntPoly:
    """Exact f_c^n(a) - b; degree 2^(n-1)."""
    c = IntPoly.variable()
    poly = IntPoly.constant_poly(spec.a)
    for _ in range(spec.n):
        poly = poly.square() + c
    return poly - IntPoly.constant_poly(spec.b)


def eval_exact(p: IntPoly, x: Number) -> Fraction:
    """Horner evaluation in exact rational arithmetic."""
    if isinstance(x, int):
        acc = 0
        for coeff in reversed(p.coeffs):
            acc = acc * x + coeff
        return Fraction(acc)
    x = Fraction(x)
    acc_q = Fraction(0)
    for coeff in reversed(p.coeffs):
        acc_q = acc_q * x + coeff
    return acc_q


def divide_linear(p: IntPoly, root: int) -> IntPoly:
    """Quotient of p by (c - root); raises DeflationError on a nonzero remainder."""
    if p.degree < 1:
        raise DeflationError(f"cannot divide a constant polynomial by (c - {root})")
    coeffs = p.coeffs
    quotient = [0] * (len(coeffs) - 1)
    carry = 0
    for k in range(len(coeffs) - 1, 0, -1):
        carry = coeffs[k] + root * carry
        quotient[k - 1] = carry
    remainder = coeffs[0] + root * carry
    if remainder != 0:
        raise DeflationError(f"(c - {root}) does not divide the polynomial (remainder {remainder})")
    return IntPoly(quotient)


def root_bound(p: IntPoly) -> int:
    """Fujiwara bound on |root|, rounded up to an integer."""
    d = p.degree
    if d < 1:
        return 0
    lead = abs(p.leading)
    log_lead = math.log(lead)
    best = -math.inf
    for k in range(1, d + 1):
        a = abs(p.coeffs[d - k])
        if a == 0:
            continue
        log_ratio = (math.log(a) - log_lead) / k
        if k == d:
            log_ratio -= math.log(2.0) / k
        best = max(best, log_ratio)
    if best == -math.inf:
        return 0
    return int(math.ceil(2.0 * math.exp(best))) + 1


def _integer_root_candidates(p: IntPoly) -> Iterator[int]:
    constant = abs(p.constant)
    limit = min(root_bound(p), constant)
    for r in range(1, limit + 1):
        if constant % r == 0:
            yield r
            yield -r


def deflate_integer_roots(p: IntPoly) -> tuple[IntPoly, list[int]]:
    """Divide out every integer root with multiplicity.

    Candidates are c = 0 while the constant term vanishes, then the divisors of
    the constant term inside the Fujiwara root bound. The quotient keeps degree
    >= 1, so c^2 + c deflates to c + 1 and its root -1 is left for the solver.
    """
    if p.is_zero:
        raise ValueError("cannot deflate the zero polynomial")
    removed: list[int] = []
    q = p
    while q.degree > 1 and q.constant == 0:
        q = q.shift(-1)
        removed.append(0)
    for r in list(_integer_root_candidates(q)):
        while q.degree > 1 and eval_exact(q, r) == 0:
            q = divide_linear(q, r)
            removed.append(r)
    return q, removed


def multiply_linear_factors(q: IntPoly, roots: Iterable[int]) -> IntPoly:
    """q * prod (c - r); inverse of deflate_integer_roots."""
    out = q
    for r in roots:
        out = out * IntPoly((-r, 1))
    return out


# ---------------- text format ----------------

@dataclass(frozen=True)
class PolyFile:
    """Contents of a polynomial text file."""
    poly: IntPoly
    spec: Optional[IterationSpec]
    removed: tuple[int, ...]


def format_header(poly: IntPoly, spec: Optional[IterationSpec], removed: Sequence[int]) -> str:
    parts = [f"degree={poly.degree}"]
    if spec is not None:
        parts += [f"a={spec.a}", f"b={spec.b}", f"n={spec.n}"]
    parts.append("removed=" + ",".join(str(r) for r in removed))
    return " ".join(parts)


def write_poly_text(path: Union[str, Path], poly: IntPoly, spec: Optional[IterationSpec] = None,
                    removed: Sequence[int] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_header(poly, spec, removed)]
    lines.extend(str(x) for x in (poly.coeffs or (0,)))
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_header(line: str, where: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for token in line.split():
        if "=" not in token:
            raise PolyFormatError(f"{where}: malformed header token {token!r}")
        key, value = token.split("=", 1)
        fields[key] = value
    if "degree" not in fields:
        raise PolyFormatError(f"{where}: header is missing degree=")
    return fields


def read_poly_text(path: Union[str, Path]) -> PolyFile:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise PolyFormatError(f"{path}: cannot read polynomial file: {e}") from e
    if not lines:
        raise PolyFormatError(f"{path}:1: empty polynomial file")
    header = _parse_header(lines[0], f"{path}:1")
    coeffs: list[int] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text:
            continue
        try:
            coeffs.append(int(text))
        except ValueError:
            raise PolyFormatError(f"{path}:{lineno}: not an integer coefficient: {text!r}") from None
    poly = IntPoly(coeffs)
    try:
        degree = int(header["degree"])
    except ValueError:
        raise PolyFormatError(f"{path}:1: bad degree {header['degree']!r}") from None
    if degree != poly.degree:
        raise PolyFormatError(f"{path}:1: header degree {degree} but {poly.degree} found in body")

    spec = None
    try:
        if {"a", "b", "n"} <= header.keys():
            spec = IterationSpec(a=int(header["a"]), b=int(header["b"]), n=int(header["n"]))
        removed_text = header.get("removed", "")
        removed = tuple(int(r) for r in removed_text.split(",") if r)
    except ValueError as e:
        raise PolyFormatError(f"{path}:1: bad header field: {e}") from None
    return PolyFile(poly=poly, spec=spec, removed=removed)
