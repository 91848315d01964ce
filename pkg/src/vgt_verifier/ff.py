"""
Finite field arithmetic for the VGT verifier.

This module provides exact arithmetic in a prime field F_p and in its quadratic
extension F_{p^2} = F_p[w]/(w^2 - d), where d is the smallest quadratic
non-residue mod p, together with the quadratic-residue machinery (Legendre
symbol, quadratic character, square roots) that every point count is built on.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import count
from typing import Iterator, Optional, Tuple, Union

from sympy import isprime, primefactors
from sympy.ntheory import is_quad_residue, sqrt_mod

from .errors import BadDenominator, BadParameter, DivisionByZero, FieldMismatch, NotASquare

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class PrimeModulus:
    """An odd prime p >= 3."""
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 3 or not isprime(self.p):
            raise BadParameter(f"modulus must be an odd prime, got {self.p!r}")

    def __int__(self) -> int:
        return self.p


def _as_prime(p: Union[int, PrimeModulus]) -> int:
    if isinstance(p, PrimeModulus):
        return p.p
    return PrimeModulus(p).p


@lru_cache(maxsize=1 << 16)
def _symbol(n: int, p: int) -> int:
    n %= p
    if n == 0:
        return 0
    return 1 if is_quad_residue(n, p) else -1


def legendre(n: Rational, p: Union[int, PrimeModulus]) -> int:
    """
    Legendre symbol (n/p) in {-1, 0, 1}.

    A rational n = u/v with p not dividing v is evaluated as (u*v/p).

    Raises:
        BadDenominator: if p divides the denominator of n
    """
    prime = _as_prime(p)
    if isinstance(n, Fraction):
        if n.denominator % prime == 0:
            raise BadDenominator(n, prime)
        n = n.numerator * n.denominator
    return _symbol(n % prime, prime)


@lru_cache(maxsize=None)
def find_nonresidue(p: Union[int, PrimeModulus]) -> int:
    """Smallest positive integer d with (d/p) = -1."""
    prime = _as_prime(p)
    for d in count(2):
        if _symbol(d, prime) == -1:
            return d


@dataclass(frozen=True)
class FieldSpec:
    """
    The field F_q with q = p^r, r in {1, 2}.

    For r = 2 the extension is F_p[w]/(w^2 - d) with d a non-residue.
    Elements are indexed by c0 + p*c1, which is also the canonical order
    (by (c1, c0)) used for every enumeration and report.
    """
    p: int
    r: int = 1
    d: Optional[int] = None

    def __post_init__(self):
        PrimeModulus(self.p)
        if self.r not in (1, 2):
            raise BadParameter(f"extension degree must be 1 or 2, got {self.r}")
        if self.r == 1 and self.d is not None:
            raise BadParameter("a prime field carries no non-residue")
        if self.r == 2 and (self.d is None or _symbol(self.d % self.p, self.p) != -1):
            raise BadParameter(f"{self.d} is not a non-residue mod {self.p}")

    @classmethod
    def of(cls, p: int, r: int = 1) -> "FieldSpec":
        """Build F_{p^r} with the canonical non-residue."""
        return cls(p, r, find_nonresidue(p) if r == 2 else None)

    @property
    def q(self) -> int:
        return self.p ** self.r

    @property
    def modulus(self) -> PrimeModulus:
        return PrimeModulus(self.p)

    def element(self, c0: int, c1: int = 0) -> "ExtFieldElem":
        return ExtFieldElem(c0, c1, self)

    def from_rational(self, x: Rational) -> "ExtFieldElem":
        """Image of a rational number; its denominator must be prime to p."""
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise BadDenominator(x, self.p)
        return self.element(x.numerator * pow(x.denominator, -1, self.p))

    def from_index(self, index: int) -> "ExtFieldElem":
        return self.element(index % self.p, index // self.p)

    @property
    def zero(self) -> "ExtFieldElem":
        return self.element(0)

    @property
    def one(self) -> "ExtFieldElem":
        return self.element(1)

    @property
    def omega(self) -> "ExtFieldElem":
        if self.r != 2:
            raise BadParameter("w only exists in the quadratic extension")
        return self.element(0, 1)

    def elements(self) -> Iterator["ExtFieldElem"]:
        """All elements in canonical order."""
        for index in range(self.q):
            yield self.from_index(index)

    def __str__(self) -> str:
        if self.r == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^2[w^2={self.d}]"


class ExtFieldElem:
    """
    The element c0 + c1*w of a FieldSpec.

    Coefficients are always reduced mod p; c1 is forced to 0 in a prime field.
    """

    __slots__ = ("c0", "c1", "spec")

    def __init__(self, c0: int, c1: int, spec: FieldSpec):
        p = spec.p
        self.c0 = c0 % p
        self.c1 = c1 % p if spec.r == 2 else 0
        self.spec = spec

    def _coerce(self, other) -> "ExtFieldElem":
        if isinstance(other, ExtFieldElem):
            if other.spec != self.spec:
                raise FieldMismatch(f"{self.spec} vs {other.spec}")
            return other
        if isinstance(other, int):
            return ExtFieldElem(other, 0, self.spec)
        if isinstance(other, Fraction):
            return self.spec.from_rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExtFieldElem(self.c0 + other.c0, self.c1 + other.c1, self.spec)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExtFieldElem(self.c0 - other.c0, self.c1 - other.c1, self.spec)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return ExtFieldElem(-self.c0, -self.c1, self.spec)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a0, a1, b0, b1 = self.c0, self.c1, other.c0, other.c1
        if self.spec.r == 1:
            return ExtFieldElem(a0 * b0, 0, self.spec)
        return ExtFieldElem(a0 * b0 + self.spec.d * a1 * b1, a0 * b1 + a1 * b0, self.spec)

    __rmul__ = __mul__

    def norm(self) -> int:
        """N(x) = x^(p+1) as an integer in [0, p); x itself in a prime field."""
        if self.spec.r == 1:
            return self.c0
        return (self.c0 * self.c0 - self.spec.d * self.c1 * self.c1) % self.spec.p

    def conjugate(self) -> "ExtFieldElem":
        return ExtFieldElem(self.c0, -self.c1, self.spec)

    def inverse(self) -> "ExtFieldElem":
        if self.is_zero:
            raise DivisionByZero(f"0 has no inverse in {self.spec}")
        n_inv = pow(self.norm(), -1, self.spec.p)
        if self.spec.r == 1:
            return ExtFieldElem(n_inv, 0, self.spec)
        return ExtFieldElem(self.c0 * n_inv, -self.c1 * n_inv, self.spec)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.spec.one
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    @property
    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    @property
    def index(self) -> int:
        return self.c0 + self.spec.p * self.c1

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.c1, self.c0)

    def in_prime_field(self) -> bool:
        return self.c1 == 0

    def __eq__(self, other):
        if isinstance(other, ExtFieldElem):
            return self.spec == other.spec and self.c0 == other.c0 and self.c1 == other.c1
        return NotImplemented

    def __hash__(self):
        return hash((self.c0, self.c1, self.spec))

    def __reduce__(self):
        return (ExtFieldElem, (self.c0, self.c1, self.spec))

    def __repr__(self):
        return f"ExtFieldElem({self.c0}, {self.c1}, {self.spec})"

    def __str__(self):
        if self.spec.r == 1 or self.c1 == 0:
            return str(self.c0)
        return f"{self.c0}+{self.c1}w"


def field_arith(x: ExtFieldElem, y, op: str) -> ExtFieldElem:
    """
    Apply one of add, sub, mul, div, pow.

    For pow, y is a non-negative integer exponent.
    """
    if op == "pow":
        if not isinstance(y, int) or y < 0:
            raise BadParameter(f"exponent must be a non-negative integer, got {y!r}")
        return x ** y
    if not isinstance(y, ExtFieldElem):
        raise FieldMismatch(f"operand {y!r} is not a field element")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise BadParameter(f"unknown field operation: {op}")


def quad_char(x: ExtFieldElem) -> int:
    """
    Quadratic character of F_q: 1 on non-zero squares, -1 on non-squares, 0 at 0.

    In F_{p^2} this is the Legendre symbol of the norm.
    """
    if x.spec.r == 1:
        return _symbol(x.c0, x.spec.p)
    return _symbol(x.norm(), x.spec.p)


def quad_char_by_power(x: ExtFieldElem) -> int:
    """Euler's criterion x^((q-1)/2) evaluated in the field."""
    value = x ** ((x.spec.q - 1) // 2)
    if value.is_zero:
        return 0
    return 1 if value == x.spec.one else -1


def sqrt_field(x: ExtFieldElem) -> ExtFieldElem:
    """
    A square root of x; of the two roots the one with smaller (c1, c0).

    Raises:
        NotASquare: if x is not a square in its field
    """
    spec = x.spec
    p = spec.p
    if x.is_zero:
        return spec.zero
    if quad_char(x) == -1:
        raise NotASquare(f"{x} is not a square in {spec}")

    if x.c1 == 0 and _symbol(x.c0, p) == 1:
        root = spec.element(int(sqrt_mod(x.c0, p)))
    elif x.c1 == 0:
        # c0 is a non-residue, so c0/d is a residue and sqrt(c0) = y*w
        root = spec.element(0, int(sqrt_mod(x.c0 * pow(spec.d, -1, p) % p, p)))
    else:
        s = int(sqrt_mod(x.norm(), p))
        half = pow(2, -1, p)
        root = None
        for sign in (s, -s):
            h = (x.c0 + sign) * half % p
            if h and _symbol(h, p) == 1:
                a0 = int(sqrt_mod(h, p))
                root = spec.element(a0, x.c1 * pow(2 * a0, -1, p))
                break
        if root is None or root * root != x:
            raise NotASquare(f"no square root found for {x} in {spec}")

    return min(root, -root, key=lambda y: y.sort_key)


def multiplicative_generator(spec: FieldSpec) -> ExtFieldElem:
    """Smallest element (in canonical order) generating F_q^x."""
    order = spec.q - 1
    factors = primefactors(order)
    for candidate in spec.elements():
        if candidate.is_zero:
            continue
        if all(candidate ** (order // ell) != spec.one for ell in factors):
            return candidate
    raise ArithmeticError(f"no generator found for {spec}")
