"""
Geometry of the elliptic fibration family.

Covers the rational parameter a, the two double covers
    j: z -> u = (z^2 - 1)/z      and      h: u -> t = (u^2 - 4)/(4u)
of the projective line, the fiber multiplicity profile m'(t) that weights each
t-fiber in the trace formula, and the discriminant-based classification of
singular fibers.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple, Union

from sympy import primefactors
from sympy.ntheory.primetest import is_square

from .errors import BadParameter, BadPrime, UndefinedAtZeroOrInfinity
from .ff import ExtFieldElem, FieldSpec, quad_char, sqrt_field

logger = logging.getLogger(__name__)


def is_rational_square(x: Fraction) -> bool:
    """Whether x is the square of a rational number."""
    x = Fraction(x)
    n = x.numerator * x.denominator
    return n >= 0 and is_square(n)


@dataclass(frozen=True)
class SurfaceParam:
    """
    A rational parameter a not in {1, -1}.

    The ramified support is the set of primes dividing 2(1+a)(1-a), where a
    prime divides a rational m/n when it divides m or n.
    """
    a: Fraction

    def __post_init__(self):
        value = Fraction(self.a)
        object.__setattr__(self, "a", value)
        if value in (1, -1):
            raise BadParameter(f"a must lie in Q \\ {{1, -1}}, got {value}")

    @classmethod
    def parse(cls, text: str) -> "SurfaceParam":
        """Parse "n" or "n/d"."""
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise BadParameter(f"not a rational number: {text!r}") from e
        return cls(value)

    @property
    def num(self) -> int:
        return self.a.numerator

    @property
    def den(self) -> int:
        return self.a.denominator

    @property
    def label(self) -> str:
        return f"{self.num}/{self.den}"

    @property
    def ramified_support(self) -> FrozenSet[int]:
        primes = {2}
        for n in (self.den + self.num, self.den - self.num, self.den):
            primes.update(primefactors(abs(n)))
        return frozenset(primes)

    @property
    def two_1plus_a(self) -> Fraction:
        return 2 * (1 + self.a)

    @property
    def two_1minus_a(self) -> Fraction:
        return 2 * (1 - self.a)

    @property
    def one_minus_a_sq(self) -> Fraction:
        return 1 - self.a * self.a

    @property
    def square_classes(self) -> Dict[str, Tuple[Fraction, bool]]:
        return {
            "two_1plus_a": (self.two_1plus_a, is_rational_square(self.two_1plus_a)),
            "two_1minus_a": (self.two_1minus_a, is_rational_square(self.two_1minus_a)),
            "one_minus_a_sq": (self.one_minus_a_sq, is_rational_square(self.one_minus_a_sq)),
        }

    def bad_factor(self, p: int) -> Optional[str]:
        """Name the factor p divides, or None when p is a good prime."""
        if p == 2:
            return "2"
        if self.den % p == 0:
            return "den(a)"
        if (self.den + self.num) % p == 0 or (self.den - self.num) % p == 0:
            return "1-a^2"
        return None

    def is_good_prime(self, p: int) -> bool:
        return self.bad_factor(p) is None

    def __str__(self) -> str:
        return str(self.a)


def reduce_param(a: SurfaceParam, spec: FieldSpec) -> ExtFieldElem:
    """
    Image of a in F_p inside F_q.

    Raises:
        BadPrime: when p divides 2(1+a)(1-a) or the denominator of a
    """
    factor = a.bad_factor(spec.p)
    if factor is not None:
        raise BadPrime(spec.p, factor)
    return spec.from_rational(a.a)


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^1(F_q): a finite field element, or infinity when value is None."""
    value: Optional[ExtFieldElem] = None

    @classmethod
    def infinity(cls) -> "ProjPoint":
        return cls(None)

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        if self.value is None:
            return (1, 0, 0)
        return (0,) + self.value.sort_key

    def index(self, spec: FieldSpec) -> int:
        """Position in canonical order: finite points by index, then infinity at q."""
        return spec.q if self.value is None else self.value.index

    def __neg__(self) -> "ProjPoint":
        return self if self.value is None else ProjPoint(-self.value)

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


INFINITY = ProjPoint.infinity()


def projective_line(spec: FieldSpec) -> Iterator[ProjPoint]:
    """P^1(F_q) in canonical order."""
    for x in spec.elements():
        yield ProjPoint(x)
    yield INFINITY


def _projective(num: ExtFieldElem, den: ExtFieldElem) -> ProjPoint:
    if den.is_zero:
        return INFINITY
    return ProjPoint(num / den)


def map_h(u: ProjPoint) -> ProjPoint:
    """h(u) = [u^2 - 4 : 4u], with h(0) = h(inf) = inf."""
    if u.is_infinity:
        return INFINITY
    x = u.value
    return _projective(x * x - 4, 4 * x)


def map_j(z: ProjPoint) -> ProjPoint:
    """j(z) = [z^2 - 1 : z], with j(0) = j(inf) = inf."""
    if z.is_infinity:
        return INFINITY
    x = z.value
    return _projective(x * x - 1, x)


@dataclass(frozen=True)
class MultiplicityProfile:
    """
    m'(t) = #{z in P^1(F_q) : h(j(z)) = t} - #{u in P^1(F_q) : h(u) = t}.

    values[i] is m' at the point of canonical index i (infinity at index q).
    """
    spec: FieldSpec
    values: Tuple[int, ...] = field(repr=False)

    def __getitem__(self, t: ProjPoint) -> int:
        return self.values[t.index(self.spec)]

    def point(self, index: int) -> ProjPoint:
        return INFINITY if index == self.spec.q else ProjPoint(self.spec.from_index(index))

    def items(self) -> Iterator[Tuple[ProjPoint, int]]:
        for index, m in enumerate(self.values):
            yield self.point(index), m

    def support(self) -> List[ProjPoint]:
        """Points with non-zero multiplicity, in canonical order."""
        return [self.point(i) for i, m in enumerate(self.values) if m != 0]

    def total(self) -> int:
        return sum(self.values)


def _profile_chunk(args: Tuple[FieldSpec, int, int]) -> Dict[int, int]:
    spec, start, stop = args
    counts: Counter = Counter()
    for index in range(start, stop):
        source = INFINITY if index == spec.q else ProjPoint(spec.from_index(index))
        counts[map_h(map_j(source)).index(spec)] += 1
        counts[map_h(source).index(spec)] -= 1
    return dict(counts)


@lru_cache(maxsize=32)
def _cached_profile(spec: FieldSpec, workers: int) -> MultiplicityProfile:
    size = spec.q + 1
    if workers <= 1:
        chunks = [_profile_chunk((spec, 0, size))]
    else:
        step = -(-size // workers)
        ranges = [(spec, start, min(start + step, size)) for start in range(0, size, step)]
        with Pool(processes=workers) as pool:
            chunks = pool.map(_profile_chunk, ranges)

    values = [0] * size
    for chunk in chunks:
        for index, delta in chunk.items():
            values[index] += delta
    logger.debug(f"Multiplicity profile over {spec}: {sum(1 for m in values if m)} points in support")
    return MultiplicityProfile(spec, tuple(values))


def multiplicity_profile(spec: FieldSpec, workers: int = 1) -> MultiplicityProfile:
    """
    Enumerate both covers once and return m'.

    The covers do not involve a, so the result is shared by every parameter
    over the same field.
    """
    return _cached_profile(spec, max(1, workers))


def multiplicity_closed_form(t: ProjPoint, spec: FieldSpec) -> int:
    """m'(t) from square classes: sum over rational u of (1 + chi(u^2+4)), minus (1 + chi(t^2+1))."""
    if t.is_infinity:
        return 2
    x = t.value
    w2 = x * x + 1
    chi = quad_char(w2)
    if chi == -1:
        return 0
    w = sqrt_field(w2)
    roots = {2 * x + 2 * w, 2 * x - 2 * w}
    z_count = sum(1 + quad_char(u * u + 4) for u in roots)
    return z_count - (1 + chi)


def z_discriminant_product(t: ExtFieldElem) -> ExtFieldElem:
    """
    (u1^2 + 4)(u2^2 + 4) over the two u-preimages of a finite t.

    Requires t^2 + 1 to be a square; the product always equals 64(t^2 + 1),
    so both preimages have rational z-fibers or neither does.
    """
    w = sqrt_field(t * t + 1)
    u1, u2 = 2 * t + 2 * w, 2 * t - 2 * w
    return (u1 * u1 + 4) * (u2 * u2 + 4)


class FiberClass(Enum):
    """Fiber types of E_a over P^1."""
    GENERAL = "General"
    SPECIAL_ZERO = "SpecialZero"
    SPECIAL_I = "SpecialI"
    SPECIAL_NODE = "SpecialNode"
    SPECIAL_INFINITY = "SpecialInfinity"

    @property
    def is_special(self) -> bool:
        return self is not FiberClass.GENERAL

    @property
    def is_smooth(self) -> bool:
        return self in (FiberClass.GENERAL, FiberClass.SPECIAL_INFINITY)


def discriminant(a: ExtFieldElem, t: ProjPoint) -> ExtFieldElem:
    """
    64(a+1)(t^2+1)((a-1)t^2 + (a+1)) / t^4.

    Raises:
        UndefinedAtZeroOrInfinity: for t = 0 or t = inf
    """
    if t.is_infinity or t.value.is_zero:
        raise UndefinedAtZeroOrInfinity(f"the discriminant has a pole at t={t}")
    x2 = t.value * t.value
    return 64 * (a + 1) * (x2 + 1) * ((a - 1) * x2 + (a + 1)) / (x2 * x2)


def classify_fiber(a: ExtFieldElem, t: ProjPoint) -> FiberClass:
    """Classify the fiber over t. Requires a good prime."""
    if t.is_infinity:
        return FiberClass.SPECIAL_INFINITY
    x = t.value
    x2 = x * x
    flags = [
        (FiberClass.SPECIAL_ZERO, x.is_zero),
        (FiberClass.SPECIAL_I, (x2 + 1).is_zero),
        (FiberClass.SPECIAL_NODE, ((a - 1) * x2 + (a + 1)).is_zero),
    ]
    hits = [kind for kind, hit in flags if hit]
    if len(hits) > 1:
        raise BadPrime(a.spec.p, "2(1+a)(1-a)")
    return hits[0] if hits else FiberClass.GENERAL


def node_points(a: ExtFieldElem, spec: FieldSpec) -> List[ProjPoint]:
    """Rational t with t^2 = (1+a)/(1-a), in canonical order."""
    s = (1 + a) / (1 - a)
    if quad_char(s) != 1:
        return []
    root = sqrt_field(s)
    return sorted({ProjPoint(root), ProjPoint(-root)}, key=lambda t: t.sort_key)


def singular_fibers(a: ExtFieldElem, spec: FieldSpec) -> List[Tuple[ProjPoint, FiberClass]]:
    """Every special fiber over P^1(F_q), in canonical order."""
    special = []
    for t in projective_line(spec):
        kind = classify_fiber(a, t)
        if kind.is_special:
            special.append((t, kind))
    return special
