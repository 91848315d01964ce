"""
Determinant sieve.

Candidate quadratic characters D for the determinant of the two-dimensional
piece of the transcendental representation are squarefree integers supported
on the bad primes of a. A class D is eliminated by a witness prime p with
(D/p) = -1 at which the computed traces force the determinant to be trivial:

    rule "B":  T(a, p) is not +p or -p
    rule "A":  T(a, p^2) is not 3p^2 mod 8

Every elimination is recorded as a certificate that can be replayed from
(a, D, p) alone.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import prod
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import factorint, primerange

from .errors import BadParameter, CertificateRejected
from .ff import FieldSpec, Rational, legendre
from .fibration import SurfaceParam, is_rational_square
from .trace import frobenius_trace

logger = logging.getLogger(__name__)

DEFAULT_PRIME_BOUND = 200
DEFAULT_RULES = ("B", "A")
RULES = frozenset(DEFAULT_RULES)

SUPPORT_ASSUMPTION = (
    "Candidates are the squarefree D supported on the primes dividing "
    "2(1+a)(1-a) and the denominator of a, with either sign; the determinant "
    "character is assumed unramified outside this set."
)
ELL_NOTE = "Traces are integers independent of l; each certificate holds for every l prime to its witness."


@dataclass(frozen=True)
class SquareClass:
    """A squarefree integer D != 0 standing for the character p -> (D/p)."""
    D: int

    def __post_init__(self):
        if self.D == 0:
            raise BadParameter("0 has no square class")
        if any(e > 1 for e in factorint(abs(self.D)).values()):
            raise BadParameter(f"{self.D} is not squarefree")

    @property
    def is_trivial(self) -> bool:
        return self.D == 1

    @property
    def sort_key(self) -> Tuple[int, bool]:
        return (abs(self.D), self.D < 0)

    def divides(self, p: int) -> bool:
        return self.D % p == 0

    def __str__(self) -> str:
        return str(self.D)


def square_class(x: Rational) -> SquareClass:
    """Squarefree part of a rational u/v, taken as the squarefree part of u*v."""
    x = Fraction(x)
    n = x.numerator * x.denominator
    if n == 0:
        raise BadParameter("0 has no square class")
    odd = [prime for prime, e in factorint(abs(n)).items() if e % 2]
    return SquareClass((1 if n > 0 else -1) * prod(odd))


def candidate_classes(param: SurfaceParam) -> List[SquareClass]:
    """All non-trivial +-(product of support primes), ordered by |D| then sign."""
    support = sorted(param.ramified_support)
    classes = []
    for size in range(len(support) + 1):
        for subset in combinations(support, size):
            base = prod(subset)
            for D in (base, -base):
                if D != 1:
                    classes.append(SquareClass(D))
    return sorted(classes, key=lambda c: c.sort_key)


class Lemma48Outcome(Enum):
    FORCED_ONE = "ForcedOne"
    UNCONSTRAINED = "Unconstrained"


def rule_b_fires(trace_p: Optional[int], q: int) -> bool:
    return trace_p is not None and trace_p not in (q, -q)


def rule_a_fires(trace_p2: Optional[int], q: int) -> bool:
    return trace_p2 is not None and (trace_p2 - 3 * q * q) % 8 != 0


def lemma48_rule(trace_p: Optional[int], trace_p2: Optional[int], q: int) -> Lemma48Outcome:
    """
    Whether the traces over F_q and F_{q^2} force a trivial determinant at Frob_q.

    Args:
        trace_p: T(a, q), or None when not computed
        trace_p2: T(a, q^2), or None when not computed
        q: Odd prime power
    """
    if rule_b_fires(trace_p, q) or rule_a_fires(trace_p2, q):
        return Lemma48Outcome.FORCED_ONE
    return Lemma48Outcome.UNCONSTRAINED


class TraceMemo:
    """
    Traces keyed by (a, p, r).

    The sieve fills it from a single thread; the per-trace work is what gets
    spread over worker processes.
    """

    def __init__(self, workers: int = 1):
        self.workers = workers
        self._values: Dict[Tuple[Fraction, int, int], int] = {}

    def trace(self, param: SurfaceParam, p: int, r: int) -> int:
        key = (param.a, p, r)
        if key not in self._values:
            self._values[key] = frobenius_trace(param, FieldSpec.of(p, r), self.workers).trace
        return self._values[key]

    def __len__(self) -> int:
        return len(self._values)


CERTIFICATE_FIELDS = (
    "param_a", "discriminant_D", "witness_p", "rule", "legendre_D_p",
    "symbols", "trace_p", "trace_p2", "q", "checked",
)


@dataclass(frozen=True)
class EliminationCertificate:
    """Witness that (D/p) = -1 while the traces at p force a trivial determinant."""
    param: SurfaceParam
    D: SquareClass
    p: int
    rule: str
    symbols: Dict[str, int]
    trace_p: Optional[int] = None
    trace_p2: Optional[int] = None
    legendre_D: int = -1
    checked: bool = True

    @property
    def q(self) -> int:
        return self.p if self.rule == "B" else self.p * self.p

    @property
    def trace_p2_mod_8(self) -> Optional[int]:
        return None if self.trace_p2 is None else self.trace_p2 % 8

    @property
    def three_p2_mod_8(self) -> Optional[int]:
        """3p^2 mod 8, the residue rule A requires the trace to miss."""
        return None if self.trace_p2 is None else 3 * self.p * self.p % 8

    def to_json(self) -> Dict[str, Any]:
        return {
            "param_a": self.param.label,
            "discriminant_D": self.D.D,
            "witness_p": self.p,
            "rule": self.rule,
            "legendre_D_p": self.legendre_D,
            "symbols": dict(self.symbols),
            "trace_p": self.trace_p,
            "trace_p2": self.trace_p2,
            "trace_p2_mod_8": self.trace_p2_mod_8,
            "three_p2_mod_8": self.three_p2_mod_8,
            "q": self.q,
            "checked": self.checked,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "EliminationCertificate":
        """
        Rebuild a certificate from its JSON form.

        Raises:
            CertificateRejected: if a field is missing or malformed
        """
        missing = [key for key in CERTIFICATE_FIELDS if key not in data]
        if missing:
            raise CertificateRejected("malformed certificate", [f"missing field '{key}'" for key in missing])
        if data["rule"] not in RULES:
            raise CertificateRejected("malformed certificate", [f"unknown rule {data['rule']!r}"])
        try:
            return cls(
                param=SurfaceParam.parse(str(data["param_a"])),
                D=SquareClass(int(data["discriminant_D"])),
                p=int(data["witness_p"]),
                rule=data["rule"],
                symbols={str(k): int(v) for k, v in data["symbols"].items()},
                trace_p=_optional_int(data["trace_p"]),
                trace_p2=_optional_int(data["trace_p2"]),
                legendre_D=int(data["legendre_D_p"]),
                checked=bool(data["checked"]),
            )
        except (BadParameter, ValueError, TypeError, AttributeError) as e:
            raise CertificateRejected("malformed certificate", [str(e)]) from e


def _optional_int(value: Any) -> Optional[int]:
    return None if value is None else int(value)


def _symbols(param: SurfaceParam, p: int) -> Dict[str, int]:
    return {
        "two_1plus_a": legendre(param.two_1plus_a, p),
        "two_1minus_a": legendre(param.two_1minus_a, p),
    }


def _check_rules(rules: Sequence[str]) -> Tuple[str, ...]:
    rules = tuple(rules)
    unknown = [rule for rule in rules if rule not in RULES]
    if unknown or not rules:
        raise BadParameter(f"rules must be drawn from {sorted(RULES)}, got {list(rules)}")
    return rules


def try_witness(param: SurfaceParam, D: SquareClass, p: int, rules: Sequence[str] = DEFAULT_RULES,
                memo: Optional[TraceMemo] = None,
                require_symbols: bool = False) -> Optional[EliminationCertificate]:
    """
    Try to eliminate D with the single prime p.

    Args:
        param: Surface parameter
        D: Class to eliminate
        p: Candidate witness prime
        rules: Rules to try, in order
        memo: Shared trace cache
        require_symbols: Only allow rule "A" when both (2(1+a)/p) and (2(1-a)/p) are -1

    Returns:
        A certificate, or None when p is bad, (D/p) != -1 or no rule fires
    """
    rules = _check_rules(rules)
    if p < 3 or not param.is_good_prime(p) or D.divides(p):
        return None
    if legendre(D.D, p) != -1:
        return None
    memo = memo or TraceMemo()
    symbols = _symbols(param, p)

    for rule in rules:
        if rule == "B":
            trace_p = memo.trace(param, p, 1)
            if rule_b_fires(trace_p, p):
                return EliminationCertificate(param, D, p, "B", symbols, trace_p=trace_p)
        else:
            if require_symbols and (symbols["two_1plus_a"], symbols["two_1minus_a"]) != (-1, -1):
                continue
            trace_p2 = memo.trace(param, p, 2)
            if rule_a_fires(trace_p2, p):
                return EliminationCertificate(param, D, p, "A", symbols, trace_p2=trace_p2)
    return None


def eliminate(param: SurfaceParam, D: SquareClass, prime_bound: int = DEFAULT_PRIME_BOUND,
              rules: Sequence[str] = DEFAULT_RULES, memo: Optional[TraceMemo] = None,
              require_symbols: bool = False) -> Optional[EliminationCertificate]:
    """
    Search the primes up to prime_bound for a witness against D.

    Each rule is run over the whole prime range before the next is tried,
    primes in increasing order; the first witness wins.

    Returns:
        A certificate, or None when D is not eliminated below the bound

    Raises:
        BadParameter: for the trivial class or a prime bound below 3
    """
    if D.is_trivial:
        raise BadParameter("the trivial class is the conclusion, not a candidate")
    if prime_bound < 3:
        raise BadParameter(f"prime bound must be at least 3, got {prime_bound}")
    rules = _check_rules(rules)
    memo = memo or TraceMemo()

    for rule in rules:
        for p in map(int, primerange(3, prime_bound + 1)):
            certificate = try_witness(param, D, p, (rule,), memo, require_symbols)
            if certificate is not None:
                logger.debug(f"D={D} eliminated by rule {rule} at p={p}")
                return certificate
    logger.debug(f"D={D} survives up to {prime_bound}")
    return None


@dataclass(frozen=True)
class SieveReport:
    """Outcome of sieving every candidate class of a."""
    param: SurfaceParam
    prime_bound: int
    candidates: Tuple[SquareClass, ...]
    eliminated: Tuple[EliminationCertificate, ...]
    survivors: Tuple[SquareClass, ...]
    assumption: str = field(default=SUPPORT_ASSUMPTION, repr=False)

    @property
    def star_star_verified(self) -> bool:
        return not self.survivors

    def to_dict(self) -> Dict[str, Any]:
        return {
            "param_a": self.param.label,
            "prime_bound": self.prime_bound,
            "support_assumption": self.assumption,
            "ell_note": ELL_NOTE,
            "candidates": [c.D for c in self.candidates],
            "survivors": [c.D for c in self.survivors],
            "star_star_verified": self.star_star_verified,
            "certificates": [cert.to_json() for cert in self.eliminated],
        }


def verify_condition_star_star(param: SurfaceParam, prime_bound: int = DEFAULT_PRIME_BOUND,
                               workers: int = 1,
                               rules: Sequence[str] = DEFAULT_RULES) -> SieveReport:
    """
    Sieve every candidate class of a.

    Args:
        param: Surface parameter
        prime_bound: Largest witness prime tried
        workers: Processes used inside each trace computation
        rules: Rules in the order they are tried

    Returns:
        SieveReport; star_star_verified holds when no class survives
    """
    memo = TraceMemo(workers)
    candidates = candidate_classes(param)
    eliminated, survivors = [], []
    for D in candidates:
        certificate = eliminate(param, D, prime_bound, rules, memo)
        if certificate is None:
            survivors.append(D)
        else:
            eliminated.append(certificate)

    report = SieveReport(param, prime_bound, tuple(candidates), tuple(eliminated), tuple(survivors))
    logger.info(f"Sieve for a={param} up to {prime_bound}: {len(eliminated)}/{len(candidates)} "
                f"classes eliminated, {len(memo)} traces computed")
    if survivors:
        logger.warning(f"Surviving classes for a={param}: {[c.D for c in survivors]}")
    return report


def replay_certificate(certificate: EliminationCertificate) -> EliminationCertificate:
    """
    Recompute every premise of a certificate from (a, D, p).

    Returns:
        The certificate, when all premises hold

    Raises:
        CertificateRejected: listing each premise that does not reproduce
    """
    param, D, p = certificate.param, certificate.D, certificate.p
    failures = []

    if certificate.rule not in RULES:
        raise CertificateRejected(f"certificate for D={D}", [f"unknown rule {certificate.rule!r}"])
    if p < 3 or not param.is_good_prime(p):
        raise CertificateRejected(f"certificate for D={D}", [f"p={p} is not a good odd prime for a={param}"])
    if D.is_trivial:
        failures.append("D is the trivial class")
    if D not in candidate_classes(param):
        failures.append(f"D={D} is outside the candidate support")

    symbol = legendre(D.D, p)
    if symbol != -1 or certificate.legendre_D != symbol:
        failures.append(f"legendre(D, p) = {symbol}, certificate says {certificate.legendre_D}")
    symbols = _symbols(param, p)
    if certificate.symbols != symbols:
        failures.append(f"symbols {certificate.symbols} do not match {symbols}")

    if certificate.rule == "B":
        trace_p = frobenius_trace(param, FieldSpec.of(p, 1)).trace
        if certificate.trace_p != trace_p:
            failures.append(f"T(a, p) = {trace_p}, certificate says {certificate.trace_p}")
        if not rule_b_fires(trace_p, p):
            failures.append(f"T(a, p) = {trace_p} is +-p")
    else:
        trace_p2 = frobenius_trace(param, FieldSpec.of(p, 2)).trace
        if certificate.trace_p2 != trace_p2:
            failures.append(f"T(a, p^2) = {trace_p2}, certificate says {certificate.trace_p2}")
        if not rule_a_fires(trace_p2, p):
            failures.append(f"T(a, p^2) = {trace_p2} is 3p^2 mod 8")

    if failures:
        raise CertificateRejected(f"certificate for D={D} at p={p} rejected", failures)
    logger.debug(f"Certificate for D={D} at p={p} replayed")
    return certificate


def dump_certificates(report: SieveReport) -> str:
    """Certificate bundle as JSON with sorted keys."""
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def load_certificates(file_path: str) -> List[EliminationCertificate]:
    """
    Load and validate a certificate bundle.

    Args:
        file_path: Path to a bundle written by dump_certificates

    Returns:
        The certificates, not yet replayed

    Raises:
        CertificateRejected: if the file is unreadable or missing required fields
    """
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise CertificateRejected(f"invalid JSON in certificate file: {e}") from e
    except OSError as e:
        raise CertificateRejected(f"could not read certificate file: {e}") from e

    for key in ("param_a", "prime_bound", "certificates"):
        if key not in data:
            raise CertificateRejected(f"missing '{key}' field in {file_path}")

    certificates = [EliminationCertificate.from_json(entry) for entry in data["certificates"]]
    for cert in certificates:
        if cert.param.label != data["param_a"]:
            raise CertificateRejected(f"certificate for a={cert.param} in a bundle for a={data['param_a']}")
    logger.info(f"Loaded {len(certificates)} certificates from {file_path}")
    return certificates


def replay_all(certificates: Iterable[EliminationCertificate]) -> List[Tuple[EliminationCertificate, Optional[str]]]:
    """Replay each certificate; pairs it with None on success or the rejection message."""
    results = []
    for cert in certificates:
        try:
            replay_certificate(cert)
            results.append((cert, None))
        except CertificateRejected as e:
            logger.error(str(e))
            results.append((cert, str(e)))
    return results


@dataclass(frozen=True)
class HypothesisReport:
    """Sufficient conditions on a for the sieve to succeed."""
    param: SurfaceParam
    mod5_ok: bool
    mod7_ok: bool
    two_1plus_a_nonsquare: bool
    two_1minus_a_nonsquare: bool

    @property
    def nonsquare_ok(self) -> bool:
        return self.two_1plus_a_nonsquare and self.two_1minus_a_nonsquare

    @property
    def theorem_applies(self) -> bool:
        return self.mod5_ok and self.nonsquare_ok

    @property
    def mod7_alternative_applies(self) -> bool:
        return self.mod7_ok and self.nonsquare_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "param_a": self.param.label,
            "a_mod_5_in_2_3": self.mod5_ok,
            "a_mod_7_in_3_4": self.mod7_ok,
            "two_1plus_a_nonsquare": self.two_1plus_a_nonsquare,
            "two_1minus_a_nonsquare": self.two_1minus_a_nonsquare,
            "theorem_applies": self.theorem_applies,
            "mod7_alternative_applies": self.mod7_alternative_applies,
        }


def _residue_in(param: SurfaceParam, p: int, residues: Iterable[int]) -> bool:
    if param.den % p == 0:
        return False
    return param.num * pow(param.den, -1, p) % p in set(residues)


def check_hypotheses(param: SurfaceParam) -> HypothesisReport:
    """Evaluate a mod 5 in {2, 3}, a mod 7 in {3, 4}, and that 2(1+a), 2(1-a) are not rational squares."""
    report = HypothesisReport(
        param=param,
        mod5_ok=_residue_in(param, 5, (2, 3)),
        mod7_ok=_residue_in(param, 7, (3, 4)),
        two_1plus_a_nonsquare=not is_rational_square(param.two_1plus_a),
        two_1minus_a_nonsquare=not is_rational_square(param.two_1minus_a),
    )
    if not report.nonsquare_ok:
        logger.warning(f"2(1+a) or 2(1-a) is a rational square for a={param}")
    return report
