"""Tests for fiber point counts."""

import unittest
from fractions import Fraction

from sympy import primerange

from vgt_verifier.counting import (CharacterSumCounter, divisibility_audit, fiber_count_charsum,
                                   fiber_count_naive, fiber_cubic, four_torsion_point)
from vgt_verifier.errors import OracleBoundExceeded
from vgt_verifier.ff import FieldSpec
from vgt_verifier.fibration import INFINITY, FiberClass, ProjPoint, SurfaceParam, classify_fiber, \
    projective_line, reduce_param

ORACLE_PARAMS = [2, 3, 5, -2, Fraction(1, 3)]
ORACLE_FIELDS = [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (7, 2)]
AUDIT_PARAMS = [2, 3, 5, -2]
# every odd q <= 169
PROPERTY_FIELDS = [(int(p), 1) for p in primerange(3, 170)] + [(3, 2), (5, 2), (7, 2), (11, 2), (13, 2)]


def count_at(a_value, p, t, r=1):
    spec = FieldSpec.of(p, r)
    a = reduce_param(SurfaceParam(a_value), spec)
    point = INFINITY if t is None else ProjPoint(spec.element(t))
    return fiber_count_charsum(a, point, spec).count


class TestFiberCounts(unittest.TestCase):
    """Golden counts over small prime fields."""

    def test_counts_over_f5(self):
        self.assertEqual(count_at(2, 5, None), 8)
        self.assertEqual(count_at(2, 5, 0), 5)
        self.assertEqual(count_at(3, 5, None), 8)
        self.assertEqual(count_at(3, 5, 0), 7)

    def test_counts_over_f7(self):
        self.assertEqual(count_at(3, 7, None), 8)
        self.assertEqual(count_at(3, 7, 0), 7)
        self.assertEqual(count_at(3, 7, 1), 8)
        self.assertEqual(count_at(4, 7, None), 8)
        self.assertEqual(count_at(4, 7, 0), 9)
        self.assertEqual(count_at(4, 7, 1), 4)

    def test_counts_depend_on_t_squared(self):
        for a_value in AUDIT_PARAMS:
            param = SurfaceParam(a_value)
            for p, r in PROPERTY_FIELDS:
                if not param.is_good_prime(p):
                    continue
                spec = FieldSpec.of(p, r)
                a = reduce_param(param, spec)
                counts = {t: fiber_count_charsum(a, t, spec).count for t in projective_line(spec)}
                for t, n in counts.items():
                    self.assertEqual(n, counts[-t], f"a={param}, t={t}, {spec}")

    def test_cubic(self):
        spec = FieldSpec.of(7)
        a = reduce_param(SurfaceParam(3), spec)
        cubic = fiber_cubic(a, ProjPoint(spec.one))
        self.assertEqual((cubic.c2, cubic.c1, cubic.c0), (spec.zero, spec.one, spec.zero))
        at_infinity = fiber_cubic(a, INFINITY)
        self.assertEqual(at_infinity.c2, spec.element(6))

    def test_smoothness_flag(self):
        spec = FieldSpec.of(7)
        a = reduce_param(SurfaceParam(2), spec)
        for t in projective_line(spec):
            fc = fiber_count_charsum(a, t, spec)
            self.assertEqual(fc.smooth, classify_fiber(a, t) in (FiberClass.GENERAL, FiberClass.SPECIAL_INFINITY))


class TestOracleEquivalence(unittest.TestCase):
    """The character sum agrees with direct enumeration."""

    def test_charsum_equals_naive(self):
        for a_value in ORACLE_PARAMS:
            param = SurfaceParam(a_value)
            for p, r in ORACLE_FIELDS:
                if not param.is_good_prime(p):
                    continue
                spec = FieldSpec.of(p, r)
                a = reduce_param(param, spec)
                for t in projective_line(spec):
                    self.assertEqual(fiber_count_charsum(a, t, spec).count, fiber_count_naive(a, t, spec).count,
                                     f"a={param}, t={t}, {spec}")

    def test_vectorized_equals_scalar(self):
        for p, r in [(11, 1), (7, 2), (11, 2)]:
            spec = FieldSpec.of(p, r)
            a = reduce_param(SurfaceParam(2), spec)
            scalar = CharacterSumCounter(spec, table_threshold=10 ** 9)
            vectorized = CharacterSumCounter(spec, table_threshold=0)
            self.assertFalse(scalar.vectorized)
            self.assertTrue(vectorized.vectorized)
            for t in projective_line(spec):
                self.assertEqual(scalar.count(a, t).count, vectorized.count(a, t).count, f"t={t}")

    def test_oracle_bound(self):
        spec = FieldSpec.of(11)
        a = reduce_param(SurfaceParam(2), spec)
        with self.assertRaises(OracleBoundExceeded):
            fiber_count_naive(a, INFINITY, spec, oracle_bound=10)


class TestTorsion(unittest.TestCase):
    """Rational 4-torsion and the divisibility it forces."""

    def test_four_torsion_point_lies_on_the_fiber(self):
        spec = FieldSpec.of(13)
        a = reduce_param(SurfaceParam(3), spec)
        found = 0
        for t in projective_line(spec):
            point = four_torsion_point(a, t)
            if point is None:
                continue
            found += 1
            x, y = point
            self.assertEqual(y * y, fiber_cubic(a, t).evaluate(x))
        self.assertGreater(found, 0)

    def test_no_four_torsion_at_zero(self):
        spec = FieldSpec.of(7)
        a = reduce_param(SurfaceParam(2), spec)
        self.assertIsNone(four_torsion_point(a, ProjPoint(spec.zero)))

    def test_divisibility_audit_holds(self):
        for a_value in AUDIT_PARAMS:
            param = SurfaceParam(a_value)
            for p, r in PROPERTY_FIELDS:
                if not param.is_good_prime(p):
                    continue
                checks = divisibility_audit(param, FieldSpec.of(p, r))
                failed = [(str(c.t), c.rule) for c in checks if not c.holds]
                self.assertEqual(failed, [], f"a={param}, p={p}, r={r}")
                rules = {c.rule for c in checks}
                self.assertIn("even", rules)
                self.assertIn("nodal", rules)

    def test_audit_ladder_over_extension(self):
        # every F_p class is a square in F_{p^2}, so the whole ladder at infinity applies
        checks = divisibility_audit(SurfaceParam(2), FieldSpec.of(7, 2))
        rules = {c.rule for c in checks if c.t == INFINITY}
        self.assertEqual(rules, {"even", "inf_four_torsion", "inf_two_torsion", "inf_full"})
        self.assertIn("four_torsion", {c.rule for c in checks})
        self.assertIn("pair", {c.rule for c in checks})


if __name__ == "__main__":
    unittest.main()
