"""Tests for prime and quadratic-extension field arithmetic."""

import unittest
from fractions import Fraction

from vgt_verifier.errors import BadDenominator, BadParameter, DivisionByZero, FieldMismatch, NotASquare
from vgt_verifier.ff import (FieldSpec, PrimeModulus, field_arith, find_nonresidue, legendre,
                             multiplicative_generator, quad_char, quad_char_by_power, sqrt_field)

SMALL_FIELDS = [FieldSpec.of(p, r) for p, r in [(3, 1), (5, 1), (7, 1), (13, 1), (3, 2), (5, 2), (7, 2)]]


class TestPrimeModulus(unittest.TestCase):
    """Validation of moduli and field specs."""

    def test_rejects_non_primes(self):
        for bad in (1, 2, 9, 15, -7):
            with self.assertRaises(BadParameter):
                PrimeModulus(bad)

    def test_nonresidue(self):
        self.assertEqual(find_nonresidue(3), 2)
        self.assertEqual(find_nonresidue(5), 2)
        self.assertEqual(find_nonresidue(7), 3)
        self.assertEqual(find_nonresidue(17), 3)

    def test_field_spec(self):
        spec = FieldSpec.of(7, 2)
        self.assertEqual(spec.q, 49)
        self.assertEqual(spec.d, 3)
        self.assertEqual(str(spec), "F_7^2[w^2=3]")
        self.assertEqual(str(FieldSpec.of(7)), "F_7")
        with self.assertRaises(BadParameter):
            FieldSpec(7, 2, 2)
        with self.assertRaises(BadParameter):
            FieldSpec(7, 3)
        with self.assertRaises(BadParameter):
            FieldSpec.of(7).omega

    def test_canonical_order(self):
        spec = FieldSpec.of(3, 2)
        elements = list(spec.elements())
        self.assertEqual(len(elements), 9)
        self.assertEqual([x.index for x in elements], list(range(9)))
        self.assertEqual(elements, sorted(elements, key=lambda x: x.sort_key))
        self.assertEqual(str(elements[5]), "2+1w")


class TestArithmetic(unittest.TestCase):
    """Field operations."""

    def setUp(self):
        self.f49 = FieldSpec.of(7, 2)

    def test_omega_squares_to_nonresidue(self):
        w = self.f49.omega
        self.assertEqual(w * w, self.f49.element(3))

    def test_inverse(self):
        for spec in SMALL_FIELDS:
            for x in spec.elements():
                if not x.is_zero:
                    self.assertEqual(x * x.inverse(), spec.one)
                    self.assertEqual(x ** -1, x.inverse())

    def test_norm_is_multiplicative_frobenius_power(self):
        for x in self.f49.elements():
            self.assertEqual(self.f49.element(x.norm()), x ** 8)
            self.assertEqual(x * x.conjugate(), self.f49.element(x.norm()))

    def test_mixed_operands(self):
        f5 = FieldSpec.of(5)
        x = f5.element(3)
        self.assertEqual(x + 4, f5.element(2))
        self.assertEqual(1 - x, f5.element(3))
        self.assertEqual(2 / x, f5.element(4))
        self.assertEqual(x * Fraction(1, 2), f5.element(4))
        self.assertEqual(f5.from_rational(Fraction(1, 2)), f5.element(3))

    def test_errors(self):
        f5, f7 = FieldSpec.of(5), FieldSpec.of(7)
        with self.assertRaises(FieldMismatch):
            f5.one + f7.one
        with self.assertRaises(DivisionByZero):
            f5.one / f5.zero
        with self.assertRaises(ZeroDivisionError):
            f5.zero.inverse()
        with self.assertRaises(BadDenominator):
            f5.from_rational(Fraction(1, 5))

    def test_field_arith(self):
        x, y = self.f49.element(2, 3), self.f49.element(5, 1)
        self.assertEqual(field_arith(x, y, "add"), x + y)
        self.assertEqual(field_arith(x, y, "sub"), x - y)
        self.assertEqual(field_arith(x, y, "mul"), x * y)
        self.assertEqual(field_arith(x, y, "div") * y, x)
        self.assertEqual(field_arith(x, 48, "pow"), self.f49.one)
        with self.assertRaises(BadParameter):
            field_arith(x, y, "mod")
        with self.assertRaises(BadParameter):
            field_arith(x, -1, "pow")

    def test_multiplicative_generator(self):
        self.assertEqual(multiplicative_generator(FieldSpec.of(7)), FieldSpec.of(7).element(3))
        g = multiplicative_generator(self.f49)
        powers = {(g ** k).index for k in range(48)}
        self.assertEqual(len(powers), 48)


class TestQuadraticCharacter(unittest.TestCase):
    """Legendre symbols, characters and square roots."""

    def test_legendre(self):
        self.assertEqual(legendre(2, 7), 1)
        self.assertEqual(legendre(3, 7), -1)
        self.assertEqual(legendre(14, 7), 0)
        self.assertEqual(legendre(-1, 11), -1)
        self.assertEqual(legendre(Fraction(1, 2), 7), 1)
        self.assertEqual(legendre(Fraction(6), 5), 1)
        with self.assertRaises(BadDenominator):
            legendre(Fraction(1, 7), 7)

    def test_symbols_are_python_ints(self):
        self.assertIs(type(legendre(3, 7)), int)
        self.assertIs(type(legendre(Fraction(1, 2), 7)), int)
        self.assertIs(type(legendre(14, 7)), int)
        for spec in SMALL_FIELDS:
            for x in spec.elements():
                self.assertIs(type(quad_char(x)), int)
        root = sqrt_field(FieldSpec.of(7, 2).element(3))
        self.assertIs(type(root.c0), int)
        self.assertIs(type(root.c1), int)

    def test_character_matches_euler_criterion(self):
        for spec in SMALL_FIELDS:
            for x in spec.elements():
                self.assertEqual(quad_char(x), quad_char_by_power(x), f"{x} in {spec}")

    def test_half_the_units_are_squares(self):
        for spec in SMALL_FIELDS:
            values = [quad_char(x) for x in spec.elements()]
            self.assertEqual(values.count(1), (spec.q - 1) // 2)
            self.assertEqual(values.count(0), 1)

    def test_every_prime_field_element_is_a_square_in_the_extension(self):
        f25 = FieldSpec.of(5, 2)
        for c in range(1, 5):
            self.assertEqual(quad_char(f25.element(c)), 1)

    def test_sqrt(self):
        for spec in SMALL_FIELDS:
            for x in spec.elements():
                if quad_char(x) == -1:
                    with self.assertRaises(NotASquare):
                        sqrt_field(x)
                    continue
                root = sqrt_field(x)
                self.assertEqual(root * root, x)
                self.assertLessEqual(root.sort_key, (-root).sort_key)

    def test_sqrt_examples(self):
        f7 = FieldSpec.of(7)
        self.assertEqual(sqrt_field(f7.element(4)), f7.element(2))
        self.assertEqual(sqrt_field(f7.element(2)), f7.element(3))
        with self.assertRaises(NotASquare):
            sqrt_field(FieldSpec.of(5).element(3))

    def test_sqrt_of_prime_field_non_residue(self):
        f49 = FieldSpec.of(7, 2)
        root = sqrt_field(f49.element(3))
        self.assertEqual(root, f49.omega)


if __name__ == "__main__":
    unittest.main()
