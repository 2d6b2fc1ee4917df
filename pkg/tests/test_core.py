"""Unit tests for fields, linear algebra and erasure channels"""
import math
import unittest
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.channel import power_channel, power_ln_epsilon, power_ln_epsilon_array, qec_make
from src.core.field import default_field, extension_field, field_make, parse_field_line
from src.core.linalg import FieldBasis, GF2Basis, as_matrix, in_span, mat_rank, pack_gf2_rows
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import ValidationError


@pytest.mark.unit
class TestFieldSpec(unittest.TestCase):
    """Test finite field construction and arithmetic"""

    def test_prime_field(self):
        """Test GF(5) arithmetic"""
        f = field_make(5)
        self.assertEqual(f.q, 5)
        self.assertEqual(f.add(3, 4), 2)
        self.assertEqual(f.mul(3, 4), 2)
        self.assertEqual(f.mul(3, f.inv(3)), 1)
        self.assertEqual(f.sub(1, 3), 3)

    def test_extension_field_gf4(self):
        """Test GF(4) with modulus x^2 + x + 1"""
        f = field_make(2, 2, [1, 1])
        self.assertEqual(f.q, 4)
        self.assertEqual(f.mul(2, 2), 3)
        self.assertEqual(f.inv(2), 3)
        self.assertEqual(f.add(2, 3), 1)
        self.assertEqual(f.power(2, 3), 1)

    def test_default_modulus(self):
        """Test e > 1 without a modulus falls back to the default field"""
        self.assertEqual(field_make(2, 3), default_field(8))

    def test_rejects_bad_parameters(self):
        """Test non-prime p, e < 1 and reducible moduli are rejected"""
        with self.assertRaises(ValidationError):
            field_make(4)
        with self.assertRaises(ValidationError):
            field_make(2, 0)
        with self.assertRaises(ValidationError):
            field_make(2, 2, [1, 0])  # x^2 + 1 = (x + 1)^2
        with self.assertRaises(ValidationError):
            field_make(2, 2, [1])
        with self.assertRaises(ValidationError):
            default_field(6)

    def test_extension(self):
        """Test extension_field degrees"""
        gf2 = default_field(2)
        self.assertIs(extension_field(gf2, 1), gf2)
        self.assertEqual(extension_field(gf2, 2).q, 4)
        self.assertEqual(extension_field(default_field(3), 2).q, 9)
        with self.assertRaises(ValidationError):
            extension_field(gf2, 0)

    def test_serialization(self):
        """Test to_dict/from_dict and the text line form"""
        f = default_field(8)
        self.assertEqual(type(f).from_dict(f.to_dict()), f)
        self.assertEqual(parse_field_line(f.to_line()), f)

    def test_contains(self):
        """Test element membership"""
        f = default_field(3)
        self.assertTrue(f.contains(2))
        self.assertFalse(f.contains(3))
        self.assertFalse(f.contains(-1))


@pytest.mark.unit
class TestLinearAlgebra(unittest.TestCase):
    """Test rank and span over finite fields"""

    def setUp(self):
        """Set up test fixtures"""
        self.gf2 = default_field(2)
        self.gf3 = default_field(3)

    def test_rank(self):
        """Test rank over GF(2) and GF(3)"""
        self.assertEqual(mat_rank(self.gf2, [[1, 0], [1, 1]]), 2)
        self.assertEqual(mat_rank(self.gf2, [[1, 1], [1, 1]]), 1)
        self.assertEqual(mat_rank(self.gf3, [[1, 2], [2, 1]]), 1)
        self.assertEqual(mat_rank(self.gf3, [[1, 1], [1, 2]]), 2)

    def test_in_span(self):
        """Test span membership, including the zero vector"""
        self.assertTrue(in_span(self.gf2, [0, 1], [[1, 1], [1, 0]]))
        self.assertFalse(in_span(self.gf2, [0, 1], [[1, 0]]))
        self.assertTrue(in_span(self.gf2, [0, 0], []))
        self.assertFalse(in_span(self.gf2, [1, 0], []))
        self.assertTrue(in_span(self.gf3, [2, 1], [[1, 2]]))

    def test_dimension_mismatch(self):
        """Test mismatched lengths are rejected"""
        with self.assertRaises(ValidationError):
            in_span(self.gf2, [1, 0, 1], [[1, 0]])

    def test_as_matrix_validation(self):
        """Test ragged rows and out-of-range entries"""
        with self.assertRaises(ValidationError):
            as_matrix(self.gf2, [[1, 0], [1]])
        with self.assertRaises(ValidationError):
            as_matrix(self.gf2, [[1, 2], [0, 1]])

    def test_gf2_basis(self):
        """Test incremental GF(2) elimination on packed rows"""
        basis = GF2Basis()
        packed = pack_gf2_rows(np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]]))
        self.assertTrue(basis.insert(packed[0]))
        self.assertTrue(basis.insert(packed[1]))
        self.assertFalse(basis.insert(packed[2]))
        self.assertEqual(basis.reduce(packed[2]), 0)

    def test_field_basis(self):
        """Test incremental elimination over GF(3)"""
        basis = FieldBasis(self.gf3)
        self.assertTrue(basis.insert(np.array([1, 2, 0])))
        self.assertFalse(basis.insert(np.array([2, 1, 0])))
        self.assertTrue(basis.insert(np.array([0, 0, 1])))


@pytest.mark.unit
class TestErasureChannel(unittest.TestCase):
    """Test q-ary erasure channels and the T_C^k packaging transform"""

    def setUp(self):
        """Set up test fixtures"""
        self.gf2 = default_field(2)

    def test_basic_quantities(self):
        """Test Z equals epsilon and capacity equals 1 - epsilon"""
        ch = qec_make(self.gf2, 0.3)
        self.assertAlmostEqual(ch.z_param, 0.3)
        self.assertAlmostEqual(ch.capacity + ch.z_param, 1.0)
        self.assertEqual(ch.capacity_exact(), 1 - Fraction(0.3))
        self.assertEqual(ch.q, 2)

    def test_validation(self):
        """Test epsilon outside [0, 1] and ambiguous construction"""
        with self.assertRaises(ValidationError):
            qec_make(self.gf2, 1.5)
        with self.assertRaises(ValidationError):
            qec_make(self.gf2, -0.1)
        with self.assertRaises(ValidationError):
            ErasureChannel(self.gf2, epsilon=0.1, ln_epsilon=math.log(0.1))

    def test_log_domain(self):
        """Test channels built from ln epsilon keep doubly small values"""
        ch = ErasureChannel(self.gf2, ln_epsilon=-1e6)
        self.assertEqual(ch.epsilon, 0.0)
        self.assertEqual(ch.ln_z, -1e6)

    def test_power_channel(self):
        """Test 1 - (1 - eps)^k and the extension field"""
        ch = power_channel(qec_make(self.gf2, 0.1), 2)
        self.assertAlmostEqual(ch.epsilon, 0.19, places=12)
        self.assertEqual(ch.q, 4)
        ch3 = power_channel(qec_make(self.gf2, 0.5), 3)
        self.assertAlmostEqual(ch3.epsilon, 0.875, places=12)
        self.assertEqual(ch3.q, 8)

    def test_power_channel_identity(self):
        """Test k = 1 returns the channel and k < 1 is rejected"""
        ch = qec_make(self.gf2, 0.4)
        self.assertIs(power_channel(ch, 1), ch)
        with self.assertRaises(ValidationError):
            power_channel(ch, 0)

    def test_power_extremes(self):
        """Test erasure probabilities 0 and 1 stay fixed"""
        self.assertEqual(power_ln_epsilon(-math.inf, 3), -math.inf)
        self.assertEqual(power_ln_epsilon(0.0, 3), 0.0)

    def test_serialization(self):
        """Test to_dict and from_dict"""
        ch = qec_make(default_field(4), 0.25)
        self.assertEqual(ErasureChannel.from_dict(ch.to_dict()), ch)

    @given(st.floats(min_value=1e-9, max_value=1 - 1e-9), st.integers(min_value=1, max_value=8))
    @settings(max_examples=60, deadline=None)
    def test_power_matches_closed_form(self, eps, k):
        """Test the log-domain power against 1 - (1 - eps)^k"""
        expected = 1.0 - (1.0 - eps) ** k
        got = math.exp(power_ln_epsilon(math.log(eps), k))
        self.assertAlmostEqual(got, expected, delta=1e-12 * max(1.0, k))
        arr = power_ln_epsilon_array(np.array([math.log(eps)]), k)
        self.assertAlmostEqual(float(np.exp(arr[0])), got, places=14)


if __name__ == '__main__':
    unittest.main()
