"""Tests for the vector geometry layer: Born rule, trivial measurements,
effective vectors and their norm identity."""
import math

import numpy as np
import pytest

from sdiqrac import (
    BlochVector,
    Measurement,
    ValidationError,
    born_probability,
    effective_vector,
)

X = BlochVector(1.0, 0.0, 0.0)
Y = BlochVector(0.0, 1.0, 0.0)


def random_unit(rng):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return BlochVector.from_array(v)


def random_rotation(rng):
    m = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestBornRule:
    def test_aligned_state_and_effect(self):
        assert born_probability(X, Measurement.rank1(X), 0) == 1.0

    def test_orthogonal_axes(self):
        assert born_probability(Y, Measurement.rank1(X), 0) == 0.5

    def test_antipodal_outcome(self):
        assert born_probability(X, Measurement.rank1(X), 1) == 0.0

    def test_trivial_measurements_ignore_state(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            r = random_unit(rng)
            assert born_probability(r, Measurement.trivial_zero(), 0) == 1.0
            assert born_probability(r, Measurement.trivial_zero(), 1) == 0.0
            assert born_probability(r, Measurement.trivial_one(), 1) == 1.0
            assert born_probability(r, Measurement.trivial_one(), 0) == 0.0

    def test_outcomes_sum_to_one(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            r, v = random_unit(rng), random_unit(rng)
            m = Measurement.rank1(v)
            total = born_probability(r, m, 0) + born_probability(r, m, 1)
            assert abs(total - 1.0) <= 1e-15

    def test_rotation_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            r, v = random_unit(rng), random_unit(rng)
            rot = random_rotation(rng)
            r2 = BlochVector.from_array(rot @ r.as_array())
            v2 = BlochVector.from_array(rot @ v.as_array())
            p1 = born_probability(r, Measurement.rank1(v), 0)
            p2 = born_probability(r2, Measurement.rank1(v2), 0)
            assert abs(p1 - p2) <= 1e-12

    def test_rejects_non_unit_state(self):
        with pytest.raises(ValidationError):
            born_probability(BlochVector(0.9, 0, 0), Measurement.rank1(X), 0)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValidationError):
            Measurement.rank1(BlochVector(1.0, 1.0, 0.0))

    def test_rejects_bad_outcome(self):
        with pytest.raises(ValidationError):
            born_probability(X, Measurement.rank1(X), 2)

    def test_trivial_measurements_carry_no_axis(self):
        with pytest.raises(ValidationError):
            Measurement(Measurement.trivial_zero().kind, X)


class TestEffectiveVector:
    def test_equal_weights_at_zero_bias(self):
        v = effective_vector("00", 0, 0.0, X, Y)
        np.testing.assert_allclose(v.as_array(), [0.5, 0.5, 0.0], atol=1e-15)

    def test_sign_flip_on_second_bit(self):
        v = effective_vector("01", 0, 0.0, X, Y)
        np.testing.assert_allclose(v.as_array(), [0.5, -0.5, 0.0], atol=1e-15)

    def test_biased_weights(self):
        v = effective_vector("00", 0, 0.1, X, Y)
        np.testing.assert_allclose(v.as_array(), [0.6, 0.4, 0.0], atol=1e-15)

    def test_sign_convention_flips_with_k2(self):
        v = effective_vector("00", 1, 0.1, X, Y)
        np.testing.assert_allclose(v.as_array(), [0.4, 0.6, 0.0], atol=1e-15)

    def test_accepts_bit_tuples(self):
        v1 = effective_vector((1, 0), 0, 0.2, X, Y)
        v2 = effective_vector("10", 0, 0.2, X, Y)
        assert v1 == v2

    def test_norm_identity(self):
        # the two vectors of each complementary input pair share the total
        # squared norm 1 + 4 eps2^2, independent of the axis angle
        rng = np.random.default_rng(42)
        for _ in range(200):
            v0, v1 = random_unit(rng), random_unit(rng)
            eps2 = rng.uniform(0.0, 0.499)
            k2 = int(rng.integers(2))
            target = 1.0 + 4.0 * eps2 * eps2
            for pair in (("00", "01"), ("10", "11")):
                total = sum(
                    effective_vector(a, k2, eps2, v0, v1).norm() ** 2
                    for a in pair
                )
                assert abs(total - target) <= 1e-12

    def test_rejects_out_of_range_bias(self):
        with pytest.raises(ValidationError):
            effective_vector("00", 0, 0.5, X, Y)

    def test_rejects_malformed_input(self):
        with pytest.raises(ValidationError):
            effective_vector("0", 0, 0.1, X, Y)
        with pytest.raises(ValidationError):
            effective_vector("02", 0, 0.1, X, Y)
