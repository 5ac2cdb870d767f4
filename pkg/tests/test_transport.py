import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from granflow.transport import (
    ASSIGNMENT_CAP,
    empirical_moment,
    w2_assignment,
    w2_empirical,
    w2_gaussian,
    w2_sorted_1d,
    w2_subsampled,
)


def w2_bruteforce(x, y):
    """Exact W2 by enumerating all permutations (tiny clouds only)."""
    n = len(x)
    best = np.inf
    for perm in itertools.permutations(range(n)):
        cost = np.sum((x - y[list(perm)]) ** 2) / n
        best = min(best, cost)
    return np.sqrt(best)


class TestExact:
    def test_identical_clouds(self):
        x = np.random.default_rng(0).normal(size=(30, 2))
        assert w2_assignment(x, x.copy()).distance == 0.0
        assert w2_sorted_1d(x[:, :1], x[:, :1].copy()).distance == 0.0

    def test_singletons(self):
        r = w2_empirical(np.array([[0.0]]), np.array([[3.0]]))
        assert r.distance == pytest.approx(3.0)

    def test_sorted_matches_assignment_1d(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.normal(size=(17, 1))
            y = rng.normal(size=(17, 1))
            a = w2_sorted_1d(x, y).distance
            b = w2_assignment(x, y).distance
            assert a == pytest.approx(b, abs=1e-12)

    def test_assignment_matches_bruteforce(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n = rng.integers(2, 7)
            x = rng.normal(size=(n, 2))
            y = rng.normal(size=(n, 2))
            assert w2_assignment(x, y).distance == pytest.approx(
                w2_bruteforce(x, y), abs=1e-10)

    def test_translation_identity(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 3))
        c = np.array([1.0, -2.0, 0.5])
        assert w2_assignment(x, x + c).distance == pytest.approx(
            np.linalg.norm(c), abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            w2_sorted_1d(np.zeros((3, 1)), np.zeros((4, 1)))
        with pytest.raises(ValueError):
            w2_assignment(np.zeros((3, 2)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            w2_assignment(np.zeros((ASSIGNMENT_CAP + 1, 2)),
                          np.zeros((ASSIGNMENT_CAP + 1, 2)))
        with pytest.raises(ValueError):
            w2_sorted_1d(np.array([[np.nan]]), np.array([[0.0]]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12),
       st.floats(-10, 10))
def test_shift_property_1d(xs, c):
    x = np.array(xs)[:, None]
    assert w2_sorted_1d(x, x + c).distance == pytest.approx(abs(c), abs=1e-9)


class TestSubsampled:
    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(500, 2))
        y = rng.normal(size=(400, 2)) + 1.0
        a = w2_subsampled(x, y, size=64, n_draws=3, seed=9)
        b = w2_subsampled(x, y, size=64, n_draws=3, seed=9)
        assert a.distance == b.distance
        c = w2_subsampled(x, y, size=64, n_draws=3, seed=10)
        assert c.distance != a.distance

    def test_full_size_draw_matches_exact(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(50, 1))
        y = rng.normal(size=(50, 1))
        approx = w2_subsampled(x, y, size=50, n_draws=1, seed=0)
        assert approx.distance == pytest.approx(
            w2_sorted_1d(x, y).distance, abs=1e-12)

    def test_estimates_translation(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(4000, 2))
        y = x + np.array([2.0, 0.0])
        r = w2_subsampled(x, y, size=256, n_draws=4, seed=1)
        assert r.distance == pytest.approx(2.0, rel=0.15)


class TestGaussian:
    def test_identical(self):
        S = np.array([[2.0, 0.3], [0.3, 1.0]])
        r = w2_gaussian(np.zeros(2), S, np.zeros(2), S)
        assert r.distance == pytest.approx(0.0, abs=1e-7)

    def test_mean_shift_only(self):
        S = np.eye(3)
        r = w2_gaussian(np.zeros(3), S, np.array([3.0, 4.0, 0.0]), S)
        assert r.distance == pytest.approx(5.0)

    def test_scalar_variances_1d(self):
        # W2(N(0, s1^2), N(0, s2^2)) = |s1 - s2|
        r = w2_gaussian([0.0], [[4.0]], [0.0], [[1.0]])
        assert r.distance == pytest.approx(1.0)

    def test_commuting_covariances(self):
        # diagonal case: W2^2 = sum (sqrt(a_i) - sqrt(b_i))^2
        a = np.diag([1.0, 4.0])
        b = np.diag([9.0, 16.0])
        r = w2_gaussian(np.zeros(2), a, np.zeros(2), b)
        assert r.squared == pytest.approx((1 - 3) ** 2 + (2 - 4) ** 2)

    def test_against_empirical(self):
        rng = np.random.default_rng(7)
        m1, S1 = np.zeros(1), np.array([[1.0]])
        m2, S2 = np.array([1.5]), np.array([[2.25]])
        exact = w2_gaussian(m1, S1, m2, S2).distance
        x = rng.normal(size=(20000, 1))
        y = 1.5 + 1.5 * rng.normal(size=(20000, 1))
        emp = w2_sorted_1d(x, y).distance
        assert emp == pytest.approx(exact, rel=0.05)


def test_empirical_moment():
    x = np.array([[3.0, 4.0], [0.0, 0.0]])
    assert empirical_moment(x, 2) == pytest.approx(12.5)
    assert empirical_moment(x, 0) == pytest.approx(1.0)
