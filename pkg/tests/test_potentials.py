import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from granflow.potentials import (
    BUILTIN_IDS,
    ZeroPotential,
    lift_psi,
    make_builtin,
)


def fd_gradient(f, x, h=1e-6):
    """Central finite differences of a scalar field at one point."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h * (1.0 + abs(x[i]))
        g[i] = (f(x + e) - f(x - e)) / (2.0 * e[i])
    return g


def away_from_kinks(p, x, margin=0.05):
    r = np.linalg.norm(x)
    if p.kink_at_origin and r < margin:
        return False
    if any(abs(r - s) < margin for s in p.seam_radii):
        return False
    if p.name == "V3" and abs(x[0]) < margin:  # branch seam on the x1 axis
        return False
    return True


def catalog():
    for pid in BUILTIN_IDS:
        dim = 2 if pid in ("V3", "W5", "W6") else 1
        yield make_builtin(pid, dim)
    yield make_builtin("W2", 3)
    yield make_builtin("V2", 2)
    yield ZeroPotential(2)


class TestGradients:
    def test_finite_difference_all_builtins(self):
        rng = np.random.default_rng(2024)
        for p in catalog():
            checked = 0
            while checked < 40:
                x = rng.normal(scale=2.0, size=p.dim)
                if not away_from_kinks(p, x):
                    continue
                g = p.grad(x)
                g_fd = fd_gradient(lambda y: p.eval(y), x)
                scale = max(np.linalg.norm(g), 1.0)
                assert np.linalg.norm(g - g_fd) / scale < 1e-6, p.name
                checked += 1

    def test_zero_subgradient_at_origin_kinks(self):
        for pid in ("V2", "W6"):
            p = make_builtin(pid, 2)
            assert np.all(p.grad(np.zeros(2)) == 0.0)

    def test_outer_branch_on_seam(self):
        # at |x| = 1 the gradient comes from the outer branch
        v2 = make_builtin("V2", 1)
        assert v2.grad(np.array([1.0]))[0] == pytest.approx(1.5)
        w5 = make_builtin("W5", 1)
        assert w5.grad(np.array([1.0]))[0] == pytest.approx(-1.0)


class TestSeamContinuity:
    @pytest.mark.parametrize("pid", ["V2", "W5", "W6"])
    def test_value_continuous_at_radius_one(self, pid):
        p = make_builtin(pid, 2)
        rng = np.random.default_rng(7)
        for _ in range(50):
            u = rng.normal(size=2)
            u /= np.linalg.norm(u)
            inner = p.eval((1.0 - 1e-9) * u)
            outer = p.eval((1.0 + 1e-9) * u)
            assert abs(inner - outer) < 1e-7
        # exact branch values coincide at the seam
        x = np.array([1.0, 0.0])
        r = 1.0
        if pid in ("V2", "W6"):
            assert 0.5 * r == pytest.approx(0.5 * r ** 3, abs=1e-12)
        else:
            assert 1.0 - 0.125 == pytest.approx(15.0 / 8.0 - 1.0, abs=1e-12)
        assert np.isfinite(p.eval(x))

    def test_v3_branches_agree_on_axis(self):
        p = make_builtin("V3", 2)
        # at x1 = 0 both branches give x2^2: (1/2)^4 cancels the -1/16 shift
        for x2 in (-2.0, 0.0, 1.0, 3.5):
            assert p.eval(np.array([0.0, x2])) == pytest.approx(x2 ** 2, abs=1e-12)
        assert p.eval(np.array([0.0, 1.0])) == pytest.approx(1.0, abs=1e-12)


class TestPointOracles:
    def test_w6_point(self):
        p = make_builtin("W6", 2)
        x = np.array([2.0, 0.0])
        assert p.eval(x) == pytest.approx(4.0)          # r^3/2 at r=2
        assert p.grad(x) == pytest.approx(np.array([6.0, 0.0]))

    def test_w2_point(self):
        p = make_builtin("W2", 1)
        # slope r^2 - r/4 at r = 1/2 is 1/8
        assert p.grad(np.array([0.5]))[0] == pytest.approx(0.125)

    def test_v1_is_quadratic(self):
        p = make_builtin("V1", 3)
        x = np.array([1.0, -2.0, 2.0])
        assert p.eval(x) == pytest.approx(4.5)
        assert p.grad(x) == pytest.approx(x)
        assert p.exact_prox(x, 0.25) == pytest.approx(x / 1.25)

    def test_metadata(self):
        v1 = make_builtin("V1", 1)
        assert (v1.lambda_convex, v1.growth_q) == (1.0, 1.0)
        v3 = make_builtin("V3", 2)
        assert v3.lambda_convex == 1.0
        assert v3.lambda_empirical == 0.5
        assert v3.growth_q == pytest.approx(3.0 + np.pi / 2.0)
        w6 = make_builtin("W6", 2)
        assert w6.lambda_empirical == 0.0

    def test_dim_validation(self):
        with pytest.raises(ValueError):
            make_builtin("V3", 1)
        with pytest.raises(KeyError):
            make_builtin("V9", 1)
        p = make_builtin("V1", 2)
        with pytest.raises(ValueError):
            p.eval(np.array([1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            p.eval(np.array([np.nan, 0.0]))


# W5 is excluded: its value is continuous at |x| = 1 but the radial slope
# drops from -1/4 to -1 there (a concave kink), so no midpoint-convexity
# constant can hold across the seam; its catalog lambda describes the
# smooth branches only.
@settings(max_examples=60, deadline=None)
@given(
    pid=st.sampled_from([p for p in BUILTIN_IDS if p != "W5"]),
    x=st.lists(st.floats(-8, 8), min_size=2, max_size=2),
    y=st.lists(st.floats(-8, 8), min_size=2, max_size=2),
)
def test_lambda_convexity_midpoint(pid, x, y):
    """f((x+y)/2) <= (f(x)+f(y))/2 - (lambda/8)|x-y|^2 for the empirical lambda."""
    p = make_builtin(pid, 2)
    x, y = np.array(x), np.array(y)
    lam = p.lambda_empirical
    lhs = p.eval(0.5 * (x + y))
    rhs = 0.5 * (p.eval(x) + p.eval(y)) - (lam / 8.0) * np.sum((x - y) ** 2)
    assert lhs <= rhs + 1e-9


class TestJointPotential:
    def test_value_and_gradient_shapes(self):
        psi = lift_psi(make_builtin("V1", 2), make_builtin("W3", 2), 5)
        X = np.random.default_rng(0).normal(size=(5, 2))
        assert np.isscalar(psi.value(X)) or np.ndim(psi.value(X)) == 0
        assert psi.gradient(X).shape == (5, 2)

    @pytest.mark.parametrize("vid,wid,n,d", [
        ("V1", "W1", 4, 1), ("V1", "W3", 8, 1), ("V3", "W5", 3, 2),
    ])
    def test_joint_gradient_finite_difference(self, vid, wid, n, d):
        psi = lift_psi(make_builtin(vid, d), make_builtin(wid, d), n)
        rng = np.random.default_rng(11)
        X = rng.normal(scale=2.0, size=(n, d)) + 3.0  # keep away from kinks
        g = psi.gradient(X).ravel()
        g_fd = fd_gradient(lambda z: psi.value(z.reshape(n, d)), X.ravel())
        assert np.linalg.norm(g - g_fd) / max(np.linalg.norm(g), 1.0) < 1e-6

    def test_lambda_composition(self):
        psi = lift_psi(make_builtin("V1", 1), make_builtin("W1", 1), 4)
        assert psi.lambda_convex == pytest.approx(0.5)  # 1 + 2(-1/4)
        psi = lift_psi(make_builtin("V1", 1), make_builtin("W3", 1), 4)
        assert psi.lambda_convex == pytest.approx(1.0)
        psi = lift_psi(make_builtin("V1", 1), make_builtin("W4", 1), 4)
        assert psi.lambda_convex == pytest.approx(1.0)  # min{1, 3}

    def test_quadratic_joint_prox_stationarity(self):
        psi = lift_psi(make_builtin("V1", 2), make_builtin("W1", 2), 6)
        rng = np.random.default_rng(3)
        X = rng.normal(size=(6, 2))
        tau = 0.2
        Y = psi.exact_prox(X, tau)
        # grad Psi(Y) + (Y - X)/tau = 0 at the prox point
        res = psi.gradient(Y) + (Y - X) / tau
        assert np.max(np.abs(res)) < 1e-12

    def test_interaction_force_quadratic_shortcut(self):
        # O(N) mean-shift formula equals the direct pairwise sum
        psi = lift_psi(make_builtin("V1", 1), make_builtin("W1", 1), 7)
        rng = np.random.default_rng(5)
        X = rng.normal(size=(7, 1))
        direct = np.sum(psi.base_w.grad(X[:, None, :] - X[None, :, :]), axis=1) / 7
        assert psi.interaction_force(X) == pytest.approx(direct)

    def test_shape_validation(self):
        psi = lift_psi(make_builtin("V1", 1), make_builtin("W1", 1), 4)
        with pytest.raises(ValueError):
            psi.value(np.zeros((3, 1)))
        with pytest.raises(ValueError):
            lift_psi(make_builtin("V1", 1), make_builtin("W1", 2), 4)
