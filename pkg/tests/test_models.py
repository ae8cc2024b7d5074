import numpy as np
import pytest

from lrsrec.errors import DimensionError, ParameterError
from lrsrec.models import (
    RpcaProblem,
    SensingProblem,
    grad,
    grad_factored,
    loss,
    objective_f,
)


def fd_grad(f, m, h=1e-5):
    """Central finite differences of a scalar function of a matrix."""
    g = np.zeros_like(m)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            e = np.zeros_like(m)
            e[i, j] = h
            g[i, j] = (f(m + e) - f(m - e)) / (2 * h)
    return g


def small_sensing(rng, d1=4, d2=3, n=7):
    a = rng.standard_normal((n, d1, d2))
    y = rng.standard_normal(n)
    return SensingProblem(matrices=a, measurements=y)


def small_rpca(rng, d1=4, d2=3, p=1.0):
    if p >= 1.0:
        mask = np.ones((d1, d2), dtype=bool)
    else:
        mask = rng.random((d1, d2)) < p
        mask.ravel()[0] = True
    y = np.where(mask, rng.standard_normal((d1, d2)), 0.0)
    return RpcaProblem(observed=y, mask=mask, p=float(mask.mean()))


class TestLoss:
    def test_sensing_zero_residual(self, rng):
        a = rng.standard_normal((5, 3, 3))
        m = rng.standard_normal((3, 3))
        y = a.reshape(5, -1) @ m.ravel()
        model = SensingProblem(matrices=a, measurements=y)
        assert loss(model, m) == pytest.approx(0.0, abs=1e-25)

    def test_rpca_full_zero(self, rng):
        model = small_rpca(rng)
        assert loss(model, model.observed) == 0.0

    def test_sensing_hand_arithmetic(self):
        model = SensingProblem(matrices=np.eye(2)[None, :, :], measurements=np.array([3.0]))
        assert loss(model, np.eye(2)) == pytest.approx(0.5)

    def test_depends_on_product_only(self, rng):
        model = small_rpca(rng)
        u = rng.standard_normal((4, 2))
        v = rng.standard_normal((3, 2))
        s = rng.standard_normal((4, 3))
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        a = loss(model, u @ v.T + s)
        b = loss(model, (u @ q) @ (v @ q).T + s)
        assert a == pytest.approx(b, rel=1e-12)

    def test_dimension_mismatch(self, rng):
        model = small_rpca(rng)
        with pytest.raises(DimensionError):
            loss(model, rng.standard_normal((5, 5)))


class TestGrad:
    def test_zero_residual_zero_grad(self, rng):
        a = rng.standard_normal((5, 3, 3))
        m = rng.standard_normal((3, 3))
        y = a.reshape(5, -1) @ m.ravel()
        model = SensingProblem(matrices=a, measurements=y)
        assert np.allclose(grad(model, m), 0.0, atol=1e-12)

    def test_rpca_full_identity(self, rng):
        model = small_rpca(rng)
        m = rng.standard_normal((4, 3))
        # full observation at p = 1: gradient is exactly m - Y
        assert np.array_equal(grad(model, m), m - model.observed)

    @pytest.mark.parametrize("kind", ["sensing", "rpca_full", "rpca_partial"])
    def test_finite_differences(self, kind, rng):
        for _ in range(5):
            if kind == "sensing":
                model = small_sensing(rng)
            else:
                model = small_rpca(rng, p=1.0 if kind == "rpca_full" else 0.6)
            m = rng.standard_normal((4, 3))
            g = grad(model, m)
            g_fd = fd_grad(lambda x: loss(model, x), m)
            assert np.allclose(g, g_fd, rtol=1e-5, atol=1e-8)

    def test_linear_in_residual(self, rng):
        model = small_sensing(rng)
        m = rng.standard_normal((4, 3))
        resid = model.measurements - model.apply(m)
        doubled = SensingProblem(
            matrices=model.matrices, measurements=model.measurements + resid
        )
        assert np.allclose(grad(doubled, m), 2 * grad(model, m), rtol=1e-12)


class TestGradFactored:
    def test_stationary_balanced_exact_fit(self, rng):
        u = rng.standard_normal((4, 2))
        q, _ = np.linalg.qr(rng.standard_normal((3, 2)))
        # v with v.T v = u.T u: rotate u's right factors onto a 3x2 frame
        w, s, wt = np.linalg.svd(u.T @ u)
        v = q @ (w * np.sqrt(s)) @ wt
        mask = np.ones((4, 3), dtype=bool)
        model = RpcaProblem(observed=u @ v.T, mask=mask, p=1.0)
        gu, gv = grad_factored(model, u, v, np.zeros((4, 3)))
        assert np.allclose(gu, 0.0, atol=1e-10)
        assert np.allclose(gv, 0.0, atol=1e-10)

    def test_zero_u_formula(self, rng):
        v = rng.standard_normal((3, 2))
        u = np.zeros((4, 2))
        model = RpcaProblem(observed=np.zeros((4, 3)), mask=np.ones((4, 3), bool), p=1.0)
        gu, gv = grad_factored(model, u, v, np.zeros((4, 3)))
        assert np.allclose(gu, 0.0)
        assert np.allclose(gv, 0.5 * v @ (v.T @ v))

    @pytest.mark.parametrize("kind", ["sensing", "rpca_partial"])
    def test_finite_differences_on_objective(self, kind, rng):
        model = small_sensing(rng) if kind == "sensing" else small_rpca(rng, p=0.7)
        u = rng.standard_normal((4, 2))
        v = rng.standard_normal((3, 2))
        s = rng.standard_normal((4, 3))
        gu, gv = grad_factored(model, u, v, s)
        h = 1e-5
        gu_fd = np.zeros_like(u)
        for i in range(u.shape[0]):
            for j in range(u.shape[1]):
                e = np.zeros_like(u)
                e[i, j] = h
                gu_fd[i, j] = (objective_f(model, u + e, v, s) - objective_f(model, u - e, v, s)) / (2 * h)
        gv_fd = np.zeros_like(v)
        for i in range(v.shape[0]):
            for j in range(v.shape[1]):
                e = np.zeros_like(v)
                e[i, j] = h
                gv_fd[i, j] = (objective_f(model, u, v + e, s) - objective_f(model, u, v - e, s)) / (2 * h)
        assert np.allclose(gu, gu_fd, rtol=1e-5, atol=1e-8)
        assert np.allclose(gv, gv_fd, rtol=1e-5, atol=1e-8)


class TestObjective:
    def test_exact_fit_balanced(self, rng):
        u = rng.standard_normal((4, 2))
        model = RpcaProblem(observed=u @ u.T, mask=np.ones((4, 4), bool), p=1.0)
        # v = u gives an exact symmetric fit with balanced factors
        assert objective_f(model, u, u, np.zeros((4, 4))) == pytest.approx(0.0, abs=1e-20)

    def test_balance_term_plug_in(self):
        # zero loss, U^T U - V^T V = diag(2, 0) -> (1/8) * 4 = 0.5
        u = np.array([[np.sqrt(2.0), 0.0], [0.0, 0.0]])
        v = np.zeros((2, 2))
        model = RpcaProblem(observed=np.zeros((2, 2)), mask=np.ones((2, 2), bool), p=1.0)
        assert objective_f(model, u, v, np.zeros((2, 2))) == pytest.approx(0.5)

    def test_recomposition(self, rng):
        model = small_sensing(rng)
        u = rng.standard_normal((4, 2))
        v = rng.standard_normal((3, 2))
        s = rng.standard_normal((4, 3))
        balance = u.T @ u - v.T @ v
        want = loss(model, u @ v.T + s) + np.linalg.norm(balance) ** 2 / 8.0
        assert objective_f(model, u, v, s) == pytest.approx(want, rel=1e-12)


class TestValidation:
    def test_rpca_partial_p1_equals_full(self, rng):
        y = rng.standard_normal((4, 3))
        mask = np.ones((4, 3), dtype=bool)
        a = RpcaProblem(observed=y, mask=mask, p=1.0)
        b = RpcaProblem(observed=y.copy(), mask=mask.copy(), p=1.0)
        m = rng.standard_normal((4, 3))
        assert loss(a, m) == loss(b, m)
        assert np.array_equal(grad(a, m), grad(b, m))

    def test_rpca_invariants(self, rng):
        y = rng.standard_normal((4, 3))
        mask = np.ones((4, 3), dtype=bool)
        mask[0, 0] = False
        with pytest.raises(ParameterError):
            RpcaProblem(observed=y, mask=mask, p=mask.mean())  # nonzero off mask
        y2 = np.where(mask, y, 0.0)
        with pytest.raises(ParameterError):
            RpcaProblem(observed=y2, mask=mask, p=0.5)  # p inconsistent with mask
        with pytest.raises(ParameterError):
            RpcaProblem(observed=y2, mask=mask, p=0.0)

    def test_sensing_shape_checks(self, rng):
        with pytest.raises(DimensionError):
            SensingProblem(matrices=rng.standard_normal((5, 3, 3)), measurements=rng.standard_normal(4))
