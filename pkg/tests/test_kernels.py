import numpy as np
import pytest

from twomatrix import (
    eval_p,
    k11,
    k11_hat,
    k11_tilde,
    k12,
    k12_tilde,
    k21,
    k21_tilde,
    k22,
    k22_hat,
    k22_tilde,
    log_weight,
    with_index,
)
from twomatrix.biorth import eval_p_table
from twomatrix.errors import CoincidenceError, PoleProximityError
from twomatrix.kernels import (
    k11_tilde_integral,
    k21_tilde_integral,
    k22_tilde_integral,
)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestPlainKernels:
    def test_single_term_k12_constant(self, gaussian_ctx, gaussian_system):
        ctx = gaussian_ctx(1)
        for x, y in ((0.0, 0.0), (1.5, -2.3)):
            np.testing.assert_allclose(
                k12(ctx, x, y), 1.0 / gaussian_system.h_sq[0], rtol=1e-14
            )

    def test_k11_integrates_to_one(self, gaussian_ctx, gaussian_tev):
        # integral over the second argument is 1, any first argument
        rule = gaussian_tev.rule_x
        for n in (1, 3, 5):
            ctx = gaussian_ctx(n)
            for x in (-0.7, 1.3):
                vals = np.array([k11(ctx, x, t) for t in rule.nodes[::4]])
                # dense check instead: vectorized through the tables
                qmat = gaussian_tev.Q_values(rule.nodes)[:, :n]
                px = eval_p_table(ctx.sys, np.asarray(x))[:n]
                kv = qmat @ (px / ctx.sys.h_sq[:n])
                total = np.sum(rule.weights * kv)
                np.testing.assert_allclose(total, 1.0, atol=1e-12)
                np.testing.assert_allclose(
                    vals, kv[::4], rtol=1e-12
                )  # scalar path == batch path

    def test_k11_reproduces_low_degree(self, quartic_ctx, quartic_tev):
        rng = np.random.default_rng(2)
        n = 4
        ctx = quartic_ctx(n)
        rule = quartic_tev.rule_x
        coeff = rng.normal(size=n)
        x0 = 0.83
        p_nodes = coeff @ eval_p_table(ctx.sys, rule.nodes)[:n]
        qmat = quartic_tev.Q_values(rule.nodes)[:, :n]
        px = eval_p_table(ctx.sys, np.asarray(x0))[:n]
        kv = qmat @ (px / ctx.sys.h_sq[:n])
        lhs = np.sum(rule.weights * p_nodes * kv)
        np.testing.assert_allclose(lhs, coeff @ px, rtol=1e-12)

    def test_k21_subtraction(self, gaussian_ctx, gaussian_model):
        # at n = 0 the kernel is minus the bare weight
        ctx = gaussian_ctx(0)
        x, y = 0.4, -1.1
        np.testing.assert_allclose(
            k21(ctx, y, x), -np.exp(log_weight(gaussian_model, x, y)), rtol=1e-14
        )

    def test_values_real_for_real_args(self, quartic_ctx):
        ctx = quartic_ctx(3)
        for fn, args in (
            (k11, (0.5, -0.2)),
            (k12, (1.0, 2.0)),
            (k21, (0.3, 0.7)),
            (k22, (-1.0, 0.1)),
        ):
            assert isinstance(fn(ctx, *args), float)


class TestSummationVsIntegralForms:
    """The summation formulas equal the defining Cauchy-transform integrals."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_k11(self, gaussian_ctx, n):
        rng = np.random.default_rng(n)
        ctx = gaussian_ctx(n)
        x = float(rng.uniform(-1.5, 1.5))
        v = complex(rng.uniform(-1, 1), rng.choice([-1, 1]) * rng.uniform(0.5, 2))
        assert rel(k11_tilde(ctx, x, v), k11_tilde_integral(ctx, x, v)) < 1e-8

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_k21(self, quartic_ctx, n):
        rng = np.random.default_rng(10 + n)
        ctx = quartic_ctx(n)
        w = complex(rng.uniform(-1, 1), -rng.uniform(0.5, 2))
        v = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        assert rel(k21_tilde(ctx, w, v), k21_tilde_integral(ctx, w, v)) < 1e-8

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_k22(self, gaussian_ctx, n):
        rng = np.random.default_rng(20 + n)
        ctx = gaussian_ctx(n)
        w = complex(rng.uniform(-1, 1), rng.uniform(0.5, 2))
        y = float(rng.uniform(-1.5, 1.5))
        assert rel(k22_tilde(ctx, w, y), k22_tilde_integral(ctx, w, y)) < 1e-8

    def test_k12_is_plain(self, gaussian_ctx):
        ctx = gaussian_ctx(3)
        assert k12_tilde(ctx, 0.7, -0.4) == k12(ctx, 0.7, -0.4)


class TestGuards:
    def test_coincidence(self, gaussian_ctx):
        ctx = gaussian_ctx(2)
        with pytest.raises(CoincidenceError):
            k11_tilde(ctx, 0.5 + 1e-13, 0.5 + 0j)
        with pytest.raises(CoincidenceError):
            k22_tilde(ctx, 1.2 + 0j, 1.2)

    def test_pole_proximity(self, gaussian_ctx):
        ctx = gaussian_ctx(2)
        with pytest.raises(PoleProximityError):
            k11_tilde(ctx, 0.1, 0.5 + 1e-9j)
        with pytest.raises(PoleProximityError):
            k21_tilde(ctx, 1e-12j, 1j)

    def test_index_bounds(self, gaussian_model, gaussian_system, gaussian_tev):
        from twomatrix import KernelContext

        with pytest.raises(ValueError):
            KernelContext(gaussian_model, gaussian_system, gaussian_tev, -1)
        with pytest.raises(ValueError):
            KernelContext(
                gaussian_model, gaussian_system, gaussian_tev,
                gaussian_system.order + 1,
            )

    def test_with_index(self, gaussian_ctx):
        ctx = gaussian_ctx(2)
        shifted = with_index(ctx, 5)
        assert shifted.n == 5 and shifted.sys is ctx.sys


class TestAsymptotics:
    """Leading behavior at large arguments, Gaussian model (even symmetry:
    the subleading term is one order down, so only upper bounds here; the
    acceptance suite runs the full halving-band on an asymmetric model)."""

    def test_k11_tilde_large_x(self, gaussian_ctx, gaussian_tev, gaussian_system):
        n = 3
        ctx = gaussian_ctx(n)
        v = 0.4 + 1.1j
        qt = gaussian_tev.Q_tilde(n - 1, v)
        for radius in (100.0, 200.0):
            lead = qt / gaussian_system.h_sq[n - 1] * radius ** (n - 1)
            assert rel(k11_tilde(ctx, radius, v), lead) < 5e-2

    def test_k21_tilde_large_w(self, gaussian_ctx, gaussian_tev, gaussian_system):
        n = 2
        ctx = gaussian_ctx(n)
        v = -0.3 + 0.8j
        for radius in (100.0, 200.0):
            w = 1j * radius
            lead = -gaussian_tev.Q_tilde(n, v) * w ** (-n - 1)
            assert rel(k21_tilde(ctx, w, v), lead) < 5e-2

    def test_k22_tilde_large_w(self, gaussian_ctx, gaussian_system):
        from twomatrix.biorth import eval_q

        n = 2
        ctx = gaussian_ctx(n)
        y = 0.5  # the 1/R coefficient grows with |y|; keep it inside the band
        for radius in (100.0, 200.0):
            w = 1j * radius
            lead = -eval_q(gaussian_system, n, y) * w ** (-n - 1)
            assert rel(k22_tilde(ctx, w, y), lead) < 5e-2


class TestHatKernels:
    def test_hat_drops_subtraction(self, gaussian_ctx, gaussian_tev, gaussian_system):
        # k11_hat equals the summation part of k11_tilde without -1/(v-x)
        ctx = gaussian_ctx(3)
        z = 0.7 + 0.9j
        qt = gaussian_tev.Q_tilde_values([z])[0, :3]
        px = eval_p_table(gaussian_system, np.asarray(z))[:3]
        want = np.sum(px * qt / gaussian_system.h_sq[:3])
        np.testing.assert_allclose(k11_hat(ctx, z), want, rtol=1e-13)

    def test_hats_empty_at_zero_index(self, gaussian_ctx):
        ctx = gaussian_ctx(0)
        assert k11_hat(ctx, 1j) == 0.0
        assert k22_hat(ctx, 1j) == 0.0
