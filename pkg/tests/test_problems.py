import math

import numpy as np
import pytest

from tempered_ldg.problems import by_label, gaussian_pulse, manufactured_quartic, manufactured_sine
from tempered_ldg.tempered import build_weights, tempered_derivative_scalar


def fd_second_derivative(f, x, t, h=1e-3):
    return (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / h**2


def pde_residual(problem, x, t, steps, uxx=None):
    """Residual of the governing equation at (x, t), with the time
    derivative replaced by its discrete form on `steps` levels and u_xx
    by central differences unless supplied analytically."""
    tau = t / steps
    w = build_weights(problem.alpha, problem.gamma, tau, steps)
    times = np.arange(steps + 1) * tau
    samples = np.array([float(problem.exact(np.asarray(x), s)) for s in times])
    dt = tempered_derivative_scalar(w, samples)
    if uxx is None:
        uxx = fd_second_derivative(problem.exact, x, t)
    return dt + problem.rho * problem.exact(np.asarray(x), t) - uxx - problem.forcing(np.asarray(x), t)


class TestManufacturedSine:
    def test_starts_from_rest(self):
        p = manufactured_sine(2.0, 0.5)
        x = np.linspace(0, 1, 17)
        assert np.all(p.exact(x, 0.0) == 0.0)
        assert np.all(p.u0(x) == 0.0)

    def test_forcing_value(self):
        p = manufactured_sine(2.0, 0.5)
        expected = math.exp(-2.0) * (2.0 / math.gamma(2.5) + 4 * math.pi**2)
        assert p.forcing(np.asarray(0.25), 1.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(5.5464, abs=1e-4)

    def test_exact_value(self):
        p = manufactured_sine(2.0, 0.5)
        assert p.exact(np.asarray(0.25), 1.0) == pytest.approx(math.exp(-2.0), rel=1e-14)


class TestManufacturedQuartic:
    def test_shape_second_derivative(self):
        p = manufactured_quartic(2.0, 0.5)
        # d^2/dx^2 [x^2 (1-x)^2] = 2 - 12x + 12x^2; cross-check central FD
        for x in (0.0, 0.3, 0.8):
            fd = fd_second_derivative(p.exact, x, 1.0, h=1e-5)
            sym = math.exp(-2.0) * (2 - 12 * x + 12 * x**2)
            assert fd == pytest.approx(sym, abs=5e-5)
        assert fd_second_derivative(p.exact, 0.0, 1.0, h=1e-5) == pytest.approx(
            2.0 * math.exp(-2.0), abs=5e-5)

    def test_exact_value_at_midpoint(self):
        p = manufactured_quartic(2.0, 0.3)
        assert p.exact(np.asarray(0.5), 1.0) == pytest.approx(math.exp(-2.0) / 16, rel=1e-14)
        assert p.exact(np.asarray(0.5), 1.0) == pytest.approx(8.4585e-3, abs=1e-7)

    def test_residual_decays_at_fractional_order(self):
        p = manufactured_quartic(2.0, 0.5)
        x, t = 0.3, 0.7
        uxx = math.exp(-2.0 * t) * t**2 * (2 - 12 * x + 12 * x**2)
        res = [abs(pde_residual(p, x, t, steps, uxx=uxx)) for steps in (40, 80, 160, 320)]
        assert res[-1] < 2e-5
        orders = [math.log2(res[i - 1] / res[i]) for i in range(1, len(res))]
        for o in orders:
            assert abs(o - 1.5) <= 0.3  # 2 - alpha = 1.5


@pytest.mark.parametrize("factory,alpha,gamma", [
    (manufactured_sine, 0.3, 0.0),
    (manufactured_sine, 0.7, 2.0),
    (manufactured_quartic, 0.5, 2.0),
])
def test_residual_small_at_random_points(factory, alpha, gamma):
    p = factory(gamma, alpha)
    rng = np.random.default_rng(11)
    scale = max(abs(float(p.forcing(np.asarray(x), 1.0))) for x in np.linspace(0, 1, 51))
    for _ in range(20):
        x = float(rng.uniform(0.05, 0.95))
        t = float(rng.uniform(0.3, 1.0))
        res = pde_residual(p, x, t, 256)
        assert abs(res) < 5e-3 * max(scale, 1.0), (x, t, res)


class TestGaussianPulse:
    def test_peak_and_tails(self):
        p = gaussian_pulse(2.0, 0.3)
        assert p.u0(np.asarray(3.0)) == pytest.approx(1.0, abs=0)
        assert p.u0(np.asarray(5.0)) == pytest.approx(math.exp(-20.0), rel=1e-13)
        assert p.u0(np.asarray(1.0)) == pytest.approx(2.06e-9, rel=1e-2)

    def test_default_domain_is_effectively_compact(self):
        p = gaussian_pulse(2.0, 0.3)
        assert float(p.u0(np.asarray(0.0))) < 1e-19
        assert float(p.u0(np.asarray(6.0))) < 1e-19
        assert p.forcing is None and p.exact is None and p.rho == 0.0

    def test_small_domain_warns(self):
        with pytest.warns(UserWarning, match="not compact"):
            gaussian_pulse(2.0, 0.3, domain=(1.0, 4.0))


class TestLookup:
    def test_labels(self):
        assert by_label("ex4.1", 2.0, 0.5).label == "ex4.1"
        assert by_label("ex4.2", 2.0, 0.5).rho == 1.0
        assert by_label("ex4.3", 2.0, 0.5, domain=(0.0, 6.0)).b == 6.0

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="unknown problem"):
            by_label("ex9.9", 2.0, 0.5)

    def test_fixed_domain_problems_reject_domain_override(self):
        with pytest.raises(ValueError):
            by_label("ex4.1", 2.0, 0.5, domain=(0.0, 2.0))
