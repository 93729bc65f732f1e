import math

import numpy as np
import pytest
from scipy.integrate import quad

from opinion_kinetics import BetaEquilibrium, KineticParams, build_grid, log_normalization

from oracles import QUAD_OPTS, beta_density, quad_mass


def test_log_normalization_uniform():
    # lam = 1, m = 0 is the uniform density 1/2
    assert log_normalization(KineticParams(1.0, 0.0)) == pytest.approx(math.log(0.5), abs=1e-15)


def test_log_normalization_arcsine():
    # lam = 2, m = 0: integrand (1 - y^2)^(-1/2) integrates to pi
    p = KineticParams(2.0, 0.0)
    assert log_normalization(p) == pytest.approx(-math.log(math.pi), abs=1e-13)
    val, _ = quad(lambda y: (1.0 - y * y) ** -0.5, -1.0, 1.0, **QUAD_OPTS)
    assert val == pytest.approx(math.pi, rel=1e-9)


@pytest.mark.parametrize("lam,m", [(0.5, 0.5), (0.5, 0.2), (1.0, 0.3), (1.7, 0.1), (0.25, -0.6)])
def test_log_normalization_quadrature_oracle(lam, m):
    p = KineticParams(lam, m)
    a = (1.0 - m) / lam
    b = (1.0 + m) / lam
    z, _ = quad(lambda y: (1.0 - y) ** (a - 1.0) * (1.0 + y) ** (b - 1.0),
                -1.0, 1.0, **QUAD_OPTS)
    assert log_normalization(p) == pytest.approx(-math.log(z), rel=1e-10)


def test_equilibrium_value_examples():
    eq = BetaEquilibrium.from_params(KineticParams(1.0, 0.0))
    assert eq.value(0.3) == pytest.approx(0.5, abs=1e-15)
    eq2 = BetaEquilibrium.from_params(KineticParams(2.0, 0.0))
    assert eq2.value(0.0) == pytest.approx(1.0 / math.pi, rel=1e-13)
    with pytest.raises(ValueError):
        eq.value(1.0)
    with pytest.raises(ValueError):
        eq.log_value(-1.0)


@pytest.mark.parametrize("lam,m", [(0.2, 0.0), (0.5, 0.2), (1.0, 0.0), (1.5, 0.3), (1.9, -0.7)])
def test_unit_mass_by_quadrature(lam, m):
    eq = BetaEquilibrium.from_params(KineticParams(lam, m))
    assert quad_mass(eq.value) == pytest.approx(1.0, abs=1e-8)


def test_mirror_symmetry_exact_in_log_space():
    y = np.linspace(-0.999, 0.999, 401)
    eq_plus = BetaEquilibrium.from_params(KineticParams(0.7, 0.35))
    eq_minus = BetaEquilibrium.from_params(KineticParams(0.7, -0.35))
    assert np.array_equal(eq_plus.log_value(y), eq_minus.log_value(-y))


def test_moments_against_quadrature():
    p = KineticParams(0.8, 0.3)
    eq = BetaEquilibrium.from_params(p)
    v = beta_density(p.lam, p.m)
    mean, _ = quad(lambda y: y * v(y), -1.0, 1.0, **QUAD_OPTS)
    second, _ = quad(lambda y: y * y * v(y), -1.0, 1.0, **QUAD_OPTS)
    assert eq.mean() == pytest.approx(mean, abs=1e-10)
    assert eq.variance() == pytest.approx(second - mean**2, abs=1e-10)


def test_on_grid_normalization_flag():
    eq = BetaEquilibrium.from_params(KineticParams(0.5, 0.2))
    g = build_grid(200)
    assert eq.on_grid(g).is_normalized(tol=1e-12)
    raw = eq.on_grid(g, renormalize=False)
    assert abs(raw.mass() - 1.0) < 1e-3  # close, but not flagged exact
