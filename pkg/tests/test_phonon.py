import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import j0

from thzqd.errors import ConfigurationError
from thzqd.phonon import (ApproxDotShape, PhononEnvironment, _integrand, axial_overlap,
                          axial_overlap_quad, dimensionless_integral, dimensionless_params,
                          golden_rule_prefactor, lifetime_sweep, radial_overlap,
                          relaxation_rate, write_sweep_csv)

# dimensionless integral at E10 = 12.25 meV from a dense tensor-product rule
# (200-point Gauss-Legendre in r, 80001-point trapezoid in theta)
ORACLE_INTEGRAL = 1.404634e-12


def _dense_integral(alpha, beta, shape, n_theta=20001, n_r=200):
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = (x + 1) * shape.x01 / 2
    w = w * shape.x01 / 2
    th = np.linspace(0, np.pi / 2, n_theta)
    q = np.sin(th)
    rad = (j0(alpha * q[:, None] * r[None, :]) * j0(r) ** 2 * r) @ w / shape.norm_inverse
    return np.trapezoid(q * rad**2 * np.abs(axial_overlap(beta, q)) ** 2, th)


def test_reference_parameters():
    k, a, b = dimensionless_params(12.25)
    assert k == pytest.approx(5.03, rel=0.01)
    assert a == pytest.approx(27, rel=0.01)
    assert b == pytest.approx(64, rel=0.01)
    assert ApproxDotShape().norm_inverse == pytest.approx(0.779, abs=5e-4)


def test_norm_inverse_by_quadrature():
    from scipy.integrate import quad
    s = ApproxDotShape()
    val = quad(lambda r: r * j0(r) ** 2, 0, s.x01, epsabs=1e-14)[0]
    assert val == pytest.approx(s.norm_inverse, rel=1e-12)


@given(st.floats(1.0, 40.0))
def test_params_linear_and_ratio(e10):
    k, a, b = dimensionless_params(e10)
    k2, a2, b2 = dimensionless_params(2 * e10)
    assert (k2, a2, b2) == pytest.approx((2 * k, 2 * a, 2 * b), rel=1e-14)
    s = ApproxDotShape()
    assert a / b == pytest.approx(s.radius_a * math.pi / (s.x01 * s.height_h), rel=1e-14)


def test_invalid_inputs():
    with pytest.raises(ConfigurationError):
        dimensionless_params(0.0)
    with pytest.raises(ConfigurationError):
        PhononEnvironment(mass_density=-1.0)
    with pytest.raises(ConfigurationError):
        radial_overlap(27.0, 1.5)


def test_axial_closed_form_vs_quadrature():
    rng = np.random.default_rng(7)
    betas = rng.uniform(0, 100, 1000)
    qps = rng.uniform(0, 1, 1000)
    worst = max(abs(axial_overlap(b, q) - axial_overlap_quad(b, q)) for b, q in zip(betas, qps))
    assert worst < 1e-10


def test_axial_limits():
    assert axial_overlap(64.0, 1.0) == 0
    # the integrand is odd in z, so the value is purely imaginary
    assert axial_overlap(10.0, 0.3).real == 0
    # resonance with the sin 2z' component near beta sqrt(1-q'^2) = 2
    beta = 64.0
    qs = np.linspace(0.99, 1.0, 20001)
    amp = np.abs(axial_overlap(beta, qs))
    i = int(np.argmax(amp))
    assert 0 < i < len(qs) - 1
    assert beta * math.sqrt(1 - qs[i] ** 2) == pytest.approx(2.0, abs=0.3)


def test_radial_overlap_values():
    assert radial_overlap(27.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    small = radial_overlap(27.19, 1.0)
    assert abs(small) < 1e-3
    assert small == pytest.approx(-8.07e-6, rel=0.01)


def test_radial_overlap_envelope():
    alpha = 27.19
    qs = np.linspace(0.2, 1.0, 41)
    vals = np.array([abs(radial_overlap(alpha, q)) for q in qs])
    bound = 10.0 * (alpha * qs) ** -0.5
    assert np.all(vals < bound)


def test_prefactor_scalings():
    p = golden_rule_prefactor(12.25)
    assert p == pytest.approx(2.5128e15, rel=1e-3)
    assert golden_rule_prefactor(24.5) == pytest.approx(8 * p, rel=1e-12)
    env = PhononEnvironment(mass_density=2 * 5300.0)
    assert golden_rule_prefactor(12.25, env) == pytest.approx(p / 2, rel=1e-12)


def test_integral_against_dense_oracle():
    _, a, b = dimensionless_params(12.25)
    assert dimensionless_integral(a, b) == pytest.approx(ORACLE_INTEGRAL, rel=1e-3)


def test_lifetime_reference():
    rate, tau = relaxation_rate(12.25)
    assert tau == pytest.approx(1 / rate)
    assert 75e-6 < tau < 300e-6
    assert rate / golden_rule_prefactor(12.25) == pytest.approx(ORACLE_INTEGRAL, rel=1e-3)


def test_deformation_potential_scaling():
    t1 = relaxation_rate(12.25)[1]
    t2 = relaxation_rate(12.25, PhononEnvironment(deformation_potential=17.2))[1]
    assert t2 == pytest.approx(t1 / 4, rel=1e-12)


def test_tolerance_tightening_stable():
    t1 = relaxation_rate(12.25)[1]
    t2 = relaxation_rate(12.25, epsrel=1e-3, inner_epsrel=1e-9)[1]
    assert abs(t2 / t1 - 1) < 0.02


def test_integrand_finite_at_endpoint():
    _, a, b = dimensionless_params(12.25)
    v = _integrand(math.pi / 2, a, b, ApproxDotShape(), 1e-8)
    assert np.isfinite(v) and v == 0.0


def test_small_dot_regime():
    shape = ApproxDotShape(13.0 / 20, 40.0 / 20)
    _, a, b = dimensionless_params(12.25, shape=shape)
    assert a == pytest.approx(1.36, abs=0.01) and b == pytest.approx(3.2, abs=0.01)
    val = dimensionless_integral(a, b, shape, epsrel=1e-8)
    assert val == pytest.approx(_dense_integral(a, b, shape, n_theta=4001), rel=1e-5)
    tau_small = relaxation_rate(12.25, shape=shape)[1]
    assert tau_small < 1e-6 * relaxation_rate(12.25)[1]


def test_sweep_continuous_and_converged(tmp_path):
    es = np.linspace(5, 25, 9)
    rows = lifetime_sweep(es)
    fine = lifetime_sweep(es, epsrel=1e-4)
    for r, f in zip(rows, fine):
        assert r["tau_s"] == pytest.approx(f["tau_s"], rel=0.02)
    p = tmp_path / "sweep.csv"
    write_sweep_csv(p, rows)
    lines = p.read_text().splitlines()
    assert lines[0] == "E10_meV,K10_per_nm,alpha,beta,tau_s" and len(lines) == 10
