from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from toricbl.errors import DivergenceError
from toricbl.quadrature import (
    CumulativeLogIntegral,
    QuadratureSpec,
    find_mode,
    integrate_log,
    logsumexp,
)


def test_gaussian():
    r = integrate_log(lambda x: -x * x, -math.inf, math.inf)
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert r.converged and r.rel_error < 1e-12


def test_gamma_integrals():
    # int exp((2m+2) x - alpha e^{2x}) dx = Gamma(m+1) / (2 alpha^{m+1})
    for m, alpha in ((0, 1.0), (3, 2.0), (7, 0.5)):
        r = integrate_log(lambda x: (2 * m + 2) * x - alpha * np.exp(2 * x), -math.inf, math.inf)
        exact = math.gamma(m + 1) / (2.0 * alpha ** (m + 1))
        assert r.value == pytest.approx(exact, rel=1e-13)


def test_half_line_with_kink_breakpoint():
    def logf(x):
        return 2.0 * x - 3.0 * np.maximum(2.0 * x, 0.0)

    r = integrate_log(logf, -math.inf, 1.0, breakpoints=(0.0,))
    exact = 0.5 + (1.0 - math.exp(-4.0)) / 4.0
    assert r.value == pytest.approx(exact, rel=1e-14)


def test_finite_interval_and_mode_at_edge():
    r = integrate_log(lambda x: 2.0 * x, -math.inf, 0.0)
    assert r.value == pytest.approx(0.5, rel=1e-14)
    r = integrate_log(lambda x: np.zeros_like(x), 0.0, 3.0)
    assert r.value == pytest.approx(3.0, rel=1e-14)


def test_infinite_values_are_zero_integrand():
    def logf(x):
        return np.where(x <= 0.5, 2.0 * x, -np.inf)

    r = integrate_log(logf, -math.inf, math.inf, breakpoints=(0.5,))
    assert r.value == pytest.approx(0.5 * math.e, rel=1e-13)


@pytest.mark.parametrize("logf", [lambda x: np.zeros_like(x), lambda x: 0.5 * x,
                                  lambda x: 2.0 * x - 1.0 * np.logaddexp(0, 2 * x)])
def test_divergence_detected(logf):
    with pytest.raises(DivergenceError):
        integrate_log(logf, -math.inf, math.inf)


def test_truncation_radius_doubling_is_consistent():
    logf = lambda x: 4.0 * x - 2.0 * np.logaddexp(0.0, 2.0 * x) * 1.5  # noqa: E731
    a = integrate_log(logf, -math.inf, math.inf, QuadratureSpec())
    b = integrate_log(logf, -math.inf, math.inf, QuadratureSpec(truncation_radius=8192.0))
    assert abs(a.value - b.value) <= a.abs_error + b.abs_error + 1e-15 * a.value
    c = integrate_log(logf, -math.inf, math.inf, QuadratureSpec(drop=72.0))
    assert abs(a.value - c.value) <= a.abs_error + c.abs_error + 1e-15 * a.value


def test_refinement_reports_nonconvergence():
    # a kink that is not declared as a breakpoint only converges algebraically
    spec = QuadratureSpec(max_refine=1)
    r = integrate_log(lambda x: -3.0 * np.abs(x - 0.3), -math.inf, math.inf, spec)
    assert not r.converged
    assert abs(r.value - 2.0 / 3.0) <= 10 * r.abs_error


def test_find_mode():
    xm, gm = find_mode(lambda x: -(x - 1.3) ** 2, -math.inf, math.inf, QuadratureSpec())
    assert xm == pytest.approx(1.3, abs=1e-5) and gm == pytest.approx(0.0, abs=1e-10)
    xm, _ = find_mode(lambda x: x, -math.inf, 2.0, QuadratureSpec())
    assert xm == 2.0


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        QuadratureSpec(nodes_per_panel=8)
    with pytest.raises(ValueError):
        QuadratureSpec(rtol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(drop=10.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_refine=0)
    s = QuadratureSpec(nodes_per_panel=20, rtol=1e-10)
    assert QuadratureSpec.from_json(s.to_json()) == s
    assert QuadratureSpec.from_json(None) == QuadratureSpec()


def test_result_json():
    r = integrate_log(lambda x: -x * x, -math.inf, math.inf)
    rec = r.to_json()
    assert set(rec) == {"value", "abs_error_estimate", "panels", "truncation", "converged"}
    assert rec["truncation"][0] < 0 < rec["truncation"][1]


def test_logsumexp_matches_scipy():
    v = np.array([[-1000.0, -1001.0, 3.0], [-np.inf, -np.inf, -np.inf]])
    assert np.allclose(logsumexp(v[0]), special.logsumexp(v[0]), rtol=1e-15)
    assert np.all(logsumexp(v, axis=1)[1] == -np.inf)


def test_cumulative_matches_scipy():
    logf = lambda x: 4.0 * x - np.exp(2.0 * x)  # noqa: E731
    cum = CumulativeLogIntegral(logf, -3.0, 1.0)
    bs = np.array([-3.0, -1.0, 0.0, 0.7, 1.0])
    got = np.exp(cum(bs))
    for b, v in zip(bs, got):
        exact = integrate.quad(lambda x: math.exp(logf(x)), -60.0, b, epsabs=0, epsrel=1e-13)[0]
        assert v == pytest.approx(exact, rel=1e-12)
    assert cum.converged and cum.max_error <= 1e-13


def test_cumulative_below_window_is_zero():
    cum = CumulativeLogIntegral(lambda x: 2.0 * x - np.exp(2.0 * x), -1.0, 1.0)
    assert cum(np.array([-500.0]))[0] == -math.inf


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.0, 6.0), st.floats(-3.0, 3.0))
def test_gamma_property(alpha, m, shift):
    # shifting the variable does not change the integral
    r = integrate_log(lambda x: (2 * m + 2) * (x - shift) - alpha * np.exp(2 * (x - shift)),
                      -math.inf, math.inf)
    exact = math.exp(math.lgamma(m + 1) - (m + 1) * math.log(alpha)) / 2.0
    assert r.value == pytest.approx(exact, rel=1e-12)
