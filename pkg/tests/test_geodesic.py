from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricbl.convex_core import biconjugate, conjugation_tolerance, uniform_grid
from toricbl.errors import DomainError, NoFiniteSupportError, StencilError
from toricbl.geodesic import (
    Explicit,
    LinearMix,
    Scaling,
    Translation,
    conjugate_affinity_defect,
    endpoint_family,
    family_eval,
    joint_convexity_defect,
    ma_convergence,
    ma_residual,
)
from toricbl.weights import Affine, ExpScaled, IndicatorHalfLine, LogOnePlusExp, MaxAffine, sample

DUAL = uniform_grid(0.0, 8.0, 801)
BASE = uniform_grid(-12.0, 3.0, 15001)


def test_scaling_example():
    assert family_eval(Scaling(ExpScaled(1.0), 0.0), 0.5, 0.0) == 0.5


def test_scaling_is_sigma_at_one():
    x = np.linspace(-3.0, 1.0, 101)
    for c in (0.0, -1.7, 2.3):
        fam = Scaling(LogOnePlusExp(1.0), c)
        vals = np.array([family_eval(fam, 1.0, v) for v in x])
        assert np.array_equal(vals, LogOnePlusExp(1.0)(x))


def test_scaling_direct_formula():
    fam = Scaling(ExpScaled(2.0), -1.0)
    for t, x in ((0.3, -2.0), (0.8, 0.4)):
        assert family_eval(fam, t, x) == pytest.approx(t * 2.0 * math.exp(2.0 * ((x + 1.0) / t - 1.0)),
                                                       rel=1e-14)


def test_scaling_t_domain():
    fam = Scaling(ExpScaled(1.0))
    for t in (0.0, -0.1, 1.0001, math.nan):
        with pytest.raises(DomainError):
            family_eval(fam, t, 0.0)


def test_scaling_limit_at_zero():
    fam = Scaling(LogOnePlusExp(1.0), -1.0)
    x = np.array([-3.0, -1.0, 0.0])
    assert np.allclose(fam.limit_at_zero(x), [0.0, 0.0, 4.0])
    assert family_eval(fam, 1e-3, -3.0) < 1e-12


def test_translation_vector_case():
    s = ExpScaled(1.0)
    fam = Translation((s, LogOnePlusExp(1.0)), 2)
    t, x = 0.3, [0.1, -0.4]
    expected = s(0.1 - t) + LogOnePlusExp(1.0)(-0.4 - t)
    assert family_eval(fam, t, x) == pytest.approx(float(expected), rel=1e-15)
    with pytest.raises(ValueError):
        family_eval(fam, t, [0.0])
    with pytest.raises(ValueError):
        Translation((s,), 2)


def test_translation_conjugate_shift():
    # sup_x x xi - sigma(x - t) = t xi + sigma*(xi)
    fam = Translation(ExpScaled(1.0))
    ref = fam.conjugate(0.0, DUAL, BASE)
    for t in (-1.0, 0.5, 2.0):
        r = fam.conjugate(t, DUAL, BASE)
        assert np.array_equal(r.argmax, ref.argmax)
        assert np.max(np.abs(r.values - t * DUAL - ref.values)) < 1e-12


def test_endpoint_consistency():
    p, d = uniform_grid(-6.0, 2.0, 801), uniform_grid(0.0, 30.0, 3001)
    s0, s1 = IndicatorHalfLine(-1.0), ExpScaled(1.0)
    fam = endpoint_family(s0, s1, p, d)
    x = p[::40]
    for t, w in ((0.0, s0), (1.0, s1)):
        env = biconjugate(sample(w, p), d)
        got = np.array([family_eval(fam, t, v) for v in x])
        assert np.array_equal(got, env(x))


def test_endpoint_matches_scaling_closed_form():
    p, d = uniform_grid(-8.0, 3.0, 11001), uniform_grid(0.0, 20.0, 20001)
    fam = endpoint_family(IndicatorHalfLine(0.0), ExpScaled(1.0), p, d)
    closed = Scaling(ExpScaled(1.0), 0.0)
    xs = uniform_grid(-2.0, 0.0, 41)
    for t in (0.25, 0.5, 0.75, 1.0):
        diff = np.abs(fam.axis_weight(t)(xs) - closed.axis_weight(t)(xs))
        assert np.max(diff) <= conjugation_tolerance(1e-3, 2.0)


def test_endpoint_rejects_nonconvex_endpoint():
    class Bad(Affine):
        def __call__(self, x):
            return -np.asarray(x, dtype=float) ** 2

    with pytest.raises(ValueError, match="not convex"):
        endpoint_family(Bad(0.0), ExpScaled(1.0), uniform_grid(-1, 1, 21), DUAL)


def test_endpoint_affine_point_masses_have_empty_mix():
    # the conjugates of a x and b x are finite only at xi = a and xi = b, so no
    # intermediate mix has finite support
    fam = endpoint_family(Affine(1.0), Affine(2.0), uniform_grid(-4, 4, 81), uniform_grid(0, 3, 31))
    assert family_eval(fam, 0.0, 0.5) == 0.5
    assert family_eval(fam, 1.0, 0.5) == 1.0
    with pytest.raises(NoFiniteSupportError):
        family_eval(fam, 0.5, 0.5)


def test_affinity_examples():
    assert conjugate_affinity_defect(Translation(ExpScaled(1.0)), uniform_grid(0, 1, 11), DUAL,
                                     BASE) <= 1e-8
    assert conjugate_affinity_defect(Scaling(ExpScaled(1.0), 0.0), uniform_grid(0.5, 1, 11), DUAL,
                                     BASE) <= 1e-8
    mix = LinearMix(ExpScaled(1.0), ExpScaled(4.0))
    assert conjugate_affinity_defect(mix, uniform_grid(0, 1, 11), DUAL, BASE) > 10 * 1e-8


def test_affinity_of_endpoint_family_is_exact():
    fam = endpoint_family(IndicatorHalfLine(0.0), LogOnePlusExp(1.0), uniform_grid(-6, 4, 1001),
                          uniform_grid(0.0, 3.9, 391))
    assert conjugate_affinity_defect(fam, uniform_grid(0, 1, 9), uniform_grid(0.0, 3.9, 391)) < 1e-14


def test_affinity_needs_uniform_t_grid():
    with pytest.raises(ValueError):
        conjugate_affinity_defect(Translation(ExpScaled(1.0)), [0.0, 0.1, 0.5], DUAL, BASE)


def test_ma_examples():
    fam = Scaling(ExpScaled(1.0), 0.0)
    assert abs(ma_residual(fam, 0.7, [-0.3])) <= 1e-6
    mix = LinearMix(ExpScaled(1.0), ExpScaled(4.0))
    # det = -(sigma1' - sigma0')^2 = -36 at x = 0: bounded away from zero
    assert ma_residual(mix, 0.5, [0.0]) == pytest.approx(-36.0, rel=1e-4)


def test_ma_at_coarse_step_misses_the_tight_bound():
    # recorded behaviour: at h = 1e-3 the truncation error is about 1e-5 here
    r = abs(ma_residual(Scaling(ExpScaled(1.0), 0.0), 0.7, [-0.3], h=1e-3))
    assert 1e-7 < r < 1e-4


@pytest.mark.parametrize("fam", [Translation(ExpScaled(1.0)), Scaling(LogOnePlusExp(1.0), -1.0),
                                 Translation((ExpScaled(1.0), ExpScaled(2.0)), 2)],
                         ids=["translation", "scaling", "translation-2d"])
def test_ma_convergence_rate(fam):
    x = [-0.7] if fam.k == 1 else [-0.7, -1.1]
    slope, res = ma_convergence(fam, 0.8, x)
    assert abs(slope - 2.0) <= 0.3
    assert np.all(np.abs(np.diff(np.abs(res))) > 0)


def test_ma_refuses_kinks_and_walls():
    with pytest.raises(StencilError, match="kink"):
        ma_residual(Translation(MaxAffine(2.0, 0.0)), 0.0, [1e-5])
    with pytest.raises(StencilError):
        ma_residual(Translation(IndicatorHalfLine(0.0)), 0.0, [-1e-5])
    fam = endpoint_family(IndicatorHalfLine(0.0), ExpScaled(1.0), uniform_grid(-4, 1, 51), DUAL)
    with pytest.raises(StencilError):
        ma_residual(fam, 0.5, [-1.0])
    # away from the kink the cut-off weight is affine in (t, x) along the stencil
    assert ma_residual(Translation(MaxAffine(2.0, 0.0)), 0.0, [0.5]) == pytest.approx(0.0, abs=1e-6)


def test_joint_convexity_examples():
    fam = Scaling(ExpScaled(1.0), -3.0)
    assert joint_convexity_defect(fam, uniform_grid(0.5, 1.0, 11), uniform_grid(-4.0, 0.0, 21)) <= 1e-8
    mix = LinearMix(ExpScaled(1.0), ExpScaled(4.0))
    assert joint_convexity_defect(mix, uniform_grid(0.2, 0.8, 7), uniform_grid(-1.0, 0.5, 7)) > 1e-3
    fam2 = Translation(ExpScaled(1.0), 2)
    assert joint_convexity_defect(fam2, [0.0, 0.5], [uniform_grid(-1, 0, 5)] * 2) <= 1e-8


def test_explicit_family():
    fam = Explicit(lambda t, x: (x[..., 0] - t) ** 2, name="shifted-parabola")
    assert family_eval(fam, 1.0, 3.0) == 4.0
    assert conjugate_affinity_defect(fam, uniform_grid(0, 1, 5), uniform_grid(-2, 2, 41),
                                     uniform_grid(-6, 6, 1201)) < 1e-12


def test_family_json():
    assert Scaling(ExpScaled(1.0), -2.0).to_json() == {
        "variant": "scaling", "sigma": {"variant": "exp_scaled", "params": {"alpha": 1.0}}, "c": -2.0}
    assert Translation(ExpScaled(1.0), 2).to_json()["k"] == 2


# properties ------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3.0, 1.0), st.floats(0.05, 1.0), st.floats(-4.0, 0.5))
def test_scaling_perspective_identity(alpha, c, t, y):
    # psi^t at the transported point t y + (1 - t) c equals t sigma(y)
    fam = Scaling(ExpScaled(alpha), c)
    x = fam.transport(t, np.array([y]))[0]
    assert family_eval(fam, t, x) == pytest.approx(t * alpha * math.exp(2.0 * y), rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-3.0, 0.0))
def test_scaling_conjugates_are_affine(alpha, c):
    fam = Scaling(LogOnePlusExp(alpha), c)
    dual = uniform_grid(0.0, 2.0 * (1.0 + alpha) - 0.1, 201)
    assert conjugate_affinity_defect(fam, uniform_grid(0.3, 1.0, 8), dual,
                                     uniform_grid(-12.0, 12.0, 4801)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-3.0, 0.0), st.floats(0.3, 1.0), st.floats(-3.0, 0.0))
def test_scaling_ma_small(alpha, c, t, dx):
    fam = Scaling(ExpScaled(alpha), c)
    x = c + dx
    # scale-aware: second derivatives are O(psi / t^2)
    scale = max(1.0, family_eval(fam, t, x)) / t**2
    assert abs(ma_residual(fam, t, [x])) <= 1e-6 * scale**2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-1.0, 1.0), st.floats(-3.0, 0.0))
def test_translation_is_jointly_convex(alpha, t, x):
    fam = Translation(LogOnePlusExp(alpha))
    assert joint_convexity_defect(fam, [t], [x], h=1e-2) <= 1e-8
