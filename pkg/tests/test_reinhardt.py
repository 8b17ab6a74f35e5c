from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from toricbl.convex_core import uniform_grid
from toricbl.errors import ConfigError, DivergenceError
from toricbl.geodesic import Scaling, Translation
from toricbl.quadrature import QuadratureSpec
from toricbl.reinhardt_l2 import (
    LogDomain,
    ReinhardtModel,
    ToricWeightSpec,
    base_norm,
    monomial_norm,
    multi_indices,
    norm_curve,
    sigma_mass,
)
from toricbl.weights import Affine, ExpScaled, IndicatorHalfLine, LogOnePlusExp, MaxAffine

PI = math.pi
DISC = LogDomain.below([0.0])
DISC_X_C = ReinhardtModel.product(DISC, LogDomain.full(1))
BIDISC = ReinhardtModel.product(DISC, LogDomain.below([0.0]))


# log-domains -----------------------------------------------------------------


def test_log_domain_kinds():
    assert DISC.contains([[-1.0], [0.0], [0.1]]).tolist() == [True, True, False]
    assert LogDomain.full(2).contains(np.zeros((3, 2))).all()
    hs = LogDomain.from_halfspaces([((1.0, 1.0), 0.0), ((-1.0, 0.0), 2.0)])
    assert hs.contains([[-1.0, 0.5], [1.0, 0.5]]).tolist() == [True, False]
    assert hs.axis_intervals() is None
    box_like = LogDomain.from_halfspaces([((2.0, 0.0), 1.0), ((0.0, -1.0), 3.0)])
    assert box_like.axis_intervals() == [(-math.inf, 0.5), (-3.0, math.inf)]


def test_bounding_box_by_linear_programming():
    tri = LogDomain.from_halfspaces([((-1.0, 0.0), 0.0), ((0.0, -1.0), 0.0), ((1.0, 1.0), 1.0)])
    assert np.allclose(tri.bounding_box(), [(0.0, 1.0), (0.0, 1.0)])


@pytest.mark.parametrize("bad", [
    lambda: LogDomain.box([0.0], [0.0]),
    lambda: LogDomain.box([0.0, 1.0], [1.0]),
    lambda: LogDomain(0),
    lambda: LogDomain(1, "ball"),
    lambda: LogDomain.from_halfspaces([((1.0,), -1.0), ((-1.0,), -1.0)]),
    lambda: LogDomain.from_halfspaces([((1.0, 0.0), 0.0), ((-1.0, 0.0), -1e-6)]),
])
def test_log_domain_rejects_invalid(bad):
    with pytest.raises(ValueError):
        bad()


def test_log_domain_json_round_trip():
    for dom in (DISC, LogDomain.full(2), LogDomain.box([-1.0, -math.inf], [2.0, 0.0]),
                LogDomain.from_halfspaces([((1.0, 1.0), 0.0)])):
        back = LogDomain.from_json(dom.to_json())
        assert back == dom
    assert DISC.to_json() == {"kind": "box", "lower": ["-inf"], "upper": [0.0]}
    with pytest.raises(ConfigError):
        LogDomain.from_json({"kind": "sphere"})


# models ----------------------------------------------------------------------


def test_model_validation():
    with pytest.raises(ValueError, match="bounded above"):
        ReinhardtModel.product(LogDomain.full(1), LogDomain.full(1))
    with pytest.raises(ValueError):
        ReinhardtModel.product(LogDomain.below([0.0] * 3), LogDomain.full(1))
    with pytest.raises(ValueError, match="one-dimensional base"):
        ReinhardtModel.hartogs(LogDomain.below([0.0, 0.0]), ExpScaled(1.0))

    class Decreasing(Affine):
        def __call__(self, x):
            return -np.asarray(x, dtype=float)

    with pytest.raises(ValueError, match="nondecreasing"):
        ReinhardtModel.hartogs(DISC, Decreasing(0.0))
    with pytest.raises(ValueError, match="empty"):
        ReinhardtModel.hartogs(LogDomain.box([1.0], [2.0]), IndicatorHalfLine(0.0))


def test_model_fiber_hull():
    assert ReinhardtModel.hartogs(DISC, Affine(1.0)).fiber_hull() == LogDomain.full(1)
    assert ReinhardtModel.hartogs(DISC, ExpScaled(1.0)).fiber_hull() == LogDomain.below([0.0])
    m = ReinhardtModel.hartogs(LogDomain.box([-1.0], [0.0]), Affine(1.0, 0.5), 2)
    assert m.fiber_hull() == LogDomain.below([0.5, 0.5])
    assert m.n == 3 and not m.is_product


class _Concave(Affine):
    def __call__(self, x):
        return -np.asarray(x, dtype=float) ** 2


def test_weight_spec_validation():
    with pytest.raises(ValueError, match="base weight 0"):
        ToricWeightSpec((_Concave(0.0),), ExpScaled(1.0))
    with pytest.raises(ValueError, match="fiber weight"):
        ToricWeightSpec((), _Concave(0.0))
    with pytest.raises(ValueError, match="fiber weight 1"):
        ToricWeightSpec((), (ExpScaled(1.0), _Concave(0.0)))


# sigma mass ------------------------------------------------------------------


def test_sigma_mass_examples():
    assert sigma_mass(ExpScaled(2.0)).value == pytest.approx(PI / 2, rel=1e-6)
    assert sigma_mass(LogOnePlusExp(1.0)).value == pytest.approx(PI, rel=1e-12)
    assert sigma_mass(Affine(0.0, 0.0), DISC).value == pytest.approx(PI, rel=1e-14)
    two = sigma_mass((ExpScaled(1.0), ExpScaled(2.0)), LogDomain.full(2)).value
    assert two == pytest.approx(PI * PI / 2, rel=1e-13)


def test_sigma_mass_divergence_and_unsupported():
    with pytest.raises(DivergenceError, match="L = ∞"):
        sigma_mass(Affine(0.0, 0.0))
    with pytest.raises(DivergenceError, match="L = ∞"):
        sigma_mass(Affine(1.0, 0.0))
    with pytest.raises(NotImplementedError):
        sigma_mass(ExpScaled(1.0), LogDomain.from_halfspaces([((1.0, 1.0), 0.0)]))
    with pytest.raises(ValueError):
        sigma_mass((ExpScaled(1.0),), LogDomain.full(2))


def test_sigma_mass_indicator_and_cut_off():
    assert sigma_mass(IndicatorHalfLine(0.5)).value == pytest.approx(PI * math.e, rel=1e-13)
    # int_{|w|<1} + int_{|w|>1} |w|^{-2j}: pi + pi/(j-1)
    assert sigma_mass(MaxAffine(4.0)).value == pytest.approx(PI + PI / 3.0, rel=1e-13)


# monomial norms --------------------------------------------------------------


def test_monomial_norm_examples():
    disc = ReinhardtModel.product(LogDomain.below([0.0]), LogDomain.below([0.0]))
    assert monomial_norm((0, 0), disc).value == pytest.approx(PI * PI, rel=1e-14)
    assert monomial_norm((0, 1), disc).value == pytest.approx(PI * PI / 2, rel=1e-14)
    w = ToricWeightSpec((None,), ExpScaled(1.0))
    # base disc contributes pi; fiber: pi m!/alpha^{m+1}
    for m, alpha in ((0, 1.0), (1, 1.0), (3, 2.0)):
        w = ToricWeightSpec((None,), ExpScaled(alpha))
        exact = PI * PI * math.factorial(m) / alpha ** (m + 1)
        assert monomial_norm((0, m), DISC_X_C, w).value == pytest.approx(exact, rel=1e-13)


def test_monomial_norm_divergence():
    with pytest.raises(DivergenceError, match="norm = ∞"):
        monomial_norm((0, 0), DISC_X_C)
    with pytest.raises(DivergenceError, match="norm = ∞"):
        monomial_norm((0, 1), DISC_X_C, ToricWeightSpec((None,), LogOnePlusExp(1.0)))


def test_base_norm_examples():
    assert base_norm((0,), DISC_X_C).value == pytest.approx(PI, rel=1e-14)
    assert base_norm((2,), DISC_X_C).value == pytest.approx(PI / 3, rel=1e-14)
    bidisc_base = ReinhardtModel.product(LogDomain.below([0.0, 0.0]), LogDomain.full(1))
    assert base_norm((0, 0), bidisc_base).value == pytest.approx(PI * PI, rel=1e-14)
    with pytest.raises(ValueError):
        base_norm((0, 0), DISC_X_C)


def test_adding_one_to_a_weight_scales_by_e():
    sig = ToricWeightSpec((None,), ExpScaled(1.0))
    plus = ToricWeightSpec((Affine(0.0, 1.0),), ExpScaled(1.0))
    for m in ((0, 0), (2, 1)):
        a = monomial_norm(m, DISC_X_C, sig).value
        b = monomial_norm(m, DISC_X_C, plus).value
        assert b / a == pytest.approx(math.exp(-1.0), rel=1e-14)


@pytest.mark.parametrize("spec", [QuadratureSpec(), QuadratureSpec(nodes_per_panel=24),
                                  QuadratureSpec(nodes_per_panel=32, panel_width=0.25),
                                  QuadratureSpec(rtol=1e-14, max_refine=10)])
def test_polar_reduction_at_refinement_levels(spec):
    assert sigma_mass(Affine(0.0, 0.0), DISC, spec).value == pytest.approx(PI, rel=1e-13)


def test_truncation_doubling_within_error():
    w = ToricWeightSpec((None,), LogOnePlusExp(2.0))
    a = monomial_norm((1, 1), DISC_X_C, w, QuadratureSpec())
    b = monomial_norm((1, 1), DISC_X_C, w, QuadratureSpec(truncation_radius=8192.0))
    assert abs(a.value - b.value) <= a.abs_error + b.abs_error + 4e-16 * a.value


def test_quantity_json():
    q = monomial_norm((0, 0), DISC_X_C, ToricWeightSpec((None,), ExpScaled(1.0)))
    rec = q.to_json()
    assert rec["value"] == pytest.approx(PI * PI, rel=1e-14)
    assert rec["truncation"][0][0] != "-inf" and rec["converged"]
    assert not q.low_confidence and q.rel_error < 1e-12


# Hartogs ---------------------------------------------------------------------


def _hartogs_oracle(m_base: int, m_fiber: int, alpha: float) -> float:
    """(2 pi)^2 int_{y<0} e^{(2a+2) y} int_{x<-y} e^{(2b+2) x - alpha e^{2x}} dx dy, u(y) = y."""
    b = m_fiber + 1.0

    def inner(y):
        # incomplete gamma: int_{-inf}^{X} e^{2b x - alpha e^{2x}} dx
        s = alpha * math.exp(min(-2.0 * y, 700.0))
        return math.gamma(b) * special.gammainc(b, s) / (2.0 * alpha**b)

    outer = integrate.quad(lambda y: math.exp((2 * m_base + 2) * y) * inner(y), -np.inf, 0.0,
                           epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return (2 * PI) ** 2 * outer


@pytest.mark.parametrize("m", [(0, 0), (1, 0), (0, 2), (3, 1)])
def test_hartogs_matches_scipy_oracle(m):
    model = ReinhardtModel.hartogs(DISC, Affine(1.0, 0.0))
    got = monomial_norm(m, model, ToricWeightSpec((None,), ExpScaled(1.5))).value
    assert got == pytest.approx(_hartogs_oracle(m[0], m[1], 1.5), rel=1e-10)


def test_hartogs_below_product():
    model = ReinhardtModel.hartogs(DISC, ExpScaled(1.0))
    prod = ReinhardtModel.product(DISC, LogDomain.below([0.0]))
    w = ToricWeightSpec((None,), ExpScaled(1.0))
    assert monomial_norm((0, 0), model, w).value < monomial_norm((0, 0), prod, w).value


def test_hartogs_two_dimensional_fiber():
    # u = 0 on the base gives the product disc x bidisc
    model = ReinhardtModel.hartogs(DISC, Affine(0.0, 0.0), 2)
    got = monomial_norm((0, 1, 0), model).value
    assert got == pytest.approx(PI * (PI / 2) * PI, rel=1e-12)


# norm curves -----------------------------------------------------------------


def test_norm_curve_translation_is_rescaled_constant():
    fam = Translation(ExpScaled(1.0))
    nc = norm_curve((0, 0), DISC_X_C, fam, uniform_grid(-3.0, 3.0, 7))
    assert np.allclose(nc.rescaled, PI * PI, rtol=1e-13)
    assert not nc.errors


def test_norm_curve_t0_is_sigma_norm():
    fam = Translation(LogOnePlusExp(1.0))
    nc = norm_curve((1, 0), BIDISC, fam, [0.0])
    direct = monomial_norm((1, 0), BIDISC, ToricWeightSpec((None,), LogOnePlusExp(1.0)))
    assert nc.values[0] == pytest.approx(direct.value, rel=1e-15)


def test_norm_curve_limit_on_bidisc():
    sig = ExpScaled(1.0)
    nc = norm_curve((0, 0), BIDISC, Translation(sig), [-12.0])
    limit = sigma_mass(sig).value * base_norm((0,), BIDISC).value
    assert nc.rescaled[0] == pytest.approx(limit, rel=1e-8)


def test_norm_curve_records_failures():
    nc = norm_curve((0, 0), DISC_X_C, Translation(Affine(0.5)), [0.0, 1.0])
    assert set(nc.errors) == {0, 1} and np.all(np.isnan(nc.values))


def test_multi_indices():
    assert multi_indices(2, 1) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(multi_indices(1, 8)) == 9


# Prekopa property ------------------------------------------------------------

_FAMILIES = st.sampled_from(["translation-exp", "translation-log1p", "scaling-exp", "scaling-log1p"])


def _family(name: str, alpha: float, c: float):
    sig = ExpScaled(alpha) if name.endswith("exp") else LogOnePlusExp(alpha)
    return (Translation(sig), uniform_grid(-2.0, 1.0, 9)) if name.startswith("translation") \
        else (Scaling(sig, c), uniform_grid(0.4, 1.0, 9))


@settings(max_examples=25, deadline=None)
@given(_FAMILIES, st.floats(0.5, 2.0), st.floats(-2.0, 0.0), st.integers(0, 3),
       st.sampled_from(["bidisc", "hartogs"]))
def test_prekopa_log_concavity(name, alpha, c, m, shape):
    fam, t_grid = _family(name, alpha, c)
    model = BIDISC if shape == "bidisc" else ReinhardtModel.hartogs(DISC, ExpScaled(1.0))
    nc = norm_curve((0, m), model, fam, t_grid)
    neg_log = -np.log(nc.values)
    d2 = neg_log[2:] - 2.0 * neg_log[1:-1] + neg_log[:-2]
    assert np.all(d2 >= -1e-8 * max(1.0, np.max(np.abs(neg_log))))
