import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import fields
from fochlab.littlewood_paley import BesovIndex
from fochlab.model import (
    B_CRITICAL,
    FochParams,
    ResolutionWarning,
    RhsOperator,
    f_norm_ratio,
    f_terms,
    m_to_u,
    p_of_d,
    resolution_defect,
    rhs,
    u_to_m,
)
from fochlab.spectral import Grid1D, RealField, norm_lp
from fochlab.validation import seeded_corpus

G = Grid1D(2 * np.pi, 128)
UNIT = FochParams(1.0, 1.0, 2.0)
CRIT = FochParams(1.0, 1.0, 5.0 / 3.0)
params_st = st.builds(
    FochParams,
    alpha=st.floats(0.2, 2.0),
    beta=st.floats(0.2, 2.0),
    b=st.sampled_from([0.0, 0.5, 1.0, 5.0 / 3.0, 2.0, 3.0]),
)


class TestParams:
    @pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.0, 0.0)])
    def test_degenerate_rejected(self, alpha, beta):
        with pytest.raises(ValueError):
            FochParams(alpha, beta, 2.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            FochParams(1.0, 1.0, np.inf)

    def test_critical_snapping(self):
        assert FochParams(b=1.6666666666666667).is_critical
        assert FochParams(b=5 / 3 + 1e-15).b == B_CRITICAL
        assert not FochParams(b=1.6667).is_critical

    def test_coefficients(self):
        c1, c2, c3, c4 = FochParams(2.0, 0.5, 1.0).coefficients
        assert (c1, c2, c3, c4) == pytest.approx((0.5, 4.25, 1.0, -2.0))

    def test_critical_c3_exact_zero(self):
        assert CRIT.coefficients[2] == 0.0


class TestMultipliers:
    def test_constant_fixed(self):
        assert_allclose(p_of_d(G.constant(3.0), UNIT).values, 3.0)
        assert_allclose(u_to_m(G.constant(3.0), UNIT).values, 3.0)

    def test_p_cos2x(self):
        f = G.sample(lambda x: np.cos(2 * x))
        assert_allclose(p_of_d(f, UNIT).values, np.cos(2 * G.x) / 25, atol=1e-16)

    def test_m_cos(self):
        # the symbol grows like k^4, so sampling round-off is amplified by (n/2)^4; keep n small
        g = Grid1D(2 * np.pi, 16)
        assert_allclose(u_to_m(g.sample(np.cos), UNIT).values, 4 * np.cos(g.x), atol=1e-12)

    @given(fields(), params_st)
    def test_roundtrip(self, f, params):
        assert_allclose(m_to_u(u_to_m(f, params), params).values, f.values, atol=1e-12)


class TestFTerms:
    def test_F1_oracle(self):
        F1 = f_terms(G.sample(np.cos), UNIT).F1
        assert_allclose(F1.values, -np.sin(2 * G.x) / 25, atol=1e-10)

    @given(fields())
    def test_F3_vanishes_at_critical(self, u):
        assert np.all(f_terms(u, CRIT).F3.values == 0.0)

    @given(st.floats(-5, 5), params_st)
    def test_constant(self, c, params):
        for term in f_terms(G.constant(c), params).__dict__.values():
            assert norm_lp(term, np.inf) < 1e-13 * max(1.0, c * c)

    @given(fields(scale=0.5), st.floats(-3, 3), params_st)
    def test_quadratic_scaling(self, u, lam, params):
        a = f_terms(u * lam, params)
        b = f_terms(u, params)
        for name in ("F1", "F2", "F3", "F4"):
            got, ref = getattr(a, name).rfft, getattr(b, name).rfft * lam ** 2
            assert np.max(np.abs(got - ref)) <= 1e-12 * (1 + np.max(np.abs(ref)))

    def test_F2_F4_single_mode(self):
        # u = sin x: u_x^2 = (1 + cos 2x)/2, P(D) cos 2x = cos 2x / 25
        u = G.sample(np.sin)
        T = f_terms(u, UNIT)
        c1, c2, c3, c4 = UNIT.coefficients
        assert_allclose(T.F2.values, c2 * (-np.sin(2 * G.x) / 25), atol=1e-14)
        assert_allclose(T.F4.values, c4 * 8 * np.sin(2 * G.x) / 50, atol=1e-14)

    def test_resolution_warning(self):
        g = Grid1D(2 * np.pi, 64)
        u = g.sample(lambda x: np.cos(30 * x))
        assert resolution_defect(u) > 0.5
        with warnings.catch_warnings():
            warnings.simplefilter("error", ResolutionWarning)
            with pytest.raises(ResolutionWarning):
                f_terms(u, UNIT)
            f_terms(u, UNIT, check_resolution=False)

    def test_resolved_field_no_warning(self):
        assert resolution_defect(G.sample(np.sin)) < 1e-30


class TestRhs:
    @given(st.floats(-5, 5), params_st)
    def test_constant_is_fixed_point(self, c, params):
        assert norm_lp(rhs(G.constant(c), params), np.inf) < 1e-13 * max(1.0, c * c)

    @given(fields(), params_st)
    def test_parity(self, f, params):
        odd = RealField(G, 0.5 * (f.values - f.reflect().values))
        r = rhs(odd, params)
        assert norm_lp(r + r.reflect(), np.inf) < 1e-10

    def test_burgers_mode(self):
        u = G.sample(np.sin)
        assert_allclose(rhs(u, UNIT, disable_F=True).values, -np.sin(G.x) * np.cos(G.x), atol=1e-14)

    @given(fields())
    def test_critical_matches_skipped_F3(self, u):
        T = f_terms(u, CRIT)
        without_F3 = rhs(u, CRIT, disable_F=True) - (T.F1 + T.F2 + T.F4)
        assert_allclose(rhs(u, CRIT).values, without_F3.values, atol=1e-13)

    @given(fields(), params_st)
    def test_fast_operator_agrees(self, u, params):
        op = RhsOperator(G, params)
        fast = RealField.from_rfft(G, op(u.rfft))
        slow = rhs(u, params)
        assert norm_lp(fast - slow, np.inf) <= 1e-12 * (1 + norm_lp(slow, np.inf))


class TestNormRatio:
    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            f_norm_ratio(G.zeros(), UNIT, BesovIndex(3, 2, 2))

    @given(st.floats(1e-3, 10))
    def test_amplitude_independent(self, eps):
        idx = BesovIndex(3, 2, 2)
        a = f_norm_ratio(G.sample(np.cos) * eps, UNIT, idx)
        b = f_norm_ratio(G.sample(np.cos), UNIT, idx)
        assert a == pytest.approx(b, rel=1e-8)

    @pytest.mark.parametrize("params,s", [(UNIT, 3.0), (CRIT, 2.0)])
    def test_corpus_stable_under_doubling(self, params, s):
        idx = BesovIndex(s, 2, 2)
        coarse = max(f_norm_ratio(u, params, idx) for u in seeded_corpus(Grid1D(2 * np.pi, 128)))
        fine = max(f_norm_ratio(u, params, idx) for u in seeded_corpus(Grid1D(2 * np.pi, 256)))
        assert np.isfinite(coarse)
        assert abs(fine - coarse) / coarse < 0.1
