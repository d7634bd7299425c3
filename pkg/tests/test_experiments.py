import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import fochlab.experiments as ex
from fochlab.diagnostics import parity_defect
from fochlab.dynamics import StepController
from fochlab.littlewood_paley import block, low_pass
from fochlab.model import FochParams
from fochlab.spectral import Grid1D, derivative, eval_at, norm_lp


class TestConfigs:
    def test_ill1_defaults(self):
        cfg = ex.Ill1Config(5)
        assert cfg.n == 2 ** 13 and cfg.carrier == 2 ** 10
        assert cfg.horizon == pytest.approx(2 / math.sqrt(5))
        assert cfg.grid.j_max >= cfg.N + 5

    def test_ill1_underresolved(self):
        with pytest.raises(ValueError):
            ex.Ill1Config(5, n=2 ** 11)

    def test_ill2_defaults(self):
        cfg = ex.Ill2Config(8, q=3.0)
        assert cfg.n == 2 ** 12
        assert cfg.horizon == pytest.approx(1 / math.log(8))
        assert cfg.exponent == pytest.approx(0.5)
        assert ex.Ill2Config(8, q=math.inf).exponent == 1.0

    @pytest.mark.parametrize("kw", [{"N": 3}, {"N": 8, "q": 1.0}, {"N": 8, "n": 2 ** 10}])
    def test_ill2_rejects(self, kw):
        with pytest.raises(ValueError):
            ex.Ill2Config(**kw)


class TestDataConstruction:
    def test_half_box_indicator(self):
        g = Grid1D(2 * np.pi, 1024)
        h = ex.half_box_indicator(g)
        # Gibbs aside, the projection is 1 on the right half and 0 on the left
        assert eval_at(h, [1.5 * np.pi])[0] == pytest.approx(1.0, abs=2e-3)
        assert eval_at(h, [0.5 * np.pi])[0] == pytest.approx(0.0, abs=2e-3)
        # low-pass is independent of the grid
        coarse = low_pass(ex.half_box_indicator(Grid1D(2 * np.pi, 256)), 5)
        fine = low_pass(h, 5)
        x = np.linspace(0, 6, 50)
        assert_allclose(eval_at(coarse, x), eval_at(fine, x), atol=1e-14)

    def test_phi_tilde(self):
        assert ex.phi_tilde(1.6) == 1.0 and ex.phi_tilde(-1.7) == 1.0
        assert ex.phi_tilde(1.39) == 0.0 and ex.phi_tilde(1.91) == 0.0

    def test_ill1_data_lives_in_carrier_blocks(self):
        cfg = ex.Ill1Config(5)
        u0 = ex.build_ill1_data(cfg)
        total = norm_lp(u0, 2)
        carrier = block(u0, cfg.N + 4) + block(u0, cfg.N + 5)
        assert norm_lp(u0 - carrier, 2) < 1e-12 * total

    def test_ill1_amplitude(self):
        # |u0| ~ N^-0.1 2^(N+5) / (1 + 2^(2N+10)) (1 + N^-0.1)
        cfg = ex.Ill1Config(5)
        u0 = ex.build_ill1_data(cfg)
        k = cfg.carrier
        bound = 5 ** -0.1 * k / (1 + k * k) * (1 + 5 ** -0.1) * 1.2
        assert norm_lp(u0, np.inf) < bound

    @pytest.mark.parametrize("q", [2.0, math.inf])
    def test_ill2_odd_about_midpoint(self, q):
        u0 = ex.build_ill2_data(ex.Ill2Config(8, q))
        assert parity_defect(u0) < 1e-12 * max(1.0, u0.max_abs())

    def test_ill2_blocks(self):
        cfg = ex.Ill2Config(8)
        u0 = ex.build_ill2_data(cfg)
        for j in range(2, 9):
            assert norm_lp(block(u0, j), 2) > 0
        assert norm_lp(block(u0, 9), 2) < 1e-16
        assert norm_lp(block(u0, 1), 2) < 1e-16


class TestEstimates:
    def test_ill1_refinement_invariant(self):
        cfg = ex.Ill1Config(5)
        a = ex.ill1_estimates(cfg, refine=2)
        b = ex.ill1_estimates(cfg, refine=4)
        assert b["ux2_B0_inf_1"] == pytest.approx(a["ux2_B0_inf_1"], rel=1e-10)

    def test_ill1_grid_doubling(self):
        a = ex.ill1_estimates(ex.Ill1Config(5))
        b = ex.ill1_estimates(ex.Ill1Config(5, n=2 ** 14))
        for key in ("B1_inf_1", "ux2_B0_inf_1", "weighted_ux"):
            assert b[key] == pytest.approx(a[key], rel=1e-8)

    @pytest.mark.parametrize("q", [2.0, 3.0, math.inf])
    @pytest.mark.parametrize("N", [8, 11])
    def test_blockwise_matches_grid(self, N, q):
        grid = ex.ill2_estimates(ex.Ill2Config(N, q))
        bw = ex.ill2_estimates_blockwise(N, q)
        assert bw["B32_2_q"] == pytest.approx(grid["B32_2_q"], rel=1e-12)
        assert bw["ux_x0"] == pytest.approx(grid["ux_x0"], rel=1e-12)

    def test_blockwise_rescaling(self, monkeypatch):
        # Poisson summation: a coarser base step leaves the block sums unchanged
        ref = ex.ill2_estimates_blockwise(14)
        monkeypatch.setattr(ex, "_DIRECT_SUM_MAX", 10)
        coarse = ex.ill2_estimates_blockwise(14)
        assert coarse["B32_2_q"] == pytest.approx(ref["B32_2_q"], rel=1e-12)
        assert coarse["ux_x0"] == pytest.approx(ref["ux_x0"], rel=1e-12)

    def test_ill2_ux_positive(self):
        est = ex.ill2_estimates(ex.Ill2Config(8))
        assert est["ux_x0"] > 0
        u0 = ex.build_ill2_data(ex.Ill2Config(8))
        assert est["ux_x0"] == pytest.approx(eval_at(derivative(u0, 1), [u0.grid.midpoint])[0], rel=1e-12)


class TestRuns:
    def test_inflation_rejects_noncritical(self):
        with pytest.raises(ValueError):
            ex.run_inflation(ex.Ill2Config(8), FochParams(1, 1, 2))

    def test_inflation_rejects_unknown_config(self):
        with pytest.raises(TypeError):
            ex.run_inflation(object())

    def test_ill2_report(self):
        rep = ex.run_inflation(ex.Ill2Config(8))
        assert rep.kind == "ill2" and rep.norm_label == "B1.5_2_2"
        assert rep.growth_ratio >= 1.0
        assert rep.initial_norm == pytest.approx(ex.ill2_estimates(ex.Ill2Config(8))["B32_2_q"], rel=1e-12)
        assert rep.termination == "reached_t_end"
        assert rep.t_final == pytest.approx(rep.horizon)
        assert set(rep.series) == {"B1.5_2_2", "blowup_accumulator"}
        assert rep.scalars()["steepening"] == rep.steepening

    def test_ill2_report_reproducible(self):
        a = ex.run_inflation(ex.Ill2Config(8))
        b = ex.run_inflation(ex.Ill2Config(8))
        assert a.series["B1.5_2_2"].csv_text() == b.series["B1.5_2_2"].csv_text()

    def test_conservation_rejects_b(self):
        with pytest.raises(ValueError):
            ex.run_conservation_study(1.5)

    def test_conservation_small(self):
        rep = ex.run_conservation_study(0.5, t_end=0.1, n=256, ctrl=StepController(t_end=0.1, dt_max=0.02))
        assert rep.drift < 1e-5
        assert rep.identity_defect < 1e-4
        assert rep.y_xi_min > 0.5
        assert rep.scalars()["termination"] == "reached_t_end"
