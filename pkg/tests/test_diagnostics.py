import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fochlab.diagnostics import (
    BlowupMonitor,
    ConservedMonitor,
    DiagnosticSeries,
    ParityError,
    besov_track,
    blowup_accumulator,
    conserved_quantity,
    momentum,
    momentum_norm,
    parity_defect,
    riccati_monitor,
)
from fochlab.dynamics import StepController, Trajectory, integrate
from fochlab.littlewood_paley import BesovIndex, besov_norm
from fochlab.model import FochParams
from fochlab.spectral import Grid1D, derivative

G = Grid1D(2 * np.pi, 256)
UNIT = FochParams(1.0, 1.0, 2.0)


def _fake_trajectory(fields, times):
    return Trajectory(grid=fields[0].grid, params=UNIT, times=np.asarray(times),
                      snapshots=tuple(fields), snapshot_times=np.asarray(times), series={},
                      termination="reached_t_end", final=fields[-1])


class TestSeries:
    def test_alignment(self):
        with pytest.raises(ValueError):
            DiagnosticSeries("x", [0.0, 1.0], [1.0])

    def test_drift(self):
        s = DiagnosticSeries("x", [0, 1, 2], [2.0, 2.1, 1.8])
        assert s.relative_drift() == pytest.approx(0.1)
        assert s.final == 1.8

    def test_csv_round_trips_floats(self, tmp_path):
        vals = [0.1, 1 / 3, 2.0 ** -40]
        s = DiagnosticSeries("x", [0.0, 0.5, 1.0], vals)
        text = s.csv_text()
        assert text.splitlines()[0] == "time,value"
        back = [float(line.split(",")[1]) for line in text.splitlines()[1:]]
        assert back == vals
        path = tmp_path / "x.csv"
        s.to_csv(path)
        assert path.read_bytes() == text.encode()


class TestMomentum:
    def test_sine(self):
        # m = 4 sin x for alpha = beta = 1
        u = G.sample(np.sin)
        assert_allclose(momentum(u, UNIT).values, 4 * np.sin(G.x), atol=1e-13)
        assert momentum_norm(u, UNIT, 1.0) == pytest.approx(16.0, rel=1e-13)
        assert momentum_norm(u, UNIT, 0.5) == pytest.approx(4 * np.sqrt(np.pi), rel=1e-13)
        assert momentum_norm(u, UNIT, 0.0) == pytest.approx(4.0, rel=1e-13)

    @given(st.floats(0.0, 0.99), st.floats(0.0, 6.3))
    def test_exact_l1_shifted_cosine(self, c, phase):
        # int |c + cos(x + phase)| = 2 (2 sqrt(1 - c^2) + 2 c asin(c))
        u = G.sample(lambda x: c + np.cos(x + phase))
        expected = 4 * np.sqrt(1 - c * c) + 4 * c * np.arcsin(c)
        assert momentum_norm(u, FochParams(1e-8, 1e-8, 1.0), 1.0) == pytest.approx(expected, rel=1e-10)

    def test_exact_l1_sign_definite(self):
        u = G.sample(lambda x: 2.0 + np.sin(3 * x))
        assert momentum_norm(u, FochParams(1e-8, 1e-8, 1.0), 1.0) == pytest.approx(4 * np.pi, rel=1e-12)


class TestMonitors:
    def test_blowup_live_matches_posthoc(self):
        u0 = G.sample(lambda x: 0.2 * np.sin(x))
        traj = integrate(u0, UNIT, StepController(t_end=0.3), hooks=[BlowupMonitor(UNIT)])
        assert_allclose(traj.series["blowup_accumulator"].values, blowup_accumulator(traj).values, rtol=1e-14)

    def test_critical_drops_uxx(self):
        crit = FochParams(1.0, 1.0, 5.0 / 3.0)
        assert not BlowupMonitor(crit).uses_uxx and BlowupMonitor(UNIT).uses_uxx

    def test_accumulator_exact_for_steady_state(self):
        # constant velocity: ||u_x|| = 0, accumulator stays 0
        traj = integrate(G.constant(0.3), UNIT, StepController(t_end=0.2))
        assert np.all(blowup_accumulator(traj).values == 0.0)

    def test_conserved_live_matches_posthoc(self):
        p = FochParams(1.0, 1.0, 1.0)
        traj = integrate(G.sample(lambda x: 0.05 * np.sin(x)), p, StepController(t_end=0.2),
                         hooks=[ConservedMonitor(p, 1.0)])
        live = traj.series["momentum_L1"]
        assert_allclose(live.values, conserved_quantity(traj, 1.0).values, rtol=1e-14)
        assert live.relative_drift() < 1e-5

    @pytest.mark.parametrize("b", [-0.1, 1.5])
    def test_b_range(self, b):
        with pytest.raises(ValueError):
            ConservedMonitor(UNIT, b)
        traj = _fake_trajectory([G.zeros()], [0.0])
        with pytest.raises(ValueError):
            conserved_quantity(traj, b)

    def test_no_snapshots(self):
        traj = integrate(G.sample(np.sin), UNIT, StepController(t_end=0.1, snapshot_stride=0))
        with pytest.raises(ValueError):
            blowup_accumulator(traj)


class TestParityAndRiccati:
    def test_parity_defect(self):
        assert parity_defect(G.sample(lambda x: np.sin(x - np.pi))) < 1e-15
        assert parity_defect(G.sample(np.cos)) == pytest.approx(2.0)

    def test_rejects_non_odd_data(self):
        traj = _fake_trajectory([G.sample(np.cos)], [0.0])
        with pytest.raises(ValueError):
            riccati_monitor(traj)

    def test_parity_loss_raises(self):
        odd = G.sample(lambda x: np.sin(x - np.pi))
        broken = G.sample(lambda x: np.sin(x - np.pi) + 1e-3 * np.cos(x))
        with pytest.raises(ParityError):
            riccati_monitor(_fake_trajectory([odd, broken], [0.0, 0.1]))

    def test_values_at_midpoint(self):
        u0 = G.sample(lambda x: -0.2 * np.sin(x - np.pi))
        traj = integrate(u0, UNIT, StepController(t_end=0.2))
        ric = riccati_monitor(traj)
        assert ric.values[0] == pytest.approx(-0.2, abs=1e-14)
        assert ric.meta["max_abs_u_x0"] < 1e-12
        assert ric.meta["max_abs_uxx_x0"] < 1e-10
        assert ric.meta["max_parity_defect"] < 1e-12


class TestBesovTrack:
    def test_series(self):
        traj = integrate(G.sample(lambda x: 0.1 * np.cos(4 * x)), UNIT, StepController(t_end=0.1))
        idx = BesovIndex(1.0, np.inf, 1.0)
        out = besov_track(traj, [idx], weighted=True, field_fn=lambda f: derivative(f, 1))
        assert [s.name for s in out] == ["B1_inf_1", "weighted_sup"]
        assert out[0].values[0] == pytest.approx(besov_norm(derivative(traj.snapshots[0], 1), idx))
        assert len(out[1]) == len(traj.snapshot_times)
