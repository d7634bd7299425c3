"""Reconstructed ill-posedness data and the scripted studies.

The origin of the line maps to the box midpoint x0 = D/2, so oddness about the
origin becomes oddness about x0 (equivalently under x -> D - x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .diagnostics import (
    BlowupMonitor,
    DiagnosticSeries,
    blowup_accumulator,
    besov_track,
    conserved_quantity,
    momentum,
)
from .dynamics import StepController, integrate
from .lagrangian import conservation_identity, flow_map
from .littlewood_paley import BesovIndex, besov_norm, low_pass, transition, weighted_sup_norm
from .model import FochParams
from .spectral import Grid1D, RealField, apply_symbol, derivative, multiply_dealiased

__all__ = [
    "Ill1Config",
    "Ill2Config",
    "phi_tilde",
    "half_box_indicator",
    "build_ill1_data",
    "build_ill2_data",
    "ill1_estimates",
    "ill2_estimates",
    "ill2_estimates_blockwise",
    "InflationReport",
    "run_inflation",
    "ConservationReport",
    "run_conservation_study",
]


def _pow2(n: int) -> int:
    return int(round(math.log2(n)))


@dataclass(frozen=True)
class Ill1Config:
    """High-frequency carrier data; the carrier sits at 2^(N+5).

    The default grid n = 2^(N+8) puts the carrier's blocks (N+4, N+5) inside
    the admissible range.  Experiments step with ``dt_max`` rather than the
    advective CFL because the data amplitude is ~2^-(N+5).
    """

    N: int
    n: Optional[int] = None
    length: float = 2 * math.pi
    horizon: Optional[float] = None
    dt_max: float = 5e-3
    snapshots: int = 40

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise ValueError(f"N must be an integer >= 4, got {self.N}")
        if self.n is None:
            object.__setattr__(self, "n", 2 ** (self.N + 8))
        if self.horizon is None:
            object.__setattr__(self, "horizon", 2.0 / math.sqrt(self.N))
        if self.grid.j_max < self.N + 5:
            raise ValueError(
                f"n = {self.n} does not resolve the carrier 2^{self.N + 5}: "
                f"need j_max >= {self.N + 5}, have {self.grid.j_max}")

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.length, self.n)

    @property
    def carrier(self) -> int:
        return 2 ** (self.N + 5)


@dataclass(frozen=True)
class Ill2Config:
    """Sum of single-block bumps h_n, n = 2..N; the top bump lives near 2^N."""

    N: int
    q: float = 2.0
    n: Optional[int] = None
    length: float = 2 * math.pi
    horizon: Optional[float] = None
    dt_max: float = 5e-3
    snapshots: int = 40

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise ValueError(f"N must be an integer >= 4, got {self.N}")
        if not self.q > 1:
            raise ValueError(f"q must lie in (1, inf], got {self.q}")
        if self.n is None:
            object.__setattr__(self, "n", 2 ** (self.N + 4))
        if self.horizon is None:
            object.__setattr__(self, "horizon", 1.0 / math.log(self.N))
        if self.grid.j_max < self.N + 1:
            raise ValueError(
                f"n = {self.n} does not resolve block {self.N}: need j_max >= {self.N + 1}")

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.length, self.n)

    @property
    def exponent(self) -> float:
        """(q - 1)/(q + 1), the growth rate of u0_x(x0) in N."""
        return 1.0 if math.isinf(self.q) else (self.q - 1.0) / (self.q + 1.0)


def phi_tilde(xi) -> np.ndarray:
    """Even bump equal to 1 on 1.5 <= |xi| <= 1.8, supported in 1.4 <= |xi| <= 1.9."""
    a = np.abs(np.asarray(xi, dtype=float))
    return (1.0 - transition((a - 1.4) / 0.1)) * transition((a - 1.8) / 0.1)


def half_box_indicator(grid: Grid1D) -> RealField:
    """Fourier projection of 1_[D/2, D) onto the grid's modes.

    Coefficients are the exact ones of the step (c_0 = 1/2, c_m = i/(pi m) for
    odd m), so any later low-pass is independent of n.
    """
    m = np.arange(grid.n // 2 + 1)
    c = np.zeros(m.size, dtype=complex)
    c[0] = 0.5
    odd = m % 2 == 1
    c[odd] = 1j / (np.pi * m[odd])
    c[-1] = 0.0
    return RealField.from_rfft(grid, c)


def build_ill1_data(cfg: Ill1Config) -> RealField:
    """u0 = -N^-0.1 (1 - d_xx)^-1 d_x [cos(2^(N+5) x) (1 + N^-0.1 S_N h)]."""
    grid = cfg.grid
    eps = cfg.N ** -0.1
    envelope = 1.0 + eps * low_pass(half_box_indicator(grid), cfg.N).values
    # both factors are band-limited well below Nyquist, so the sampled product is exact
    v = RealField(grid, np.cos(cfg.carrier * grid.x) * envelope)
    w = apply_symbol(v, lambda k: 1.0 / (1.0 + k ** 2))
    return derivative(w, 1) * (-eps)


def build_ill2_data(cfg: Ill2Config) -> RealField:
    """u0 = -sum_{n=2}^N h_n / (ln N 2^(2n) n^(2/(1+q))), F(h_n)(xi) = i 2^-n xi phi~(2^-n xi).

    Each h_n is synthesized from its Fourier transform, centred at x0.
    """
    grid = cfg.grid
    k = grid.k
    shift = np.exp(-1j * k * grid.midpoint)
    power = 0.0 if math.isinf(cfg.q) else 2.0 / (1.0 + cfg.q)
    c = np.zeros(k.size, dtype=complex)
    for j in range(2, cfg.N + 1):
        hat = 1j * 2.0 ** -j * k * phi_tilde(2.0 ** -j * k)
        c += hat / (2.0 ** (2 * j) * j ** power)
    c *= -shift / (grid.length * math.log(cfg.N))
    c[-1] = 0.0
    return RealField.from_rfft(grid, c)


def _refined(f: RealField, factor: int = 2) -> RealField:
    """The same trigonometric polynomial sampled on a finer grid."""
    fine = f.grid.refined(factor)
    c = np.zeros(fine.n // 2 + 1, dtype=complex)
    c[: f.grid.n // 2] = f.rfft[: f.grid.n // 2]
    c[f.grid.n // 2] = 0.5 * f.rfft[-1]
    return RealField.from_rfft(fine, c)


def ill1_estimates(cfg: Ill1Config, u0: RealField | None = None, refine: int = 2) -> dict:
    """Norms entering the high-frequency estimates.

    u0_x^2 reaches frequency 2^(N+6), one block beyond the data grid's j_max,
    so the square is formed on a grid ``refine`` times finer.
    """
    u0 = u0 if u0 is not None else build_ill1_data(cfg)
    fine = _refined(u0, refine)
    ux = derivative(fine, 1)
    sq = multiply_dealiased(ux, ux)
    N = cfg.N
    b1 = besov_norm(u0, BesovIndex(1.0, math.inf, 1.0))
    sq_norm = besov_norm(sq, BesovIndex(0.0, math.inf, 1.0))
    wsn = weighted_sup_norm(derivative(u0, 1))
    return {
        "N": N,
        "n": cfg.n,
        "B1_inf_1": b1,
        "B1_inf_1_scaled": b1 * N ** 0.1,
        "ux2_B0_inf_1": sq_norm,
        "ux2_B0_inf_1_scaled": sq_norm * N ** -0.6,
        "weighted_ux": wsn,
        "weighted_ux_scaled": wsn * N ** -(0.9 + 0.01),
    }


def ill2_estimates(cfg: Ill2Config, u0: RealField | None = None) -> dict:
    u0 = u0 if u0 is not None else build_ill2_data(cfg)
    N = cfg.N
    lnN = math.log(N)
    norm = besov_norm(u0, BesovIndex(1.5, 2.0, cfg.q))
    ux0 = float(derivative(u0, 1).values[cfg.n // 2])
    return {
        "N": N,
        "q": cfg.q,
        "n": cfg.n,
        "B32_2_q": norm,
        "B32_2_q_scaled": norm * lnN,
        "ux_x0": ux0,
        "ux_x0_scaled": ux0 * lnN * N ** -cfg.exponent,
    }


_DIRECT_SUM_MAX = 22


def _profile_sum(j: int, fn) -> float:
    """sum over integers k >= 1 of fn(k 2^-j), for fn supported in [1.4, 1.9].

    For smooth compactly supported fn, Poisson summation makes the step-2^-j
    sum equal to 2^(j - J) times the step-2^-J sum (J <= j) up to an
    exponentially small aliasing term, so blocks above 2^22 reuse the
    step-2^-22 sum.
    """
    J = min(j, _DIRECT_SUM_MAX)
    k = np.arange(int(1.4 * 2 ** J) - 1, int(1.9 * 2 ** J) + 3, dtype=float)
    return float(np.sum(fn(k * 2.0 ** -J))) * 2.0 ** (j - J)


def ill2_estimates_blockwise(N: int, q: float = 2.0) -> dict:
    """The estimates of :func:`ill2_estimates` on the 2 pi box, without a grid.

    Each h_n lives where phi(2^-n .) = 1 (block n only), so the block L^2 norms
    and u0_x(x0) reduce to one-dimensional sums over the bump profile.  This
    reaches N far beyond any grid that could hold the data.
    """
    D = 2 * math.pi
    exponent = 1.0 if math.isinf(q) else (q - 1.0) / (q + 1.0)
    power = 0.0 if math.isinf(q) else 2.0 / (1.0 + q)
    lnN = math.log(N)
    seq, ux0 = [], 0.0
    for j in range(2, N + 1):
        w = 1.0 / (2.0 ** (2 * j) * j ** power)
        # |c_k| = 2^-j k phi~(2^-j k) w / (D ln N) on block j; ||Delta_j u0||_2^2 = 2 D sum_k |c_k|^2
        s2 = 2.0 ** (2 * j) * _profile_sum(j, lambda s: s * s * phi_tilde(s) ** 2)
        seq.append(2.0 ** (1.5 * j) * math.sqrt(2.0 * s2 * (w * 2.0 ** -j / lnN) ** 2 / D))
        # u0_x(x0) = 2 sum_k k^2 2^-j phi~(2^-j k) w / (D ln N)
        s1 = 2.0 ** (2 * j) * _profile_sum(j, lambda s: s * s * phi_tilde(s))
        ux0 += 2.0 * s1 * w * 2.0 ** -j / (D * lnN)
    seq = np.array(seq)
    norm = float(seq.max()) if math.isinf(q) else float(np.sum(seq ** q) ** (1.0 / q))
    return {
        "N": N,
        "q": q,
        "B32_2_q": norm,
        "B32_2_q_scaled": norm * lnN,
        "ux_x0": ux0,
        "ux_x0_scaled": ux0 * lnN * N ** -exponent,
    }


@dataclass(frozen=True, eq=False)
class InflationReport:
    kind: str
    N: int
    n: int
    horizon: float
    norm_label: str
    initial_norm: float
    running_max: float
    growth_ratio: float
    termination: str
    t_final: float
    accumulator_slope_initial: float
    accumulator_slope_final: float
    series: dict = field(repr=False)
    q: Optional[float] = None

    @property
    def steepening(self) -> float:
        """Final over initial slope of the blow-up accumulator."""
        return self.accumulator_slope_final / self.accumulator_slope_initial

    def scalars(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "series"}
        out["steepening"] = self.steepening
        return out


def _slopes(acc: DiagnosticSeries) -> tuple[float, float]:
    t, v = acc.times, acc.values
    if len(t) < 2:
        return float("nan"), float("nan")
    return (float((v[1] - v[0]) / (t[1] - t[0])), float((v[-1] - v[-2]) / (t[-1] - t[-2])))


def run_inflation(cfg: Ill1Config | Ill2Config, params: FochParams = FochParams(1.0, 1.0, 5.0 / 3.0),
                  ctrl: StepController | None = None) -> InflationReport:
    """Evolve the reconstructed data at b = 5/3 and track its Besov norm."""
    if not params.is_critical:
        raise ValueError(f"inflation runs need b = 5/3, got b = {params.b}")
    if isinstance(cfg, Ill1Config):
        kind, u0 = "ill1", build_ill1_data(cfg)
        idx = BesovIndex(1.0, math.inf, 1.0)
    elif isinstance(cfg, Ill2Config):
        kind, u0 = "ill2", build_ill2_data(cfg)
        idx = BesovIndex(1.5, 2.0, cfg.q)
    else:
        raise TypeError(f"unknown config type {type(cfg).__name__}")
    if ctrl is None:
        steps = max(1, math.ceil(cfg.horizon / cfg.dt_max))
        ctrl = StepController(t_end=cfg.horizon, cfl=0.3, speed_floor=1e-12, dt_max=cfg.dt_max,
                              snapshot_stride=max(1, steps // cfg.snapshots))
    traj = integrate(u0, params, ctrl)
    series = {s.name: s for s in besov_track(traj, [idx])}
    if kind == "ill1":
        ws = besov_track(traj, weighted=True, field_fn=lambda f: derivative(f, 1))[0]
        series["weighted_sup_ux"] = DiagnosticSeries("weighted_sup_ux", ws.times, ws.values, ws.meta)
    acc = blowup_accumulator(traj, params)
    series[acc.name] = acc
    tracked = series[idx.label()].values
    s0, s1 = _slopes(acc)
    return InflationReport(
        kind=kind,
        N=cfg.N,
        n=cfg.n,
        horizon=cfg.horizon,
        norm_label=idx.label(),
        initial_norm=float(tracked[0]),
        running_max=float(tracked.max()),
        growth_ratio=float(tracked.max() / tracked[0]),
        termination=traj.termination,
        t_final=traj.t_final,
        accumulator_slope_initial=s0,
        accumulator_slope_final=s1,
        series=series,
        q=getattr(cfg, "q", None),
    )


@dataclass(frozen=True, eq=False)
class ConservationReport:
    b: float
    amplitude: float
    t_end: float
    n: int
    drift: float
    identity_defect: Optional[float]
    y_xi_min: Optional[float]
    y_xi_max: Optional[float]
    termination: str
    series: dict = field(repr=False)

    def scalars(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k != "series"}


def run_conservation_study(b: float, amplitude: float = 0.05, t_end: float = 0.5, n: int = 2048,
                           ctrl: StepController | None = None, identity: bool = True,
                           alpha: float = 1.0, beta: float = 1.0) -> ConservationReport:
    """Drift of ||m||_{L^{1/b}} and the pointwise identity m(y) y_xi^b = m0 for sin data."""
    if not 0 <= b <= 1:
        raise ValueError(f"conservation studies need 0 <= b <= 1, got {b}")
    params = FochParams(alpha, beta, b)
    grid = Grid1D(2 * math.pi, n)
    u0 = grid.sample(lambda x: amplitude * np.sin(x))
    ctrl = ctrl or StepController(t_end=t_end)
    traj = integrate(u0, params, ctrl)
    cq = conserved_quantity(traj, b)
    series = {cq.name: cq}
    defect = ymin = ymax = None
    if identity:
        fm = flow_map(traj)
        defect = conservation_identity(momentum(u0, params), momentum(traj.final, params), fm, b,
                                       len(fm.times) - 1)
        ymin, ymax = fm.y_xi_min, fm.y_xi_max
    return ConservationReport(b=b, amplitude=amplitude, t_end=t_end, n=n, drift=cq.relative_drift(),
                              identity_defect=defect, y_xi_min=ymin, y_xi_max=ymax,
                              termination=traj.termination, series=series)
