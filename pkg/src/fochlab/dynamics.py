"""Time integration: method of lines, linear transport, and the Picard scheme."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Protocol, Sequence

import numpy as np

from .littlewood_paley import BesovIndex, besov_norm, low_pass
from .model import FochParams, RhsOperator
from .spectral import Grid1D, RealField, _derivative_factor, padded_values, project_padded

__all__ = [
    "StepController",
    "StepState",
    "Hook",
    "Trajectory",
    "integrate",
    "TimeField",
    "transport_solve",
    "PicardResult",
    "picard_solve",
    "TERMINATIONS",
]

TERMINATIONS = ("reached_t_end", "blow_up_flag", "dt_underflow")


@dataclass(frozen=True)
class StepController:
    """Step-size and stopping policy.

    The step is ``min(dt_max, cfl * dx / max(speed_floor, ||u||_inf))``.
    ``speed_floor = 1`` and ``dt_max = inf`` give the plain advective CFL.
    """

    t_end: float = 1.0
    cfl: float = 0.3
    dt_min: float = 1e-10
    blow_threshold: float = 1e4
    snapshot_stride: int = 1
    speed_floor: float = 1.0
    dt_max: float = float("inf")

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.dt_min > 0:
            raise ValueError("dt_min must be positive")
        if not (self.t_end >= 0 and np.isfinite(self.t_end)):
            raise ValueError("t_end must be finite and non-negative")
        if not self.blow_threshold > 0:
            raise ValueError("blow_threshold must be positive")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 0:
            raise ValueError("snapshot_stride must be a non-negative integer (0 keeps none)")
        if not self.speed_floor > 0:
            raise ValueError("speed_floor must be positive")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")

    def step(self, dx: float, u_max: float) -> float:
        return min(self.dt_max, self.cfl * dx / max(self.speed_floor, u_max))


class StepState:
    """Solution at one accepted step, with lazily computed derivatives."""

    def __init__(self, t: float, grid: Grid1D, coeffs: np.ndarray):
        self.t = t
        self.grid = grid
        self.coeffs = coeffs

    def _from(self, c: np.ndarray) -> np.ndarray:
        return np.fft.irfft(c * self.grid.n, n=self.grid.n)

    @cached_property
    def u(self) -> np.ndarray:
        return self._from(self.coeffs)

    @cached_property
    def ux(self) -> np.ndarray:
        return self._from(self.coeffs * _derivative_factor(self.grid, 1))

    @cached_property
    def uxx(self) -> np.ndarray:
        return self._from(self.coeffs * _derivative_factor(self.grid, 2))

    @cached_property
    def field(self) -> RealField:
        return RealField(self.grid, self.u)


class Hook(Protocol):
    name: str

    def observe(self, state: StepState) -> None: ...

    def result(self): ...


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: Grid1D
    params: FochParams
    times: np.ndarray
    snapshots: tuple[RealField, ...]
    snapshot_times: np.ndarray
    series: dict
    termination: str
    final: RealField
    disable_F: bool = False

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def dense(self) -> bool:
        """True when every accepted step was stored."""
        return len(self.snapshots) == len(self.times)


def integrate(
    u0: RealField,
    params: FochParams,
    ctrl: StepController,
    hooks: Sequence[Hook] = (),
    disable_F: bool = False,
) -> Trajectory:
    """Classical RK4 method of lines for u_t = -u u_x - F(u)."""
    grid = u0.grid
    op = RhsOperator(grid, params, disable_F=disable_F)
    d1 = _derivative_factor(grid, 1)
    stride = int(ctrl.snapshot_stride)
    c = np.array(u0.rfft)
    t = 0.0
    times = [0.0]
    snaps, snap_times = [], []
    termination = "reached_t_end"

    def record(state: StepState, idx: int) -> None:
        for h in hooks:
            h.observe(state)
        if stride and idx % stride == 0:
            snaps.append(state.field)
            snap_times.append(state.t)

    state = StepState(0.0, grid, c)
    record(state, 0)
    steps = 0
    while t < ctrl.t_end:
        if np.max(np.abs(state.ux)) > ctrl.blow_threshold:
            termination = "blow_up_flag"
            break
        dt = ctrl.step(grid.dx, float(np.max(np.abs(state.u))))
        if dt < ctrl.dt_min:
            termination = "dt_underflow"
            break
        dt = min(dt, ctrl.t_end - t)
        k1 = op(c)
        k2 = op(c + 0.5 * dt * k1)
        k3 = op(c + 0.5 * dt * k2)
        k4 = op(c + dt * k3)
        c_new = c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(c_new)):
            termination = "blow_up_flag"
            break
        c = c_new
        steps += 1
        t = ctrl.t_end if ctrl.t_end - (t + dt) < 1e-14 * max(1.0, ctrl.t_end) else t + dt
        times.append(t)
        state = StepState(t, grid, c)
        record(state, steps)
    if termination == "reached_t_end" and np.max(np.abs(state.ux)) > ctrl.blow_threshold:
        termination = "blow_up_flag"
    # keep the last state even when it falls between strides
    if stride and snap_times and snap_times[-1] != t:
        snaps.append(state.field)
        snap_times.append(t)
    series = {h.name: h.result() for h in hooks}
    return Trajectory(
        grid=grid,
        params=params,
        times=np.array(times),
        snapshots=tuple(snaps),
        snapshot_times=np.array(snap_times),
        series=series,
        termination=termination,
        final=state.field,
        disable_F=disable_F,
    )


class TimeField:
    """A field known at increasing sample times, linear in between."""

    def __init__(self, times: Sequence[float], fields: Sequence[RealField]):
        times = np.asarray(times, dtype=float)
        if len(times) != len(fields) or len(times) == 0:
            raise ValueError("times and fields must be non-empty and aligned")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.times = times
        self.grid = fields[0].grid
        self._coeffs = np.stack([f.rfft for f in fields])

    @classmethod
    def constant(cls, f: RealField) -> "TimeField":
        return cls([0.0], [f])

    @property
    def is_constant(self) -> bool:
        return len(self.times) == 1

    def coeffs_at(self, t: float) -> np.ndarray:
        if self.is_constant:
            return self._coeffs[0]
        t0, t1 = self.times[0], self.times[-1]
        tol = 1e-12 * max(1.0, abs(t1))
        if t < t0 - tol or t > t1 + tol:
            raise LookupError(f"time {t} outside stored range [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        i = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        w = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return (1.0 - w) * self._coeffs[i] + w * self._coeffs[i + 1]

    def at(self, t: float) -> RealField:
        return RealField.from_rfft(self.grid, self.coeffs_at(t))

    def max_abs(self) -> float:
        vals = np.fft.irfft(self._coeffs * self.grid.n, n=self.grid.n, axis=-1)
        return float(np.max(np.abs(vals)))


def _as_time_field(v) -> TimeField:
    if isinstance(v, TimeField):
        return v
    if isinstance(v, RealField):
        return TimeField.constant(v)
    raise TypeError(f"expected TimeField or RealField, got {type(v).__name__}")


def _uniform_steps(t_end: float, dx: float, speed: float, cfl: float = 0.3) -> int:
    return max(1, int(np.ceil(t_end * max(1.0, speed) / (cfl * dx))))


def transport_solve(v, g, f0: RealField, t_end: float, n_steps: int | None = None,
                    return_history: bool = False):
    """RK4 for f_t + v f_x = g with uniform steps.

    ``v`` and ``g`` are :class:`TimeField` (or constant :class:`RealField`)
    objects; they are sampled at the RK4 stage times.
    """
    v = _as_time_field(v)
    g = _as_time_field(g)
    grid = f0.grid
    if v.grid != grid or g.grid != grid:
        raise ValueError("transport data live on different grids")
    if n_steps is None:
        n_steps = _uniform_steps(t_end, grid.dx, v.max_abs())
    d1 = _derivative_factor(grid, 1)
    dt = t_end / n_steps
    c = np.array(f0.rfft)

    def F(t, c):
        vp = padded_values(grid, v.coeffs_at(t))
        fx = padded_values(grid, c * d1)
        return g.coeffs_at(t) - project_padded(grid, vp * fx)

    history = [RealField.from_rfft(grid, c)]
    times = [0.0]
    for i in range(n_steps):
        t = i * dt
        k1 = F(t, c)
        k2 = F(t + 0.5 * dt, c + 0.5 * dt * k1)
        k3 = F(t + 0.5 * dt, c + 0.5 * dt * k2)
        k4 = F(t + dt, c + dt * k3)
        c = c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if return_history:
            history.append(RealField.from_rfft(grid, c))
            times.append((i + 1) * dt)
    final = RealField.from_rfft(grid, c)
    if return_history:
        times[-1] = t_end
        return final, TimeField(times, history)
    return final


@dataclass(frozen=True, eq=False)
class PicardResult:
    solution: RealField
    iterates: tuple[TimeField, ...]
    distances: np.ndarray
    converged: bool
    index: BesovIndex = field(default=BesovIndex(2.0, 2.0, 2.0))

    @property
    def n_iterations(self) -> int:
        return len(self.distances)

    def ratios(self) -> np.ndarray:
        d = self.distances
        return d[1:] / d[:-1]


def _sup_time_distance(a: TimeField, b: TimeField, idx: BesovIndex) -> float:
    grid = a.grid
    best = 0.0
    for t in a.times:
        diff = RealField.from_rfft(grid, a.coeffs_at(t) - b.coeffs_at(t))
        best = max(best, besov_norm(diff, idx))
    return best


def picard_solve(u0: RealField, params: FochParams, t_end: float, tol: float = 1e-11,
                 n_max: int = 30, s: float = 3.0, n_steps: int | None = None) -> PicardResult:
    """Iterate u^{n+1}_t + u^n u^{n+1}_x = -F(u^n), u^{n+1}(0) = S_{n+1} u0, from u^0 = 0.

    All iterates share one uniform time grid; the stopping distance is the
    sup in time of the B^{s-1}_{2,2} norm of successive differences.
    """
    grid = u0.grid
    idx = BesovIndex(s - 1.0, 2.0, 2.0)
    if n_steps is None:
        n_steps = _uniform_steps(t_end, grid.dx, 2.0 * u0.max_abs())
    op = RhsOperator(grid, params)
    adv_free = RhsOperator(grid, params, disable_F=True)
    times = np.linspace(0.0, t_end, n_steps + 1)
    zero = grid.zeros()
    current = TimeField(times, [zero] * len(times))
    iterates = [current]
    distances = []
    converged = False
    for n in range(n_max):
        # -F(u^n) = rhs(u^n) + u^n u^n_x at every stored time
        src = []
        for t in times:
            c = current.coeffs_at(t)
            src.append(RealField.from_rfft(grid, op(c) - adv_free(c)))
        g = TimeField(times, src)
        _, nxt = transport_solve(current, g, low_pass(u0, n + 1), t_end,
                                 n_steps=n_steps, return_history=True)
        distances.append(_sup_time_distance(nxt, current, idx))
        iterates.append(nxt)
        current = nxt
        if distances[-1] < tol:
            converged = True
            break
    return PicardResult(
        solution=current.at(t_end),
        iterates=tuple(iterates),
        distances=np.array(distances),
        converged=converged,
        index=idx,
    )
