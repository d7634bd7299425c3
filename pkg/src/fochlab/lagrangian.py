"""Characteristics, Helmholtz kernels and the Lagrangian form of the nonlocal term.

For alpha = beta = 1 the inverse operators are convolutions on the line with

    p(x) = exp(-|x|) / 2          ((1 - d_xx)^-1)
    G(x) = exp(-|x|)(1 + |x|) / 4  ((1 - d_xx)^-2)

On the periodic box they are periodized by a lattice sum.  Along the flow map
y(t, xi) the nonlocal term reads

    F(u) o y = -1/4 int K1(y - x) P(x) dx + (b - 5)/4 int K2(y - x) u_x(x)^2 dx,
    K1(z) = z exp(-|z|),  K2(z) = sign(z) exp(-|z|),
    P = (b/2) u^2 + ((1 - b)/2) u_x^2 + ((5 - 3b)/2) u_xx^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .model import FochParams
from .spectral import (
    Grid1D,
    RealField,
    _derivative_factor,
    derivative,
    eval_at,
    eval_coeffs_multi,
    norm_lp,
)

__all__ = [
    "kernel_p",
    "kernel_G",
    "periodized",
    "kernel_convolve",
    "FlowMap",
    "flow_map",
    "conservation_identity",
    "lagrangian_F",
]

_TAIL = 37.0  # exp(-37) < 1e-16


def kernel_p(x) -> np.ndarray:
    return 0.5 * np.exp(-np.abs(np.asarray(x, dtype=float)))


def kernel_G(x) -> np.ndarray:
    a = np.abs(np.asarray(x, dtype=float))
    return 0.25 * np.exp(-a) * (1.0 + a)


def _k1(z):
    return z * np.exp(-np.abs(z))


def _k2(z):
    return np.sign(z) * np.exp(-np.abs(z))


def _images(length: float) -> int:
    return int(np.ceil(_TAIL / length)) + 1


def periodized(kernel, x, length: float) -> np.ndarray:
    """sum_m kernel(x + m D) over the lattice images that exceed 1e-16."""
    x = np.asarray(x, dtype=float)
    M = _images(length)
    return sum(kernel(x + m * length) for m in range(-M, M + 1))


# Jumps (right minus left at 0) of K', K'', K''' for the two kernels.
_JUMPS = {"p": (-1.0, 0.0, -1.0), "G": (0.0, 0.0, 1.0)}
_KERNELS = {"p": kernel_p, "G": kernel_G}


def _require_unit(params: FochParams) -> None:
    if params.alpha != params.beta or abs(params.alpha) != 1.0:
        raise ValueError("the explicit kernels need alpha = beta = 1")


def _circular(kvals: np.ndarray, f: np.ndarray) -> np.ndarray:
    """sum_j kvals[(i - j) mod n] f_j, computed exactly by FFT."""
    return np.fft.irfft(np.fft.rfft(kvals) * np.fft.rfft(f), n=f.size)


def kernel_convolve(f: RealField, kind: str, params: FochParams = FochParams()) -> RealField:
    """Real-space quadrature of the periodized kernel against ``f``.

    The kernel has a cusp at the evaluation node, so the rectangle rule is
    corrected with the Euler-Maclaurin jump terms through O(h^4).
    """
    if kind not in _KERNELS:
        raise ValueError(f"kind must be 'p' or 'G', got {kind!r}")
    _require_unit(params)
    grid = f.grid
    h = grid.dx
    kvals = periodized(_KERNELS[kind], grid.x, grid.length)
    conv = h * _circular(kvals, f.values)
    j1, j2, j3 = _JUMPS[kind]
    fv = f.values
    f1 = derivative(f, 1).values
    f2 = derivative(f, 2).values
    # integrand g(x') = K(x - x') f(x'): [g'] = [K'] f, [g'''] = [K'''] f - 3[K''] f' + 3[K'] f''
    g1 = j1 * fv
    g3 = j3 * fv - 3.0 * j2 * f1 + 3.0 * j1 * f2
    conv = conv + h ** 2 / 12.0 * g1 - h ** 4 / 720.0 * g3
    return RealField(grid, conv)


@dataclass(frozen=True, eq=False)
class FlowMap:
    """Characteristics y(t, xi) started from the grid points."""

    grid: Grid1D
    times: np.ndarray
    y: np.ndarray        # (len(times), n)
    y_xi: np.ndarray     # spectral d/dxi of y
    U: np.ndarray        # u(t, y(t, xi))
    log_stretch: np.ndarray  # int_0^t u_x(tau, y(tau, xi)) dtau

    @property
    def y_xi_min(self) -> float:
        return float(self.y_xi.min())

    @property
    def y_xi_max(self) -> float:
        return float(self.y_xi.max())

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.y, axis=1) > 0)
                    and np.all(self.y[:, 0] + self.grid.length > self.y[:, -1]))

    def lagrangian_velocity(self, t_index: int) -> RealField:
        return RealField(self.grid, self.U[t_index])

    def closed_form_defect(self) -> float:
        """max relative gap between y_xi and exp(int u_x o y)."""
        ref = np.exp(self.log_stretch)
        return float(np.max(np.abs(self.y_xi - ref) / ref))


def _lagrange_weights(nodes: np.ndarray, t: float) -> np.ndarray:
    w = np.ones(nodes.size)
    for i in range(nodes.size):
        for j in range(nodes.size):
            if i != j:
                w[i] *= (t - nodes[j]) / (nodes[i] - nodes[j])
    return w


def _y_xi(grid: Grid1D, y: np.ndarray) -> np.ndarray:
    disp = y - grid.x
    return 1.0 + np.fft.irfft(np.fft.rfft(disp) * _derivative_factor(grid, 1), n=grid.n)


def flow_map(traj: Trajectory) -> FlowMap:
    """RK4 integration of dy/dt = u(t, y) on the trajectory's own step sequence.

    The solution at the half-step stage times is reconstructed by cubic
    Lagrange interpolation in time from the four nearest stored steps, then
    evaluated off-grid by the exact trigonometric sum.
    """
    if not traj.dense:
        raise ValueError("flow_map needs a snapshot at every step (snapshot_stride = 1)")
    grid = traj.grid
    times = np.asarray(traj.snapshot_times)
    d1 = _derivative_factor(grid, 1)
    coeffs = np.stack([f.rfft for f in traj.snapshots])
    pair = np.stack([coeffs, coeffs * d1], axis=1)  # (T, 2, n/2+1)

    def coeffs_at(t: float, i: int) -> np.ndarray:
        lo = int(np.clip(i - 1, 0, max(0, len(times) - 4)))
        idx = np.arange(lo, min(lo + 4, len(times)))
        w = _lagrange_weights(times[idx], t)
        return np.tensordot(w, pair[idx], axes=1)

    def velocity(c2: np.ndarray, y: np.ndarray) -> np.ndarray:
        return eval_coeffs_multi(grid, c2, y)

    y = grid.x.astype(float).copy()
    L = np.zeros(grid.n)
    ys, Ls, Us = [y.copy()], [L.copy()], []
    for i in range(len(times) - 1):
        t0, t1 = times[i], times[i + 1]
        dt = t1 - t0
        tm = 0.5 * (t0 + t1)
        cm = coeffs_at(tm, i)
        k1 = velocity(pair[i], y)
        Us.append(k1[0])
        k2 = velocity(cm, y + 0.5 * dt * k1[0])
        k3 = velocity(cm, y + 0.5 * dt * k2[0])
        k4 = velocity(pair[i + 1], y + dt * k3[0])
        incr = (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        y = y + incr[0]
        L = L + incr[1]
        ys.append(y.copy())
        Ls.append(L.copy())
    Us.append(velocity(pair[-1], y)[0])
    Y = np.array(ys)
    y_xi = np.array([_y_xi(grid, row) for row in Y])
    return FlowMap(grid=grid, times=times.copy(), y=Y, y_xi=y_xi, U=np.array(Us),
                   log_stretch=np.array(Ls))


def conservation_identity(m0: RealField, m_t: RealField, fm: FlowMap, b: float,
                          t_index: int) -> float:
    """max |m(t, y) y_xi^b - m0| / (1 + ||m0||_inf)."""
    yx = fm.y_xi[t_index]
    if np.any(yx <= 0):
        raise ValueError("y_xi is not positive; the flow map is no longer a diffeomorphism")
    if t_index == 0:
        lhs = m_t.values * yx ** b
    else:
        lhs = eval_at(m_t, fm.y[t_index]) * yx ** b
    return float(np.max(np.abs(lhs - m0.values)) / (1.0 + norm_lp(m0, np.inf)))


def lagrangian_F(U: RealField, fm: FlowMap, params: FochParams, t_index: int) -> RealField:
    """F(u) o y from the Lagrangian velocity U(xi) = u(t, y(t, xi)).

    The x-integrals are pulled back to xi (dx = y_xi dxi); u_x o y and
    u_xx o y follow from U by the chain rule.
    """
    _require_unit(params)
    grid = fm.grid
    h = grid.dx
    b = params.b
    y = fm.y[t_index]
    yx = fm.y_xi[t_index]
    Ux = derivative(U, 1).values
    yxx = derivative(RealField(grid, y - grid.x), 2).values
    Uxx = derivative(U, 2).values
    ux = Ux / yx
    uxx = Uxx / yx ** 2 - Ux * yxx / yx ** 3
    P = 0.5 * b * U.values ** 2 + 0.5 * (1.0 - b) * ux ** 2 + 0.5 * (5.0 - 3.0 * b) * uxx ** 2
    Q = ux ** 2 * yx
    # pairwise separations, periodized; y - xi is periodic so y_i - y_j + mD covers the lattice
    z = y[:, None] - y[None, :]
    K1 = periodized(_k1, z, grid.length)
    K2 = periodized(_k2, z, grid.length)
    np.fill_diagonal(K2, 0.0)  # average of the one-sided limits
    I1 = h * (K1 @ (P * yx))
    Qx = derivative(RealField(grid, Q), 1).values
    I2 = h * (K2 @ Q) - h ** 2 / 6.0 * Qx
    return RealField(grid, -0.25 * I1 + 0.25 * (b - 5.0) * I2)
