"""Fifth-order Camassa-Holm right-hand side.

With m = (1 - alpha^2 d_xx)(1 - beta^2 d_xx) u and P(D) the inverse of that operator,
the nonlocal form of the equation is u_t + u u_x + F(u) = 0 where

    F1 = (b/2) d_x P(u^2)
    F2 = ((3 - b)/2)(alpha^2 + beta^2) d_x P(u_x^2)
    F3 = ((5 - 3b)/2) alpha^2 beta^2 d_x P(u_xx^2)
    F4 = ((b - 5)/2) alpha^2 beta^2 d_x^3 P(u_x^2)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .littlewood_paley import BesovIndex, besov_norm, block_symbol
from .spectral import (
    Grid1D,
    RealField,
    _derivative_factor,
    apply_symbol,
    derivative,
    multiply_dealiased,
    padded_values,
    project_padded,
)

__all__ = [
    "FochParams",
    "FTerms",
    "ResolutionWarning",
    "p_symbol",
    "p_of_d",
    "u_to_m",
    "m_to_u",
    "f_terms",
    "rhs",
    "f_norm_ratio",
    "resolution_defect",
    "RESOLUTION_TOL",
    "RhsOperator",
]

RESOLUTION_TOL = 1e-8
B_CRITICAL = 5.0 / 3.0


class ResolutionWarning(UserWarning):
    """The top Littlewood-Paley blocks of a field carry non-negligible energy."""


@dataclass(frozen=True)
class FochParams:
    alpha: float = 1.0
    beta: float = 1.0
    b: float = 2.0

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.b)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"parameters must be finite, got {vals}")
        if self.alpha * self.beta == 0:
            raise ValueError("alpha * beta must be nonzero")
        if np.isclose(self.b, B_CRITICAL, rtol=0, atol=1e-14):
            object.__setattr__(self, "b", B_CRITICAL)

    @property
    def is_critical(self) -> bool:
        """b = 5/3, where the u_xx^2 term drops out."""
        return self.b == B_CRITICAL

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        a2, b2, b = self.alpha ** 2, self.beta ** 2, self.b
        c3 = 0.0 if self.is_critical else 0.5 * (5.0 - 3.0 * b) * a2 * b2
        return (0.5 * b, 0.5 * (3.0 - b) * (a2 + b2), c3, 0.5 * (b - 5.0) * a2 * b2)

    @property
    def unit_helmholtz(self) -> bool:
        return abs(self.alpha) == 1.0 and abs(self.beta) == 1.0


def m_symbol(k: np.ndarray, params: FochParams) -> np.ndarray:
    k2 = np.asarray(k, dtype=float) ** 2
    return (1.0 + params.alpha ** 2 * k2) * (1.0 + params.beta ** 2 * k2)


def p_symbol(k: np.ndarray, params: FochParams) -> np.ndarray:
    return 1.0 / m_symbol(k, params)


def p_of_d(f: RealField, params: FochParams) -> RealField:
    return apply_symbol(f, lambda k: p_symbol(k, params))


def u_to_m(u: RealField, params: FochParams) -> RealField:
    return apply_symbol(u, lambda k: m_symbol(k, params))


def m_to_u(m: RealField, params: FochParams) -> RealField:
    return p_of_d(m, params)


@dataclass(frozen=True)
class FTerms:
    F1: RealField
    F2: RealField
    F3: RealField
    F4: RealField

    def total(self) -> RealField:
        return self.F1 + self.F2 + self.F3 + self.F4


def resolution_defect(u: RealField) -> float:
    """Fraction of the B^0_{2,2} mass of u sitting in the two top blocks."""
    grid = u.grid
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = w[-1] = 1.0
    e = w * np.abs(u.rfft) ** 2
    masses = [np.dot(e, block_symbol(grid, j) ** 2) for j in range(-1, grid.j_max + 1)]
    total = sum(masses)
    if total == 0:
        return 0.0
    return float((masses[-1] + masses[-2]) / total)


def _check_resolution(u: RealField) -> None:
    frac = resolution_defect(u)
    if frac > RESOLUTION_TOL:
        warnings.warn(
            f"top two blocks hold a fraction {frac:.2e} of the energy (n = {u.grid.n})",
            ResolutionWarning,
            stacklevel=3,
        )


def _smooth_then_differentiate(sq: RealField, params: FochParams, order: int) -> RealField:
    # composed in coefficient space: re-sampling P(D) sq first would let d^3 lift its round-off by k^3
    grid = sq.grid
    return RealField.from_rfft(grid, sq.rfft * p_symbol(grid.k, params) * _derivative_factor(grid, order))


def f_terms(u: RealField, params: FochParams, check_resolution: bool = True) -> FTerms:
    """The four nonlocal terms, each assembled as square -> P(D) -> derivative."""
    if check_resolution:
        _check_resolution(u)
    c1, c2, c3, c4 = params.coefficients
    ux = derivative(u, 1)
    ux2 = multiply_dealiased(ux, ux)
    F1 = _smooth_then_differentiate(multiply_dealiased(u, u), params, 1) * c1
    F2 = _smooth_then_differentiate(ux2, params, 1) * c2
    if c3 == 0.0:
        F3 = u.grid.zeros()
    else:
        uxx = derivative(u, 2)
        F3 = _smooth_then_differentiate(multiply_dealiased(uxx, uxx), params, 1) * c3
    F4 = _smooth_then_differentiate(ux2, params, 3) * c4
    return FTerms(F1, F2, F3, F4)


def rhs(u: RealField, params: FochParams, disable_F: bool = False) -> RealField:
    """-u u_x - F(u); with ``disable_F`` only the Burgers part."""
    adv = multiply_dealiased(u, derivative(u, 1))
    if disable_F:
        return -adv
    return -(adv + f_terms(u, params).total())


def f_norm_ratio(u: RealField, params: FochParams, idx: BesovIndex) -> float:
    """||F(u)||_B / ||u||_B^2."""
    nu = besov_norm(u, idx)
    if nu == 0:
        raise ValueError("f_norm_ratio needs a field with nonzero norm")
    return besov_norm(f_terms(u, params).total(), idx) / nu ** 2


class RhsOperator:
    """Fast evaluation of the right-hand side on normalized real-FFT arrays.

    Equivalent to :func:`rhs` but avoids the field wrappers; used by the
    time integrators.
    """

    def __init__(self, grid: Grid1D, params: FochParams, disable_F: bool = False):
        self.grid = grid
        self.params = params
        self.disable_F = disable_F
        k = grid.k
        self.d1 = _derivative_factor(grid, 1)
        self.d2 = _derivative_factor(grid, 2)
        c1, c2, c3, c4 = params.coefficients
        self.c3 = c3
        p = p_symbol(k, params)
        # ik P (c1 u^2 + (c2 - c4 k^2) u_x^2 + c3 u_xx^2), the k^2 piece being the outer d_x^3
        self.s1 = self.d1 * p * c1
        self.s2 = self.d1 * p * (c2 - c4 * k ** 2)
        self.s3 = self.d1 * p * c3

    def __call__(self, c: np.ndarray) -> np.ndarray:
        g = self.grid
        u = padded_values(g, c)
        ux = padded_values(g, c * self.d1)
        out = -project_padded(g, u * ux)
        if self.disable_F:
            return out
        out -= self.s1 * project_padded(g, u * u)
        out -= self.s2 * project_padded(g, ux * ux)
        if self.c3 != 0.0:
            uxx = padded_values(g, c * self.d2)
            out -= self.s3 * project_padded(g, uxx * uxx)
        return out
