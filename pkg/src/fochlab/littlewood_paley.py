"""Discrete Littlewood-Paley theory on a periodic grid.

The low-frequency cutoff is

    chi(xi) = S(3|xi| - 3),    S(t) = h(1 - t) / (h(t) + h(1 - t)),  h(t) = exp(-1/t) [t > 0],

so chi = 1 on |xi| <= 1 and chi = 0 on |xi| >= 4/3.  The annulus bump is
phi(xi) = chi(xi/2) - chi(xi), supported in 1 <= |xi| <= 8/3, and the blocks are

    Delta_{-1} = chi(D),   Delta_j = phi(2^-j D)  (j >= 0),   Delta_j = 0  (j <= -2).

Partial sums telescope: chi(xi) + sum_{j<=J} phi(2^-j xi) = chi(2^-(J+1) xi).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .spectral import (
    Grid1D,
    RealField,
    _sup_from_coeffs,
    derivative,
    multiply_dealiased,
    padded_values,
    project_padded,
)

__all__ = [
    "transition",
    "chi",
    "phi",
    "DyadicPartition",
    "build_partition",
    "BesovIndex",
    "block",
    "low_pass",
    "block_coeffs",
    "besov_norm",
    "besov_sequence",
    "weighted_sup_norm",
    "bony_decompose",
    "commutator_block",
    "WEIGHT_EXPONENT",
]

WEIGHT_EXPONENT = 1.01


def _h(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def transition(t) -> np.ndarray:
    """Smooth step: 1 for t <= 0, 0 for t >= 1, C-infinity in between."""
    t = np.asarray(t, dtype=float)
    a = _h(1.0 - t)
    return a / (_h(t) + a)


def chi(xi) -> np.ndarray:
    return transition(3.0 * np.abs(xi) - 3.0)


def phi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return chi(0.5 * xi) - chi(xi)


@dataclass(frozen=True)
class DyadicPartition:
    """The concrete (chi, phi) pair together with per-grid block bookkeeping."""

    chi: Callable[[np.ndarray], np.ndarray] = chi
    phi: Callable[[np.ndarray], np.ndarray] = phi
    plateau: float = 1.0
    support: float = 4.0 / 3.0

    def j_max(self, grid: Grid1D) -> int:
        return grid.j_max

    def block_symbol(self, j: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if j < -1:
            return np.zeros_like(xi)
        if j == -1:
            return self.chi(xi)
        return self.phi(xi / 2.0 ** j)

    def low_symbol(self, j: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if j < 0:
            return np.zeros_like(xi)
        return self.chi(xi / 2.0 ** j)


def build_partition() -> DyadicPartition:
    return DyadicPartition()


_PARTITION = DyadicPartition()


@dataclass(frozen=True)
class BesovIndex:
    """Indices (s, p, r) of a Besov space B^s_{p,r}."""

    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"{name} must be >= 1 or inf, got {v}")
        if not np.isfinite(self.s):
            raise ValueError("s must be finite")

    def label(self) -> str:
        fmt = lambda v: "inf" if np.isinf(v) else f"{v:g}"
        return f"B{self.s:g}_{fmt(self.p)}_{fmt(self.r)}"


@lru_cache(maxsize=512)
def _block_symbol_cached(length: float, n: int, j: int) -> np.ndarray:
    grid = Grid1D(length, n)
    sym = _PARTITION.block_symbol(j, grid.k)
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=512)
def _low_symbol_cached(length: float, n: int, j: int) -> np.ndarray:
    grid = Grid1D(length, n)
    sym = _PARTITION.low_symbol(j, grid.k)
    sym.setflags(write=False)
    return sym


def block_symbol(grid: Grid1D, j: int) -> np.ndarray:
    """phi(2^-j k) (chi for j = -1) on the grid's real-FFT wavenumbers."""
    return _block_symbol_cached(grid.length, grid.n, int(j))


def block_coeffs(f: RealField, j: int) -> np.ndarray:
    if j < -1:
        return np.zeros_like(f.rfft)
    if j > f.grid.j_max:
        raise ValueError(f"block {j} exceeds j_max = {f.grid.j_max} for n = {f.grid.n}")
    return f.rfft * block_symbol(f.grid, j)


def block(f: RealField, j: int) -> RealField:
    """Littlewood-Paley block Delta_j f."""
    return RealField.from_rfft(f.grid, block_coeffs(f, j))


def low_pass(f: RealField, j: int) -> RealField:
    """S_j f = sum_{j' <= j-1} Delta_{j'} f = chi(2^-j D) f."""
    sym = _low_symbol_cached(f.grid.length, f.grid.n, int(j))
    return RealField.from_rfft(f.grid, f.rfft * sym)


def _parseval_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = w[-1] = 1.0
    return w


def _block_lp(grid: Grid1D, c: np.ndarray, p: float) -> float:
    if not np.any(c):
        return 0.0
    if p == 2:
        # Parseval; identical to the rectangle rule on the grid samples.
        return float(np.sqrt(grid.length * np.dot(_parseval_weights(grid), np.abs(c) ** 2)))
    if np.isinf(p):
        return _sup_from_coeffs(grid, c)
    vals = np.abs(np.fft.irfft(c * grid.n, n=grid.n))
    return float((np.sum(vals ** p) * grid.dx) ** (1.0 / p))


def besov_sequence(f: RealField, s: float, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Block indices j in [-1, j_max] and the sequence 2^{js} ||Delta_j f||_p."""
    js = np.arange(-1, f.grid.j_max + 1)
    seq = np.array([2.0 ** (j * s) * _block_lp(f.grid, block_coeffs(f, j), p) for j in js])
    return js, seq


def _lr(seq: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(seq.max(initial=0.0))
    if r == 1:
        return float(seq.sum())
    return float(np.sum(seq ** r) ** (1.0 / r))


def besov_norm(f: RealField, idx: BesovIndex) -> float:
    """Discrete inhomogeneous Besov norm over blocks -1..j_max."""
    _, seq = besov_sequence(f, idx.s, idx.p)
    return _lr(seq, idx.r)


def weighted_sup_norm(f: RealField) -> float:
    """sup_j (j + 2)^1.01 ||Delta_j f||_inf."""
    js, seq = besov_sequence(f, 0.0, np.inf)
    return float(np.max((js + 2.0) ** WEIGHT_EXPONENT * seq))


def _padded_blocks(f: RealField) -> list[np.ndarray]:
    grid = f.grid
    return [padded_values(grid, block_coeffs(f, j)) for j in range(-1, grid.j_max + 1)]


def bony_decompose(f: RealField, g: RealField) -> tuple[RealField, RealField, RealField]:
    """Paraproducts T_f g, T_g f and the remainder R(f, g), each dealiased."""
    f._check(g)
    grid = f.grid
    fb = _padded_blocks(f)
    gb = _padded_blocks(g)
    # list index i corresponds to block j = i - 1
    m = len(fb)

    def paraproduct(a, c):
        # at step i (block j = i - 1) `low` holds S_{j-1} a = a[0] + ... + a[i-2]
        acc = np.zeros_like(a[0])
        low = np.zeros_like(a[0])
        for i in range(m):
            if i >= 2:
                acc += low * c[i]
            if i >= 1:
                low = low + a[i - 1]
        return acc

    tfg = paraproduct(fb, gb)
    tgf = paraproduct(gb, fb)
    rem = np.zeros_like(fb[0])
    for i in range(m):
        for k in range(max(0, i - 1), min(m, i + 2)):
            rem += fb[k] * gb[i]
    return tuple(RealField.from_rfft(grid, project_padded(grid, v)) for v in (tfg, tgf, rem))


def commutator_block(f: RealField, g: RealField, j: int) -> RealField:
    """R_j = f Delta_j g_x - Delta_j(f g_x)."""
    f._check(g)
    gx = derivative(g, 1)
    return multiply_dealiased(f, block(gx, j)) - block(multiply_dealiased(f, gx), j)
