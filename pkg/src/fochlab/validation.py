"""Invariant suite behind ``fochlab validate`` plus the seeded corpus used for
measured-constant stability.

Each check returns a row ``{name, value, tolerance, passed}``; a row passes when
``value < tolerance`` (or, for ``lower`` rows, ``value > tolerance``).
"""

from __future__ import annotations

import math

import numpy as np

from .littlewood_paley import (
    BesovIndex,
    besov_norm,
    block,
    bony_decompose,
    chi,
    commutator_block,
    phi,
    weighted_sup_norm,
)
from .model import FochParams, f_terms, p_of_d, rhs, u_to_m, m_to_u, f_norm_ratio
from .spectral import Grid1D, RealField, derivative, multiply_dealiased, norm_lp

__all__ = [
    "seeded_corpus",
    "f_bound_constant",
    "product_constant",
    "commutator_constant",
    "run_validation",
]


def seeded_corpus(grid: Grid1D, size: int = 20, modes: int = 7, seed: int = 0,
                  decay: float = 2.0) -> list[RealField]:
    """Random fields with modes 1..``modes`` and amplitudes ~ k^-decay.

    The coefficients depend only on the seed, so the same functions are
    sampled on every grid that resolves them.
    """
    if modes > grid.n // 8:
        raise ValueError(f"grid n = {grid.n} too coarse for {modes} corpus modes")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(size):
        a = rng.standard_normal(modes + 1) + 1j * rng.standard_normal(modes + 1)
        a[0] = a[0].real
        a[1:] /= np.arange(1, modes + 1) ** decay
        c = np.zeros(grid.n // 2 + 1, complex)
        c[: modes + 1] = a
        c[0] *= 0.5
        out.append(RealField.from_rfft(grid, c))
    return out


def f_bound_constant(corpus, params: FochParams, idx: BesovIndex) -> float:
    """max over the corpus of ||F(u)||_B / ||u||_B^2."""
    return max(f_norm_ratio(u, params, idx) for u in corpus)


def product_constant(corpus) -> float:
    """max ||f^2||_{B0_inf_1} / (||f||_{B0_inf_1} * weighted_sup_norm(f))."""
    b0 = BesovIndex(0.0, np.inf, 1)
    return max(besov_norm(multiply_dealiased(f, f), b0) / (besov_norm(f, b0) * weighted_sup_norm(f))
               for f in corpus)


def commutator_constant(corpus) -> float:
    """max over corpus pairs of sum_j 2^j ||R_j||_inf / (||f_x||_{B0_inf_1} ||g||_{B1_inf_1})."""
    b0 = BesovIndex(0.0, np.inf, 1)
    b1 = BesovIndex(1.0, np.inf, 1)
    grid = corpus[0].grid
    best = 0.0
    for f, g in zip(corpus[::2], corpus[1::2]):
        total = sum(2.0 ** j * norm_lp(commutator_block(f, g, j), np.inf)
                    for j in range(-1, grid.j_max + 1))
        best = max(best, total / (besov_norm(derivative(f, 1), b0) * besov_norm(g, b1)))
    return best


def _row(name: str, value: float, tol: float, lower: bool = False) -> dict:
    value = float(value)
    ok = (value > tol) if lower else (value < tol)
    return {"name": name, "value": value, "tolerance": float(tol), "passed": bool(ok and math.isfinite(value))}


def _doubling_change(fn, coarse: Grid1D, seed: int) -> float:
    a = fn(seeded_corpus(coarse, seed=seed))
    b = fn(seeded_corpus(coarse.refined(2), seed=seed))
    return abs(b - a) / abs(a)


def run_validation(seed: int = 0) -> list[dict]:
    rows = []
    g = Grid1D(2 * np.pi, 256)

    # partition of unity on every representable wavenumber
    xi = np.abs(g.wavenumbers)
    J = g.j_max
    total = chi(xi) + sum(phi(xi / 2.0 ** j) for j in range(J + 1))
    mask = xi <= 2.0 ** (J + 1)
    rows.append(_row("partition_exactness", np.max(np.abs(total[mask] - 1.0)), 1e-12))

    cos4 = g.sample(lambda x: np.cos(4 * x))
    rows.append(_row("block_cos4x", norm_lp(block(cos4, 1) - cos4, np.inf), 1e-12))
    rows.append(_row("besov_B1_inf_1_cos4x", abs(besov_norm(cos4, BesovIndex(1, np.inf, 1)) - 2.0), 1e-6))
    rows.append(_row("weighted_sup_cos4x", abs(weighted_sup_norm(cos4) - 3.0 ** 1.01), 1e-4))

    corpus = seeded_corpus(g, size=6, seed=seed)
    f, h = corpus[0], corpus[1]
    parts = bony_decompose(f, h)
    rows.append(_row("bony_identity", norm_lp(sum(parts[1:], parts[0]) - multiply_dealiased(f, h), np.inf), 1e-10))
    s1, s2, th = 1.0, 3.0, 0.5
    ix = lambda s: BesovIndex(s, 2, 2)  # noqa: E731
    lhs = besov_norm(f, ix(th * s1 + (1 - th) * s2))
    rhs_ = besov_norm(f, ix(s1)) ** th * besov_norm(f, ix(s2)) ** (1 - th)
    rows.append(_row("interpolation_inequality", lhs - rhs_, 1e-12 * rhs_))

    # model
    unit = FochParams(1.0, 1.0, 2.0)
    rows.append(_row("m_to_u_roundtrip", norm_lp(m_to_u(u_to_m(f, unit), unit) - f, np.inf), 1e-12))
    cosx = g.sample(np.cos)
    F1 = f_terms(cosx, unit).F1
    rows.append(_row("F1_cos_oracle", norm_lp(F1 + g.sample(lambda x: np.sin(2 * x) / 25.0), np.inf), 1e-10))
    crit = FochParams(1.0, 1.0, 5.0 / 3.0)
    rows.append(_row("F3_vanishes_critical", norm_lp(f_terms(f, crit).F3, np.inf), 1e-300))
    rows.append(_row("constant_fixed_point", norm_lp(rhs(g.constant(1.7), unit), np.inf), 1e-13))
    odd = g.sample(lambda x: np.sin(x - np.pi) + 0.3 * np.sin(3 * (x - np.pi)))
    r = rhs(odd, unit)
    rows.append(_row("rhs_parity", norm_lp(r + r.reflect(), np.inf), 1e-10))
    rows.append(_row("p_of_d_cos2x", norm_lp(p_of_d(g.sample(lambda x: np.cos(2 * x)), unit)
                                             - g.sample(lambda x: np.cos(2 * x) / 25.0), np.inf), 1e-14))

    # kernel quadrature vs multiplier
    from .lagrangian import kernel_convolve
    gk = Grid1D(64 * np.pi, 2 ** 13)
    bump = gk.sample(lambda x: np.exp(-((x - gk.length / 2) ** 2)))
    ref = p_of_d(bump, unit)
    rows.append(_row("kernel_G_vs_multiplier",
                     norm_lp(kernel_convolve(bump, "G", unit) - ref, np.inf) / norm_lp(ref, np.inf), 1e-6))

    # Burgers characteristics, pre-shock
    from .dynamics import StepController, integrate
    gb = Grid1D(2 * np.pi, 512)
    a = 0.2
    t_end = 1.0
    traj = integrate(gb.sample(lambda x: a * np.sin(x)), unit,
                     StepController(t_end=t_end, snapshot_stride=0), disable_F=True)
    xi0 = gb.x.copy()
    for _ in range(60):
        xi0 = gb.x - t_end * a * np.sin(xi0)
    rows.append(_row("burgers_characteristics", np.max(np.abs(traj.final.values - a * np.sin(xi0))), 1e-6))

    # conservation, b = 1 and b = 0
    from .experiments import run_conservation_study
    for b in (1.0, 0.0):
        rep = run_conservation_study(b, amplitude=0.05, t_end=0.1, n=256, identity=False,
                                     ctrl=StepController(t_end=0.1, dt_max=0.01))
        rows.append(_row(f"conservation_drift_b{b:g}", rep.drift, 1e-5))

    # measured constants, grid doubling
    coarse = Grid1D(2 * np.pi, 128)
    rows.append(_row("f_bound_constant_doubling",
                     _doubling_change(lambda c: f_bound_constant(c, unit, BesovIndex(3, 2, 2)), coarse, seed), 0.1))
    rows.append(_row("product_constant_doubling", _doubling_change(product_constant, coarse, seed), 0.1))
    rows.append(_row("commutator_constant_doubling", _doubling_change(commutator_constant, coarse, seed), 0.1))
    return rows
