"""Rapidly alternating source/sink environments and their homogenized limit.

A unit cell of reproductive-ratio samples is tiled at scale eps = ell/k
(k copies per side).  As eps -> 0 the medium behaves like a constant one
with ratio equal to the arithmetic cell mean M (the ratio enters as a
zeroth-order coefficient, so the weak limit is the plain mean, not the
harmonic one): the eigenvalue tends to mu_V (M - 1) and, for M > 1, the
virus density tends to the constant V0 = mu_T (M - 1)/gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import lambda0
from .grid import GridSpec, ScalarField
from .model import ModelParams, params_from_r0
from .steady import monotone_iterate

__all__ = [
    "UnitCell",
    "HomogLimit",
    "HomogRecord",
    "HomogStudy",
    "cell_mean",
    "tile",
    "homogenized_limit",
    "convergence_study",
    "read_cell_csv",
    "write_cell_csv",
]


@dataclass(frozen=True)
class UnitCell:
    """m x m piecewise-constant reproductive-ratio samples on the unit square.

    values[j, i] is the ratio on the sub-square with x in (i/m, (i+1)/m) and
    y in (j/m, (j+1)/m); all samples non-negative and finite.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"cell values must be a square 2D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("cell values must be finite")
        if v.min() < 0:
            raise ValueError("cell values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def cell_mean(cell: UnitCell) -> float:
    """Arithmetic mean over the equal-area sub-squares."""
    return float(cell.values.mean())


def tile(cell: UnitCell, epsilon: float, spec: GridSpec) -> ScalarField:
    """Tile the cell with period epsilon over the grid.

    Requires ell/epsilon to be a positive integer k and n divisible by k*m,
    so every sub-square is resolved by an integer number of cell centers and
    the grid mean of the tiling equals the cell mean exactly.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    k_float = spec.ell / epsilon
    k = int(round(k_float))
    if k < 1 or abs(k_float - k) > 1e-9 * k_float:
        raise ValueError(f"ell/epsilon = {k_float} is not a positive integer")
    m = cell.m
    period = k * m
    if spec.n % period != 0:
        n_min = period
        while n_min < 4 or n_min % 2 != 0:
            n_min += period
        raise ValueError(
            f"n = {spec.n} not divisible by k*m = {period}; "
            f"smallest compatible n is {n_min}"
        )
    q = spec.n // period  # grid points per cell sub-square
    idx = (np.arange(spec.n) // q) % m
    return ScalarField(spec, cell.values[np.ix_(idx, idx)])


@dataclass(frozen=True)
class HomogLimit:
    """Homogenized medium: cell mean M, limit density V0, limit eigenvalue.

    infected is False when M <= 1, in which case the homogenized medium
    carries no virus (V0 = 0).
    """

    M: float
    V0: float
    lambda0_limit: float
    infected: bool


def homogenized_limit(p: ModelParams, cell: UnitCell) -> HomogLimit:
    """Constant limit state: V0 = mu_T (M - 1)/gamma and eigenvalue
    mu_V (M - 1), with V0 = 0 on the uninfected branch M <= 1."""
    M = cell_mean(cell)
    lam = p.mu_V * (M - 1.0)
    if M <= 1.0:
        return HomogLimit(M, 0.0, lam, infected=False)
    return HomogLimit(M, p.mu_T * (M - 1.0) / p.gamma, lam, infected=True)


@dataclass(frozen=True)
class HomogRecord:
    epsilon: float
    n: int
    lambda0_eps: float
    sup_dist: float
    iterations: int


@dataclass(frozen=True)
class HomogStudy:
    """Per-epsilon eigenvalues and sup-distances to the homogenized limit.

    monotone is True when sup|V_eps - V0| is non-increasing as epsilon
    decreases; flagged marks a non-monotone step beyond 10% slack
    (discretization noise, not fatal).
    """

    M: float
    V0: float
    lambda0_limit: float
    records: list[HomogRecord]
    monotone: bool
    flagged: bool


def convergence_study(
    p: ModelParams,
    cell: UnitCell,
    epsilons,
    tol: float = 1e-10,
    points_per_subcell: int = 4,
) -> HomogStudy:
    """Tile, solve, and record lambda_0^eps and sup|V_eps - V0| per epsilon.

    Epsilons are processed in decreasing order.  The grid scales with 1/eps
    (points_per_subcell centers per cell sub-square, at least 4) so the
    refinement isolates the homogenization limit from discretization error.
    p supplies the scalar rates; its alpha field is ignored and replaced by
    the tiled ratio.
    """
    if points_per_subcell < 4:
        raise ValueError("points_per_subcell must be >= 4 to resolve each sub-square")
    limit = homogenized_limit(p, cell)
    if not limit.infected:
        raise ValueError(f"cell mean M = {limit.M} <= 1: homogenized medium is uninfected")
    eps_sorted = sorted(float(e) for e in epsilons)
    if not eps_sorted:
        raise ValueError("epsilons must be non-empty")
    records = []
    for eps in reversed(eps_sorted):  # largest epsilon first
        k = int(round(p.spec.ell / eps))
        if abs(p.spec.ell / eps - k) > 1e-9 * k or k < 1:
            raise ValueError(f"ell/epsilon = {p.spec.ell / eps} is not a positive integer")
        n = k * cell.m * points_per_subcell
        if n % 2 != 0:
            n *= 2
        spec = GridSpec(n, p.spec.ell)
        r0 = tile(cell, eps, spec)
        pe = params_from_r0(r0, p.gamma, p.N, p.mu_T, p.mu_I, p.mu_V, p.d_V)
        lam_eps = lambda0(pe, tol=min(tol, 1e-10)).lambda_max
        sol = monotone_iterate(pe, tol=tol)
        if sol.branch != "infected":
            raise RuntimeError(f"expected infected branch at epsilon = {eps}")
        dist = float(np.abs(sol.triple.V.values - limit.V0).max())
        records.append(HomogRecord(eps, n, lam_eps, dist, sol.iterations))

    dists = [r.sup_dist for r in records]
    monotone = all(b <= a for a, b in zip(dists, dists[1:]))
    flagged = any(b > 1.1 * a for a, b in zip(dists, dists[1:]))
    return HomogStudy(limit.M, limit.V0, limit.lambda0_limit, records, monotone, flagged)


def read_cell_csv(path) -> UnitCell:
    """Cell CSV: m lines of m comma-separated ratio values (no header)."""
    vals = np.loadtxt(path, delimiter=",", ndmin=2)
    return UnitCell(vals)


def write_cell_csv(cell: UnitCell, path) -> None:
    with open(path, "w") as fh:
        for row in cell.values:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
