"""Model parameters, heterogeneous reproductive ratio, closed-form equilibria.

Only the target-cell production rate alpha varies in space; the remaining
rates are positive constants.  The reproductive ratio derived from alpha,

    R0(x) = gamma * N * alpha(x) / (mu_T * mu_V),

splits the domain into sinks (R0 < 1) and sources (R0 > 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField

__all__ = [
    "ModelParams",
    "EquilibriumTriple",
    "reproductive_ratio",
    "classify_sites",
    "uninfected_equilibrium",
    "infected_equilibrium_constant",
    "infected_from_V",
    "alpha_for_r0",
    "params_from_r0",
]

# alpha counts as spatially constant when sup-inf is below this relative slack
_CONST_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """The seven model constants plus the alpha field.

    alpha: target-cell production rate, >= 0 and not identically zero;
    gamma: infection rate; N: burst size; mu_T, mu_I, mu_V: death/clearance
    rates; d_V: virus diffusivity.  All scalars strictly positive.  No unit
    system is enforced (the conventional choice is per-day rates).
    """

    alpha: ScalarField
    gamma: float
    N: float
    mu_T: float
    mu_I: float
    mu_V: float
    d_V: float

    def __post_init__(self) -> None:
        for name in ("gamma", "N", "mu_T", "mu_I", "mu_V", "d_V"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"parameter {name} must be positive and finite, got {v}")
        a = self.alpha.values
        if a.min() < 0:
            raise ValueError("alpha must be non-negative everywhere")
        if a.max() <= 0:
            raise ValueError("alpha must not be identically zero")

    @property
    def spec(self) -> GridSpec:
        return self.alpha.spec

    def is_constant_alpha(self) -> bool:
        a = self.alpha.values
        return float(a.max() - a.min()) < _CONST_TOL * (1.0 + float(np.abs(a).max()))


@dataclass(frozen=True)
class EquilibriumTriple:
    """Steady (T, I, V) densities; all components non-negative."""

    T: ScalarField
    I: ScalarField
    V: ScalarField

    def __post_init__(self) -> None:
        for name in ("T", "I", "V"):
            if getattr(self, name).min() < 0:
                raise ValueError(f"equilibrium component {name} has negative values")


def reproductive_ratio(p: ModelParams) -> ScalarField:
    """R0(x) = gamma * N * alpha(x) / (mu_T * mu_V), pointwise."""
    scale = p.gamma * p.N / (p.mu_T * p.mu_V)
    return ScalarField(p.spec, scale * p.alpha.values)


def classify_sites(r0: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (sources, sinks) masks: R0 > 1 and R0 < 1 respectively."""
    return r0.values > 1.0, r0.values < 1.0


def alpha_for_r0(r0_values, gamma: float, N: float, mu_T: float, mu_V: float):
    """Invert the ratio definition: alpha = R0 * mu_T * mu_V / (gamma * N)."""
    return np.asarray(r0_values, dtype=np.float64) * (mu_T * mu_V / (gamma * N))


def params_from_r0(
    r0: ScalarField,
    gamma: float,
    N: float,
    mu_T: float,
    mu_I: float,
    mu_V: float,
    d_V: float,
) -> ModelParams:
    """Build ModelParams whose alpha realizes the given reproductive ratio."""
    a = alpha_for_r0(r0.values, gamma, N, mu_T, mu_V)
    return ModelParams(ScalarField(r0.spec, a), gamma, N, mu_T, mu_I, mu_V, d_V)


def uninfected_equilibrium(p: ModelParams) -> EquilibriumTriple:
    """T = alpha/mu_T, I = V = 0."""
    zero = ScalarField.constant(p.spec, 0.0)
    return EquilibriumTriple(ScalarField(p.spec, p.alpha.values / p.mu_T), zero, zero)


def infected_equilibrium_constant(p: ModelParams) -> EquilibriumTriple:
    """Closed-form infected state for constant alpha with R0 > 1.

    T_i = mu_V/(gamma N), I_i = (alpha gamma N - mu_T mu_V)/(gamma N mu_I),
    V_i = (alpha gamma N - mu_T mu_V)/(gamma mu_V), all constant in space.
    The I component is pinned by the virion balance N mu_I I = mu_V V; some
    statements of this triple drop the 1/mu_I factor, which fails that
    balance whenever mu_I != 1.
    """
    if not p.is_constant_alpha():
        raise ValueError("infected_equilibrium_constant requires spatially constant alpha")
    a = float(p.alpha.values.mean())
    r0 = p.gamma * p.N * a / (p.mu_T * p.mu_V)
    excess = a * p.gamma * p.N - p.mu_T * p.mu_V
    # R0 = 1 is the bifurcation point: the triple degenerates to the
    # uninfected branch (V = 0) rather than turning negative, so allow it.
    if excess < 0:
        raise ValueError(f"no biological infected equilibrium: R0 = {r0} < 1")
    T = ScalarField.constant(p.spec, p.mu_V / (p.gamma * p.N))
    I = ScalarField.constant(p.spec, excess / (p.gamma * p.N * p.mu_I))
    V = ScalarField.constant(p.spec, excess / (p.gamma * p.mu_V))
    return EquilibriumTriple(T, I, V)


def infected_from_V(p: ModelParams, V: ScalarField) -> EquilibriumTriple:
    """Reconstruct T and I pointwise from a non-negative virus density V:

    T = alpha/(gamma V + mu_T),  I = gamma alpha V / (mu_I (gamma V + mu_T)).
    With V = 0 this reproduces the uninfected equilibrium.
    """
    if V.min() < 0:
        raise ValueError("infected_from_V requires V >= 0")
    a = p.alpha.values
    den = p.gamma * V.values + p.mu_T
    T = a / den
    I = p.gamma * a * V.values / (p.mu_I * den)
    return EquilibriumTriple(ScalarField(p.spec, T), ScalarField(p.spec, I), V)
