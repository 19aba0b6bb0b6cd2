"""Non-negative steady states of the virus equation by monotone iteration.

The steady problem reduces to the scalar semilinear equation

    d_V Lap V - mu_V V + mu_T mu_V R0(x) V/(gamma V + mu_T) = 0.

When lambda_0 <= 0 the only non-negative solution is V = 0.  When
lambda_0 > 0 the iteration starts from the constant upper solution
mu_T (sup R0 - 1)/gamma and produces a pointwise non-increasing sequence of
Helmholtz solves that converges to the unique positive solution, sandwiched
above the lower solution c * phi_0.  T and I are reconstructed from V.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigen import EigenResult, lambda0
from .grid import ScalarField, _helmholtz_solve_array, _laplacian_spectral, sup_norm
from .model import (
    EquilibriumTriple,
    ModelParams,
    infected_from_V,
    reproductive_ratio,
    uninfected_equilibrium,
)

__all__ = [
    "SteadyResult",
    "SteadyConvergenceError",
    "SandwichViolationError",
    "upper_solution",
    "lower_solution",
    "monotone_iterate",
    "steady_residual",
]

# |lambda_0| below this is treated as the bifurcation point
CRITICAL_LAMBDA0 = 1e-8
# negative overshoots smaller than this are clamped to zero
_CLAMP = 1e-12


class SteadyConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class SandwichViolationError(RuntimeError):
    """An iterate fell below the lower solution: bug or under-resolution."""


@dataclass(frozen=True)
class SteadyResult:
    """Branch label with the steady triple and convergence diagnostics.

    monotone_violation is the largest pointwise increase seen between
    successive iterates (0 up to roundoff when started from the upper
    solution); critical marks |lambda_0| below the bifurcation-point gate.
    """

    branch: str  # "uninfected" | "infected"
    triple: EquilibriumTriple
    iterations: int
    residual: float
    monotone_violation: float
    lambda0: float
    critical: bool = False


def upper_solution(p: ModelParams) -> ScalarField:
    """Constant upper solution mu_T (sup R0 - 1)/gamma; requires sup R0 > 1."""
    r_sup = float(reproductive_ratio(p).values.max())
    if r_sup <= 1.0:
        raise ValueError(f"sup R0 = {r_sup} <= 1: no positive constant upper solution")
    return ScalarField.constant(p.spec, p.mu_T * (r_sup - 1.0) / p.gamma)


def lower_solution(p: ModelParams, eig: EigenResult) -> ScalarField:
    """c * phi_0 with c = min(lambda_0 mu_T/(gamma mu_V sup R0), mu_T (sup R0 - 1)/gamma).

    The first bound is what makes c*phi_0 a genuine lower solution: plugging
    c*phi_0 into the steady operator leaves c*phi_0*(lambda_0 - gamma c mu_V
    sup R0 * phi_0/(gamma c phi_0 + mu_T)), and the parenthesis is >= 0
    exactly when lambda_0 mu_T >= gamma c mu_V sup R0.
    """
    if eig.lambda_max <= 0:
        raise ValueError(f"lambda_0 = {eig.lambda_max} <= 0: no lower solution")
    r_sup = float(reproductive_ratio(p).values.max())
    c = min(
        eig.lambda_max * p.mu_T / (p.gamma * p.mu_V * r_sup),
        p.mu_T * (r_sup - 1.0) / p.gamma,
    )
    return ScalarField(p.spec, c * eig.phi.values)


def steady_residual(p: ModelParams, V: ScalarField) -> float:
    """Sup-norm defect of d_V Lap V - mu_V V + mu_T mu_V R0 V/(gamma V + mu_T)."""
    if V.min() < 0:
        raise ValueError("steady_residual requires V >= 0")
    v = V.values
    r0 = reproductive_ratio(p).values
    defect = (
        p.d_V * _laplacian_spectral(p.spec, v)
        - p.mu_V * v
        + p.mu_T * p.mu_V * r0 * v / (p.gamma * v + p.mu_T)
    )
    return float(np.abs(defect).max())


def monotone_iterate(
    p: ModelParams,
    tol: float = 1e-10,
    max_iter: int = 2000,
    v0: ScalarField | None = None,
    eigen_tol: float = 1e-10,
) -> SteadyResult:
    """Solve the steady virus equation; branch decided by the sign of lambda_0.

    Each step solves the constant-coefficient problem
    (mu_V - d_V Lap) v_new = mu_T mu_V R0 h(v) with h(t) = t/(gamma t + mu_T),
    stopping when the sup-norm increment drops below tol.  v0 overrides the
    default upper-solution start (used for uniqueness spot checks); iterates
    are always checked against the lower solution.
    """
    eig = lambda0(p, eigen_tol)
    lam0 = eig.lambda_max
    if lam0 <= CRITICAL_LAMBDA0:
        return SteadyResult(
            branch="uninfected",
            triple=uninfected_equilibrium(p),
            iterations=eig.iterations,
            residual=0.0,
            monotone_violation=0.0,
            lambda0=lam0,
            critical=abs(lam0) < CRITICAL_LAMBDA0,
        )

    r0 = reproductive_ratio(p).values
    lower = lower_solution(p, eig).values
    v = (upper_solution(p) if v0 is None else v0).values.copy()
    rhs_scale = p.mu_T * p.mu_V
    violation = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        rhs = rhs_scale * r0 * v / (p.gamma * v + p.mu_T)
        v_new = _helmholtz_solve_array(p.spec, rhs, p.d_V, p.mu_V)
        tiny_neg = (v_new < 0.0) & (v_new > -_CLAMP)
        v_new[tiny_neg] = 0.0
        if float((v_new - lower).min()) < -10.0 * tol:
            raise SandwichViolationError(
                "iterate fell below the lower solution by more than 10*tol"
            )
        violation = max(violation, float((v_new - v).max()))
        inc = float(np.abs(v_new - v).max())
        v = v_new
        if inc < tol:
            break
    else:
        raise SteadyConvergenceError(
            f"monotone iteration did not converge in {max_iter} steps",
            residual=float(np.abs(v_new - v).max()),
        )

    V = ScalarField(p.spec, v)
    return SteadyResult(
        branch="infected",
        triple=infected_from_V(p, V),
        iterations=iterations,
        residual=steady_residual(p, V),
        monotone_violation=max(violation, 0.0),
        lambda0=lam0,
    )
