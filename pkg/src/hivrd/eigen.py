"""Principal eigenvalue of d*Laplacian - mu(x) with periodic boundary conditions.

The largest eigenvalue lambda_max of A = d*Lap - mu carries the infection
criterion: with mu = mu_V (1 - R0(x)), its value lambda_0 is <= 0 when only
the uninfected equilibrium exists and > 0 when a unique positive infected
equilibrium exists.  The positive eigenvalue of the uninfected-state
linearization is the fixed point of s = lambda(s), located by bisection.

Solver: shifted inverse iteration on B = (mu + sigma) - d*Lap with the fixed
shift sigma = -inf(mu) + 1, which makes B symmetric positive definite.  Each
inverse application is a preconditioned CG solve; the preconditioner is the
exact constant-coefficient Helmholtz inverse at mean(mu) + sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, _helmholtz_solve_array, _laplacian_spectral
from .model import ModelParams, reproductive_ratio

__all__ = [
    "EigenResult",
    "EigenConvergenceError",
    "principal_eigen",
    "lambda0",
    "lambda_curve",
    "instability_eigenvalue",
]


class EigenConvergenceError(RuntimeError):
    """Inverse iteration failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class EigenResult:
    """Largest eigenvalue with its positive, sup-normalized eigenfunction.

    residual is ||(d*Lap - mu) phi - lambda phi||_inf at sup(phi) = 1.
    positive is False when the computed eigenfunction fails the strict
    positivity check (a symptom of under-resolving a rough coefficient);
    degenerate flags a top-of-spectrum gap estimated below the tolerance.
    """

    lambda_max: float
    phi: ScalarField
    iterations: int
    residual: float
    positive: bool = True
    degenerate: bool = False


def _pcg_solve(apply_B, apply_M, b: np.ndarray, x0: np.ndarray, rtol: float, max_iter: int = 2000) -> np.ndarray:
    """Preconditioned CG for SPD B; stops at ||r||_2 <= rtol * ||b||_2."""
    x = x0.copy()
    r = b - apply_B(x)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    z = apply_M(r)
    p = z
    rz = float(np.vdot(r, z).real)
    for _ in range(max_iter):
        if np.linalg.norm(r) <= rtol * bnorm:
            break
        Bp = apply_B(p)
        alpha = rz / float(np.vdot(p, Bp).real)
        x = x + alpha * p
        r = r - alpha * Bp
        z = apply_M(r)
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def principal_eigen(d: float, mu_field: ScalarField, tol: float = 1e-10, max_iter: int = 500) -> EigenResult:
    """Largest eigenvalue and positive eigenfunction of d*Lap - mu(x).

    Deterministic contract: base shift sigma_0 = -inf(mu) + 1, initial
    iterate the constant field 1, convergence when both the eigenvalue
    increment and the sup-norm residual drop below tol.  After a few
    fixed-shift steps the shift tracks the Rayleigh quotient, kept above
    lambda_max by the symmetric residual bound (lambda_max <= lam + ||r||_2)
    so the shifted operator stays positive definite for CG.
    """
    if not d > 0:
        raise ValueError(f"diffusivity d must be > 0, got {d}")
    spec = mu_field.spec
    mu = mu_field.values
    sigma0 = -float(mu.min()) + 1.0  # mu + sigma0 >= 1, so sigma0*Id - A is SPD

    def apply_A(v: np.ndarray) -> np.ndarray:
        return d * _laplacian_spectral(spec, v) - mu * v

    def make_B(sigma: float):
        shifted = mu + sigma
        mu_bar = float(shifted.mean())

        def apply_B(v: np.ndarray) -> np.ndarray:
            return shifted * v - d * _laplacian_spectral(spec, v)

        def apply_M(v: np.ndarray) -> np.ndarray:
            return _helmholtz_solve_array(spec, v, d, mu_bar)

        return apply_B, apply_M

    def stats(v: np.ndarray):
        r = apply_A(v)
        lam = float(np.sum(v * r) / np.sum(v * v))
        r -= lam * v
        res_sup = float(np.abs(r).max())
        res_l2 = float(np.linalg.norm(r) / np.linalg.norm(v))
        return lam, res_sup, res_l2

    phi = np.ones(spec.shape)
    lam, residual, res_l2 = stats(phi)
    inner_tol = tol / 10.0
    phi_prev = None
    for it in range(1, max_iter + 1):
        if it <= 3:
            sigma = sigma0
        else:
            # Rayleigh-quotient acceleration with an SPD safeguard:
            # lambda_max lies in [lam, lam + res_l2], so this shift stays above it
            sigma = min(lam + max(2.0 * res_l2, 10.0 * tol), sigma0)
        apply_B, apply_M = make_B(sigma)
        x0 = phi / max(sigma - lam, 10.0 * tol)
        z = _pcg_solve(apply_B, apply_M, phi, x0, max(inner_tol, min(1e-2, res_l2 * 1e-3)))
        pivot = z.flat[np.abs(z).argmax()]
        if pivot == 0.0:
            raise EigenConvergenceError("inverse iteration produced the zero vector", np.inf, it)
        phi_new = z / pivot
        lam_new, residual, res_l2 = stats(phi_new)
        converged = abs(lam_new - lam) < tol and residual < tol
        phi_prev, phi, lam = phi, phi_new, lam_new
        if converged:
            degenerate = _gap_estimate(apply_A, phi, phi_prev, lam) < tol
            positive = bool(phi.min() > 0.0)
            if not positive:
                import warnings

                warnings.warn(
                    "principal eigenfunction is not strictly positive; "
                    "the coefficient field may be under-resolved",
                    RuntimeWarning,
                    stacklevel=2,
                )
            return EigenResult(lam, ScalarField(spec, phi), it, residual, positive, degenerate)
    raise EigenConvergenceError(
        f"inverse iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual,
        max_iter,
    )


def _gap_estimate(apply_A, phi: np.ndarray, phi_prev: np.ndarray | None, lam: float) -> float:
    """Spectral-gap estimate from a 2x2 Rayleigh-Ritz over the last iterates.

    Returns +inf when the subspace has collapsed (very fast convergence,
    i.e. a comfortable gap).
    """
    if phi_prev is None:
        return np.inf
    q1 = phi / np.linalg.norm(phi)
    w = phi_prev - np.sum(q1 * phi_prev) * q1
    wn = float(np.linalg.norm(w))
    if wn < 1e-8 * float(np.linalg.norm(phi_prev)):
        return np.inf
    q2 = w / wn
    a11 = float(np.sum(q1 * apply_A(q1)))
    a12 = float(np.sum(q1 * apply_A(q2)))
    a22 = float(np.sum(q2 * apply_A(q2)))
    theta = np.linalg.eigvalsh(np.array([[a11, a12], [a12, a22]]))
    return abs(lam - float(theta[0]))


def lambda0(p: ModelParams, tol: float = 1e-10) -> EigenResult:
    """The infection criterion: largest eigenvalue of d_V*Lap + mu_V (R0 - 1).

    lambda_0 <= 0 means the uninfected equilibrium is the only non-negative
    steady state; lambda_0 > 0 certifies a unique positive infected one.
    """
    r0 = reproductive_ratio(p)
    mu = ScalarField(p.spec, p.mu_V * (1.0 - r0.values))
    return principal_eigen(p.d_V, mu, tol)


def lambda_curve(p: ModelParams, s: float, tol: float = 1e-10) -> float:
    """lambda(s): largest eigenvalue of d_V*Lap + mu_V (mu_I R0/(s+mu_I) - 1).

    Decreasing in s, equal to lambda_0 at s = 0, tending to -mu_V as
    s -> infinity.
    """
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    r0 = reproductive_ratio(p)
    mu = ScalarField(p.spec, p.mu_V * (1.0 - p.mu_I * r0.values / (s + p.mu_I)))
    return principal_eigen(p.d_V, mu, tol).lambda_max


def instability_eigenvalue(p: ModelParams, tol: float = 1e-8) -> float:
    """Positive fixed point s* of s = lambda(s), by bisection on [0, lambda_0].

    s - lambda(s) is increasing, negative at 0 and positive at lambda_0, so
    the bracket always contains the root.  s* is a positive eigenvalue of the
    uninfected-state linearization, certifying its instability.
    """
    eig_tol = min(tol / 10.0, 1e-9)
    lam0 = lambda0(p, eig_tol).lambda_max
    if lam0 <= 0:
        raise ValueError("uninfected state stable (lambda_0 <= 0), no positive eigenvalue")
    lo, hi = 0.0, lam0
    s = lam0 / 2.0
    for _ in range(200):
        s = 0.5 * (lo + hi)
        g = s - lambda_curve(p, s, eig_tol)
        if abs(g) <= tol:
            return s
        if g < 0:
            lo = s
        else:
            hi = s
    return s
