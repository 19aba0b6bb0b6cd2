"""Fourier-mode stability of the infected equilibrium for constant R0 > 1.

With constant coefficients the linearization block-diagonalizes over the
Laplacian eigenvalues -lambda_k, lambda_k = (2 pi / ell)^2 (m1^2 + m2^2).
Each mode contributes the 3x3 matrix

    M_k = [[-mu_T R0,      0,      -mu_V/N],
           [mu_T (R0-1),  -mu_I,    mu_V/N],
           [0,            N mu_I,  -lambda_k d_V - mu_V]]

whose characteristic cubic is P_k(x) = x^3 + b x^2 + c x + d with

    b = mu_T R0 + mu_I + mu_V + d_V lambda_k
    c = mu_T R0 (mu_I + mu_V) + d_V lambda_k (mu_T R0 + mu_I)
    d = mu_I mu_V mu_T (R0 - 1) + d_V lambda_k mu_I mu_T R0.

The Routh-Hurwitz conditions b > 0, d > 0, b c - d > 0 decide stability of
each mode; the full spectrum adds the essential points -mu_I and -mu_T R0.
Because b, c, d and b c - d are all increasing in lambda_k (positive rates),
stability at the cutoff extends to every higher mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, reproductive_ratio

__all__ = [
    "ModeStability",
    "StabilityReport",
    "mode_eigenvalues",
    "characteristic_cubic",
    "routh_hurwitz",
    "mode_matrix",
    "mode_matrix_roots",
    "stability_report",
]

# |d| or |bc - d| at or below this counts as a marginal (boundary) mode
_MARGINAL_TOL = 1e-14


def _constant_r0(p: ModelParams) -> float:
    if not p.is_constant_alpha():
        raise ValueError(
            "constant R0 required; for heterogeneous coefficients use the "
            "principal-eigenvalue criterion in hivrd.eigen"
        )
    r0 = float(reproductive_ratio(p).values.mean())
    if r0 <= 0:
        raise ValueError(f"R0 must be positive, got {r0}")
    return r0


def mode_eigenvalues(ell: float, max_index: int) -> list[tuple[float, int, tuple[int, int]]]:
    """Distinct lambda_k = (2 pi/ell)^2 (m1^2 + m2^2) for |m1|, |m2| <= max_index.

    Returns (lambda_k, multiplicity, representative_mode) ascending; the
    representative is the lexicographically smallest pair with
    0 <= m2 <= m1 realizing the value.  lambda_0 = 0 is always first with
    multiplicity 1.
    """
    if not ell > 0:
        raise ValueError(f"ell must be > 0, got {ell}")
    if max_index < 0:
        raise ValueError(f"max_index must be >= 0, got {max_index}")
    m = np.arange(-max_index, max_index + 1)
    s = (m[:, None] ** 2 + m[None, :] ** 2).ravel()
    sums, counts = np.unique(s, return_counts=True)
    reps: dict[int, tuple[int, int]] = {}
    for m1 in range(max_index + 1):
        for m2 in range(m1 + 1):
            v = m1 * m1 + m2 * m2
            if v not in reps:
                reps[v] = (m1, m2)
    scale = (2.0 * np.pi / ell) ** 2
    return [(scale * float(v), int(c), reps[int(v)]) for v, c in zip(sums, counts)]


def _cubic_bcd(r0, mu_T, mu_I, mu_V, d_V, lam):
    """Raw coefficient formulas; broadcasts over lam (and r0)."""
    b = mu_T * r0 + mu_I + mu_V + d_V * lam
    c = mu_T * r0 * (mu_I + mu_V) + d_V * lam * (mu_T * r0 + mu_I)
    d = mu_I * mu_V * mu_T * (r0 - 1.0) + d_V * lam * mu_I * mu_T * r0
    return b, c, d


def characteristic_cubic(p: ModelParams, lambda_k: float) -> tuple[float, float, float]:
    """Coefficients (b, c, d) of the mode cubic P_k; constant R0 only."""
    if lambda_k < 0:
        raise ValueError(f"lambda_k must be >= 0, got {lambda_k}")
    r0 = _constant_r0(p)
    b, c, d = _cubic_bcd(r0, p.mu_T, p.mu_I, p.mu_V, p.d_V, float(lambda_k))
    return float(b), float(c), float(d)


def routh_hurwitz(b: float, c: float, d: float) -> bool:
    """All roots of x^3 + b x^2 + c x + d in the open left half-plane,
    iff b > 0, d > 0 and b c - d > 0 (boundary cases return False)."""
    return b > 0.0 and d > 0.0 and b * c - d > 0.0


def mode_matrix(p: ModelParams, lambda_k: float) -> np.ndarray:
    r0 = _constant_r0(p)
    return np.array(
        [
            [-p.mu_T * r0, 0.0, -p.mu_V / p.N],
            [p.mu_T * (r0 - 1.0), -p.mu_I, p.mu_V / p.N],
            [0.0, p.N * p.mu_I, -lambda_k * p.d_V - p.mu_V],
        ]
    )


def mode_matrix_roots(p: ModelParams, lambda_k: float) -> np.ndarray:
    """Roots of P_k via the companion matrix, cross-checked against the
    eigenvalues of the assembled 3x3 mode matrix (two independent paths)."""
    b, c, d = characteristic_cubic(p, lambda_k)
    roots = np.roots([1.0, b, c, d])
    direct = np.linalg.eigvals(mode_matrix(p, lambda_k))
    order = lambda z: (np.round(z.real, 12), np.round(z.imag, 12))  # noqa: E731
    r_s = np.array(sorted(roots, key=order))
    d_s = np.array(sorted(direct, key=order))
    scale = 1.0 + max(abs(b), abs(c), abs(d))
    if np.abs(r_s - d_s).max() > 1e-8 * scale:
        raise RuntimeError(
            "companion-matrix roots disagree with direct mode-matrix eigenvalues"
        )
    return r_s


@dataclass(frozen=True)
class ModeStability:
    """Verdict for one distinct Laplacian eigenvalue."""

    mode: tuple[int, int]
    lambda_k: float
    multiplicity: int
    b: float
    c: float
    d: float
    roots: tuple
    stable: bool
    rh_pass: bool
    marginal: bool = False


@dataclass(frozen=True)
class StabilityReport:
    """Per-mode verdicts up to the cutoff plus the essential spectrum points.

    tail_stable records the monotone-coefficient argument: when it is True
    and every computed mode passes, all_modes covers the entire spectrum,
    not just the modes up to the cutoff.  unstable_at_zero_mode tells whether
    an instability (if any) already appears in the diffusion-free subsystem.
    """

    modes: list[ModeStability]
    essential: tuple[float, float]
    verdict: bool
    all_modes: bool
    tail_stable: bool
    unstable_at_zero_mode: bool | None


def stability_report(p: ModelParams, max_index: int = 128) -> StabilityReport:
    """Routh-Hurwitz report over all distinct lambda_k up to the cutoff.

    Requires constant R0 > 1 so the infected equilibrium is biological.
    """
    r0 = _constant_r0(p)
    if r0 <= 1.0:
        raise ValueError(f"infected equilibrium requires R0 > 1, got {r0}")
    modes = []
    for lam, mult, rep in mode_eigenvalues(p.spec.ell, max_index):
        b, c, d = characteristic_cubic(p, lam)
        roots = mode_matrix_roots(p, lam)
        rh = routh_hurwitz(b, c, d)
        stable = bool(np.all(roots.real < 0.0))
        scale = 1.0 + max(abs(b), abs(c), abs(d))
        marginal = abs(d) <= _MARGINAL_TOL * scale or abs(b * c - d) <= _MARGINAL_TOL * scale
        modes.append(
            ModeStability(rep, lam, mult, b, c, d, tuple(roots), stable, rh, marginal)
        )

    # Monotone tail: b, c, d are affine in lambda_k with positive slopes, and
    # (bc - d)' = d_V [(mu_T R0 + mu_I) b + c - mu_I mu_T R0] + 2 d_V^2
    # (mu_T R0 + mu_I) lambda_k is positive at lambda_k = 0 already, so all
    # three Routh-Hurwitz quantities increase beyond the cutoff.
    b0, c0, _ = _cubic_bcd(r0, p.mu_T, p.mu_I, p.mu_V, p.d_V, 0.0)
    bcd_slope_at_0 = p.d_V * ((p.mu_T * r0 + p.mu_I) * b0 + c0 - p.mu_I * p.mu_T * r0)
    tail_stable = bool(bcd_slope_at_0 > 0 and p.d_V > 0 and modes[-1].rh_pass)

    essential = (-p.mu_I, -p.mu_T * r0)
    all_computed_stable = all(m.stable for m in modes)
    verdict = all_computed_stable and essential[0] < 0 and essential[1] < 0
    unstable_at_zero: bool | None = None
    if not all_computed_stable:
        unstable_at_zero = not modes[0].stable
    return StabilityReport(
        modes=modes,
        essential=essential,
        verdict=verdict,
        all_modes=verdict and tail_stable,
        tail_stable=tail_stable,
        unstable_at_zero_mode=unstable_at_zero,
    )
