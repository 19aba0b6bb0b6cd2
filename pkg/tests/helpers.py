"""Shared fixtures-free helpers: baseline rates and independent oracles."""

from __future__ import annotations

import numpy as np

from hivrd.grid import GridSpec, ScalarField, _laplacian_spectral
from hivrd.model import ModelParams, params_from_r0, reproductive_ratio

# baseline rate constants used throughout (bifurcation-diagram regime)
BASE = dict(gamma=0.001, N=1000.0, mu_T=0.1, mu_I=0.5, mu_V=10.0, d_V=1.0)

# demo 4x4 source/sink cell (scenarios/cell4.csv), row j, column i
CELL4 = np.array(
    [
        [1.60, 1.41, 1.55, 0.819],
        [0.800, 0.165, 2.59, 0.872],
        [1.20, 0.489, 1.37, 0.453],
        [2.09, 4.25e-4, 0.270, 2.80],
    ]
)


def const_params(spec: GridSpec, r0: float, **over) -> ModelParams:
    kw = {**BASE, **over}
    return params_from_r0(ScalarField.constant(spec, r0), **kw)


def field_params(r0: ScalarField, **over) -> ModelParams:
    kw = {**BASE, **over}
    return params_from_r0(r0, **kw)


def dense_lambda_max(d: float, mu_field: ScalarField) -> float:
    """Oracle: assemble the dense discrete operator d*Lap - diag(mu) column by
    column and take the top eigenvalue of the symmetrized matrix."""
    spec = mu_field.spec
    n = spec.n
    size = n * n
    A = np.empty((size, size))
    e = np.zeros(size)
    for col in range(size):
        e[col] = 1.0
        A[:, col] = d * _laplacian_spectral(spec, e.reshape(n, n)).ravel()
        e[col] = 0.0
    A -= np.diag(mu_field.values.ravel())
    A = 0.5 * (A + A.T)
    return float(np.linalg.eigvalsh(A)[-1])


def picard_steady(p: ModelParams, tol: float, v_start: float = 123.0, max_iter: int = 200000):
    """Oracle: plain Picard fixed-point loop with its own FFT inversion and a
    start far from the monotone iteration's upper solution."""
    r0 = reproductive_ratio(p).values
    n = p.spec.n
    h = p.spec.ell / n
    ky = 2 * np.pi * np.fft.fftfreq(n, d=h)
    kx = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    den = p.mu_V + p.d_V * (ky[:, None] ** 2 + kx[None, :] ** 2)
    v = np.full((n, n), float(v_start))
    for _ in range(max_iter):
        rhs = p.mu_T * p.mu_V * r0 * v / (p.gamma * v + p.mu_T)
        v_new = np.fft.irfft2(np.fft.rfft2(rhs) / den, s=(n, n))
        if np.abs(v_new - v).max() < tol:
            return v_new
        v = v_new
    raise RuntimeError("picard oracle did not converge")


def smooth_bump(spec: GridSpec, amplitude: float = 1.0) -> ScalarField:
    """Band-limited non-negative bump centered in the domain (safe under
    spectral diffusion at any step size)."""
    return ScalarField.from_function(
        spec,
        lambda x, y: 0.25
        * amplitude
        * (1 + np.cos(2 * np.pi * (x - 0.5)))
        * (1 + np.cos(2 * np.pi * (y - 0.5))),
    )
