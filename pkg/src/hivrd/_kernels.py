"""Hot pointwise reaction kernels: numba-compiled with a pure-numpy fallback.

The time integrator spends most of its reaction budget in the RK2 substep,
a fused pointwise update over the grid.  The numba build is selected by
default; set HIVRD_KERNELS=numpy to force the fallback (the two paths are
kept semantically identical and are compared in the test suite).  Both
variants are always importable for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "reaction_rk2",
    "reaction_rk2_scalar",
    "reaction_rk2_numpy",
    "reaction_rk2_scalar_numpy",
]


def reaction_rk2_numpy(T, I, V, alpha, gamma, N, mu_T, mu_I, mu_V, dt):
    """Midpoint RK2 on the pointwise reaction system

        T' = alpha - gamma V T - mu_T T
        I' = gamma V T - mu_I I
        V' = N mu_I I - mu_V V

    Returns new (T, I, V) arrays; the inputs are not modified.
    """
    gVT = gamma * V * T
    fT = alpha - gVT - mu_T * T
    fI = gVT - mu_I * I
    fV = N * mu_I * I - mu_V * V
    Tm = T + 0.5 * dt * fT
    Im = I + 0.5 * dt * fI
    Vm = V + 0.5 * dt * fV
    gVTm = gamma * Vm * Tm
    Tn = T + dt * (alpha - gVTm - mu_T * Tm)
    In = I + dt * (gVTm - mu_I * Im)
    Vn = V + dt * (N * mu_I * Im - mu_V * Vm)
    return Tn, In, Vn


def reaction_rk2_scalar_numpy(V, rc, gamma, mu_T, mu_V, dt):
    """Midpoint RK2 on V' = -mu_V V + rc * V/(gamma V + mu_T), rc = mu_T mu_V R0."""
    fV = -mu_V * V + rc * V / (gamma * V + mu_T)
    Vm = V + 0.5 * dt * fV
    return V + dt * (-mu_V * Vm + rc * Vm / (gamma * Vm + mu_T))


def _numba_kernels():
    from numba import njit

    @njit(cache=True)
    def reaction_rk2_nb(T, I, V, alpha, gamma, N, mu_T, mu_I, mu_V, dt):
        n0, n1 = T.shape
        Tn = np.empty_like(T)
        In = np.empty_like(I)
        Vn = np.empty_like(V)
        for i in range(n0):
            for j in range(n1):
                t = T[i, j]
                y = I[i, j]
                v = V[i, j]
                a = alpha[i, j]
                gVT = gamma * v * t
                fT = a - gVT - mu_T * t
                fI = gVT - mu_I * y
                fV = N * mu_I * y - mu_V * v
                tm = t + 0.5 * dt * fT
                ym = y + 0.5 * dt * fI
                vm = v + 0.5 * dt * fV
                gVTm = gamma * vm * tm
                Tn[i, j] = t + dt * (a - gVTm - mu_T * tm)
                In[i, j] = y + dt * (gVTm - mu_I * ym)
                Vn[i, j] = v + dt * (N * mu_I * ym - mu_V * vm)
        return Tn, In, Vn

    @njit(cache=True)
    def reaction_rk2_scalar_nb(V, rc, gamma, mu_T, mu_V, dt):
        n0, n1 = V.shape
        Vn = np.empty_like(V)
        for i in range(n0):
            for j in range(n1):
                v = V[i, j]
                r = rc[i, j]
                fV = -mu_V * v + r * v / (gamma * v + mu_T)
                vm = v + 0.5 * dt * fV
                Vn[i, j] = v + dt * (-mu_V * vm + r * vm / (gamma * vm + mu_T))
        return Vn

    return reaction_rk2_nb, reaction_rk2_scalar_nb


_requested = os.environ.get("HIVRD_KERNELS", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"HIVRD_KERNELS must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        reaction_rk2, reaction_rk2_scalar = _numba_kernels()
        BACKEND = "numba"
    except ImportError:
        reaction_rk2 = reaction_rk2_numpy
        reaction_rk2_scalar = reaction_rk2_scalar_numpy
        BACKEND = "numpy"
else:
    reaction_rk2 = reaction_rk2_numpy
    reaction_rk2_scalar = reaction_rk2_scalar_numpy
    BACKEND = "numpy"
