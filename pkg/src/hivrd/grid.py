"""Periodic 2D grid: scalar fields, spectral operators, norms, CSV I/O.

The domain is the square (0, ell)^2 with periodic boundary conditions,
discretized by an n x n cell-centered grid.  Constant-coefficient operators
are diagonalized exactly by the FFT, so Helmholtz solves and the spectral
Laplacian are exact up to roundoff.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "ScalarField",
    "laplacian",
    "helmholtz_solve",
    "mean",
    "sup_norm",
    "l2_norm",
    "rayleigh_quotient",
    "read_field_csv",
    "write_field_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Cell-centered n x n grid on the periodic square (0, ell)^2.

    Values live at cell centers ((j + 1/2) h, (i + 1/2) h) with h = ell/n,
    where i is the row (y) index and j the column (x) index.  n must be
    even (>= 4) so FFT mode indexing is unambiguous.
    """

    n: int
    ell: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"grid size n must be an even integer >= 4, got {self.n}")
        if not (math.isfinite(self.ell) and self.ell > 0):
            raise ValueError(f"domain side ell must be positive and finite, got {self.ell}")
        h = self.ell / self.n
        ky = 2.0 * np.pi * sfft.fftfreq(self.n, d=h)
        kx = 2.0 * np.pi * sfft.rfftfreq(self.n, d=h)
        # |k|^2 multiplier on the rfft2 layout (y frequencies on axis 0)
        k2 = ky[:, None] ** 2 + kx[None, :] ** 2
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "_k2", k2)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinate arrays of shape (n, n)."""
        c = (np.arange(self.n) + 0.5) * self.h
        x, y = np.meshgrid(c, c, indexing="xy")
        return x, y


@dataclass(frozen=True)
class ScalarField:
    """Real periodic grid function: finite values on an n x n grid.

    ``values[i, j]`` is the sample at x = (j + 1/2) h, y = (i + 1/2) h,
    so row i of the array (and of the CSV dump) is the y index i.
    The array is copied on construction and frozen.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must all be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @staticmethod
    def constant(spec: GridSpec, value: float) -> "ScalarField":
        return ScalarField(spec, np.full(spec.shape, float(value)))

    @staticmethod
    def from_function(spec: GridSpec, fn) -> "ScalarField":
        """Sample fn(x, y) at the cell centers."""
        x, y = spec.cell_centers()
        return ScalarField(spec, fn(x, y))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def _laplacian_spectral(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    return sfft.irfft2(-spec._k2 * sfft.rfft2(v), s=spec.shape)


def _laplacian_stencil5(spec: GridSpec, v: np.ndarray) -> np.ndarray:
    return (
        np.roll(v, 1, axis=0)
        + np.roll(v, -1, axis=0)
        + np.roll(v, 1, axis=1)
        + np.roll(v, -1, axis=1)
        - 4.0 * v
    ) / spec.h**2


def laplacian(f: ScalarField, mode: str = "spectral") -> ScalarField:
    """Periodic Laplacian of f.

    ``spectral`` applies the exact Fourier multiplier -(2*pi/ell)^2 |m|^2 per
    mode; ``stencil5`` applies the 5-point stencil with wraparound indices.
    """
    if mode == "spectral":
        out = _laplacian_spectral(f.spec, f.values)
    elif mode == "stencil5":
        out = _laplacian_stencil5(f.spec, f.values)
    else:
        raise ValueError(f"unknown laplacian mode {mode!r}")
    return ScalarField(f.spec, out)


def _helmholtz_solve_array(spec: GridSpec, rhs: np.ndarray, d: float, mu: float) -> np.ndarray:
    return sfft.irfft2(sfft.rfft2(rhs) / (mu + d * spec._k2), s=spec.shape)


def helmholtz_solve(rhs: ScalarField, d: float, mu: float) -> ScalarField:
    """Solve (mu - d*Laplacian) u = rhs spectrally (exact up to roundoff).

    mu must be > 0: at mu = 0 the operator annihilates the constant mode.
    """
    if not d > 0:
        raise ValueError(f"diffusivity d must be > 0, got {d}")
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    return ScalarField(rhs.spec, _helmholtz_solve_array(rhs.spec, rhs.values, d, mu))


def mean(f: ScalarField) -> float:
    return float(f.values.mean())


def sup_norm(f: ScalarField) -> float:
    return float(np.abs(f.values).max())


def l2_norm(f: ScalarField) -> float:
    """Cell-area-weighted L2 norm, h * sqrt(sum f^2); equals ell for f = 1."""
    return float(f.spec.h * np.sqrt(np.sum(f.values**2)))


def rayleigh_quotient(psi: ScalarField, d: float, mu_field: ScalarField) -> float:
    """(d * int |grad psi|^2 + int mu psi^2) / int psi^2 with spectral gradient.

    The gradient term is evaluated as -int psi * Laplacian(psi), which is the
    Parseval identity for the spectral discretization.  Minus the infimum of
    this quotient over all psi is the largest eigenvalue of d*Lap - mu.
    """
    v = psi.values
    den = float(np.sum(v * v))
    if den == 0.0:
        raise ValueError("rayleigh_quotient requires psi not identically zero")
    grad2 = -float(np.sum(v * _laplacian_spectral(psi.spec, v)))
    num = d * grad2 + float(np.sum(mu_field.values * v * v))
    return num / den


_HEADER_RE = re.compile(r"^#\s*n=(\d+)\s+ell=([^\s]+)\s*$")


def write_field_csv(f: ScalarField, path) -> None:
    """Field CSV: ``# n=<n> ell=<ell>`` header, then n rows of n values.

    Values are printed with 17 significant digits so the round trip is
    bit-exact.
    """
    lines = [f"# n={f.spec.n} ell={f.spec.ell:.17g}"]
    for row in f.values:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path) -> ScalarField:
    with open(path) as fh:
        header = fh.readline()
        m = _HEADER_RE.match(header.strip())
        if m is None:
            raise ValueError(f"{path}: missing '# n=<n> ell=<ell>' header line")
        n, ell = int(m.group(1)), float(m.group(2))
        vals = np.loadtxt(fh, delimiter=",", ndmin=2)
    if vals.shape != (n, n):
        raise ValueError(f"{path}: expected {n}x{n} values, got {vals.shape}")
    return ScalarField(GridSpec(n, ell), vals)
