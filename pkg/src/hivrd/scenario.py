"""Flat key=value scenario files and the seeded random ratio fields.

A scenario is a plain-text file of ``key = value`` lines (``#`` comments
allowed).  Parsing is strict: every key must belong to the schema of the
subcommand being run, and missing required keys are reported by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField, read_field_csv
from .homogenize import UnitCell, read_cell_csv, tile
from .model import ModelParams, alpha_for_r0

__all__ = ["ScenarioError", "Scenario", "parse_scenario_text", "load_scenario", "random_r0_field"]

_CORE_KEYS = ("gamma", "N", "mu_T", "mu_I", "mu_V", "d_V", "ell", "n")

_ALPHA_KEYS = ("alpha.mode", "alpha.value", "alpha.path", "alpha.cell_path", "alpha.epsilon")

# allowed / required keys per subcommand
_SCHEMAS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "eigen": (_CORE_KEYS + _ALPHA_KEYS + ("tol", "eigen.write_eigenfunction"), _CORE_KEYS + ("alpha.mode",)),
    "steady": (_CORE_KEYS + _ALPHA_KEYS + ("tol", "max_iter"), _CORE_KEYS + ("alpha.mode",)),
    "evolve": (
        _CORE_KEYS
        + _ALPHA_KEYS
        + ("dt", "t_end", "scheme", "record_every", "snapshot_every", "probes",
           "inoculum.site", "inoculum.amount"),
        _CORE_KEYS + ("alpha.mode", "dt", "t_end"),
    ),
    "evolve-scalar": (
        _CORE_KEYS
        + _ALPHA_KEYS
        + ("dt", "t_end", "scheme", "record_every", "snapshot_every", "probes",
           "inoculum.site", "inoculum.amount"),
        _CORE_KEYS + ("alpha.mode", "dt", "t_end"),
    ),
    "stability": (_CORE_KEYS + _ALPHA_KEYS + ("stability.max_index",), _CORE_KEYS + ("alpha.mode",)),
    "homogenize": (
        _CORE_KEYS + ("tol", "homog.cell_path", "homog.epsilons", "homog.points_per_subcell"),
        _CORE_KEYS + ("homog.cell_path", "homog.epsilons"),
    ),
    "sweep": (_CORE_KEYS + ("tol", "sweep.count", "sweep.r0_max"), _CORE_KEYS),
    "random-field": (
        _CORE_KEYS + ("seed", "rf.lo", "rf.hi", "rf.source_fraction"),
        _CORE_KEYS + ("seed", "rf.source_fraction"),
    ),
}


class ScenarioError(ValueError):
    """Invalid scenario file: unknown/missing keys or malformed values."""


def parse_scenario_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ScenarioError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class Scenario:
    """Validated scenario: raw keys plus typed accessors for one subcommand."""

    command: str
    raw: dict[str, str]

    def _get(self, key: str, default=None) -> str | None:
        return self.raw.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.raw:
            raise ScenarioError(f"missing required key {key!r}")
        return self.raw[key]

    def get_float(self, key: str, default: float | None = None) -> float:
        s = self._get(key)
        if s is None:
            if default is None:
                raise ScenarioError(f"missing required key {key!r}")
            return default
        try:
            v = float(s)
        except ValueError:
            raise ScenarioError(f"key {key!r}: not a number: {s!r}") from None
        if not math.isfinite(v):
            raise ScenarioError(f"key {key!r}: value must be finite, got {s!r}")
        return v

    def get_int(self, key: str, default: int | None = None) -> int:
        s = self._get(key)
        if s is None:
            if default is None:
                raise ScenarioError(f"missing required key {key!r}")
            return default
        try:
            return int(s)
        except ValueError:
            raise ScenarioError(f"key {key!r}: not an integer: {s!r}") from None

    def get_bool(self, key: str, default: bool) -> bool:
        s = self._get(key)
        if s is None:
            return default
        low = s.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ScenarioError(f"key {key!r}: expected true/false, got {s!r}")

    def grid(self) -> GridSpec:
        try:
            return GridSpec(self.get_int("n"), self.get_float("ell"))
        except ValueError as e:
            raise ScenarioError(str(e)) from None

    def params(self) -> ModelParams:
        spec = self.grid()
        alpha = self._alpha_field(spec)
        try:
            return ModelParams(
                alpha=alpha,
                gamma=self.get_float("gamma"),
                N=self.get_float("N"),
                mu_T=self.get_float("mu_T"),
                mu_I=self.get_float("mu_I"),
                mu_V=self.get_float("mu_V"),
                d_V=self.get_float("d_V"),
            )
        except ValueError as e:
            raise ScenarioError(str(e)) from None

    def _alpha_field(self, spec: GridSpec) -> ScalarField:
        mode = self.require("alpha.mode")
        if mode == "constant":
            return ScalarField.constant(spec, self.get_float("alpha.value"))
        if mode == "csv":
            path = self.require("alpha.path")
            try:
                f = read_field_csv(path)
            except OSError as e:
                raise ScenarioError(f"alpha.path: {e}") from None
            if f.spec != spec:
                raise ScenarioError(
                    f"alpha.path grid ({f.spec.n}, ell={f.spec.ell}) does not match "
                    f"scenario grid ({spec.n}, ell={spec.ell})"
                )
            return f
        if mode == "cell":
            path = self.require("alpha.cell_path")
            eps = self.get_float("alpha.epsilon")
            try:
                cell = read_cell_csv(path)
            except OSError as e:
                raise ScenarioError(f"alpha.cell_path: {e}") from None
            try:
                r0 = tile(cell, eps, spec)
            except ValueError as e:
                raise ScenarioError(str(e)) from None
            a = alpha_for_r0(
                r0.values,
                self.get_float("gamma"),
                self.get_float("N"),
                self.get_float("mu_T"),
                self.get_float("mu_V"),
            )
            return ScalarField(spec, a)
        raise ScenarioError(f"alpha.mode must be constant|csv|cell, got {mode!r}")

    def probes(self) -> tuple[tuple[int, int], ...]:
        s = self._get("probes")
        if not s:
            return ()
        n = self.get_int("n")
        sites = []
        for part in s.split(";"):
            bits = part.strip().split(",")
            if len(bits) != 2:
                raise ScenarioError(f"probes: expected 'i,j' pairs separated by ';', got {part!r}")
            try:
                i, j = int(bits[0]), int(bits[1])
            except ValueError:
                raise ScenarioError(f"probes: non-integer site {part!r}") from None
            if not (0 <= i < n and 0 <= j < n):
                raise ScenarioError(f"probes: site ({i},{j}) outside the {n}x{n} grid")
            sites.append((i, j))
        return tuple(sites)

    def inoculum_site(self) -> tuple[int, int]:
        n = self.get_int("n")
        s = self._get("inoculum.site", "center")
        if s == "center":
            return (n // 2, n // 2)
        bits = s.split(",")
        if len(bits) != 2:
            raise ScenarioError(f"inoculum.site: expected 'i,j' or 'center', got {s!r}")
        try:
            i, j = int(bits[0]), int(bits[1])
        except ValueError:
            raise ScenarioError(f"inoculum.site: non-integer site {s!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ScenarioError(f"inoculum.site: ({i},{j}) outside the {n}x{n} grid")
        return (i, j)


def load_scenario(path, command: str) -> Scenario:
    if command not in _SCHEMAS:
        raise ScenarioError(f"unknown subcommand {command!r}")
    try:
        with open(path) as fh:
            raw = parse_scenario_text(fh.read())
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file: {e}") from None
    allowed, required = _SCHEMAS[command]
    for key in raw:
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} for subcommand {command!r}")
    for key in required:
        if key not in raw:
            raise ScenarioError(f"missing required key {key!r} for subcommand {command!r}")
    return Scenario(command, raw)


def random_r0_field(
    spec: GridSpec, seed: int, lo: float, hi: float, source_fraction: float
) -> ScalarField:
    """Seeded per-site ratio field: sinks uniform in [lo, 1), sources in (1, hi].

    Each site is a source with probability source_fraction.  The generator is
    PCG64 (numpy's stream-stable default): one class draw and one value draw
    per site, so a fixed seed reproduces the field bit for bit.
    """
    if not (0.0 <= source_fraction <= 1.0):
        raise ValueError(f"source_fraction must be in [0, 1], got {source_fraction}")
    if not (0.0 <= lo < 1.0 < hi):
        raise ValueError(f"need 0 <= lo < 1 < hi, got lo={lo}, hi={hi}")
    rng = np.random.Generator(np.random.PCG64(seed))
    cls = rng.random(spec.shape)
    u = rng.random(spec.shape)
    sources = cls < source_fraction
    vals = np.where(sources, hi - u * (hi - 1.0), lo + u * (1.0 - lo))
    return ScalarField(spec, vals)
