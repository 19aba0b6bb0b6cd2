"""Time integration of the full system and of the quasi-steady scalar PDE.

Operator splitting: the pointwise reaction system is advanced by an explicit
midpoint RK2 substep (numba-accelerated), and the virus diffusion substep
applies the exact spectral flow exp(dt d_V Lap) so the splitting order is set
by the composition alone (Lie: first order, Strang: second order).  Because
diffusion is exact and unconditionally stable, dt is limited only by reaction
stiffness.

Trajectories monitor the invariant region 0 <= T+I <= M1, 0 <= V <= M2 with
M1 = sup(alpha)/min(mu_T, mu_I) and M2 = M1 N mu_I / mu_V, and account for
every negative value clamped to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import _kernels
from .grid import GridSpec, ScalarField
from .model import ModelParams, reproductive_ratio, uninfected_equilibrium

__all__ = [
    "State",
    "EvolveConfig",
    "InvariantRegion",
    "Trajectory",
    "ScalarTrajectory",
    "StepAbortError",
    "invariant_region",
    "dt_max",
    "dt_max_scalar",
    "step",
    "evolve",
    "inoculum_state",
    "evolve_scalar",
    "phase_portrait",
]

# negatives beyond this magnitude abort the run (dt too large); smaller ones
# are clamped to zero and accounted as clamped mass
NEG_ABORT = 1e-8
# slack used when logging invariant-region violations
VIOLATION_SLACK = 1e-6


class StepAbortError(RuntimeError):
    """Integration aborted: NaN/Inf or negativity beyond the clamp threshold."""

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


@dataclass(frozen=True)
class State:
    """Cell densities (T, I, V) at time t; all components non-negative."""

    T: ScalarField
    I: ScalarField
    V: ScalarField
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("T", "I", "V"):
            f = getattr(self, name)
            if f.spec != self.T.spec:
                raise ValueError("state components live on different grids")
            if f.min() < 0:
                raise ValueError(f"state component {name} has negative values")

    @property
    def spec(self) -> GridSpec:
        return self.T.spec


@dataclass(frozen=True)
class EvolveConfig:
    """Time-stepping controls.

    record_every: steps between probe/series records (state 0 and the final
    state are always recorded); snapshot_every: steps between stored field
    snapshots, 0 to keep none; probes: (row, col) grid indices logged into
    the probe series.
    """

    dt: float
    t_end: float
    scheme: str = "strang"
    record_every: int = 100
    probes: tuple[tuple[int, int], ...] = ()
    snapshot_every: int = 0

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.scheme not in ("lie", "strang"):
            raise ValueError(f"scheme must be 'lie' or 'strang', got {self.scheme!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class InvariantRegion:
    """Box bounds: 0 <= T+I <= M1 and 0 <= V <= M2.

    M2_conservative carries an extra sup(alpha) factor; it appears in some
    statements of the bound but is not needed by the supersolution argument,
    so M2 is the bound that trajectories are monitored against.
    """

    M1: float
    M2: float
    M2_conservative: float


def invariant_region(p: ModelParams) -> InvariantRegion:
    sup_alpha = float(p.alpha.values.max())
    M1 = sup_alpha / min(p.mu_T, p.mu_I)
    M2 = M1 * p.N * p.mu_I / p.mu_V
    return InvariantRegion(M1, M2, M2 * sup_alpha)


def dt_max(p: ModelParams) -> float:
    """Explicit-reaction stability heuristic: the reaction Jacobian norm on
    the invariant region is bounded by the rates below."""
    reg = invariant_region(p)
    return 0.1 / max(p.mu_T, p.mu_I, p.mu_V, p.gamma * reg.M2, p.gamma * reg.M1 * p.N)


def dt_max_scalar(p: ModelParams) -> float:
    """Reaction-stiffness bound for the quasi-steady scalar equation."""
    r_sup = float(reproductive_ratio(p).values.max())
    return 0.1 / (p.mu_V * max(1.0, r_sup - 1.0))


def inoculum_state(p: ModelParams, site: tuple[int, int], amount: float) -> State:
    """Uninfected T with a point inoculum of virions: V = amount at site.

    site is a (row, col) index pair; amount is a density value, so a single
    inoculated cell contributes amount/n^2 to the mean of V.
    """
    n = p.spec.n
    i, j = site
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"site {site} outside the {n}x{n} grid")
    if amount < 0:
        raise ValueError("inoculum amount must be >= 0")
    V = np.zeros(p.spec.shape)
    V[i, j] = amount
    eq = uninfected_equilibrium(p)
    return State(eq.T, eq.I, ScalarField(p.spec, V), t=0.0)


class _Clamp:
    """Zeroes small negatives, accounts their mass, aborts on large ones."""

    def __init__(self, h: float):
        self.cell_area = h * h
        self.mass: dict[str, float] = {"T": 0.0, "I": 0.0, "V": 0.0}

    def __call__(self, arr: np.ndarray, name: str, step_index: int) -> None:
        m = arr.min()
        if not (m > -NEG_ABORT):  # catches NaN as well
            raise StepAbortError(
                f"component {name} reached {m!r}: negativity beyond the clamp "
                "threshold or non-finite value; dt is likely too large",
                step_index,
            )
        if m < 0.0:
            neg = arr < 0.0
            self.mass[name] += -float(arr[neg].sum()) * self.cell_area
            arr[neg] = 0.0


class _Stepper:
    """Precomputed splitting machinery for one (params, dt, scheme) triple."""

    def __init__(self, p: ModelParams, dt: float, scheme: str):
        self.p = p
        self.dt = dt
        self.scheme = scheme
        self.alpha = np.ascontiguousarray(p.alpha.values)
        self.spec = p.spec
        # exact diffusion flow over a full step
        self.diff = np.exp(-dt * p.d_V * p.spec._k2)
        self.clamp = _Clamp(p.spec.h)

    def _reaction(self, T, I, V, dt, step_index):
        T, I, V = _kernels.reaction_rk2(
            T, I, V, self.alpha, self.p.gamma, self.p.N,
            self.p.mu_T, self.p.mu_I, self.p.mu_V, dt,
        )
        self.clamp(T, "T", step_index)
        self.clamp(I, "I", step_index)
        self.clamp(V, "V", step_index)
        return T, I, V

    def _diffusion(self, V, step_index):
        V = sfft.irfft2(self.diff * sfft.rfft2(V), s=self.spec.shape)
        self.clamp(V, "V", step_index)
        return V

    def advance(self, T, I, V, step_index):
        if self.scheme == "strang":
            T, I, V = self._reaction(T, I, V, 0.5 * self.dt, step_index)
            V = self._diffusion(V, step_index)
            T, I, V = self._reaction(T, I, V, 0.5 * self.dt, step_index)
        else:  # lie
            T, I, V = self._reaction(T, I, V, self.dt, step_index)
            V = self._diffusion(V, step_index)
        return T, I, V


def step(s: State, p: ModelParams, dt: float, scheme: str = "strang") -> State:
    """Advance one splitting step; rejects dt above the stability heuristic."""
    cap = dt_max(p)
    if dt > cap * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds dt_max = {cap}")
    stepper = _Stepper(p, dt, scheme)
    T, I, V = stepper.advance(s.T.values.copy(), s.I.values.copy(), s.V.values.copy(), 0)
    return State(
        ScalarField(p.spec, T), ScalarField(p.spec, I), ScalarField(p.spec, V), s.t + dt
    )


@dataclass
class Trajectory:
    """Recorded series of a full-system run.

    probe_rows hold (t, (row, col), T, I, V) samples; violations hold
    (t, bound_name, value, bound) entries logged when a recorded state
    exceeds an invariant-region bound by more than the slack.
    """

    region: InvariantRegion
    times: list[float] = field(default_factory=list)
    sup_TI: list[float] = field(default_factory=list)
    sup_V: list[float] = field(default_factory=list)
    mean_T: list[float] = field(default_factory=list)
    mean_I: list[float] = field(default_factory=list)
    mean_V: list[float] = field(default_factory=list)
    probe_rows: list[tuple] = field(default_factory=list)
    snapshots: list[State] = field(default_factory=list)
    violations: list[tuple] = field(default_factory=list)
    clamped: dict[str, float] = field(default_factory=dict)
    final: State | None = None

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def evolve(s0: State, p: ModelParams, cfg: EvolveConfig) -> Trajectory:
    """Repeated splitting steps with invariant-region monitoring.

    Starting outside the region is allowed but warned about: the attractor
    statement concerns orbits inside it.
    """
    cap = dt_max(p)
    if cfg.dt > cap * (1.0 + 1e-12):
        raise ValueError(f"dt = {cfg.dt} exceeds dt_max = {cap}")
    region = invariant_region(p)
    T = s0.T.values.copy()
    I = s0.I.values.copy()
    V = s0.V.values.copy()
    if float((T + I).max()) > region.M1 + VIOLATION_SLACK or float(V.max()) > region.M2 + VIOLATION_SLACK:
        warnings.warn("initial state lies outside the invariant region", RuntimeWarning, stacklevel=2)

    traj = Trajectory(region=region)
    n_steps = int(round(cfg.t_end / cfg.dt))
    probes = list(cfg.probes)

    def record(k: int, t: float):
        if not (np.isfinite(T).all() and np.isfinite(I).all() and np.isfinite(V).all()):
            raise StepAbortError("non-finite values in recorded state", k)
        sup_ti = float((T + I).max())
        sup_v = float(V.max())
        traj.times.append(t)
        traj.sup_TI.append(sup_ti)
        traj.sup_V.append(sup_v)
        traj.mean_T.append(float(T.mean()))
        traj.mean_I.append(float(I.mean()))
        traj.mean_V.append(float(V.mean()))
        for site in probes:
            i, j = site
            traj.probe_rows.append((t, site, float(T[i, j]), float(I[i, j]), float(V[i, j])))
        if sup_ti > region.M1 + VIOLATION_SLACK:
            traj.violations.append((t, "M1", sup_ti, region.M1))
        if sup_v > region.M2 + VIOLATION_SLACK:
            traj.violations.append((t, "M2", sup_v, region.M2))

    def snapshot(t: float):
        traj.snapshots.append(
            State(ScalarField(p.spec, T), ScalarField(p.spec, I), ScalarField(p.spec, V), t)
        )

    stepper = _Stepper(p, cfg.dt, cfg.scheme)
    record(0, s0.t)
    if cfg.snapshot_every:
        snapshot(s0.t)
    for k in range(1, n_steps + 1):
        T, I, V = stepper.advance(T, I, V, k)
        t = s0.t + k * cfg.dt
        if k % cfg.record_every == 0 or k == n_steps:
            record(k, t)
        if cfg.snapshot_every and (k % cfg.snapshot_every == 0 or k == n_steps):
            snapshot(t)
    traj.clamped = dict(stepper.clamp.mass)
    traj.final = State(
        ScalarField(p.spec, T), ScalarField(p.spec, I), ScalarField(p.spec, V), s0.t + n_steps * cfg.dt
    )
    return traj


@dataclass
class ScalarTrajectory:
    """Recorded series of a quasi-steady scalar run (V only)."""

    times: list[float] = field(default_factory=list)
    sup_V: list[float] = field(default_factory=list)
    mean_V: list[float] = field(default_factory=list)
    probe_rows: list[tuple] = field(default_factory=list)
    snapshots: list[tuple] = field(default_factory=list)
    clamped: float = 0.0
    final: ScalarField | None = None


def evolve_scalar(V0: ScalarField, p: ModelParams, cfg: EvolveConfig) -> ScalarTrajectory:
    """Integrate V_t = d_V Lap V - mu_V V + mu_T mu_V R0 V/(gamma V + mu_T)
    with the same splitting; T and I are held at their quasi-steady values."""
    if V0.min() < 0:
        raise ValueError("V0 must be >= 0")
    cap = dt_max_scalar(p)
    if cfg.dt > cap * (1.0 + 1e-12):
        raise ValueError(f"dt = {cfg.dt} exceeds scalar dt_max = {cap}")
    spec = p.spec
    rc = p.mu_T * p.mu_V * reproductive_ratio(p).values
    diff = np.exp(-cfg.dt * p.d_V * spec._k2)
    clamp = _Clamp(spec.h)
    V = V0.values.copy()
    traj = ScalarTrajectory()
    n_steps = int(round(cfg.t_end / cfg.dt))
    probes = list(cfg.probes)

    def reaction(V, dt, k):
        V = _kernels.reaction_rk2_scalar(V, rc, p.gamma, p.mu_T, p.mu_V, dt)
        clamp(V, "V", k)
        return V

    def record(k, t):
        if not np.isfinite(V).all():
            raise StepAbortError("non-finite values in recorded state", k)
        traj.times.append(t)
        traj.sup_V.append(float(V.max()))
        traj.mean_V.append(float(V.mean()))
        for site in probes:
            i, j = site
            traj.probe_rows.append((t, site, float(V[i, j])))

    record(0, 0.0)
    if cfg.snapshot_every:
        traj.snapshots.append((0.0, ScalarField(spec, V)))
    for k in range(1, n_steps + 1):
        if cfg.scheme == "strang":
            V = reaction(V, 0.5 * cfg.dt, k)
            V = sfft.irfft2(diff * sfft.rfft2(V), s=spec.shape)
            clamp(V, "V", k)
            V = reaction(V, 0.5 * cfg.dt, k)
        else:
            V = reaction(V, cfg.dt, k)
            V = sfft.irfft2(diff * sfft.rfft2(V), s=spec.shape)
            clamp(V, "V", k)
        t = k * cfg.dt
        if k % cfg.record_every == 0 or k == n_steps:
            record(k, t)
        if cfg.snapshot_every and (k % cfg.snapshot_every == 0 or k == n_steps):
            traj.snapshots.append((t, ScalarField(spec, V)))
    traj.clamped = clamp.mass["V"]
    traj.final = ScalarField(spec, V)
    return traj


def phase_portrait(traj: Trajectory, probes=None) -> list[tuple]:
    """(t, label, T, V) rows at the probe sites and for the spatial mean."""
    rows = [
        (t, "mean", mt, mv)
        for t, mt, mv in zip(traj.times, traj.mean_T, traj.mean_V)
    ]
    wanted = None if probes is None else {tuple(s) for s in probes}
    for t, site, T, _I, V in traj.probe_rows:
        if wanted is None or tuple(site) in wanted:
            rows.append((t, f"{site[0]}:{site[1]}", T, V))
    return rows
