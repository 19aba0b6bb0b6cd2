import numpy as np
import pytest
from helpers import BASE, const_params, field_params, smooth_bump

from hivrd.dynamics import (
    EvolveConfig,
    State,
    dt_max,
    dt_max_scalar,
    evolve,
    evolve_scalar,
    inoculum_state,
    invariant_region,
    phase_portrait,
    step,
)
from hivrd.grid import GridSpec, ScalarField
from hivrd.model import (
    infected_equilibrium_constant,
    uninfected_equilibrium,
)
from hivrd.steady import monotone_iterate


def uninfected_state(p):
    eq = uninfected_equilibrium(p)
    return State(eq.T, eq.I, eq.V)


def test_invariant_region_values():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)  # alpha = 1.5
    reg = invariant_region(p)
    assert reg.M1 == pytest.approx(15.0)
    assert reg.M2 == pytest.approx(750.0)
    assert reg.M2_conservative == pytest.approx(750.0 * 1.5)
    # the uninfected equilibrium lies inside the box
    eq = uninfected_equilibrium(p)
    assert (eq.T.values + eq.I.values).max() <= reg.M1 + 1e-12


def test_invariant_region_scales_with_alpha():
    spec = GridSpec(16, 1.0)
    r1 = invariant_region(const_params(spec, 1.0))
    r2 = invariant_region(const_params(spec, 2.0))
    assert r2.M1 == pytest.approx(2.0 * r1.M1)


def test_dt_max_value():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    # binding rate is gamma * M1 * N = 15 per unit time
    assert dt_max(p) == pytest.approx(0.1 / 15.0)


def test_inoculum_state():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    s0 = inoculum_state(p, (8, 8), 0.0)
    eq = uninfected_equilibrium(p)
    assert np.array_equal(s0.T.values, eq.T.values)
    assert np.all(s0.V.values == 0.0)
    s1 = inoculum_state(p, (8, 8), 1.0)
    assert s1.V.max() == 1.0
    assert s1.V.values.mean() == pytest.approx(1.0 / spec.n**2)
    # composition of two inocula is additive in V
    s2 = inoculum_state(p, (2, 3), 0.5)
    both = s1.V.values + s2.V.values
    assert both[8, 8] == 1.0 and both[2, 3] == 0.5
    with pytest.raises(ValueError):
        inoculum_state(p, (16, 0), 1.0)
    with pytest.raises(ValueError):
        inoculum_state(p, (0, 0), -1.0)


def test_step_rejects_large_dt():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    with pytest.raises(ValueError, match="dt_max"):
        step(uninfected_state(p), p, 1.0)


def test_uninfected_fixed_point():
    spec = GridSpec(32, 1.0)
    p = const_params(spec, 0.8)
    s = uninfected_state(p)
    s2 = step(s, p, 1e-3)
    drift = max(
        np.abs(s2.T.values - s.T.values).max(),
        np.abs(s2.I.values - s.I.values).max(),
        np.abs(s2.V.values - s.V.values).max(),
    )
    assert drift < 1e-12


def test_infected_fixed_point_drift():
    spec = GridSpec(32, 1.0)
    p = const_params(spec, 1.5)
    eq = infected_equilibrium_constant(p)
    s0 = State(eq.T, eq.I, eq.V)
    traj = evolve(s0, p, EvolveConfig(dt=1e-3, t_end=10.0, record_every=2000))
    f = traj.final
    drift = max(
        np.abs(f.T.values - eq.T.values).max(),
        np.abs(f.I.values - eq.I.values).max(),
        np.abs(f.V.values - eq.V.values).max(),
    )
    assert drift < 1e-4


def test_pure_decay_mean_rate():
    # negligible alpha and I0 = 0 leave V evolving by clearance alone;
    # the mean mode is untouched by diffusion and decays like exp(-mu_V t)
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1e-30)
    eq = uninfected_equilibrium(p)
    s0 = State(eq.T, eq.I, smooth_bump(spec))
    cfg = EvolveConfig(dt=1e-3, t_end=1.0, record_every=1000)
    with pytest.warns(RuntimeWarning, match="outside the invariant region"):
        traj = evolve(s0, p, cfg)  # the near-zero alpha shrinks the region
    expect = s0.V.values.mean() * np.exp(-BASE["mu_V"] * 1.0)
    assert traj.final.V.values.mean() == pytest.approx(expect, rel=1e-3)


def test_trajectories_stay_in_region():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    reg = invariant_region(p)
    rng = np.random.Generator(np.random.PCG64(12))
    for _ in range(20):
        ti = rng.random(spec.shape) * reg.M1
        frac = rng.random(spec.shape)
        T = ScalarField(spec, ti * frac)
        I = ScalarField(spec, ti * (1 - frac))
        V = ScalarField(spec, rng.random(spec.shape) * reg.M2)
        traj = evolve(State(T, I, V), p, EvolveConfig(dt=2e-3, t_end=2.0, record_every=100))
        assert max(traj.sup_TI) <= reg.M1 + 1e-6
        assert max(traj.sup_V) <= reg.M2 + 1e-6
        assert not traj.violations


def test_outside_region_warns():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    reg = invariant_region(p)
    bad = State(
        ScalarField.constant(spec, 2.0 * reg.M1),
        ScalarField.constant(spec, 0.0),
        ScalarField.constant(spec, 0.0),
    )
    with pytest.warns(RuntimeWarning, match="outside the invariant region"):
        evolve(bad, p, EvolveConfig(dt=1e-3, t_end=0.01, record_every=5))


def test_mass_balance_per_step():
    # d/dt mean(T+I) = mean(alpha) - mean(mu_T T + mu_I I): the trapezoidal
    # defect of one step shrinks at second order in dt
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    s0 = State(
        uninfected_equilibrium(p).T,
        ScalarField.constant(spec, 0.3),
        smooth_bump(spec, 40.0),
    )

    def defect(dt):
        s1 = step(s0, p, dt)
        dv = (s1.T.values + s1.I.values).mean() - (s0.T.values + s0.I.values).mean()
        Tm = 0.5 * (s0.T.values + s1.T.values)
        Im = 0.5 * (s0.I.values + s1.I.values)
        rhs = p.alpha.values.mean() - (p.mu_T * Tm + p.mu_I * Im).mean()
        return abs(dv - dt * rhs)

    d1, d2 = defect(4e-3), defect(2e-3)
    assert d1 / d2 > 3.5  # at least second order


def test_splitting_orders():
    spec = GridSpec(32, 1.0)
    p = const_params(spec, 1.5)
    eq = uninfected_equilibrium(p)
    s0 = State(eq.T, eq.I, smooth_bump(spec))

    def final(dt, scheme):
        f = evolve(s0, p, EvolveConfig(dt=dt, t_end=0.5, scheme=scheme, record_every=10**9)).final
        return np.concatenate([f.T.values.ravel(), f.I.values.ravel(), f.V.values.ravel()])

    h = 1 / 1280  # all steps divide t_end exactly
    for scheme, lo, hi in (("strang", 1.9, 2.3), ("lie", 0.8, 1.3)):
        ref = final(h / 16, scheme)
        errs = [np.abs(final(m * h, scheme) - ref).max() for m in (4, 2, 1)]
        orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(lo <= o <= hi for o in orders), (scheme, errs, orders)


def test_clamped_mass_accounting():
    spec = GridSpec(64, 1.0)
    p = const_params(spec, 1.5)
    s0 = inoculum_state(p, (32, 32), 1.0)
    traj = evolve(s0, p, EvolveConfig(dt=1e-3, t_end=1.0, record_every=500))
    norm = max(max(traj.sup_TI), max(traj.sup_V))
    assert sum(traj.clamped.values()) < 1e-8 * norm


def test_scalar_fixed_point_and_zero():
    spec = GridSpec(32, 1.0)
    p = const_params(spec, 1.5)
    vi = infected_equilibrium_constant(p).V
    traj = evolve_scalar(vi, p, EvolveConfig(dt=1e-3, t_end=10.0, record_every=2000))
    assert np.abs(traj.final.values - vi.values).max() < 1e-4
    zero = ScalarField.constant(spec, 0.0)
    traj0 = evolve_scalar(zero, p, EvolveConfig(dt=1e-3, t_end=1.0, record_every=500))
    assert traj0.final.max() == 0.0
    with pytest.raises(ValueError, match="dt"):
        evolve_scalar(vi, p, EvolveConfig(dt=1.0, t_end=2.0))
    assert dt_max_scalar(p) == pytest.approx(0.1 / (10.0 * 1.0))


def test_scalar_converges_to_steady():
    spec = GridSpec(32, 1.0)
    r0 = ScalarField.from_function(
        spec, lambda x, y: 1.5 + 0.5 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    )
    p = field_params(r0)
    sol = monotone_iterate(p, tol=1e-10)
    traj = evolve_scalar(smooth_bump(spec), p, EvolveConfig(dt=5e-4, t_end=20.0, record_every=10**9))
    assert np.abs(traj.final.values - sol.triple.V.values).max() < 1e-3


def test_phase_portrait_spiral_vs_monotone():
    spec = GridSpec(16, 1.0)
    bump = smooth_bump(spec, 0.2)

    # infected-cell death faster than target-cell death: spiral approach,
    # the virus overshoots its final level
    p_fast = const_params(spec, 2.5, mu_I=1.0)
    eq = uninfected_equilibrium(p_fast)
    traj = evolve(State(eq.T, eq.I, bump), p_fast, EvolveConfig(dt=2e-3, t_end=40.0, record_every=50))
    v = np.array(traj.mean_V)
    assert v.max() > 1.5 * v[-1]

    # slower infected-cell death: monotone growth after the initial transient
    p_slow = const_params(spec, 2.5, mu_I=0.01)
    eq = uninfected_equilibrium(p_slow)
    traj = evolve(State(eq.T, eq.I, bump), p_slow, EvolveConfig(dt=4e-4, t_end=30.0, record_every=250))
    t = np.array(traj.times)
    v = np.array(traj.mean_V)
    after = v[t >= 10.0]
    assert np.all(np.diff(after) >= -1e-12 * max(1.0, after.max()))


def test_phase_portrait_rows():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    eq = infected_equilibrium_constant(p)
    s0 = State(eq.T, eq.I, eq.V)
    cfg = EvolveConfig(dt=1e-3, t_end=0.01, record_every=5, probes=((2, 3),))
    traj = evolve(s0, p, cfg)
    rows = phase_portrait(traj)
    labels = {r[1] for r in rows}
    assert labels == {"mean", "2:3"}
    # equilibrium start: every (T, V) point coincides
    pts = {(round(r[2], 9), round(r[3], 9)) for r in rows if r[1] == "mean"}
    assert len(pts) == 1


def test_snapshots_and_probes():
    spec = GridSpec(16, 1.0)
    p = const_params(spec, 1.5)
    eq = uninfected_equilibrium(p)
    s0 = State(eq.T, eq.I, smooth_bump(spec))
    cfg = EvolveConfig(dt=1e-3, t_end=0.02, record_every=10, probes=((8, 8),), snapshot_every=10)
    traj = evolve(s0, p, cfg)
    assert len(traj.snapshots) == 3  # t = 0, 0.01, 0.02
    assert len(traj.probe_rows) == 3
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.02)


def test_evolve_config_validation():
    with pytest.raises(ValueError):
        EvolveConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        EvolveConfig(dt=1e-3, t_end=-1.0)
    with pytest.raises(ValueError):
        EvolveConfig(dt=1e-3, t_end=1.0, scheme="verlet")
    with pytest.raises(ValueError):
        EvolveConfig(dt=1e-3, t_end=1.0, record_every=0)
