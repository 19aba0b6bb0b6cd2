import numpy as np
import pytest
from helpers import BASE, const_params

from hivrd.grid import GridSpec, ScalarField
from hivrd.model import (
    ModelParams,
    classify_sites,
    infected_equilibrium_constant,
    infected_from_V,
    reproductive_ratio,
    uninfected_equilibrium,
)


@pytest.fixture
def spec():
    return GridSpec(16, 1.0)


def test_params_validation(spec):
    alpha = ScalarField.constant(spec, 1.0)
    with pytest.raises(ValueError):
        ModelParams(alpha, gamma=0.0, N=1000, mu_T=0.1, mu_I=0.5, mu_V=10, d_V=1)
    with pytest.raises(ValueError):
        ModelParams(alpha, gamma=0.001, N=1000, mu_T=-0.1, mu_I=0.5, mu_V=10, d_V=1)
    with pytest.raises(ValueError, match="identically zero"):
        ModelParams(ScalarField.constant(spec, 0.0), **BASE)
    neg = np.full(spec.shape, 1.0)
    neg[0, 0] = -0.5
    with pytest.raises(ValueError, match="non-negative"):
        ModelParams(ScalarField(spec, neg), **BASE)


def test_reproductive_ratio_inverts(spec):
    # gamma N/(mu_T mu_V) = 1 with the baseline rates, so alpha equals R0
    p = const_params(spec, 1.5)
    r0 = reproductive_ratio(p)
    assert np.abs(r0.values - 1.5).max() < 1e-14
    assert np.abs(p.alpha.values - 1.5).max() < 1e-14
    # ratio of exactly one at alpha = mu_T mu_V/(gamma N)
    ac = BASE["mu_T"] * BASE["mu_V"] / (BASE["gamma"] * BASE["N"])
    p1 = ModelParams(ScalarField.constant(spec, ac), **BASE)
    assert np.abs(reproductive_ratio(p1).values - 1.0).max() < 1e-14


def test_reproductive_ratio_linear_in_alpha(spec):
    rng = np.random.Generator(np.random.PCG64(0))
    a = rng.random(spec.shape) + 0.1
    p1 = ModelParams(ScalarField(spec, a), **BASE)
    p2 = ModelParams(ScalarField(spec, 2.0 * a), **BASE)
    assert np.allclose(
        reproductive_ratio(p2).values, 2.0 * reproductive_ratio(p1).values, rtol=1e-14
    )


def test_classify_sites(spec):
    vals = np.full(spec.shape, 0.5)
    vals[0, :] = 2.0
    vals[1, 0] = 1.0
    sources, sinks = classify_sites(ScalarField(spec, vals))
    assert sources.sum() == spec.n
    assert not sources[1, 0] and not sinks[1, 0]
    assert sinks.sum() == spec.n * spec.n - spec.n - 1


def test_uninfected_equilibrium(spec):
    p = const_params(spec, 1.5)
    eq = uninfected_equilibrium(p)
    assert np.abs(eq.T.values - 15.0).max() < 1e-12
    assert np.all(eq.I.values == 0.0)
    assert np.all(eq.V.values == 0.0)
    p2 = ModelParams(ScalarField.constant(spec, 0.1), **BASE)
    assert np.abs(uninfected_equilibrium(p2).T.values - 1.0).max() < 1e-12


def test_uninfected_is_reaction_fixed_point(spec):
    rng = np.random.Generator(np.random.PCG64(1))
    alpha = ScalarField(spec, rng.random(spec.shape) + 0.2)
    p = ModelParams(alpha, **BASE)
    eq = uninfected_equilibrium(p)
    T, I, V = eq.T.values, eq.I.values, eq.V.values
    fT = p.alpha.values - p.gamma * V * T - p.mu_T * T
    fI = p.gamma * V * T - p.mu_I * I
    fV = p.N * p.mu_I * I - p.mu_V * V
    for f in (fT, fI, fV):
        assert np.abs(f).max() < 1e-12


def test_infected_equilibrium_constant_values(spec):
    p = const_params(spec, 1.5)
    eq = infected_equilibrium_constant(p)
    # closed form from the steady balances: T = mu_V/(gamma N),
    # V = (alpha gamma N - mu_T mu_V)/(gamma mu_V), I = mu_V V/(N mu_I)
    assert np.abs(eq.T.values - 10.0).max() < 1e-12
    assert np.abs(eq.V.values - 50.0).max() < 1e-12
    assert np.abs(eq.I.values - 1.0).max() < 1e-12
    # the triple must satisfy the pointwise steady system exactly
    T, I, V = eq.T.values, eq.I.values, eq.V.values
    assert np.abs(p.alpha.values - p.gamma * V * T - p.mu_T * T).max() < 1e-12
    assert np.abs(p.gamma * V * T - p.mu_I * I).max() < 1e-12
    assert np.abs(p.N * p.mu_I * I - p.mu_V * V).max() < 1e-10


def test_infected_equilibrium_at_bifurcation(spec):
    p = const_params(spec, 1.0)
    eq = infected_equilibrium_constant(p)
    assert np.abs(eq.V.values).max() < 1e-14
    assert np.abs(eq.T.values - uninfected_equilibrium(p).T.values).max() < 1e-12


def test_infected_equilibrium_rejections(spec):
    with pytest.raises(ValueError, match="no biological infected equilibrium"):
        infected_equilibrium_constant(const_params(spec, 0.8))
    rng = np.random.Generator(np.random.PCG64(2))
    het = ScalarField(spec, rng.random(spec.shape) + 1.0)
    with pytest.raises(ValueError, match="constant"):
        infected_equilibrium_constant(ModelParams(het, **BASE))


def test_infected_V_slope_in_alpha(spec):
    # dV_i/dalpha = N/mu_V = 100 with the baseline rates
    v1 = infected_equilibrium_constant(const_params(spec, 1.5)).V.values[0, 0]
    v2 = infected_equilibrium_constant(const_params(spec, 1.6)).V.values[0, 0]
    dalpha = 0.1 * BASE["mu_T"] * BASE["mu_V"] / (BASE["gamma"] * BASE["N"])
    assert (v2 - v1) / dalpha == pytest.approx(BASE["N"] / BASE["mu_V"], rel=1e-9)


def test_infected_from_V(spec):
    p = const_params(spec, 1.5)
    # V = 0 reproduces the uninfected branch
    eq0 = infected_from_V(p, ScalarField.constant(spec, 0.0))
    equ = uninfected_equilibrium(p)
    assert np.abs(eq0.T.values - equ.T.values).max() < 1e-14
    assert np.all(eq0.I.values == 0.0)
    # constant V_i reproduces the closed-form triple
    eqc = infected_equilibrium_constant(p)
    eq = infected_from_V(p, eqc.V)
    assert np.abs(eq.T.values - eqc.T.values).max() < 1e-12 * 10.0
    assert np.abs(eq.I.values - eqc.I.values).max() < 1e-12
    # V >= 0 required
    with pytest.raises(ValueError):
        infected_from_V(p, ScalarField.constant(spec, -1.0))
