import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from kvwave import (
    CrankNicolson,
    cn_step,
    dissipation_rate,
    domain_norm_sq,
    energy,
    energy_norm,
    fit_decay_exponent,
    make_initial_data,
    reference_config,
    simulate,
    undamped_config,
)
from kvwave.errors import BadParameters, NonPositiveEnergy, WindowTooShort
from kvwave.evolve import EnergyTrace, default_dt
from kvwave.model import CoefficientProfile as P, SystemConfig

from conftest import make_generator


def tiny_c1():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return make_generator(reference_config("C1"), 8)


def cn_error(g, s0, dt, T=1.0):
    exact = sla.expm(T * g.A.toarray()) @ s0
    s = s0.copy()
    for _ in range(int(round(T / dt))):
        s = cn_step(g, s, dt)
    return energy_norm(g, s - exact)


def synthetic(t, E):
    t = np.asarray(t, float)
    return EnergyTrace(t, np.asarray(E, float), np.zeros_like(t), {})


def test_zero_state_stays_zero():
    g = make_generator(reference_config("C1"), 50)
    np.testing.assert_array_equal(cn_step(g, np.zeros(200), 0.01), 0)


def test_matches_matrix_exponential():
    # the midpoint rule lags each oscillation by about omega^3 dt^2 T / 12, which
    # for the two lowest modes (omega ~ 3.1, 4.0) is a few 1e-4 at dt = 0.01
    g = tiny_c1()
    s0 = make_initial_data(g, "sine_mode", k_u=1, k_y=1)
    ev = np.linalg.eigvals(g.A.toarray())
    omega = np.sort(np.abs(ev.imag[ev.imag > 0]))[:2]
    lag = omega**3 * 0.01**2 / 12
    err = cn_error(g, s0, 0.01)
    assert lag.min() < err < 2 * lag.sum()
    assert cn_error(g, s0, 0.001) <= 1e-5


def test_second_order_in_time():
    g = tiny_c1()
    s0 = make_initial_data(g, "sine_mode", k_u=1, k_y=1)
    e = [cn_error(g, s0, dt) for dt in (0.02, 0.01, 0.005)]
    for coarse, fine in zip(e, e[1:]):
        assert 3.5 <= coarse / fine <= 4.5


@pytest.mark.parametrize("c0", [0.0, 3.0])
def test_undamped_step_is_isometry(rng, c0):
    z = P.zero()
    c = P(c0, 0.4, 0.6) if c0 else z
    g = make_generator(SystemConfig(1.0, 1.0, z, c, z, allow_degenerate=True), 40)
    s = rng.standard_normal(160)
    for dt in (0.01, 0.3, 5.0):
        out = cn_step(g, s, dt)
        assert energy_norm(g, out) == pytest.approx(energy_norm(g, s), rel=1e-12)


def test_undamped_step_is_reversible(rng):
    g = make_generator(undamped_config(), 40)
    s = rng.standard_normal(160)
    back = cn_step(g, cn_step(g, s, 0.1), -0.1)
    assert np.linalg.norm(back - s) <= 1e-10 * np.linalg.norm(s)


@settings(max_examples=40, deadline=None)
@given(dt=st.floats(1e-3, 10), seed=st.integers(0, 2**32 - 1))
def test_contractive_for_any_step(dt, seed):
    g = _c1_40()
    s = np.random.default_rng(seed).standard_normal(160)
    out = cn_step(g, s, dt)
    assert energy_norm(g, out) <= energy_norm(g, s) * (1 + 1e-14)


_CACHE = {}


def _c1_40():
    if "g" not in _CACHE:
        _CACHE["g"] = make_generator(reference_config("C1"), 40)
    return _CACHE["g"]


def test_rejects_bad_steps():
    g = _c1_40()
    with pytest.raises(BadParameters):
        CrankNicolson(g, 0.0)
    with pytest.raises(BadParameters):
        simulate(g, np.ones(160), dt=-0.1, T=1)
    with pytest.raises(BadParameters):
        simulate(g, np.ones(160), dt=0.1, T=1, sample_every=0)


def test_undamped_energy_constant():
    g = make_generator(undamped_config(), 50)
    s0 = make_initial_data(g, "gaussian", center=0.3, width=0.05)
    trace = simulate(g, s0, dt=0.01, T=5.0)
    assert np.max(np.abs(trace.E / trace.E[0] - 1)) <= 1e-12


def test_damped_energy_decreases_and_identity_holds():
    g = make_generator(reference_config("C1"), 60)
    s0 = make_initial_data(g, "sine_mode", k_u=1, k_y=1)
    trace = simulate(g, s0, dt=0.01, T=5.0, sample_every=10)
    assert trace.E[-1] < trace.E[0]
    assert np.all(np.diff(trace.E) <= 1e-13 * trace.E[0])
    assert np.all(np.diff(trace.t) > 0)
    assert trace.max_identity_defect <= 1e-10
    assert len(trace) == 51 and trace.samples[0][0] == 0.0
    assert trace.cfg_digest == {"n": 60, "dt": 0.01, "T": 5.0, "case": "C1", "steps": 500}
    assert np.all(trace.dE <= 0)


def test_energy_identity_recomputed_from_states():
    g = make_generator(reference_config("C3"), 60)
    s = make_initial_data(g, "gaussian", center=0.5, width=0.1)
    dt = 0.02
    for _ in range(200):
        s_new = cn_step(g, s, dt)
        lhs = energy(g, s_new) - energy(g, s)
        rhs = dt * dissipation_rate(g, 0.5 * (s + s_new))
        assert abs(lhs - rhs) <= 1e-10 * energy(g, s)
        s = s_new


def test_fit_exact_power_law():
    t = np.geomspace(10, 1000, 200)
    fit = fit_decay_exponent(synthetic(t, t**-4.0))
    assert fit.alpha == pytest.approx(4.0, abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.window[0] >= 500 and fit.window[1] == 1000


def test_fit_intercept():
    t = np.geomspace(10, 1000, 200)
    fit = fit_decay_exponent(synthetic(t, 7.0 / t))
    assert fit.alpha == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-10)


def test_fit_modulated_power_law():
    t = np.geomspace(10, 1000, 400)
    fit = fit_decay_exponent(synthetic(t, t**-4.0 * (1 + 0.1 * np.sin(np.log(t)))))
    assert abs(fit.alpha - 4.0) <= 0.1
    assert fit.residual > 0


def test_fit_errors():
    with pytest.raises(WindowTooShort):
        fit_decay_exponent(synthetic([0, 1, 2], [1, 0.5, 0.3]))
    t = np.linspace(0, 10, 50)
    with pytest.raises(NonPositiveEnergy):
        fit_decay_exponent(synthetic(t, np.where(t > 8, 0.0, 1.0)))
    with pytest.raises(BadParameters):
        fit_decay_exponent(synthetic(t, np.ones(50)), window_fraction=1.5)


def test_sine_mode_initial_data():
    g = make_generator(undamped_config(), 30)
    s = make_initial_data(g, "sine_mode", k_u=1, k_y=0)
    assert energy_norm(g, s) == pytest.approx(1.0, rel=1e-14)
    u = s[:30]
    np.testing.assert_allclose(u / u.max(), np.sin(np.pi * g.grid.nodes) / np.sin(np.pi * g.grid.nodes).max(),
                               rtol=1e-14)
    assert not s[30:].any()


def test_gaussian_tails_are_small():
    g = make_generator(undamped_config(), 199)
    x = g.grid.nodes
    raw = np.exp(-(((x - 0.5) / 0.1) ** 2))
    assert raw[0] < 1e-10 and raw[-1] < 1e-10
    s = make_initial_data(g, "gaussian", center=0.5, width=0.1)
    np.testing.assert_allclose(s[:199] / s[:199].max(), raw / raw.max(), rtol=1e-13)


def test_domain_norm_stable_under_refinement():
    vals = []
    for n in (100, 201):
        g = make_generator(reference_config("C1"), n)
        vals.append(domain_norm_sq(g, make_initial_data(g, "sine_mode", k_u=1, k_y=1)))
    assert abs(vals[1] / vals[0] - 1) < 0.05


def test_initial_data_from_files(tmp_path):
    g = make_generator(undamped_config(), 10)
    u = np.sin(np.pi * g.grid.nodes)
    np.savez(tmp_path / "s.npz", u=u, v=0 * u, y=u, z=0 * u)
    lines = ["u,v,y,z"] + [f"{float(a)!r},0,{float(a)!r},0" for a in u]
    (tmp_path / "s.csv").write_text("\n".join(lines) + "\n")
    a = make_initial_data(g, "file", path=tmp_path / "s.npz")
    b = make_initial_data(g, "file", path=tmp_path / "s.csv")
    np.testing.assert_allclose(a, b, rtol=1e-15)
    np.testing.assert_allclose(a, make_initial_data(g, "sine_mode", k_u=1, k_y=1), rtol=1e-14)


@pytest.mark.parametrize(
    "kind, params",
    [
        ("sine_mode", {"k_u": 50}),
        ("gaussian", {"center": 1.5}),
        ("gaussian", {"block": "w"}),
        ("file", {}),
        ("noise", {}),
        ("sine_mode", {"k_u": 0, "k_y": 0}),
        ("sine_mode", {"phase": 1}),
    ],
)
def test_initial_data_errors(kind, params):
    g = make_generator(undamped_config(), 10)
    with pytest.raises(BadParameters):
        make_initial_data(g, kind, **params)


def test_default_dt():
    assert default_dt(make_generator(undamped_config(), 9)) == 0.02
    assert default_dt(make_generator(undamped_config(), 99)) == pytest.approx(0.01)
