import numpy as np
import pytest
import scipy.linalg as sla

from kvwave import (
    StateVector,
    apply_generator,
    cn_step,
    assemble_generator,
    build_grid,
    dissipation_rate,
    energy,
    energy_norm,
    reference_config,
    undamped_config,
)
from kvwave.errors import DimensionMismatch, ResolutionTooCoarse
from kvwave.model import CoefficientProfile as P, SystemConfig

from conftest import make_generator


def loop_assembly(cfg, n):
    """Dense generator built entry by entry from the three-point stencil."""
    h = cfg.length / (n + 1)
    a = cfg.wave_speed_sq

    def coef(p, x):
        return p.value if p.left < x < p.right else 0.0

    def second_difference(kappa):
        K = np.zeros((n, n))
        for j in range(n):
            left, right = kappa((j + 0.5) * h), kappa((j + 1.5) * h)
            K[j, j] = -(left + right) / h**2
            if j > 0:
                K[j, j - 1] = left / h**2
            if j < n - 1:
                K[j, j + 1] = right / h**2
        return K

    La = second_difference(lambda x: a)
    L1 = second_difference(lambda x: 1.0)
    Lb = second_difference(lambda x: coef(cfg.profile_b, x))
    Ld = second_difference(lambda x: coef(cfg.profile_d, x))
    C = np.diag([coef(cfg.profile_c, (j + 1) * h) for j in range(n)])
    I, Z = np.eye(n), np.zeros((n, n))
    return np.block([[Z, I, Z, Z], [La, Lb, Z, -C], [Z, Z, Z, I], [Z, C, L1, Ld]])


def test_grid_examples():
    cfg = undamped_config()
    g = build_grid(cfg, 4)
    assert g.h == pytest.approx(0.2)
    np.testing.assert_allclose(g.nodes, [0.2, 0.4, 0.6, 0.8])
    g9 = build_grid(cfg, 9)
    np.testing.assert_allclose(g9.midpoints, np.arange(0.05, 1.0, 0.1))
    assert g9.h * 10 == pytest.approx(1.0, abs=1e-15)


def test_grid_too_coarse():
    cfg = SystemConfig(1.0, 1.0, P(1, 0.1, 0.12), P(1, 0.4, 0.6), P(1, 0.7, 0.9))
    with pytest.raises(ResolutionTooCoarse):
        build_grid(cfg, 2)


def test_under_resolved_support_warns():
    with pytest.warns(UserWarning, match="fewer than"):
        grid = build_grid(reference_config("C1"), 20)
    assert "b" in grid.under_resolved


@pytest.mark.parametrize("case", ["C1", "C2", "C3"])
def test_assembly_matches_stencil_loops(case):
    cfg = reference_config(case)
    g = make_generator(cfg, 37)
    np.testing.assert_allclose(g.A.toarray(), loop_assembly(cfg, 37), rtol=0, atol=1e-9)


def test_apply_generator_dense_oracle(rng):
    cfg = reference_config("C1")
    g = make_generator(cfg, 50)
    dense = loop_assembly(cfg, 50)
    for _ in range(20):
        s = rng.standard_normal(200)
        out = apply_generator(g, s)
        assert np.linalg.norm(out - dense @ s) <= 1e-14 * np.linalg.norm(dense, 1) * np.linalg.norm(s)


def test_apply_generator_blocks(rng):
    g = make_generator(reference_config("C1"), 40)
    u, y = rng.standard_normal(40), rng.standard_normal(40)
    zero = np.zeros(40)
    out = apply_generator(g, StateVector(u, zero, y, zero))
    assert isinstance(out, StateVector)
    D = g.D.toarray()
    np.testing.assert_array_equal(out.u, 0)
    np.testing.assert_array_equal(out.y, 0)
    np.testing.assert_allclose(out.v, -D.T @ D @ u, rtol=1e-12)
    np.testing.assert_allclose(out.z, -D.T @ D @ y, rtol=1e-12)
    np.testing.assert_array_equal(apply_generator(g, np.zeros(160)), 0)


def test_dimension_mismatch():
    g = make_generator(reference_config("C1"), 40)
    with pytest.raises(DimensionMismatch):
        energy(g, np.zeros(100))
    with pytest.raises(DimensionMismatch):
        StateVector(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(4))


def test_undamped_spectrum_closed_form():
    g = make_generator(undamped_config(), 3)
    ev = np.linalg.eigvals(g.A.toarray())
    expected = 8 * np.sin(np.array([1, 2, 3]) * np.pi / 8)
    np.testing.assert_allclose(expected, [3.0615, 5.6569, 7.3910], atol=1e-4)
    assert np.max(np.abs(ev.real)) < 1e-10
    im = np.sort(ev.imag)
    np.testing.assert_allclose(im, np.sort(np.concatenate([expected, expected, -expected, -expected])),
                               rtol=1e-12)


def test_coupled_undamped_is_skew():
    z = P.zero()
    cfg = SystemConfig(1.0, 2.0, z, P(3, 0.4, 0.6), z, allow_degenerate=True)
    g = make_generator(cfg, 40)
    M, A = g.M.toarray(), g.A.toarray()
    assert np.max(np.abs(M @ A + A.T @ M)) <= 1e-14 * np.max(np.abs(M @ A))


@pytest.mark.parametrize("case", ["C1", "C2", "C3"])
def test_dissipativity_identity_matrix_form(case):
    cfg = reference_config(case)
    n = 40
    g = make_generator(cfg, n)
    A = loop_assembly(cfg, n)
    h = cfg.length / (n + 1)
    D = np.zeros((n + 1, n))
    for j in range(n):
        D[j, j], D[j + 1, j] = 1 / h, -1 / h
    mid = (np.arange(n + 1) + 0.5) * h
    b = np.where((mid > cfg.profile_b.left) & (mid < cfg.profile_b.right), cfg.profile_b.value, 0.0)
    d = np.where((mid > cfg.profile_d.left) & (mid < cfg.profile_d.right), cfg.profile_d.value, 0.0)
    M = sla.block_diag(cfg.wave_speed_sq * h * D.T @ D, h * np.eye(n), h * D.T @ D, h * np.eye(n))
    Z = np.zeros((n, n))
    rhs = -2 * sla.block_diag(Z, h * D.T @ np.diag(b) @ D, Z, h * D.T @ np.diag(d) @ D)
    lhs = M @ A + A.T @ M
    np.testing.assert_allclose(g.M.toarray(), M, rtol=1e-14)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(M @ A))


def test_dissipation_rate_matches_quadratic_form(rng):
    g = make_generator(reference_config("C1"), 60)
    M, A = g.M.toarray(), g.A.toarray()
    Q = 0.5 * (M @ A + A.T @ M)
    for _ in range(1000):
        s = rng.standard_normal(240)
        q = s @ Q @ s
        r = dissipation_rate(g, s)
        assert r <= 0
        assert abs(q - r) <= 1e-12 * abs(r)


def test_dissipation_zero_away_from_damping():
    cfg = reference_config("C1")
    g = make_generator(cfg, 99)
    x = g.grid.nodes
    v = np.where((x > 0.3) & (x < 0.6), 1.0, 0.0)
    z = np.where(x < 0.5, 1.0, 0.0)
    s = StateVector(np.ones(99), v, np.ones(99), z)
    assert dissipation_rate(g, s) == 0.0
    assert dissipation_rate(g, StateVector(np.ones(99), 0 * x, x, 0 * x)) == 0.0


def test_energy_examples():
    g = make_generator(undamped_config(), 4)
    assert energy(g, np.zeros(16)) == 0.0
    assert energy(g, StateVector(np.zeros(4), np.ones(4), np.zeros(4), np.zeros(4))) == pytest.approx(0.4, rel=1e-15)


def test_energy_two_ways():
    g = make_generator(undamped_config(), 63)
    x, h = g.grid.nodes, g.h
    u = np.sin(np.pi * x)
    s = np.concatenate([u, np.zeros(63 * 3)])
    padded = np.concatenate([[0.0], u, [0.0]])
    explicit = 0.5 * h * sum(((padded[j + 1] - padded[j]) / h) ** 2 for j in range(64))
    assert energy(g, s) == pytest.approx(explicit, rel=1e-14)
    assert 0.5 * energy_norm(g, s) ** 2 == pytest.approx(explicit, rel=1e-14)


def test_eigenfrequencies_converge_second_order():
    errors = []
    for n in (20, 41):
        g = make_generator(undamped_config(), n)
        ev = np.linalg.eigvals(g.A.toarray())
        w = np.sort(ev.imag[ev.imag > 0])
        errors.append(abs(w[0] - np.pi))
    h0, h1 = 1 / 21, 1 / 42
    order = np.log(errors[0] / errors[1]) / np.log(h0 / h1)
    assert 1.8 <= order <= 2.2


def test_decoupled_blocks():
    z = P.zero()
    cfg = SystemConfig(1.0, 1.0, P(1, 0.1, 0.2), z, P(1, 0.7, 0.9), allow_degenerate=True)
    g = make_generator(cfg, 40)
    A = g.A.toarray()
    assert not A[:80, 80:].any() and not A[80:, :80].any()
    s = np.concatenate([np.sin(np.pi * g.grid.nodes), np.zeros(120)])
    for _ in range(20):
        s = cn_step(g, s, 0.05)
    assert not s[80:].any()


@pytest.mark.parametrize("case", ["C1", "C2", "C3"])
def test_mass_matrix_is_spd(case):
    g = make_generator(reference_config(case), 50)
    np.linalg.cholesky(g.M.toarray())
