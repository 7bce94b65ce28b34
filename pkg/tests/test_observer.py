import numpy as np
import pytest
from scipy.linalg import solve_sylvester

from flexsmc import fixtures, workflow
from flexsmc.errors import CompositeUnstable, DimensionMismatch, SpectraOverlap, Unrealizable
from flexsmc.observer import (
    build_F,
    check_conditions,
    composite_matrix,
    estimate_g,
    observer_derivative,
    solve_GD,
    solve_T,
    spectral_gap,
    synthesize,
)


def stable_matrix(rng, v, shift=1.0):
    Q = rng.normal(size=(v, v))
    return Q - (np.abs(np.linalg.eigvals(Q)).max() + shift) * np.eye(v)


def test_solve_T_matches_scipy(rng):
    for _ in range(50):
        m, v, p = rng.integers(2, 9), rng.integers(1, 4), rng.integers(1, 3)
        A = rng.normal(size=(m, m))
        N = stable_matrix(rng, v)
        L, C = rng.normal(size=(v, p)), rng.normal(size=(p, m))
        if spectral_gap(A, N) < 1e-3:
            continue
        T = solve_T(A, N, L, C)
        # scipy solves a X + X b = q; here -N T + T A = L C
        ref = solve_sylvester(-N, A, L @ C)
        np.testing.assert_allclose(T, ref, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(T @ A - N @ T, L @ C, atol=1e-9 * np.abs(L @ C).max())


def test_solve_T_spectra_overlap():
    A = np.diag([-1.0, -2.0, 3.0])
    N = np.array([[-2.0]])
    with pytest.raises(SpectraOverlap):
        solve_T(A, N, np.ones((1, 1)), np.ones((1, 3)))
    with pytest.raises(DimensionMismatch):
        solve_T(A, N, np.ones((2, 1)), np.ones((1, 3)))


def test_solve_GD_trivial_functional(rng):
    C = rng.normal(size=(2, 6))
    T = rng.normal(size=(2, 6))
    G, D, resid = solve_GD(C, C, T)
    np.testing.assert_allclose(G @ C + D @ T, C, atol=1e-12)
    assert resid < 1e-12


def test_solve_GD_constructed_membership(rng):
    C, T = rng.normal(size=(2, 6)), rng.normal(size=(2, 6))
    G0, D0 = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    F = G0 @ C + D0 @ T
    G, D, resid = solve_GD(F, C, T)
    # [C; T] has full row rank so the pair is unique
    np.testing.assert_allclose(G, G0, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(D, D0, rtol=1e-9, atol=1e-9)
    with pytest.raises(Unrealizable):
        solve_GD(rng.normal(size=(2, 6)), C, T)
    _, _, r = solve_GD(rng.normal(size=(2, 6)), C, T, least_squares=True)
    assert r > 1e-3


def test_build_F(spec, design):
    F = build_F(design, spec.Gamma, spec.k1)
    np.testing.assert_array_equal(F.F2, spec.Gamma)
    # u = F1 x cancels Gamma A x and adds -k1 Gamma x
    np.testing.assert_allclose(spec.Gamma @ (design.A + np.outer(design.B, F.F1)), -spec.k1 * spec.Gamma, atol=1e-9)


def test_fixture_synthesis(observer, design):
    assert observer.v == 2
    np.testing.assert_allclose(observer.T @ design.A - observer.N @ observer.T, observer.L @ design.C, atol=1e-9)
    np.testing.assert_allclose(observer.H, observer.T @ design.B)
    assert observer.composite.stable


def test_printed_F_T_H_reproduced(observer, cfg):
    P = workflow.output_permutation(cfg.observer.output_order)
    np.testing.assert_allclose(observer.F, fixtures.PRINTED_F, rtol=2e-3, atol=2e-3)
    np.testing.assert_allclose(observer.T, fixtures.PRINTED_T, atol=6e-4)
    np.testing.assert_allclose(observer.H, fixtures.PRINTED_H, rtol=2e-3)
    np.testing.assert_allclose(observer.L @ P.T, fixtures.OBSERVER_L)


def test_exact_realization_refuses_fixture(cfg, design, spec):
    N, L = workflow.observer_gains(cfg)
    with pytest.raises(Unrealizable):
        synthesize(design, spec, N, L, realization="exact")


def test_composite_spectrum_is_union(observer, design):
    comp = composite_matrix(design, observer.F, observer.D_obs, observer.N)
    closed = design.A + np.outer(design.B, observer.F[0])
    expected = np.sort_complex(np.r_[np.linalg.eigvals(closed), np.linalg.eigvals(observer.N)])
    np.testing.assert_allclose(np.sort_complex(comp.eigenvalues), expected, atol=1e-6)


def test_perturbation_flips_composite_verdict(observer, design):
    F = observer.F.copy()
    # shifting F1 by c Gamma moves the sliding pole from -k1 to -(k1 - c gamma_b)
    gb = float(observer.F[1] @ design.B)
    F[0] = F[0] + (observer.F[1] * 80.0 / gb)
    comp = composite_matrix(design, F, observer.D_obs, observer.N)
    assert observer.composite.stable and not comp.stable


def test_unstable_N_rejected(design, spec):
    with pytest.raises(CompositeUnstable):
        synthesize(design, spec, np.array([[0.5, 0.0], [0.0, -1.0]]), np.eye(2), realization="least_squares")


def test_exact_estimate_when_eta_equals_Tx(observer, design, rng):
    # constructed realizable observer: a functional inside the row space of [C; T]
    F = rng.normal(size=(2, 2)) @ design.C + rng.normal(size=(2, 2)) @ observer.T
    G, D, _ = solve_GD(F, design.C, observer.T)
    for _ in range(10):
        x = rng.normal(size=6)
        np.testing.assert_allclose(G @ design.C @ x + D @ (observer.T @ x), F @ x, rtol=1e-9, atol=1e-9)
    checks = check_conditions(design, F, observer.N, observer.L, observer.H, G, D, observer.T)
    assert all(c.passed for c in checks)


def test_error_dynamics_follow_N(observer, design, rng):
    # e = T x - eta obeys de/dt = N e regardless of u
    x, eta, u = rng.normal(size=6), rng.normal(size=2), 0.37
    y = design.C @ x
    de = observer.T @ (design.A @ x + design.B * u) - observer_derivative(eta, y, u, observer)
    np.testing.assert_allclose(de, observer.N @ (observer.T @ x - eta), atol=1e-9)
    np.testing.assert_allclose(estimate_g(eta, y, observer), observer.G @ y + observer.D_obs @ eta)
    with pytest.raises(DimensionMismatch):
        estimate_g(np.zeros(3), y, observer)


def test_condition_report_names(observer):
    names = [c.name for c in observer.conditions]
    assert names == ["N_hurwitz", "sylvester", "input_map", "functional", "order"]
    assert observer.conditions[3].residual == pytest.approx(0.02, abs=5e-3)
