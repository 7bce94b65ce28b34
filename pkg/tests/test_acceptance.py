"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from flexsmc import config, fixtures, workflow
from flexsmc.modal import BeamParams, find_beta_roots, modal_analysis
from flexsmc.observer import composite_matrix
from flexsmc.plant import rigid_plant
from flexsmc.simulate import SimConfig, SlidingModeController, reaching_metrics, rigid_sliding_oracle, rk4_step, simulate
from flexsmc.smc import SlidingSpec, control_full_state, reaching_time_bound

# Frozen from the first calibrated observer-fed runs (settling at 6.70 s in both scenarios).
T_SETTLE = 7.0
T_TRACK = 7.0
BAND_SIGMA = 1e-3
TIP_BAND = 0.02
MAG_FLOOR = 0.01  # printed entries below this carry fewer than two significant digits

RESULTS = []


def report(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def cfg():
    return config.ProjectConfig()


@pytest.fixture(scope="module")
def models(cfg):
    design, plant = workflow.plants(cfg)
    spec = workflow.sliding_spec(cfg, design)
    return design, plant, spec, workflow.synthesize_observer(cfg, design, spec)


_RUNS = {}


def run(cfg, scenario, dt=1e-4):
    key = (scenario, dt)
    if key not in _RUNS:
        _RUNS[key] = workflow.run(cfg, scenario=scenario, mode="observer_fed", dt=dt)
    return _RUNS[key]


def entrywise(computed, printed, rtol):
    computed, printed = np.asarray(computed), np.asarray(printed)
    mask = np.abs(printed) >= MAG_FLOOR
    rel = np.abs(computed - printed)[mask] / np.abs(printed)[mask]
    return float(rel.max()), bool(np.all(rel <= rtol))


def test_criterion_1_natural_frequencies():
    t0 = time.perf_counter()
    w = modal_analysis(BeamParams(**fixtures.BEAM), 5).omegas
    elapsed = time.perf_counter() - t0
    rel = np.abs(w / np.array(fixtures.OMEGA) - 1)
    report("1", bool(rel.max() <= 5e-3 and elapsed < 1.0),
           f"omega = {np.round(w, 2).tolist()}, max rel dev {rel.max():.2e} (<= 5e-3), {elapsed:.2f} s (< 1 s)")


def test_criterion_2_mode_shape_ratios():
    m = modal_analysis(BeamParams(**fixtures.BEAM), 5)
    derived = m.phi_l / m.phi_prime_0
    table = np.array(fixtures.PHI_L) / np.array(fixtures.PHI_PRIME_0)
    rel = np.abs(derived / table - 1)
    report("2", bool(rel.max() <= 0.05),
           f"phi(l)/phi'(0) derived {np.round(derived, 4).tolist()} vs table {np.round(table, 4).tolist()}, "
           f"max rel dev {rel.max():.2f} (<= 0.05)")


def test_criterion_3_pinned_free_limit():
    roots = find_beta_roots(BeamParams(rho=0.5, l=1.0, EI=1.0), 2)
    err = np.abs(np.array(roots) - [3.92660, 7.06858])
    report("3", bool(err.max() <= 1e-4), f"beta*l = {[round(float(r), 6) for r in roots]}, max err {err.max():.1e} (<= 1e-4)")


def test_criterion_4a_condition_residuals(models):
    obs = models[3]
    worst = max(c.residual for c in obs.conditions[1:4])
    ok = obs.conditions[0].passed and obs.conditions[4].passed and worst <= 1e-8
    detail = ", ".join(f"{c.name} {c.residual:.2e}" for c in obs.conditions)
    report("4a", ok, f"{detail}; max relative residual {worst:.2e} (<= 1e-8)")


def test_criterion_4b_printed_F_T_H(models, cfg):
    obs = models[3]
    devs = {name: entrywise(c, p, 0.05) for name, c, p in (
        ("F", obs.F, fixtures.PRINTED_F), ("T", obs.T, fixtures.PRINTED_T), ("H", obs.H, fixtures.PRINTED_H))}
    report("4b", all(ok for _, ok in devs.values()),
           ", ".join(f"{k} max rel dev {d:.2e}" for k, (d, _) in devs.items()) + " (<= 5% above |x| >= 0.01)")


def test_criterion_4c_printed_G_D(models, cfg):
    obs = models[3]
    P = workflow.output_permutation(cfg.observer.output_order)
    devs = {name: entrywise(c, p, 0.05) for name, c, p in (
        ("G", obs.G @ P.T, fixtures.PRINTED_G), ("D_obs", obs.D_obs, fixtures.PRINTED_D))}
    report("4c", all(ok for _, ok in devs.values()),
           ", ".join(f"{k} max rel dev {d:.2e}" for k, (d, _) in devs.items()) + " (<= 5% above |x| >= 0.01)")


def test_criterion_5_composite_stability(models):
    design, _, _, obs = models
    F = obs.F.copy()
    F[0] = F[0] + obs.F[1] * 80.0 / float(obs.F[1] @ design.B)
    flipped = composite_matrix(design, F, obs.D_obs, obs.N)
    report("5", obs.composite.stable and not flipped.stable,
           f"max Re eig(A_C) = {obs.composite.max_real:.3f}; perturbed: {flipped.max_real:.3f}")


def test_criterion_6_error_dynamics(models):
    design, _, _, obs = models
    x0 = tuple(fixtures.truncate_state(fixtures.X0_FIVE_MODE, 5, 2))
    res = simulate(design, None, obs, SimConfig(dt=1e-4, t_final=5.0, x0=x0, n_plant=2))
    ref = np.array([expm(obs.N * t) @ res.e[0] for t in res.t[::100]])
    err = float(np.abs(res.e[::100] - ref).max())
    report("6", err <= 1e-6, f"max |e - expm(N t) e0| over 5 s = {err:.2e} (<= 1e-6)")


def test_criterion_7_reaching_time(models):
    design, _, spec, _ = models
    x0 = tuple(fixtures.truncate_state(fixtures.X0_FIVE_MODE, 5, 2))
    res = simulate(design, SlidingModeController(spec, design), None,
                   SimConfig(t_final=3.0, x0=x0, n_plant=2, mode="full_state", band_sigma=BAND_SIGMA))
    t_reach, held = reaching_metrics(res, BAND_SIGMA)
    bound = reaching_time_bound(res.sigma[0], spec.k1, spec.k2)
    report("7", t_reach <= bound and held,
           f"t_reach = {t_reach:.4f} s <= bound {bound:.4f} s, held in |sigma| <= {BAND_SIGMA:g}: {held}")


def _tip_after(res, t0):
    after = res.t >= t0
    return float(np.abs(res.tip_error()[after]).max())


def test_criterion_8a_regulation_settles(cfg):
    res = run(cfg, "regulation")
    err = _tip_after(res, T_SETTLE)
    report("8a", err < TIP_BAND,
           f"max |theta_t - pi/4| after {T_SETTLE} s = {err:.4f} rad (< {TIP_BAND}); "
           f"measured settling {res.settling_time(TIP_BAND):.3f} s")


def test_criterion_8b_regulation_torque(cfg):
    u = run(cfg, "regulation").summary["max_abs_u"]
    report("8b", u <= fixtures.TORQUE_BOUND, f"max |u| = {u:.2f} N m (<= {fixtures.TORQUE_BOUND})")


def test_criterion_9a_tracking(cfg):
    res = run(cfg, "tracking")
    err = _tip_after(res, T_TRACK)
    report("9a", err < TIP_BAND,
           f"max |theta_t - theta_d| after {T_TRACK} s = {err:.4f} rad (< {TIP_BAND}); "
           f"measured settling {res.settling_time(TIP_BAND):.3f} s")


def test_criterion_9b_tracking_torque(cfg):
    u = run(cfg, "tracking").summary["max_abs_u"]
    report("9b", u <= fixtures.TORQUE_BOUND, f"max |u| = {u:.2f} N m (<= {fixtures.TORQUE_BOUND})")


def test_criterion_10a_step_halving(cfg):
    diffs = {sc: abs(run(cfg, sc).theta_t[-1] - run(cfg, sc, dt=5e-5).theta_t[-1]) for sc in ("regulation", "tracking")}
    report("10a", max(diffs.values()) < 1e-4,
           ", ".join(f"{k} |d theta_t(t_f)| = {v:.2e}" for k, v in diffs.items()) + " (< 1e-4)")


def _rigid_error(h):
    plant = rigid_plant(BeamParams(**fixtures.BEAM))
    Gamma, k1, theta_d = np.array([2.0, 1.0]), 5.0, 0.8
    spec = SlidingSpec.for_plant(Gamma, k1, 0.0, plant)
    x_d = np.array([theta_d, 0.0])
    f = lambda t, z: plant.A @ z + plant.B * control_full_state(z, x_d, np.zeros(2), spec, plant)  # noqa: E731
    z, err = np.array([0.1, 0.4]), 0.0
    for k in range(1, int(round(2.0 / h)) + 1):
        z = rk4_step(f, (k - 1) * h, z, h)
        theta, _ = rigid_sliding_oracle(k * h, 0.1, 0.4, theta_d, Gamma, k1)
        err = max(err, abs(z[0] - theta))
    return err


def test_criterion_10b_integrator_order():
    ratio = _rigid_error(0.02) / _rigid_error(0.01)
    report("10b", 13.0 < ratio < 19.0, f"error ratio on halving dt = {ratio:.2f} (about 16, accepted 13..19), "
           f"order {math.log2(ratio):.2f}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
