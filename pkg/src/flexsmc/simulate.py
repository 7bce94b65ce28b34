"""Fixed-step closed-loop simulation with zero-order-hold control.

The torque is computed once at the start of every step and held while the
plant (and, when present, the observer) is advanced by one classical
fourth-order Runge-Kutta step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import Divergence, NeverReached, StepTooLarge
from .observer import ObserverSpec, build_F
from .plant import PlantModel
from .smc import (
    ReferenceSignal,
    SlidingSpec,
    control_from_estimate,
    control_full_state,
)

DIVERGENCE_LIMIT = 1e6
SCENARIOS = ("regulation", "tracking")
MODES = ("full_state", "observer_fed")


def rk4_step(f, t, z, h):
    """One classical Runge-Kutta step of ``dz/dt = f(t, z)``."""
    k1 = f(t, z)
    k2 = f(t + h / 2, z + h / 2 * k1)
    k3 = f(t + h / 2, z + h / 2 * k2)
    k4 = f(t + h, z + h * k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_linear_propagator(A, B, h):
    """``(P, Q)`` such that one RK4 step of ``z' = A z + B u`` (u held) is ``P z + Q u``.

    This is the RK4 update written out for a linear vector field:
    P is the degree-4 Taylor polynomial of exp(hA), Q the matching
    degree-3 polynomial applied to hB.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    hA = h * A
    I = np.eye(A.shape[0])
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    P = I + hA + hA2 / 2 + hA3 / 6 + hA3 @ hA / 24
    Q = h * (I + hA / 2 + hA2 / 6 + hA3 / 24) @ B
    return P, Q


@dataclass(frozen=True)
class SlidingModeController:
    """Sliding-mode law designed on ``design`` (usually the two-mode model)."""

    spec: SlidingSpec
    design: PlantModel


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_final: float = 10.0
    x0: Optional[tuple] = None
    eta0: Optional[tuple] = None
    n_plant: int = 5
    scenario: str = "regulation"
    mode: str = "observer_fed"
    band_sigma: float = 1e-3
    boundary_layer: Optional[float] = None
    theta_ref: float = math.pi / 4
    tracking_rate: float = 0.5
    settle_band: float = 0.02

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.t_final >= self.dt:
            raise ValueError("t_final must be >= dt")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.band_sigma > 0:
            raise ValueError("band_sigma must be > 0")

    def reference(self) -> ReferenceSignal:
        if self.scenario == "regulation":
            return ReferenceSignal.regulation(self.theta_ref)
        return ReferenceSignal.tracking(self.tracking_rate)


@dataclass(eq=False)
class SimResult:
    t: np.ndarray
    x: np.ndarray
    theta_c: np.ndarray
    theta_t: np.ndarray
    theta_d: np.ndarray
    sigma: np.ndarray
    sigma_hat: np.ndarray
    u: np.ndarray
    g_hat: np.ndarray
    eta_hat: np.ndarray
    e: np.ndarray
    n_plant: int
    band_sigma: float = 1e-3
    settle_band: float = 0.02
    summary: dict = field(default_factory=dict)

    def tip_error(self) -> np.ndarray:
        return self.theta_t - self.theta_d

    def settling_time(self, band: Optional[float] = None) -> float:
        """Earliest time after which ``|theta_t - theta_d| < band`` for the rest of the run."""
        band = self.settle_band if band is None else band
        bad = np.nonzero(np.abs(self.tip_error()) >= band)[0]
        if bad.size == 0:
            return 0.0
        if bad[-1] == self.t.size - 1:
            return math.inf
        return float(self.t[bad[-1] + 1])

    def compute_summary(self) -> dict:
        try:
            t_reach, held = reaching_metrics(self, self.band_sigma)
        except NeverReached:
            t_reach, held = math.inf, False
        self.summary = {
            "records": int(self.t.size),
            "max_abs_u": float(np.abs(self.u).max()),
            "settling_time": self.settling_time(),
            "reaching_time": t_reach,
            "reaching_held": held,
            "final_tip_error": float(self.tip_error()[-1]),
            "final_sigma": float(self.sigma[-1]),
        }
        return self.summary


def _check_step(plant: PlantModel, dt: float):
    if plant.modal is None:
        return
    f_max = float(plant.modal.omegas.max()) / (2 * math.pi)
    if dt > 1.0 / (20.0 * f_max):
        raise StepTooLarge(
            f"dt={dt:g} does not resolve the fastest mode ({f_max:.4g} Hz); "
            f"need dt <= {1.0 / (20.0 * f_max):.3g}"
        )


def simulate(
    plant: PlantModel,
    controller: Optional[SlidingModeController],
    observer: Optional[ObserverSpec],
    config: SimConfig,
) -> SimResult:
    """Integrate the closed loop and record every step.

    ``controller=None`` applies zero torque.  With an observer present its
    state is integrated alongside the plant, driven by the plant outputs;
    in ``observer_fed`` mode the torque uses the observer estimate,
    otherwise the true (projected) state.  The sliding variable ``sigma`` is
    always evaluated on the true state, ``sigma_hat`` on the estimate.
    """
    _check_step(plant, config.dt)
    if config.mode == "observer_fed" and controller is not None and observer is None:
        raise ValueError("observer_fed mode needs an observer")

    m = plant.order
    if controller is not None:
        spec = controller.spec
        if config.boundary_layer is not None:
            spec = replace(spec, boundary_layer=config.boundary_layer)
        design = controller.design
        n_design = design.n
        F_true = build_F(design, spec.Gamma, spec.k1).F
    else:
        spec = design = F_true = None
        n_design = observer.T.shape[1] // 2 - 1 if observer is not None else plant.n
    idx = plant.design_indices(n_design)
    ref = config.reference()

    v = observer.v if observer is not None else 0
    if observer is not None:
        A_aug = np.block([[plant.A, np.zeros((m, v))], [observer.L @ plant.C, observer.N]])
        B_aug = np.r_[plant.B, observer.H]
    else:
        A_aug, B_aug = plant.A, plant.B
    P, Q = rk4_linear_propagator(A_aug, B_aug, config.dt)

    x0 = np.zeros(m) if config.x0 is None else np.asarray(config.x0, dtype=float)
    if x0.shape != (m,):
        raise ValueError(f"x0 has length {x0.size}, plant order is {m}")
    eta0 = np.zeros(v) if config.eta0 is None or v == 0 else np.asarray(config.eta0, dtype=float)
    if eta0.shape != (v,):
        raise ValueError(f"eta0 has length {eta0.size}, observer order is {v}")
    z = np.r_[x0, eta0]

    steps = int(math.floor(config.t_final / config.dt + 1e-9))
    count = steps + 1
    t_arr = np.arange(count) * config.dt
    Z = np.empty((count, m + v))
    Y = np.empty((count, 2))
    theta_d = np.empty(count)
    sigma = np.zeros(count)
    sigma_hat = np.zeros(count)
    u_arr = np.zeros(count)
    g_arr = np.zeros((count, 2))
    e_arr = np.zeros((count, v))

    C = plant.C
    Gamma = spec.Gamma if spec is not None else None
    for k in range(count):
        t = t_arr[k]
        x = z[:m]
        eta = z[m:]
        y = C @ x
        x2 = x[idx]
        x_d, dx_d = ref.desired(t, n_design)
        g_hat = None
        if observer is not None:
            g_hat = observer.G @ y + observer.D_obs @ eta
            e_arr[k] = observer.T @ x2 - eta
        u = 0.0
        if spec is not None:
            s_true = float(Gamma @ (x2 - x_d))
            sigma[k] = s_true
            if config.mode == "observer_fed":
                u = control_from_estimate(g_hat, x_d, dx_d, spec)
            else:
                u = control_full_state(x2, x_d, dx_d, spec, design)
            if g_hat is None:
                g_hat = F_true @ x2
            sigma_hat[k] = g_hat[1] - Gamma @ x_d
        if g_hat is not None:
            g_arr[k] = g_hat
        Z[k] = z
        Y[k] = y
        theta_d[k] = x_d[0]
        u_arr[k] = u
        if k < steps:
            z = P @ z + Q * u
            if not np.all(np.abs(z) < DIVERGENCE_LIMIT):
                raise Divergence(f"state left |z| < {DIVERGENCE_LIMIT:g} at t = {t + config.dt:.6g}")

    res = SimResult(
        t=t_arr, x=Z[:, :m], theta_c=Y[:, 0], theta_t=Y[:, 1], theta_d=theta_d,
        sigma=sigma, sigma_hat=sigma_hat, u=u_arr, g_hat=g_arr, eta_hat=Z[:, m:], e=e_arr,
        n_plant=plant.n, band_sigma=config.band_sigma, settle_band=config.settle_band,
    )
    res.compute_summary()
    return res


def reaching_metrics(result: SimResult, band: float):
    """First time ``|sigma| <= band`` and whether it stays there afterwards."""
    inside = np.abs(result.sigma) <= band
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        raise NeverReached(f"|sigma| never entered the band {band:g}")
    first = hits[0]
    return float(result.t[first]), bool(inside[first:].all())


# ---------------------------------------------------------------------------
# rigid-body closed forms


def rigid_body_oracle(t, J, theta0, dtheta0, u=0.0):
    """Double-integrator response to a constant torque: ``(theta, dtheta)``."""
    t = np.asarray(t, dtype=float)
    return theta0 + dtheta0 * t + u * t**2 / (2 * J), dtheta0 + u * t / J


def rigid_sliding_oracle(t, theta0, dtheta0, theta_d, Gamma, k1):
    """Rigid link under the linear reaching law (switching gain zero).

    sigma = g0 (theta - theta_d) + g1 dtheta obeys dsigma/dt = -k1 sigma,
    and the angle error then solves a first-order equation driven by sigma.
    Requires ``g0 / g1 != k1``.
    """
    g0, g1 = Gamma
    lam = g0 / g1
    t = np.asarray(t, dtype=float)
    e0 = theta0 - theta_d
    s0 = g0 * e0 + g1 * dtheta0
    c = s0 / (g1 * (lam - k1))
    err = e0 * np.exp(-lam * t) + c * (np.exp(-k1 * t) - np.exp(-lam * t))
    derr = -lam * e0 * np.exp(-lam * t) + c * (-k1 * np.exp(-k1 * t) + lam * np.exp(-lam * t))
    return theta_d + err, derr
