"""Sliding-mode control law on the linear sliding function sigma = Gamma (x - x_d)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, SingularGammaB
from .plant import PlantModel

GAMMA_B_MIN = 1e-12


@dataclass(frozen=True, eq=False)
class SlidingSpec:
    """Sliding row vector and reaching-law gains.

    ``gamma_b`` caches the scalar Gamma B of the plant the law is designed
    on.  ``boundary_layer`` replaces sgn by a saturation of that width when
    set.
    """

    Gamma: np.ndarray
    k1: float
    k2: float
    gamma_b: float
    boundary_layer: Optional[float] = None

    def __post_init__(self):
        if not self.k1 > 0 or not self.k2 >= 0:
            raise ValueError(f"need k1 > 0 and k2 >= 0, got k1={self.k1}, k2={self.k2}")
        if abs(self.gamma_b) < GAMMA_B_MIN:
            raise SingularGammaB(f"|Gamma B| = {abs(self.gamma_b):.3e} is below {GAMMA_B_MIN}")
        if self.boundary_layer is not None and not self.boundary_layer > 0:
            raise ValueError("boundary_layer must be positive when given")
        self.Gamma.setflags(write=False)

    @classmethod
    def for_plant(cls, Gamma, k1, k2, plant: PlantModel, boundary_layer=None) -> "SlidingSpec":
        Gamma = np.array(Gamma, dtype=float).reshape(-1)
        if Gamma.shape != (plant.order,):
            raise DimensionMismatch(f"Gamma has length {Gamma.size}, plant order is {plant.order}")
        return cls(Gamma, float(k1), float(k2), float(Gamma @ plant.B), boundary_layer)


@dataclass(frozen=True)
class ReferenceSignal:
    """Desired hub angle with its first two time derivatives.

    The induced desired state carries zero modal deflection and velocity.
    """

    kind: str
    theta_d: Callable[[float], float]
    dtheta_d: Callable[[float], float]
    ddtheta_d: Callable[[float], float]

    @classmethod
    def regulation(cls, theta: float) -> "ReferenceSignal":
        theta = float(theta)
        return cls("regulation", lambda t: theta, lambda t: 0.0, lambda t: 0.0)

    @classmethod
    def tracking(cls, rate: float = 0.5) -> "ReferenceSignal":
        """exp(-a t) sin(t) + 1 - exp(-a t) and its derivatives."""
        a = float(rate)

        def th(t):
            e = math.exp(-a * t)
            return e * math.sin(t) + 1.0 - e

        def dth(t):
            e = math.exp(-a * t)
            return e * (math.cos(t) - a * math.sin(t) + a)

        def ddth(t):
            e = math.exp(-a * t)
            return e * ((a * a - 1.0) * math.sin(t) - 2.0 * a * math.cos(t) - a * a)

        return cls("tracking", th, dth, ddth)

    def desired(self, t: float, n: int):
        """Desired state ``x_d`` and its derivative for an ``n``-mode model."""
        m = n + 1
        x_d = np.zeros(2 * m)
        dx_d = np.zeros(2 * m)
        x_d[0] = self.theta_d(t)
        x_d[m] = dx_d[0] = self.dtheta_d(t)
        dx_d[m] = self.ddtheta_d(t)
        return x_d, dx_d


def switching(sigma, boundary_layer=None):
    """sgn(sigma) with sgn(0) = 0, or its saturated surrogate."""
    if boundary_layer is None:
        return np.sign(sigma)
    return np.clip(np.asarray(sigma) / boundary_layer, -1.0, 1.0)


def sliding_value(x, x_d, Gamma) -> float:
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    Gamma = np.asarray(Gamma, dtype=float).reshape(-1)
    if not x.shape == x_d.shape == Gamma.shape:
        raise DimensionMismatch(f"shapes x={x.shape}, x_d={x_d.shape}, Gamma={Gamma.shape}")
    return float(Gamma @ (x - x_d))


def control_components(x, x_d, dx_d, spec: SlidingSpec, plant: PlantModel):
    """Nominal and discontinuous parts ``(u_nom, u_disc)``; u = u_nom - u_disc."""
    if spec.Gamma.shape != (plant.order,):
        raise DimensionMismatch("sliding spec and plant orders differ")
    sigma = sliding_value(x, x_d, spec.Gamma)
    G = spec.Gamma
    u_nom = (-(G @ plant.A @ x) + G @ dx_d) / spec.gamma_b
    u_disc = (spec.k1 * sigma + spec.k2 * switching(sigma, spec.boundary_layer)) / spec.gamma_b
    return float(u_nom), float(u_disc)


def control_full_state(x, x_d, dx_d, spec: SlidingSpec, plant: PlantModel) -> float:
    """Full-state sliding-mode torque."""
    u_nom, u_disc = control_components(x, x_d, dx_d, spec, plant)
    return u_nom - u_disc


def control_expanded(x, x_d, dx_d, spec: SlidingSpec, plant: PlantModel) -> float:
    """Same torque regrouped as state feedback, switching term and feedforward.

    This is the form whose state-feedback part the functional observer
    estimates.
    """
    G = spec.Gamma
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    inv = 1.0 / spec.gamma_b
    feedback = -inv * ((G @ plant.A + spec.k1 * G) @ x)
    switch = -inv * spec.k2 * switching(G @ x - G @ x_d, spec.boundary_layer)
    feedforward = inv * (G @ dx_d + spec.k1 * (G @ x_d))
    return float(feedback + switch + feedforward)


def control_from_estimate(g_hat, x_d, dx_d, spec: SlidingSpec) -> float:
    """Torque computed from the functional estimate ``g_hat = [F1 x, Gamma x]``."""
    g_hat = np.asarray(g_hat, dtype=float)
    G = spec.Gamma
    inv = 1.0 / spec.gamma_b
    sigma_hat = g_hat[1] - G @ x_d
    return float(
        g_hat[0]
        - inv * spec.k2 * switching(sigma_hat, spec.boundary_layer)
        + inv * (G @ dx_d + spec.k1 * (G @ x_d))
    )


def reaching_time_bound(sigma0: float, k1: float, k2: float) -> float:
    """Upper bound on the time for sigma to reach zero under the reaching law.

    With V = sigma^2 / 2 the closed loop gives dV/dt = -a1 V - a2 sqrt(V),
    a1 = 2 k1 and a2 = sqrt(2) k2.  Substituting W = sqrt(V) linearises
    the equation, and W hits zero at

        t_r = (2 / a1) ln(1 + a1 W0 / a2),   W0 = |sigma0| / sqrt(2).

    With ``k2 = 0`` the reaching is only asymptotic and ``inf`` is
    returned for nonzero ``sigma0``.
    """
    if not k1 > 0 or not k2 >= 0:
        raise ValueError("need k1 > 0 and k2 >= 0")
    if sigma0 == 0:
        return 0.0
    if k2 == 0:
        return math.inf
    a1 = 2.0 * k1
    a2 = math.sqrt(2.0) * k2
    w0 = abs(sigma0) / math.sqrt(2.0)
    return (2.0 / a1) * math.log1p(a1 * w0 / a2)
