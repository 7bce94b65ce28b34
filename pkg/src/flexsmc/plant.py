"""Finite-dimensional modal model and its state-space form.

State packing (used everywhere in the package)::

    x = [theta, p_1 .. p_n, dtheta, dp_1 .. dp_n]

Outputs are ``y = [theta_c, theta_t]``: the clamped joint angle and the tip
angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, SingularMass
from .modal import BeamParams, ModalData


@dataclass(frozen=True, eq=False)
class PlantModel:
    n: int
    M: np.ndarray
    D: np.ndarray
    K: np.ndarray
    Bbar: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    modal: Optional[ModalData]

    def __post_init__(self):
        for arr in (self.M, self.D, self.K, self.Bbar, self.A, self.B, self.C):
            arr.setflags(write=False)

    @property
    def order(self) -> int:
        return 2 * self.n + 2

    def design_indices(self, n_design: int) -> np.ndarray:
        """Positions of the rigid coordinate and first ``n_design`` modes in x."""
        if not 0 <= n_design <= self.n:
            raise ValueError(f"cannot project {self.n}-mode state onto {n_design} modes")
        m = self.n + 1
        idx = list(range(n_design + 1)) + list(range(m, m + n_design + 1))
        return np.array(idx)

    def project(self, x, n_design: int) -> np.ndarray:
        return np.asarray(x)[..., self.design_indices(n_design)]


def assemble_modal_matrices(modal: ModalData):
    """Mass, damping, stiffness and input matrices of the ``n``-mode model."""
    p = modal.params
    w = modal.omegas
    n = modal.n
    M = np.diag(np.r_[p.J, np.ones(n)])
    D = np.diag(np.r_[0.0, 2.0 * p.zeta * w])
    K = np.diag(np.r_[0.0, w**2])
    Bbar = np.r_[1.0, modal.phi_prime_0]
    return M, D, K, Bbar


def to_state_space(M, D, K, Bbar, modal: ModalData):
    """First-order form ``(A, B, C)`` of ``M q'' + D q' + K q = Bbar u``."""
    m = M.shape[0]
    if np.linalg.cond(M) > 1e12:
        raise SingularMass("mass matrix is singular or numerically ill-conditioned")
    Minv = np.linalg.inv(M)
    A = np.block([[np.zeros((m, m)), np.eye(m)], [-Minv @ K, -Minv @ D]])
    B = np.r_[np.zeros(m), Minv @ Bbar]
    l = modal.params.l
    C = np.zeros((2, 2 * m))
    C[0, 0] = C[1, 0] = 1.0
    C[0, 1:m] = modal.phi_prime_0
    C[1, 1:m] = modal.phi_l / l
    return A, B, C


def build_plant(modal: ModalData) -> PlantModel:
    M, D, K, Bbar = assemble_modal_matrices(modal)
    A, B, C = to_state_space(M, D, K, Bbar, modal)
    return PlantModel(modal.n, M, D, K, Bbar, A, B, C, modal)


def rigid_plant(params: BeamParams) -> PlantModel:
    """Rigid-body-only model (n = 0): a double integrator with inertia J."""
    J = params.J
    M = np.array([[J]])
    Z = np.zeros((1, 1))
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([0.0, 1.0 / J])
    C = np.array([[1.0, 0.0], [1.0, 0.0]])
    return PlantModel(0, M, Z, Z.copy(), np.array([1.0]), A, B, C, None)


def measure(plant: PlantModel, x):
    """Clamped-joint and tip angles for state ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (plant.order,):
        raise DimensionMismatch(f"state has shape {x.shape}, plant expects ({plant.order},)")
    theta = x[0]
    p = x[1 : plant.n + 1]
    if plant.modal is None:
        return theta, theta
    theta_c = theta + float(np.dot(plant.modal.phi_prime_0, p))
    theta_t = theta + float(np.dot(plant.modal.phi_l / plant.modal.params.l, p))
    return theta_c, theta_t
