"""Reduced-order functional observer for the sliding-mode control functionals.

The observer

    d(eta_hat)/dt = N eta_hat + L y + H u
    g_hat         = G y + D_obs eta_hat

estimates ``g = F x`` with ``F = [F1; Gamma]``, ``F1 = -(Gamma B)^-1 (Gamma A + k1 Gamma)``.
It does so exactly in the limit iff N is Hurwitz and

    T A - N T - L C = 0,   H = T B,   F = G C + D_obs T,   v >= rank(F - G C).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    CompositeUnstable,
    DimensionMismatch,
    SingularGammaB,
    SpectraOverlap,
    Unrealizable,
)
from .plant import PlantModel
from .smc import GAMMA_B_MIN, SlidingSpec

TOL_SYL = 1e-8
SPECTRAL_GAP_MIN = 1e-8


def _rel(lhs, rhs) -> float:
    lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
    rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), np.finfo(float).tiny)
    return float(np.linalg.norm(lhs - rhs) / scale)


@dataclass(frozen=True, eq=False)
class FunctionalGain:
    F: np.ndarray

    @property
    def F1(self) -> np.ndarray:
        return self.F[0]

    @property
    def F2(self) -> np.ndarray:
        return self.F[1]


def build_F(plant: PlantModel, Gamma, k1: float) -> FunctionalGain:
    Gamma = np.asarray(Gamma, dtype=float).reshape(-1)
    if Gamma.shape != (plant.order,):
        raise DimensionMismatch(f"Gamma has length {Gamma.size}, plant order is {plant.order}")
    gb = float(Gamma @ plant.B)
    if abs(gb) < GAMMA_B_MIN:
        raise SingularGammaB(f"|Gamma B| = {abs(gb):.3e}")
    F1 = -(Gamma @ plant.A + k1 * Gamma) / gb
    return FunctionalGain(np.vstack([F1, Gamma]))


def spectral_gap(A, N) -> float:
    """Smallest distance between an eigenvalue of A and one of N."""
    la = np.linalg.eigvals(A)
    ln = np.linalg.eigvals(N)
    return float(np.abs(la[:, None] - ln[None, :]).min())


def solve_T(A, N, L, C, gap_min: float = SPECTRAL_GAP_MIN) -> np.ndarray:
    """Unique T with ``T A - N T = L C``.

    Solved as one linear system in vec(T) (column-major):
    ``(A^T kron I - I kron N) vec(T) = vec(L C)``.
    """
    A, N, L, C = (np.asarray(a, dtype=float) for a in (A, N, L, C))
    v, m = N.shape[0], A.shape[0]
    if N.shape != (v, v) or L.shape != (v, C.shape[0]) or C.shape[1] != m:
        raise DimensionMismatch(
            f"incompatible shapes A{A.shape} N{N.shape} L{L.shape} C{C.shape}"
        )
    gap = spectral_gap(A, N)
    if gap < gap_min:
        raise SpectraOverlap(f"spectra of A and N are {gap:.3e} apart (< {gap_min:g})")
    K = np.kron(A.T, np.eye(v)) - np.kron(np.eye(m), N)
    rhs = (L @ C).reshape(-1, order="F")
    return np.linalg.solve(K, rhs).reshape((v, m), order="F")


def solve_GD(F, C, T, tol: float = TOL_SYL, least_squares: bool = False):
    """Minimal-norm ``(G, D_obs)`` with ``G C + D_obs T = F``.

    F must lie in the row space of ``[C; T]``; otherwise ``Unrealizable`` is
    raised unless ``least_squares`` is set, in which case the minimal-norm
    least-squares pair is returned regardless.  The relative residual is
    returned as the third element.
    """
    F, C, T = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, C, T))
    S = np.vstack([C, T])
    if F.shape[1] != S.shape[1]:
        raise DimensionMismatch(f"F has {F.shape[1]} columns, [C; T] has {S.shape[1]}")
    X = np.linalg.lstsq(S.T, F.T, rcond=None)[0].T
    resid = _rel(F, X @ S)
    if resid > tol and not least_squares:
        rank_s = np.linalg.matrix_rank(S)
        rank_sf = np.linalg.matrix_rank(np.vstack([S, F]))
        raise Unrealizable(
            f"F is not in the row space of [C; T]: relative residual {resid:.3e} "
            f"(rank [C;T] = {rank_s}, rank [C;T;F] = {rank_sf})"
        )
    p = C.shape[0]
    return X[:, :p], X[:, p:], resid


@dataclass(frozen=True, eq=False)
class CompositeSystem:
    A_C: np.ndarray
    B_C: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A_C)

    @property
    def max_real(self) -> float:
        return float(self.eigenvalues.real.max())

    @property
    def stable(self) -> bool:
        return self.max_real < 0


def composite_matrix(plant: PlantModel, F, D_obs, N) -> CompositeSystem:
    """Block-triangular matrix of plant state and estimation error."""
    F, D_obs, N = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, D_obs, N))
    m, v = plant.order, N.shape[0]
    B = plant.B.reshape(-1, 1)
    A_C = np.block([
        [plant.A + B @ F[:1], -B @ D_obs[:1]],
        [np.zeros((v, m)), N],
    ])
    B_C = np.r_[plant.B, np.zeros(v)]
    return CompositeSystem(A_C, B_C)


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    residual: float
    tolerance: float
    passed: bool


def check_conditions(plant: PlantModel, F, N, L, H, G, D_obs, T, tol: float = TOL_SYL) -> list:
    """Evaluate the five existence conditions for a given observer.

    Residuals 2-4 are relative (``|lhs - rhs| / max(|lhs|, |rhs|)``,
    Frobenius norms).  Condition 1 reports the largest real part of eig(N);
    condition 5 reports ``rank(F - G C) - v``.
    """
    F, N, L, G, D_obs, T = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, N, L, G, D_obs, T))
    H = np.asarray(H, dtype=float).reshape(-1)
    A, B, C = plant.A, plant.B, plant.C
    v = N.shape[0]
    max_re = float(np.linalg.eigvals(N).real.max())
    rank = int(np.linalg.matrix_rank(F - G @ C))
    r2 = _rel(T @ A - N @ T, L @ C)
    r3 = _rel(H, T @ B)
    r4 = _rel(F, G @ C + D_obs @ T)
    return [
        ConditionCheck("N_hurwitz", max_re, 0.0, max_re < 0),
        ConditionCheck("sylvester", r2, tol, r2 <= tol),
        ConditionCheck("input_map", r3, tol, r3 <= tol),
        ConditionCheck("functional", r4, tol, r4 <= tol),
        ConditionCheck("order", float(rank - v), 0.0, rank <= v),
    ]


@dataclass(frozen=True, eq=False)
class ObserverSpec:
    """Observer matrices in the canonical output order ``y = [theta_c, theta_t]``."""

    v: int
    N: np.ndarray
    L: np.ndarray
    H: np.ndarray
    G: np.ndarray
    D_obs: np.ndarray
    T: np.ndarray
    F: np.ndarray
    realization: str = "exact"
    conditions: list = field(default_factory=list)
    composite: Optional[CompositeSystem] = None

    @property
    def all_conditions_hold(self) -> bool:
        return all(c.passed for c in self.conditions)


def synthesize(
    plant: PlantModel,
    spec: SlidingSpec,
    N,
    L,
    realization: str = "exact",
    tol: float = TOL_SYL,
) -> ObserverSpec:
    """Design the functional observer for ``plant`` and verify it.

    ``realization="least_squares"`` accepts a ``(G, D_obs)`` pair that only
    approximately reproduces F; the shortfall is visible in the
    ``functional`` condition of the returned report.
    """
    if realization not in ("exact", "least_squares"):
        raise ValueError(f"unknown realization {realization!r}")
    N = np.atleast_2d(np.asarray(N, dtype=float))
    L = np.atleast_2d(np.asarray(L, dtype=float))
    F = build_F(plant, spec.Gamma, spec.k1).F
    if np.linalg.eigvals(N).real.max() >= 0:
        raise CompositeUnstable("N is not Hurwitz")
    T = solve_T(plant.A, N, L, plant.C)
    H = T @ plant.B
    G, D_obs, _ = solve_GD(F, plant.C, T, tol=tol, least_squares=realization == "least_squares")
    conditions = check_conditions(plant, F, N, L, H, G, D_obs, T, tol)
    comp = composite_matrix(plant, F, D_obs, N)
    if not comp.stable:
        raise CompositeUnstable(f"composite matrix has eigenvalue with real part {comp.max_real:.4g}")
    return ObserverSpec(
        v=N.shape[0], N=N, L=L, H=H, G=G, D_obs=D_obs, T=T, F=F,
        realization=realization, conditions=conditions, composite=comp,
    )


def observer_derivative(eta_hat, y, u, spec: ObserverSpec) -> np.ndarray:
    eta_hat = np.asarray(eta_hat, dtype=float)
    y = np.asarray(y, dtype=float)
    if eta_hat.shape != (spec.v,) or y.shape != (spec.L.shape[1],):
        raise DimensionMismatch(f"eta_hat {eta_hat.shape} / y {y.shape} do not match observer")
    return spec.N @ eta_hat + spec.L @ y + spec.H * float(u)


def estimate_g(eta_hat, y, spec: ObserverSpec) -> np.ndarray:
    eta_hat = np.asarray(eta_hat, dtype=float)
    y = np.asarray(y, dtype=float)
    if eta_hat.shape != (spec.v,) or y.shape != (spec.G.shape[1],):
        raise DimensionMismatch(f"eta_hat {eta_hat.shape} / y {y.shape} do not match observer")
    return spec.G @ y + spec.D_obs @ eta_hat
