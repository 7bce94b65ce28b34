"""Spatial eigenstructure of a pinned-hub flexible link with tip payload.

The link is an Euler-Bernoulli beam attached to a hub of inertia ``J0`` and
carrying a payload (mass ``mp``, inertia ``Jp``) at its free end.  Roots of
the transcendental frequency equation give the spatial frequencies ``beta``;
each root has a mode shape

    phi(x) = a sin(bx) + b cos(bx) + c sinh(bx) + d cosh(bx)

fixed by the four boundary conditions

    phi(0) = 0
    EI phi''(0) = -J0 w^2 phi'(0)
    EI phi''(l) =  Jp w^2 phi'(l)
    EI phi'''(l) = -mp w^2 phi(l)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from . import fixtures
from .errors import DegenerateNullspace, RootSearchExhausted

NORMALIZATIONS = ("mean_square", "unit_modal_mass", "tabulated")

# cosh overflows float64 just above 710.
_OVERFLOW_BL = 700.0


@dataclass(frozen=True)
class BeamParams:
    """Physical constants of link, hub and payload (SI units)."""

    rho: float
    l: float
    EI: float
    J0: float = 0.0
    mp: float = 0.0
    Jp: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        for name in ("rho", "l", "EI"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("J0", "mp", "Jp", "zeta"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def J(self) -> float:
        """Total inertia about the hub axis."""
        return self.J0 + self.rho * self.l**3 / 3.0 + self.Jp + self.mp * self.l**2

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def scaled(self, **changes) -> "BeamParams":
        d = self.as_dict()
        d.update(changes)
        return BeamParams(**d)


@dataclass(frozen=True)
class ModeShape:
    beta: float
    omega: float
    coeffs: Optional[tuple]
    phi_prime_0: float
    phi_l: float
    norm_tag: str
    # (a, b, P, Q) with phi = a sin + b cos + P exp(b(x - l)) + Q exp(-bx);
    # bounded on [0, l], so evaluation does not suffer sinh/cosh cancellation.
    stable_coeffs: Optional[tuple] = field(default=None, repr=False)
    length: Optional[float] = field(default=None, repr=False)

    def derivative(self, x, order: int = 0):
        """Evaluate the ``order``-th spatial derivative of phi at ``x``."""
        if self.stable_coeffs is None:
            raise ValueError(f"mode shape tagged {self.norm_tag!r} carries no coefficients")
        b = self.beta
        a, bc, P, Q = self.stable_coeffs
        x = np.asarray(x, dtype=float)
        bx = b * x
        trig = (np.sin(bx), np.cos(bx), -np.sin(bx), -np.cos(bx))
        s = trig[order % 4]
        c = trig[(order + 1) % 4]
        return b**order * (
            a * s + bc * c
            + P * np.exp(b * (x - self.length))
            + Q * (-1) ** order * np.exp(-bx)
        )

    def __call__(self, x):
        return self.derivative(x, 0)


@dataclass(frozen=True)
class ModalData:
    params: BeamParams
    modes: tuple

    def __post_init__(self):
        betas = [m.beta for m in self.modes]
        if not betas or betas[0] <= 0 or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("modes must be non-empty with strictly increasing positive beta")

    @property
    def n(self) -> int:
        return len(self.modes)

    @property
    def betas(self) -> np.ndarray:
        return np.array([m.beta for m in self.modes])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])

    @property
    def phi_prime_0(self) -> np.ndarray:
        return np.array([m.phi_prime_0 for m in self.modes])

    @property
    def phi_l(self) -> np.ndarray:
        return np.array([m.phi_l for m in self.modes])

    @property
    def norm_tag(self) -> str:
        return self.modes[0].norm_tag

    def truncated(self, n: int) -> "ModalData":
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot truncate {self.n} modes to {n}")
        return ModalData(self.params, self.modes[:n])


# ---------------------------------------------------------------------------
# frequency equation


def _inertia_ratios(p: BeamParams):
    r = p.rho
    return (
        2 * p.mp / r,
        2 * p.Jp / r,
        p.J0 / r,
        p.mp * (p.J0 + p.Jp) / r**2,
        p.J0 * p.Jp / r**2,
        p.J0 * p.Jp * p.mp / r**3,
    )


def _scaled_terms(beta: float, p: BeamParams) -> np.ndarray:
    """The seven additive terms of the frequency equation divided by cosh(beta*l)."""
    u = beta * p.l
    c, s = math.cos(u), math.sin(u)
    t = math.tanh(u)
    e = 1.0 / math.cosh(u) if u < _OVERFLOW_BL else 0.0
    k2, k3, k4, k5, k6, k7 = _inertia_ratios(p)
    return np.array([
        c * t - s,
        -k2 * beta * s * t,
        -k3 * beta**3 * c,
        -k4 * beta**3 * (e + c),
        -k5 * beta**4 * (c * t - s),
        k6 * beta**6 * (c * t + s),
        -k7 * beta**7 * (e - c),
    ])


def _scaled_residual(beta: float, p: BeamParams) -> float:
    return float(_scaled_terms(beta, p).sum())


def _cosh_times(u: float, value: float) -> float:
    if value == 0.0:
        return 0.0
    if u > _OVERFLOW_BL:
        log_mag = u - math.log(2.0) + math.log(abs(value))
        if log_mag > 709.0:
            return math.copysign(math.inf, value)
        return math.copysign(math.exp(log_mag), value)
    return math.cosh(u) * value


def char_eq_residual(beta: float, params: BeamParams) -> float:
    """Left-hand side of the frequency equation at ``beta`` (> 0).

    Overflow of the hyperbolic factor yields a signed infinity, never NaN.
    """
    if not beta > 0:
        raise ValueError("beta must be > 0")
    return _cosh_times(beta * params.l, _scaled_residual(beta, params))


def char_eq_term_scale(beta: float, params: BeamParams) -> float:
    """Magnitude of the largest additive term of the frequency equation."""
    return _cosh_times(beta * params.l, float(np.abs(_scaled_terms(beta, params)).max()))


def natural_frequency(beta, params: BeamParams):
    return beta**2 * math.sqrt(params.EI / params.rho)


def _bisect(f, lo: float, hi: float, rtol: float) -> float:
    flo = f(lo)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_beta_roots(
    params: BeamParams, n: int, grid_points: int = 2000, rtol: float = 1e-12
) -> list:
    """Return the ``n`` smallest positive roots of the frequency equation.

    The residual is divided by ``cosh(beta l) * max(1, beta**7)`` before the
    scan so that no term overflows, scanned on a uniform grid in ``beta*l``
    starting at 0.05 (excluding the rigid-body root at zero) and each
    bracket refined by bisection.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    l = params.l

    def g(beta):
        return _scaled_residual(beta, params) / max(1.0, beta**7)

    cap = math.pi * (n + 2)
    while True:
        bl = np.linspace(0.05, cap, grid_points)
        vals = np.array([g(x / l) for x in bl])
        roots = []
        for i in range(len(bl) - 1):
            if vals[i] == 0.0:
                roots.append(bl[i] / l)
            elif vals[i] * vals[i + 1] < 0:
                roots.append(_bisect(g, bl[i] / l, bl[i + 1] / l, rtol))
            if len(roots) == n:
                return roots
        if cap >= _OVERFLOW_BL:
            raise RootSearchExhausted(
                f"found {len(roots)} of {n} roots with beta*l <= {cap:g}"
            )
        cap = min(2 * cap, _OVERFLOW_BL)


# ---------------------------------------------------------------------------
# mode shapes


def boundary_matrix(beta: float, params: BeamParams) -> np.ndarray:
    """4x4 boundary-condition matrix acting on (a, b, c, d) of the sin/cos/sinh/cosh form."""
    p = params
    b, u = beta, beta * p.l
    w2 = natural_frequency(beta, p) ** 2
    s, c, sh, ch = math.sin(u), math.cos(u), math.sinh(u), math.cosh(u)
    d1_0 = np.array([b, 0.0, b, 0.0])
    d2_0 = np.array([0.0, -b * b, 0.0, b * b])
    f_l = np.array([s, c, sh, ch])
    d1_l = b * np.array([c, -s, ch, sh])
    d2_l = b * b * np.array([-s, -c, sh, ch])
    d3_l = b**3 * np.array([-c, s, ch, sh])
    return np.array([
        [0.0, 1.0, 0.0, 1.0],
        p.EI * d2_0 + p.J0 * w2 * d1_0,
        p.EI * d2_l - p.Jp * w2 * d1_l,
        p.EI * d3_l + p.mp * w2 * f_l,
    ])


def _stable_basis_derivs(beta: float, l: float, x: float, order: int) -> np.ndarray:
    b = beta
    trig = (math.sin(b * x), math.cos(b * x), -math.sin(b * x), -math.cos(b * x))
    return b**order * np.array([
        trig[order % 4],
        trig[(order + 1) % 4],
        math.exp(b * (x - l)),
        (-1) ** order * math.exp(-b * x),
    ])


def _stable_boundary_matrix(beta: float, p: BeamParams) -> np.ndarray:
    """Boundary conditions acting on (a, b, P, Q) of the bounded basis."""
    w2 = natural_frequency(beta, p) ** 2
    l = p.l
    D = lambda x, k: _stable_basis_derivs(beta, l, x, k)  # noqa: E731
    return np.array([
        D(0.0, 0),
        p.EI * D(0.0, 2) + p.J0 * w2 * D(0.0, 1),
        p.EI * D(l, 2) - p.Jp * w2 * D(l, 1),
        p.EI * D(l, 3) + p.mp * w2 * D(l, 0),
    ])


def _stable_gram(beta: float, l: float) -> np.ndarray:
    """Closed-form Gram matrix of (sin, cos, exp(b(x-l)), exp(-bx)) over [0, l]."""
    b, u = beta, beta * l
    s, c, e = math.sin(u), math.cos(u), math.exp(-u)
    e2 = math.exp(-2 * u)
    g = np.empty((4, 4))
    g[0, 0] = l / 2 - math.sin(2 * u) / (4 * b)
    g[1, 1] = l / 2 + math.sin(2 * u) / (4 * b)
    g[0, 1] = s * s / (2 * b)
    g[2, 2] = (1 - e2) / (2 * b)
    g[3, 3] = (1 - e2) / (2 * b)
    g[2, 3] = l * e
    g[0, 2] = (s - c + e) / (2 * b)
    g[1, 2] = (s + c - e) / (2 * b)
    g[0, 3] = (1 - e * (s + c)) / (2 * b)
    g[1, 3] = (1 + e * (s - c)) / (2 * b)
    iu = np.triu_indices(4, 1)
    g[(iu[1], iu[0])] = g[iu]
    return g


def _stable_to_hyperbolic(coeffs, u: float):
    a, b, P, Q = coeffs
    # c sinh + d cosh = P exp(-u) exp(bx) + Q exp(-bx)
    pe = P * math.exp(-u)
    return (a, b, pe - Q, pe + Q)


def find_mode_shape(
    beta: float, params: BeamParams, normalization: str = "mean_square", null_tol: float = 1e-7
) -> ModeShape:
    """Solve the boundary conditions at a root ``beta`` for the mode shape.

    ``normalization`` is ``"mean_square"`` (integral of phi^2 over the link
    equals ``l``) or ``"unit_modal_mass"`` (kinetic-energy weighted norm
    including hub and payload equals one).  The sign is fixed by
    ``phi'(0) > 0``.
    """
    if normalization not in ("mean_square", "unit_modal_mass"):
        raise ValueError(f"unknown normalization {normalization!r}")
    p = params
    M = _stable_boundary_matrix(beta, p)
    M = M / np.abs(M).max(axis=1, keepdims=True)
    _, sv, vt = np.linalg.svd(M)
    rel = sv / sv[0]
    nullity = int(np.sum(rel < null_tol))
    if nullity != 1:
        raise DegenerateNullspace(
            f"boundary system at beta={beta!r} has nullity {nullity} "
            f"(singular values {rel})"
        )
    v = vt[-1]

    l = p.l
    dphi0 = float(_stable_basis_derivs(beta, l, 0.0, 1) @ v)
    v = v * math.copysign(1.0, dphi0)
    if normalization == "mean_square":
        scale = math.sqrt(l / float(v @ _stable_gram(beta, l) @ v))
    else:
        phi0p = _stable_basis_derivs(beta, l, 0.0, 1) @ v
        phil = _stable_basis_derivs(beta, l, l, 0) @ v
        philp = _stable_basis_derivs(beta, l, l, 1) @ v
        m = (p.rho * float(v @ _stable_gram(beta, l) @ v)
             + p.J0 * phi0p**2 + p.mp * phil**2 + p.Jp * philp**2)
        scale = 1.0 / math.sqrt(m)
    v = v * scale

    return ModeShape(
        beta=beta,
        omega=natural_frequency(beta, p),
        coeffs=tuple(float(c) for c in _stable_to_hyperbolic(v, beta * l)),
        phi_prime_0=float(_stable_basis_derivs(beta, l, 0.0, 1) @ v),
        phi_l=float(_stable_basis_derivs(beta, l, l, 0) @ v),
        norm_tag=normalization,
        stable_coeffs=tuple(float(c) for c in v),
        length=l,
    )


def boundary_residuals(mode: ModeShape, params: BeamParams) -> np.ndarray:
    """Relative residuals of the four boundary conditions for ``mode``.

    Each residual is divided by the summed magnitude of the terms in its own
    condition, so the values are scale free.
    """
    p = params
    w2 = mode.omega**2
    l = p.l
    d = mode.derivative
    pairs = [
        (d(0.0, 0), 0.0),
        (p.EI * d(0.0, 2), -p.J0 * w2 * d(0.0, 1)),
        (p.EI * d(l, 2), p.Jp * w2 * d(l, 1)),
        (p.EI * d(l, 3), -p.mp * w2 * d(l, 0)),
    ]
    ref = max(abs(c) for c in mode.stable_coeffs) * np.array(
        [1.0, p.EI * mode.beta**2, p.EI * mode.beta**2, p.EI * mode.beta**3]
    )
    return np.array([abs(lhs - rhs) for lhs, rhs in pairs]) / ref


def _tabulated_modes(params: BeamParams, n: int, betas: Sequence[float]) -> tuple:
    ref = BeamParams(**fixtures.BEAM)
    if params != ref:
        raise ValueError("the 'tabulated' normalization is only defined for the bundled beam")
    if n > len(fixtures.PHI_L):
        raise ValueError(f"tabulated modal data covers {len(fixtures.PHI_L)} modes, asked for {n}")
    return tuple(
        ModeShape(
            beta=b,
            omega=natural_frequency(b, params),
            coeffs=None,
            phi_prime_0=fixtures.PHI_PRIME_0[i],
            phi_l=fixtures.PHI_L[i],
            norm_tag="tabulated",
        )
        for i, b in enumerate(betas)
    )


def modal_analysis(params: BeamParams, n: int, normalization: str = "mean_square") -> ModalData:
    """Roots, frequencies and mode shapes of the first ``n`` flexible modes.

    ``normalization="tabulated"`` keeps the computed ``beta``/``omega`` but
    takes the hub slope and tip value of each mode from the bundled table;
    it only applies to the bundled beam.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}; expected one of {NORMALIZATIONS}")
    betas = find_beta_roots(params, n)
    if normalization == "tabulated":
        return ModalData(params, _tabulated_modes(params, n, betas))
    return ModalData(params, tuple(find_mode_shape(b, params, normalization) for b in betas))
