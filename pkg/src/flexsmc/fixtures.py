"""Bundled numerical fixture: the published single-link arm and its controller.

Plain numbers only; the typed objects are built by :mod:`flexsmc.config`.
"""

import math

BEAM = {
    "rho": 0.5,
    "l": 1.0,
    "EI": 1.0,
    "J0": 0.002,
    "mp": 0.0,
    "Jp": 0.0,
    "zeta": 0.05,
}

# Tabulated modal data for BEAM, modes 1..5.
OMEGA = (20.53, 55.88, 101.36, 177.66, 286.84)
PHI_PRIME_0 = (32.8184, 10.4096, 6.1588, 3.8529, 2.4422)
PHI_L = (0.3214, -1.6407, 2.4586, -2.3010, 2.1568)

GAMMA = (6.3461, 1.8134, 4.1048, 0.8301, -0.0635, -0.1765)
K1 = 67.71
K2 = 0.001

OBSERVER_N = ((-0.5, 2.0), (-2.0, -0.5))
OBSERVER_L = ((1.0, 0.0), (0.0, 1.0))
# The published observer matrices only satisfy TA - NT - LC = 0 when the
# measurement vector is ordered tip angle first.
OBSERVER_OUTPUT_ORDER = ("theta_t", "theta_c")

# Printed observer matrices (4 decimals), expressed in OBSERVER_OUTPUT_ORDER.
PRINTED_F = (
    (-429.6914, -149.5454, -829.1284, -62.5493, 2.3555, 6.8609),
    (6.3461, 1.8134, 4.1048, 0.8301, -0.0635, -0.1765),
)
PRINTED_T = (
    (0.5882, -0.1581, -0.0039, 0.0969, -0.0004, 0.0005),
    (-0.3529, -0.1216, -0.0181, 0.3183, -0.0788, -0.0033),
)
PRINTED_G = ((216.8704, -10.7626), (0.1858, 0.0924))
PRINTED_D = ((-984.9503, 159.5181), (9.6574, -1.0438))
PRINTED_H = (0.5678, -0.7321)

# Initial state of the five-mode plant, [theta, p1..p5, dtheta, dp1..dp5].
X0_FIVE_MODE = (
    math.pi / 8, 0.001, 0.002, 0.002, 0.002, 0.001,
    0.0, 0.0001, 0.0002, 0.0002, 0.0003, 0.0002,
)

THETA_REGULATION = math.pi / 4
TORQUE_BOUND = 0.5


def truncate_state(x_full, n_full, n):
    """Keep the rigid coordinate and the first ``n`` modes of a packed state."""
    x_full = list(x_full)
    return x_full[: n + 1] + x_full[n_full + 1 : n_full + 2 + n]
