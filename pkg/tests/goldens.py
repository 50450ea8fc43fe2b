"""Golden operational matrices at low order, shared between test modules."""

import numpy as np

PI = np.pi

E_RR0_TRUNC = np.array([
    [0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1 / 2, 0, 0],
    [0, -1 / 3, 0, 0, 1 / 3, -1 / 3],
    [0, 0, 0, 0, 0, 1 / 3],
    [0, 0, 0, -1, 0, 0],
    [0, 0, 0, 0, 0, 0],
])

M_R_R_TRUNC = np.array([
    [0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0],
    [0, -1, 0, 0, 0, 2],
    [0, 0, 0, 0, 0, 1],
    [0, 0, 0, -2, 0, 0],
    [0, 0, 0, 0, 0, 0],
])

M_R_R2_TRUNC = np.array([
    [0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 1],
    [0, 0, 0, -1, 0, 0],
    [0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, -2],
    [0, 0, 0, 0, 0, 0],
])

# The displayed upgraded matrix; its R_3^1 row is replaced by the value that
# follows from the displayed r^5 rule: 3 r^5 - 2 r^3 ~ 4/3 r - 20/3 r^2 + 19/3 r^3.
M_R_R2_PROJ = np.array([
    [0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 1],
    [0, 4 / 9, 0, -31 / 9, 0, 4],
    [0, 2 / 9, 0, -11 / 9, 0, 2],
    [0, 4 / 3, 0, -20 / 3, 0, 19 / 3],
    [0, 4 / 9, 0, -20 / 9, 0, 25 / 9],
])
M_R_R2_PROJ_DISPLAYED_R31 = [0, 4 / 3, 0, -26 / 3, 0, 25 / 3]

E_PHI_M3 = np.array([
    [PI, 0, -2, 0, -1, 0, -2 / 3],
    [0, 0, 1, 0, 0, 0, 0],
    [1, -1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1 / 2, 0, 0],
    [1 / 2, 0, 0, -1 / 2, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1 / 3],
    [1 / 3, 0, 0, 0, 0, -1 / 3, 0],
])
