"""The two worked problems shipped with the library.

``example21``
    ``r cos2phi u_r - sin2phi u_phi + u = e^{r cos phi}(1 + r cos phi)`` with
    ``u(0, phi) = 1`` and ``u(r, 0) = e^r``; exact solution ``e^{r cos phi}``.
``example31``
    Laplace's equation on the unit disk with boundary value 1 on the upper
    half circle and 0 on the lower half; exact solution from the Poisson
    integral, ``1/2 + arctan(2 r sin phi / (1 - r^2)) / pi``.

Series data are encoded through the canonical monomial map (``r**p`` is the
column of ``R_p^p``) and the trigonometric expansion of ``cos**p``.
"""

from __future__ import annotations

from math import comb, factorial

import numpy as np

from .assembly import FopdeSpec, SopdeSpec
from .basis import radial_count, radial_layout
from .operational import Projection

LADDER = ((7, 6), (9, 9), (11, 12), (13, 16), (15, 20), (17, 25), (19, 30), (21, 36))
"""Default ``(M, N)`` ladder; ``m_max = n_max = 3, ..., 10``."""

TABLE2_NONZEROS = (502, 1275, 2680, 5102, 8745, 14306, 22009, 33048)
TABLE2_DENSITY = (0.2846, 0.1943, 0.1538, 0.1179, 0.0972, 0.0792, 0.0677, 0.0578)


def ladder_orders(ladder=LADDER):
    """Translate ``(M, N)`` pairs to ``(m_max, n_max)``."""
    out = []
    for M, N in ladder:
        m_max = (M - 1) // 2
        n_max = next(n for n in range(64) if radial_count(n) >= N)
        if 2 * m_max + 1 != M or radial_count(n_max) != N:
            raise ValueError(f"({M}, {N}) is not a valid basis size")
        out.append((m_max, n_max))
    return out


def _cos_power_row(p: int, M: int) -> np.ndarray:
    """Coefficients of ``cos(phi)**p`` against ``Phi``."""
    row = np.zeros(M)
    for j in range(p + 1):
        k = abs(p - 2 * j)
        pos = 0 if k == 0 else 2 * k - 1
        if pos < M:
            row[pos] += comb(p, j) / 2**p
    return row


def example21_exact(r, phi):
    return np.exp(r * np.cos(phi))


def example21_forcing(m_max: int, n_max: int) -> np.ndarray:
    """Taylor series of ``e^x (1 + x)``, ``x = r cos phi``, through degree ``n_max``."""
    M, N = 2 * m_max + 1, radial_count(n_max)
    layout = radial_layout(n_max)
    F = np.zeros((M, N))
    for p in range(n_max + 1):
        F[:, layout.index_of(p, p)] += (p + 1) / factorial(p) * _cos_power_row(p, M)
    return F


def example21_boundary(m_max: int, n_max: int):
    """``(h, g)``: ``u(0, phi) = 1`` and the Taylor series of ``u(r, 0) = e^r``."""
    h = np.zeros(2 * m_max + 1)
    h[0] = 1.0
    layout = radial_layout(n_max)
    g = np.zeros(layout.N)
    for p in range(n_max + 1):
        g[layout.index_of(p, p)] = 1.0 / factorial(p)
    return h, g


def example21_spec(m_max: int = 3, n_max: int = 3, projection=Projection.LAGRANGE,
                   interp_degree: int | None = None) -> FopdeSpec:
    h, g = example21_boundary(m_max, n_max)
    return FopdeSpec(1.0, -1.0, 1.0, example21_forcing(m_max, n_max), h, g, m_max, n_max,
                     r0=0.0, phi0=0.0, projection=projection, interp_degree=interp_degree)


def example31_exact(r, phi):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 0.5 + np.arctan2(2.0 * r * np.sin(phi), 1.0 - r**2) / np.pi


def example31_boundary(m_max: int, n_max: int):
    """``(g, h, p, q)`` for the half-potential disk with ``r0 = 1``, ``phi0 = 0``.

    ``g = u(1, phi) = 1/2 + (2/pi) sum sin(k phi)/k`` over odd ``k``,
    ``h = u_r(1, phi) = (2/pi) sum sin(k phi)``, ``p = u(r, 0) = 1/2`` and
    ``q = u_phi(r, 0) = 2r / (pi (1 - r^2)) = (2/pi)(r + r^3 + ...)``.
    """
    M = 2 * m_max + 1
    g = np.zeros(M)
    h = np.zeros(M)
    g[0] = 0.5
    for k in range(1, m_max + 1, 2):
        g[2 * k] = 2.0 / (np.pi * k)
        h[2 * k] = 2.0 / np.pi
    layout = radial_layout(n_max)
    p = np.zeros(layout.N)
    p[0] = 0.5
    q = np.zeros(layout.N)
    for d in range(1, n_max + 1, 2):
        q[layout.index_of(d, d)] = 2.0 / np.pi
    return g, h, p, q


def example31_spec(m_max: int = 3, n_max: int = 3, projection=Projection.LAGRANGE,
                   interp_degree: int | None = None) -> SopdeSpec:
    g, h, p, q = example31_boundary(m_max, n_max)
    M, N = 2 * m_max + 1, radial_count(n_max)
    return SopdeSpec(0.0, 0.0, 0.0, np.zeros((M, N)), g, h, p, q, m_max, n_max,
                     r0=1.0, phi0=0.0, projection=projection, interp_degree=interp_degree)
