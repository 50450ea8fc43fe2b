"""Zernike radial polynomials, basis bookkeeping and expansions on the unit disk.

The radial basis vector is ordered by degree and then by azimuthal order::

    R(r) = [R_0^0, R_1^1, R_2^0, R_2^2, R_3^1, R_3^3, ...]

and the trigonometric vector by frequency::

    Phi(phi) = [1, cos phi, sin phi, cos 2phi, sin 2phi, ...]

A function on the disk is represented by an ``M x N`` coefficient matrix ``U``
so that ``u(r, phi) = Phi(phi)^T U R(r)`` with ``M = 2 m_max + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np


class DomainError(ValueError):
    """Raised for arguments outside the mathematical domain of an operation."""


@dataclass(frozen=True, order=True)
class ZernikeIndex:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or self.m > self.n or (self.n - self.m) % 2:
            raise DomainError(f"invalid Zernike index (n={self.n}, m={self.m})")


@dataclass(frozen=True)
class TrigIndex:
    """Entry of ``Phi``: ``kind`` is ``"const"``, ``"cos"`` or ``"sin"``."""

    kind: str
    k: int = 0

    def __post_init__(self):
        if self.kind == "const":
            if self.k != 0:
                raise DomainError("constant term has frequency 0")
        elif self.kind in ("cos", "sin"):
            if self.k < 1:
                raise DomainError(f"frequency must be positive, got {self.k}")
        else:
            raise DomainError(f"unknown trig kind {self.kind!r}")

    @property
    def position(self) -> int:
        if self.kind == "const":
            return 0
        return 2 * self.k - 1 if self.kind == "cos" else 2 * self.k

    @classmethod
    def from_position(cls, pos: int) -> "TrigIndex":
        if pos == 0:
            return cls("const")
        k = (pos + 1) // 2
        return cls("cos" if pos % 2 else "sin", k)


def count_of_degree(i: int) -> int:
    """Number of radial polynomials of exact degree ``i``."""
    return i // 2 + 1


def radial_count(n_max: int) -> int:
    """Length ``N`` of ``R(r)`` when all degrees ``<= n_max`` are kept."""
    return sum(count_of_degree(i) for i in range(n_max + 1))


def n_max_from_count(N: int) -> int:
    n, total = 0, 1
    while total < N:
        n += 1
        total += count_of_degree(n)
    if total != N:
        raise DomainError(f"{N} is not a valid radial basis length")
    return n


def m_max_from_count(M: int) -> int:
    if M < 1 or M % 2 == 0:
        raise DomainError(f"{M} is not a valid trigonometric basis length")
    return (M - 1) // 2


@dataclass(frozen=True)
class RadialBasisLayout:
    n_max: int
    ordering: tuple

    @property
    def N(self) -> int:
        return len(self.ordering)

    def index_of(self, n: int, m: int) -> int:
        return self._positions()[(n, m)]

    def degree_slice(self, n: int) -> slice:
        """Positions of all polynomials of exact degree ``n``."""
        start = radial_count(n - 1) if n > 0 else 0
        return slice(start, start + count_of_degree(n))

    def _positions(self) -> dict:
        return _positions(self.n_max)


@lru_cache(maxsize=None)
def _positions(n_max: int) -> dict:
    return {(z.n, z.m): i for i, z in enumerate(radial_layout(n_max).ordering)}


@lru_cache(maxsize=None)
def radial_layout(n_max: int) -> RadialBasisLayout:
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    ordering = tuple(
        ZernikeIndex(n, m) for n in range(n_max + 1) for m in range(n % 2, n + 1, 2)
    )
    return RadialBasisLayout(n_max, ordering)


@dataclass(frozen=True)
class RadialPolyCoeffs:
    """Integer monomial coefficients of ``R_n^m``; ``coeffs[j]`` multiplies ``r**j``."""

    coeffs: tuple
    n: int

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)


@lru_cache(maxsize=None)
def _radial_poly(n: int, m: int) -> RadialPolyCoeffs:
    c = [0] * (n + 1)
    for ell in range((n - m) // 2 + 1):
        c[n - 2 * ell] = (-1) ** ell * factorial(n - ell) // (
            factorial(ell) * factorial((n - m) // 2 - ell) * factorial((n + m) // 2 - ell)
        )
    return RadialPolyCoeffs(tuple(c), n)


def radial_poly(idx: ZernikeIndex) -> RadialPolyCoeffs:
    return _radial_poly(idx.n, idx.m)


def radial_monomials(n: int, m: int) -> np.ndarray:
    """Float monomial coefficients of ``R_n^m`` (validates the index)."""
    return radial_poly(ZernikeIndex(n, m)).as_array()


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r > 1.0) or not np.all(np.isfinite(r)):
        raise DomainError("radius must lie in [0, 1]")
    return r


def horner(coeffs, r):
    """Evaluate a monomial-coefficient polynomial at ``r`` (no domain check)."""
    out = np.zeros_like(np.asarray(r, dtype=float))
    for c in reversed(coeffs):
        out = out * r + c
    return out


def eval_radial(idx: ZernikeIndex, r):
    r = _check_radius(r)
    out = horner(radial_poly(idx).coeffs, r)
    return float(out) if out.ndim == 0 else out


def radial_vector(r, n_max: int) -> np.ndarray:
    """``R(r)`` with trailing axis of length ``N``; ``r`` may be an array."""
    r = _check_radius(r)
    return np.stack(
        [horner(radial_poly(z).coeffs, r) for z in radial_layout(n_max).ordering], axis=-1
    )


def trig_vector(phi, m_max: int) -> np.ndarray:
    """``Phi(phi)`` with trailing axis of length ``2 m_max + 1``."""
    if m_max < 0:
        raise DomainError("m_max must be non-negative")
    phi = np.asarray(phi, dtype=float)
    cols = [np.ones_like(phi)]
    for k in range(1, m_max + 1):
        cols.append(np.cos(k * phi))
        cols.append(np.sin(k * phi))
    return np.stack(cols, axis=-1)


def reconstruct(U, r, phi):
    """Evaluate ``Phi(phi)^T U R(r)``; ``r`` and ``phi`` broadcast together."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ValueError("coefficient matrix must be two-dimensional")
    m_max = m_max_from_count(U.shape[0])
    n_max = n_max_from_count(U.shape[1])
    r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
    val = np.einsum("...i,ij,...j->...", trig_vector(phi, m_max), U, radial_vector(r, n_max))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class QuadratureSpec:
    n_radial: int
    n_angular: int

    @classmethod
    def default(cls, m_max: int, n_max: int) -> "QuadratureSpec":
        return cls(2 * n_max + 8, 4 * m_max + 8)


def radial_nodes(n_radial: int):
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_radial)
    return 0.5 * (x + 1.0), 0.5 * w


def angular_nodes(n_angular: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_angular) / n_angular


def _sample(f, r, phi):
    vals = np.asarray(f(r, phi), dtype=float)
    vals = np.broadcast_to(vals, np.broadcast(r, phi).shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = tuple(int(v) for v in np.argwhere(bad)[0])
        rr = np.broadcast_to(r, vals.shape)[i]
        pp = np.broadcast_to(phi, vals.shape)[i]
        raise ValueError(f"non-finite sample at quadrature node r={rr!r}, phi={pp!r}")
    return vals


def expand_function(
    f: Callable, m_max: int, n_max: int, quadrature: QuadratureSpec | None = None
) -> np.ndarray:
    """Zernike coefficients ``A_nm``, ``B_nm`` of ``f(r, phi)`` as an ``M x N`` matrix.

    Entry ``(cos m, R_n^m)`` holds ``A_nm``, ``(sin m, R_n^m)`` holds ``B_nm`` and
    ``(const, R_n^0)`` holds ``A_n0``; entries pairing mismatched orders are zero.
    """
    q = quadrature or QuadratureSpec.default(m_max, n_max)
    rn, rw = radial_nodes(q.n_radial)
    pn = angular_nodes(q.n_angular)
    vals = _sample(f, rn[:, None], pn[None, :])
    # angular projection: trapezoid on a periodic grid
    trig = trig_vector(pn, m_max)  # (n_ang, M)
    fourier = vals @ trig * (2.0 * np.pi / q.n_angular)  # (n_rad, M)
    U = np.zeros((2 * m_max + 1, radial_count(n_max)))
    R = radial_vector(rn, n_max)  # (n_rad, N)
    weighted = fourier * (rw * rn)[:, None]
    for j, z in enumerate(radial_layout(n_max).ordering):
        if z.m > m_max:
            continue
        scale = (2 if z.m else 1) * (z.n + 1) / np.pi
        proj = weighted.T @ R[:, j]  # (M,)
        if z.m == 0:
            U[0, j] = scale * proj[0]
        else:
            U[2 * z.m - 1, j] = scale * proj[2 * z.m - 1]
            U[2 * z.m, j] = scale * proj[2 * z.m]
    return U


def expand_fourier_1d(g: Callable, m_max: int, n_angular: int | None = None) -> np.ndarray:
    """Coefficients of ``g(phi)`` against ``Phi``: mean, then ``1/pi``-weighted integrals."""
    n_angular = n_angular or 4 * m_max + 8
    pn = angular_nodes(n_angular)
    vals = _sample(lambda r, p: g(p), np.zeros(1), pn)
    c = trig_vector(pn, m_max).T @ vals * (2.0 / n_angular)
    c[0] *= 0.5
    return c


def normalized_coefficients(U) -> np.ndarray:
    """Coefficients against the orthonormal disk basis (``sqrt(pi/(eps_m (n+1)))`` scaling)."""
    U = np.asarray(U, dtype=float)
    n_max = n_max_from_count(U.shape[1])
    out = np.zeros_like(U)
    for j, z in enumerate(radial_layout(n_max).ordering):
        eps = 2 if z.m else 1
        out[:, j] = U[:, j] * np.sqrt(np.pi / (eps * (z.n + 1)))
    return out
