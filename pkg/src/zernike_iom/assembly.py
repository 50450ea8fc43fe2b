"""Kronecker assembly of the linear systems for the first- and second-order PDEs.

With ``x = vec(U)`` (column stacking) every term ``P U Q`` of a matrix
equation becomes ``(Q^T kron P) x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.io
import scipy.sparse as sp

from .basis import radial_count
from .operational import (
    Projection,
    constant_embedding,
    phi_double_integration_matrix,
    phi_integration_matrix,
    phi_multiplication_matrix,
    radial_double_integration_matrix,
    radial_integration_matrix,
    radial_multiplication_matrix,
)

DROP_TOL = 1e-14


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


def vec(U) -> np.ndarray:
    return np.asarray(U, dtype=float).reshape(-1, order="F")


def unvec(x, M: int, N: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size != M * N:
        raise ValueError(f"vector of length {x.size} cannot be reshaped to {M}x{N}")
    return x.reshape((M, N), order="F")


@dataclass(frozen=True)
class FopdeSpec:
    """``alpha x u_x + beta y u_y + gamma u = f`` with ``u(r0, phi) = h``, ``u(r, phi0) = g``."""

    alpha: float
    beta: float
    gamma: float
    F: np.ndarray
    h_vec: np.ndarray
    g_vec: np.ndarray
    m_max: int
    n_max: int
    r0: float = 0.0
    phi0: float = 0.0
    projection: Projection = Projection.LAGRANGE
    interp_degree: int | None = None

    def __post_init__(self):
        _validate(self, {"F": (self.M, self.N), "h_vec": (self.M,), "g_vec": (self.N,)})

    @property
    def M(self) -> int:
        return 2 * self.m_max + 1

    @property
    def N(self) -> int:
        return radial_count(self.n_max)


@dataclass(frozen=True)
class SopdeSpec:
    """Rotation-invariant second-order PDE with value/derivative data on ``r = r0`` and ``phi = phi0``.

    ``g_vec``, ``h_vec`` (length ``M``) are ``u(r0, phi)`` and ``u_r(r0, phi)``;
    ``p_vec``, ``q_vec`` (length ``N``) are ``u(r, phi0)`` and ``u_phi(r, phi0)``.
    """

    alpha: float
    beta: float
    gamma: float
    F: np.ndarray
    g_vec: np.ndarray
    h_vec: np.ndarray
    p_vec: np.ndarray
    q_vec: np.ndarray
    m_max: int
    n_max: int
    r0: float = 1.0
    phi0: float = 0.0
    projection: Projection = Projection.LAGRANGE
    interp_degree: int | None = None

    def __post_init__(self):
        _validate(self, {"F": (self.M, self.N), "g_vec": (self.M,), "h_vec": (self.M,),
                         "p_vec": (self.N,), "q_vec": (self.N,)})

    @property
    def M(self) -> int:
        return 2 * self.m_max + 1

    @property
    def N(self) -> int:
        return radial_count(self.n_max)


def _validate(spec, shapes):
    if spec.m_max < 3:
        raise ValueError("m_max must be at least 3")
    if spec.n_max < 1:
        raise ValueError("n_max must be at least 1")
    if not 0.0 <= spec.r0 <= 1.0:
        raise ValueError(f"r0={spec.r0} outside [0, 1]")
    if not 0.0 <= spec.phi0 < 2 * np.pi:
        raise ValueError(f"phi0={spec.phi0} outside [0, 2pi)")
    object.__setattr__(spec, "projection", Projection(spec.projection))
    if spec.interp_degree is not None and not 1 <= spec.interp_degree <= spec.n_max:
        raise ValueError(f"interp_degree={spec.interp_degree} outside [1, n_max]")
    for name, shape in shapes.items():
        arr = np.asarray(getattr(spec, name), dtype=float)
        if arr.shape != shape:
            raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
        object.__setattr__(spec, name, arr)


@dataclass(frozen=True)
class AssembledSystem:
    A: sp.csr_matrix
    b: np.ndarray
    M: int
    N: int
    meta: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def write_matrix_market(self, path):
        scipy.io.mmwrite(str(path), sp.coo_matrix(self.A), comment=_meta_comment(self.meta))

    def write_rhs(self, path, digits: int = 17):
        np.savetxt(path, self.b, fmt=f"%.{digits}g")


def _meta_comment(meta):
    return " ".join(f"{k}={v}" for k, v in sorted(meta.items()))


def _sparse_sum(terms) -> sp.csr_matrix:
    """Sum Kronecker terms in the given order and drop entries at or below ``DROP_TOL``."""
    total = None
    for coef, left, right in terms:
        if coef == 0.0:
            continue
        t = coef * sp.kron(sp.csr_matrix(left), sp.csr_matrix(right), format="csr")
        total = t if total is None else total + t
    total = total.tocsr()
    total.data[np.abs(total.data) <= DROP_TOL] = 0.0
    total.eliminate_zeros()
    total.sort_indices()
    return total


@lru_cache(maxsize=32)
def fopde_operators(m_max: int, n_max: int, r0: float, phi0: float, projection: Projection,
                    interp_degree: int | None = None):
    """Operational matrices used by the first-order system (cached per orders and origins)."""
    return {
        "E_phi": np.asarray(phi_integration_matrix(m_max, phi0, "one")),
        "E_cos_sq": np.asarray(phi_integration_matrix(m_max, phi0, "cos_sq")),
        "E_sin_sq": np.asarray(phi_integration_matrix(m_max, phi0, "sin_sq")),
        "E_cos_2phi": np.asarray(phi_integration_matrix(m_max, phi0, "cos_2phi")),
        "M_sin_2phi": np.asarray(phi_multiplication_matrix(m_max)),
        "E_r": np.asarray(radial_integration_matrix(n_max, r0, 0, projection, interp_degree)),
        "M_r": np.asarray(radial_multiplication_matrix(n_max, 1, projection, interp_degree)),
    }


def assemble_fopde(spec: FopdeSpec) -> AssembledSystem:
    ops = fopde_operators(spec.m_max, spec.n_max, spec.r0, spec.phi0, spec.projection,
                          spec.interp_degree)
    a, be, ga = spec.alpha, spec.beta, spec.gamma
    Ec, Es = ops["E_cos_sq"], ops["E_sin_sq"]
    Er, Mr = ops["E_r"], ops["M_r"]
    terms = [
        (a, Mr.T, Ec.T),
        (be, Mr.T, Es.T),
        (-a, Er.T, Ec.T),
        (-be, Er.T, Es.T),
        (-(a - be) / 2.0, Er.T, ops["M_sin_2phi"].T),
        (a - be, Er.T, ops["E_cos_2phi"].T),
        (ga, Er.T, ops["E_phi"].T),
    ]
    A = _sparse_sum(terms)
    h = spec.h_vec[:, None]
    M_r0 = constant_embedding(spec.r0, spec.N)[None, :]
    M_s2 = constant_embedding(np.sin(2 * spec.phi0), spec.M)[:, None]
    Y = (
        ops["E_phi"].T @ spec.F @ Er
        + a * Ec.T @ h @ M_r0
        + be * Es.T @ h @ M_r0
        - (a - be) / 2.0 * M_s2 @ spec.g_vec[None, :] @ Er
    )
    return AssembledSystem(A, vec(Y), spec.M, spec.N, _meta(spec, "fopde"))


@lru_cache(maxsize=32)
def sopde_operators(m_max: int, n_max: int, r0: float, phi0: float, projection: Projection,
                    interp_degree: int | None = None):
    """Operational matrices used by the second-order system (cached per orders and origins)."""
    return {
        "E_phi": np.asarray(phi_integration_matrix(m_max, phi0, "one")),
        "E_Dphi": np.asarray(phi_double_integration_matrix(m_max, phi0)),
        "E_r": np.asarray(radial_integration_matrix(n_max, r0, 0, projection, interp_degree)),
        "E_r_r": np.asarray(radial_integration_matrix(n_max, r0, 1, projection, interp_degree)),
        "E_r_r3": np.asarray(radial_integration_matrix(n_max, r0, 3, projection, interp_degree)),
        "E_Dr": np.asarray(radial_double_integration_matrix(n_max, r0, 0, projection, interp_degree)),
        "E_Dr_r2": np.asarray(radial_double_integration_matrix(n_max, r0, 2, projection, interp_degree)),
        "M_r2": np.asarray(radial_multiplication_matrix(n_max, 2, projection, interp_degree)),
        "M_r4": np.asarray(radial_multiplication_matrix(n_max, 4, projection, interp_degree)),
    }


def assemble_sopde(spec: SopdeSpec) -> AssembledSystem:
    ops = sopde_operators(spec.m_max, spec.n_max, spec.r0, spec.phi0, spec.projection,
                          spec.interp_degree)
    a, be, ga = spec.alpha, spec.beta, spec.gamma
    D = ops["E_Dphi"]
    Er, EDr = ops["E_r"], ops["E_Dr"]
    terms = [
        (1.0, ops["M_r2"].T, D.T),
        (-3.0, ops["E_r_r"].T, D.T),
        (1.0, EDr.T, D.T),
        (1.0, EDr.T, np.eye(spec.M)),
        (a, ops["M_r4"].T, D.T),
        (-(7 * a - be), ops["E_r_r3"].T, D.T),
        (3 * a - be, ops["E_Dr_r2"].T, D.T),
        (ga, ops["E_Dr_r2"].T, D.T),
    ]
    A = _sparse_sum(terms)
    N, M = spec.N, spec.M
    r0 = spec.r0
    g = spec.g_vec[:, None]
    h = spec.h_vec[:, None]
    e1 = constant_embedding(1.0, M)[:, None]
    row = lambda v: constant_embedding(v, N)[None, :]  # noqa: E731
    Y = (
        D.T @ spec.F @ ops["E_Dr_r2"]
        + D.T @ g @ row(r0**2)
        + D.T @ h @ row(r0**2) @ Er
        - D.T @ g @ row(r0) @ Er
        + e1 @ spec.p_vec[None, :] @ EDr
        + ops["E_phi"].T @ e1 @ spec.q_vec[None, :] @ EDr
        + a * D.T @ g @ row(r0**4)
        - (3 * a - be) * D.T @ g @ row(r0**3) @ Er
        + a * D.T @ h @ row(r0**4) @ Er
    )
    return AssembledSystem(A, vec(Y), M, N, _meta(spec, "sopde"))


def assemble_laplace(g_vec, h_vec, p_vec, q_vec, r0, phi0, m_max, n_max,
                     projection=Projection.LAGRANGE, interp_degree=None) -> AssembledSystem:
    M, N = 2 * m_max + 1, radial_count(n_max)
    spec = SopdeSpec(0.0, 0.0, 0.0, np.zeros((M, N)), g_vec, h_vec, p_vec, q_vec,
                     m_max, n_max, r0, phi0, projection, interp_degree)
    return assemble_sopde(spec)


def _meta(spec, kind):
    return {"kind": kind, "m_max": spec.m_max, "n_max": spec.n_max, "r0": spec.r0,
            "phi0": spec.phi0, "projection": spec.projection.value,
            "interp_degree": spec.interp_degree}
