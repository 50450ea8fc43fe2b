"""Integration and multiplication operational matrices.

Every matrix ``E`` here acts on a basis vector from the left: for the radial
basis ``int_{r0}^r R(rho) drho ~= E R(r)`` and for the trigonometric basis
``int_{phi0}^phi w(phi) Phi dphi ~= E Phi(phi)``.

Radial representations are not unique because the radial set is linearly
dependent as a family of univariate functions.  Monomials produced by a
construction are mapped to the column of ``R_p^p`` (since ``R_p^p(r) = r**p``);
monomials of degree above ``n_max`` are either dropped (``Projection.TRUNCATE``)
or replaced by their Lagrange interpolant at equispaced nodes
(``Projection.LAGRANGE``).
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .basis import (
    DomainError,
    count_of_degree,
    horner,
    radial_count,
    radial_layout,
    radial_monomials,
    radial_vector,
)


class Projection(str, enum.Enum):
    LAGRANGE = "project"
    TRUNCATE = "truncate"


PHI_WEIGHTS = ("one", "cos_sq", "sin_sq", "cos_2phi")


@dataclass(frozen=True, eq=False)
class OperationalMatrix:
    """A dense operational matrix tagged with its construction parameters."""

    data: np.ndarray
    kind: str
    origin: float = 0.0
    order: int = 0
    projection: Projection | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data.setflags(write=False)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self):
        return self.data.T

    def header(self) -> str:
        proj = self.projection.value if self.projection else "none"
        extra = "".join(f" {k}={v}" for k, v in sorted(self.meta.items()))
        return f"kind={self.kind} origin={self.origin!r} order={self.order} projection={proj}{extra}"

    def to_csv(self, digits: int = 17) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.header()}\n")
        w = csv.writer(buf, lineterminator="\n")
        for row in self.data:
            w.writerow([format(float(v), f".{digits}g") for v in row])
        return buf.getvalue()


def _freeze(a, kind, origin, order, projection=None, **meta):
    return OperationalMatrix(np.array(a, dtype=float), kind, float(origin), order, projection, meta)


def constant_embedding(value: float, length: int) -> np.ndarray:
    """Vector with ``value`` in position 0 and zeros elsewhere (``M_{r0}``, ``e_1``, ...)."""
    v = np.zeros(length)
    v[0] = value
    return v


# ---------------------------------------------------------------------------
# trigonometric side
# ---------------------------------------------------------------------------

def _tpos(kind: str, k: int) -> int:
    return 0 if k == 0 else (2 * k - 1 if kind == "c" else 2 * k)


def _add_term(out: np.ndarray, kind: str, k: int, coef: float):
    """Accumulate ``coef * cos(k phi)`` or ``coef * sin(k phi)`` for any integer ``k``."""
    if k < 0:
        k = -k
        if kind == "s":
            coef = -coef
    if k == 0:
        if kind == "c":
            out[0] += coef
        return
    pos = _tpos(kind, k)
    if pos < out.size:
        out[pos] += coef


def _terms(vec: np.ndarray):
    for pos in np.flatnonzero(vec):
        if pos == 0:
            yield "c", 0, vec[pos]
        else:
            yield ("c" if pos % 2 else "s"), (pos + 1) // 2, vec[pos]


def trig_product(p: np.ndarray, q: np.ndarray, k_out: int) -> np.ndarray:
    """Product of two trig polynomials in ``Phi`` layout; frequencies above ``k_out`` are dropped."""
    out = np.zeros(2 * k_out + 1)
    for ka, a, ca in _terms(p):
        for kb, b, cb in _terms(q):
            c = 0.5 * ca * cb
            if ka == "c" and kb == "c":
                _add_term(out, "c", a - b, c)
                _add_term(out, "c", a + b, c)
            elif ka == "s" and kb == "s":
                _add_term(out, "c", a - b, c)
                _add_term(out, "c", a + b, -c)
            elif ka == "s":  # sin a cos b
                _add_term(out, "s", a + b, c)
                _add_term(out, "s", a - b, c)
            else:  # cos a sin b
                _add_term(out, "s", a + b, c)
                _add_term(out, "s", b - a, c)
    return out


def _weight_series(weight: str) -> np.ndarray:
    w = np.zeros(5)
    if weight == "one":
        w[0] = 1.0
    elif weight == "cos_sq":
        w[0], w[3] = 0.5, 0.5
    elif weight == "sin_sq":
        w[0], w[3] = 0.5, -0.5
    elif weight == "cos_2phi":
        w[3] = 1.0
    elif weight == "sin_2phi":
        w[4] = 1.0
    else:
        raise DomainError(f"unknown weight {weight!r}")
    return w


def _check_m(m_max: int):
    if m_max < 3:
        raise DomainError("trigonometric operational matrices need m_max >= 3")


def phi_integration_matrix(m_max: int, phi0: float = 0.0, weight: str = "one") -> OperationalMatrix:
    """``int_{phi0}^{phi} w(s) Phi(s) ds ~= E Phi(phi)``.

    The antiderivative is formed in the basis extended to frequency ``m_max + 2``;
    the constant of integration keeps every contribution while oscillatory
    terms above ``m_max`` are dropped.  A secular term ``s * phi`` is replaced
    by its Fourier series ``s * (pi - sum_k (2/k) sin k phi)`` cut at ``m_max``.
    """
    _check_m(m_max)
    if weight not in PHI_WEIGHTS:
        raise DomainError(f"unknown weight {weight!r}")
    M = 2 * m_max + 1
    K = m_max + 2
    w = _weight_series(weight)
    E = np.zeros((M, M))
    for i in range(M):
        b = np.zeros(M)
        b[i] = 1.0
        integrand = trig_product(w, b, K)
        secular = integrand[0]
        anti = np.zeros(2 * K + 1)
        for k in range(1, K + 1):
            anti[2 * k] += integrand[2 * k - 1] / k  # cos -> sin / k
            anti[2 * k - 1] -= integrand[2 * k] / k  # sin -> -cos / k
        at_origin = secular * phi0 + float(
            np.dot(anti, _trig_row(phi0, K))
        )
        row = anti[:M].copy()
        row[0] = secular * np.pi - at_origin
        for k in range(1, m_max + 1):
            row[2 * k] -= secular * 2.0 / k
        E[i] = row
    return _freeze(E, f"phi_integration[{weight}]", phi0, m_max)


def _trig_row(phi: float, k_max: int) -> np.ndarray:
    v = np.zeros(2 * k_max + 1)
    v[0] = 1.0
    for k in range(1, k_max + 1):
        v[2 * k - 1] = np.cos(k * phi)
        v[2 * k] = np.sin(k * phi)
    return v


def phi_double_integration_limit(phi0: float) -> float:
    """Constant Fourier coefficient of ``(phi - phi0)**2 / 2`` on ``[0, 2pi]``."""
    return 2.0 * np.pi**2 / 3.0 - np.pi * phi0 + 0.5 * phi0**2


def phi_double_integration_matrix(m_max: int, phi0: float = 0.0) -> OperationalMatrix:
    """``E_phi @ E_phi`` with the (const, const) entry set to its untruncated limit."""
    E = np.asarray(phi_integration_matrix(m_max, phi0))
    D = E @ E
    D[0, 0] = phi_double_integration_limit(phi0)
    return _freeze(D, "phi_double_integration", phi0, m_max)


def phi_multiplication_matrix(m_max: int, weight: str = "sin_2phi") -> OperationalMatrix:
    """``w(phi) Phi(phi) ~= M Phi(phi)`` with frequencies above ``m_max`` dropped."""
    _check_m(m_max)
    if weight != "sin_2phi":
        raise DomainError(f"unsupported multiplication weight {weight!r}")
    M = 2 * m_max + 1
    w = _weight_series(weight)
    out = np.zeros((M, M))
    for i in range(M):
        b = np.zeros(M)
        b[i] = 1.0
        out[i] = trig_product(w, b, m_max)
    return _freeze(out, f"phi_multiplication[{weight}]", 0.0, m_max)


# ---------------------------------------------------------------------------
# radial side
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _lagrange_exact(p: int, degree: int) -> tuple:
    nodes = [Fraction(j, degree) for j in range(degree + 1)]
    coeffs = [Fraction(0)] * (degree + 1)
    for j, xj in enumerate(nodes):
        # basis polynomial L_j as monomial coefficients
        basis = [Fraction(1)]
        denom = Fraction(1)
        for k, xk in enumerate(nodes):
            if k == j:
                continue
            basis = [Fraction(0)] + basis  # multiply by r
            for i in range(len(basis) - 1):
                basis[i] -= xk * basis[i + 1]
            denom *= xj - xk
        yj = xj**p
        for i, c in enumerate(basis):
            coeffs[i] += yj * c / denom
    return tuple(coeffs)


def _interp_degree(n_max: int, degree) -> int:
    if degree is None:
        return n_max
    degree = int(degree)
    if not 1 <= degree <= n_max:
        raise DomainError(f"interpolation degree {degree} outside [1, n_max={n_max}]")
    return degree


def lagrange_project(p: int, n_max: int, degree: int | None = None) -> np.ndarray:
    """Monomial coefficients (length ``n_max + 1``) of the Lagrange interpolant of ``r**p``.

    The interpolant has degree ``degree`` (default ``n_max``) and uses the
    equispaced nodes ``0, 1/degree, ..., 1``; ``degree=3`` gives the classic
    four-node rule on ``(0, 1/3, 2/3, 1)`` at every order.
    """
    if n_max < 1:
        raise DomainError("projection needs n_max >= 1")
    if p < 0:
        raise DomainError("power must be non-negative")
    d = _interp_degree(n_max, degree)
    out = np.zeros(n_max + 1)
    out[: d + 1] = [float(c) for c in _lagrange_exact(p, d)]
    return out


def reduce_monomials(coeffs, n_max: int, projection: Projection, degree: int | None = None) -> np.ndarray:
    """Bring a monomial series to degree ``<= n_max`` by projection or truncation."""
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros(n_max + 1)
    low = min(len(coeffs), n_max + 1)
    out[:low] = coeffs[:low]
    if projection is Projection.LAGRANGE:
        for p in range(n_max + 1, len(coeffs)):
            if coeffs[p] != 0.0:
                out += coeffs[p] * lagrange_project(p, n_max, degree)
    return out


def monomials_to_columns(coeffs, n_max: int) -> np.ndarray:
    """Canonical map: ``r**p`` goes to the column of ``R_p^p``."""
    layout = radial_layout(n_max)
    row = np.zeros(layout.N)
    for p, c in enumerate(coeffs):
        if c != 0.0:
            row[layout.index_of(p, p)] += c
    return row


def _check_r0(r0: float):
    # r0 = 1 is allowed: the boundary circle is the natural origin for disk problems
    if not 0.0 <= r0 <= 1.0:
        raise DomainError(f"integration origin r0={r0} outside [0, 1]")


def _degree_meta(projection, interp_degree) -> dict:
    if interp_degree is None or _check_projection(projection) is Projection.TRUNCATE:
        return {}
    return {"interp_degree": int(interp_degree)}


def _check_projection(projection) -> Projection:
    return projection if isinstance(projection, Projection) else Projection(projection)


def radial_multiplication_matrix(n_max: int, power: int, projection=Projection.LAGRANGE,
                                 interp_degree: int | None = None) -> OperationalMatrix:
    """``r**power R(r) ~= M R(r)``."""
    projection = _check_projection(projection)
    if power < 1:
        raise DomainError("power must be >= 1")
    layout = radial_layout(n_max)
    out = np.zeros((layout.N, layout.N))
    for i, z in enumerate(layout.ordering):
        poly = np.concatenate([np.zeros(power), radial_monomials(z.n, z.m)])
        out[i] = monomials_to_columns(reduce_monomials(poly, n_max, projection, interp_degree), n_max)
    return _freeze(out, f"radial_multiplication[r^{power}]", 0.0, n_max, projection,
                   **_degree_meta(projection, interp_degree))


def _integrate_monomials(coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros(len(coeffs) + 1)
    out[1:] = coeffs / np.arange(1, len(coeffs) + 1)
    return out


def _recurrence_parts(n: int, m: int):
    """``int R_n^m`` as a signed list of ``(coef, degree, order)`` radial polynomials.

    Telescoping the pair identity
    ``int (R_n^j + R_n^{j+2}) = (R_{n+1}^{j+1} - R_{n-1}^{j+1}) / (n + 1)``.
    """
    parts = []
    for k in range((n - m) // 2 + 1):
        sign = (-1) ** k / (n + 1)
        j = m + 2 * k + 1
        parts.append((sign, n + 1, j))
        if j <= n - 1:
            parts.append((-sign, n - 1, j))
    return parts


def radial_integration_matrix(
    n_max: int, r0: float = 0.0, power: int = 0, projection=Projection.LAGRANGE,
    interp_degree: int | None = None,
) -> OperationalMatrix:
    """``int_{r0}^r rho**power R(rho) drho ~= E R(r)``.

    For ``power == 0`` rows follow the radial-polynomial recurrence, so in-range
    terms stay on their own Zernike columns; only the degree ``n_max + 1``
    remainder goes through monomials.  For ``power > 0`` the integrand is
    handled entirely in monomials.  The constant of integration sits in
    column 0 and is chosen so that the represented (reduced) antiderivative
    vanishes at ``r0``, i.e. ``E R(r0) = 0``.
    """
    projection = _check_projection(projection)
    _check_r0(r0)
    if power < 0:
        raise DomainError("power must be non-negative")
    layout = radial_layout(n_max)
    N = layout.N
    at_r0 = radial_vector(r0, n_max)
    out = np.zeros((N, N))
    for i, z in enumerate(layout.ordering):
        if power == 0:
            row = np.zeros(N)
            overflow = np.zeros(n_max + 2)
            for coef, deg, order in _recurrence_parts(z.n, z.m):
                if deg <= n_max:
                    row[layout.index_of(deg, order)] += coef
                else:
                    mono = radial_monomials(deg, order)
                    overflow[: len(mono)] += coef * mono
            row += monomials_to_columns(reduce_monomials(overflow, n_max, projection, interp_degree), n_max)
        else:
            poly = np.concatenate([np.zeros(power), radial_monomials(z.n, z.m)])
            row = monomials_to_columns(
                reduce_monomials(_integrate_monomials(poly), n_max, projection, interp_degree), n_max)
        # the represented antiderivative vanishes at r0
        row[0] -= row @ at_r0
        out[i] = row
    return _freeze(out, f"radial_integration[r^{power}]", r0, n_max, projection,
                   **_degree_meta(projection, interp_degree))


def radial_double_integration_matrix(
    n_max: int, r0: float = 0.0, power: int = 0, projection=Projection.LAGRANGE,
    interp_degree: int | None = None,
) -> OperationalMatrix:
    """``int_{r0}^r int_{r0}^rho s**power R(s) ds drho ~= E_inner(power) E R(r)``."""
    inner = np.asarray(radial_integration_matrix(n_max, r0, power, projection, interp_degree))
    outer = np.asarray(radial_integration_matrix(n_max, r0, 0, projection, interp_degree))
    projection = _check_projection(projection)
    return _freeze(inner @ outer, f"radial_double_integration[r^{power}]", r0, n_max,
                   projection, **_degree_meta(projection, interp_degree))


# ---------------------------------------------------------------------------
# block construction E_r1 E = E_r2
# ---------------------------------------------------------------------------

def delta_block(size: int) -> np.ndarray:
    """Upper bidiagonal block of ones."""
    return np.eye(size) + np.eye(size, k=1)


def appendix_blocks(n_max: int, r0: float = 0.0):
    """Return ``(E_r1, E_r2)`` with ``E_r1 E = E_r2`` and the degree ``n_max + 1`` terms neglected.

    Row ``(n, j)`` of ``E_r1`` selects ``R_n^j + R_n^{j+2}``; the matching row
    of ``E_r2`` is ``(R_{n+1}^{j+1} - R_{n-1}^{j+1}) / (n + 1)`` minus its value
    at ``r0``.
    """
    if n_max < 1:
        raise DomainError("block construction needs n_max >= 1")
    _check_r0(r0)
    layout = radial_layout(n_max)
    N = layout.N
    E1 = np.zeros((N, N))
    E2 = np.zeros((N, N))
    for n in range(n_max + 1):
        sl = layout.degree_slice(n)
        E1[sl, sl] = delta_block(count_of_degree(n))
    for i, z in enumerate(layout.ordering):
        n, j = z.n, z.m
        up = radial_monomials(n + 1, j + 1)
        const = horner(up, r0)
        if n + 1 <= n_max:
            E2[i, layout.index_of(n + 1, j + 1)] += 1.0 / (n + 1)
        if j + 1 <= n - 1:
            E2[i, layout.index_of(n - 1, j + 1)] -= 1.0 / (n + 1)
            const -= horner(radial_monomials(n - 1, j + 1), r0)
        E2[i, 0] -= const / (n + 1)
    return E1, E2


def gamma_block(E2: np.ndarray, n_max: int, k: int, l: int) -> np.ndarray:
    """Block ``Gamma_{kl}`` (1-based, degree ``k-1`` rows by degree ``l-1`` columns)."""
    layout = radial_layout(n_max)
    rows = layout.degree_slice(k - 1)
    if l == 1:
        return E2[rows, 0:1]
    return E2[rows, layout.degree_slice(l - 1)]


def appendix_block_construction(n_max: int, r0: float = 0.0, projection=Projection.TRUNCATE,
                                interp_degree: int | None = None) -> OperationalMatrix:
    """``E_r1^{-1} (E_r2 + O)`` where ``O`` carries the neglected top-degree terms
    after truncation or projection of their super-degree monomials."""
    projection = _check_projection(projection)
    E1, E2 = appendix_blocks(n_max, r0)
    layout = radial_layout(n_max)
    top = layout.degree_slice(n_max)
    for i in range(top.start, top.stop):
        z = layout.ordering[i]
        over = radial_monomials(n_max + 1, z.m + 1) / (n_max + 1)
        extra = monomials_to_columns(reduce_monomials(over, n_max, projection, interp_degree), n_max)
        E2[i] += extra
        # swap the exact constant of the neglected term for that of its reduction
        E2[i, 0] += horner(over, r0) - extra @ radial_vector(r0, n_max)
    E = np.linalg.solve(E1, E2)
    return _freeze(E, "radial_integration_blocks", r0, n_max, projection,
                   **_degree_meta(projection, interp_degree))


# ---------------------------------------------------------------------------
# catalogue used by the CLI dump command
# ---------------------------------------------------------------------------

MATRIX_KINDS = {
    "E_phi": lambda o: phi_integration_matrix(o["m_max"], o["phi0"], "one"),
    "E_phi_cos2": lambda o: phi_integration_matrix(o["m_max"], o["phi0"], "cos_sq"),
    "E_phi_sin2": lambda o: phi_integration_matrix(o["m_max"], o["phi0"], "sin_sq"),
    "E_phi_cos2phi": lambda o: phi_integration_matrix(o["m_max"], o["phi0"], "cos_2phi"),
    "E_Dphi": lambda o: phi_double_integration_matrix(o["m_max"], o["phi0"]),
    "M_phi_sin2phi": lambda o: phi_multiplication_matrix(o["m_max"]),
    "E_rr0": lambda o: radial_integration_matrix(o["n_max"], o["r0"], 0, o["projection"], o["interp_degree"]),
    "E_rr0_r": lambda o: radial_integration_matrix(o["n_max"], o["r0"], 1, o["projection"], o["interp_degree"]),
    "E_rr0_r2": lambda o: radial_integration_matrix(o["n_max"], o["r0"], 2, o["projection"], o["interp_degree"]),
    "E_rr0_r3": lambda o: radial_integration_matrix(o["n_max"], o["r0"], 3, o["projection"], o["interp_degree"]),
    "E_Drr0": lambda o: radial_double_integration_matrix(o["n_max"], o["r0"], 0, o["projection"], o["interp_degree"]),
    "E_Drr0_r2": lambda o: radial_double_integration_matrix(o["n_max"], o["r0"], 2, o["projection"], o["interp_degree"]),
    "M_R_r": lambda o: radial_multiplication_matrix(o["n_max"], 1, o["projection"], o["interp_degree"]),
    "M_R_r2": lambda o: radial_multiplication_matrix(o["n_max"], 2, o["projection"], o["interp_degree"]),
    "M_R_r4": lambda o: radial_multiplication_matrix(o["n_max"], 4, o["projection"], o["interp_degree"]),
    "E_blocks": lambda o: appendix_block_construction(o["n_max"], o["r0"], o["projection"], o["interp_degree"]),
}


def build_matrix(kind: str, *, m_max: int = 3, n_max: int = 3, r0: float = 0.0,
                 phi0: float = 0.0, projection=Projection.LAGRANGE,
                 interp_degree: int | None = None) -> OperationalMatrix:
    if kind not in MATRIX_KINDS:
        raise KeyError(kind)
    opts = dict(m_max=m_max, n_max=n_max, r0=r0, phi0=phi0, projection=_check_projection(projection),
                interp_degree=interp_degree)
    return MATRIX_KINDS[kind](opts)


