"""Minimum-norm least squares and basis pursuit for ``A x = b``."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, fields

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import linprog

from .assembly import AssembledSystem, unvec


class SolverError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InfeasibleError(SolverError):
    """``b`` is not (numerically) in the range of ``A``."""


@dataclass(frozen=True)
class SolveOptions:
    method: str = "l1"
    svd_cutoff_rel: float = 1e-12
    l1_duality_gap_tol: float = 1e-8
    l1_max_iterations: int = 100
    l1_residual_tol: float = 1e-8
    exact_equality: bool = False

    def __post_init__(self):
        if self.method not in ("l1", "l2"):
            raise ValueError(f"unknown method {self.method!r}")
        for name in ("svd_cutoff_rel", "l1_duality_gap_tol", "l1_residual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.l1_max_iterations < 1:
            raise ValueError("l1_max_iterations must be >= 1")


@dataclass
class SolveReport:
    x: np.ndarray
    U: np.ndarray | None
    residual_norm: float
    objective: float
    method: str
    rank_estimate: int | None = None
    iterations: int | None = None
    duality_gap: float | None = None
    converged: bool = True
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["x"] = self.x.tolist()
        d["U"] = None if self.U is None else self.U.tolist()
        d["extra"] = {k: v for k, v in self.extra.items() if not isinstance(v, np.ndarray)}
        if not include_timing:
            d.pop("wall_time")
        # keep the document strict JSON: non-finite scalars become null
        return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)


def _dense(A) -> np.ndarray:
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def _unpack(system):
    if isinstance(system, AssembledSystem):
        return _dense(system.A), np.asarray(system.b, dtype=float), (system.M, system.N)
    A, b = system
    return _dense(A), np.asarray(b, dtype=float), None


def _svd(A):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError("SVD did not converge", {"shape": A.shape}) from exc


def _rank(s, cutoff_rel) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > cutoff_rel * s[0]))


def pseudo_inverse(A, cutoff_rel: float = 1e-12) -> np.ndarray:
    """Moore-Penrose inverse by SVD, discarding singular values below ``cutoff_rel * s_max``."""
    A = _dense(A)
    u, s, vt = _svd(A)
    r = _rank(s, cutoff_rel)
    return (vt[:r].T / s[:r]) @ u[:, :r].T


def _residual(A, x, b) -> float:
    return float(np.linalg.norm(A @ x - b))


def solve_l2(system, opts: SolveOptions | None = None) -> SolveReport:
    """Minimum-norm least-squares solution ``x = A^+ b``."""
    opts = opts or SolveOptions(method="l2")
    t0 = time.perf_counter()
    A, b, shape = _unpack(system)
    u, s, vt = _svd(A)
    r = _rank(s, opts.svd_cutoff_rel)
    x = vt[:r].T @ ((u[:, :r].T @ b) / s[:r])
    return SolveReport(
        x=x,
        U=unvec(x, *shape) if shape else None,
        residual_norm=_residual(A, x, b),
        objective=float(np.linalg.norm(x)),
        method="l2",
        rank_estimate=r,
        wall_time=time.perf_counter() - t0,
    )


def solve_l1(system, opts: SolveOptions | None = None) -> SolveReport:
    """Basis pursuit: minimise ``||x||_1`` subject to ``A x = b``.

    The problem is solved as the linear program (``x = u - v``)::

        min 1^T (u + v)   s.t.   C (u - v) = d,   u, v >= 0

    with the HiGHS primal-dual interior-point method followed by crossover, so
    degenerate ties resolve to a vertex of the optimal face.

    By default the right-hand side is first replaced by its projection onto
    the numerical range of ``A`` and the constraints by the equivalent
    orthonormal system ``C = V_r^T``, ``d = V_r^T x_l2``; the projection distance
    is reported in ``extra["range_distance"]``.  After the solve the iterate is
    moved onto the affine set ``C x = d`` (a correction of the size of the
    solver's feasibility tolerance).  With ``exact_equality`` the constraints
    are used as given and an inconsistent ``b`` raises :class:`InfeasibleError`.

    Dual variables are reported for the equivalent program
    ``min 1^T t`` s.t. ``C x = d``, ``x - t <= 0``, ``-x - t <= 0``:
    ``lam1``, ``lam2`` (inequalities), ``nu`` (equalities); see
    :func:`kkt_residuals`.
    """
    opts = opts or SolveOptions(method="l1")
    t0 = time.perf_counter()
    A, b, shape = _unpack(system)
    u, s, vt = _svd(A)
    r = _rank(s, opts.svd_cutoff_rel)
    coef = (u[:, :r].T @ b) / s[:r]
    x_l2 = vt[:r].T @ coef
    dist = _residual(A, x_l2, b)
    scale = max(1.0, float(np.linalg.norm(b)))
    if opts.exact_equality:
        if dist > opts.l1_residual_tol * scale:
            raise InfeasibleError(
                "b is outside the range of A",
                {"range_distance": dist, "certificate": (b - A @ x_l2) / max(dist, 1e-300)},
            )
        C, d = A, b
    else:
        C, d = vt[:r], coef
    n = A.shape[1]
    if r == 0:
        res = dict(x=np.zeros(n), lam1=np.full(n, 0.5), lam2=np.full(n, 0.5), nu=np.zeros(C.shape[0]),
                   gap=0.0, iterations=0, converged=True, status="trivial")
    else:
        res = _basis_pursuit_lp(C, d, opts, fallback=x_l2)
    x = res["x"]
    if not opts.exact_equality:
        x = x - C.T @ (C @ x - d)  # C has orthonormal rows: nearest point of the affine set
    return SolveReport(
        x=x,
        U=unvec(x, *shape) if shape else None,
        residual_norm=_residual(A, x, b),
        objective=float(np.abs(x).sum()),
        method="l1",
        rank_estimate=r,
        iterations=res["iterations"],
        duality_gap=res["gap"],
        converged=res["converged"],
        wall_time=time.perf_counter() - t0,
        extra={
            "range_distance": dist,
            "lam1": res["lam1"],
            "lam2": res["lam2"],
            "nu": res["nu"],
            "t": np.abs(x),
            "constraint_rows": int(C.shape[0]),
            "status": res["status"],
            "C": C,
            "d": d,
        },
    )


def _basis_pursuit_lp(C, d, opts: SolveOptions, fallback=None) -> dict:
    """Solve the split LP; on the iteration cap return the best available point, flagged.

    HiGHS reports no iterate when its interior-point method stops on the
    iteration limit; the feasible minimum-norm point ``fallback`` is returned
    instead, with ``converged=False`` and an infinite duality gap.
    """
    k, n = C.shape
    res = linprog(
        np.ones(2 * n),
        A_eq=np.hstack([C, -C]),
        b_eq=d,
        bounds=(0, None),
        method="highs-ipm",
        options={
            "maxiter": opts.l1_max_iterations,
            "primal_feasibility_tolerance": min(opts.l1_residual_tol, 1e-7),
            "dual_feasibility_tolerance": min(opts.l1_residual_tol, 1e-7),
            "ipm_optimality_tolerance": min(opts.l1_duality_gap_tol, 1e-8),
        },
    )
    if res.x is None and res.status == 1 and fallback is not None:
        nan = np.full(n, np.nan)
        return dict(x=np.asarray(fallback, dtype=float), lam1=nan, lam2=nan, nu=np.full(k, np.nan),
                    gap=float("inf"), iterations=int(res.nit), converged=False,
                    status=f"iteration limit; returning the minimum-norm feasible point ({res.message})")
    if res.x is None:
        raise SolverError(f"l1 linear program failed: {res.message}", {"status": int(res.status)})
    x = res.x[:n] - res.x[n:]
    y = res.eqlin.marginals
    s_u, s_v = res.lower.marginals[:n], res.lower.marginals[n:]
    gap = abs(float(res.fun) - float(d @ y))
    return dict(
        x=x,
        lam1=s_v / 2.0,
        lam2=s_u / 2.0,
        nu=-y,
        gap=gap,
        iterations=int(res.nit),
        converged=bool(res.status == 0 and gap <= opts.l1_duality_gap_tol),
        status=str(res.message),
    )


def kkt_residuals(report: SolveReport, C=None, d=None) -> dict:
    """Max violations of the LP optimality conditions.

    ``C`` and ``d`` default to the constraint system the solver actually used
    (stored in ``report.extra``).
    """
    x, t = report.x, report.extra["t"]
    lam1, lam2, nu = report.extra["lam1"], report.extra["lam2"], report.extra["nu"]
    C = _dense(report.extra["C"] if C is None else C)
    d = report.extra["d"] if d is None else np.asarray(d, dtype=float)
    return {
        "stationarity_x": float(np.max(np.abs(lam1 - lam2 + C.T @ nu))),
        "stationarity_t": float(np.max(np.abs(1.0 - lam1 - lam2))),
        "complementarity": float(max(np.max(np.abs(lam1 * (x - t))), np.max(np.abs(lam2 * (-x - t))))),
        "primal": float(np.max(np.abs(C @ x - d))),
        "dual_sign": float(max(0.0, -np.min(lam1), -np.min(lam2))),
        "bound": float(max(0.0, np.max(np.abs(x) - t))),
    }


def solve(system, opts: SolveOptions | None = None) -> SolveReport:
    opts = opts or SolveOptions()
    return solve_l1(system, opts) if opts.method == "l1" else solve_l2(system, opts)
