"""Error measurement, sparsity reports and empirical coefficient-decay checks."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .assembly import AssembledSystem, assemble_fopde, assemble_sopde
from .basis import QuadratureSpec, expand_function, n_max_from_count, radial_layout, reconstruct
from .operational import Projection
from .solvers import SolveOptions, SolverError, solve

MACHINE_PRECISION_FLOOR = 1e-15


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid: ``n_r`` equispaced radii on [0, 1] (endpoints included) by
    ``n_phi`` equispaced angles on [0, 2pi) (2pi excluded).

    ``exclude_boundary`` drops the ``r = 1`` ring, which is where discontinuous
    boundary data live.
    """

    n_r: int = 50
    n_phi: int = 50
    exclude_boundary: bool = False

    def __post_init__(self):
        if self.n_r < 2 or self.n_phi < 2:
            raise ValueError("grid needs at least two nodes per direction")

    def nodes(self):
        r = np.linspace(0.0, 1.0, self.n_r)
        if self.exclude_boundary:
            r = r[:-1]
        phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        return np.meshgrid(r, phi, indexing="ij")


def _exact_on_grid(exact: Callable, R, P) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(exact(R, P), dtype=float), R.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise ValueError(f"exact solution is not finite at grid node r={float(R[i, j])!r}, phi={float(P[i, j])!r}")
    return vals


def mse(exact: Callable, U, grid: GridSpec | None = None) -> float:
    """Mean square difference between ``exact`` and ``Phi^T U R`` over the grid nodes."""
    grid = grid or GridSpec()
    R, P = grid.nodes()
    diff = reconstruct(U, R, P) - _exact_on_grid(exact, R, P)
    return float(np.mean(diff.ravel(order="C") ** 2))


def grid_table(exact: Callable, U, grid: GridSpec | None = None) -> np.ndarray:
    """Rows ``(r, phi, u_computed, u_exact, abs_err)`` in row-major grid order."""
    grid = grid or GridSpec()
    R, P = grid.nodes()
    uc = reconstruct(U, R, P)
    ue = _exact_on_grid(exact, R, P)
    return np.column_stack([R.ravel(), P.ravel(), uc.ravel(), ue.ravel(), np.abs(uc - ue).ravel()])


def sparsity_report(system, threshold: float = 0.0) -> dict:
    """Order, count of entries with ``|a| > threshold`` and density of the system matrix."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    A = system.A if isinstance(system, AssembledSystem) else system
    if hasattr(A, "tocoo"):
        data = A.tocoo().data
    else:
        data = np.asarray(A).ravel()
    order = A.shape[0]
    nnz = int(np.count_nonzero(np.abs(data) > threshold))
    return {"order": order, "nonzeros": nnz, "density": nnz / (A.shape[0] * A.shape[1])}


# ---------------------------------------------------------------------------
# coefficient decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    orders: tuple
    magnitudes: tuple
    slope: float | None
    machine_precision: bool = False


def order_magnitudes(U) -> np.ndarray:
    """``max_n |A_nm|, |B_nm|`` for every azimuthal order ``m`` present in ``U``."""
    U = np.asarray(U, dtype=float)
    m_max = (U.shape[0] - 1) // 2
    layout = radial_layout(n_max_from_count(U.shape[1]))
    out = np.zeros(m_max + 1)
    for j, z in enumerate(layout.ordering):
        if z.m > m_max:
            continue
        rows = [0] if z.m == 0 else [2 * z.m - 1, 2 * z.m]
        out[z.m] = max(out[z.m], float(np.max(np.abs(U[rows, j]))))
    return out


def fit_slope(orders, magnitudes) -> float:
    """Least-squares slope of ``log magnitude`` against ``log m`` over the top half of the orders."""
    orders = np.asarray(orders, dtype=float)
    mags = np.asarray(magnitudes, dtype=float)
    tail = slice(len(orders) // 2, None)
    x, y = np.log(orders[tail]), np.log(mags[tail])
    return float(np.polyfit(x, y, 1)[0])


def decay_fit(f: Callable, m_ladder: Sequence[int], n_rule: Callable[[int], int] = lambda m: m + 4,
              quadrature: Callable[[int, int], QuadratureSpec] | None = None) -> DecayFit:
    """Empirical decay of the Zernike coefficients of ``f`` with azimuthal order.

    For every ``m`` in the ladder the expansion is computed at ``(m, n_rule(m))``
    and the largest coefficient magnitude of order ``m`` is recorded.  When all
    magnitudes are below ``1e-15`` the decay is flagged as machine-precision and
    no slope is fitted.
    """
    orders = tuple(int(m) for m in m_ladder)
    if len(orders) < 2 or any(b <= a for a, b in zip(orders, orders[1:])) or orders[0] < 1:
        raise ValueError("m ladder must be strictly increasing positive integers")
    mags = []
    for m in orders:
        n = max(n_rule(m), m)
        q = quadrature(m, n) if quadrature else QuadratureSpec.default(m, n)
        mags.append(order_magnitudes(expand_function(f, m, n, q))[m])
    mags = tuple(mags)
    if max(mags) < MACHINE_PRECISION_FLOOR:
        return DecayFit(orders, mags, None, machine_precision=True)
    if min(mags) <= 0.0:
        raise ValueError("zero coefficient magnitude in the ladder; choose orders where f has content")
    return DecayFit(orders, mags, fit_slope(orders, mags))


def within_factor_of_monotone(magnitudes, factor: float = 2.0) -> bool:
    """True when each magnitude is at most ``factor`` times every earlier one."""
    running_min = np.inf
    for v in magnitudes:
        if v > factor * running_min:
            return False
        running_min = min(running_min, v)
    return True


# ---------------------------------------------------------------------------
# error tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorCell:
    order_M: int
    order_N: int
    method: str
    mse: float | None
    wall_time_ms: float
    error: str | None = None


def _example(example: str):
    from . import presets

    if example == "fopde":
        return presets.example21_spec, assemble_fopde, presets.example21_exact, GridSpec()
    if example == "sopde":
        return presets.example31_spec, assemble_sopde, presets.example31_exact, GridSpec(exclude_boundary=True)
    raise KeyError(example)


def _cell(example, M, N, methods, projection, interp_degree, opts):
    from .presets import ladder_orders

    make_spec, assemble, exact, grid = _example(example)
    (m_max, n_max), = ladder_orders([(M, N)])
    system = assemble(make_spec(m_max, n_max, projection, interp_degree))
    cells = []
    for method in methods:
        t0 = time.perf_counter()
        try:
            report = solve(system, SolveOptions(method=method, **opts))
            err, value = None, mse(exact, report.U, grid)
        except (SolverError, np.linalg.LinAlgError, ValueError) as exc:
            err, value = f"{type(exc).__name__}: {exc}", None
        cells.append(ErrorCell(M, N, method, value, 1e3 * (time.perf_counter() - t0), err))
    return cells, sparsity_report(system)


def error_table(example: str, ladder=None, methods=("l1", "l2"), projection=Projection.LAGRANGE,
                interp_degree: int | None = None, workers: int = 1, solver_options: dict | None = None):
    """Solve the named example (``"fopde"`` or ``"sopde"``) on every ladder cell.

    Returns ``(cells, sparsity)``: one :class:`ErrorCell` per (order, method) in
    ladder order, and one sparsity report per order.  Solver failures are
    recorded in the cell instead of aborting the table.
    """
    from .presets import LADDER

    _example(example)  # validate the name before doing any work
    ladder = list(ladder or LADDER)
    args = [(example, M, N, tuple(methods), projection, interp_degree, solver_options or {})
            for M, N in ladder]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda a: _cell(*a), args))
    else:
        results = [_cell(*a) for a in args]
    cells = [c for row, _ in results for c in row]
    sparsity = [s for _, s in results]
    return cells, sparsity


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(v, digits):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), f".{digits}g")


def to_csv(header, rows, digits: int = 17) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v, digits) for v in row])
    return buf.getvalue()


def grid_csv(exact, U, grid: GridSpec | None = None, digits: int = 17) -> str:
    return to_csv(["r", "phi", "u_computed", "u_exact", "abs_err"], grid_table(exact, U, grid), digits)


def error_table_csv(cells, digits: int = 17, include_timing: bool = True) -> str:
    header = ["order_M", "order_N", "method", "mse", "wall_time_ms", "error"]
    rows = [[c.order_M, c.order_N, c.method, c.mse,
             c.wall_time_ms if include_timing else None, c.error or ""] for c in cells]
    return to_csv(header, rows, digits)


def sparsity_csv(reports, digits: int = 17) -> str:
    rows = [[s["order"], s["nonzeros"], s["density"]] for s in reports]
    return to_csv(["order", "nonzeros", "density"], rows, digits)
