"""Command-line driver: ``solve``, ``tables`` and ``matrices``.

Exit codes: 0 success, 2 bad input (schema, unknown example or matrix kind),
3 solver failure.  CSV precision defaults to 17 significant digits and can be
changed with the ``ZERNIKE_IOM_CSV_DIGITS`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import presets
from .analysis import (
    GridSpec,
    error_table,
    error_table_csv,
    grid_csv,
    mse,
    sparsity_csv,
    to_csv,
)
from .assembly import FopdeSpec, SopdeSpec, assemble_fopde, assemble_sopde
from .basis import radial_count
from .operational import MATRIX_KINDS, Projection, build_matrix
from .solvers import SolveOptions, SolverError, solve

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3
DIGITS_ENV = "ZERNIKE_IOM_CSV_DIGITS"

_number = {"type": "number"}
_vector = {"type": "array", "items": _number}
_matrix = {"type": "array", "items": _vector}

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "orders", "boundary"],
    "properties": {
        "kind": {"enum": ["fopde", "sopde", "laplace"]},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"alpha": _number, "beta": _number, "gamma": _number},
        },
        "orders": {
            "type": "object",
            "additionalProperties": False,
            "required": ["m_max", "n_max"],
            "properties": {"m_max": {"type": "integer", "minimum": 3},
                           "n_max": {"type": "integer", "minimum": 1}},
        },
        "origins": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"r0": _number, "phi0": _number},
        },
        "forcing": {"oneOf": [_matrix, {"enum": ["preset:example21", "zero"]}]},
        "boundary": {
            "oneOf": [
                {"enum": ["example21", "example31"]},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"g": _vector, "h": _vector, "p": _vector, "q": _vector},
                },
            ]
        },
        "exact": {"enum": ["example21", "example31"]},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["l1", "l2"]},
                "svd_cutoff_rel": {"type": "number", "exclusiveMinimum": 0},
                "l1_duality_gap_tol": {"type": "number", "exclusiveMinimum": 0},
                "l1_max_iterations": {"type": "integer", "minimum": 1},
                "l1_residual_tol": {"type": "number", "exclusiveMinimum": 0},
                "exact_equality": {"type": "boolean"},
            },
        },
        "projection": {"enum": ["project", "truncate"]},
        "interp_degree": {"type": ["integer", "null"], "minimum": 1},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n_r": {"type": "integer", "minimum": 2},
                           "n_phi": {"type": "integer", "minimum": 2},
                           "exclude_boundary": {"type": "boolean"}},
        },
    },
}


class InputError(Exception):
    """Problem file or flag error; reported with exit code 2."""


def csv_digits() -> int:
    raw = os.environ.get(DIGITS_ENV, "17")
    try:
        digits = int(raw)
    except ValueError as exc:
        raise InputError(f"{DIGITS_ENV}={raw!r} is not an integer") from exc
    if not 1 <= digits <= 17:
        raise InputError(f"{DIGITS_ENV} must lie in [1, 17]")
    return digits


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

def _line_of(text: str, path) -> int:
    """Best-effort line number of the JSON value at ``path`` (1-based)."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            hit = text.find(json.dumps(key), pos)
            if hit < 0:
                break
            pos = hit
    return text.count("\n", 0, pos) + 1


def load_problem(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read problem file: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    errors = sorted(jsonschema.Draft202012Validator(PROBLEM_SCHEMA).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        anchor = list(err.absolute_path)
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            # point at the first offending key rather than at the enclosing object
            allowed = err.schema.get("properties", {})
            extra = [k for k in err.instance if k not in allowed]
            anchor += extra[:1]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise InputError(f"{path}:{_line_of(text, anchor)}: {where}: {err.message}")
    return doc


def _vec(name, values, size):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (size,):
        raise InputError(f"{name} must have length {size}, got {arr.size}")
    return arr


def build_problem(doc: dict):
    """Turn a validated problem document into ``(spec, assemble, exact, grid, options)``."""
    kind = doc["kind"]
    m_max, n_max = doc["orders"]["m_max"], doc["orders"]["n_max"]
    M, N = 2 * m_max + 1, radial_count(n_max)
    projection = Projection(doc.get("projection", "project"))
    interp_degree = doc.get("interp_degree")
    params = {"alpha": 0.0, "beta": 0.0, "gamma": 0.0, **doc.get("params", {})}
    origins = doc.get("origins", {})
    boundary = doc["boundary"]

    forcing = doc.get("forcing", "zero")
    if forcing == "preset:example21":
        F = presets.example21_forcing(m_max, n_max)
    elif forcing == "zero":
        F = np.zeros((M, N))
    else:
        F = np.asarray(forcing, dtype=float)
        if F.shape != (M, N):
            raise InputError(f"forcing must be {M}x{N}, got {F.shape[0]}x{F.shape[1] if F.ndim > 1 else 0}")

    if kind == "fopde":
        if boundary == "example21":
            h, g = presets.example21_boundary(m_max, n_max)
        elif boundary == "example31":
            raise InputError("boundary preset example31 belongs to a second-order problem")
        else:
            h = _vec("boundary.h", boundary.get("h", [0.0] * M), M)
            g = _vec("boundary.g", boundary.get("g", [0.0] * N), N)
        spec = FopdeSpec(params["alpha"], params["beta"], params["gamma"], F, h, g, m_max, n_max,
                         origins.get("r0", 0.0), origins.get("phi0", 0.0), projection, interp_degree)
        assemble = assemble_fopde
    else:
        if kind == "laplace":
            params = {"alpha": 0.0, "beta": 0.0, "gamma": 0.0}
            F = np.zeros((M, N))
        if boundary == "example31":
            g, h, p, q = presets.example31_boundary(m_max, n_max)
        elif boundary == "example21":
            raise InputError("boundary preset example21 belongs to a first-order problem")
        else:
            g = _vec("boundary.g", boundary.get("g", [0.0] * M), M)
            h = _vec("boundary.h", boundary.get("h", [0.0] * M), M)
            p = _vec("boundary.p", boundary.get("p", [0.0] * N), N)
            q = _vec("boundary.q", boundary.get("q", [0.0] * N), N)
        spec = SopdeSpec(params["alpha"], params["beta"], params["gamma"], F, g, h, p, q, m_max, n_max,
                         origins.get("r0", 1.0), origins.get("phi0", 0.0), projection, interp_degree)
        assemble = assemble_sopde

    exact_name = doc.get("exact") or (boundary if isinstance(boundary, str) else None)
    exact = {"example21": presets.example21_exact, "example31": presets.example31_exact}.get(exact_name)
    grid_doc = doc.get("grid", {})
    grid = GridSpec(grid_doc.get("n_r", 50), grid_doc.get("n_phi", 50),
                    grid_doc.get("exclude_boundary", exact_name == "example31"))
    return spec, assemble, exact, grid, dict(doc.get("solver", {}))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    doc = load_problem(args.problem)
    try:
        spec, assemble, exact, grid, solver = build_problem(doc)
    except ValueError as exc:
        raise InputError(f"{args.problem}: {exc}") from exc
    if args.method:
        solver["method"] = args.method
    digits = csv_digits()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    system = assemble(spec)
    try:
        report = solve(system, SolveOptions(**solver))
    except SolverError as exc:
        payload = {"error": str(exc), "diagnostics": {k: v for k, v in exc.diagnostics.items()
                                                      if not isinstance(v, np.ndarray)}}
        (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    payload = report.to_dict(include_timing=args.timing)
    payload.pop("x")
    payload["order"] = system.order
    payload["meta"] = system.meta
    if exact is not None:
        payload["mse"] = mse(exact, report.U, grid)
        (out / "solution_grid.csv").write_text(grid_csv(exact, report.U, grid, digits))
    (out / "coefficients.csv").write_text(to_csv([f"c{j}" for j in range(report.U.shape[1])],
                                                  report.U, digits))
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if not report.converged:
        print(f"solver did not converge (duality gap {report.duality_gap:.3e})", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _parse_ladder(text):
    if text in (None, "default"):
        return list(presets.LADDER)
    try:
        pairs = [tuple(int(v) for v in item.split("x")) for item in text.split(",")]
        presets.ladder_orders(pairs)
    except ValueError as exc:
        raise InputError(f"bad ladder {text!r}: expected e.g. 7x6,9x9") from exc
    return pairs


def cmd_tables(args) -> int:
    if args.example not in ("fopde", "sopde"):
        raise InputError(f"unknown example {args.example!r} (expected fopde or sopde)")
    digits = csv_digits()
    ladder = _parse_ladder(args.ladder)
    methods = ("l1", "l2") if args.method == "both" else (args.method,)
    cells, sparsity = error_table(args.example, ladder, methods, Projection(args.projection),
                                  args.interp_degree, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"errors_{args.example}.csv").write_text(error_table_csv(cells, digits, args.timing))
    (out / f"sparsity_{args.example}.csv").write_text(sparsity_csv(sparsity, digits))
    ok = sum(c.error is None for c in cells)
    return EXIT_OK if 2 * ok >= len(cells) else EXIT_SOLVER


def cmd_matrices(args) -> int:
    if args.kind not in MATRIX_KINDS:
        raise InputError(f"unknown matrix kind {args.kind!r}; choose from {', '.join(MATRIX_KINDS)}")
    m_max = args.m_max if args.m_max is not None else (args.order if args.order is not None else 3)
    n_max = args.n_max if args.n_max is not None else (args.order if args.order is not None else 3)
    try:
        E = build_matrix(args.kind, m_max=m_max, n_max=n_max, r0=args.r0, phi0=args.phi0,
                         projection=args.projection, interp_degree=args.interp_degree)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    text = E.to_csv(csv_digits())
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zernike-iom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem described by a JSON file")
    p.add_argument("problem")
    p.add_argument("--method", choices=["l1", "l2"])
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true", help="include wall time in report.json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tables", help="error and sparsity tables along the order ladder")
    p.add_argument("--example", required=True)
    p.add_argument("--ladder", default="default", help="'default' or e.g. 7x6,9x9")
    p.add_argument("--method", choices=["l1", "l2", "both"], default="both")
    p.add_argument("--projection", choices=["project", "truncate"], default="project")
    p.add_argument("--interp-degree", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="leave wall_time_ms empty so output is byte-reproducible")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("matrices", help="dump an operational matrix as CSV")
    p.add_argument("--kind", required=True)
    p.add_argument("--order", type=int, help="sets both m_max and n_max")
    p.add_argument("--m-max", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--r0", type=float, default=0.0)
    p.add_argument("--phi0", type=float, default=0.0)
    p.add_argument("--projection", choices=["project", "truncate"], default="project")
    p.add_argument("--interp-degree", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_matrices)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
