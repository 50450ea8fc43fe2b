"""Tests for the Kronecker/vec assembly of the first- and second-order systems."""

import numpy as np
import numpy.testing as npt
import pytest
import scipy.io

from zernike_iom import presets
from zernike_iom.analysis import GridSpec, mse, sparsity_report
from zernike_iom.assembly import (
    DROP_TOL,
    FopdeSpec,
    SopdeSpec,
    assemble_fopde,
    assemble_laplace,
    assemble_sopde,
    kron,
    sopde_operators,
    unvec,
    vec,
)
from zernike_iom.basis import QuadratureSpec, expand_function, radial_count
from zernike_iom.operational import Projection
from zernike_iom.solvers import solve_l1

RNG = np.random.default_rng(20240611)


# ------------------------------------------------------------------ #
# vec / kron
# ------------------------------------------------------------------ #

def test_kron_identity():
    npt.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_matches_displayed_4x4():
    a = np.array([[2.0, 3.0], [5.0, 7.0]])
    b = np.array([[11.0, 13.0], [17.0, 19.0]])
    K = kron(b.T, a)
    # rows of the displayed matrix, entry (1, 2) = a12 b11
    expected = np.array([
        [a[0, 0] * b[0, 0], a[0, 1] * b[0, 0], a[0, 0] * b[1, 0], a[0, 1] * b[1, 0]],
        [a[1, 0] * b[0, 0], a[1, 1] * b[0, 0], a[1, 0] * b[1, 0], a[1, 1] * b[1, 0]],
        [a[0, 0] * b[0, 1], a[0, 1] * b[0, 1], a[0, 0] * b[1, 1], a[0, 1] * b[1, 1]],
        [a[1, 0] * b[0, 1], a[1, 1] * b[0, 1], a[1, 0] * b[1, 1], a[1, 1] * b[1, 1]],
    ])
    npt.assert_array_equal(K, expected)


@pytest.mark.parametrize("shape", [(3, 3, 3), (4, 2, 5), (7, 6, 6)])
def test_vec_trick(shape):
    m, k, n = shape
    A = RNG.standard_normal((m, k))
    X = RNG.standard_normal((k, n))
    B = RNG.standard_normal((n, n))
    npt.assert_allclose(vec(A @ X @ B), kron(B.T, A) @ vec(X), atol=1e-13)


def test_vec_unvec_roundtrip_and_positions():
    U = RNG.standard_normal((7, 6))
    npt.assert_array_equal(unvec(vec(U), 7, 6), U)
    E = np.zeros((7, 6))
    E[4, 2] = 1.0
    assert np.flatnonzero(vec(E)).tolist() == [2 * 7 + 4]
    with pytest.raises(ValueError):
        unvec(np.zeros(41), 7, 6)


# ------------------------------------------------------------------ #
# spec validation
# ------------------------------------------------------------------ #

def _zero_fopde(**kw):
    args = dict(alpha=1.0, beta=1.0, gamma=0.0, F=np.zeros((7, 6)), h_vec=np.zeros(7),
                g_vec=np.zeros(6), m_max=3, n_max=3)
    args.update(kw)
    return FopdeSpec(**args)


@pytest.mark.parametrize("bad", [
    dict(F=np.zeros((7, 5))),
    dict(h_vec=np.zeros(6)),
    dict(g_vec=np.zeros(7)),
    dict(m_max=2, F=np.zeros((5, 6)), h_vec=np.zeros(5)),
    dict(r0=1.5),
    dict(phi0=2 * np.pi),
    dict(interp_degree=4),
])
def test_fopde_validation(bad):
    with pytest.raises(ValueError):
        _zero_fopde(**bad)


def test_sopde_validation():
    g, h, p, q = presets.example31_boundary(3, 3)
    with pytest.raises(ValueError):
        SopdeSpec(0, 0, 0, np.zeros((7, 6)), g, h, p[:-1], q, 3, 3)


# ------------------------------------------------------------------ #
# first-order system
# ------------------------------------------------------------------ #

def test_fopde_homogeneous():
    system = assemble_fopde(_zero_fopde())
    npt.assert_array_equal(system.b, 0.0)
    assert system.order == 42
    npt.assert_allclose(system.A @ np.zeros(42), 0.0)


@pytest.fixture(scope="module")
def example21_truncated():
    return assemble_fopde(presets.example21_spec(3, 3, Projection.TRUNCATE))


def test_fopde_example21_l1(example21_truncated):
    U = solve_l1(example21_truncated).U
    expected = np.zeros((7, 6))
    expected[0, 0], expected[0, 3], expected[1, 4], expected[3, 3] = 1.0, 0.25, -0.5, 0.25
    npt.assert_allclose(U, expected, atol=1e-6)


def test_fopde_uses_squared_weights():
    """With alpha = 1, beta = gamma = 0 the matrix is the cos^2-weighted four-term sum."""
    from zernike_iom.operational import (
        phi_integration_matrix, phi_multiplication_matrix, radial_integration_matrix,
        radial_multiplication_matrix)

    spec = _zero_fopde(alpha=1.0, beta=0.0)
    Ec = np.asarray(phi_integration_matrix(3, 0.0, "cos_sq"))
    Ec2 = np.asarray(phi_integration_matrix(3, 0.0, "cos_2phi"))
    Ms = np.asarray(phi_multiplication_matrix(3))
    Er = np.asarray(radial_integration_matrix(3, 0.0, 0))
    Mr = np.asarray(radial_multiplication_matrix(3, 1))
    A = kron(Mr.T, Ec.T) - kron(Er.T, Ec.T) - 0.5 * kron(Er.T, Ms.T) + kron(Er.T, Ec2.T)
    A[np.abs(A) <= DROP_TOL] = 0.0
    npt.assert_allclose(assemble_fopde(spec).A.toarray(), A, atol=1e-14)


def test_fopde_consistency_projected():
    system = assemble_fopde(presets.example21_spec(3, 3))
    U = solve_l1(system).U
    assert mse(presets.example21_exact, U, GridSpec(50, 50)) <= 5e-3


# ------------------------------------------------------------------ #
# second-order system
# ------------------------------------------------------------------ #

def test_sopde_zero_data():
    g = np.zeros(7)
    p = np.zeros(6)
    system = assemble_sopde(SopdeSpec(1.0, 2.0, 3.0, np.zeros((7, 6)), g, g, p, p, 3, 3))
    npt.assert_array_equal(system.b, 0.0)


@pytest.mark.parametrize("m_max, n_max, order", [(3, 3, 42), (10, 10, 756)])
def test_laplace_order(m_max, n_max, order):
    system = assemble_sopde(presets.example31_spec(m_max, n_max))
    assert system.order == order == system.M * system.N
    assert system.A.shape == (order, order)


def test_laplace_reduces_to_four_terms():
    spec = presets.example31_spec(4, 4)
    ops = sopde_operators(4, 4, spec.r0, spec.phi0, spec.projection)
    D, I = ops["E_Dphi"], np.eye(spec.M)
    A = (kron(ops["M_r2"].T, D.T) - 3 * kron(ops["E_r_r"].T, D.T)
         + kron(ops["E_Dr"].T, D.T) + kron(ops["E_Dr"].T, I))
    A[np.abs(A) <= DROP_TOL] = 0.0
    npt.assert_allclose(assemble_sopde(spec).A.toarray(), A, atol=1e-13)
    e1 = np.eye(spec.M)[:, :1]
    row = lambda v: v * np.eye(spec.N)[:1]  # noqa: E731
    g, h = spec.g_vec[:, None], spec.h_vec[:, None]
    Er, EDr = ops["E_r"], ops["E_Dr"]
    Y = (D.T @ g @ row(1.0) + D.T @ h @ row(1.0) @ Er - D.T @ g @ row(1.0) @ Er
         + e1 @ spec.p_vec[None, :] @ EDr + ops["E_phi"].T @ e1 @ spec.q_vec[None, :] @ EDr)
    npt.assert_allclose(assemble_sopde(spec).b, vec(Y), atol=1e-13)


def test_laplace_entry_point_identical():
    g, h, p, q = presets.example31_boundary(5, 5)
    a = assemble_laplace(g, h, p, q, 1.0, 0.0, 5, 5)
    b = assemble_sopde(presets.example31_spec(5, 5))
    assert (a.A != b.A).nnz == 0
    npt.assert_array_equal(a.b, b.b)


def test_example31_vectors():
    g, h, p, q = presets.example31_boundary(3, 3)
    npt.assert_allclose(g, (2 / np.pi) * np.array([np.pi / 4, 0, 1, 0, 0, 0, 1 / 3]), atol=1e-15)
    npt.assert_allclose(h, (2 / np.pi) * np.array([0, 0, 1, 0, 0, 0, 1]), atol=1e-15)
    npt.assert_allclose(p, [0.5, 0, 0, 0, 0, 0])
    npt.assert_allclose(q, (2 / np.pi) * np.array([0, 1, 0, 0, 0, 1]), atol=1e-15)


def test_sparsity_small_system():
    rep = sparsity_report(assemble_sopde(presets.example31_spec(3, 3)))
    assert rep["order"] == 42
    assert abs(rep["nonzeros"] - 502) <= 0.2 * 502
    assert abs(rep["density"] - 0.2846) <= 0.2 * 0.2846


def test_sparse_storage_has_no_tiny_entries():
    A = assemble_sopde(presets.example31_spec(6, 6)).A
    assert np.all(np.abs(A.data) > DROP_TOL)


def test_assembly_deterministic():
    a = assemble_sopde(presets.example31_spec(5, 5))
    b = assemble_sopde(presets.example31_spec(5, 5))
    npt.assert_array_equal(a.A.toarray(), b.A.toarray())
    npt.assert_array_equal(a.b, b.b)


def test_matrix_market_roundtrip(tmp_path):
    system = assemble_sopde(presets.example31_spec(3, 3))
    system.write_matrix_market(tmp_path / "A.mtx")
    system.write_rhs(tmp_path / "b.txt")
    A = scipy.io.mmread(str(tmp_path / "A.mtx"))
    npt.assert_array_equal(A.toarray(), system.A.toarray())
    npt.assert_array_equal(np.loadtxt(tmp_path / "b.txt"), system.b)
    assert "kind=sopde" in (tmp_path / "A.mtx").read_text().splitlines()[1]


# ------------------------------------------------------------------ #
# residual of the truth
# ------------------------------------------------------------------ #

def _truth_residuals():
    out = []
    for m_max, n_max in presets.ladder_orders():
        system = assemble_sopde(presets.example31_spec(m_max, n_max))
        # an accurate quadrature keeps the discontinuous rim from polluting the expansion
        U = expand_function(presets.example31_exact, m_max, n_max, QuadratureSpec(4 * n_max + 60, 2048))
        out.append(np.linalg.norm(system.A @ vec(U) - system.b) / np.linalg.norm(system.b))
    return out


@pytest.fixture(scope="module")
def truth_residuals():
    return _truth_residuals()


def test_residual_of_truth_bounded(truth_residuals):
    assert max(truth_residuals) <= 5e-3


def test_residual_of_truth_monotone_along_ladder(truth_residuals):
    """Each step may exceed its predecessor by at most 20%."""
    print("relative residuals:", ", ".join(f"{v:.2e}" for v in truth_residuals))
    bad = [(i, a, b) for i, (a, b) in enumerate(zip(truth_residuals, truth_residuals[1:])) if b > 1.2 * a]
    assert not bad, f"residual increases along the ladder at steps {bad}"


def test_radial_count_consistency():
    for (M, N), (m, n) in zip(presets.LADDER, presets.ladder_orders()):
        assert 2 * m + 1 == M and radial_count(n) == N


@pytest.mark.parametrize("alias, real", [("zernike_basis", "basis"), ("operational_matrices", "operational"),
                                         ("pde_assembly", "assembly")])
def test_module_aliases(alias, real):
    import importlib

    assert importlib.import_module(f"zernike_iom.{alias}") is importlib.import_module(f"zernike_iom.{real}")
