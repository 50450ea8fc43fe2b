"""Property-based invariants over randomly drawn orders, coefficients and systems."""

import numpy as np
import numpy.testing as npt
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zernike_iom.assembly import kron, unvec, vec
from zernike_iom.basis import (
    ZernikeIndex,
    eval_radial,
    expand_function,
    radial_count,
    radial_layout,
    reconstruct,
)
from zernike_iom.solvers import solve_l1, solve_l2

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
orders = st.tuples(st.integers(3, 6), st.integers(1, 7))
SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _matching_mask(m_max, n_max):
    mask = np.zeros((2 * m_max + 1, radial_count(n_max)), dtype=bool)
    for j, z in enumerate(radial_layout(n_max).ordering):
        if z.m == 0:
            mask[0, j] = True
        elif z.m <= m_max:
            mask[2 * z.m - 1, j] = mask[2 * z.m, j] = True
    return mask


@st.composite
def coefficient_matrices(draw, matching=False):
    m_max, n_max = draw(orders)
    shape = (2 * m_max + 1, radial_count(n_max))
    U = draw(arrays(np.float64, shape, elements=finite))
    if matching:
        U = np.where(_matching_mask(m_max, n_max), U, 0.0)
    return U


@SETTINGS
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_vec_unvec_inverse(m, n, data):
    U = data.draw(arrays(np.float64, (m, n), elements=finite))
    npt.assert_array_equal(unvec(vec(U), m, n), U)
    assert vec(U).shape == (m * n,)


@SETTINGS
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.data())
def test_vec_trick(m, k, n, data):
    A = data.draw(arrays(np.float64, (m, k), elements=finite))
    X = data.draw(arrays(np.float64, (k, n), elements=finite))
    B = data.draw(arrays(np.float64, (n, n), elements=finite))
    lhs = vec(A @ X @ B)
    npt.assert_allclose(lhs, kron(B.T, A) @ vec(X), atol=1e-9 * (1 + np.abs(lhs).max()))


@SETTINGS
@given(coefficient_matrices(), finite, st.floats(0, 1), st.floats(0, 2 * np.pi))
def test_reconstruct_linear(U, a, r, phi):
    V = np.roll(U, 1, axis=0)
    lhs = reconstruct(a * U + V, r, phi)
    rhs = a * reconstruct(U, r, phi) + reconstruct(V, r, phi)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(a)) * (1 + np.abs(U).sum())


@SETTINGS
@given(st.integers(0, 25).flatmap(lambda n: st.tuples(st.just(n), st.sampled_from(range(n % 2, n + 1, 2)))),
       st.floats(0, 1))
def test_radial_bounded_by_one(nm, r):
    n, m = nm
    idx = ZernikeIndex(n, m)
    assert abs(eval_radial(idx, r)) <= 1 + 1e-12
    assert abs(eval_radial(idx, 1.0) - 1.0) <= 1e-12


@SETTINGS
@given(coefficient_matrices(matching=True))
def test_expand_reconstruct_roundtrip(U):
    m_max = (U.shape[0] - 1) // 2
    n_max = next(n for n in range(20) if radial_count(n) == U.shape[1])
    back = expand_function(lambda r, p: reconstruct(U, r, p), m_max, n_max)
    npt.assert_allclose(back, U, atol=1e-9 * (1 + np.abs(U).max()))


@st.composite
def feasible_systems(draw):
    m = draw(st.integers(2, 10))
    n = draw(st.integers(m, 16))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x0 = np.where(rng.random(n) < 0.4, rng.standard_normal(n), 0.0)
    return A, A @ x0


@SETTINGS
@given(feasible_systems())
def test_l1_never_exceeds_l2(system):
    A, b = system
    x1 = solve_l1((A, b)).x
    x2 = solve_l2((A, b)).x
    assert np.abs(x1).sum() <= np.abs(x2).sum() + 1e-8
    assert np.linalg.norm(A @ x1 - b) <= 1e-8 * max(1.0, np.linalg.norm(b))
