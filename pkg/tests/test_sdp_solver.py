import math

import numpy as np
import pytest

from conftest import C5_VALUE
from psdgroth import matrix as mx
from psdgroth.errors import InvalidInput
from psdgroth.oracle import brute_force_sdp1
from psdgroth.sdp_solver import GramSolution, SolverConfig, default_rank, objective_value, solve_sdp_relaxation


@pytest.mark.parametrize("m", [1, 3, 6])
def test_all_ones(m):
    sol = solve_sdp_relaxation(mx.ones(m))
    assert sol.objective == pytest.approx(m * m, rel=1e-10)


@pytest.mark.parametrize("m", [1, 4, 7])
def test_identity(m):
    assert solve_sdp_relaxation(mx.identity(m)).objective == pytest.approx(m, rel=1e-14)


def test_k2_laplacian():
    sol = solve_sdp_relaxation(mx.PsdMatrix([[1, -1], [-1, 1]]))
    assert sol.objective == pytest.approx(4.0, rel=1e-12)
    assert sol.vectors[0] @ sol.vectors[1] == pytest.approx(-1.0, abs=1e-9)


def test_c5_laplacian(c5):
    # reference value from the planar grid search, see test_oracle
    assert solve_sdp_relaxation(c5).objective == pytest.approx(C5_VALUE, abs=1e-4)
    assert solve_sdp_relaxation(c5).objective == pytest.approx(18.0902, abs=1e-4)


def test_objective_value_examples():
    rng = np.random.default_rng(0)
    V = rng.standard_normal((5, 3))
    V /= np.linalg.norm(V, axis=1)[:, None]
    assert objective_value(mx.identity(5), V) == pytest.approx(5.0, rel=1e-14)
    same = np.tile(V[0], (5, 1))
    assert objective_value(mx.ones(5), same) == pytest.approx(25.0, rel=1e-14)
    assert objective_value(mx.PsdMatrix([[1, -1], [-1, 1]]), np.tile(V[0], (2, 1))) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InvalidInput):
        objective_value(mx.identity(3), V)


def test_solution_invariants():
    A = mx.random_gram(12, 4, 5)
    sol = solve_sdp_relaxation(A)
    assert sol.k == default_rank(12) == 6
    np.testing.assert_allclose(np.linalg.norm(sol.vectors, axis=1), 1.0, atol=1e-12)
    assert abs(sol.objective - objective_value(A, sol.vectors)) <= 1e-9 * A.m * A.scale
    assert sol.converged


def test_monotone_sweeps():
    for seed in range(10):
        A = mx.random_gram(15, 3, seed)
        sol = solve_sdp_relaxation(A, SolverConfig(seed=seed, restarts=1))
        h = np.array(sol.history)
        assert np.all(np.diff(h) >= -1e-12 * A.m * A.scale)


def test_lower_bound_against_brute_force():
    for seed in range(40):
        m = 2 + seed % 8
        A = mx.random_gram(m, 1 + seed % m, seed)
        assert solve_sdp_relaxation(A).objective >= brute_force_sdp1(A).value - 1e-9 * A.scale


def test_deterministic():
    A = mx.random_gram(10, 10, 2)
    cfg = SolverConfig(seed=11)
    a, b = solve_sdp_relaxation(A, cfg), solve_sdp_relaxation(A, cfg)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    assert a.objective == b.objective


def test_threads_do_not_change_result():
    A = mx.random_gram(10, 10, 2)
    a = solve_sdp_relaxation(A, SolverConfig(seed=4))
    b = solve_sdp_relaxation(A, SolverConfig(seed=4, workers=3))
    np.testing.assert_array_equal(a.vectors, b.vectors)


@pytest.mark.parametrize("c", [2.0, 3.0, 0.1])
def test_scaling_equivariance(c):
    A = mx.random_gram(8, 3, 9)
    cfg = SolverConfig(seed=1)
    a = solve_sdp_relaxation(A, cfg)
    b = solve_sdp_relaxation(c * A, cfg)
    np.testing.assert_allclose(a.vectors @ a.vectors.T, b.vectors @ b.vectors.T, atol=1e-8)
    assert b.objective == pytest.approx(c * a.objective, rel=1e-8)


def test_non_psd_rejected():
    with pytest.raises(InvalidInput):
        solve_sdp_relaxation(mx.PsdMatrix([[1, 2], [2, 1]]))


def test_zero_gradient_keeps_vector():
    # identity: every partial gradient vanishes, vectors stay at their initial values
    sol = solve_sdp_relaxation(mx.identity(4), SolverConfig(seed=3, restarts=1))
    rng = np.random.default_rng(3)
    U = rng.standard_normal((4, sol.k))
    U /= np.linalg.norm(U, axis=1)[:, None]
    np.testing.assert_array_equal(sol.vectors, U)


def test_max_sweeps_reported():
    A = mx.random_gram(30, 30, 1)
    sol = solve_sdp_relaxation(A, SolverConfig(max_sweeps=1, tol=1e-300, restarts=1))
    assert not sol.converged and sol.iterations == 1


def test_config_validation():
    with pytest.raises(InvalidInput):
        SolverConfig(k=0)
    with pytest.raises(InvalidInput):
        SolverConfig(tol=0)


def test_from_vectors_normalizes():
    A = mx.ones(3)
    G = GramSolution.from_vectors(A, [[2.0, 0], [0, 3.0], [1, 1]])
    np.testing.assert_allclose(np.linalg.norm(G.vectors, axis=1), 1)
    assert G.objective == pytest.approx(3 + 2 * (0 + 2 * math.sqrt(0.5)))
