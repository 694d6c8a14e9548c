import dataclasses

import numpy as np
import pytest

from regime_vi.assembly import generator, step_matrix
from regime_vi.errors import NewtonDivergence, SolverError
from regime_vi.model import make_grid
from regime_vi.penalty import build_penalty, solve_penalized, step_u

EPS = 1e-4


def test_penalty_constants(params):
    beta = build_penalty(EPS, params)
    assert beta.c1 == pytest.approx(1.3003, abs=1e-13)
    assert beta.c0 == pytest.approx(2.6006, abs=1e-13)
    assert beta.c0 > beta.c1 > 0


def test_penalty_values(params):
    beta = build_penalty(EPS, params)
    assert beta(0.0) == pytest.approx(-beta.c0, abs=1e-14)
    assert beta(EPS) == pytest.approx(-beta.c1, abs=1e-14)
    assert beta(2 * EPS) == 0.0
    assert beta(3 * EPS) == 0.0
    assert np.all(beta(np.linspace(-1, 1, 1001)) <= 0.0)


def test_penalty_sweep_monotone_and_concave(params):
    beta = build_penalty(EPS, params)
    x = np.linspace(-1.0, 3 * EPS, 10_000)
    assert np.all(beta.derivative(x) >= 0.0)
    assert np.all(beta.second_derivative(x) <= 0.0)
    # independent check from the sampled values alone
    y = beta(x)
    roundoff = 1e-14 * np.abs(y).max()
    assert np.all(np.diff(y) >= -roundoff)
    assert np.all(np.diff(y, 2) <= roundoff)


def test_prescribed_values_are_collinear(params):
    # beta(eps) is the midpoint of beta(0) and beta(2 eps): a concave function through
    # these three points is affine on [0, 2 eps], so it cannot flatten out at 2 eps
    beta = build_penalty(EPS, params)
    assert beta.c0 == pytest.approx(2 * beta.c1, rel=1e-15)
    x = np.linspace(0, 2 * EPS, 11)
    assert np.allclose(beta(x), -beta.c0 + beta.c1 * x / EPS, atol=1e-12)


def test_step_matrix_is_monotone(params, small_grid):
    m = step_matrix(params, small_grid)
    assert np.all(m.lower[1:] <= 0) and np.all(m.upper[:-1] <= 0)
    assert np.all(m.diag - np.abs(m.lower) - np.abs(m.upper) > 0)
    # rows of the generator annihilate constants up to the zeroth-order term
    gen = generator(params, small_grid)
    ones = np.ones(small_grid.n_p)
    from regime_vi.model import operator_coeffs
    assert np.allclose(gen.matvec(ones), operator_coeffs(params, small_grid.p).c, atol=1e-9)


def test_step_matrix_rejects_huge_dt(params):
    p = dataclasses.replace(params, T=10.0)
    with pytest.raises(SolverError, match="diagonally dominant"):
        step_matrix(p, make_grid(p, 21, 1))


def test_step_with_inactive_penalty_is_linear(params, small_grid):
    beta = build_penalty(EPS, params)
    n = small_grid.n_p
    u1_prev, um_prev = np.full(n, -1.0), np.full(n, 1.0)
    u1, um, info = step_u(params, small_grid, beta, (u1_prev, um_prev))
    K = params.K
    # all penalty arguments stay at or above 2 eps
    for arg in (u1 + 1 + K, -u1 - (1 - K), um - (1 - K), (1 + K) - um):
        assert arg.min() >= 2 * EPS
    m = step_matrix(params, small_grid)
    assert np.max(np.abs(m.matvec(u1) - u1_prev)) <= 1e-10
    assert np.max(np.abs(m.matvec(um) - um_prev)) <= 1e-10
    assert info["residual"] <= 1e-10


def test_one_step_from_initial_data(params, small_grid):
    beta = build_penalty(EPS, params)
    K, n = params.K, small_grid.n_p
    u1, um, _ = step_u(params, small_grid, beta, (np.full(n, -(1 - K)), np.full(n, 1 + K)))
    tol = 2 * EPS
    assert u1.min() >= -(1 + K) - tol and u1.max() <= -(1 - K) + tol
    assert um.min() >= (1 - K) - tol and um.max() <= (1 + K) + tol
    assert np.all(np.diff(u1) <= 1e-12)
    assert np.all(np.diff(um) >= -1e-12)


def test_newton_divergence_carries_residual_and_level(params, small_grid):
    with pytest.raises(NewtonDivergence) as exc:
        solve_penalized(params, small_grid, EPS, max_iter=0)
    assert exc.value.time_index == 1
    assert exc.value.residual > 1e-10


def test_initial_rows_exact(small_penalty, params):
    K = params.K
    assert np.all(small_penalty.v0[0] == 0.0)
    assert np.all(small_penalty.v1[0] == 1 - K)
    assert np.all(small_penalty.v_neg1[0] == -(1 + K))
    assert small_penalty.provenance == "penalty"


def test_difference_sum_nonnegative(small_penalty):
    assert (small_penalty.u1 + small_penalty.u_neg1).min() >= -1e-3


def test_newton_residuals_recorded(small_penalty):
    d = small_penalty.diagnostics
    assert d["max_newton_residual"] <= 1e-10
    assert d["newton_iterations"] >= small_penalty.grid.n_t


def test_eps_refinement_is_cauchy(params, small_grid):
    sols = [solve_penalized(params, small_grid, e) for e in (4e-4, 2e-4, 1e-4)]
    d1 = sols[0].sup_distance(sols[1])
    d2 = sols[1].sup_distance(sols[2])
    assert d2 <= 1.0 * d1
    assert d2 > 0
