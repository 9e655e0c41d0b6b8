import math

import numpy as np
import pytest

from nlgame import sdpcore as sc


def admm_reference(n, C, cons, iters=40000, rho=1.0):
    """Slow first-order reference: dual-ascent ADMM with PSD projection.
    Independent of the interior-point route; used only as a test oracle."""
    m = len(cons)
    A = np.stack([a for a, _ in cons]).reshape(m, -1)
    b = np.array([bb for _, bb in cons])
    AAt = A @ A.T
    X = np.zeros((n, n))
    S = np.zeros((n, n))
    c = C.reshape(-1)
    for _ in range(iters):
        rhs = -(rho * (A @ X.reshape(-1) - b) + A @ (S.reshape(-1) - c))
        y = np.linalg.solve(AAt, rhs)
        V = C - (A.T @ y).reshape(n, n) - rho * X
        V = (V + V.T) / 2
        w, Q = np.linalg.eigh(V)
        S = Q @ np.diag(np.maximum(w, 0)) @ Q.T
        X = (S - V) / rho
    return float(np.vdot(C, X))


def unit_diag_constraints(n):
    cons = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        cons.append((E, 1.0))
    return cons


def test_decoupled_diagonal_objective():
    C = np.diag([1.0, -1.0])
    sol = sc.solve(sc.SdpProblem(2, C, unit_diag_constraints(2), sense="max"))
    assert sol.status == "optimal"
    assert abs(sol.objective) < 1e-7


def test_chsh_moment_matrix():
    # basis {1, A0, A1, B0, B1}, +-1 observables, unit diagonal
    n = 5
    C = np.zeros((n, n))
    for i, j, sgn in [(1, 3, 1), (1, 4, 1), (2, 3, 1), (2, 4, -1)]:
        C[i, j] += sgn / 2
        C[j, i] += sgn / 2
    sol = sc.solve(sc.SdpProblem(n, C, unit_diag_constraints(n), sense="max"))
    assert sol.status == "optimal"
    p_win = (4 + sol.objective) / 8
    assert abs(p_win - (2 + math.sqrt(2)) / 4) < 1e-7


def random_bounded_problem(rng, n=4, m=5):
    # feasible by construction (b from an interior X0) and bounded
    # (C dual-feasible by construction), so strong duality holds
    X0 = rng.normal(size=(n, n))
    X0 = X0 @ X0.T + 0.5 * np.eye(n)
    As = []
    for _ in range(m):
        Ai = rng.normal(size=(n, n))
        As.append((Ai + Ai.T) / 2)
    b = [float(np.vdot(Ai, X0)) for Ai in As]
    y0 = rng.normal(size=m)
    S0 = rng.normal(size=(n, n))
    S0 = S0 @ S0.T + 0.5 * np.eye(n)
    C = sum(y * Ai for y, Ai in zip(y0, As)) + S0
    return sc.SdpProblem(n, C, list(zip(As, b)), sense="min")


def test_random_problems_match_reference():
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = random_bounded_problem(rng)
        sol = sc.solve(p)
        ref = admm_reference(p.n, p.C, p.constraints)
        assert sol.status == "optimal"
        assert abs(sol.objective - ref) < 1e-6 * (1 + abs(ref))


def test_feasibility_and_slackness_residuals():
    rng = np.random.default_rng(21)
    p = random_bounded_problem(rng)
    sol = sc.solve(p)
    assert sol.status == "optimal"
    for Ai, bi in p.constraints:
        assert abs(np.vdot(Ai, sol.X) - bi) <= 1e-6 * (1 + abs(bi))
    assert np.linalg.eigvalsh(sol.X).min() >= -1e-9
    assert abs(np.vdot(sol.X, sol.Z)) <= 10 * 1e-8 * (1 + abs(sol.objective))


def test_scaling_covariance():
    rng = np.random.default_rng(5)
    p = random_bounded_problem(rng)
    base = sc.solve(p).objective
    for alpha in (2.0, 7.5):
        scaled = sc.SdpProblem(p.n, alpha * p.C, p.constraints, sense="min")
        assert abs(sc.solve(scaled).objective - alpha * base) < 1e-6 * (1 + abs(alpha * base))


def test_min_and_max_agree_on_sign_flip():
    rng = np.random.default_rng(11)
    p = random_bounded_problem(rng)
    lo = sc.solve(p).objective
    hi = sc.solve(sc.SdpProblem(p.n, -p.C, p.constraints, sense="max")).objective
    assert abs(lo + hi) < 1e-6 * (1 + abs(lo))


def test_free_scalars():
    C = np.diag([1.0, 1.0])
    cons = [(np.diag([1.0, 0.0]), 1.0), (np.diag([0.0, 1.0]), 0.0)]
    p = sc.SdpProblem(
        2,
        C,
        cons,
        sense="max",
        free_cost=np.array([1.0]),
        free_rows=np.array([[1.0], [-1.0]]),
    )
    sol = sc.solve(p)
    assert sol.status == "optimal"
    assert abs(sol.objective - 2.0) < 1e-6
    assert abs(sol.f[0] - 1.0) < 1e-5


def test_nonneg_scalars_hit_boundary():
    p = sc.SdpProblem(
        1,
        np.array([[1.0]]),
        [(np.array([[1.0]]), 2.0)],
        sense="max",
        nonneg_cost=np.array([-1.0]),
        nonneg_rows=np.array([[1.0]]),
    )
    sol = sc.solve(p)
    assert sol.status == "optimal"
    assert abs(sol.objective - 2.0) < 1e-6
    assert sol.s[0] < 1e-6


def test_infeasible_status():
    p = sc.SdpProblem(1, np.array([[1.0]]), [(np.array([[1.0]]), -1.0)], sense="max")
    assert sc.solve(p).status == "infeasible"


def test_iteration_cap_status():
    rng = np.random.default_rng(3)
    p = random_bounded_problem(rng)
    assert sc.solve(p, max_iter=2).status == "max_iter"


def test_validation_errors():
    with pytest.raises(ValueError):
        sc.SdpProblem(2, np.array([[0.0, 1.0], [0.0, 0.0]]), [(np.eye(2), 1.0)])
    with pytest.raises(ValueError):
        sc.SdpProblem(2, np.eye(2), [])
    with pytest.raises(ValueError):
        sc.SdpProblem(2, np.eye(2), [(np.eye(3), 1.0)])
    with pytest.raises(ValueError):
        sc.SdpProblem(2, np.eye(2), [(np.eye(2), 1.0)], sense="best")
    with pytest.raises(ValueError):
        sc.SdpProblem(2, np.eye(2), [(np.eye(2), float("nan"))])


def test_povm_commuting_case():
    povm, val = sc.max_povm_step([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert abs(val - 2.0) < 1e-6
    assert abs(povm[0][0, 0] - 1.0) < 1e-5
    assert abs(povm[1][1, 1] - 1.0) < 1e-5


def test_povm_zero_case():
    povm, val = sc.max_povm_step([np.zeros((2, 2))] * 2)
    assert abs(val) < 1e-6
    total = sum(povm) - np.eye(2)
    assert np.abs(total).max() < 1e-6


def test_povm_primal_equals_dual_on_random_pairs():
    rng = np.random.default_rng(17)
    for _ in range(4):
        H = [(a + a.T) / 2 for a in rng.normal(size=(2, 3, 3))]
        povm, val = sc.max_povm_step(H)
        for M in povm:
            assert np.linalg.eigvalsh(M).min() > -1e-7
        assert np.abs(sum(povm) - np.eye(3)).max() < 1e-6
        # direct dual solve: min Tr Y with Y - H_a >= 0 via eigenvalue search
        primal = sum(float(np.vdot(Ha, Ma)) for Ha, Ma in zip(H, povm))
        assert abs(primal - val) < 1e-6 * (1 + abs(val))


def test_povm_unitary_invariance():
    rng = np.random.default_rng(23)
    H = [(a + a.T) / 2 for a in rng.normal(size=(3, 3, 3))]
    _, val = sc.max_povm_step(H)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    _, val_rot = sc.max_povm_step([Q @ Ha @ Q.T for Ha in H])
    assert abs(val - val_rot) < 1e-7 * (1 + abs(val))
