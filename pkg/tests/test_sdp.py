import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import best_subset, exhaustive_hom, random_q_instance
from miselect import (
    ConfigError,
    HomogenizedProblem,
    SdpSolution,
    SolverError,
    SubsetOracle,
    build_q_matrix,
    cobra,
    exhaustive,
    feasibility_residuals,
    fixtures,
    homogenize,
    offset_constant,
    oracle_from_table,
    quadratic_form,
    quadratic_oracle,
    randomized_round,
    size_adjust,
    solve_sdp,
    subset_from_signs,
)
from miselect.sdp import RESIDUAL_KEYS

seeds = st.integers(0, 80)


def example_q(p=2):
    return build_q_matrix(fixtures.example3_mi_matrix(), p=p)


def sign_vector(n, subset):
    y = -np.ones(n + 1)
    y[0] = 1.0
    for i in subset:
        y[i + 1] = 1.0
    return y


# -------------------------------------------------------------- homogenize

def test_homogenize_structure():
    q = example_q()
    prob = homogenize(q)
    assert prob.qu.shape == (5, 5)
    assert prob.qu[0, 0] == 0.0
    assert np.allclose(prob.qu[1:, 1:], q.q)
    assert np.allclose(prob.qu[0, 1:], q.q.sum(axis=0))
    assert prob.p_target == 2 and prob.n == 4
    assert prob.card == 2 * 2 - 4


def test_homogenize_input_forms():
    arr = np.eye(3)
    prob = homogenize(arr, p=2)
    assert prob.n == 3 and prob.p_target == 2
    with pytest.raises(ConfigError, match="target cardinality required"):
        homogenize(arr)
    with pytest.raises(ConfigError, match="must be square"):
        homogenize(np.zeros((2, 3)), p=2)
    with pytest.raises(ConfigError, match="must be symmetric"):
        HomogenizedProblem(np.array([[0.0, 1.0], [0.0, 0.0]]), 1, 1)
    with pytest.raises(ConfigError, match=r"\(N\+1\) x \(N\+1\)"):
        HomogenizedProblem(np.zeros((3, 3)), 5, 2)


@given(seeds, st.integers(2, 7))
def test_homogenize_score_identity(seed, n):
    """y'Qu y = 4 x'Qx - 4c on every indicator/sign pair."""
    rng = np.random.default_rng(seed)
    q = random_q_instance(rng, n, "gauss")
    prob = homogenize(q, p=2)
    c = offset_constant(q)
    size = int(rng.integers(1, n + 1))
    subset = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
    y = sign_vector(n, subset)
    lhs = float(y @ prob.qu @ y)
    assert lhs == pytest.approx(4.0 * quadratic_form(q, subset) - 4.0 * c,
                                abs=1e-9)


def test_subset_from_signs_flip_invariance():
    y = sign_vector(5, (1, 3))
    assert subset_from_signs(y) == (1, 3)
    assert subset_from_signs(-y) == (1, 3)
    assert subset_from_signs(np.ones(4)) == (0, 1, 2)


def test_walkthrough_homogenized_optimum():
    # hand check: best discrete value 0.45 maps to 4*0.45 - e'Qe = 0.95
    q = example_q()
    prob = homogenize(q)
    assert offset_constant(q) == pytest.approx(0.85 / 4.0)
    assert exhaustive_hom(prob.qu, 4, 2) == pytest.approx(0.95)


def test_rank_one_subset_matrices_are_feasible():
    prob = homogenize(example_q())
    for subset in ((0, 1), (2, 3), (0, 3)):
        y = sign_vector(4, subset)
        res = feasibility_residuals(prob, np.outer(y, y))
        assert max(res.values()) <= 1e-9
        assert set(res) == set(RESIDUAL_KEYS)


# ------------------------------------------------------------------ solver

def test_solve_sdp_guards():
    prob = homogenize(example_q())
    with pytest.raises(ConfigError, match="tol must be positive"):
        solve_sdp(prob, tol=0.0)
    with pytest.raises(ConfigError, match="max_iter must be >= 1"):
        solve_sdp(prob, max_iter=0)
    with pytest.raises(ConfigError,
                       match=r"needs 2 <= P <= N-1, got P=4, N=4"):
        solve_sdp(homogenize(example_q(), p=4))
    with pytest.raises(ConfigError, match="needs 2 <= P <= N-1"):
        solve_sdp(homogenize(example_q(), p=1))


def test_solve_sdp_walkthrough_tightness():
    sol = solve_sdp(homogenize(example_q()), tol=1e-8)
    assert sol.status == "converged"
    assert sol.objective == pytest.approx(0.95, abs=1e-5)
    assert sol.dual_bound >= sol.objective - 1e-6
    assert sol.dual_bound >= 0.95 - 1e-5  # upper bound on the discrete optimum
    assert max(sol.residuals.values()) <= 1e-6
    assert sol.iterations >= 1
    assert sol.p_target == 2 and sol.n == 4


def test_solve_sdp_zero_objective():
    # Q = 0: every feasible point is optimal; the solve must still converge
    sol = solve_sdp(homogenize(np.zeros((5, 5)), p=2))
    assert sol.status == "converged"
    assert abs(sol.objective) <= 1e-6
    assert max(sol.residuals.values()) <= 1e-5


def test_solution_json_shapes():
    sol = solve_sdp(homogenize(example_q()))
    blob = sol.to_json()
    assert "y_mat" not in blob
    assert set(blob["residuals"]) == set(RESIDUAL_KEYS)
    full = sol.to_json(include_matrix=True)
    assert len(full["y_mat"]) == 5


@pytest.mark.parametrize("style", ["gauss", "nonneg", "lowrank", "diag"])
def test_solver_bounds_discrete_optimum(style):
    rng = np.random.default_rng(hash(style) % 2**32)
    n, p = 8, 3
    q = random_q_instance(rng, n, style)
    prob = homogenize(q, p=p)
    sol = solve_sdp(prob, tol=1e-7)
    assert sol.status == "converged"
    hom_best = exhaustive_hom(prob.qu, n, p)
    # the relaxation value never falls below the discrete optimum
    assert sol.objective >= hom_best - 1e-5
    assert sol.dual_bound >= hom_best - 1e-6


# ---------------------------------------------------------------- rounding

def test_randomized_round_rank_one_is_exact():
    """A rank-1 feasible Y admits only its own subset under sign rounding."""
    prob = homogenize(example_q())
    y = sign_vector(4, (1, 2))
    sol = SdpSolution(np.outer(y, y), 0.0, {}, 0, "converged", 0.0, 0.0, 2, 4)
    for seed in range(20):
        assert randomized_round(sol, seed) == (1, 2)


def test_randomized_round_is_deterministic():
    sol = solve_sdp(homogenize(example_q()))
    assert randomized_round(sol, 7) == randomized_round(sol, 7)


# -------------------------------------------------------------- size_adjust

def additive_oracle():
    return oracle_from_table({(0,): 3.0, (1,): 1.0, (2,): 2.0, (3,): 5.0}, 4,
                             default="additive")


def test_size_adjust_identity():
    oracle = additive_oracle()
    assert size_adjust((2, 0), oracle, 2) == (0, 2)
    assert oracle.calls == 0  # nothing to do, nothing evaluated


def test_size_adjust_shrinks_within_candidate():
    got = size_adjust((0, 1, 2), additive_oracle(), 2)
    assert got == (0, 2)  # feature 3 scores best overall but is outside


def test_size_adjust_unrestricted_shrink_ignores_candidate():
    got = size_adjust((0, 1, 2), additive_oracle(), 2, restrict=False)
    assert got == (0, 3)


def test_size_adjust_grows_from_full_pool():
    got = size_adjust((1,), additive_oracle(), 2)
    assert got == (1, 3)  # growth may recruit outside the candidate


def test_size_adjust_guards():
    oracle = additive_oracle()
    with pytest.raises(ConfigError, match="exceeds feature count"):
        size_adjust((0,), oracle, 9)
    with pytest.raises(ConfigError, match="must be >= 1"):
        size_adjust((0,), oracle, 0)
    with pytest.raises(ConfigError, match="candidate index out of range"):
        size_adjust((7,), oracle, 2)


# ------------------------------------------------------------------- cobra

def test_cobra_walkthrough_matches_exhaustive():
    oracle = fixtures.example3_oracle()
    res = cobra(example_q(), oracle, p=2, rounds=50, seed=0)
    assert res.selected == (2, 3)
    assert res.score == pytest.approx(0.45)
    assert res.strategy == "cobra"
    assert res.seed == 0
    assert len(res.trajectory) == 50
    assert all(row[0] == 2 for row in res.trajectory)


def test_cobra_full_set_short_circuits():
    oracle = fixtures.example3_oracle()
    res = cobra(example_q(p=4), oracle, p=4, rounds=10, seed=3)
    assert res.selected == (0, 1, 2, 3)
    assert res.score == pytest.approx(0.85)
    assert res.trajectory == ()
    assert oracle.evaluations == 1  # no SDP, no rounding


def test_cobra_guards():
    q = example_q()
    oracle = fixtures.example3_oracle()
    with pytest.raises(ConfigError, match="rounds must be >= 1"):
        cobra(q, oracle, p=2, rounds=0)
    with pytest.raises(ConfigError, match="unknown non-convergence policy"):
        cobra(q, oracle, p=2, on_nonconverge="retry")
    with pytest.raises(ConfigError, match="requires p >= 2"):
        cobra(q, oracle, p=1)
    with pytest.raises(ConfigError, match="exceeds feature count"):
        cobra(q, oracle, p=9)


def test_cobra_deterministic_and_prefix_stable():
    q = example_q()
    short = cobra(q, fixtures.example3_oracle(), p=2, rounds=8, seed=11)
    again = cobra(q, fixtures.example3_oracle(), p=2, rounds=8, seed=11)
    assert short == again
    longer = cobra(q, fixtures.example3_oracle(), p=2, rounds=16, seed=11)
    # spawned substreams make round r independent of the total round count
    assert longer.trajectory[:8] == short.trajectory
    assert longer.score >= short.score


def test_cobra_threads_match_serial():
    q = example_q()
    serial = cobra(q, fixtures.example3_oracle(), p=2, rounds=12, seed=5)
    threaded = cobra(q, fixtures.example3_oracle(), p=2, rounds=12, seed=5,
                     threads=4)
    assert threaded == serial


def test_cobra_nonconvergence_policies():
    q = example_q()
    with pytest.raises(SolverError, match="rerun with a larger budget"):
        cobra(q, fixtures.example3_oracle(), p=2, max_iter=1)
    res = cobra(q, fixtures.example3_oracle(), p=2, rounds=5, max_iter=1,
                on_nonconverge="proceed")
    assert len(res.selected) == 2


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_cobra_never_beats_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n, p = 8, 3
    q = random_q_instance(rng, n, "gauss")
    oracle = quadratic_oracle(q)
    res = cobra(q, oracle, p=p, rounds=30, seed=seed)
    best = exhaustive(quadratic_oracle(q), n, p)
    assert len(res.selected) == p
    assert res.score == pytest.approx(float(oracle(res.selected)))
    assert res.score <= best.score + 1e-12
    want_set, want_score = best_subset(q, n, p)
    assert best.score == pytest.approx(want_score)
