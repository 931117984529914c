import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrix_alps.exceptions import DegenerateError, InvalidInputError, InvalidRankError
from matrix_alps.linalg import best_rank_k
from matrix_alps.projectors import MODES, ProjectorSpec, measured_epsilon, project


def with_spectrum(rng, m, n, sv):
    U = np.linalg.qr(rng.standard_normal((m, len(sv))))[0]
    V = np.linalg.qr(rng.standard_normal((n, len(sv))))[0]
    return (U * sv) @ V.T


def test_spec_aliases_and_validation():
    assert ProjectorSpec("rand").mode == "randomized_power"
    assert ProjectorSpec("css").mode == "column_subset"
    with pytest.raises(InvalidInputError):
        ProjectorSpec("lanczos")
    with pytest.raises(InvalidInputError):
        ProjectorSpec(k=0)
    with pytest.raises(InvalidInputError):
        ProjectorSpec(q=-1)
    with pytest.raises(InvalidInputError):
        ProjectorSpec("column_subset", epsilon=0.0)


def test_exact_mode_on_diagonal():
    _, Xk = project(ProjectorSpec("exact", k=2), np.diag([3.0, 2.0, 1.0]))
    np.testing.assert_allclose(Xk, np.diag([3.0, 2.0, 0.0]), atol=1e-12)


def test_rank_too_large():
    with pytest.raises(InvalidRankError):
        project(ProjectorSpec("randomized_power", k=4), np.ones((3, 5)))


@pytest.mark.parametrize("q", [0, 1, 2, 3])
def test_randomized_captures_exact_rank(q):
    rng = np.random.default_rng(q)
    for seed in range(25):
        X = rng.standard_normal((40, 3)) @ rng.standard_normal((3, 30))
        _, Xh = project(ProjectorSpec("randomized_power", k=3, q=q, seed=seed), X)
        assert np.linalg.norm(Xh - X) <= 1e-8 * np.linalg.norm(X)


def test_randomized_is_seed_deterministic():
    X = np.random.default_rng(0).standard_normal((20, 15))
    a = project(ProjectorSpec("randomized_power", k=3, seed=7), X)[1]
    b = project(ProjectorSpec("randomized_power", k=3, seed=7), X)[1]
    np.testing.assert_array_equal(a, b)


def test_column_subset_meets_target_in_three_quarters_of_runs():
    sv = np.array([1.0, 0.9] + [0.1] * 62)
    rng = np.random.default_rng(1)
    X = with_spectrum(rng, 64, 64, sv)
    eps = [measured_epsilon(ProjectorSpec("column_subset", k=2, epsilon=0.5, seed=s), X) for s in range(100)]
    assert sum(e <= 0.5 for e in eps) >= 75
    assert np.median(eps) <= 0.5


def test_column_subset_on_tall_matrix():
    # 300 rows: the sampled dictionary (at most 91 columns) cannot span the column space
    sv = np.array([1.0, 0.9] + [0.1] * 198)
    eps = []
    for s in range(30):
        X = with_spectrum(np.random.default_rng(100 + s), 300, 400, sv)
        eps.append(measured_epsilon(ProjectorSpec("column_subset", k=2, epsilon=0.5, seed=s), X))
    assert sum(e <= 0.5 for e in eps) >= 23
    assert min(eps) > 0


def test_power_iterations_sharpen_the_subspace():
    geo = 0.5 ** np.arange(64)
    wins = 0
    means = np.zeros(4)
    for s in range(100):
        X = with_spectrum(np.random.default_rng(200 + s), 64, 64, geo)
        e = [measured_epsilon(ProjectorSpec("randomized_power", k=5, q=q, seed=s), X) for q in range(4)]
        wins += e[3] < e[0]
        means += e
    assert wins >= 90
    assert np.all(np.diff(means / 100) <= 1e-12)


def test_measured_epsilon_exact_and_degenerate():
    X = np.random.default_rng(2).standard_normal((6, 5))
    assert measured_epsilon(ProjectorSpec("exact", k=2), X) == 0.0
    with pytest.raises(DegenerateError):
        measured_epsilon(ProjectorSpec("exact", k=2), X[:, :2] @ np.ones((2, 5)))


def test_lift_pads_when_dictionary_is_poor():
    # rank-1 input, k = 3: the column dictionary has one direction
    X = np.outer(np.arange(1.0, 7.0), np.ones(5))
    S, Xh = project(ProjectorSpec("column_subset", k=3, seed=0), X)
    np.testing.assert_allclose(Xh, X, atol=1e-12)
    np.testing.assert_allclose(S.left.T @ S.left, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(S.right.T @ S.right, np.eye(3), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(MODES), st.integers(0, 2**31 - 1), st.integers(2, 12), st.integers(2, 12), st.data())
def test_all_modes_are_orthonormal_rank_k_and_dominated(mode, seed, m, n, data):
    k = data.draw(st.integers(1, min(m, n)))
    X = np.random.default_rng(seed).standard_normal((m, n))
    S, Xh = project(ProjectorSpec(mode, k=k, seed=seed), X)
    assert S.strict_orthonormal
    np.testing.assert_allclose(S.left.T @ S.left, np.eye(S.left.shape[1]), atol=1e-10)
    np.testing.assert_allclose(S.right.T @ S.right, np.eye(S.right.shape[1]), atol=1e-10)
    s = np.linalg.svd(Xh, compute_uv=False)
    assert np.all(s[k:] <= 1e-8 * max(1.0, s[0]))
    best = np.linalg.norm(best_rank_k(X, k)[1] - X)
    assert np.linalg.norm(Xh - X) >= best - 1e-8
