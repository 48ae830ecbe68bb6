import numpy as np
import pytest

from socert.lp import LpProblem, enumerate_vertices, solve


def test_bounded_optimum():
    res = solve(LpProblem([1.0], [[1.0]], [1.0]))
    assert res.status == "optimal"
    assert res.value == pytest.approx(1.0)


def test_unbounded():
    assert solve(LpProblem([1.0])).status == "unbounded"


def test_infeasible():
    assert solve(LpProblem([1.0], [[1.0]], [-1.0])).status == "infeasible"


def test_enumeration_examples():
    res = enumerate_vertices(LpProblem([1.0], [[1.0]], [1.0]))
    assert res.status == "optimal" and res.value == pytest.approx(1.0)
    # square system with a unique feasible point
    lp = LpProblem([1.0, 1.0], A_eq=[[1.0, 1.0], [1.0, -1.0]], b_eq=[3.0, 1.0], lower=[-np.inf, -np.inf])
    res = enumerate_vertices(lp)
    assert res.status == "optimal"
    np.testing.assert_allclose(res.x, [2.0, 1.0], atol=1e-12)


def test_enumeration_size_cap():
    with pytest.raises(ValueError):
        enumerate_vertices(LpProblem(np.ones(7)))


def test_free_variables_and_equalities():
    lp = LpProblem([1.0, 0.0], [[1.0, 1.0]], [2.0], [[1.0, -1.0]], [0.0], lower=[-np.inf, -np.inf])
    res = solve(lp)
    assert res.status == "optimal"
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-12)


def _random_lp(rng):
    n = int(rng.integers(1, 6))
    m_le = int(rng.integers(0, 7))
    m_eq = int(rng.integers(0, min(3, 9 - m_le)))
    c = rng.integers(-3, 4, n).astype(float)
    A_le = rng.integers(-3, 4, (m_le, n)).astype(float)
    b_le = rng.integers(-2, 6, m_le).astype(float)
    A_eq = rng.integers(-3, 4, (m_eq, n)).astype(float)
    b_eq = rng.integers(-2, 4, m_eq).astype(float)
    lower = np.where(rng.random(n) < 0.3, -np.inf, 0.0)
    upper = np.where(rng.random(n) < 0.3, rng.integers(1, 5, n).astype(float), np.inf)
    return LpProblem(c, A_le, b_le, A_eq, b_eq, lower, upper)


def test_solve_matches_vertex_enumeration_on_200_seeded_lps():
    rng = np.random.default_rng(20240501)
    statuses = {}
    for _ in range(200):
        lp = _random_lp(rng)
        a, b = solve(lp), enumerate_vertices(lp)
        assert a.status == b.status
        statuses[a.status] = statuses.get(a.status, 0) + 1
        if a.status == "optimal":
            assert a.value == pytest.approx(b.value, abs=1e-7, rel=1e-7)
    assert set(statuses) == {"optimal", "unbounded", "infeasible"}


def test_optimal_points_are_feasible_and_consistent():
    rng = np.random.default_rng(7)
    for _ in range(200):
        lp = _random_lp(rng)
        res = solve(lp)
        if res.status != "optimal":
            continue
        slack = 1e-8 * (1 + max(np.abs(lp.b_le).max(initial=0), np.abs(lp.b_eq).max(initial=0)))
        assert np.all(lp.A_le @ res.x <= lp.b_le + slack)
        assert np.all(np.abs(lp.A_eq @ res.x - lp.b_eq) <= slack)
        assert np.all(res.x >= lp.lower - slack) and np.all(res.x <= lp.upper + slack)
        assert lp.c @ res.x == pytest.approx(res.value, rel=1e-10, abs=1e-10)


def test_determinism():
    rng = np.random.default_rng(3)
    lp = _random_lp(rng)
    a, b = solve(lp), solve(lp)
    assert a.status == b.status and a.value == b.value
    if a.x is not None:
        assert a.x.tobytes() == b.x.tobytes()
