import math

import numpy as np
import pytest

from anisum.optimize import (
    Certificate,
    LPProblem,
    LPStatus,
    NumericFailure,
    _compass_polish,
    exchange_minimize,
    lp_cover_solve,
    lp_solve,
    multistart_maximize,
    project_to_simplex,
)

import oracles


def _sphere_proj(x):
    n = np.linalg.norm(x)
    if n < 1e-300:
        e = np.zeros_like(x)
        e[0] = 1.0
        return e
    return x / n


def test_multistart_finds_top_eigenvector():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    a = a @ a.T

    cert = multistart_maximize(lambda x: float(x @ a @ x), _sphere_proj, 4,
                               restarts=8, seed=1)
    top = float(np.linalg.eigvalsh(a)[-1])
    assert cert.value == pytest.approx(top, rel=1e-7)
    assert cert.converged


def test_multistart_warm_start_is_respected():
    # objective with a tiny superior basin at -e1 that random starts miss
    def obj(x):
        return float(x[0] ** 3)

    cert_cold = multistart_maximize(obj, _sphere_proj, 6, restarts=4, seed=3)
    warm = np.zeros(6)
    warm[0] = -1.0
    # warm starts participate but can never lower the result
    cert_warm = multistart_maximize(obj, _sphere_proj, 6, restarts=4, seed=3,
                                    warm_starts=[-warm])
    assert cert_warm.value >= cert_cold.value - 1e-12


def test_multistart_value_matches_point():
    def obj(x):
        return float(-((x[0] - 0.3) ** 2) + x[1])

    cert = multistart_maximize(obj, _sphere_proj, 2, restarts=6, seed=5)
    assert cert.value == pytest.approx(obj(cert.point))


def test_multistart_restart_monotonicity():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((3, 3))

    def obj(x):
        return float(np.abs(a @ x).max())

    vals = [multistart_maximize(obj, _sphere_proj, 3, restarts=r, seed=7).value
            for r in (2, 8, 32)]
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


def test_compass_polish_steps_through_kinks():
    # max of |x1| + |x2| on the Euclidean circle is sqrt(2), attained on a
    # diagonal where the objective has a kink in every axis direction;
    # one-sided gradient ascent stalls just off the diagonal
    def obj(x):
        return float(np.abs(x).sum())

    start = _sphere_proj(np.array([1.0, 0.02]))
    x, fx = _compass_polish(obj, _sphere_proj, start.copy(), obj(start))
    assert fx == pytest.approx(math.sqrt(2.0), abs=1e-6)
    # monotone: never returns less than the input value
    assert fx >= obj(start) - 1e-15


def test_exchange_minimize_two_branch_minimax():
    # minimize over [1, 2] the max of x and 2/x: optimum sqrt(2)
    branches = [lambda x: float(x[0]), lambda x: 2.0 / float(x[0])]

    def inner(x):
        vals = [b(x) for b in branches]
        j = int(np.argmax(vals))
        return Certificate(np.array([float(j)]), vals[j], 0, True)

    def cross(x, cert):
        return branches[int(cert.point[0])](x)

    def outer(active, x):
        ids = {int(c.point[0]) for c in active}
        if ids == {0}:
            return np.array([1.0])
        if ids == {1}:
            return np.array([2.0])
        return np.array([math.sqrt(2.0)])

    cert = exchange_minimize(1, inner, outer, cross, np.array([1.0]))
    assert cert.value == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert cert.converged


def test_project_to_simplex():
    rng = np.random.default_rng(2)
    for _ in range(25):
        v = rng.standard_normal(6) * 3
        x = project_to_simplex(v)
        assert x.min() >= 0.0
        assert x.sum() == pytest.approx(1.0)
        # projection of a point already on the simplex is itself
        np.testing.assert_allclose(project_to_simplex(x), x, atol=1e-12)
    np.testing.assert_allclose(project_to_simplex(np.array([5.0, 0.0])), [1.0, 0.0])


def test_lp_solve_matches_vertex_enumeration():
    rng = np.random.default_rng(8)
    solved = 0
    for trial in range(40):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        a = rng.uniform(-1.0, 2.0, (m, n))
        b = rng.uniform(-0.5, 1.5, m)
        c = rng.uniform(0.1, 2.0, n)  # positive costs keep the LP bounded
        want, _ = oracles.lp_vertex_solve(c, a, b)
        got = lp_solve(LPProblem(c, a, b))
        if want is math.inf:
            assert got.status is LPStatus.INFEASIBLE
        else:
            assert got.status is LPStatus.OPTIMAL
            assert got.objective == pytest.approx(want, rel=1e-7, abs=1e-9)
            assert np.all(a @ got.x >= b - 1e-7)
            assert float(c @ got.x) == pytest.approx(got.objective)
            solved += 1
    assert solved > 10  # the generator must produce plenty of feasible LPs


def test_lp_solve_detects_infeasible():
    # x >= 1 and -x >= 0 cannot hold together
    sol = lp_solve(LPProblem([1.0], [[1.0], [-1.0]], [1.0, 0.5]))
    assert sol.status is LPStatus.INFEASIBLE


def test_lp_cover_solve_agrees_with_two_phase():
    rng = np.random.default_rng(21)
    for trial in range(30):
        m, n = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        a = rng.uniform(0.0, 1.0, (m, n))
        a[rng.uniform(size=(m, n)) < 0.3] = 0.0
        a[:, 0] += 0.05  # at least one positive entry per row
        b = rng.uniform(0.0, 2.0, m)
        cover = lp_cover_solve(a, b)
        ref = lp_solve(LPProblem(np.ones(n), a, b))
        assert cover.status is LPStatus.OPTIMAL
        assert ref.status is LPStatus.OPTIMAL
        assert cover.objective == pytest.approx(ref.objective, rel=1e-7, abs=1e-9)
        assert np.all(a @ cover.x >= b - 1e-7)


def test_lp_cover_rejects_bad_data():
    with pytest.raises(ValueError):
        lp_cover_solve(np.array([[-1.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        lp_cover_solve(np.array([[1.0]]), np.array([np.inf]))


def test_lp_cover_infeasible_row_raises():
    # a zero row with positive demand cannot be covered
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([1.0, 1.0])
    sol = lp_cover_solve(a, b)
    assert sol.status is LPStatus.INFEASIBLE
