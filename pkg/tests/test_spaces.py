import math

import numpy as np
import pytest

from anisum.spaces import (
    DimensionMismatchError,
    Regime,
    Space,
    classify_params,
    conjugate_exponent,
    dual_extreme_points,
    lp_along,
    lp_value,
    random_unit_functionals,
    random_unit_vectors,
)

import oracles


def test_lp_value_matches_manual():
    v = np.array([3.0, -4.0, 0.0])
    assert lp_value(v, 1.0) == pytest.approx(7.0)
    assert lp_value(v, 2.0) == pytest.approx(5.0)
    assert lp_value(v, math.inf) == pytest.approx(4.0)
    # lp_along reduces one axis and keeps the other
    m = np.array([[1.0, -1.0], [2.0, 2.0]])
    np.testing.assert_allclose(lp_along(m, 1.0, axis=1), [2.0, 4.0])
    np.testing.assert_allclose(lp_along(m, math.inf, axis=0), [2.0, 2.0])


def test_conjugate_exponent():
    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(math.inf) == 1.0
    assert conjugate_exponent(2.0) == pytest.approx(2.0)
    assert conjugate_exponent(1.5) == pytest.approx(3.0)


def test_space_norms_match_weighted_formula():
    rng = np.random.default_rng(5)
    for p in (1.0, 1.5, 2.0, 3.0, math.inf):
        w = rng.uniform(0.5, 2.0, 4)
        space = Space(4, p, w)
        for _ in range(10):
            v = rng.standard_normal(4)
            assert space.norm(v) == pytest.approx(oracles.weighted_norm(v, p, w))
            f = rng.standard_normal(4)
            assert space.dual().norm(f) == pytest.approx(
                oracles.weighted_dual_norm(f, p, w)
            )


def test_duality_pairing_bound_and_norming_functional():
    # |<f, v>| <= ||f||_dual * ||v||, with equality at the norming functional
    rng = np.random.default_rng(11)
    for p in (1.0, 1.3, 2.0, 4.0, math.inf):
        space = Space(3, p, rng.uniform(0.5, 2.0, 3))
        dual = space.dual()
        for _ in range(20):
            v = rng.standard_normal(3)
            f = rng.standard_normal(3)
            assert abs(f @ v) <= dual.norm(f) * space.norm(v) + 1e-12
            g = space.norming_functional(v)
            assert dual.norm(g) == pytest.approx(1.0)
            assert g @ v == pytest.approx(space.norm(v))


def test_norm_gradient_scaling_and_zero():
    space = Space(3, 1.7, np.array([1.0, 2.0, 0.5]))
    v = np.array([0.3, -1.2, 0.8])
    g = space.norm_gradient(v)
    # Euler: <g, v> = ||v|| for any positively homogeneous norm
    assert g @ v == pytest.approx(space.norm(v))
    assert not space.norm_gradient(np.zeros(3)).any()


def test_dual_extreme_points_match_enumeration():
    rng = np.random.default_rng(3)
    for p in (1.0, math.inf):
        for dim in (1, 2, 3, 4):
            w = rng.uniform(0.5, 2.0, dim)
            got = dual_extreme_points(Space(dim, p, w))
            want = oracles.dual_ball_extremes(dim, p, w)
            assert got is not None
            got_sorted = sorted(map(tuple, np.round(got, 12)))
            want_sorted = sorted(map(tuple, np.round(want, 12)))
            assert got_sorted == want_sorted
    # smooth balls have no finite extreme-point list
    assert dual_extreme_points(Space(3, 2.0)) is None
    # the cap keeps the sign enumeration from exploding
    assert dual_extreme_points(Space(40, 1.0)) is None


def test_space_validation():
    with pytest.raises(ValueError):
        Space(0, 2.0)
    with pytest.raises(ValueError):
        Space(2, 0.5)
    with pytest.raises(ValueError):
        Space(2, 2.0, np.array([1.0, -1.0]))
    with pytest.raises(DimensionMismatchError):
        Space(2, 2.0).check_vector(np.ones(3))
    with pytest.raises(DimensionMismatchError):
        Space(2, 2.0).check_matrix(np.ones((2, 3)))


def test_classify_params_regimes():
    assert classify_params(2.0, 1.0, 2.0).classification is Regime.PROPER
    assert classify_params(1.5, 1.0, 2.0).classification is Regime.DEGENERATE_ZERO
    assert classify_params(2.0, 2.0, 1.0).classification is Regime.WEAK_EQUIVALENT
    assert classify_params(2.0, 3.0, 1.0).classification is Regime.WEAK_EQUIVALENT
    assert classify_params(0.5, 1.0, 1.0).classification is Regime.REJECTED
    assert classify_params(math.nan, 1.0, 1.0).classification is Regime.REJECTED


def test_random_unit_samplers_land_on_spheres():
    rng = np.random.default_rng(9)
    space = Space(3, 1.4, np.array([0.8, 1.1, 1.9]))
    vs = random_unit_vectors(space, 50, rng)
    np.testing.assert_allclose(space.norm_rows(vs), 1.0, atol=1e-12)
    fs = random_unit_functionals(space, 50, rng)
    np.testing.assert_allclose(space.dual().norm_rows(fs), 1.0, atol=1e-12)
