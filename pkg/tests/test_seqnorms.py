import math

import numpy as np
import pytest

from anisum.seqnorms import (
    DiscreteMeasure,
    Factorization,
    FunctionalFamily,
    SequenceFamily,
    aniso_norm,
    aniso_objective,
    holder_mixed_bound,
    maurey_norm,
    maurey_value,
    mixed_conjugate_index,
    mixed_norm,
    mixed_upper,
    psi_apply,
    strong_norm,
    weak_norm,
)
from anisum.seqnorms import _stationary_functional
from anisum.spaces import DegenerateRegimeError, DimensionMismatchError, Space

import oracles


def _random_space(rng, dims=(1, 2, 3), kinds=(1.0, 1.5, 2.0, 3.0, math.inf)):
    dim = int(rng.choice(dims))
    p = float(rng.choice(kinds))
    weights = rng.uniform(0.5, 2.0, dim) if rng.random() < 0.4 else None
    return Space(dim, p, weights)


def _random_family(rng, space, max_m=4):
    m = int(rng.integers(1, max_m + 1))
    return SequenceFamily(space, rng.uniform(-1.0, 1.0, (m, space.dim)))


# ---------------------------------------------------------------------------
# families and strong norm


def test_sequence_family_validation():
    space = Space(2, 2.0)
    with pytest.raises(ValueError):
        SequenceFamily(space, np.zeros((0, 2)))
    with pytest.raises(DimensionMismatchError):
        SequenceFamily(space, np.zeros((2, 3)))
    fam = SequenceFamily(space, [[1.0, 0.0]])
    assert len(fam) == 1
    assert not fam.items.flags.writeable
    np.testing.assert_allclose(fam.scaled(2.0).items, [[2.0, 0.0]])


def test_functional_family_aggregate_and_feasibility():
    space = Space(2, 2.0)
    fam = FunctionalFamily(space, [[0.6, 0.0], [0.0, 0.8]], 2.0)
    # dual of unweighted l_2 is l_2, so the aggregate is the flat l_2 size
    assert fam.aggregate_norm == pytest.approx(1.0)
    assert fam.feasible()
    assert not FunctionalFamily(space, [[2.0, 0.0]], 2.0).feasible()
    with pytest.raises(ValueError):
        FunctionalFamily(space, [[1.0, 0.0]], 0.5)


def test_strong_norm_closed_form():
    space = Space(2, 2.0)
    seq = SequenceFamily(space, [[3.0, 4.0], [0.0, 1.0]])
    assert strong_norm(seq, 1.0).value == pytest.approx(6.0)
    assert strong_norm(seq, 2.0).value == pytest.approx(math.sqrt(26.0))
    assert strong_norm(seq, math.inf).value == pytest.approx(5.0)
    est = strong_norm(seq, 1.0)
    assert est.bound_kind == "exact" and est.converged


def test_strong_norm_weighted_measure_convention():
    rng = np.random.default_rng(5)
    for p in (1.0, 1.5, 2.0, math.inf):
        w = rng.uniform(0.5, 2.0, 3)
        space = Space(3, p, w)
        items = rng.uniform(-1.0, 1.0, (4, 3))
        got = strong_norm(SequenceFamily(space, items), 2.0).value
        want = oracles.lp_profile(
            [oracles.weighted_norm(v, p, w) for v in items], 2.0
        )
        assert got == pytest.approx(want, rel=1e-12)


def test_strong_norm_rejects_bad_index():
    seq = SequenceFamily(Space(1, 2.0), [[1.0]])
    with pytest.raises(ValueError):
        strong_norm(seq, 0.5)
    with pytest.raises(ValueError):
        strong_norm(seq, math.nan)


# ---------------------------------------------------------------------------
# weak norm


def test_weak_norm_matches_enumeration_oracle():
    rng = np.random.default_rng(11)
    for trial in range(60):
        dim = int(rng.integers(1, 5))
        space_p = float(rng.choice([1.0, math.inf]))
        weights = rng.uniform(0.5, 2.0, dim) if trial % 3 == 0 else None
        space = Space(dim, space_p, weights)
        items = rng.uniform(-1.0, 1.0, (int(rng.integers(1, 4)), dim))
        p = float(rng.choice([1.0, 1.5, 2.0, math.inf]))
        est = weak_norm(SequenceFamily(space, items), p)
        want = oracles.weak_norm_enum(items, p, space_p, weights)
        assert est.bound_kind == "exact"
        assert est.value == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_weak_norm_force_search_agrees_with_enumeration():
    rng = np.random.default_rng(12)
    for trial in range(12):
        dim = int(rng.integers(1, 4))
        space_p = float(rng.choice([1.0, math.inf]))
        space = Space(dim, space_p)
        items = rng.uniform(-1.0, 1.0, (int(rng.integers(1, 4)), dim))
        p = float(rng.choice([1.0, 2.0]))
        est = weak_norm(SequenceFamily(space, items), p, force_search=True, seed=trial)
        want = oracles.weak_norm_enum(items, p, space_p)
        assert est.bound_kind == "lower"
        assert est.value == pytest.approx(want, rel=1e-9)


def test_weak_norm_svd_mode_is_top_singular_value():
    rng = np.random.default_rng(13)
    w = rng.uniform(0.5, 2.0, 3)
    space = Space(3, 2.0, w)
    items = rng.uniform(-1.0, 1.0, (4, 3))
    est = weak_norm(SequenceFamily(space, items), 2.0)
    # ||<x_j, f>||_2 over the dual sphere transports to an unweighted
    # operator-norm problem under the w^(1/2) change of variables
    top = np.linalg.svd(items * np.sqrt(w), compute_uv=False)[0]
    assert est.meta["mode"] == "svd"
    assert est.value == pytest.approx(float(top), rel=1e-12)


def test_weak_norm_certificate_attains_value():
    rng = np.random.default_rng(14)
    for trial in range(20):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        p = float(rng.choice([1.0, 1.5, 2.0, math.inf]))
        est = weak_norm(seq, p, seed=trial)
        f = np.asarray(est.certificate.point, dtype=float)
        assert space.dual_norm(f) <= 1.0 + 1e-9
        profile = oracles.lp_profile(seq.items @ f, p)
        assert profile == pytest.approx(est.value, rel=1e-9, abs=1e-12)


def test_weak_norm_warm_start_never_lowers():
    rng = np.random.default_rng(15)
    space = Space(3, 1.5)
    seq = SequenceFamily(space, rng.uniform(-1.0, 1.0, (3, 3)))
    cold = weak_norm(seq, 1.5, force_search=True, restarts=2, seed=0)
    warm = weak_norm(
        seq, 1.5, force_search=True, restarts=2, seed=0,
        warm_functionals=[cold.certificate.point],
    )
    assert warm.value >= cold.value - 1e-12


def test_weak_norm_rejects_bad_profile_index():
    seq = SequenceFamily(Space(2, 2.0), [[1.0, 0.0]])
    with pytest.raises(ValueError):
        weak_norm(seq, 0.9)
    with pytest.raises(ValueError):
        weak_norm(seq, math.nan)


def test_stationary_functional_finds_single_item_optimum():
    # for one item the weak optimum is its norming functional; the
    # fixed-point map should land there (up to sign) from a poor start
    rng = np.random.default_rng(16)
    for p in (1.5, 2.0, 3.0):
        space = Space(3, p)
        v = rng.uniform(-1.0, 1.0, 3)
        items = v[None, :]
        start = space.norm_gradient(rng.uniform(-1.0, 1.0, 3))
        f = _stationary_functional(space, items, 2.0, start)
        assert abs(abs(float(items[0] @ f)) - space.norm(v)) < 1e-9


# ---------------------------------------------------------------------------
# anisotropic norm


def test_aniso_rejects_and_degenerates():
    seq = SequenceFamily(Space(2, 2.0), [[1.0, 0.0]])
    with pytest.raises(ValueError):
        aniso_norm(seq, math.inf, 1.0, 1.0)
    with pytest.raises(ValueError):
        aniso_norm(seq, 2.0, 0.5, 1.0)
    with pytest.raises(DegenerateRegimeError):
        aniso_norm(seq, 1.5, 1.0, 2.0)  # s < r: only the zero sequence


def test_aniso_weak_equivalent_regime_delegates():
    rng = np.random.default_rng(17)
    space = Space(2, 1.0)
    seq = SequenceFamily(space, rng.uniform(-1.0, 1.0, (3, 2)))
    est = aniso_norm(seq, 1.5, 2.0, 1.0, seed=3)  # s <= q
    wk = weak_norm(seq, 2.0, seed=3)
    assert est.meta["regime"] == "weak-equivalent"
    assert est.value == pytest.approx(wk.value, rel=1e-12)
    assert est.meta["k_used"] == 1
    assert est.meta["family"].feasible()


def test_aniso_chain_between_weak_and_strong():
    rng = np.random.default_rng(18)
    for trial in range(25):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        q = float(rng.choice([1.0, 1.5, 2.0]))
        s = q + float(rng.choice([0.5, 1.0, 2.0]))
        r = min(s, float(rng.choice([1.0, 1.5, 2.0])))
        wk = weak_norm(seq, q, seed=trial)
        an = aniso_norm(seq, s, q, r, seed=trial)
        st = strong_norm(seq, q)
        assert an.value >= wk.value - 1e-9
        assert an.value <= st.value * (1.0 + 1e-9)


def test_aniso_certificate_is_feasible_and_attains_value():
    rng = np.random.default_rng(19)
    for trial in range(15):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        q = float(rng.choice([1.0, 1.5]))
        s = q + 1.0
        r = min(s, float(rng.choice([1.0, 2.0])))
        est = aniso_norm(seq, s, q, r, seed=trial)
        fam = est.meta["family"]
        assert fam.feasible(slack=1e-9)
        assert aniso_objective(seq, fam, s, q) == pytest.approx(est.value, rel=1e-12)


def test_aniso_basis_sqrt_n_anchor():
    # (2,1,2) on the standard basis of l_2^n; dense grid agrees at n <= 2
    for n in (1, 2, 3, 4):
        seq = SequenceFamily(Space(n, 2.0), np.eye(n))
        est = aniso_norm(seq, 2.0, 1.0, 2.0, seed=n)
        assert est.value == pytest.approx(math.sqrt(n), rel=1e-7)
        assert est.value == pytest.approx(
            oracles.balanced_family_value(n), rel=1e-7
        )
    grid = oracles.basis_aniso_bruteforce(2)
    assert grid <= math.sqrt(2.0) + 1e-9
    est2 = aniso_norm(SequenceFamily(Space(2, 2.0), np.eye(2)), 2.0, 1.0, 2.0, seed=2)
    assert est2.value >= grid - 1e-4  # grid resolution, not search error


def test_aniso_never_below_sampled_feasible_families():
    rng = np.random.default_rng(20)
    n = 3
    seq = SequenceFamily(Space(n, 2.0), np.eye(n))
    est = aniso_norm(seq, 2.0, 1.0, 2.0, seed=1)
    for val in oracles.sampled_family_values(n, 200, rng):
        assert val <= est.value + 1e-9


def test_aniso_warm_families_never_lower():
    rng = np.random.default_rng(21)
    space = Space(3, 3.0)
    seq = SequenceFamily(space, rng.uniform(-1.0, 1.0, (3, 3)))
    first = aniso_norm(seq, 2.0, 1.0, 1.5, seed=0, restarts=2)
    again = aniso_norm(
        seq, 2.0, 1.0, 1.5, seed=0, restarts=2,
        warm_families=[first.meta["family"]],
    )
    assert again.value >= first.value - 1e-12


def test_aniso_objective_checks_inputs():
    seq = SequenceFamily(Space(2, 2.0), [[1.0, 0.0]])
    fam = FunctionalFamily(Space(2, 2.0), [[1.0, 0.0]], 2.0)
    other = FunctionalFamily(Space(3, 2.0), [[1.0, 0.0, 0.0]], 2.0)
    assert aniso_objective(seq, fam, 2.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatchError):
        aniso_objective(seq, other, 2.0, 1.0)
    with pytest.raises(ValueError):
        aniso_objective(seq, fam, 0.5, 1.0)


# ---------------------------------------------------------------------------
# mixed norm


def test_mixed_conjugate_index():
    assert mixed_conjugate_index(2.0, 2.0) == math.inf
    assert mixed_conjugate_index(2.0, 1.0) == pytest.approx(2.0)
    assert mixed_conjugate_index(3.0, 1.5) == pytest.approx(3.0)


def test_factorization_validation_and_reconstruct():
    space = Space(2, 2.0)
    y = SequenceFamily(space, [[1.0, 0.0], [0.0, 1.0]])
    fact = Factorization([2.0, 0.5], y)
    np.testing.assert_allclose(fact.reconstruct(), [[2.0, 0.0], [0.0, 0.5]])
    with pytest.raises(DimensionMismatchError):
        Factorization([1.0], y)
    with pytest.raises(ValueError):
        Factorization([1.0, -1.0], y)


def test_mixed_upper_regime_errors():
    seq = SequenceFamily(Space(2, 2.0), [[1.0, 0.0]])
    with pytest.raises(DegenerateRegimeError):
        mixed_upper(seq, 1.0, 2.0)  # s < q
    with pytest.raises(DegenerateRegimeError):
        mixed_upper(seq, math.inf, 1.0)
    with pytest.raises(DegenerateRegimeError):
        mixed_upper(seq, 2.0, 0.5)


def test_mixed_upper_zero_family():
    seq = SequenceFamily(Space(2, 2.0), np.zeros((3, 2)))
    est = mixed_upper(seq, 2.0, 1.0)
    assert est.value == 0.0 and est.converged
    np.testing.assert_allclose(est.certificate.reconstruct(), np.zeros((3, 2)))


def test_mixed_upper_factorization_reconstructs_items():
    rng = np.random.default_rng(22)
    for trial in range(10):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        est = mixed_upper(seq, 2.0, 1.0, seed=trial)
        np.testing.assert_allclose(est.certificate.reconstruct(), seq.items, atol=1e-9)
        # the bound it certifies: l_t of tau times weak-s of the y part
        tau_nz = est.certificate.tau[est.certificate.tau > 0.0]
        assert est.value <= oracles.lp_profile(tau_nz, est.meta["tau_index"]) \
            * weak_norm(est.certificate.y, 2.0, seed=trial).value * (1.0 + 1e-6) + 1e-12


def test_mixed_upper_collapses_to_weak_at_equal_indices():
    rng = np.random.default_rng(23)
    for trial in range(8):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        s = float(rng.choice([1.5, 2.0, 3.0]))
        up = mixed_upper(seq, s, s, seed=trial)
        wk = weak_norm(seq, s, seed=trial)
        assert abs(up.value - wk.value) / (1.0 + wk.value) < 1e-6


def test_mixed_norm_interval_orders_and_collapses():
    rng = np.random.default_rng(24)
    for trial in range(6):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        iv = mixed_norm(seq, 2.0, 1.0, seed=trial)
        assert iv.lower.value <= iv.upper.value * (1.0 + 1e-9) + 1e-12
        assert iv.rel_gap >= -1e-9
    same = mixed_norm(seq, 2.0, 2.0, seed=0)
    assert same.lower.value == same.upper.value
    with pytest.raises(DegenerateRegimeError):
        mixed_norm(seq, 1.0, 2.0)


# ---------------------------------------------------------------------------
# measure form


def test_discrete_measure_validation():
    atoms = np.array([[1.0, 0.0], [0.0, 1.0]])
    mu = DiscreteMeasure(atoms, [0.5, 0.5], Space(2, 2.0))
    assert mu.support_size == 2
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, [0.7, 0.7])
    with pytest.raises(ValueError):
        DiscreteMeasure(atoms, [1.5, -0.5])
    with pytest.raises(DimensionMismatchError):
        DiscreteMeasure(atoms, [1.0])
    with pytest.raises(ValueError):
        DiscreteMeasure(2.0 * atoms, [0.5, 0.5], Space(2, 2.0))


def test_maurey_value_manual():
    space = Space(2, 2.0)
    seq = SequenceFamily(space, [[1.0, 0.0], [0.0, 2.0]])
    mu = DiscreteMeasure(np.eye(2), [0.25, 0.75], space)
    # per item: (sum_k w_k |<atom_k, x>|^s)^(1/s), then the l_q profile
    want_items = [
        (0.25 * 1.0**2) ** 0.5,
        (0.75 * 2.0**2) ** 0.5,
    ]
    want = sum(want_items)
    assert maurey_value(seq, mu, 2.0, 1.0) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        maurey_value(seq, mu, math.inf, 1.0)
    with pytest.raises(DimensionMismatchError):
        maurey_value(SequenceFamily(Space(3, 2.0), [[1.0, 0, 0]]), mu, 2.0, 1.0)


def test_maurey_norm_matches_aniso_at_r_equal_s():
    rng = np.random.default_rng(25)
    for trial in range(5):
        space = _random_space(rng, dims=(1, 2))
        seq = _random_family(rng, space, max_m=3)
        q = float(rng.choice([1.0, 1.5]))
        s = q + 1.0
        an = aniso_norm(seq, s, q, s, seed=trial)
        ma = maurey_norm(seq, s, q, seed=trial)
        assert abs(ma.value - an.value) / max(an.value, 1e-12) < 1e-6
        mu = ma.certificate
        assert maurey_value(seq, mu, s, q) == pytest.approx(ma.value, rel=1e-12)


def test_maurey_norm_regime_errors():
    seq = SequenceFamily(Space(2, 2.0), [[1.0, 0.0]])
    with pytest.raises(DegenerateRegimeError):
        maurey_norm(seq, 2.0, 2.0)
    with pytest.raises(DegenerateRegimeError):
        maurey_norm(seq, math.inf, 1.0)


# ---------------------------------------------------------------------------
# psi image and the Hoelder bound


def test_psi_apply_bound_and_errors():
    rng = np.random.default_rng(26)
    for trial in range(20):
        space = _random_space(rng)
        k = int(rng.integers(1, 4))
        atoms = rng.uniform(-1.0, 1.0, (k, space.dim))
        r = float(rng.choice([1.0, 1.5, 2.0]))
        s = r + float(rng.choice([0.0, 1.0]))
        fam = FunctionalFamily(space, atoms, r)
        v = rng.uniform(-1.0, 1.0, space.dim)
        out = psi_apply(fam, v, s)
        assert out.s_norm <= fam.aggregate_norm * space.norm(v) * (1.0 + 1e-9)
        np.testing.assert_allclose(out.image, atoms @ v)
    fam = FunctionalFamily(Space(2, 2.0), [[1.0, 0.0]], 2.0)
    with pytest.raises(DegenerateRegimeError):
        psi_apply(fam, [1.0, 0.0], 1.5)  # r > s
    with pytest.raises(ValueError):
        psi_apply(fam, [1.0, 0.0], 0.5)


def test_holder_mixed_bound_orders():
    rng = np.random.default_rng(27)
    for trial in range(15):
        space = _random_space(rng)
        seq = _random_family(rng, space)
        k = int(rng.integers(1, 4))
        atoms = rng.uniform(-1.0, 1.0, (k, space.dim))
        r = float(rng.choice([1.0, 2.0]))
        s = r + float(rng.choice([0.0, 0.5, 1.0]))
        fam = FunctionalFamily(space, atoms, r)
        got = holder_mixed_bound(seq, fam, s, seed=trial)
        assert got.lhs <= got.rhs * (1.0 + 1e-9) + 1e-12
