"""Domination witnesses: the cheapest discrete measure certifying a
summing inequality, found by linear programming.

Given grid entries g_1..g_G (functionals, or functional families) and
test vectors u_1..u_T, find weights mu on the grid and the smallest C
with

    S(u_t) <= C * (sum_i mu_i * R(g_i, u_t)^p)^(1/p)    for all t,

where S is the summing-side evaluation of the operator at u_t and R the
grid-side evaluation.  Substituting nu = C^p * mu makes this the LP

    minimize sum(nu)  subject to  sum_i nu_i R(g_i,u_t)^p >= S(u_t)^p,

whose optimum gives C = (sum nu)^(1/p) and mu = nu / sum(nu).  Two
instantiations are provided: "weak" (R = a plain functional pairing,
S = the l_s profile of the image against the best of a family list) and
"aniso" (R = the l_s profile of a domain family, S = the image norm).

Grids discretize the dual ball, so C carries discretization error; each
witness therefore reports the max relative violation on its training
vectors (bounded by the LP tolerance) and on a fresh holdout set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .opnorms import LinearOperator
from .optimize import LPStatus, NumericFailure, lp_cover_solve
from .seqnorms import DiscreteMeasure, FunctionalFamily
from .spaces import (
    DimensionMismatchError,
    Space,
    dual_extreme_points,
    lp_along,
    random_unit_functionals,
    random_unit_vectors,
)

_EPS = 1e-12  # floor for relative violations at S = 0


@dataclass(frozen=True)
class FamilyMeasure:
    """Probability weights over functional families."""

    families: tuple[FunctionalFamily, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.families),):
            raise DimensionMismatchError("one weight per family required")
        if np.any(w < -1e-12) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights > 0.0))


@dataclass
class DominationWitness:
    """A constant and measure dominating an operator on a test grid."""

    kind: str  # "weak" | "aniso"
    constant: float
    weights: np.ndarray
    atoms: np.ndarray | None
    families: tuple[FunctionalFamily, ...] | None
    params: dict
    train_residual: float = 0.0
    holdout_residual: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def C(self) -> float:
        return self.constant

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights > 0.0))

    @property
    def measure(self):
        if self.kind == "weak":
            return DiscreteMeasure(self.atoms, self.weights, self.params.get("domain"))
        return FamilyMeasure(self.families, self.weights)


def build_dual_grid(space: Space, count: int, seed: int = 0) -> np.ndarray:
    """At least ``count`` unit functionals on ``space``: every enumerable
    dual-ball extreme point first, then an even angular sweep on 2-d
    spaces, then seeded dual-sphere samples."""
    if count < 1:
        raise ValueError("count must be >= 1")
    ext = dual_extreme_points(space)
    rows = [] if ext is None else [ext]
    have = 0 if ext is None else ext.shape[0]
    if space.dim == 2 and have < count:
        sweep = max(1, (count - have) // 2)
        theta = np.arange(sweep) * math.pi / sweep
        fans = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        fans = fans / space.dual().norm_rows(fans)[:, None]
        rows.append(fans)
        have += sweep
    if have < count:
        rng = np.random.default_rng((seed, 211))
        rows.append(random_unit_functionals(space, count - have, rng))
    return np.vstack(rows)


def build_family_grid(
    space: Space, r: float, count: int, seed: int = 0, max_atoms: int = 3
) -> list[FunctionalFamily]:
    """At least ``count`` functional families on ``space`` with aggregate
    l_r norm exactly 1: single-atom families at the enumerable dual
    vertices first, then alternating frame families (rows of an
    orthonormal frame, balanced across directions — an even angular
    sweep on 2-d spaces, seeded random frames otherwise) and families
    of 1..max_atoms independent random atoms."""
    if count < 1:
        raise ValueError("count must be >= 1")
    r = float(r)
    fams: list[FunctionalFamily] = []
    ext = dual_extreme_points(space)
    if ext is not None:
        fams.extend(FunctionalFamily(space, row[None, :], r) for row in ext)
    rng = np.random.default_rng((seed, 223))
    need = max(0, count - len(fams))
    dual = space.dual()
    for i in range(need):
        k = 1 + i % max_atoms
        if i % 2 == 0:
            k = min(k, space.dim)
            if space.dim == 2:
                theta = math.pi * i / need
                c, sn = math.cos(theta), math.sin(theta)
                frame = np.array([[c, sn], [-sn, c]])
            else:
                frame, _ = np.linalg.qr(rng.standard_normal((space.dim, space.dim)))
                frame = frame.T
            atoms = frame[:k]
            atoms = atoms / dual.norm_rows(atoms)[:, None]
        else:
            atoms = random_unit_functionals(space, k, rng)
        # unit atoms make the aggregate exactly k^(1/r)
        fams.append(FunctionalFamily(space, atoms / k ** (1.0 / r), r))
    return fams


def build_test_vectors(
    space: Space, count: int, seed: int = 0, witness_vectors=()
) -> np.ndarray:
    """Unit test vectors: the normalized basis, then any supplied witness
    vectors, then seeded random unit vectors up to ``count``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rows = []
    for i in range(space.dim):
        e = np.zeros(space.dim)
        e[i] = 1.0
        rows.append(e / space.norm(e))
    for w in np.atleast_2d(np.asarray(witness_vectors, dtype=float)) if len(witness_vectors) else []:
        n = space.norm(w)
        if n > 0.0:
            rows.append(w / n)
    if len(rows) < count:
        rng = np.random.default_rng((seed, 227))
        rows.extend(random_unit_vectors(space, count - len(rows), rng))
    return np.vstack(rows)


def _radii_weak(atoms: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return np.abs(vectors @ atoms.T)


def _radii_aniso(families, vectors: np.ndarray, s: float) -> np.ndarray:
    cols = [lp_along(fam.atoms @ vectors.T, s, axis=0) for fam in families]
    return np.stack(cols, axis=1)


def _rhs_weak(T: LinearOperator, families, vectors: np.ndarray, s: float) -> np.ndarray:
    images = vectors @ T.matrix.T
    best = np.zeros(vectors.shape[0])
    for fam in families:
        np.maximum(best, lp_along(fam.atoms @ images.T, s, axis=0), out=best)
    return best


def _rhs_aniso(T: LinearOperator, vectors: np.ndarray) -> np.ndarray:
    return T.codomain.norm_rows(vectors @ T.matrix.T)


def _dominated_values(radii: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    return (radii**p @ weights) ** (1.0 / p)


def _solve_lp(radii: np.ndarray, rhs: np.ndarray, p: float):
    """Minimal nu >= 0 with radii^p @ nu >= rhs^p.  Rows are scaled to a
    unit largest entry (test vectors with tiny summing values would
    otherwise produce wildly ill-conditioned rows) and the covering
    structure is solved on the LP dual, which needs no phase 1."""
    keep = rhs > 0.0
    grid_size = radii.shape[1]
    if not np.any(keep):
        return np.zeros(grid_size), 0
    a = radii[keep] ** p
    b = rhs[keep] ** p
    scale = a.max(axis=1)
    dead = scale <= 0.0
    if np.any(dead):
        raise NumericFailure(
            "domination LP infeasible: no grid entry sees test vector(s) "
            f"{np.flatnonzero(keep)[dead].tolist()}; refine the grid"
        )
    a /= scale[:, None]
    b = b / scale
    sol = lp_cover_solve(a, b)
    if sol.status is LPStatus.INFEASIBLE:
        raise NumericFailure("domination LP infeasible; refine the grid")
    if sol.status is not LPStatus.OPTIMAL:
        raise NumericFailure(f"domination LP ended with status {sol.status}")
    nu = np.maximum(sol.x, 0.0)
    # nu comes from dual reduced costs; inflate away any float-level
    # primal shortfall so the training constraints hold exactly
    cover = a @ nu
    live = b > 0.0
    if np.any(live):
        shortfall = float(np.max(b[live] / np.maximum(cover[live], 1e-300)))
        if shortfall > 1.0 + 1e-6:
            raise NumericFailure("covering LP solution violates its constraints")
        if shortfall > 1.0:
            nu = nu * shortfall
    rows = int(a.shape[0])
    # basic feasible solution: support can never exceed the row count
    assert np.count_nonzero(nu > 0.0) <= rows
    return nu, rows


def _finish(kind, T, p, nu, rows_kept, radii, rhs, train_vectors, holdout, params, extra):
    grid_size = radii.shape[1]
    total = float(nu.sum())
    if total <= 0.0:
        constant = 0.0
        weights = np.full(grid_size, 1.0 / grid_size)
    else:
        constant = total ** (1.0 / p)
        weights = nu / total
    w = DominationWitness(
        kind,
        constant,
        weights,
        extra.get("atoms"),
        extra.get("families"),
        params,
        meta={
            "lp_objective": total,
            "rows_kept": rows_kept,
            "grid_size": grid_size,
            "test_count": int(train_vectors.shape[0]),
            "nu": nu,
        },
    )
    w.train_residual = _residual(w, radii, rhs)
    if holdout is not None and holdout.shape[0] > 0:
        w.holdout_residual = verify_domination(w, T, None, holdout)
    return w


def _residual(witness: DominationWitness, radii: np.ndarray, rhs: np.ndarray) -> float:
    vals = _dominated_values(radii, witness.weights, witness.params["p"])
    gaps = (rhs - witness.constant * vals) / np.maximum(rhs, _EPS)
    return float(gaps.max()) if gaps.size else 0.0


def domination_lp_weak(
    T: LinearOperator,
    s: float,
    p: float,
    r: float,
    dual_grid: np.ndarray,
    xstar_fams,
    test_vectors: np.ndarray,
    *,
    holdout_count: int = 32,
    holdout_seed: int = 101,
) -> DominationWitness:
    """Dominating measure on domain functionals: for every test vector,
    the best family's l_s profile of the image is at most C times the
    mu-average p-mean of the functional pairings."""
    s, p, r = float(s), float(p), float(r)
    if math.isinf(p) or p < 1.0 or math.isnan(p):
        raise ValueError(f"p must be finite and >= 1 for the LP reduction, got {p}")
    fams = tuple(xstar_fams)
    if not fams:
        raise ValueError("xstar_fams must be nonempty")
    for fam in fams:
        if fam.space != T.codomain:
            raise DimensionMismatchError("xstar families must live on the codomain")
        if not fam.feasible():
            raise ValueError("every xstar family must have aggregate norm <= 1")
    atoms = np.atleast_2d(np.asarray(dual_grid, dtype=float))
    if atoms.shape[0] < 1 or atoms.shape[1] != T.domain.dim:
        raise DimensionMismatchError("dual grid must be nonempty domain functionals")
    vectors = T.domain.check_matrix(test_vectors)
    radii = _radii_weak(atoms, vectors)
    rhs = _rhs_weak(T, fams, vectors, s)
    nu, rows = _solve_lp(radii, rhs, p)
    holdout = build_test_vectors(T.domain, holdout_count, seed=holdout_seed)
    params = {"s": s, "p": p, "r": r, "xstar_families": fams, "domain": T.domain}
    return _finish("weak", T, p, nu, rows, radii, rhs, vectors, holdout, params,
                   {"atoms": atoms})


def domination_lp_aniso(
    T: LinearOperator,
    p: float,
    s: float,
    r: float,
    family_grid,
    test_vectors: np.ndarray,
    *,
    holdout_count: int = 32,
    holdout_seed: int = 101,
) -> DominationWitness:
    """Dominating measure on domain functional families: for every test
    vector, the image norm is at most C times the mu-average p-mean of
    the families' l_s pairing profiles."""
    p, s, r = float(p), float(s), float(r)
    if math.isinf(p) or p < 1.0 or math.isnan(p):
        raise ValueError(f"p must be finite and >= 1 for the LP reduction, got {p}")
    fams = tuple(family_grid)
    if not fams:
        raise ValueError("family_grid must be nonempty")
    for fam in fams:
        if fam.space != T.domain:
            raise DimensionMismatchError("grid families must live on the domain")
        if not fam.feasible():
            raise ValueError("every grid family must have aggregate norm <= 1")
    vectors = T.domain.check_matrix(test_vectors)
    radii = _radii_aniso(fams, vectors, s)
    rhs = _rhs_aniso(T, vectors)
    nu, rows = _solve_lp(radii, rhs, p)
    holdout = build_test_vectors(T.domain, holdout_count, seed=holdout_seed)
    params = {"s": s, "p": p, "r": r, "domain": T.domain}
    return _finish("aniso", T, p, nu, rows, radii, rhs, vectors, holdout, params,
                   {"families": fams})


def verify_domination(
    witness: DominationWitness,
    T: LinearOperator,
    params: dict | None,
    fresh_vectors: np.ndarray,
) -> float:
    """Max relative violation of the domination inequality on fresh
    vectors: (S - C * mu-average) / max(S, 1e-12).  Nonpositive means
    the witness dominates the fresh set."""
    prm = dict(witness.params)
    if params:
        prm.update(params)
    vectors = T.domain.check_matrix(fresh_vectors)
    s, p = prm["s"], prm["p"]
    if witness.kind == "weak":
        radii = _radii_weak(witness.atoms, vectors)
        rhs = _rhs_weak(T, prm["xstar_families"], vectors, s)
    elif witness.kind == "aniso":
        radii = _radii_aniso(witness.families, vectors, s)
        rhs = _rhs_aniso(T, vectors)
    else:
        raise ValueError(f"unknown witness kind {witness.kind!r}")
    vals = _dominated_values(radii, witness.weights, p)
    gaps = (rhs - witness.constant * vals) / np.maximum(rhs, _EPS)
    return float(gaps.max()) if gaps.size else 0.0
