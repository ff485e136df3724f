"""Independent reference implementations used to pin expected values.

Everything here is deliberately brute force — dense grids, full
enumerations, closed forms — and shares no search code with the package,
so agreement is evidence rather than tautology.
"""

import itertools
import math

import numpy as np


def dual_ball_extremes(dim, p, weights=None):
    """Extreme points of the dual unit ball of a weighted l_p space.

    Only the polytope cases: p = 1 (dual ball is a box, 2^dim sign
    patterns) and p = inf (dual ball is a cross-polytope, 2*dim spikes).
    The primal norm is ||w * v||_p, so the dual ball scales by w.
    """
    w = np.ones(dim) if weights is None else np.asarray(weights, dtype=float)
    if p == 1.0:
        rows = [w * np.array(signs) for signs in itertools.product((1.0, -1.0), repeat=dim)]
        return np.stack(rows)
    if math.isinf(p):
        rows = []
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = w[i]
            rows.extend([e, -e])
        return np.stack(rows)
    raise ValueError(f"no polytope enumeration for p={p}")


def lp_profile(values, p):
    a = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float((a ** p).sum() ** (1.0 / p))


def weak_norm_enum(items, p, space_p, weights=None):
    """Weak norm by full extreme-point enumeration (polytope duals only)."""
    items = np.asarray(items, dtype=float)
    ext = dual_ball_extremes(items.shape[1], space_p, weights)
    return max(lp_profile(items @ f, p) for f in ext)


def basis_aniso_bruteforce(n, angle_steps=180, mass_steps=60):
    """Grid maximum of sum_j sqrt(sum_k <e_j, f_k>^2) over two-atom
    families f_k with sum_k |f_k|_2^2 <= 1 in R^n, n <= 2.

    This is the (s,q,r) = (2,1,2) anisotropic value of the standard
    basis; the true maximum is sqrt(n).
    """
    if n == 1:
        return 1.0  # single atom +-c: value = |c| <= 1, attained at c = 1
    if n != 2:
        raise ValueError("brute force supports n <= 2 only")
    best = 0.0
    thetas = np.pi * np.arange(angle_steps) / angle_steps
    cos, sin = np.cos(thetas), np.sin(thetas)
    for t in np.linspace(0.0, 1.0, mass_steps + 1):
        c1, c2 = math.sqrt(t), math.sqrt(1.0 - t)
        # f1 = c1*(cos a, sin a), f2 = c2*(cos b, sin b); columns j give
        # the per-coordinate l_2 across atoms
        for ia in range(angle_steps):
            col1 = np.hypot(c1 * cos[ia], c2 * cos)
            col2 = np.hypot(c1 * sin[ia], c2 * sin)
            best = max(best, float((col1 + col2).max()))
    return best


def balanced_family_value(n):
    """Value of the n-atom family e_k / sqrt(n) on the standard basis
    under the (2,1,2) aggregate: equals sqrt(n) by direct computation."""
    atoms = np.eye(n) / math.sqrt(n)
    cols = np.sqrt((atoms ** 2).sum(axis=0))
    return float(cols.sum())


def sampled_family_values(n, trials, rng):
    """(2,1,2)-values of random feasible families on the basis of R^n.

    Every value is sum_j ||column_j||_2 with sum of squared column norms
    equal to the squared aggregate <= 1, so by Cauchy-Schwarz none may
    exceed sqrt(n).
    """
    out = []
    for _ in range(trials):
        k = int(rng.integers(1, n + 2))
        atoms = rng.standard_normal((k, n))
        agg = math.sqrt(float((atoms ** 2).sum()))
        atoms /= max(agg, 1e-300) / rng.uniform(0.2, 1.0)
        cols = np.sqrt((atoms ** 2).sum(axis=0))
        out.append(float(cols.sum()))
    return out


def hilbert_schmidt(matrix):
    return float(np.sqrt((np.asarray(matrix, dtype=float) ** 2).sum()))


def lp_vertex_solve(c, a, b):
    """Minimize c.x st a x >= b, x >= 0 by enumerating basic solutions.

    Returns (value, x) or (inf, None) when infeasible. Exponential in the
    number of variables — keep n small.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    # stack constraint normals: rows of a (>= b) and the axes (>= 0)
    normals = np.vstack([a, np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n)])
    best, best_x = math.inf, None
    for rows in itertools.combinations(range(m + n), n):
        sub = normals[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, rhs[list(rows)])
        if np.any(x < -1e-9) or np.any(a @ x < b - 1e-9):
            continue
        val = float(c @ x)
        if val < best - 1e-15:
            best, best_x = val, x
    return best, best_x


def rank_one_summing_value(u_norm_cod, phi_dual_norm_dom):
    """pi_{q,p} of x -> phi(x) u is ||u|| * ||phi||_* for every p <= q:
    the single-vector family aligned with phi attains it, and Holder
    caps every other family at the same product."""
    return u_norm_cod * phi_dual_norm_dom


def weighted_norm(v, p, weights=None):
    """Measure-weighted l_p: (sum w_i |v_i|^p)^(1/p), max w_i |v_i| at inf."""
    a = np.abs(np.asarray(v, dtype=float))
    w = np.ones(a.shape[-1]) if weights is None else np.asarray(weights, dtype=float)
    if math.isinf(p):
        return float((w * a).max())
    return float((w * a ** p).sum() ** (1.0 / p))


def dual_exponent(p):
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def weighted_dual_norm(f, p, weights=None):
    """Dual of the measure-weighted l_p via the scaling u = w^(1/p) v,
    under which the pairing transports to an unweighted l_p duality."""
    f = np.asarray(f, dtype=float)
    w = np.ones(f.shape[-1]) if weights is None else np.asarray(weights, dtype=float)
    scale = w if math.isinf(p) else w ** (1.0 / p)
    return lp_profile(f / scale, dual_exponent(p))
