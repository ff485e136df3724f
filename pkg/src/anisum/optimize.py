"""Generic seeded optimizers: multistart projected subgradient ascent for
suprema, an exchange (cutting-plane) loop for min-max problems, and a dense
two-phase primal simplex for small LPs.

Everything here is deterministic given its seed.  Maximization results are
lower bounds of the true supremum; the exchange loop returns upper bounds
of the true infimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import DEFAULTS, thread_count


class NumericFailure(ArithmeticError):
    """An internal numeric routine could not produce a usable result."""


@dataclass
class Certificate:
    """Best point found by a search, with the value attained there.

    ``value`` always equals the objective evaluated at ``point``;
    ``converged`` records whether the stopping rule (rather than the
    iteration cap) ended the search.
    """

    point: np.ndarray
    value: float
    restarts_used: int
    converged: bool
    failures: int = 0


def _pool_start(dim: int, seed: int, idx: int) -> np.ndarray:
    # first 2*dim starts sweep +-e_i, the rest are seeded unit Gaussians;
    # the pool is prefix-stable so more restarts never lose earlier starts
    if idx < 2 * dim:
        v = np.zeros(dim)
        v[idx // 2] = 1.0 if idx % 2 == 0 else -1.0
        return v
    rng = np.random.default_rng((seed, idx))
    v = rng.standard_normal(dim)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        v = np.zeros(dim)
        v[0] = 1.0
        return v
    return v / n


def _central_diff(objective, x: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = h
        g[i] = (objective(x + e) - objective(x - e)) / (2.0 * h)
        e[i] = 0.0
    return g


def _ascend(objective, projector, x0, subgradient, max_iters, tol, fd_step):
    """Projected subgradient ascent from one start.  Returns
    (point, value, converged) or None when the objective turned non-finite."""
    x = projector(np.array(x0, dtype=float))
    fx = objective(x)
    if not math.isfinite(fx):
        return None
    step = 1.0
    converged = False
    for _ in range(max_iters):
        g = subgradient(x) if subgradient is not None else _central_diff(objective, x, fd_step)
        gn = float(np.linalg.norm(g))
        if not math.isfinite(gn):
            return None
        if gn <= 1e-14:
            converged = True
            break
        d = g / gn
        t = step
        best = None
        while t >= 1e-13:
            cand = projector(x + t * d)
            fc = objective(cand)
            if not math.isfinite(fc):
                return None
            if fc > fx:
                best = (cand, fc, t)
                break
            t *= 0.5
        if best is None:
            converged = True  # no ascent along the subgradient: stationary enough
            break
        cand, fc, t = best
        gain = (fc - fx) / max(abs(fc), 1e-30)
        x, fx = cand, fc
        step = min(t * 4.0, 64.0)
        if gain < tol:
            converged = True
            break
    return x, fx, converged


def _compass_polish(objective, projector, x, fx, floor=1e-7, budget=4096):
    """Axis pattern search from (x, fx): steps through the kinks where
    the one-sided line search in _ascend reports a false stationary
    point.  Monotone in the exact objective, so always safe to apply."""
    e = np.zeros_like(x)
    delta, evals = 0.1, 0
    while delta >= floor and evals < budget:
        improved = False
        for i in range(x.size):
            e[i] = delta
            for cand in (projector(x + e), projector(x - e)):
                fc = objective(cand)
                evals += 1
                if math.isfinite(fc) and fc > fx + 1e-15 + 1e-14 * abs(fx):
                    x, fx, improved = cand, fc, True
            e[i] = 0.0
        if not improved:
            delta *= 0.5
    return x, fx


def multistart_maximize(
    objective: Callable[[np.ndarray], float],
    projector: Callable[[np.ndarray], np.ndarray],
    dim: int,
    *,
    restarts: int = DEFAULTS["restarts"],
    max_iters: int = DEFAULTS["max_iters"],
    tol: float = DEFAULTS["tol"],
    seed: int = 0,
    warm_starts: Iterable = (),
    subgradient: Callable[[np.ndarray], np.ndarray] | None = None,
    fd_step: float = DEFAULTS["fd_step"],
    polish: Callable[[np.ndarray], Iterable] | None = None,
    threads: int | None = None,
    polish_budget: int = 4096,
    polish_leaders: int = 3,
) -> Certificate:
    """Maximize ``objective`` over the feasible set encoded by ``projector``.

    ``projector`` must be idempotent on its image; every iterate is
    projected.  Caller warm starts always run before the seeded pool, and
    the pool is prefix-stable in ``restarts``, so raising ``restarts``
    never lowers the returned value.  The value is a lower bound of the
    true supremum; ties between restarts resolve to the earliest one.

    A restart whose objective turns non-finite is aborted and counted in
    ``failures``.  ``polish``, when given, maps the final point of each
    restart to extra candidate points (projected and evaluated once).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    starts = [np.asarray(w, dtype=float).ravel() for w in warm_starts]
    starts += [_pool_start(dim, seed, i) for i in range(max(0, restarts))]
    if not starts:
        raise ValueError("no restarts and no warm starts")
    for w in starts:
        if w.shape != (dim,):
            raise ValueError(f"start point of shape {w.shape} does not match dim ({dim},)")

    def run(x0):
        out = _ascend(objective, projector, x0, subgradient, max_iters, tol, fd_step)
        if out is None:
            return None
        x, fx, conv = out
        if polish is not None:
            for cand in polish(x):
                xc = projector(np.asarray(cand, dtype=float).ravel())
                fc = objective(xc)
                if math.isfinite(fc) and fc > fx:
                    x, fx = xc, fc
        return x, fx, conv

    workers = thread_count() if threads is None else threads
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(x0) for x0 in starts]

    best = None
    failures = 0
    for res in results:
        if res is None:
            failures += 1
            continue
        if best is None or res[1] > best[1]:
            best = res
    if best is None:
        raise NumericFailure("every restart hit a non-finite objective value")
    x, fx, conv = best
    if polish_budget > 0:
        # polish the leaders, not just the top point: a hair-better
        # candidate can sit in a worse basin than the runner-up
        ranked = sorted((r for r in results if r is not None),
                        key=lambda r: r[1], reverse=True)
        seen_pts: list[np.ndarray] = []
        for xc, fc, _ in ranked:
            if len(seen_pts) >= polish_leaders:
                break
            if any(float(np.linalg.norm(xc - pz)) < 1e-9 for pz in seen_pts):
                continue
            seen_pts.append(xc)
            xp, fp = _compass_polish(objective, projector, xc.copy(), fc,
                                     floor=max(1e-7, tol), budget=polish_budget)
            if fp > fx:
                x, fx = xp, fp
    return Certificate(
        point=x, value=fx, restarts_used=len(starts), converged=conv, failures=failures
    )


def exchange_minimize(
    dim: int,
    inner_oracle: Callable[[np.ndarray], Certificate],
    outer_subproblem: Callable[[Sequence[Certificate], np.ndarray], np.ndarray],
    cross_value: Callable[[np.ndarray, Certificate], float],
    initial_point,
    *,
    initial_active: Iterable[Certificate] = (),
    max_rounds: int = DEFAULTS["exchange_rounds"],
    tol: float = DEFAULTS["exchange_tol"],
) -> Certificate:
    """Minimize over outer variables the supremum the inner oracle estimates.

    Alternates (a) querying ``inner_oracle`` at the current outer point
    and adding its certificate to the active set, (b) re-minimizing, via
    ``outer_subproblem``, the max of ``cross_value`` over the active set.
    Stops when the fresh oracle value exceeds the active-set value by less
    than ``tol`` (relative).  The returned value is an upper bound of the
    true inf-sup; its ``converged`` flag reports whether the stopping rule
    fired within ``max_rounds``.
    """
    x = np.asarray(initial_point, dtype=float).ravel()
    active = list(initial_active)
    if active:
        x = np.asarray(outer_subproblem(active, x), dtype=float).ravel()
    cert = inner_oracle(x)
    rounds = 0
    converged = False
    while rounds < max_rounds:
        rounds += 1
        if active:
            held = max(cross_value(x, c) for c in active)
            if cert.value <= held + tol * max(1.0, abs(held)):
                converged = True
                break
        active.append(cert)
        if rounds == max_rounds:
            break
        x = np.asarray(outer_subproblem(active, x), dtype=float).ravel()
        cert = inner_oracle(x)
    return Certificate(point=x, value=cert.value, restarts_used=rounds, converged=converged)


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPProblem:
    """minimize c.x subject to a @ x >= b, x >= 0."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if a.ndim != 2:
            raise ValueError("constraint matrix must be 2-d")
        m, n = a.shape
        if m < 1 or n < 1:
            raise ValueError("need at least one constraint and one variable")
        if c.shape != (n,) or b.shape != (m,):
            raise ValueError(
                f"shape mismatch: c {c.shape}, a {a.shape}, b {b.shape}"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray | None
    objective: float


def _pivot(t: np.ndarray, obj: np.ndarray, basis: list, row: int, col: int) -> None:
    t[row] /= t[row, col]
    for i in range(t.shape[0]):
        if i != row and t[i, col] != 0.0:
            t[i] -= t[i, col] * t[row]
    if obj[col] != 0.0:
        obj -= obj[col] * t[row]
    basis[row] = col


def _simplex_phase(t, obj, basis, ncols, pivot_tol, max_pivots):
    """Run Bland-rule pivots until optimal or unbounded.  Returns status."""
    for _ in range(max_pivots):
        enter = -1
        for j in range(ncols):
            if obj[j] < -pivot_tol:
                enter = j
                break
        if enter < 0:
            return LPStatus.OPTIMAL
        leave = -1
        best = math.inf
        for i in range(t.shape[0]):
            aij = t[i, enter]
            if aij > pivot_tol:
                ratio = t[i, -1] / aij
                if ratio < best - 1e-15 or (
                    abs(ratio - best) <= 1e-15 and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return LPStatus.UNBOUNDED
        _pivot(t, obj, basis, leave, enter)
    raise NumericFailure("simplex pivot limit exceeded")


def lp_solve(
    problem: LPProblem,
    *,
    pivot_tol: float = 1e-9,
    feas_tol: float = 1e-8,
    max_pivots: int = 100_000,
) -> LPSolution:
    """Two-phase dense primal simplex with Bland's anti-cycling rule."""
    a, b, c = problem.a, problem.b, problem.c
    m, n = a.shape
    # standard form: a x - surplus = b, then flip rows to make rhs >= 0
    t = np.zeros((m, n + 2 * m + 1))
    t[:, :n] = a
    t[:, n : n + m] = -np.eye(m)
    t[:, -1] = b
    neg = t[:, -1] < 0.0
    t[neg] *= -1.0
    t[:, n + m : n + 2 * m] = np.eye(m)
    basis = [n + m + i for i in range(m)]

    # phase 1: minimize the artificial total
    obj = np.zeros(n + 2 * m + 1)
    obj[n + m : n + 2 * m] = 1.0
    obj -= t.sum(axis=0)  # reduced costs under the artificial basis
    status = _simplex_phase(t, obj, basis, n + 2 * m, pivot_tol, max_pivots)
    if status is LPStatus.UNBOUNDED:  # pragma: no cover - phase 1 is bounded below
        raise NumericFailure("phase-1 simplex reported unbounded")
    if -obj[-1] > feas_tol:
        return LPSolution(LPStatus.INFEASIBLE, None, math.inf)

    # drive leftover zero-level artificials out of the basis, drop dead rows
    keep = []
    for i in range(m):
        if basis[i] >= n + m:
            piv = -1
            for j in range(n + m):
                if abs(t[i, j]) > pivot_tol:
                    piv = j
                    break
            if piv < 0:
                continue  # redundant row
            _pivot(t, obj, basis, i, piv)
        keep.append(i)
    t = np.hstack([t[keep][:, : n + m], t[keep][:, -1:]])
    basis = [basis[i] for i in keep]

    # phase 2 on the original costs
    cost = np.zeros(n + m)
    cost[:n] = c
    obj = np.zeros(n + m + 1)
    obj[: n + m] = cost
    for i, bi in enumerate(basis):
        if cost[bi] != 0.0:
            obj -= cost[bi] * t[i]
    status = _simplex_phase(t, obj, basis, n + m, pivot_tol, max_pivots)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(LPStatus.UNBOUNDED, None, -math.inf)
    x = np.zeros(n)
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = t[i, -1]
    return LPSolution(LPStatus.OPTIMAL, x, float(problem.c @ x))


def lp_cover_solve(
    a: np.ndarray,
    b: np.ndarray,
    *,
    pivot_tol: float = 1e-9,
    max_pivots: int = 100_000,
) -> LPSolution:
    """Covering LP: minimize 1'x subject to a x >= b, x >= 0, for
    elementwise-nonnegative a and b >= 0.

    Solved single-phase on the dual (maximize b'y subject to a'y <= 1,
    y >= 0), whose slack basis is immediately feasible — no artificial
    variables, which matters on the highly degenerate constraint sets
    that grid discretizations produce.  The primal solution is read off
    the reduced costs of the slack columns at optimality.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m, n = a.shape
    if b.shape != (m,):
        raise ValueError("b must have one entry per row of a")
    if np.any(a < 0.0) or np.any(b < 0.0):
        raise ValueError("covering LP data must be nonnegative")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("LP data must be finite")

    t = np.zeros((n, m + n + 1))
    t[:, :m] = a.T
    t[:, m : m + n] = np.eye(n)
    t[:, -1] = 1.0
    basis = list(range(m, m + n))
    obj = np.zeros(m + n + 1)
    obj[:m] = -b
    status = _simplex_phase(t, obj, basis, m + n, pivot_tol, max_pivots)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(LPStatus.INFEASIBLE, None, math.inf)
    x = np.maximum(obj[m : m + n], 0.0)
    return LPSolution(LPStatus.OPTIMAL, x, float(x.sum()))


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    mask = u - css / ks > 0.0
    k = int(ks[mask][-1])
    theta = css[k - 1] / k
    return np.maximum(v - theta, 0.0)
