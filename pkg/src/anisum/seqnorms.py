"""Sequence norms over a finite family of vectors in one Space.

Five aggregates of a family (x_j)_{j<=m}:

* strong_norm   -- l_q of the item norms (closed form, exact).
* weak_norm     -- sup over the dual unit ball of the l_p pairing profile.
* aniso_norm    -- sup over l_r-bounded families of functionals of the
                   l_q-of-l_s pairing array (q < s; other regimes collapse).
* mixed_upper   -- inf over factorizations x_j = tau_j * y_j of
                   ||tau||_t * weak_norm(y, s) with 1/t = 1/q - 1/s.
* maurey_norm   -- sup over discrete probability measures on the dual
                   sphere of the l_q profile of measure-averaged l_s values.

Suprema carry lower-bound semantics, infima upper-bound semantics; "exact"
is claimed only for closed forms and full enumerations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import DEFAULTS
from .optimize import Certificate, exchange_minimize, multistart_maximize, project_to_simplex
from .spaces import (
    DegenerateRegimeError,
    DimensionMismatchError,
    Regime,
    Space,
    classify_params,
    dual_extreme_points,
    lp_along,
    lp_value,
)


def _cfg(value, key):
    return DEFAULTS[key] if value is None else value


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """A finite list of vectors (rows of ``items``) in one space."""

    space: Space
    items: np.ndarray

    def __post_init__(self):
        items = np.array(self.space.check_matrix(self.items), dtype=float)
        if items.shape[0] < 1:
            raise ValueError("a sequence family needs at least one item")
        items.setflags(write=False)
        object.__setattr__(self, "items", items)

    def __len__(self):
        return self.items.shape[0]

    def scaled(self, lam: float) -> "SequenceFamily":
        return SequenceFamily(self.space, lam * self.items)


@dataclass(frozen=True, eq=False)
class FunctionalFamily:
    """Finitely many functionals (rows of ``atoms``) on ``space``, graded
    by the l_r aggregate of their dual norms."""

    space: Space
    atoms: np.ndarray
    r: float

    def __post_init__(self):
        atoms = np.array(self.space.check_matrix(self.atoms), dtype=float)
        if atoms.shape[0] < 1:
            raise ValueError("a functional family needs at least one atom")
        r = float(self.r)
        if math.isnan(r) or r < 1.0:
            raise ValueError(f"aggregate index must satisfy r >= 1, got {r}")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "r", r)

    def __len__(self):
        return self.atoms.shape[0]

    @property
    def aggregate_norm(self) -> float:
        return float(lp_value(self.space.dual_norm_rows(self.atoms), self.r))

    def feasible(self, slack: float = 1e-12) -> bool:
        return self.aggregate_norm <= 1.0 + slack


@dataclass
class NormEstimate:
    """A norm value with bound semantics and the witness that attains it.

    bound_kind is "lower", "upper" or "exact"; meta always carries a
    "converged" flag (True for exact modes).
    """

    value: float
    bound_kind: str
    certificate: object | None = None
    meta: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return bool(self.meta.get("converged", True))


@dataclass(frozen=True)
class Factorization:
    """tau_j * y_j = x_j; zero tau entries pair with zero items only."""

    tau: np.ndarray
    y: SequenceFamily

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.shape != (len(self.y),):
            raise DimensionMismatchError("tau length must match the family size")
        if np.any(tau < 0.0):
            raise ValueError("tau entries must be nonnegative")
        object.__setattr__(self, "tau", tau)

    def reconstruct(self) -> np.ndarray:
        return self.tau[:, None] * self.y.items


@dataclass(frozen=True)
class DiscreteMeasure:
    """Discrete probability measure on dual-unit-ball functionals."""

    atoms: np.ndarray
    weights: np.ndarray
    space: Space | None = None

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 2 or atoms.shape[0] < 1:
            raise ValueError("atoms must be a nonempty stack of functionals")
        if weights.shape != (atoms.shape[0],):
            raise DimensionMismatchError("one weight per atom required")
        if np.any(weights < -1e-12):
            raise ValueError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.space is not None:
            norms = self.space.dual_norm_rows(atoms)
            if np.any(norms > 1.0 + 1e-9):
                raise ValueError("atoms must lie in the dual unit ball")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.weights > 0.0))


class PsiImage(NamedTuple):
    image: np.ndarray
    s_norm: float


class HolderBound(NamedTuple):
    lhs: float
    rhs: float


def mixed_conjugate_index(s: float, q: float) -> float:
    """The index t with 1/t + 1/s = 1/q (t = inf when q = s)."""
    if q == s:
        return math.inf
    return 1.0 / (1.0 / q - 1.0 / s)


def strong_norm(seq: SequenceFamily, q: float) -> NormEstimate:
    """l_q of the item norms; exact by direct formula."""
    q = float(q)
    if math.isnan(q) or q < 1.0:
        raise ValueError(f"strong norm needs q >= 1, got {q}")
    vals = seq.space.norm_rows(seq.items)
    return NormEstimate(
        float(lp_value(vals, q)),
        "exact",
        None,
        {"mode": "closed-form", "converged": True, "item_norms": vals},
    )


# ---------------------------------------------------------------------------
# weak norm


def _weak_objective(items: np.ndarray, p: float):
    def value(f):
        return float(lp_value(items @ f, p))

    return value


def _weak_subgradient(items: np.ndarray, p: float):
    if math.isinf(p):
        def grad(f):
            vals = items @ f
            j = int(np.argmax(np.abs(vals)))
            return np.sign(vals[j]) * items[j]

        return grad

    def grad(f):
        vals = items @ f
        w = lp_value(vals, p)
        if w == 0.0:
            return np.zeros_like(f)
        coef = np.sign(vals) if p == 1.0 else np.sign(vals) * (np.abs(vals) / w) ** (p - 1.0)
        return items.T @ coef

    return grad


def _stationary_functional(space: Space, items: np.ndarray, p: float,
                           f: np.ndarray, iters: int = 12) -> np.ndarray:
    """fixed-point refinement of the weak-profile optimality condition.

    A maximizer must be the norming functional of the coefficient-weighted
    item combination, so iterating that map is a cheap nonlinear power
    method; its attraction basins differ from gradient ascent's, which
    makes the endpoints useful extra starts.
    """
    for _ in range(iters):
        vals = items @ f
        if math.isinf(p):
            coef = np.zeros_like(vals)
            j = int(np.argmax(np.abs(vals)))
            coef[j] = np.sign(vals[j]) if vals[j] != 0.0 else 1.0
        else:
            coef = np.sign(vals) * np.abs(vals) ** (p - 1.0)
        g = space.norm_gradient(coef @ items)
        if not g.any():
            break
        f = g
    return f


def _radial_dual_projector(space: Space):
    dual = space.dual()
    fallback = np.zeros(space.dim)
    fallback[0] = space.scale[0]  # a unit functional

    def proj(f):
        n = dual.norm(f)
        if n <= 1e-300:
            return fallback.copy()
        return f / n

    return proj


def _weak_polish(space: Space, objective):
    """Endpoint refinement onto dual-ball vertices for polyhedral duals."""
    a = space.scale
    if math.isinf(space.p) or space.dim == 1:
        verts = dual_extreme_points(space)
        return lambda f: list(verts)
    if space.p == 1.0:
        def polish(f):
            corner = np.where(f >= 0.0, 1.0, -1.0) * a
            val = objective(corner)
            for _ in range(4 * space.dim):
                moved = False
                for i in range(space.dim):
                    cand = corner.copy()
                    cand[i] = -cand[i]
                    cv = objective(cand)
                    if cv > val + 1e-15:
                        corner, val = cand, cv
                        moved = True
                if not moved:
                    break
            return [corner]

        return polish
    return None


def weak_norm(
    seq: SequenceFamily,
    p: float,
    *,
    restarts: int | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    seed: int = 0,
    force_search: bool = False,
    warm_functionals=(),
    stationary_starts: bool = True,
    polish_budget: int = 4096,
    polish_leaders: int = 3,
) -> NormEstimate:
    """sup over the dual unit sphere of the l_p profile of pairings.

    Exact via dual-ball extreme points when those are enumerable, or by a
    singular value when both the space and the profile are l_2; otherwise
    a multistart lower bound with radial projection onto the dual sphere.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"weak norm needs p >= 1, got {p}")
    space, items = seq.space, seq.items
    if not force_search:
        ext = dual_extreme_points(space)
        if ext is not None:
            prof = lp_along(ext @ items.T, p, axis=1)
            i = int(np.argmax(prof))
            cert = Certificate(ext[i].copy(), float(prof[i]), 0, True)
            return NormEstimate(
                cert.value, "exact", cert,
                {"mode": "extreme-points", "converged": True, "p": p},
            )
        if space.p == 2.0 and p == 2.0:
            _, sv, vh = np.linalg.svd(items * space.scale)
            f = space.scale * vh[0]
            cert = Certificate(f, float(sv[0]), 0, True)
            return NormEstimate(
                cert.value, "exact", cert, {"mode": "svd", "converged": True, "p": p}
            )

    objective = _weak_objective(items, p)
    warm = [np.asarray(w, dtype=float) for w in warm_functionals]
    for row in items:
        g = space.norm_gradient(row)
        if g.any():
            warm.append(g)
            if stationary_starts:
                warm.append(_stationary_functional(space, items, p, g))
    if space.p == 2.0:
        _, _, vh = np.linalg.svd(items * space.scale)
        warm.append(space.scale * vh[0])
        if stationary_starts:
            warm.append(_stationary_functional(space, items, p, space.scale * vh[0]))
    cert = multistart_maximize(
        objective,
        _radial_dual_projector(space),
        space.dim,
        restarts=_cfg(restarts, "restarts"),
        max_iters=_cfg(max_iters, "max_iters"),
        tol=_cfg(tol, "tol"),
        seed=seed,
        warm_starts=warm,
        subgradient=_weak_subgradient(items, p),
        polish=_weak_polish(space, objective),
        polish_budget=polish_budget,
        polish_leaders=polish_leaders,
    )
    return NormEstimate(
        cert.value,
        "lower",
        cert,
        {"mode": "multistart", "converged": cert.converged, "p": p},
    )


# ---------------------------------------------------------------------------
# anisotropic norm


def _check_same_space(seq: SequenceFamily, fam) -> None:
    if seq.space != fam.space:
        raise DimensionMismatchError(
            "sequence and functional family live on different spaces"
        )


def aniso_objective(seq: SequenceFamily, fam: FunctionalFamily, s: float, q: float) -> float:
    """(sum_j (sum_k |<atom_k, x_j>|^s)^(q/s))^(1/q); no feasibility check."""
    s, q = float(s), float(q)
    if s < 1.0 or q < 1.0:
        raise ValueError(f"indices must be >= 1, got s={s}, q={q}")
    _check_same_space(seq, fam)
    pairings = fam.atoms @ seq.items.T
    return float(lp_value(lp_along(pairings, s, axis=0), q))


def _aniso_value_grad(x: np.ndarray, s: float, q: float, k: int):
    m, dim = x.shape

    def value(z):
        pairings = z.reshape(k, dim) @ x.T
        return float(lp_value(lp_along(pairings, s, axis=0), q))

    def grad(z):
        pairings = z.reshape(k, dim) @ x.T
        absp = np.abs(pairings)
        b = lp_along(pairings, s, axis=0)
        total = lp_value(b, q)
        if total == 0.0:
            return np.zeros(k * dim)
        bsafe = np.where(b > 0.0, b, 1.0)
        # dF/dP_kj = (b_j/F)^(q-1) (|P_kj|/b_j)^(s-1) sign(P_kj); all factors <= 1
        coef = (b / total) ** (q - 1.0) * (absp / bsafe) ** (s - 1.0) * np.sign(pairings)
        return (coef @ x).ravel()

    return value, grad


def _family_projector(space: Space, r: float, k: int):
    dual = space.dual()
    fallback = np.zeros((k, space.dim))
    fallback[0, 0] = space.scale[0]

    def proj(z):
        a = z.reshape(k, space.dim)
        agg = lp_value(lp_along(a * dual.scale, dual.p, axis=1), r)
        if agg <= 1e-300:
            return fallback.ravel().copy()
        return z / agg

    return proj


def _embed_rows(rows: np.ndarray, k: int, dim: int) -> np.ndarray:
    out = np.zeros((k, dim))
    take = min(k, rows.shape[0])
    out[:take] = rows[:take]
    return out


def _doubling_schedule(kmax: int) -> list[int]:
    ks = [1]
    while ks[-1] * 2 <= kmax:
        ks.append(ks[-1] * 2)
    return ks


def aniso_norm(
    seq: SequenceFamily,
    s: float,
    q: float,
    r: float,
    *,
    kmax: int | None = None,
    restarts: int | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    ktol: float | None = None,
    seed: int = 0,
    warm_families=(),
) -> NormEstimate:
    """sup of aniso_objective over functional families with l_r aggregate <= 1.

    Searches atom counts K = 1, 2, 4, ... up to ``kmax``, warm-starting each
    K with the weak-norm certificate as a single atom (so the estimate never
    falls below the weak one) and with the previous K's atoms zero-padded
    (so the estimate is monotone in K).  The doubling stops early once the
    relative gain drops below ``ktol``.

    s <= q coincides with the weak-q norm and delegates; s < r admits only
    the zero family and raises.
    """
    regime = classify_params(s, q, r)
    if regime.classification is Regime.REJECTED:
        raise ValueError(f"indices must be finite and >= 1: s={s}, q={q}, r={r}")
    if regime.classification is Regime.DEGENERATE_ZERO:
        raise DegenerateRegimeError(
            f"degenerate regime: s < r (s={s}, r={r}); only the zero sequence is summable"
        )
    s, q, r = regime.s, regime.q, regime.r
    if regime.classification is Regime.WEAK_EQUIVALENT:
        est = weak_norm(seq, q, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed)
        f = np.asarray(est.certificate.point, dtype=float)
        meta = dict(est.meta)
        meta.update(
            regime="weak-equivalent",
            family=FunctionalFamily(seq.space, f[None, :], r),
            k_used=1,
        )
        return NormEstimate(est.value, est.bound_kind, est.certificate, meta)

    space, items = seq.space, seq.items
    kmax = max(1, _cfg(kmax, "kmax"))
    ktol = _cfg(ktol, "ktol")
    weak_est = weak_norm(seq, q, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed)
    weak_f = np.asarray(weak_est.certificate.point, dtype=float)

    warm_atoms = []
    for fam in warm_families:
        rows = fam.atoms if isinstance(fam, FunctionalFamily) else np.asarray(fam, dtype=float)
        warm_atoms.append(space.check_matrix(rows))

    # norming functionals of the family vectors (diagonal-dominated
    # optima) and of the family's principal directions (optima that
    # cluster-norm groups of aligned vectors), each under Holder-optimal
    # and uniform masses.  Heaviest atoms first so truncation to small K
    # keeps the mass.
    def _mass_shape(weights_rel: np.ndarray) -> np.ndarray:
        if r > q:
            return weights_rel ** (q / (r - q))
        hot = np.zeros(len(weights_rel))
        hot[int(np.argmax(weights_rel))] = 1.0
        return hot

    lens = space.norm_rows(items)
    if float(lens.max()) > 0.0:
        norming = np.stack([space.norming_functional(u) for u in items])
        rel = lens / float(lens.max())
        for c in (np.ones(len(lens)), _mass_shape(rel)):
            order = np.argsort(-(c * lens), kind="stable")
            rows = (c[:, None] * norming)[order]
            if float(np.abs(rows).max()) > 0.0:
                warm_atoms.append(rows)
        _, sv, vh = np.linalg.svd(items, full_matrices=False)
        keep = sv > 1e-12 * float(sv[0])
        dirs, svk = vh[keep], sv[keep]
        phis = np.stack([space.norming_functional(w) for w in dirs])
        for c in (np.ones(len(dirs)), _mass_shape(svk / float(svk[0]))):
            rows = c[:, None] * phis
            if float(np.abs(rows).max()) > 0.0:
                warm_atoms.append(rows)

    best = None  # (value, atoms, inner_converged, k)
    prev_atoms = None
    last_gain = math.inf
    doubling_done = False
    for ki, k in enumerate(_doubling_schedule(kmax)):
        warm = [_embed_rows(weak_f[None, :], k, space.dim).ravel()]
        if prev_atoms is not None:
            warm.append(_embed_rows(prev_atoms, k, space.dim).ravel())
        warm += [_embed_rows(rows, k, space.dim).ravel() for rows in warm_atoms]
        value_fn, grad_fn = _aniso_value_grad(items, s, q, k)
        cert = multistart_maximize(
            value_fn,
            _family_projector(space, r, k),
            k * space.dim,
            restarts=_cfg(restarts, "restarts"),
            max_iters=_cfg(max_iters, "max_iters"),
            tol=_cfg(tol, "tol"),
            seed=seed + 7919 * ki,
            warm_starts=warm,
            subgradient=grad_fn,
        )
        atoms = cert.point.reshape(k, space.dim)
        if ki > 0:
            last_gain = (cert.value - best[0]) / max(abs(cert.value), 1e-30)
        if best is None or cert.value > best[0]:
            best = (cert.value, atoms, cert.converged, k)
        prev_atoms = atoms
        if ki > 0 and last_gain < ktol:
            doubling_done = True
            break

    value, atoms, inner_conv, k_used = best
    cert = Certificate(atoms.ravel().copy(), value, k_used, inner_conv)
    fam = FunctionalFamily(space, atoms, r)
    return NormEstimate(
        value,
        "lower",
        cert,
        {
            "mode": "aniso-search",
            "regime": "proper",
            "converged": bool(inner_conv and doubling_done),
            "doubling_converged": doubling_done,
            "k_used": k_used,
            "k_gain": last_gain,
            "weak_value": weak_est.value,
            "family": fam,
        },
    )


# ---------------------------------------------------------------------------
# mixed norm (factorization infimum)


def _log_tau(theta: np.ndarray, t_idx: float) -> float:
    """log of the l_t size of exp(theta), computed in the log domain."""
    if math.isinf(t_idx):
        return float(theta.max())
    z = t_idx * theta
    zm = float(z.max())
    return (zm + math.log(float(np.exp(z - zm).sum()))) / t_idx


def _log_profile(row: np.ndarray, theta: np.ndarray, s: float) -> float:
    """log of the l_s size of row * exp(-theta); -inf for a zero row."""
    a = np.abs(row)
    mask = a > 0.0
    if not mask.any():
        return -math.inf
    z = s * (np.log(a[mask]) - theta[mask])
    zm = float(z.max())
    return (zm + math.log(float(np.exp(z - zm).sum()))) / s


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _profile_weights(row: np.ndarray, theta: np.ndarray, s: float) -> np.ndarray:
    """Softmax weights of s*(log|row| - theta) over the support of row;
    the negated theta-gradient of _log_profile."""
    a = np.abs(row)
    mask = a > 0.0
    w = np.zeros(theta.size)
    if mask.any():
        w[mask] = _softmax(s * (np.log(a[mask]) - theta[mask]))
    return w


def mixed_upper(
    seq: SequenceFamily,
    s: float,
    q: float,
    *,
    restarts: int | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    seed: int = 0,
    max_rounds: int | None = None,
    exchange_tol: float | None = None,
    warm_functionals=(),
) -> NormEstimate:
    """Upper bound of the factorization infimum, with its Factorization.

    Works in theta = log tau over the nonzero items (zero items get
    tau = 0 and drop out).  The inner supremum is the weak-s norm of
    (x_j exp(-theta_j))_j; the outer minimization runs the exchange loop
    against the functionals the inner solver returns.
    """
    s, q = float(s), float(q)
    if math.isnan(s) or math.isnan(q) or q < 1.0 or s < q or math.isinf(s):
        raise DegenerateRegimeError(
            f"factorization norm needs 1 <= q <= s < inf, got q={q}, s={s}"
        )
    t_idx = mixed_conjugate_index(s, q)
    space, items = seq.space, seq.items
    m = items.shape[0]
    norms = space.norm_rows(items)
    nz = norms > 0.0
    if not nz.any():
        fact = Factorization(np.zeros(m), SequenceFamily(space, np.zeros_like(items)))
        return NormEstimate(
            0.0, "upper", fact,
            {"mode": "mixed-exchange", "converged": True, "rounds": 0, "tau_index": t_idx},
        )
    x_nz = items[nz]
    mn = x_nz.shape[0]
    expo = 0.0 if math.isinf(t_idx) else q / t_idx
    theta0 = expo * np.log(norms[nz])
    theta0 = theta0 - theta0.mean()

    warm_fs = [np.asarray(w, dtype=float) for w in warm_functionals]
    inner_restarts = max(6, _cfg(restarts, "restarts") // 4)
    last_f: list[np.ndarray] = []

    def tau_norm(theta):
        return float(lp_value(np.exp(theta), t_idx))

    def inner(theta) -> Certificate:
        fam = SequenceFamily(space, x_nz * np.exp(-theta)[:, None])
        est = weak_norm(
            fam, s,
            restarts=inner_restarts, max_iters=max_iters, tol=tol, seed=seed,
            warm_functionals=tuple(last_f) + tuple(warm_fs),
        )
        f = np.asarray(est.certificate.point, dtype=float)
        last_f[:] = [f]
        return Certificate(f, tau_norm(theta) * est.value, 1, est.converged)

    def cross(theta, cert) -> float:
        log_val = _log_tau(theta, t_idx) + _log_profile(x_nz @ cert.point, theta, s)
        return math.exp(min(log_val, 700.0)) if math.isfinite(log_val) else 0.0

    def outer(active, theta_prev):
        rows = np.stack([x_nz @ c.point for c in active])  # fixed pairing profiles

        def neg_log_max(theta):
            worst = max(_log_profile(row, theta, s) for row in rows)
            if not math.isfinite(worst):
                return -(-700.0)  # every active profile vanished; flat floor
            return -(_log_tau(theta, t_idx) + worst)

        def neg_log_max_grad(theta):
            if math.isinf(t_idx):
                g_tau = np.zeros(mn)
                g_tau[int(np.argmax(theta))] = 1.0
            else:
                g_tau = _softmax(t_idx * theta)
            logs = [_log_profile(row, theta, s) for row in rows]
            i = int(np.argmax(logs))
            return -(g_tau - _profile_weights(rows[i], theta, s))

        cert = multistart_maximize(
            neg_log_max,
            lambda th: th - th.mean(),
            mn,
            restarts=4,
            max_iters=_cfg(max_iters, "max_iters"),
            tol=max(_cfg(tol, "tol"), 1e-11),
            seed=seed + 131,
            warm_starts=[theta_prev - theta_prev.mean(), theta0],
            subgradient=neg_log_max_grad,
        )
        return cert.point

    loop = exchange_minimize(
        mn, inner, outer, cross, theta0,
        max_rounds=_cfg(max_rounds, "exchange_rounds"),
        tol=_cfg(exchange_tol, "exchange_tol"),
    )

    best = None  # (value, theta, weak estimate)
    for theta in (theta0, loop.point):
        fam = SequenceFamily(space, x_nz * np.exp(-theta)[:, None])
        est = weak_norm(
            fam, s,
            restarts=restarts, max_iters=max_iters, tol=tol, seed=seed,
            warm_functionals=tuple(warm_fs) + tuple(last_f),
        )
        val = tau_norm(theta) * est.value
        if best is None or val < best[0]:
            best = (val, theta, est)
    value, theta, weak_est = best

    tau = np.zeros(m)
    tau[nz] = np.exp(theta)
    y = np.zeros_like(items)
    y[nz] = x_nz * np.exp(-theta)[:, None]
    fact = Factorization(tau, SequenceFamily(space, y))
    return NormEstimate(
        value,
        "upper",
        fact,
        {
            "mode": "mixed-exchange",
            "converged": bool(loop.converged and weak_est.converged),
            "rounds": loop.restarts_used,
            "tau_index": t_idx,
            "weak_mode": weak_est.meta.get("mode"),
            "weak_functional": np.asarray(weak_est.certificate.point, dtype=float),
        },
    )


@dataclass
class MixedNormInterval:
    lower: NormEstimate
    upper: NormEstimate

    @property
    def rel_gap(self) -> float:
        return (self.upper.value - self.lower.value) / max(self.upper.value, 1e-30)


def mixed_norm(
    seq: SequenceFamily,
    s: float,
    q: float,
    *,
    restarts: int | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    seed: int = 0,
    kmax: int | None = None,
) -> MixedNormInterval:
    """Bracket of the factorization norm: search lower bound vs
    factorization upper bound; both target the same number.

    q = s routes both ends to the weak-s norm.  The upper end's final
    weak evaluations are warm-started with the lower end's atoms, which
    makes lower <= upper hold at certificate level.
    """
    s, q = float(s), float(q)
    if q > s:
        raise DegenerateRegimeError(f"factorization norm needs q <= s, got q={q}, s={s}")
    if q == s:
        w = weak_norm(seq, s, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed)
        return MixedNormInterval(w, w)
    lower = aniso_norm(
        seq, s, q, s,
        kmax=kmax, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed,
    )
    fam: FunctionalFamily = lower.meta["family"]
    dn = fam.space.dual_norm_rows(fam.atoms)
    warm = [fam.atoms[i] / dn[i] for i in range(len(fam)) if dn[i] > 0.0]
    upper = mixed_upper(
        seq, s, q,
        restarts=restarts, max_iters=max_iters, tol=tol, seed=seed,
        warm_functionals=warm,
    )
    return MixedNormInterval(lower, upper)


# ---------------------------------------------------------------------------
# Maurey measure form


def maurey_value(seq: SequenceFamily, mu: DiscreteMeasure, s: float, q: float) -> float:
    """l_q profile of the per-item s-averages against the measure."""
    s, q = float(s), float(q)
    if s < 1.0 or q < 1.0 or math.isinf(s):
        raise ValueError(f"measure form needs finite s >= 1 and q >= 1, got s={s}, q={q}")
    if mu.atoms.shape[1] != seq.space.dim:
        raise DimensionMismatchError("measure atoms do not match the sequence space")
    absp = np.abs(mu.atoms @ seq.items.T)
    colmax = absp.max(axis=0)
    safe = np.where(colmax > 0.0, colmax, 1.0)
    inner = safe * ((mu.weights[:, None] * (absp / safe) ** s).sum(axis=0)) ** (1.0 / s)
    return float(lp_value(inner, q))


def _maurey_value_grad(x: np.ndarray, s: float, q: float, k: int):
    m, dim = x.shape
    na = k * dim

    def split(z):
        return z[:na].reshape(k, dim), z[na:]

    def value(z):
        atoms, w = split(z)
        absp = np.abs(atoms @ x.T)
        colmax = absp.max(axis=0)
        safe = np.where(colmax > 0.0, colmax, 1.0)
        inner = safe * ((w[:, None] * (absp / safe) ** s).sum(axis=0)) ** (1.0 / s)
        return float(lp_value(inner, q))

    def grad(z):
        atoms, w = split(z)
        pair_ = atoms @ x.T
        absp = np.abs(pair_)
        colmax = absp.max(axis=0)
        safe = np.where(colmax > 0.0, colmax, 1.0)
        inner = safe * ((w[:, None] * (absp / safe) ** s).sum(axis=0)) ** (1.0 / s)
        total = lp_value(inner, q)
        if total == 0.0:
            return np.zeros(na + k)
        bsafe = np.where(inner > 0.0, inner, 1.0)
        outer_coef = (inner / total) ** (q - 1.0)  # dF/db_j, bounded by 1
        ratio = absp / bsafe
        atom_coef = outer_coef * w[:, None] * ratio ** (s - 1.0) * np.sign(pair_)
        g_atoms = atom_coef @ x
        g_w = (outer_coef * bsafe / s * ratio**s).sum(axis=1)
        return np.concatenate([g_atoms.ravel(), g_w])

    return value, grad


def _maurey_projector(space: Space, k: int):
    dual = space.dual()
    na = k * space.dim
    unit = np.zeros(space.dim)
    unit[0] = space.scale[0]

    def proj(z):
        atoms = z[:na].reshape(k, space.dim).copy()
        norms = lp_along(atoms * dual.scale, dual.p, axis=1)
        for i in range(k):
            atoms[i] = unit if norms[i] <= 1e-300 else atoms[i] / norms[i]
        w = project_to_simplex(z[na:])
        return np.concatenate([atoms.ravel(), w])

    return proj


def maurey_norm(
    seq: SequenceFamily,
    s: float,
    q: float,
    *,
    num_atoms: int | None = None,
    restarts: int | None = None,
    max_iters: int | None = None,
    tol: float | None = None,
    seed: int = 0,
    warm_measures=(),
) -> NormEstimate:
    """sup of maurey_value over discrete probability measures (atoms on
    the dual sphere, weights on the simplex); lower-bound semantics."""
    s, q = float(s), float(q)
    if not (1.0 <= q < s < math.inf):
        raise DegenerateRegimeError(f"measure form needs 1 <= q < s < inf, got q={q}, s={s}")
    space, items = seq.space, seq.items
    k = max(1, _cfg(num_atoms, "maurey_atoms"))
    na = k * space.dim

    fill = [space.norming_functional(row) for row in items if row.any()]
    if not fill:
        fill = [space.norming_functional(np.zeros(space.dim))]
    cyc = np.stack([fill[i % len(fill)] for i in range(k)])
    point_mass = np.zeros(k)
    point_mass[0] = 1.0
    warm = [
        np.concatenate([cyc.ravel(), point_mass]),
        np.concatenate([cyc.ravel(), np.full(k, 1.0 / k)]),
    ]
    for mu in warm_measures:
        atoms = _embed_rows(np.asarray(mu.atoms, dtype=float), k, space.dim)
        w = np.zeros(k)
        take = min(k, mu.weights.size)
        w[:take] = mu.weights[:take]
        total = w.sum()
        w = w / total if total > 0.0 else point_mass
        warm.append(np.concatenate([atoms.ravel(), w]))

    value_fn, grad_fn = _maurey_value_grad(items, s, q, k)
    cert = multistart_maximize(
        value_fn,
        _maurey_projector(space, k),
        na + k,
        restarts=_cfg(restarts, "restarts"),
        max_iters=_cfg(max_iters, "max_iters"),
        tol=_cfg(tol, "tol"),
        seed=seed,
        warm_starts=warm,
        subgradient=grad_fn,
    )
    atoms = cert.point[:na].reshape(k, space.dim)
    weights = cert.point[na:]
    weights = weights / weights.sum()
    mu = DiscreteMeasure(atoms, weights, space)
    return NormEstimate(
        cert.value,
        "lower",
        mu,
        {
            "mode": "maurey-search",
            "converged": cert.converged,
            "num_atoms": k,
            "certificate": cert,
        },
    )


# ---------------------------------------------------------------------------
# the functional-family operator and its Hoelder bound


def psi_apply(fam: FunctionalFamily, v, s: float) -> PsiImage:
    """Pairings of v against every atom, with their l_s size.

    Requires fam.r <= s so the l_s size is controlled by the family
    aggregate: s_norm <= aggregate_norm * norm(v).
    """
    s = float(s)
    if s < 1.0:
        raise ValueError(f"image index must satisfy s >= 1, got {s}")
    if fam.r > s:
        raise DegenerateRegimeError(
            f"image leaves l_s: family aggregate index r={fam.r} exceeds s={s}"
        )
    v = fam.space.check_vector(v)
    image = fam.atoms @ v
    return PsiImage(image, float(lp_value(image, s)))


def holder_mixed_bound(
    seq: SequenceFamily,
    fam: FunctionalFamily,
    s: float,
    *,
    restarts: int | None = None,
    seed: int = 0,
) -> HolderBound:
    """lhs = flat l_s of all pairings; rhs = aggregate * weak_norm(seq, s).

    The weak estimate is warm-started with the family's own normalized
    atoms, which keeps lhs <= rhs at certificate level whenever r <= s.
    """
    _check_same_space(seq, fam)
    s = float(s)
    pairings = fam.atoms @ seq.items.T
    lhs = float(lp_value(pairings, s))
    dn = fam.space.dual_norm_rows(fam.atoms)
    warm = [fam.atoms[i] / dn[i] for i in range(len(fam)) if dn[i] > 0.0]
    west = weak_norm(seq, s, restarts=restarts, seed=seed, warm_functionals=warm)
    return HolderBound(lhs, fam.aggregate_norm * west.value)
