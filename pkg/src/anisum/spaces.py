"""Finite-dimensional real weighted l_p spaces with explicit duality.

A ``Space`` knows its norm, the norm of its dual, the pairing between the
two, and (when the unit ball of the dual is a polytope) the extreme points
of that ball.  Vectors and functionals are plain 1-d numpy arrays; a
functional acts by the Euclidean dot product.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

EXTREME_POINT_CAP = 20  # 2**20 sign vectors; beyond this enumeration is refused


class DimensionMismatchError(ValueError):
    """Vector/functional length does not match the space."""


class DegenerateRegimeError(ValueError):
    """The requested parameters fall in a regime where the quantity
    degenerates (zero space) or the defining inequality reverses."""


def conjugate_exponent(p: float) -> float:
    """The index p* with 1/p + 1/p* = 1 (conjugate of 1 is inf)."""
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_value(values, p: float) -> float:
    """l_p aggregate of |values|; accepts p = math.inf."""
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    if a.size == 0:
        return 0.0
    m = float(a.max())
    if m == 0.0 or math.isinf(p):
        return m
    if p == 1.0:
        return float(a.sum())
    # scale by the max so a**p cannot overflow for moderate p
    return float(m * (((a / m) ** p).sum()) ** (1.0 / p))


def lp_along(arr, p: float, axis: int) -> np.ndarray:
    """l_p aggregate of |arr| along one axis, max-scaled for stability."""
    a = np.abs(np.asarray(arr, dtype=float))
    mx = a.max(axis=axis)
    if math.isinf(p):
        return mx
    if p == 1.0:
        return a.sum(axis=axis)
    safe = np.where(mx > 0.0, mx, 1.0)
    scaled = a / np.expand_dims(safe, axis)
    return mx * (scaled**p).sum(axis=axis) ** (1.0 / p)


def _validated_p(p) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"norm exponent must satisfy p >= 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class Space:
    """R^dim under a (possibly weighted) l_p norm.

    norm(v) = (sum_i w_i |v_i|^p)^(1/p) for finite p, max_i w_i |v_i| for
    p = inf.  Weights are strictly positive and default to 1.  Internally
    both cases reduce to ``norm(v) = ||scale * v||_p`` with an unweighted
    l_p, which is what makes duality a plain reciprocal: the dual space is
    (p*, 1/scale).
    """

    dim: int
    p: float
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        object.__setattr__(self, "p", _validated_p(self.p))
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
            if w.shape != (self.dim,):
                raise DimensionMismatchError(
                    f"weights shape {w.shape} does not match dim {self.dim}"
                )
            if not np.all(w > 0.0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be strictly positive and finite")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)
        scale = self._compute_scale()
        scale.setflags(write=False)
        object.__setattr__(self, "_scale", scale)

    def _compute_scale(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        if math.isinf(self.p):
            return np.array(self.weights, dtype=float)
        return self.weights ** (1.0 / self.p)

    @property
    def scale(self) -> np.ndarray:
        """Coordinate scaling a with norm(v) = ||a * v||_p (unweighted)."""
        return self._scale

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Space):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.p == other.p
            and np.array_equal(self._scale, other._scale)
        )

    def __hash__(self):
        return hash((self.dim, self.p, self._scale.tobytes()))

    def __repr__(self):
        tag = f"l{self.p:g}^{self.dim}" if not math.isinf(self.p) else f"linf^{self.dim}"
        return f"Space({tag}, weighted)" if self.is_weighted else f"Space({tag})"

    def check_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(
                f"vector shape {v.shape} does not match dim {self.dim}"
            )
        return v

    def check_matrix(self, m) -> np.ndarray:
        """Validate a stack of vectors (rows live in this space)."""
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"row stack of shape {m.shape} does not match dim {self.dim}"
            )
        return m

    def norm(self, v) -> float:
        v = self.check_vector(v)
        return lp_value(self._scale * v, self.p)

    def norm_rows(self, m) -> np.ndarray:
        m = self.check_matrix(m)
        return lp_along(m * self._scale, self.p, axis=1)

    def dual(self) -> "Space":
        q = conjugate_exponent(self.p)
        inv = 1.0 / self._scale
        if self.weights is None:
            return Space(self.dim, q)
        w = inv if math.isinf(q) else inv**q
        return Space(self.dim, q, w)

    def dual_norm(self, f) -> float:
        return self.dual().norm(f)

    def dual_norm_rows(self, m) -> np.ndarray:
        return self.dual().norm_rows(m)

    def norm_gradient(self, v) -> np.ndarray:
        """A subgradient of the norm at v (the zero vector maps to 0).

        For v != 0 this is a norming functional: dual_norm = 1 and
        pair(g, v) = norm(v).  Ties (p = inf, p = 1 zeros) resolve to the
        lexicographically-first selection for determinism.
        """
        v = self.check_vector(v)
        a = self._scale
        u = a * v
        if math.isinf(self.p):
            j = int(np.argmax(np.abs(u)))
            g = np.zeros(self.dim)
            g[j] = np.sign(u[j]) * a[j]
            return g
        if self.p == 1.0:
            return a * np.sign(u)
        n = lp_value(u, self.p)
        if n == 0.0:
            return np.zeros(self.dim)
        return a * np.sign(u) * (np.abs(u) / n) ** (self.p - 1.0)

    def norming_functional(self, v) -> np.ndarray:
        """A unit functional attaining pair(f, v) = norm(v)."""
        g = self.norm_gradient(v)
        if not g.any():
            g = np.zeros(self.dim)
            g[0] = self._scale[0]  # any unit functional will do at v = 0
        return g


def norm(space: Space, v) -> float:
    return space.norm(v)


def dual_norm(space: Space, f) -> float:
    return space.dual_norm(f)


def pair(f, v) -> float:
    f = np.asarray(f, dtype=float)
    v = np.asarray(v, dtype=float)
    if f.shape != v.shape:
        raise DimensionMismatchError(
            f"functional shape {f.shape} does not match vector shape {v.shape}"
        )
    return float(f @ v)


def dual_extreme_points(space: Space, cap: int = EXTREME_POINT_CAP) -> np.ndarray | None:
    """Extreme points of the dual unit ball, or None when not enumerable.

    Enumerable cases: p = 1 (dual ball is a box; 2^dim corners, refused
    above ``cap`` dimensions), p = inf (dual ball is a cross-polytope;
    2*dim vertices), and dim = 1 for any p.  Returned as rows, each with
    dual_norm exactly 1.
    """
    a = space.scale
    if space.dim == 1:
        return np.array([[a[0]], [-a[0]]])
    if space.p == 1.0:
        if space.dim > cap:
            return None
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=space.dim)))
        return signs * a
    if math.isinf(space.p):
        pts = np.zeros((2 * space.dim, space.dim))
        for i in range(space.dim):
            pts[2 * i, i] = a[i]
            pts[2 * i + 1, i] = -a[i]
        return pts
    return None


class Regime(Enum):
    PROPER = "proper"
    WEAK_EQUIVALENT = "weak-equivalent"
    DEGENERATE_ZERO = "degenerate-zero"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ParamRegime:
    """Classification of an (s, q, r[, p]) parameter tuple.

    classification:
      PROPER           q < s and r <= s: the anisotropic norm is its own thing.
      WEAK_EQUIVALENT  s <= q (and r <= s): coincides with the weak-q norm.
      DEGENERATE_ZERO  s < r: only the zero sequence has a finite value.
      REJECTED         some index < 1 (or not finite where required).

    weak_class_zero / aniso_class_zero flag the operator classes that
    collapse to {0}: q < p kills the weakly-summing class, p < q kills the
    absolutely-summing one.
    """

    s: float
    q: float
    r: float
    p: float | None
    classification: Regime
    weak_class_zero: bool = False
    aniso_class_zero: bool = False

    @property
    def proper(self) -> bool:
        return self.classification is Regime.PROPER


def classify_params(s, q, r, p=None) -> ParamRegime:
    vals = [float(s), float(q), float(r)]
    pf = None if p is None else float(p)
    bad = any(math.isnan(v) or v < 1.0 or math.isinf(v) for v in vals)
    if pf is not None and (math.isnan(pf) or pf < 1.0):
        bad = True
    s, q, r = vals
    if bad:
        return ParamRegime(s, q, r, pf, Regime.REJECTED)
    if s < r:
        cls = Regime.DEGENERATE_ZERO
    elif q < s:
        cls = Regime.PROPER
    else:
        cls = Regime.WEAK_EQUIVALENT
    return ParamRegime(
        s,
        q,
        r,
        pf,
        cls,
        weak_class_zero=pf is not None and q < pf,
        aniso_class_zero=pf is not None and pf < q,
    )


def random_unit_vectors(space: Space, count: int, rng: np.random.Generator) -> np.ndarray:
    """Deterministic stack of count vectors with norm exactly 1."""
    out = np.empty((count, space.dim))
    for i in range(count):
        v = rng.standard_normal(space.dim)
        n = space.norm(v)
        while n <= 1e-12:  # essentially impossible, but stay total
            v = rng.standard_normal(space.dim)
            n = space.norm(v)
        out[i] = v / n
    return out


def random_unit_functionals(space: Space, count: int, rng: np.random.Generator) -> np.ndarray:
    return random_unit_vectors(space.dual(), count, rng)
