"""Core value types: finite metric measure spaces, weights, couplings.

All types are immutable after construction and all operations are pure, so
values can be shared freely between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .config import Tolerances
from .errors import ValidationError, ZeroMassSet

__all__ = [
    "ExtReal",
    "EXT_INF",
    "prob_weights",
    "FiniteMmSpace",
    "Coupling",
    "condition_measure",
    "pushforward",
    "partition_average",
    "subset_diameter",
    "as_index_array",
]


class ExtReal:
    """Nonnegative extended real with absorbing infinity.

    Arithmetic conventions: ``inf + x = inf`` and ``c * inf = inf`` for
    ``c > 0``; the product ``0 * inf`` is ``0`` (the measure-theoretic
    convention used in the entropy integrands).  Comparisons are total and
    interoperate with plain numbers.
    """

    __slots__ = ("value",)

    def __init__(self, value: float):
        v = float(value)
        if math.isnan(v):
            raise ValidationError("ExtReal cannot hold NaN")
        if v < 0:
            raise ValidationError(f"ExtReal must be nonnegative, got {v}")
        object.__setattr__(self, "value", v)

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("ExtReal is immutable")

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value

    def __add__(self, other):
        return ExtReal(self.value + _coerce(other))

    __radd__ = __add__

    def __mul__(self, other):
        o = _coerce(other)
        if (o == 0.0 and self.is_inf) or (math.isinf(o) and self.value == 0.0):
            return ExtReal(0.0)
        return ExtReal(self.value * o)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            return self.value == _coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __lt__(self, other):
        return self.value < _coerce(other)

    def __le__(self, other):
        return self.value <= _coerce(other)

    def __gt__(self, other):
        return self.value > _coerce(other)

    def __ge__(self, other):
        return self.value >= _coerce(other)

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"ExtReal({'inf' if self.is_inf else repr(self.value)})"


def _coerce(x) -> float:
    if isinstance(x, ExtReal):
        return x.value
    return float(x)


EXT_INF = ExtReal(math.inf)


def prob_weights(values, *, tol: float = 1e-12) -> np.ndarray:
    """Validate a probability weight vector and return a read-only copy.

    Weights must be nonnegative and sum to 1 within ``tol``.
    """
    w = np.asarray(values, dtype=float).copy()
    if w.ndim != 1:
        raise ValidationError(f"weights must be a vector, got shape {w.shape}")
    if w.size == 0:
        raise ValidationError("weights must be nonempty")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        i = int(np.argmin(w))
        raise ValidationError(f"weights must be nonnegative, weights[{i}] = {w[i]}")
    s = float(w.sum())
    if abs(s - 1.0) > tol:
        raise ValidationError(f"weights must sum to 1 within {tol}, got sum {s!r}")
    w.flags.writeable = False
    return w


def as_index_array(subset, n: int) -> np.ndarray:
    """Normalise a point subset (indices or boolean mask) to sorted indices."""
    a = np.asarray(subset)
    if a.dtype == bool:
        if a.shape != (n,):
            raise ValidationError(f"boolean mask must have length {n}")
        return np.flatnonzero(a)
    idx = np.unique(a.astype(int))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ValidationError(f"subset indices out of range for n = {n}")
    return idx


def _validate_distance_matrix(dist: np.ndarray, tol: Tolerances) -> None:
    n = dist.shape[0]
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise ValidationError("distance matrix must be finite")
    if np.any(dist < 0):
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        raise ValidationError(f"negative distance at ({i},{j}): {dist[i, j]}")
    scale = float(dist.max(initial=0.0))
    atol = tol.structural * max(scale, 1.0)
    if np.any(np.abs(np.diagonal(dist)) > atol):
        i = int(np.argmax(np.abs(np.diagonal(dist))))
        raise ValidationError(f"nonzero diagonal at ({i},{i}): {dist[i, i]}")
    asym = np.abs(dist - dist.T)
    if asym.max(initial=0.0) > atol:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise ValidationError(
            f"asymmetric distances at ({i},{j}): {dist[i, j]} vs {dist[j, i]}"
        )
    # triangle inequality, checked one intermediate point at a time to keep
    # memory at O(n^2)
    tri_tol = tol.structural * max(scale, 1.0)
    for k in range(n):
        slack = dist - (dist[:, k][:, None] + dist[k, :][None, :])
        bad = slack > tri_tol
        if bad.any():
            i, j = np.unravel_index(int(np.argmax(slack)), slack.shape)
            raise ValidationError(
                f"triangle inequality violated for (i,j,k) = ({i},{j},{k}): "
                f"d({i},{j}) = {dist[i, j]} > {dist[i, k]} + {dist[k, j]}"
            )


@dataclass(frozen=True)
class FiniteMmSpace:
    """A finite metric measure space: points, distances, probability weights."""

    point_ids: tuple
    dist: np.ndarray
    weights: np.ndarray
    tolerances: Tolerances = field(default=Tolerances(), repr=False, compare=False)

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=float).copy()
        _validate_distance_matrix(dist, self.tolerances)
        n = dist.shape[0]
        if len(self.point_ids) != n:
            raise ValidationError(
                f"{len(self.point_ids)} point ids for {n}x{n} distance matrix"
            )
        w = prob_weights(self.weights, tol=self.tolerances.structural)
        if w.size != n:
            raise ValidationError(f"{w.size} weights for {n} points")
        dist.flags.writeable = False
        object.__setattr__(self, "point_ids", tuple(self.point_ids))
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def diam(self) -> float:
        return float(self.dist.max(initial=0.0))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @classmethod
    def from_points(cls, points, weights, *, metric="euclidean", ids=None,
                    tolerances: Tolerances = Tolerances()) -> "FiniteMmSpace":
        """Build a space from coordinates; Euclidean distances satisfy the
        triangle inequality by construction."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 1 and np.asarray(weights).size != 1:
            pts = pts.T
        if metric != "euclidean":
            raise ValidationError(f"unsupported metric {metric!r}")
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
        dist = 0.5 * (dist + dist.T)
        np.fill_diagonal(dist, 0.0)
        if ids is None:
            ids = tuple(range(pts.shape[0]))
        return cls(tuple(ids), dist, weights, tolerances)

    def to_json(self) -> str:
        doc = {
            "points": list(self.point_ids),
            "dist": [[float(v) for v in row] for row in self.dist],
            "weights": [float(v) for v in self.weights],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, *, tolerances: Tolerances = Tolerances()) -> "FiniteMmSpace":
        doc = json.loads(text)
        for key in ("points", "dist", "weights"):
            if key not in doc:
                raise ValidationError(f"space document is missing {key!r}")
        return cls(tuple(doc["points"]), np.asarray(doc["dist"], dtype=float),
                   np.asarray(doc["weights"], dtype=float), tolerances)


@dataclass(frozen=True)
class Coupling:
    """A nonnegative matrix with prescribed marginals."""

    matrix: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    marginal_tol: float = field(default=1e-10, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).copy()
        mu = np.asarray(self.mu, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        if m.ndim != 2 or m.shape != (mu.size, nu.size):
            raise ValidationError(
                f"coupling shape {m.shape} does not match marginals "
                f"({mu.size}, {nu.size})"
            )
        if np.any(m < -self.marginal_tol):
            raise ValidationError("coupling has a negative entry")
        row_err = float(np.max(np.abs(m.sum(axis=1) - mu), initial=0.0))
        col_err = float(np.max(np.abs(m.sum(axis=0) - nu), initial=0.0))
        if row_err > self.marginal_tol or col_err > self.marginal_tol:
            raise ValidationError(
                f"coupling marginals off by (rows {row_err:.3e}, cols {col_err:.3e}), "
                f"tolerance {self.marginal_tol:.3e}"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mu", np.array(mu, copy=True))
        object.__setattr__(self, "nu", np.array(nu, copy=True))

    def cost(self, cost_matrix) -> float:
        return float(np.sum(self.matrix * np.asarray(cost_matrix, dtype=float)))

    def mass_on(self, mask) -> float:
        return float(np.sum(self.matrix[np.asarray(mask, dtype=bool)]))


def condition_measure(mu, subset, *, tol: float = 1e-12) -> np.ndarray:
    """Restrict ``mu`` to ``subset`` and renormalise.

    Raises ``ZeroMassSet`` when the subset carries no mass.
    """
    mu = np.asarray(mu, dtype=float)
    idx = as_index_array(subset, mu.size)
    mass = float(mu[idx].sum())
    if mass <= 0.0:
        raise ZeroMassSet(f"subset of mass {mass} cannot be conditioned on")
    out = np.zeros_like(mu)
    out[idx] = mu[idx] / mass
    return out


def pushforward(mu, point_map, n_target: int | None = None) -> np.ndarray:
    """Push weights forward along a point map (array of target indices).

    The map must be defined (a valid target index) on the support of ``mu``;
    entries outside the support may be negative placeholders.
    """
    mu = np.asarray(mu, dtype=float)
    f = np.asarray(point_map, dtype=int)
    if f.shape != mu.shape:
        raise ValidationError("point map must assign a target to every point")
    support = mu > 0
    if n_target is None:
        n_target = int(f[support].max(initial=-1)) + 1 if support.any() else 0
    if support.any() and (f[support].min() < 0 or f[support].max() >= n_target):
        raise ValidationError("point map leaves the support of the measure")
    out = np.zeros(n_target, dtype=float)
    np.add.at(out, f[support], mu[support])
    return out


def partition_average(nu, partition: Iterable, mu, *, tol: float = 1e-12) -> np.ndarray:
    """Average ``nu`` over partition blocks using conditioned copies of ``mu``.

    Returns ``sum_j nu(B_j) * condition_measure(mu, B_j)``.  Blocks must be
    disjoint, ``nu`` must vanish outside their union, and every block that
    carries ``nu``-mass must carry ``mu``-mass.
    """
    nu = np.asarray(nu, dtype=float)
    mu = np.asarray(mu, dtype=float)
    n = nu.size
    blocks = [as_index_array(b, n) for b in partition]
    covered = np.zeros(n, dtype=bool)
    for b in blocks:
        if covered[b].any():
            raise ValidationError("partition blocks are not disjoint")
        covered[b] = True
    stray = float(nu[~covered].sum())
    if stray > tol:
        raise ValidationError(
            f"nu carries mass {stray} outside the partition blocks"
        )
    out = np.zeros(n, dtype=float)
    for b in blocks:
        nb = float(nu[b].sum())
        if nb <= 0.0:
            continue
        mb = float(mu[b].sum())
        if mb <= 0.0:
            raise ZeroMassSet(
                f"block with nu-mass {nb} has zero mu-mass"
            )
        out[b] += nb * mu[b] / mb
    return out


def subset_diameter(dist, subset) -> float:
    """Max pairwise distance over a subset; 0 for the empty set and singletons."""
    dist = np.asarray(dist, dtype=float)
    idx = as_index_array(subset, dist.shape[0])
    if idx.size <= 1:
        return 0.0
    sub = dist[np.ix_(idx, idx)]
    return float(sub.max())
