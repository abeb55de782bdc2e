"""Optimal transport and measure-comparison solvers.

Covers the exact quadratic-cost transportation problem on finite spaces (LP
with a dual certificate), monotone quantile transport and displacement
interpolation for piecewise-constant densities on segments and circles, the
Prokhorov distance through coupling feasibility, and the Ky Fan metric.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .config import RunConfig, Tolerances, default_config
from .core import Coupling, FiniteMmSpace, prob_weights
from .errors import (
    DegenerateDensity,
    NonSegment,
    SolverFailure,
    ValidationError,
)

__all__ = [
    "WeightedOneDimSpace",
    "interval_mass",
    "TransportPlanReport",
    "w2_exact",
    "w2_quantile_1d",
    "w2_circle_quantile",
    "displacement_interpolate_1d",
    "prokhorov",
    "prokhorov_from_distances",
    "ky_fan",
    "box_upper_bound_common_space",
    "discretize",
    "PiecewiseQuantile",
]


# ---------------------------------------------------------------------------
# one-dimensional weighted spaces


@dataclass(frozen=True)
class WeightedOneDimSpace:
    """A segment or circle carrying a density sampled on a uniform grid.

    ``grid`` holds the M cell centers (arclength coordinates) of a uniform
    partition into cells of width ``h = total_length / M``; ``log_density``
    holds log(d mu / d length) per cell.  Densities are treated as piecewise
    constant on cells, and the declared quadrature rule is the midpoint rule
    ``mass = h * sum(exp(log_density))``, which must equal 1 within 1e-8.
    For circles ``total_length`` is the circumference.
    """

    kind: str
    total_length: float
    grid: np.ndarray
    log_density: np.ndarray
    tolerances: Tolerances = field(default=Tolerances(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("segment", "circle"):
            raise ValidationError(f"kind must be segment or circle, got {self.kind!r}")
        grid = np.asarray(self.grid, dtype=float).copy()
        ld = np.asarray(self.log_density, dtype=float).copy()
        if grid.ndim != 1 or grid.size < 1:
            raise ValidationError("grid must be a nonempty vector")
        if ld.shape != grid.shape:
            raise ValidationError("log_density must match the grid")
        if not np.all(np.isfinite(grid)):
            raise ValidationError("grid must be finite")
        if np.any(np.isnan(ld)) or np.any(ld == np.inf):
            raise ValidationError("log_density must not contain NaN or +inf "
                                  "(-inf marks empty cells)")
        L = float(self.total_length)
        if not (L > 0 and math.isfinite(L)):
            raise ValidationError(f"total_length must be positive, got {L}")
        m = grid.size
        h = L / m
        if m > 1:
            steps = np.diff(grid)
            if np.any(steps <= 0):
                raise ValidationError("grid must be strictly increasing")
            if np.max(np.abs(steps - h)) > 1e-12 * max(abs(L), 1.0):
                raise ValidationError(
                    "grid must be uniform with spacing total_length / M"
                )
        mass = float(np.exp(ld).sum() * h)
        if abs(mass - 1.0) > self.tolerances.mass_1d:
            raise ValidationError(
                f"density mass {mass!r} deviates from 1 beyond {self.tolerances.mass_1d}"
            )
        grid.flags.writeable = False
        ld.flags.writeable = False
        object.__setattr__(self, "total_length", L)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "log_density", ld)

    @property
    def m(self) -> int:
        return self.grid.size

    @property
    def h(self) -> float:
        return self.total_length / self.grid.size

    @property
    def cell_edges(self) -> np.ndarray:
        return np.concatenate([self.grid - self.h / 2.0, [self.grid[-1] + self.h / 2.0]])

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    @property
    def cell_masses(self) -> np.ndarray:
        return np.exp(self.log_density) * self.h

    @classmethod
    def from_density(cls, kind: str, total_length: float, m: int, density,
                     *, origin: float = 0.0, normalize: bool = False,
                     tolerances: Tolerances = Tolerances()) -> "WeightedOneDimSpace":
        """Sample a density callable (or array) on the canonical cell centers."""
        h = float(total_length) / m
        grid = origin + (np.arange(m) + 0.5) * h
        rho = np.asarray(density(grid) if callable(density) else density, dtype=float)
        if rho.shape != grid.shape:
            raise ValidationError("density samples must match the grid")
        if np.any(rho <= 0):
            raise ValidationError("density samples must be positive; use masses 0 "
                                  "through measures on a sub-grid instead")
        if normalize:
            rho = rho / (rho.sum() * h)
        return cls(kind, float(total_length), grid, np.log(rho), tolerances)

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "total_length": float(self.total_length),
            "grid_size": int(self.m),
            "log_density": [float(v) for v in self.log_density],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, *, tolerances: Tolerances = Tolerances()) -> "WeightedOneDimSpace":
        doc = json.loads(text)
        for key in ("kind", "total_length", "grid_size", "log_density"):
            if key not in doc:
                raise ValidationError(f"1D space document is missing {key!r}")
        m = int(doc["grid_size"])
        L = float(doc["total_length"])
        ld = np.asarray(doc["log_density"], dtype=float)
        if ld.size != m:
            raise ValidationError(
                f"log_density has {ld.size} samples for grid_size {m}"
            )
        grid = (np.arange(m) + 0.5) * (L / m)
        return cls(doc["kind"], L, grid, ld, tolerances)


def interval_mass(space: WeightedOneDimSpace, lo: float, hi: float) -> float:
    """Mass of a coordinate interval under the piecewise-constant density."""
    edges = space.cell_edges
    overlap = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo),
                      0.0, None)
    return float(np.sum(overlap * space.density))


def discretize(space: WeightedOneDimSpace) -> FiniteMmSpace:
    """Atoms at cell centers with cell masses; circle metric where relevant."""
    x = space.grid
    if space.kind == "segment":
        dist = np.abs(x[:, None] - x[None, :])
    else:
        d = np.abs(x[:, None] - x[None, :])
        dist = np.minimum(d, space.total_length - d)
    w = space.cell_masses
    w = w / w.sum()
    return FiniteMmSpace(tuple(range(space.m)), dist, w, space.tolerances)


def _validate_density(space: WeightedOneDimSpace, rho, *, mass_tol: float = 1e-6) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape != space.grid.shape:
        raise ValidationError("density samples must match the space grid")
    if np.any(rho < 0) or not np.all(np.isfinite(rho)):
        raise ValidationError("density samples must be finite and nonnegative")
    mass = float(rho.sum() * space.h)
    if abs(mass - 1.0) > mass_tol:
        raise ValidationError(f"density mass {mass!r} deviates from 1 beyond {mass_tol}")
    return rho


def _require_contiguous_support(rho: np.ndarray) -> None:
    pos = np.flatnonzero(rho > 0)
    if pos.size == 0:
        raise DegenerateDensity("density has empty support")
    if np.any(np.diff(pos) > 1):
        raise DegenerateDensity(
            "density vanishes on an interior grid cell of its support"
        )


# ---------------------------------------------------------------------------
# piecewise-linear quantile functions


@dataclass(frozen=True)
class PiecewiseQuantile:
    """Left-continuous quantile function, affine on mass intervals.

    ``breaks`` are cumulative masses (0 = b_0 < ... < b_k = 1); on
    (b_{j-1}, b_j] the quantile moves affinely from x_lo[j-1] to x_hi[j-1].
    Atomic measures use x_lo == x_hi.  ``cells`` maps each piece back to the
    originating grid cell (or atom) index.
    """

    breaks: np.ndarray
    x_lo: np.ndarray
    x_hi: np.ndarray
    cells: np.ndarray | None = None

    @classmethod
    def from_cells(cls, edges: np.ndarray, masses: np.ndarray) -> "PiecewiseQuantile":
        pos = masses > 0
        w = masses[pos]
        total = w.sum()
        if total <= 0:
            raise ValidationError("measure has zero total mass")
        cum = np.concatenate([[0.0], np.cumsum(w)]) / total
        cum[-1] = 1.0
        lo = edges[:-1][pos]
        hi = edges[1:][pos]
        return cls(cum, lo, hi, np.flatnonzero(pos))

    @classmethod
    def from_atoms(cls, xs: np.ndarray, ws: np.ndarray) -> "PiecewiseQuantile":
        order = np.argsort(xs, kind="stable")
        xs = np.asarray(xs, dtype=float)[order]
        ws = np.asarray(ws, dtype=float)[order]
        pos = ws > 0
        idx = order[pos]
        xs, ws = xs[pos], ws[pos]
        total = ws.sum()
        if total <= 0:
            raise ValidationError("measure has zero total mass")
        cum = np.concatenate([[0.0], np.cumsum(ws)]) / total
        cum[-1] = 1.0
        return cls(cum, xs, xs, idx)

    def piece_of(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breaks, u, side="right") - 1
        return np.clip(idx, 0, self.breaks.size - 2)

    def affine_at(self, u: np.ndarray, piece: np.ndarray) -> np.ndarray:
        b0 = self.breaks[piece]
        b1 = self.breaks[piece + 1]
        frac = np.where(b1 > b0, (u - b0) / np.where(b1 > b0, b1 - b0, 1.0), 0.0)
        return self.x_lo[piece] + frac * (self.x_hi[piece] - self.x_lo[piece])

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self.affine_at(u, self.piece_of(u))


def _merged_intervals(q0: PiecewiseQuantile, q1: PiecewiseQuantile):
    """Mass intervals on which both quantiles are affine."""
    breaks = np.union1d(q0.breaks, q1.breaks)
    a = breaks[:-1]
    b = breaks[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    mid = 0.5 * (a + b)
    p0 = q0.piece_of(mid)
    p1 = q1.piece_of(mid)
    return a, b, mid, p0, p1


def quantile_sq_distance(q0: PiecewiseQuantile, q1: PiecewiseQuantile) -> float:
    """Exact integral of (Q0 - Q1)^2 du; Simpson is exact per affine piece."""
    a, b, mid, p0, p1 = _merged_intervals(q0, q1)
    da = q0.affine_at(a, p0) - q1.affine_at(a, p1)
    dm = q0.affine_at(mid, p0) - q1.affine_at(mid, p1)
    db = q0.affine_at(b, p0) - q1.affine_at(b, p1)
    return float(np.sum((b - a) / 6.0 * (da * da + 4.0 * dm * dm + db * db)))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class TransportPlanReport:
    """Outcome of a transport computation."""

    value: float
    coupling: Coupling | None
    dual_gap: float
    iterations: int
    method: str
    map_description: str | None = None


# ---------------------------------------------------------------------------
# exact transportation LP


def w2_exact(space: FiniteMmSpace, mu, nu, *,
             config: RunConfig | None = None) -> TransportPlanReport:
    """Quadratic-cost transport distance via the transportation LP.

    Solved with the HiGHS dual simplex; optimality is certified from the
    returned duals (nonnegative reduced costs and a primal-dual gap below
    ``solver`` tolerance times the cost scale), otherwise ``SolverFailure``
    is raised.
    """
    cfg = config or default_config()
    tol = cfg.tolerances.solver
    mu = prob_weights(mu, tol=cfg.tolerances.structural)
    nu = prob_weights(nu, tol=cfg.tolerances.structural)
    if mu.size != space.n or nu.size != space.n:
        raise ValidationError("weights do not match the space")
    sa = np.flatnonzero(mu > 0)
    sb = np.flatnonzero(nu > 0)
    wa, wb = mu[sa], nu[sb]
    cost = space.dist[np.ix_(sa, sb)] ** 2
    na, nb = sa.size, sb.size
    c = cost.ravel()
    rows = []
    cols = []
    for i in range(na):
        rows.extend([i] * nb)
        cols.extend(range(i * nb, (i + 1) * nb))
    for j in range(nb):
        rows.extend([na + j] * na)
        cols.extend(range(j, na * nb, nb))
    data = np.ones(len(rows))
    A_eq = sparse.coo_matrix((data, (rows, cols)), shape=(na + nb, na * nb)).tocsr()
    b_eq = np.concatenate([wa, wb])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise SolverFailure(f"transport LP failed: {res.message}")
    scale = max(float(cost.max(initial=0.0)), 1.0)
    y = res.eqlin.marginals
    u, v = y[:na], y[na:]
    reduced = cost - u[:, None] - v[None, :]
    if float(reduced.min(initial=0.0)) < -tol * scale:
        raise SolverFailure("dual infeasibility: negative reduced cost")
    gap = abs(float(res.fun) - float(u @ wa + v @ wb))
    if gap > tol * scale:
        raise SolverFailure(f"primal-dual gap {gap:.3e} exceeds tolerance")
    plan = np.zeros((space.n, space.n))
    plan[np.ix_(sa, sb)] = res.x.reshape(na, nb)
    coupling = Coupling(plan, mu, nu, marginal_tol=max(1e-10, tol * 10))
    value = math.sqrt(max(float(res.fun), 0.0))
    return TransportPlanReport(value=value, coupling=coupling, dual_gap=gap,
                               iterations=int(res.nit), method="lp-highs-ds")


# ---------------------------------------------------------------------------
# one-dimensional transport


def w2_quantile_1d(space: WeightedOneDimSpace, rho0, rho1, *,
                   model: str = "cells") -> TransportPlanReport:
    """Monotone transport cost on a segment via quantile functions.

    ``model="cells"`` treats the densities as piecewise constant per cell
    (the continuum measure, evaluated exactly); ``model="atoms"`` collapses
    each cell to a point mass at its center, which matches the transportation
    LP on the discretized atoms to solver precision.
    """
    if space.kind != "segment":
        raise NonSegment("quantile transport requires a segment space")
    rho0 = _validate_density(space, rho0)
    rho1 = _validate_density(space, rho1)
    if model == "cells":
        q0 = PiecewiseQuantile.from_cells(space.cell_edges, rho0 * space.h)
        q1 = PiecewiseQuantile.from_cells(space.cell_edges, rho1 * space.h)
    elif model == "atoms":
        q0 = PiecewiseQuantile.from_atoms(space.grid, rho0 * space.h)
        q1 = PiecewiseQuantile.from_atoms(space.grid, rho1 * space.h)
    else:
        raise ValidationError(f"unknown quantile model {model!r}")
    value = math.sqrt(max(quantile_sq_distance(q0, q1), 0.0))
    return TransportPlanReport(value=value, coupling=None, dual_gap=0.0,
                               iterations=0, method=f"quantile-{model}",
                               map_description="monotone (quantile) coupling")


def w2_circle_quantile(space: WeightedOneDimSpace, rho0, rho1):
    """Circle transport as the best segment transport over grid cut points.

    Returns ``(value, cut_index)``; the cut is a cell boundary index and ties
    are broken toward the positively-oriented (smallest-index) cut.
    """
    if space.kind != "circle":
        raise ValidationError("cut search applies to circle spaces")
    rho0 = _validate_density(space, rho0)
    rho1 = _validate_density(space, rho1)
    m = space.m
    h = space.h
    edges = np.arange(m + 1) * h
    best = (math.inf, -1)
    m0 = rho0 * h
    m1 = rho1 * h
    for cut in range(m):
        w0 = np.roll(m0, -cut)
        w1 = np.roll(m1, -cut)
        q0 = PiecewiseQuantile.from_cells(edges, w0)
        q1 = PiecewiseQuantile.from_cells(edges, w1)
        val = quantile_sq_distance(q0, q1)
        if val < best[0] - 1e-15:
            best = (val, cut)
    return math.sqrt(max(best[0], 0.0)), best[1]


def displacement_interpolate_1d(space: WeightedOneDimSpace, rho0, rho1,
                                t: float) -> np.ndarray:
    """Density of the monotone-map interpolant at fraction ``t``.

    The exact interpolant of piecewise-constant densities is piecewise
    constant on the merged quantile intervals; it is resampled onto the
    space grid by exact cell averaging.  For circles the caller must supply
    densities already aligned so transport does not cross the grid boundary
    (an optimal cut has been selected upstream).
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0,1], got {t}")
    rho0 = _validate_density(space, rho0)
    rho1 = _validate_density(space, rho1)
    _require_contiguous_support(rho0)
    _require_contiguous_support(rho1)
    edges = space.cell_edges
    h = space.h
    q0 = PiecewiseQuantile.from_cells(edges, rho0 * h)
    q1 = PiecewiseQuantile.from_cells(edges, rho1 * h)
    a, b, mid, p0, p1 = _merged_intervals(q0, q1)
    xa = (1.0 - t) * q0.affine_at(a, p0) + t * q1.affine_at(a, p1)
    xb = (1.0 - t) * q0.affine_at(b, p0) + t * q1.affine_at(b, p1)
    masses = b - a
    out = np.zeros(space.m)
    x0 = edges[0]
    tiny = 1e-15 * max(space.total_length, 1.0)
    for lo, hi, mass in zip(xa, xb, masses):
        if hi - lo <= tiny:
            cell = int(np.clip((0.5 * (lo + hi) - x0) // h, 0, space.m - 1))
            out[cell] += mass
            continue
        c_lo = int(np.clip((lo - x0) // h, 0, space.m - 1))
        c_hi = int(np.clip((hi - x0) // h, 0, space.m - 1))
        if c_lo == c_hi:
            out[c_lo] += mass
            continue
        dens = mass / (hi - lo)
        out[c_lo] += dens * (edges[c_lo + 1] - lo)
        out[c_hi] += dens * (hi - edges[c_hi])
        if c_hi > c_lo + 1:
            out[c_lo + 1:c_hi] += dens * h
    total = out.sum()
    if abs(total - 1.0) > space.tolerances.interp_mass:
        raise SolverFailure(f"interpolant lost mass: total {total!r}")
    return out / h


# ---------------------------------------------------------------------------
# Prokhorov distance via coupling feasibility


def _max_close_mass(allowed: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> float:
    """Largest sub-coupling mass supported on allowed pairs (LP relaxation of
    the feasibility in the coupling characterisation of the distance)."""
    if allowed.all():
        return 1.0
    ii, jj = np.nonzero(allowed)
    if ii.size == 0:
        return 0.0
    na, nb = allowed.shape
    nvar = ii.size
    rows = np.concatenate([ii, na + jj])
    cols = np.concatenate([np.arange(nvar), np.arange(nvar)])
    A_ub = sparse.coo_matrix((np.ones(2 * nvar), (rows, cols)),
                             shape=(na + nb, nvar)).tocsr()
    b_ub = np.concatenate([wa, wb])
    res = linprog(-np.ones(nvar), A_ub=A_ub, b_ub=b_ub, bounds=(0, None),
                  method="highs")
    if res.status != 0:
        raise SolverFailure(f"close-mass LP failed: {res.message}")
    return float(-res.fun)


def prokhorov_from_distances(dist: np.ndarray, wa, wb, *,
                             feas_tol: float = 1e-9) -> float:
    """Smallest eps admitting a coupling with mass at most eps on pairs
    farther than eps.

    The feasible set only changes at pairwise distances, so the infimum is
    found exactly: binary search over sorted distances for the first
    candidate ``d_k`` with ``F_k >= 1 - d_k`` (``F_k`` the maximal coupling
    mass on pairs within ``d_k``), then compare with the crossing point
    ``1 - F_{k-1}`` of the previous piece.
    """
    dist = np.asarray(dist, dtype=float)
    wa = np.asarray(wa, dtype=float)
    wb = np.asarray(wb, dtype=float)
    cands = np.unique(np.concatenate([[0.0], dist.ravel()]))

    def F(k: int) -> float:
        return _max_close_mass(dist <= cands[k], wa, wb)

    def feasible(k: int) -> bool:
        return F(k) >= 1.0 - cands[k] - feas_tol

    lo, hi = 0, cands.size - 1
    if feasible(lo):
        return float(cands[0])
    while hi - lo > 1:  # feasible(hi) always holds: all mass within max dist
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    crossing = 1.0 - F(hi - 1)
    return float(min(cands[hi], max(crossing, 0.0)))


def prokhorov(space: FiniteMmSpace, mu, nu, *,
              config: RunConfig | None = None) -> float:
    """Prokhorov distance between two weight vectors on a common space."""
    cfg = config or default_config()
    mu = prob_weights(mu, tol=cfg.tolerances.structural)
    nu = prob_weights(nu, tol=cfg.tolerances.structural)
    if mu.size != space.n or nu.size != space.n:
        raise ValidationError("weights do not match the space")
    sa = np.flatnonzero(mu > 0)
    sb = np.flatnonzero(nu > 0)
    return prokhorov_from_distances(space.dist[np.ix_(sa, sb)], mu[sa], nu[sb],
                                    feas_tol=cfg.tolerances.entropy)


def box_upper_bound_common_space(space: FiniteMmSpace, mu, nu, *,
                                 config: RunConfig | None = None) -> float:
    """Twice the Prokhorov distance: an upper bound for the box distance
    between the two mm-structures on the same underlying space."""
    return 2.0 * prokhorov(space, mu, nu, config=config)


# ---------------------------------------------------------------------------
# Ky Fan metric


def ky_fan(weights, f, g) -> float:
    """Exact infimum of eps with mass(|f - g| > eps) <= eps.

    The survival function is a step function of eps, so the infimum is either
    a jump location or the crossing point of a constant piece.
    """
    w = prob_weights(weights)
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != w.shape or g.shape != w.shape:
        raise ValidationError("function samples must match the weights")
    gaps = np.abs(f - g)
    order = np.argsort(gaps, kind="stable")
    gs = gaps[order]
    ws = w[order]
    levels, first = np.unique(gs, return_index=True)
    csum = np.cumsum(ws)
    last = np.append(first[1:], gs.size) - 1
    mass_above = 1.0 - csum[last]  # mass with gap strictly above each level
    if levels[0] > 0.0:
        levels = np.concatenate([[0.0], levels])
        mass_above = np.concatenate([[1.0], mass_above])
    best = math.inf
    for i, (lvl, above) in enumerate(zip(levels, mass_above)):
        cand = max(lvl, float(above))
        nxt = levels[i + 1] if i + 1 < levels.size else math.inf
        if cand < nxt or cand == lvl:
            best = min(best, cand)
    return float(best)
