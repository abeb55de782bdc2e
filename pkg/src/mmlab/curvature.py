"""Entropy along transport interpolations and curvature-dimension checks.

The inequality checkers evaluate both sides of the entropy-convexity
conditions on weighted one-dimensional spaces using the monotone (quantile)
coupling and its displacement interpolation; that coupling choice is recorded
in every report.  Conventions: 0^{1/N} = +inf for N < 0, and 0 * inf = 0
inside integrands (coupling-null sets never contribute).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .coefficients import omega, sigma_range_sup, sigma_vals, tau_vals
from .config import RunConfig, default_config
from .core import (
    EXT_INF,
    ExtReal,
    FiniteMmSpace,
    condition_measure,
    partition_average,
    pushforward,
    subset_diameter,
)
from .errors import (
    DomainError,
    InvalidDimension,
    ValidationError,
)
from .transport import (
    PiecewiseQuantile,
    WeightedOneDimSpace,
    _merged_intervals,
    _validate_density,
    displacement_interpolate_1d,
    interval_mass,
    w2_exact,
)

__all__ = [
    "renyi_entropy",
    "renyi_entropy_1d",
    "cd_rhs",
    "cd_check_1d",
    "CdReport",
    "bm_check",
    "BmReport",
    "kn_convexity_check",
    "ConvexityReport",
    "convexity_order_study",
    "entropy_inequality_suite",
    "EntropySuiteReport",
    "volume_growth_probe",
    "VolumeGrowthReport",
]


# ---------------------------------------------------------------------------
# Renyi entropy


def renyi_entropy(mu, nu, nprime: float) -> ExtReal:
    """Entropy of nu relative to mu on a finite space; +inf when nu is not
    absolutely continuous with respect to mu.

    Takes mass vectors; the value is sum (nu_i/mu_i)^{1-1/N'} mu_i over the
    support of mu, which is always >= 1 with equality only at nu = mu.
    """
    if nprime >= 0:
        raise InvalidDimension(f"N' must be negative, got {nprime}")
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != nu.shape:
        raise ValidationError("mass vectors must have equal length")
    if np.any((nu > 0) & (mu == 0)):
        return EXT_INF
    pos = mu > 0
    ratio = nu[pos] / mu[pos]
    val = float(np.sum(ratio ** (1.0 - 1.0 / nprime) * mu[pos]))
    return ExtReal(val) if math.isfinite(val) else EXT_INF


def renyi_entropy_1d(space: WeightedOneDimSpace, rho_nu, nprime: float) -> ExtReal:
    """Entropy of the density ``rho_nu`` (per length) relative to the space
    measure, both piecewise constant on cells."""
    rho_nu = _validate_density(space, rho_nu)
    return renyi_entropy(space.cell_masses, rho_nu * space.h, nprime)


# ---------------------------------------------------------------------------
# right-hand side of the entropy-convexity inequalities


def _gauss_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w  # mapped to [0, 1]


def _coef_vals(variant: str, K: float, nprime: float, t: float,
               thetas: np.ndarray, index: int) -> np.ndarray:
    frac = (1.0 - t) if index == 0 else t
    if variant == "CD":
        return tau_vals(K, nprime, frac, thetas)
    if variant == "CDstar":
        return sigma_vals(K / nprime, frac, thetas)
    raise ValidationError(f"variant must be CD or CDstar, got {variant!r}")


def cd_rhs(space: WeightedOneDimSpace, rho0, rho1, K: float, nprime: float,
           t: float, variant: str = "CD", *,
           config: RunConfig | None = None) -> ExtReal:
    """Distortion-weighted endpoint-entropy integral along the monotone
    coupling of the two densities.

    Integration runs over the quantile parametrisation: on each merged mass
    interval both quantiles are affine and the relative densities constant,
    so only the distortion coefficient needs quadrature (Gauss-Legendre of
    the configured order; intervals on which the displacement changes sign
    are split at the crossing).  Returns +inf as soon as a coefficient hits
    its closed branch.
    """
    cfg = config or default_config()
    if nprime >= 0:
        raise InvalidDimension(f"N' must be negative, got {nprime}")
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0,1], got {t}")
    rho0 = _validate_density(space, rho0)
    rho1 = _validate_density(space, rho1)
    mu_rho = space.density
    h = space.h
    q0 = PiecewiseQuantile.from_cells(space.cell_edges, rho0 * h)
    q1 = PiecewiseQuantile.from_cells(space.cell_edges, rho1 * h)
    a, b, mid, p0, p1 = _merged_intervals(q0, q1)
    d_a = q0.affine_at(a, p0) - q1.affine_at(a, p1)
    d_b = q0.affine_at(b, p0) - q1.affine_at(b, p1)
    # split intervals where the signed displacement crosses zero
    cross = d_a * d_b < 0
    if np.any(cross):
        root = a[cross] + (b[cross] - a[cross]) * d_a[cross] / (d_a[cross] - d_b[cross])
        b_left = b.copy()
        b_left[cross] = root
        a = np.concatenate([a, root])
        b = np.concatenate([b_left, b[cross]])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
        mid = 0.5 * (a + b)
        p0 = q0.piece_of(mid)
        p1 = q1.piece_of(mid)
        d_a = q0.affine_at(a, p0) - q1.affine_at(a, p1)
        d_b = q0.affine_at(b, p0) - q1.affine_at(b, p1)
    theta_max = float(np.max(np.maximum(np.abs(d_a), np.abs(d_b)), initial=0.0))
    kappa = K / (nprime - 1.0) if variant == "CD" else K / nprime
    if kappa > 0 and theta_max >= omega(kappa):
        return EXT_INF
    gx, gw = _gauss_nodes(cfg.cd_quad_order)
    # displacement magnitude at quadrature nodes, affine per interval
    th = np.abs(d_a[:, None] + (d_b - d_a)[:, None] * gx[None, :])
    lengths = b - a
    total = 0.0
    for index, (q, p, rho) in enumerate(((q0, p0, rho0), (q1, p1, rho1))):
        cells = q.cells[p]
        rel = rho[cells] / mu_rho[cells]
        coef = _coef_vals(variant, K, nprime, t, th.ravel(), index)
        coef = coef.reshape(th.shape)
        if np.any(np.isinf(coef)):
            return EXT_INF
        per_interval = (coef * gw[None, :]).sum(axis=1) * lengths
        total += float(np.sum(per_interval * rel ** (-1.0 / nprime)))
    return ExtReal(total)


# ---------------------------------------------------------------------------
# full checks


@dataclass(frozen=True)
class CdCell:
    t: float
    nprime: float
    lhs: float
    rhs: float
    margin: float
    rel_margin: float
    ok: bool


@dataclass(frozen=True)
class CdReport:
    """Grid of entropy-convexity margins with the budget used."""

    variant: str
    K: float
    N: float
    t_grid: tuple
    nprime_grid: tuple
    cells: tuple
    verdict: bool
    min_rel_margin: float
    worst_t: float
    worst_nprime: float
    budget: dict
    coupling: str = "monotone quantile coupling"
    cut: int | None = None

    def to_json(self) -> str:
        doc = {
            "variant": self.variant,
            "K": self.K,
            "N": self.N,
            "t_grid": list(self.t_grid),
            "nprime_grid": list(self.nprime_grid),
            "cells": [{"t": c.t, "nprime": c.nprime, "lhs": c.lhs,
                       "rhs": c.rhs, "margin": c.margin,
                       "rel_margin": c.rel_margin, "ok": c.ok}
                      for c in self.cells],
            "verdict": self.verdict,
            "min_rel_margin": self.min_rel_margin,
            "worst_t": self.worst_t,
            "worst_nprime": self.worst_nprime,
            "budget": self.budget,
            "coupling": self.coupling,
            "cut": self.cut,
        }
        return json.dumps(doc, sort_keys=True)


def _margin(lhs: ExtReal, rhs: ExtReal) -> tuple[float, float, float]:
    """(margin, rel_margin, scale) with infinity conventions."""
    if rhs.is_inf and lhs.is_inf:
        return 0.0, 0.0, 1.0
    if rhs.is_inf:
        return math.inf, math.inf, 1.0
    if lhs.is_inf:
        return -math.inf, -math.inf, 1.0
    scale = max(1.0, lhs.value, rhs.value)
    m = rhs.value - lhs.value
    return m, m / scale, scale


def _unroll_circle(space: WeightedOneDimSpace, rho0, rho1, cut):
    """Rotate a circle so the joint support sits inside the segment.

    Without an explicit cut the joint support must fit into an arc shorter
    than half the circumference (the monotone geodesic is then unambiguous);
    otherwise the caller must select a cut cell boundary."""
    m = space.m
    pos = (np.asarray(rho0) > 0) | (np.asarray(rho1) > 0)
    if cut is None:
        gaps = ~pos
        if not gaps.any():
            raise ValidationError(
                "full-circle supports require an explicit cut choice"
            )
        # longest circular run of empty cells
        idx = np.flatnonzero(gaps)
        doubled = np.flatnonzero(np.concatenate([gaps, gaps]))
        best_len, best_end = 0, idx[0]
        run = 1
        for i in range(1, doubled.size):
            run = run + 1 if doubled[i] == doubled[i - 1] + 1 else 1
            if run > best_len and doubled[i] < 2 * m:
                best_len, best_end = run, doubled[i]
        if best_len * space.h <= space.total_length / 2.0:
            raise ValidationError(
                "joint support exceeds a half-circle; pass an explicit cut"
            )
        shift = int((best_end + 1) % m)
    else:
        shift = int(cut) % m
    seg = WeightedOneDimSpace("segment", space.total_length, space.grid,
                              np.roll(space.log_density, -shift),
                              space.tolerances)
    return seg, np.roll(rho0, -shift), np.roll(rho1, -shift), shift


def cd_budget(h: float, cfg: RunConfig) -> float:
    return cfg.cd_budget_c1 * h + cfg.cd_budget_c2 * h * h


def cd_check_1d(space: WeightedOneDimSpace, rho0, rho1, K: float, N: float,
                t_grid=None, nprime_grid=None, variant: str = "CD", *,
                cut: int | None = None,
                config: RunConfig | None = None) -> CdReport:
    """Check the entropy-convexity inequality along the monotone geodesic.

    For each (t, N') on the grids the interpolant entropy is compared with
    the distortion-weighted endpoint integral; the verdict passes when every
    relative margin stays above -tol(h) with the configured discretisation
    budget tol(h) = c1 h + c2 h^2 (margins are normalised by the larger of
    the two sides because entropies grow rapidly as N' approaches 0).
    """
    cfg = config or default_config()
    if N >= 0:
        raise InvalidDimension(f"N must be negative, got {N}")
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.0, cfg.t_grid_size)
    if nprime_grid is None:
        nprime_grid = [x for x in (N, N / 2.0, N / 4.0, -0.1) if N <= x < 0]
        nprime_grid = sorted(set(nprime_grid))
    for np_ in nprime_grid:
        if not (N - 1e-12 <= np_ < 0):
            raise ValidationError(f"N' = {np_} outside [N, 0)")
    shift = None
    if space.kind == "circle":
        space, rho0, rho1, shift = _unroll_circle(space, rho0, rho1, cut)
    else:
        rho0 = _validate_density(space, rho0)
        rho1 = _validate_density(space, rho1)
    tol = cd_budget(space.h, cfg)
    cells = []
    worst = (math.inf, None, None)
    for t in t_grid:
        rho_t = displacement_interpolate_1d(space, rho0, rho1, float(t))
        for np_ in nprime_grid:
            lhs = renyi_entropy_1d(space, rho_t, float(np_))
            rhs = cd_rhs(space, rho0, rho1, K, float(np_), float(t), variant,
                         config=cfg)
            margin, rel, _ = _margin(lhs, rhs)
            ok = rel >= -tol
            cells.append(CdCell(float(t), float(np_),
                                lhs.value, rhs.value, margin, rel, ok))
            if rel < worst[0]:
                worst = (rel, float(t), float(np_))
    verdict = all(c.ok for c in cells)
    return CdReport(variant=variant, K=float(K), N=float(N),
                    t_grid=tuple(float(t) for t in t_grid),
                    nprime_grid=tuple(float(x) for x in nprime_grid),
                    cells=tuple(cells), verdict=verdict,
                    min_rel_margin=worst[0], worst_t=worst[1],
                    worst_nprime=worst[2],
                    budget={"h": space.h, "c1": cfg.cd_budget_c1,
                            "c2": cfg.cd_budget_c2, "tol": tol},
                    cut=shift)


# ---------------------------------------------------------------------------
# Brunn-Minkowski


def _power_inv_n(mass: float, N: float) -> ExtReal:
    if mass <= 0.0:
        return EXT_INF  # 0^{1/N} = +inf for N < 0
    return ExtReal(mass ** (1.0 / N))


@dataclass(frozen=True)
class BmReport:
    lhs: float
    rhs: float
    margin: float
    ok: bool
    t: float
    K: float
    N: float
    a_t: tuple
    masses: tuple
    sups: tuple


def bm_check(space: WeightedOneDimSpace, a0, a1, t: float, K: float, N: float,
             *, config: RunConfig | None = None) -> BmReport:
    """Interval Brunn-Minkowski margin with inverted exponents (N < 0).

    ``a0`` and ``a1`` are coordinate intervals (lo, hi); the t-intermediate
    set is the endpointwise interpolation, which is the geodesic image on
    segments and on circles whenever both sets sit inside a half-circle.
    """
    cfg = config or default_config()
    if N >= 0:
        raise InvalidDimension(f"N must be negative, got {N}")
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0,1], got {t}")
    (lo0, hi0), (lo1, hi1) = (map(float, a0), map(float, a1))
    if not (lo0 < hi0 and lo1 < hi1):
        raise ValidationError("intervals must be nondegenerate (lo < hi)")
    edges = space.cell_edges
    if min(lo0, lo1) < edges[0] - 1e-12 or max(hi0, hi1) > edges[-1] + 1e-12:
        raise ValidationError("intervals leave the coordinate domain")
    span = max(hi0, hi1) - min(lo0, lo1)
    if space.kind == "circle" and span > space.total_length / 2.0:
        raise ValidationError(
            "sets must sit inside a common half-circle; rotate the space"
        )
    if K < 0 and span >= math.pi * math.sqrt(N / K):
        raise DomainError(
            f"diam(A0 u A1) = {span} reaches pi*sqrt(N/K) for K = {K}"
        )
    d_min = max(0.0, lo1 - hi0, lo0 - hi1)
    d_max = max(abs(hi1 - lo0), abs(hi0 - lo1))
    kappa = K / N
    sup0 = sigma_range_sup(kappa, 1.0 - t, d_min, d_max)
    sup1 = sigma_range_sup(kappa, t, d_min, d_max)
    m0 = interval_mass(space, lo0, hi0)
    m1 = interval_mass(space, lo1, hi1)
    at = ((1.0 - t) * lo0 + t * lo1, (1.0 - t) * hi0 + t * hi1)
    mt = interval_mass(space, at[0], at[1])
    lhs = _power_inv_n(mt, N)
    rhs = sup0 * _power_inv_n(m0, N) + sup1 * _power_inv_n(m1, N)
    margin, rel, _ = _margin(lhs, rhs)
    ok = rel >= -1e-9
    return BmReport(lhs=lhs.value, rhs=rhs.value, margin=margin, ok=ok,
                    t=float(t), K=float(K), N=float(N), a_t=at,
                    masses=(m0, m1, mt), sups=(sup0.value, sup1.value))


# ---------------------------------------------------------------------------
# convexity certification


@dataclass(frozen=True)
class ConvexityReport:
    """Central-difference residuals of exp(-f/N) against the modulus K/N."""

    K: float
    N: float
    h: float
    periodic: bool
    residuals: np.ndarray = field(repr=False)
    min_residual: float
    argmin: int
    tol_c: float
    tol: float
    verdict: bool

    def to_json(self) -> str:
        doc = {
            "K": self.K, "N": self.N, "h": self.h, "periodic": self.periodic,
            "residuals": [float(v) for v in self.residuals],
            "min_residual": self.min_residual, "argmin": self.argmin,
            "tol_c": self.tol_c, "tol": self.tol, "verdict": self.verdict,
        }
        return json.dumps(doc, sort_keys=True)


def kn_convexity_check(f_samples, K: float, N: float, h: float, *,
                       periodic: bool = False,
                       config: RunConfig | None = None) -> ConvexityReport:
    """Check Hess exp(-f/N) >= -(K/N) exp(-f/N) by central differences.

    The pass threshold is c h^2 + slack where c bounds the stencil error
    through the (data-estimated) fourth difference of exp(-f/N), scaled by
    the configured safety factor.
    """
    cfg = config or default_config()
    if N >= 0:
        raise InvalidDimension(f"N must be negative, got {N}")
    f = np.asarray(f_samples, dtype=float)
    if f.ndim != 1 or f.size < 5:
        raise ValidationError("need at least five samples")
    if not np.all(np.isfinite(f)):
        raise ValidationError("f samples must be finite")
    g = np.exp(-f / N)
    if periodic:
        d2 = (np.roll(g, -1) - 2.0 * g + np.roll(g, 1)) / (h * h)
        d4 = (np.roll(g, -2) - 4.0 * np.roll(g, -1) + 6.0 * g
              - 4.0 * np.roll(g, 1) + np.roll(g, 2)) / h ** 4
        res = d2 + (K / N) * g
    else:
        d2 = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / (h * h)
        d4 = (g[4:] - 4.0 * g[3:-1] + 6.0 * g[2:-2] - 4.0 * g[1:-3] + g[:-4]) / h ** 4
        res = d2 + (K / N) * g[1:-1]
    c = cfg.convexity_safety * float(np.max(np.abs(d4))) / 12.0
    tol = c * h * h + cfg.convexity_slack
    i = int(np.argmin(res))
    return ConvexityReport(K=float(K), N=float(N), h=float(h),
                           periodic=periodic, residuals=res,
                           min_residual=float(res[i]), argmin=i,
                           tol_c=c, tol=tol, verdict=bool(res[i] >= -tol))


def convexity_order_study(f, K: float, N: float, h_list, domain, *,
                          window=None, ref_refine: int = 4):
    """Residual error against a refined-step reference at shared points.

    For each h the residual field on the h-grid is compared with the
    residual computed at step h/ref_refine on the same points, max-normed
    over the window (defaults to the middle third of the domain).  Since the
    reference step scales with h its truncation bias cancels in the ratios,
    so second-order stencils give ratios near 4 when h is halved; keeping
    the refinement moderate also keeps cancellation roundoff below the
    signal.  Returns (errors, ratios).
    """
    lo, hi = map(float, domain)
    if window is None:
        window = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0)

    def residual_at(x: np.ndarray, step: float) -> np.ndarray:
        g = lambda z: np.exp(-np.asarray(f(z), dtype=float) / N)  # noqa: E731
        d2 = (g(x + step) - 2.0 * g(x) + g(x - step)) / (step * step)
        return d2 + (K / N) * g(x)

    errors = []
    for h in h_list:
        x = np.arange(lo, hi + h / 2.0, h)
        x = x[(x >= window[0]) & (x <= window[1])]
        err = np.max(np.abs(residual_at(x, h) - residual_at(x, h / ref_refine)))
        errors.append(float(err))
    ratios = [errors[i] / errors[i + 1] if errors[i + 1] > 0 else math.inf
              for i in range(len(errors) - 1)]
    return errors, ratios


# ---------------------------------------------------------------------------
# randomized entropy inequality suite


@dataclass(frozen=True)
class EntropySuiteReport:
    trials: int
    nprimes: tuple
    passes: dict
    failures: tuple

    @property
    def all_passed(self) -> bool:
        return not self.failures


def entropy_inequality_suite(space: FiniteMmSpace, n_trials: int,
                             nprimes=(-0.5, -1.0, -3.0), *, seed: int = 0,
                             config: RunConfig | None = None) -> EntropySuiteReport:
    """Randomised checks of the entropy inequalities used by the stability
    machinery: contraction under pushforward, the conditioning bound, and
    the partition-average bound together with its transport estimate
    W2(nu, nu_bar) <= 2 * max block diameter.

    Measures are drawn with full-support references (Dirichlet) and sparse
    absolutely continuous targets; failures are returned as data.
    """
    cfg = config or default_config()
    rng = np.random.default_rng(seed)
    tol = cfg.tolerances.entropy
    n = space.n
    passes = {"pushforward": 0, "conditioning": 0,
              "partition_entropy": 0, "partition_w2": 0}
    failures = []
    for trial in range(n_trials):
        mu = rng.dirichlet(np.ones(n))
        support = rng.random(n) < 0.75
        if not support.any():
            support[rng.integers(n)] = True
        nu = np.where(support, rng.random(n) + 1e-3, 0.0)
        nu /= nu.sum()
        npr = float(nprimes[trial % len(nprimes)])
        s_nu = renyi_entropy(mu, nu, npr)

        n_target = int(rng.integers(1, n + 1))
        pmap = rng.integers(0, n_target, size=n)
        s_push = renyi_entropy(pushforward(mu, pmap, n_target),
                               pushforward(nu, pmap, n_target), npr)
        if s_push <= s_nu + tol:
            passes["pushforward"] += 1
        else:
            failures.append({"check": "pushforward", "trial": trial,
                             "lhs": s_push.value, "rhs": s_nu.value})

        while True:
            b_mask = rng.random(n) < 0.5
            if float(nu[b_mask].sum()) > 0:
                break
        nb = float(nu[b_mask].sum())
        s_cond = renyi_entropy(mu, condition_measure(nu, b_mask), npr)
        lhs = nb ** (1.0 - 1.0 / npr) * s_cond.value
        if lhs <= s_nu.value + tol:
            passes["conditioning"] += 1
        else:
            failures.append({"check": "conditioning", "trial": trial,
                             "lhs": lhs, "rhs": s_nu.value})

        k = int(rng.integers(1, n + 1))
        labels = rng.integers(0, k, size=n)
        blocks = [np.flatnonzero(labels == j) for j in range(k)
                  if np.any(labels == j)]
        nu_bar = partition_average(nu, blocks, mu)
        s_bar = renyi_entropy(mu, nu_bar, npr)
        if s_bar <= s_nu + tol:
            passes["partition_entropy"] += 1
        else:
            failures.append({"check": "partition_entropy", "trial": trial,
                             "lhs": s_bar.value, "rhs": s_nu.value})
        dmax = max(subset_diameter(space.dist, b) for b in blocks)
        w2 = w2_exact(space, nu, nu_bar, config=cfg).value
        if w2 <= 2.0 * dmax + tol:
            passes["partition_w2"] += 1
        else:
            failures.append({"check": "partition_w2", "trial": trial,
                             "lhs": w2, "rhs": 2.0 * dmax})
    return EntropySuiteReport(trials=n_trials,
                              nprimes=tuple(float(x) for x in nprimes),
                              passes=passes, failures=tuple(failures))


# ---------------------------------------------------------------------------
# volume growth probe


@dataclass(frozen=True)
class VolumeGrowthReport:
    C: float
    x0: float
    radii: tuple
    log_values: tuple
    values: tuple       # exp of log_values; inf once past float range
    divergent: bool


def volume_growth_probe(log_density, C: float, x0: float, radii, *,
                        config: RunConfig | None = None) -> VolumeGrowthReport:
    """Gaussian-damped mass of a line density on expanding truncations.

    Integrates exp(-C (x-x0)^2 + log_density(x)) over [-R, R] by Simpson in
    log space (so double-exponential densities do not overflow); divergence
    is flagged when the last doubling grows the value by at least the
    configured growth factor.
    """
    cfg = config or default_config()
    if C <= 0:
        raise ValidationError(f"C must be positive, got {C}")
    radii = [float(r) for r in radii]
    if len(radii) < 2 or any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValidationError("radii must be an increasing list of length >= 2")
    logs = []
    for r in radii:
        npts = max(129, int(cfg.volume_points_per_unit * 2 * r) + 1)
        if npts % 2 == 0:
            npts += 1
        x = np.linspace(-r, r, npts)
        h = x[1] - x[0]
        log_f = -C * (x - x0) ** 2 + np.asarray(log_density(x), dtype=float)
        w = np.ones(npts)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        logs.append(float(logsumexp(log_f + np.log(w)) + math.log(h / 3.0)))
    values = tuple(math.exp(v) if v < 700 else math.inf for v in logs)
    divergent = (logs[-1] - logs[-2]) >= math.log(cfg.volume_growth_factor)
    return VolumeGrowthReport(C=float(C), x0=float(x0), radii=tuple(radii),
                              log_values=tuple(logs), values=values,
                              divergent=divergent)
