"""Concentration-of-measure invariants and closed-form comparison bounds.

Partial diameter and separation distance are solved exactly on small spaces
(combinatorial search) and on spaces isometric to a subset of the line
(sliding windows); beyond the configured budgets a certified upper bound is
returned together with an ``exact=False`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, default_config
from .core import FiniteMmSpace, prob_weights
from .errors import DomainError, SolverFailure, ValidationError

__all__ = [
    "line_embedding",
    "partial_diameter_1d",
    "partial_diameter",
    "PartialDiamResult",
    "separation",
    "SepResult",
    "obsdiam_sandwich",
    "ObsDiamSandwich",
    "cd_separation_bound",
    "cd_obsdiam_bound",
    "cdstar_separation_bound",
    "cdstar_obsdiam_bound",
    "levy_bound_sequence",
    "levy_check",
    "LevyRow",
    "levy_rows_report",
]


# ---------------------------------------------------------------------------
# line detection


def line_embedding(dist: np.ndarray, *, rtol: float = 1e-9) -> np.ndarray | None:
    """Coordinates x with dist[i,j] = |x_i - x_j| if the metric is a line
    metric, else None."""
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if n == 1:
        return np.zeros(1)
    a = int(np.argmax(dist.max(axis=1)))
    x = dist[a].copy()
    scale = max(float(dist.max()), 1.0)
    if np.max(np.abs(np.abs(x[:, None] - x[None, :]) - dist)) <= rtol * scale:
        return x
    return None


# ---------------------------------------------------------------------------
# partial diameter


def partial_diameter_1d(values, weights, alpha: float, *,
                        mass_tol: float = 1e-12) -> float:
    """Smallest window width on the line carrying mass at least alpha.

    Bisects on the width (window masses are monotone in it), then snaps to
    the tight width of the best feasible window; the result is an achieved
    width within 1e-14 of the optimum relative to the span.
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(values, dtype=float)
    if alpha <= 0.0:
        return 0.0
    total = w.sum()
    if alpha > total + mass_tol:
        raise ValidationError(f"no set reaches mass {alpha} (total {total})")
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    cum = np.concatenate([[0.0], np.cumsum(ws)])
    target = alpha - mass_tol
    span = float(xs[-1] - xs[0])

    def window_ends(width: float) -> np.ndarray:
        return np.searchsorted(xs, xs + width, side="right")

    def feasible(width: float) -> bool:
        ends = window_ends(width)
        return bool(np.max(cum[ends] - cum[:-1]) >= target)

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, span
    for _ in range(80):
        if hi - lo <= 1e-14 * max(span, 1.0):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    ends = window_ends(hi)
    ok = (cum[ends] - cum[:-1]) >= target
    tight = xs[ends[ok] - 1] - xs[np.flatnonzero(ok)]
    return float(np.min(tight))


@dataclass(frozen=True)
class PartialDiamResult:
    value: float
    exact: bool
    method: str

    def __float__(self) -> float:
        return self.value


def _clique_feasible(adj: list[int], weights: np.ndarray, target: float) -> bool:
    """Is there a clique of weight >= target in the threshold graph?"""
    n = weights.size
    order = np.argsort(-weights, kind="stable")

    def rec(pos: int, allowed: int, acc: float) -> bool:
        if acc >= target:
            return True
        remaining = acc
        for k in range(pos, n):
            if allowed >> order[k] & 1:
                remaining += weights[order[k]]
        if remaining < target:
            return False
        for k in range(pos, n):
            v = int(order[k])
            if not (allowed >> v & 1):
                continue
            if rec(k + 1, allowed & adj[v], acc + weights[v]):
                return True
            allowed &= ~(1 << v)
        return False

    return rec(0, (1 << n) - 1, 0.0)


def partial_diameter(space: FiniteMmSpace, mu, alpha: float, *,
                     config: RunConfig | None = None) -> PartialDiamResult:
    """Smallest diameter of a subset of mass at least alpha.

    Exact on line-embeddable spaces (any size) and, by threshold search with
    a clique feasibility check, on spaces with at most
    ``n_exact_partial_diam`` points; otherwise a certified upper bound from
    the metric-ball family is returned with ``exact=False``.
    """
    cfg = config or default_config()
    mu = prob_weights(mu, tol=cfg.tolerances.structural)
    if not 0.0 <= alpha <= 1.0 + cfg.tolerances.structural:
        raise ValidationError(f"alpha must lie in [0,1], got {alpha}")
    if alpha <= 0.0:
        return PartialDiamResult(0.0, True, "empty")
    sup = np.flatnonzero(mu > 0)
    dist = space.dist[np.ix_(sup, sup)]
    w = mu[sup]
    coords = line_embedding(dist)
    if coords is not None:
        val = partial_diameter_1d(coords, w, alpha,
                                  mass_tol=cfg.tolerances.structural)
        return PartialDiamResult(val, True, "line-window")
    n = w.size
    target = alpha - cfg.tolerances.structural
    if n <= cfg.n_exact_partial_diam:
        cands = np.unique(np.concatenate([[0.0], dist.ravel()]))

        def adjacency(d: float) -> list[int]:
            close = dist <= d
            return [int(sum(1 << j for j in range(n) if close[i, j]))
                    for i in range(n)]

        lo, hi = 0, cands.size - 1
        if _clique_feasible(adjacency(cands[0]), w, target):
            return PartialDiamResult(float(cands[0]), True, "clique-threshold")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _clique_feasible(adjacency(cands[mid]), w, target):
                hi = mid
            else:
                lo = mid
        return PartialDiamResult(float(cands[hi]), True, "clique-threshold")
    # certified upper bound: best metric ball reaching the target mass
    best = float(dist.max())
    for c in range(n):
        order = np.argsort(dist[c], kind="stable")
        acc = np.cumsum(w[order])
        k = int(np.searchsorted(acc, target))
        if k < n:
            members = order[:k + 1]
            best = min(best, float(dist[np.ix_(members, members)].max()))
    return PartialDiamResult(best, False, "ball-upper-bound")


# ---------------------------------------------------------------------------
# separation distance


@dataclass(frozen=True)
class SepResult:
    value: float
    exact: bool
    method: str

    def __float__(self) -> float:
        return self.value


def _line_separation(x: np.ndarray, w: np.ndarray, k0: float, k1: float,
                     tol: float) -> float:
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    pre = np.cumsum(ws)
    suf = np.cumsum(ws[::-1])[::-1]

    def candidate(ka: float, kb: float) -> float:
        ia = int(np.searchsorted(pre, ka - tol))
        ib = xs.size - 1 - int(np.searchsorted(suf[::-1], kb - tol))
        if ia >= xs.size or ib < 0:
            return 0.0
        return max(xs[ib] - xs[ia], 0.0)

    return max(candidate(k0, k1), candidate(k1, k0))


def separation(space: FiniteMmSpace, mu, k0: float, k1: float, *,
               config: RunConfig | None = None) -> SepResult:
    """Largest guaranteed gap between two sets of prescribed masses.

    Returns 0 when no admissible pair of sets exists (supremum over the
    empty family).  Exact on line-embeddable spaces and for at most
    ``n_exact_separation`` support points (subset feasibility over distance
    thresholds); otherwise the support diameter is returned as a certified
    upper bound with ``exact=False``.
    """
    cfg = config or default_config()
    if k0 <= 0 or k1 <= 0:
        raise ValidationError("mass thresholds must be positive")
    mu = prob_weights(mu, tol=cfg.tolerances.structural)
    tol = cfg.tolerances.structural
    if k0 > 1.0 + tol or k1 > 1.0 + tol:
        return SepResult(0.0, True, "no-admissible-set")
    sup = np.flatnonzero(mu > 0)
    dist = space.dist[np.ix_(sup, sup)]
    w = mu[sup]
    coords = line_embedding(dist)
    if coords is not None:
        return SepResult(_line_separation(coords, w, k0, k1, tol), True,
                         "line-window")
    n = w.size
    if n > cfg.n_exact_separation:
        return SepResult(float(dist.max()), False, "diam-upper-bound")

    full = (1 << n) - 1
    mass = np.zeros(1 << n)
    for s in range(1, 1 << n):
        low = s & -s
        mass[s] = mass[s ^ low] + w[low.bit_length() - 1]

    def feasible(d: float) -> bool:
        close = dist < d
        nb = [int(sum(1 << j for j in range(n) if close[i, j])) | (1 << i)
              for i in range(n)]
        conflict = np.zeros(1 << n, dtype=object)
        for s in range(1, 1 << n):
            low = s & -s
            conflict[s] = conflict[s ^ low] | nb[low.bit_length() - 1]
        for s in range(1, 1 << n):
            if mass[s] >= k0 - tol and mass[full & ~conflict[s]] >= k1 - tol:
                return True
        return False

    cands = np.unique(dist[dist > 0])
    if cands.size == 0 or not feasible(cands[0]):
        return SepResult(0.0, True, "subset-threshold")
    lo, hi = 0, cands.size - 1
    if feasible(cands[hi]):
        return SepResult(float(cands[hi]), True, "subset-threshold")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            lo = mid
        else:
            hi = mid
    return SepResult(float(cands[lo]), True, "subset-threshold")


# ---------------------------------------------------------------------------
# observable diameter sandwich


@dataclass(frozen=True)
class ObsDiamSandwich:
    """Lower witness value and separation upper bound for the observable
    diameter at a given mass defect."""

    lower: float
    upper: float
    witness: str
    upper_exact: bool = True


def obsdiam_sandwich(space: FiniteMmSpace, mu, kappa: float, *,
                     config: RunConfig | None = None) -> ObsDiamSandwich:
    """Sandwich the kappa-observable diameter between the best value over an
    explicit 1-Lipschitz witness family and the separation bound at
    (kappa/2, kappa/2).  For kappa >= 1 both sides are 0."""
    cfg = config or default_config()
    if kappa <= 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    if kappa >= 1.0:
        return ObsDiamSandwich(0.0, 0.0, "mass defect >= 1", True)
    mu = prob_weights(mu, tol=cfg.tolerances.structural)
    rng = np.random.default_rng(cfg.seed)
    n = space.n
    dist = space.dist
    alpha = 1.0 - kappa
    best = 0.0
    witness = "point distance"
    for p in range(n):
        val = partial_diameter_1d(dist[:, p], mu, alpha)
        if val > best:
            best, witness = val, f"d(., {space.point_ids[p]!r})"
    for _ in range(cfg.obsdiam_witness_subsets):
        size = int(rng.integers(2, max(3, n // 2 + 1)))
        subset = rng.choice(n, size=min(size, n), replace=False)
        f = dist[:, subset].min(axis=1)
        val = partial_diameter_1d(f, mu, alpha)
        if val > best:
            best, witness = val, f"d(., A) for |A| = {subset.size}"
    diam = space.diam
    for _ in range(cfg.obsdiam_witness_potentials):
        v = rng.uniform(0.0, diam, size=n)
        f = (v[None, :] + dist).min(axis=1)
        val = partial_diameter_1d(f, mu, alpha)
        if val > best:
            best, witness = val, "regularised random potential"
    sep = separation(space, mu, kappa / 2.0, kappa / 2.0, config=cfg)
    if best > sep.value + 1e-9:
        raise SolverFailure(
            f"witness value {best} exceeds separation bound {sep.value}"
        )
    return ObsDiamSandwich(best, sep.value, witness, sep.exact)


# ---------------------------------------------------------------------------
# closed-form bounds for spaces with curvature-dimension control


def _acosh(x: float) -> float:
    if x < 1.0:
        raise DomainError(f"acosh argument {x} < 1")
    return math.log(x + math.sqrt(x * x - 1.0))


def _check_bound_params(K: float, N: float) -> None:
    if K <= 0:
        raise ValidationError(f"K must be positive, got {K}")
    if N >= 0:
        raise ValidationError(f"N must be negative, got {N}")


def cd_separation_bound(K: float, N: float, k0: float, k1: float) -> float:
    """Separation bound for CD(K, N) spaces with K > 0, N < 0."""
    _check_bound_params(K, N)
    if not (0 < k0 < 1 and 0 < k1 < 1 and k0 + k1 < 1):
        raise ValidationError("mass fractions must be positive with sum < 1")
    mean = 0.5 * (k0 ** (1.0 / N) + k1 ** (1.0 / N))
    arg = mean ** (-N / (1.0 - N))
    return 2.0 * math.sqrt((1.0 - N) / K) * _acosh(arg)


def cd_obsdiam_bound(K: float, N: float, kappa: float) -> float:
    """Observable-diameter bound for CD(K, N) spaces with K > 0, N < 0."""
    _check_bound_params(K, N)
    if not 0 < kappa <= 1:
        raise ValidationError(f"kappa must lie in (0,1], got {kappa}")
    arg = (2.0 / kappa) ** (1.0 / (1.0 - N))
    return 2.0 * math.sqrt((1.0 - N) / K) * _acosh(arg)


def cdstar_separation_bound(K: float, N: float, k0: float, k1: float) -> float:
    """Separation bound under the reduced condition CD*(K, N)."""
    _check_bound_params(K, N)
    if not (0 < k0 < 1 and 0 < k1 < 1 and k0 + k1 < 1):
        raise ValidationError("mass fractions must be positive with sum < 1")
    arg = 0.5 * (k0 ** (1.0 / N) + k1 ** (1.0 / N))
    return 2.0 * math.sqrt(-N / K) * _acosh(arg)


def cdstar_obsdiam_bound(K: float, N: float, kappa: float) -> float:
    """Observable-diameter bound under the reduced condition CD*(K, N)."""
    _check_bound_params(K, N)
    if not 0 < kappa <= 1:
        raise ValidationError(f"kappa must lie in (0,1], got {kappa}")
    arg = (2.0 / kappa) ** (-1.0 / N)
    return 2.0 * math.sqrt(-N / K) * _acosh(arg)


# ---------------------------------------------------------------------------
# Levy-trend bounds and checks


def levy_bound_sequence(K_list, N_list, kappa: float, mode: str, *,
                        config: RunConfig | None = None):
    """Per-instance observable-diameter bounds along a parameter sequence.

    ``mode="CD"`` uses 2*sqrt(2)/sqrt(K_n) * sqrt(2/kappa - 1); ``mode="CDstar"``
    uses 2*log(2/kappa)/sqrt(-K_n N_n) + 2*log(2)/sqrt(K_n).  Entries with
    K_n <= 0 get an infinite bound.  Returns (values, levy_flag): the flag is
    set when the finite tail is strictly decreasing and decays below
    ``levy_decay`` times its first value.
    """
    cfg = config or default_config()
    if not 0 < kappa < 1:
        raise ValidationError(f"kappa must lie in (0,1), got {kappa}")
    K = np.asarray(K_list, dtype=float)
    N = np.asarray(N_list, dtype=float)
    if K.shape != N.shape:
        raise ValidationError("K and N sequences must have equal length")
    if np.any(N >= 0):
        raise ValidationError("dimension parameters must be negative")
    vals = np.full(K.shape, math.inf)
    pos = K > 0
    if mode == "CD":
        vals[pos] = 2.0 * math.sqrt(2.0) / np.sqrt(K[pos]) * math.sqrt(2.0 / kappa - 1.0)
    elif mode == "CDstar":
        vals[pos] = (2.0 * math.log(2.0 / kappa) / np.sqrt(-K[pos] * N[pos])
                     + 2.0 * math.log(2.0) / np.sqrt(K[pos]))
    else:
        raise ValidationError(f"mode must be CD or CDstar, got {mode!r}")
    finite = vals[np.isfinite(vals)]
    flag = (finite.size >= 2 and bool(np.all(np.diff(finite) < 0))
            and finite[-1] <= cfg.levy_decay * finite[0])
    return vals, flag


@dataclass(frozen=True)
class LevyRow:
    index: int
    kappa: float
    lower: float
    upper: float
    bound: float
    ok: bool


def levy_rows_report(rows, verdict: bool, *, params: dict | None = None):
    """Package sandwich rows as a tabular report (CSV columns
    n, kappa, lower, upper, bound, pass)."""
    from .reporting import ExperimentReport

    rep = ExperimentReport(
        name="levy-check",
        columns=["n", "kappa", "lower", "upper", "bound", "pass"],
        metadata={"params": params or {}, "levy_verdict": bool(verdict)},
    )
    for r in rows:
        rep.add(n=r.index, kappa=r.kappa, lower=r.lower, upper=r.upper,
                bound=r.bound, **{"pass": r.ok})
    return rep


def levy_check(spaces, kappas, *, bounds=None,
               config: RunConfig | None = None):
    """Observable-diameter sandwiches along a sequence of spaces.

    Returns ``(rows, verdict)``: one row per (space, kappa) with the witness
    lower bound, the separation upper bound and an optional closed-form bound
    column (NaN when absent).  The Levy verdict requires every kappa column
    of upper bounds to be nonincreasing and to end below ``levy_threshold``.
    """
    cfg = config or default_config()
    spaces = list(spaces)
    if len(spaces) < 2:
        raise ValidationError("a sequence of at least two spaces is required")
    rows: list[LevyRow] = []
    uppers = {float(k): [] for k in kappas}
    for i, sp in enumerate(spaces):
        for k in kappas:
            k = float(k)
            sw = obsdiam_sandwich(sp, sp.weights, k, config=cfg)
            bound = math.nan
            if bounds is not None:
                bound = float(bounds[i](k)) if callable(bounds[i]) else float(bounds[i])
            ok = True if math.isnan(bound) else sw.upper <= bound + 1e-9
            rows.append(LevyRow(i, k, sw.lower, sw.upper, bound, ok))
            uppers[k].append(sw.upper)
    verdict = True
    for k, col in uppers.items():
        col = np.asarray(col)
        if np.any(np.diff(col) > 1e-9) or col[-1] > cfg.levy_threshold:
            verdict = False
    return rows, verdict
