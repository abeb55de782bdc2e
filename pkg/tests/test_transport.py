import math

import numpy as np
import pytest

from mmlab.core import FiniteMmSpace
from mmlab.errors import DegenerateDensity, NonSegment, ValidationError
from mmlab.transport import (
    WeightedOneDimSpace,
    box_upper_bound_common_space,
    discretize,
    displacement_interpolate_1d,
    interval_mass,
    ky_fan,
    prokhorov,
    w2_circle_quantile,
    w2_exact,
    w2_quantile_1d,
)


def random_space(rng, n, dim=3):
    pts = rng.random((n, dim))
    return FiniteMmSpace.from_points(pts, rng.dirichlet(np.ones(n)))


def segment(m=32, L=4.0, kind="uniform"):
    if kind == "uniform":
        return WeightedOneDimSpace.from_density(
            "segment", L, m, lambda x: np.full_like(x, 1.0 / L))
    raise ValueError(kind)


def random_density(space, rng, bumps=2):
    x = space.grid
    rho = np.full_like(x, 0.05)
    for _ in range(bumps):
        c = rng.uniform(x[0], x[-1])
        w = rng.uniform(0.2, 0.8)
        rho = rho + np.exp(-((x - c) / w) ** 2)
    return rho / (rho.sum() * space.h)


# ---------------------------------------------------------------------------
# 1D space type


def test_1d_space_validation():
    with pytest.raises(ValidationError, match="mass"):
        WeightedOneDimSpace("segment", 2.0, np.array([0.5, 1.5]),
                            np.array([0.0, 0.0]))
    with pytest.raises(ValidationError, match="uniform"):
        WeightedOneDimSpace("segment", 2.0, np.array([0.3, 1.5]),
                            np.log(np.array([0.5, 0.5])))
    with pytest.raises(ValidationError, match="kind"):
        WeightedOneDimSpace("disc", 2.0, np.array([0.5, 1.5]),
                            np.log(np.array([0.5, 0.5])))


def test_1d_space_json_round_trip():
    sp = segment(16)
    back = WeightedOneDimSpace.from_json(sp.to_json())
    assert back.kind == sp.kind
    assert back.m == sp.m
    assert np.allclose(back.log_density, sp.log_density)
    assert np.allclose(back.grid, sp.grid)


def test_interval_mass_uniform():
    sp = segment(40, L=4.0)
    assert interval_mass(sp, 0.0, 4.0) == pytest.approx(1.0, abs=1e-12)
    assert interval_mass(sp, 1.0, 2.0) == pytest.approx(0.25, abs=1e-12)


# ---------------------------------------------------------------------------
# exact transport LP


def test_w2_equal_measures_is_zero():
    rng = np.random.default_rng(0)
    s = random_space(rng, 6)
    rep = w2_exact(s, s.weights, s.weights)
    assert rep.value == pytest.approx(0.0, abs=1e-12)
    assert rep.dual_gap <= 1e-10


def test_w2_point_masses():
    s = FiniteMmSpace((0, 1), np.array([[0.0, 2.5], [2.5, 0.0]]), [0.5, 0.5])
    rep = w2_exact(s, [1.0, 0.0], [0.0, 1.0])
    assert rep.value == pytest.approx(2.5, rel=1e-12)
    assert rep.coupling.matrix[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_w2_half_mass_on_line():
    # uniform on {0,1} to a unit atom at 0 moves mass 1/2 across distance 1
    s = FiniteMmSpace((0, 1), np.array([[0.0, 1.0], [1.0, 0.0]]), [0.5, 0.5])
    rep = w2_exact(s, [0.5, 0.5], [1.0, 0.0])
    assert rep.value == pytest.approx(math.sqrt(0.5), rel=1e-12)


def test_w2_metric_axioms_sampled():
    rng = np.random.default_rng(42)
    for _ in range(10):
        n = int(rng.integers(3, 9))
        s = random_space(rng, n)
        mu = rng.dirichlet(np.ones(n))
        nu = rng.dirichlet(np.ones(n))
        lam = rng.dirichlet(np.ones(n))
        d_mn = w2_exact(s, mu, nu).value
        d_nm = w2_exact(s, nu, mu).value
        assert abs(d_mn - d_nm) <= 1e-10
        d_ml = w2_exact(s, mu, lam).value
        d_nl = w2_exact(s, nu, lam).value
        assert d_ml <= d_mn + d_nl + 1e-9
        assert w2_exact(s, mu, mu).value <= 1e-10


def test_w2_lower_semicontinuity_surrogate():
    # along entrywise-converging weights the limit value never exceeds the
    # tail of computed values by more than the coupling perturbation bound
    rng = np.random.default_rng(3)
    s = random_space(rng, 5)
    mu = rng.dirichlet(np.ones(5))
    nu = rng.dirichlet(np.ones(5))
    target = w2_exact(s, mu, nu).value
    diam = s.diam
    for k in (10, 100, 1000):
        mu_k = (1 - 1.0 / k) * mu + (1.0 / k) * np.full(5, 0.2)
        nu_k = (1 - 1.0 / k) * nu + (1.0 / k) * np.full(5, 0.2)
        val = w2_exact(s, mu_k, nu_k).value
        slack = 2.0 * diam * math.sqrt(1.0 / k)
        assert target <= val + slack + 1e-12


# ---------------------------------------------------------------------------
# quantile transport


def test_quantile_zero_for_equal_densities():
    sp = segment(64)
    rho = random_density(sp, np.random.default_rng(1))
    assert w2_quantile_1d(sp, rho, rho).value == pytest.approx(0.0, abs=1e-12)


def test_quantile_translates():
    sp = segment(200, L=10.0)
    x = sp.grid
    base = np.exp(-((x - 3.0) / 0.5) ** 2)
    shifted = np.exp(-((x - 5.0) / 0.5) ** 2)
    base /= base.sum() * sp.h
    shifted /= shifted.sum() * sp.h
    rep = w2_quantile_1d(sp, base, shifted)
    assert rep.value == pytest.approx(2.0, abs=2e-3)
    assert rep.map_description == "monotone (quantile) coupling"


def test_quantile_disjoint_blocks_translate():
    # two disjoint uniform blocks of mass 1/2, against their translate by c
    sp = segment(400, L=8.0)
    x = sp.grid
    c = 1.5
    rho0 = (np.where((x >= 0.5) & (x <= 1.5), 1.0, 0.0)
            + np.where((x >= 3.0) & (x <= 4.0), 1.0, 0.0))
    rho1 = (np.where((x >= 0.5 + c) & (x <= 1.5 + c), 1.0, 0.0)
            + np.where((x >= 3.0 + c) & (x <= 4.0 + c), 1.0, 0.0))
    rho0 /= rho0.sum() * sp.h
    rho1 /= rho1.sum() * sp.h
    rep = w2_quantile_1d(sp, rho0, rho1)
    assert rep.value == pytest.approx(c, abs=1e-9)


def test_quantile_single_blocks_offset():
    # single blocks: the quantile shift equals the offset between them
    sp = segment(400, L=4.0)
    x = sp.grid
    rho0 = np.where(x <= 1.0, 1.0, 0.0)
    rho1 = np.where(x >= 3.0, 1.0, 0.0)
    rho0 /= rho0.sum() * sp.h
    rho1 /= rho1.sum() * sp.h
    rep = w2_quantile_1d(sp, rho0, rho1)
    assert rep.value == pytest.approx(3.0, abs=1e-9)


def test_quantile_atoms_match_lp():
    rng = np.random.default_rng(9)
    sp = segment(24, L=3.0)
    rho0 = random_density(sp, rng)
    rho1 = random_density(sp, rng)
    atoms = discretize(sp)
    w0 = rho0 * sp.h
    w1 = rho1 * sp.h
    lp = w2_exact(atoms, w0 / w0.sum(), w1 / w1.sum())
    qt = w2_quantile_1d(sp, rho0, rho1, model="atoms")
    assert qt.value == pytest.approx(lp.value, rel=1e-9)


def test_quantile_rejects_circle():
    circle = WeightedOneDimSpace.from_density(
        "circle", 4.0, 16, lambda x: np.full_like(x, 0.25))
    rho = np.full(16, 0.25)
    with pytest.raises(NonSegment):
        w2_quantile_1d(circle, rho, rho)


# ---------------------------------------------------------------------------
# displacement interpolation


def test_interpolation_endpoints():
    rng = np.random.default_rng(2)
    sp = segment(64)
    rho0 = random_density(sp, rng)
    rho1 = random_density(sp, rng)
    assert np.allclose(displacement_interpolate_1d(sp, rho0, rho1, 0.0), rho0,
                       atol=1e-12)
    assert np.allclose(displacement_interpolate_1d(sp, rho0, rho1, 1.0), rho1,
                       atol=1e-12)


def test_interpolation_equal_densities_fixed():
    sp = segment(64)
    rho = random_density(sp, np.random.default_rng(4))
    for t in (0.25, 0.5, 0.75):
        assert np.allclose(displacement_interpolate_1d(sp, rho, rho, t), rho,
                           atol=1e-12)


def test_interpolation_moves_bump_to_midpoint():
    sp = segment(512, L=8.0)
    x = sp.grid
    rho0 = np.exp(-((x - 2.0) / 0.15) ** 2)
    rho1 = np.exp(-((x - 6.0) / 0.15) ** 2)
    rho0 /= rho0.sum() * sp.h
    rho1 /= rho1.sum() * sp.h
    mid = displacement_interpolate_1d(sp, rho0, rho1, 0.5)
    peak = x[int(np.argmax(mid))]
    assert peak == pytest.approx(4.0, abs=3 * sp.h)


def test_interpolation_geodesic_property():
    rng = np.random.default_rng(11)
    sp = segment(256, L=5.0)
    rho0 = random_density(sp, rng)
    rho1 = random_density(sp, rng)
    d01 = w2_quantile_1d(sp, rho0, rho1).value
    ts = np.linspace(0.0, 1.0, 5)
    tol = 2.5 * sp.h
    for i, s in enumerate(ts):
        rs = displacement_interpolate_1d(sp, rho0, rho1, s)
        for t in ts[i + 1:]:
            rt = displacement_interpolate_1d(sp, rho0, rho1, t)
            dst = w2_quantile_1d(sp, rs, rt).value
            assert abs(dst - (t - s) * d01) <= tol


def test_interpolation_rejects_support_gap():
    sp = segment(40, L=4.0)
    rho = np.zeros(40)
    rho[4:10] = 1.0
    rho[15:20] = 1.0
    rho /= rho.sum() * sp.h
    other = random_density(sp, np.random.default_rng(0))
    with pytest.raises(DegenerateDensity):
        displacement_interpolate_1d(sp, rho, other, 0.5)


def test_circle_cut_search_near_lp():
    m = 24
    circle = WeightedOneDimSpace.from_density(
        "circle", 6.0, m, lambda x: np.full_like(x, 1.0 / 6.0))
    rng = np.random.default_rng(8)
    rho0 = random_density(circle, rng)
    rho1 = random_density(circle, rng)
    val, cut = w2_circle_quantile(circle, rho0, rho1)
    atoms = discretize(circle)
    w0 = rho0 * circle.h
    w1 = rho1 * circle.h
    lp = w2_exact(atoms, w0 / w0.sum(), w1 / w1.sum())
    assert 0 <= cut < m
    # cell model vs atom model differ by at most one cell width in W2
    assert abs(val - lp.value) <= 2.0 * circle.h


def test_circle_translate_of_compact_bump():
    # for disjoint translated supports inside a half-circle the shift map is
    # the monotone optimum, so the cost equals the shift exactly
    m = 40
    circle = WeightedOneDimSpace.from_density(
        "circle", 10.0, m, lambda x: np.full_like(x, 0.1))
    x = circle.grid
    rho0 = np.where((x >= 1.0) & (x <= 2.0), 1.0, 0.0)
    rho0 /= rho0.sum() * circle.h
    for k in (8, 12):
        rho1 = np.roll(rho0, k)
        val, _ = w2_circle_quantile(circle, rho0, rho1)
        assert val == pytest.approx(k * circle.h, rel=1e-9)


# ---------------------------------------------------------------------------
# Prokhorov distance


def oracle_prokhorov(dist, mu, nu):
    """Independent oracle from the neighbourhood-enlargement definition,
    by subset enumeration (primal side of the coupling characterisation)."""
    n = mu.size

    def T(eps):
        worst = 0.0
        for mask in range(1, 1 << n):
            a = [i for i in range(n) if mask >> i & 1]
            enlarged = np.min(dist[a, :], axis=0) <= eps
            worst = max(worst, mu[a].sum() - nu[enlarged].sum())
        return worst

    cands = np.unique(np.concatenate([[0.0], dist.ravel()]))
    best = math.inf
    for i, c in enumerate(cands):
        t = T(c)
        cand = max(c, t)
        nxt = cands[i + 1] if i + 1 < cands.size else math.inf
        if cand < nxt or cand == c:
            best = min(best, cand)
    return best


def test_prokhorov_identical_measures():
    rng = np.random.default_rng(1)
    s = random_space(rng, 6)
    assert prokhorov(s, s.weights, s.weights) == pytest.approx(0.0, abs=1e-12)


def test_prokhorov_point_masses():
    for d in (0.25, 0.9, 1.7):
        s = FiniteMmSpace((0, 1), np.array([[0.0, d], [d, 0.0]]), [0.5, 0.5])
        val = prokhorov(s, [1.0, 0.0], [0.0, 1.0])
        assert val == pytest.approx(min(d, 1.0), abs=1e-9)


def test_prokhorov_mass_shift():
    # moving 0.1 of the mass across distance 5 costs exactly 0.1
    dist = np.array([
        [0.0, 5.0, 5.0],
        [5.0, 0.0, 5.0],
        [5.0, 5.0, 0.0],
    ])
    s = FiniteMmSpace((0, 1, 2), dist, [1 / 3] * 3)
    mu = np.array([1 / 3, 1 / 3, 1 / 3])
    nu = np.array([1 / 3 - 0.1, 1 / 3, 1 / 3 + 0.1])
    assert prokhorov(s, mu, nu) == pytest.approx(0.1, abs=1e-9)


def test_prokhorov_against_subset_oracle():
    rng = np.random.default_rng(17)
    for _ in range(8):
        n = int(rng.integers(2, 6))
        s = random_space(rng, n)
        mu = rng.dirichlet(np.ones(n))
        nu = rng.dirichlet(np.ones(n))
        fast = prokhorov(s, mu, nu)
        slow = oracle_prokhorov(s.dist, mu, nu)
        assert fast == pytest.approx(slow, abs=1e-8)


def test_prokhorov_metric_properties():
    rng = np.random.default_rng(23)
    s = random_space(rng, 5)
    mu = rng.dirichlet(np.ones(5))
    nu = rng.dirichlet(np.ones(5))
    lam = rng.dirichlet(np.ones(5))
    dmn = prokhorov(s, mu, nu)
    assert prokhorov(s, nu, mu) == pytest.approx(dmn, abs=1e-9)
    assert prokhorov(s, mu, lam) <= dmn + prokhorov(s, nu, lam) + 1e-9


def test_box_upper_bound():
    rng = np.random.default_rng(5)
    s = random_space(rng, 5)
    mu = rng.dirichlet(np.ones(5))
    nu = rng.dirichlet(np.ones(5))
    assert box_upper_bound_common_space(s, mu, nu) == pytest.approx(
        2.0 * prokhorov(s, mu, nu), abs=1e-12)
    assert box_upper_bound_common_space(s, mu, nu) <= 2.0


# ---------------------------------------------------------------------------
# Ky Fan metric


def test_ky_fan_equal_functions():
    w = np.full(5, 0.2)
    f = np.arange(5.0)
    assert ky_fan(w, f, f) == 0.0


def test_ky_fan_constant_gap():
    w = np.full(4, 0.25)
    f = np.zeros(4)
    for c in (0.4, 1.0, 3.0):
        assert ky_fan(w, f, f + c) == pytest.approx(min(c, 1.0), abs=1e-12)


def test_ky_fan_single_heavy_point():
    w = np.array([0.3, 0.5, 0.2])
    f = np.array([2.0, 1.0, 1.0])
    g = np.array([0.0, 1.0, 1.0])
    assert ky_fan(w, f, g) == pytest.approx(0.3, abs=1e-12)


def test_ky_fan_against_scan_oracle():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(2, 10))
        w = rng.dirichlet(np.ones(n))
        f = rng.normal(size=n)
        g = rng.normal(size=n)
        val = ky_fan(w, f, g)
        # oracle: scan a fine epsilon grid for the smallest feasible level
        gaps = np.abs(f - g)
        eps_grid = np.unique(np.concatenate(
            [gaps, np.linspace(0, gaps.max() + 1e-6, 4001)]))
        feasible = eps_grid[[float(w[gaps > e].sum()) <= e for e in eps_grid]]
        assert val <= feasible.min() + 1e-12
        assert float(w[gaps > val].sum()) <= val + 1e-12
