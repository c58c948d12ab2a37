import dataclasses
import json
import math

import numpy as np
import pytest

from ablkit.abl import TwoState, abl_dichotomic
from ablkit.cycles import exclusivity_ok, ncycle_projectors
from ablkit.errors import EmptyFeasibleSet, NotExclusive, ValidationError
from ablkit.hilbert import StateVector, basis_state, complement, rank1_projector
from ablkit.scan import (
    MaxResult,
    ConjectureWarning,
    SphereGrid,
    check_conjecture,
    constrained_max,
    evaluate_posts,
    paradox_search,
    post_state,
    region_above,
    scan_postselection,
    scan_preselections,
)
from ablkit.scenarios import three_box_scenario

from conftest import ZETA_KCBS

THRESHOLDS = [1.4, 1.5, 1.6, 1.7, 2.0]


@pytest.fixture(scope="module")
def full_scan(kcbs):
    return scan_postselection(StateVector([0, 0, 1]), kcbs, SphereGrid(512, 1024))


def test_post_equals_pre_cell(kcbs, north):
    post = post_state(math.pi / 2, math.pi / 2)
    assert np.allclose(post, [0, 0, 1], atol=1e-15)
    zetas, ok = evaluate_posts(north, kcbs.projectors, post[None, :])
    assert ok[0]
    assert zetas[0] == pytest.approx([ZETA_KCBS] * 5, abs=1e-14)
    assert zetas[0].sum() == pytest.approx(1.9779544749999275, abs=1e-12)
    assert zetas[0].sum() < 2
    assert exclusivity_ok(zetas[0], kcbs.graph)[0]


def test_tiny_grid_shape(kcbs, north):
    scan = scan_postselection(north, kcbs, SphereGrid(2, 4))
    assert len(scan) == 8
    assert len(scan.cells) == 8
    assert scan.defined.dtype == bool and scan.exclusive.dtype == bool
    assert [c.theta for c in scan.cells[:4]] == [0.0] * 4
    assert scan.cell(4).theta == pytest.approx(math.pi)


def test_grid_validation():
    with pytest.raises(ValidationError):
        SphereGrid(1, 4)
    with pytest.raises(ValidationError):
        SphereGrid(2, 3)


def test_no_three_box_edge_in_kcbs(full_scan):
    sums = full_scan.zetas + np.roll(full_scan.zetas, -1, axis=1)
    assert np.nanmax(sums) < 2


def test_cells_consistent(full_scan, rng):
    for i in rng.choice(len(full_scan), 100, replace=False):
        c = full_scan.cell(i)
        ts = TwoState(full_scan.pre, StateVector(post_state(c.theta, c.phi)))
        if not c.defined:
            continue
        ref = [abl_dichotomic(ts, p) for p in full_scan.instance.projectors]
        assert c.zetas == pytest.approx(ref, abs=1e-12)
        assert c.k == pytest.approx(sum(c.zetas), abs=1e-15)
        assert c.exclusive == exclusivity_ok(c.zetas, full_scan.instance.graph)[0]


def test_worker_determinism(kcbs, north):
    grid = SphereGrid(64, 128)
    a = scan_postselection(north, kcbs, grid, workers=1)
    b = scan_postselection(north, kcbs, grid, workers=5)
    for field in ("theta", "phi", "zetas", "k", "exclusive", "defined"):
        assert np.array_equal(getattr(a, field), getattr(b, field), equal_nan=True)


def test_regions_monotone(full_scan):
    regions = [set(region_above(full_scan, t)) for t in THRESHOLDS]
    for lo, hi in zip(regions, regions[1:]):
        assert hi <= lo
    assert regions[3]  # K > 1.7 is reachable
    everything = region_above(full_scan, 0)
    assert len(everything) == int(full_scan.feasible.sum())


def test_region_row_major(full_scan):
    pts = region_above(full_scan, 1.7)
    idx = [(round(t / full_scan.grid.theta_spacing), round(p / full_scan.grid.phi_spacing))
           for t, p in pts]
    assert idx == sorted(idx)


def test_refine_zero_is_best_cell(full_scan):
    m = constrained_max(full_scan, 0)
    assert m.k_star == m.grid_k == np.nanmax(np.where(full_scan.feasible, full_scan.k, np.nan))


def test_refined_point_is_sound(full_scan):
    m = constrained_max(full_scan, 40)
    assert m.k_star >= m.grid_k
    ts = TwoState(full_scan.pre, StateVector(post_state(m.theta_star, m.phi_star)))
    zetas = [abl_dichotomic(ts, p) for p in full_scan.instance.projectors]
    assert exclusivity_ok(zetas, full_scan.instance.graph)[0]
    assert sum(zetas) == pytest.approx(m.k_star, abs=1e-12)
    k, t, p = m
    assert (k, t, p) == (m.k_star, m.theta_star, m.phi_star)


def test_refinement_climbs_from_interior_seed(kcbs, north):
    # Seed only from cells well away from <phi|psi> = 0 so the descent has work to do.
    scan = scan_postselection(north, kcbs, SphereGrid(64, 128))
    overlap = np.abs(np.sin(scan.theta) * np.sin(scan.phi))
    seeded = dataclasses.replace(scan, exclusive=scan.exclusive & (overlap > 0.5))
    m = constrained_max(seeded, 40)
    assert m.k_star > m.grid_k + 1e-3
    # 2.08549339 is the best such cell on the 512x1024 grid (mpmath-verified)
    assert m.k_star >= 2.0854


def test_empty_feasible(full_scan):
    empty = dataclasses.replace(full_scan, exclusive=np.zeros_like(full_scan.exclusive))
    with pytest.raises(EmptyFeasibleSet):
        constrained_max(empty)


def test_paradox_search_kcbs_pair(kcbs, north):
    w = paradox_search(north, kcbs.projectors[0], kcbs.projectors[1], SphereGrid(256, 512))
    assert w
    assert all(x.zeta1 + x.zeta2 > 1 for x in w)
    x = w[len(w) // 2]
    assert abl_dichotomic(x.two_state, kcbs.projectors[0]) == pytest.approx(x.zeta1, abs=1e-12)


def test_paradox_search_non_adjacent(kcbs, north):
    with pytest.raises(NotExclusive):
        paradox_search(north, kcbs.projectors[0], kcbs.projectors[2], SphereGrid(2, 4))


def test_paradox_search_three_box():
    ts, (a, b) = three_box_scenario()
    w = paradox_search(ts.pre, a.pi, b.pi, SphereGrid(256, 512))
    assert max(x.total for x in w) > 1.999
    # exact three-box post-selection sits on the sphere parametrization
    theta, phi = math.acos(1 / math.sqrt(3)), 7 * math.pi / 4
    assert np.allclose(post_state(theta, phi), ts.post.amplitudes, atol=1e-15)


def test_paradox_search_complement_pair():
    # pre is an eigenstate of pi1, so zeta1 = 1 and zeta2 = 0 wherever defined.
    pre = basis_state(3, 2)
    pi1 = rank1_projector(pre)
    pi2 = complement(pi1)
    grid = SphereGrid(32, 64)
    assert paradox_search(pre, pi1, pi2, grid) == []
    th, ph = np.meshgrid(grid.thetas, grid.phis, indexing="ij")
    zetas, ok = evaluate_posts(pre, (pi1, pi2), post_state(th.ravel(), ph.ravel()))
    for (z1, z2), good, t, p in zip(zetas, ok, th.ravel(), ph.ravel()):
        if good:
            ts = TwoState(pre, StateVector(post_state(t, p)))
            assert z1 == pytest.approx(abl_dichotomic(ts, pi1), abs=1e-12) == 1
            assert z1 + z2 == pytest.approx(1, abs=1e-12)


def test_phase_extension(kcbs, north):
    grid = SphereGrid(16, 32, phase_steps=3)
    scan = scan_postselection(north, kcbs, grid)
    assert len(scan) == 16 * 32 * 9
    real = scan_postselection(north, kcbs, SphereGrid(16, 32))
    mask = (scan.alpha == 0) & (scan.beta == 0)
    assert np.array_equal(scan.zetas[mask], real.zetas, equal_nan=True)


def test_conjecture_check_n7(tmp_path):
    inst = ncycle_projectors(7)
    scan = scan_postselection(StateVector([0, 0, 1]), inst, SphereGrid(128, 256))
    m = constrained_max(scan, 20)
    path = tmp_path / "w.json"
    with pytest.warns(ConjectureWarning):
        assert check_conjecture(m, 7, path) is False
    data = json.loads(path.read_text())
    assert data["k"] > 3 and all(s <= 1 + 1e-9 for s in data["edge_sums"])


def test_conjecture_check_passes(tmp_path):
    m = MaxResult(1.9, 1.0, 1.0, (0.38,) * 5, 1.9)
    path = tmp_path / "w.json"
    assert check_conjecture(m, 5, path)
    assert not path.exists()


def test_preselection_scan(kcbs):
    rows = scan_preselections(kcbs, SphereGrid(2, 4), SphereGrid(16, 32))
    assert len(rows) == 8
    assert all(r.k_grid >= 0 or math.isnan(r.k_grid) for r in rows)
