import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslab.attractor import chaos_game
from fslab.furstenberg import (
    GOLDEN_THRESHOLD,
    FurstenbergError,
    attractor_hull,
    build_furstenberg,
    certificate_pipeline,
    covering_lower_bound,
    empirical_overlap,
    furstdimae_inequality,
    gh_canonical,
    gh_coincidence_points,
    gh_hexagon,
    interval_disjointness,
    invariant_interval,
    invariant_rectangle,
    massopust_boxes,
    overlap_certificate_gh,
    overlap_certificate_massopust3,
    project_1d,
    sufficient_condition,
)
from fslab.geometry import SQRT3, AffineMap
from fslab.surface import build_geronimo_hardin, build_massopust, center_peak, uniform_massopust


def massopust3(s, a=1.0):
    return build_massopust(3, center_peak(a), np.broadcast_to(np.asarray(s, dtype=float), (9,)))


def projections(ifs):
    fifs = build_furstenberg(ifs)
    return project_1d(fifs, "X", ifs), project_1d(fifs, "Y", ifs)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def listed_center_peak_furstenberg(a):
    """The nine printed N=3 maps as (diagonal of the orthogonal part, height row)."""
    r = (-a, -a / SQRT3)
    up = (0.0, 2 * a / SQRT3)
    zero = (0.0, 0.0)
    return [
        ((1, 1), zero), ((1, 1), up), ((1, 1), zero), ((-1, 1), r), ((1, 1), r),
        ((1, 1), zero), ((-1, -1), r), ((1, -1), r), ((1, -1), up),
    ]


@pytest.mark.parametrize("a", [1.0, 0.4])
def test_center_peak_maps_as_listed(a):
    s = np.linspace(0.7, 0.95, 9)
    fifs = build_furstenberg(massopust3(s, a))
    for f, si, (diag, row) in zip(fifs.maps, s, listed_center_peak_furstenberg(a)):
        assert np.allclose(f.linear, np.diag(diag) / (3 * si), atol=1e-15)
        assert np.allclose(f.translation, -np.asarray(row) / si, atol=1e-15)


def test_pure_scalings_fix_origin():
    s = np.linspace(0.7, 0.95, 9)
    fifs = build_furstenberg(massopust3(s))
    for i in (1, 3, 6):
        assert np.all(fifs.maps[i - 1].translation == 0)


def test_gh_canonical_third_map():
    s = 0.82
    h3 = gh_canonical(s).maps[2]
    assert np.allclose(h3.linear, np.diag([-1, 1]) / (2 * s))
    assert np.allclose(h3.translation, (0, -2 / SQRT3))


def test_gh_canonical_translations_independent_of_height():
    a = build_furstenberg(build_geronimo_hardin(0.82, 1.0)).canonical
    b = build_furstenberg(build_geronimo_hardin(0.82, -3.5)).canonical
    for f, g in zip(a.maps, b.maps):
        assert np.allclose(f.translation, g.translation)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 6), st.floats(0.34, 0.99))
def test_uniform_weights(N, s):
    fifs = build_furstenberg(uniform_massopust(N, s))
    assert np.allclose(fifs.weights, 1 / N**2, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.35, 0.99), min_size=9, max_size=9))
def test_weights_sum_to_one(s):
    fifs = build_furstenberg(massopust3(s))
    assert abs(fifs.weights.sum() - 1) < 1e-12


# ---------------------------------------------------------------------------
# projections and invariant intervals
# ---------------------------------------------------------------------------


def test_projected_fixed_points():
    px, _ = projections(uniform_massopust(3, 0.75))
    fp = px.fixed_points
    assert fp[px.index(5)] == pytest.approx(3 / (3 * 0.75 - 1), abs=1e-14)
    for label in (1, 2, 3, 6, 9):
        assert fp[px.index(label)] == 0
        assert px.ratios[px.index(label)] == pytest.approx(1 / (3 * 0.75))


def test_gh_projection_refused():
    with pytest.raises(FurstenbergError, match="projection not self-map"):
        project_1d(gh_canonical(0.82), "X")


def test_x_interval_uniform():
    px, _ = projections(uniform_massopust(3, 0.75))
    iv = invariant_interval(px)
    assert (iv.lo, iv.hi) == (0.0, pytest.approx(2.4, abs=1e-14))
    assert iv.contained and iv.method == "lemma-x"
    a4 = px.image(px.index(4), iv.lo, iv.hi)
    assert a4 == (pytest.approx(4 / 15), pytest.approx(4 / 3))


# frozen from attractor_hull (monotone expansion from the fixed points)
Y_INTERVAL_UNIFORM = (-2.771281292110204, 2.001480933190703)


def test_y_interval_uniform():
    _, py = projections(uniform_massopust(3, 0.75))
    iv = invariant_interval(py)
    fix5 = py.fixed_points[py.index(5)]
    assert fix5 == pytest.approx(3 / (SQRT3 * 1.25))
    assert iv.method == "lemma-y:image"
    assert (iv.lo, iv.hi) == pytest.approx(Y_INTERVAL_UNIFORM, abs=1e-12)
    assert attractor_hull(py) == pytest.approx(Y_INTERVAL_UNIFORM, abs=1e-12)
    assert iv.contained


def test_degenerate_interval():
    px, _ = projections(build_massopust(3, {}, np.full(9, 0.75)))
    iv = invariant_interval(px)
    assert (iv.lo, iv.hi, iv.method) == (0.0, 0.0, "degenerate")


def test_lemma_interval_outside_range_falls_back_to_hull():
    s = np.full(9, 0.75)
    s[1], s[8] = 0.95, 0.7
    _, py = projections(massopust3(s))
    iv = invariant_interval(py)
    assert iv.method == "lemma-y:image+hull" and iv.contained
    assert "not invariant" in iv.note
    assert (iv.lo, iv.hi) == attractor_hull(py)


def test_negative_peak_falls_back_to_hull():
    px, _ = projections(massopust3(0.8, a=-1.0))
    iv = invariant_interval(px)
    assert iv.method == "hull" and iv.contained


@pytest.mark.parametrize(
    "s4, s5, expected",
    [(0.75, 0.75, True), (0.95, 0.70, True), (0.70, 0.95, False)],
)
def test_interval_disjointness(s4, s5, expected):
    s = np.full(9, 0.8)
    s[[3, 6]] = s4
    s[[4, 7]] = s5
    px, _ = projections(massopust3(s))
    assert interval_disjointness(px) is expected


# ---------------------------------------------------------------------------
# hexagon
# ---------------------------------------------------------------------------


def test_hexagon_vertex():
    hexagon = gh_hexagon(0.82)
    assert hexagon.A == pytest.approx((2.5625, 2.5625 / SQRT3), abs=1e-12)
    assert hexagon.A[1] == pytest.approx(1.479461, abs=1e-6)


def test_hexagon_limit():
    assert gh_hexagon(1 - 1e-12).A == pytest.approx((2, 2 / SQRT3), abs=1e-9)


@pytest.mark.parametrize("s", [0.55, 0.6, 0.75, 0.82, 0.9, 0.99])
def test_hexagon_invariant(s):
    hexagon = gh_hexagon(s)
    assert all(hexagon.contained) and not hexagon.offending


def test_hexagon_range():
    with pytest.raises(FurstenbergError):
        gh_hexagon(0.5)


def test_coincidence_at_threshold():
    pts = gh_coincidence_points(GOLDEN_THRESHOLD)
    for key in ("A1'", "B2'", "C3'"):
        assert np.linalg.norm(pts[key]) < 1e-9
    assert pts["s(4s-2)"] == pytest.approx(1.0, abs=1e-12)
    assert GOLDEN_THRESHOLD == pytest.approx(0.80901699, abs=1e-8)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def test_gh_certificate_above_threshold():
    cert = overlap_certificate_gh(0.9)
    assert cert.certified and cert.Q >= 1 and cert.depth <= 3
    assert cert.detail["triple_123_empty"]


def test_gh_certificate_below_threshold():
    cert = overlap_certificate_gh(0.6)
    assert not cert.certified and cert.Q == 0
    assert "below threshold" in cert.flags[0]


def test_massopust_certificate_uniform():
    cert = overlap_certificate_massopust3(uniform_massopust(3, 0.75))
    assert cert.certified and cert.Q >= 3
    assert cert.detail["x_images_disjoint"]


def test_massopust_certificate_zero_data():
    cert = overlap_certificate_massopust3(build_massopust(3, {}, np.full(9, 0.75)))
    assert cert.depth == 9 and cert.Q == 0 and not cert.certified


def test_massopust_certificate_flags_hypotheses():
    s = np.full(9, 0.8)
    s[1], s[8] = 0.9, 0.7
    cert = overlap_certificate_massopust3(massopust3(s))
    assert not cert.certified
    assert "s2 > s9" in cert.flags[0]


def test_empirical_overlap_consistent():
    s = 0.9
    fam = gh_canonical(s)
    hexagon = gh_hexagon(s)
    images = [hexagon.polygon.map(h) for h in fam.maps]
    assert empirical_overlap(fam, images, samples=20_000, seed=5) >= overlap_certificate_gh(s).Q
    ifs = uniform_massopust(3, 0.75)
    fifs = build_furstenberg(ifs)
    boxes = massopust_boxes(*invariant_rectangle(fifs, ifs))
    assert empirical_overlap(fifs, boxes, samples=20_000, seed=5) >= 3


def test_empirical_overlap_single_map():
    fam = gh_canonical(0.9)
    single = type(fam)((AffineMap(0.5 * np.eye(2), np.zeros(2)),), np.ones(1), np.full(1, 0.5), 2.0, "x", (1,))
    assert empirical_overlap(single, [], samples=10) == 0


def test_covering_bound_values():
    assert covering_lower_bound(0, 0.25, 0.5) == 0.0
    # frozen from direct evaluation of log(1 - Q p) / log(lambda)
    assert covering_lower_bound(1, 0.25, 1 / 1.64) == pytest.approx(0.5815327631841805, abs=1e-15)
    assert covering_lower_bound(3, 1 / 9, 1 / 2.25) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(FurstenbergError):
        covering_lower_bound(4, 0.25, 0.5)


def test_pipeline_gh():
    v = certificate_pipeline(build_geronimo_hardin(0.82, 1.0))
    assert v.status == "Certified"
    assert v.trace["covering_bound"] == pytest.approx(0.5815327631841805, abs=1e-12)
    assert v.trace["target"] == pytest.approx(0.28630418515664147, abs=1e-12)


def test_pipeline_gh_below_threshold():
    assert certificate_pipeline(build_geronimo_hardin(0.6, 1.0)).status == "Hypotheses-unmet"


def test_pipeline_massopust():
    v = certificate_pipeline(uniform_massopust(3, 0.75))
    assert v.status == "Certified"
    assert v.trace["sufficient_condition"]["3^t0"] == pytest.approx(20.25, abs=1e-12)
    assert v.trace["margin"] > 0


def test_pipeline_massopust_outside_hypotheses():
    s = np.full(9, 0.75)
    s[4] = 0.5
    v = certificate_pipeline(massopust3(s))
    assert v.status == "Hypotheses-unmet"


def test_sufficient_condition_quadratic():
    for t0 in np.linspace(2.0, 3.0, 1001):
        sc = sufficient_condition(t0)
        u = 3.0**t0
        if abs(u - 18) > 1e-9 and abs(u - 9) > 1e-9:
            assert (sc["quadratic"] > 0) == (u > 18 or u < 9)


def test_furstdimae_inequality():
    res = furstdimae_inequality(uniform_massopust(3, 0.75))
    assert res["positive"] and res["value"] > 0
    again = furstdimae_inequality(build_massopust(3, center_peak(5.0), np.full(9, 0.75)))
    assert again["value"] == res["value"]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.34, 0.99), min_size=9, max_size=9))
def test_second_sum_terms_positive(s):
    s = np.asarray(s)
    total = s.sum()
    for i in (4, 5, 7, 8):
        assert total**2 / (9 * s[i - 1] ** 3) >= 1 / s[i - 1] ** 3 > 1


def test_furstenberg_cloud_in_rectangle():
    ifs = uniform_massopust(3, 0.75)
    fifs = build_furstenberg(ifs)
    _, _, ix, iy = invariant_rectangle(fifs, ifs)
    pts = chaos_game(fifs.maps, fifs.weights, 20_000, seed=4).points
    assert np.all((pts[:, 0] >= ix.lo - 1e-6) & (pts[:, 0] <= ix.hi + 1e-6))
    assert np.all((pts[:, 1] >= iy.lo - 1e-6) & (pts[:, 1] <= iy.hi + 1e-6))


def test_threshold_is_golden():
    assert GOLDEN_THRESHOLD == (1 + math.sqrt(5)) / 4
