import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslab.geometry import SQRT3
from fslab.surface import (
    CORNERS,
    SurfaceError,
    Triangulation,
    build_from_config,
    build_geronimo_hardin,
    build_massopust,
    center_peak,
    check_join_up,
    classify_and_constants,
    orthogonality_residual,
    parameter_region,
    tiling_report,
    uniform_massopust,
    validate_region,
)

R3 = SQRT3


def listed_wedding_cake_maps(a, s):
    """The nine N=3 center-peak maps as printed: (planar diagonal, height row, translation)."""
    t45 = (0.5, 1 / (2 * R3), a)
    rows = [
        ((1, 1), (0, 0), (0, 0, 0)),
        ((1, 1), (0, 2 * a / R3), (1 / 3, 0, 0)),
        ((1, 1), (0, 0), (2 / 3, 0, 0)),
        ((-1, 1), (-a, -a / R3), t45),
        ((1, 1), (-a, -a / R3), t45),
        ((1, 1), (0, 0), (1 / 3, 1 / R3, 0)),
        ((-1, -1), (-a, -a / R3), t45),
        ((1, -1), (-a, -a / R3), t45),
        ((1, -1), (0, 2 * a / R3), (1 / 3, 1 / R3, 0)),
    ]
    out = []
    for (dx, dy), (bx, by), tr in rows:
        lin = np.array([[dx / 3, 0, 0], [0, dy / 3, 0], [bx, by, s]])
        out.append((lin, np.array(tr)))
    return out


@pytest.mark.parametrize("a", [1.0, 2.5, 0.3])
def test_center_peak_matches_listed_maps(a):
    ifs = build_massopust(3, center_peak(a), np.full(9, 0.8))
    for f, (lin, tr) in zip(ifs.maps, listed_wedding_cake_maps(a, 0.8)):
        assert np.allclose(f.linear, lin, atol=1e-15)
        assert np.allclose(f.translation, tr, atol=1e-15)


def join_up_oracle(tri: Triangulation, values, O, anchor):
    """Solve V(q) = data(U(q)) at the three corners for (bx, by, c) directly."""
    M = np.column_stack([CORNERS, np.ones(3)])
    rhs = []
    for q in CORNERS:
        img = anchor + (O @ q) / tri.N
        key = min(values, key=lambda k: np.linalg.norm(tri.point(*k) - img))
        rhs.append(values[key])
    return np.linalg.solve(M, rhs)


def test_height_coefficients_of_triangle_five():
    ifs = build_massopust(3, center_peak(1.0), np.full(9, 0.75))
    f = ifs.maps[4]
    assert f.linear[2, 0] == pytest.approx(-1.0, abs=1e-15)
    assert f.linear[2, 1] == pytest.approx(-1 / R3, abs=1e-15)
    assert f.translation[2] == pytest.approx(1.0, abs=1e-15)


data_st = st.integers(3, 6).flatmap(
    lambda N: st.tuples(
        st.just(N),
        st.lists(st.floats(-3, 3, allow_nan=False), min_size=(N - 1) * (N - 2) // 2, max_size=(N - 1) * (N - 2) // 2),
    )
)


@settings(max_examples=40, deadline=None)
@given(data_st)
def test_height_coefficients_match_linear_solve(case):
    N, vals = case
    tri = Triangulation(N)
    interior = [k for k in tri.lattice() if not tri.is_boundary(*k)]
    data = dict(zip(interior, vals))
    ifs = build_massopust(N, data, np.full(N * N, 0.9))
    for f in ifs.maps:
        O = f.linear[:2, :2] * N
        anchor = f.translation[:2]
        bx, by, c = join_up_oracle(tri, ifs.data, O, anchor)
        assert f.linear[2, 0] == pytest.approx(bx, abs=1e-12)
        assert f.linear[2, 1] == pytest.approx(by, abs=1e-12)
        assert f.translation[2] == pytest.approx(c, abs=1e-12)
    assert check_join_up(ifs) <= 1e-12
    assert orthogonality_residual(ifs) < 1e-12
    assert tiling_report(ifs)["ok"]


def test_zero_data_is_flat():
    ifs = build_massopust(4, {}, np.full(16, 0.5))
    for f, s in zip(ifs.maps, ifs.s):
        assert np.allclose(f.linear[2], [0, 0, s])
        assert f.translation[2] == 0


def test_triangulation_counts():
    for N in (3, 4, 7):
        tri = Triangulation(N)
        assert len(tri.lattice()) == (N + 1) * (N + 2) // 2
        assert len(tri.triangles()) == N * N
    tri = Triangulation(5)
    assert np.allclose(tri.point(0, 0), (0, 0))
    assert np.allclose(tri.point(0, 5), (1, 0))
    assert np.allclose(tri.point(5, 0), (0.5, R3 / 2))


@pytest.mark.parametrize(
    "N, data, s, match",
    [
        (2, {}, 0.5, "N must be"),
        (3, {(0, 1): 1.0}, np.full(9, 0.8), "boundary value"),
        (3, {(5, 5): 1.0}, np.full(9, 0.8), "outside"),
        (3, {}, np.full(9, 1.2), "scaling factors"),
        (3, {}, np.full(8, 0.8), "expected 9"),
    ],
)
def test_massopust_errors(N, data, s, match):
    with pytest.raises(SurfaceError, match=match):
        build_massopust(N, data, s)


def test_gh_maps_as_listed():
    ifs = build_geronimo_hardin(0.82, 1.0)
    w1, w2, w3, w4 = ifs.maps
    assert np.allclose(w1.linear, [[0.25, R3 / 4, 0], [R3 / 4, -0.25, 0], [1, 1 / R3, 0.82]])
    assert np.allclose(w1.translation, 0)
    assert np.allclose(w2.linear, [[0.25, -R3 / 4, 0], [-R3 / 4, -0.25, 0], [-1, 1 / R3, 0.82]])
    assert np.allclose(w3.linear, [[-0.5, 0, 0], [0, 0.5, 0], [0, -2 / R3, 0.82]])
    assert np.allclose(w4.linear, np.diag([-0.5, -0.5, 0.82]))
    for w in (w2, w3, w4):
        assert np.allclose(w.translation, (0.75, R3 / 4, 1.0))


def test_gh_w4_maps_onto_middle_triangle():
    w4 = build_geronimo_hardin(0.6, 1.0).planar_maps()[3]
    images = {tuple(np.round(w4(q), 12)) for q in CORNERS}
    midpoints = {tuple(np.round(p, 12)) for p in ((0.5, 0.0), (0.25, R3 / 4), (0.75, R3 / 4))}
    assert images == midpoints


def test_gh_planar_contraction_is_one_half():
    ifs = build_geronimo_hardin(0.5, 1.0)
    for f in ifs.planar_maps():
        assert f.operator_norm() == pytest.approx(0.5)
    assert tiling_report(ifs)["ok"]


def test_gh_errors():
    with pytest.raises(SurfaceError):
        build_geronimo_hardin(0.8, 0.0)
    with pytest.raises(SurfaceError):
        build_geronimo_hardin(1.0, 1.0)


def test_classification_of_center_peak():
    cl = classify_and_constants(uniform_massopust(3, 0.75))
    assert (len(cl.A1), len(cl.A2), len(cl.A3)) == (5, 2, 2)
    assert cl.A2 == (5, 8) and cl.A3 == (4, 7)
    assert cl.B == 0.5 and cl.D == 1.0


def test_classification_scale_invariant():
    a = classify_and_constants(build_massopust(3, center_peak(2.0), np.full(9, 0.75)))
    b = classify_and_constants(uniform_massopust(3, 0.75))
    assert a == b


def test_classification_of_zero_data():
    cl = classify_and_constants(build_massopust(3, {}, np.full(9, 0.5)))
    assert cl.A1 == tuple(range(1, 10))
    assert cl.B is None and cl.D is None


def test_region_validation():
    ok, bad = validate_region(uniform_massopust(3, 0.75))
    assert ok and not bad
    s = np.full(9, 0.75)
    s[4] = 0.5
    ok, bad = validate_region(build_massopust(3, center_peak(), s))
    assert not ok and bad[0][:2] == (5, "A2")
    ok, _ = validate_region(build_massopust(3, center_peak(), np.full(9, 1 / 3)))
    assert not ok


def test_region_bounds():
    region = parameter_region(uniform_massopust(3, 0.75))
    assert region.bound_for("A1") == pytest.approx(1 / 3)
    assert region.bound_for("A2") == pytest.approx(2 / 3)
    assert region.bound_for("A3") == pytest.approx(1 / 3)


def test_config_round_trip(tmp_path):
    cfg = {"construction": "massopust", "N": 3, "s": 0.75, "data": [{"r": 1, "c": 1, "value": 1.0}]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    ifs = build_from_config(json.loads(path.read_text()))
    ref = uniform_massopust(3, 0.75)
    for f, g in zip(ifs.maps, ref.maps):
        assert np.array_equal(f.linear, g.linear)


@pytest.mark.parametrize(
    "cfg",
    [
        {"construction": "massopust", "s": 0.75},
        {"construction": "geronimo-hardin", "s": 0.8},
        {"construction": "other", "s": 0.8},
        {"construction": "massopust", "N": 3, "s": 0.75, "extra": 1},
    ],
)
def test_config_errors(cfg):
    with pytest.raises(SurfaceError):
        build_from_config(cfg)
