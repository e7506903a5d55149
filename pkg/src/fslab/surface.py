"""Fractal interpolation surface IFSs over the equilateral triangle.

Two constructions are supported:

* the wedding-cake (Massopust) surface over the uniform N-triangulation of
  the triangle with corners (0,0), (1,0), (1/2, sqrt(3)/2), and
* the four-map Geronimo-Hardin surface over the midpoint subdivision.

Every map has the block form ``[[lam*O, 0], [bx, by, s]]`` where ``O`` is a
2x2 orthogonal matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .geometry import SQRT3, AffineMap, ConvexPolygon, clip_polygons

CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2]])
JOIN_UP_TOL = 1e-12


class SurfaceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# triangulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangleRecord:
    index: int  # 1-based, up-triangles first
    up: bool
    left: tuple  # lattice coordinate (r, c) of the left end of the horizontal edge
    right: tuple
    apex: tuple
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0


@dataclass(frozen=True)
class Triangulation:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise SurfaceError(f"N must be an integer >= 3, got {self.N}")

    def point(self, r: int, c: int) -> np.ndarray:
        N = self.N
        return np.array([c / N + r / (2 * N), r * SQRT3 / (2 * N)])

    def lattice(self) -> list:
        return [(r, c) for r in range(self.N + 1) for c in range(self.N - r + 1)]

    def is_boundary(self, r: int, c: int) -> bool:
        return r == 0 or c == 0 or c == self.N - r

    def triangles(self) -> list:
        N = self.N
        out = []
        k = 1
        for r in range(N):
            for c in range(N - r):
                out.append(TriangleRecord(k, True, (r, c), (r, c + 1), (r + 1, c)))
                k += 1
        for r in range(N - 1):
            for c in range(N - r - 1):
                out.append(TriangleRecord(k, False, (r + 1, c), (r + 1, c + 1), (r, c + 1)))
                k += 1
        return out


# ---------------------------------------------------------------------------
# IFS container
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurfaceIFS:
    construction: str
    maps: tuple
    s: np.ndarray
    lam: np.ndarray
    orthogonal: tuple  # 2x2 float arrays O_i
    heights: np.ndarray  # rows (bx_i, by_i): gradient part of the height maps
    N: int | None = None
    a: float | None = None
    triangles: tuple = ()
    data: Mapping = field(default_factory=dict)

    def __len__(self):
        return len(self.maps)

    @property
    def n(self) -> int:
        return len(self.maps)

    def planar_maps(self) -> list:
        return [AffineMap(f.linear[:2, :2], f.translation[:2]) for f in self.maps]

    def grid_point(self, key) -> np.ndarray:
        if self.construction == "massopust":
            return Triangulation(self.N).point(*key)
        return _gh_point(key)


def _check_s(s, n: int) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(s, dtype=float), (n,)).copy() if np.ndim(s) == 0 else np.asarray(s, dtype=float)
    if arr.shape != (n,):
        raise SurfaceError(f"expected {n} scaling factors, got {arr.shape[0] if arr.ndim else 1}")
    if not np.all((arr > 0) & (arr < 1)):
        raise SurfaceError(f"scaling factors must lie in (0,1); got {arr.tolist()}")
    return arr


def _assemble(lam, O, bx, by, s, shift, c) -> AffineMap:
    lin = np.zeros((3, 3))
    lin[:2, :2] = lam * O
    lin[2] = (bx, by, s)
    return AffineMap(lin, np.array([shift[0], shift[1], c]))


def build_massopust(N: int, data: Mapping, s) -> SurfaceIFS:
    """Wedding-cake IFS for interpolation data keyed by lattice coordinate (r, c).

    Missing lattice points default to 0.  Boundary values must be 0.
    """
    tri = Triangulation(N)
    values = {}
    for key in tri.lattice():
        values[key] = float(data.get(key, 0.0))
    for key, v in data.items():
        key = tuple(key)
        if key not in values:
            raise SurfaceError(f"lattice coordinate {key} outside the N={N} triangulation")
        if not np.isfinite(v):
            raise SurfaceError(f"non-finite value at {key}")
        if tri.is_boundary(*key) and v != 0:
            raise SurfaceError(f"boundary value at {key} must be 0, got {v}")
    s = _check_s(s, N * N)
    lam = 1.0 / N
    maps, orth, heights, records = [], [], [], []
    for t, si in zip(tri.triangles(), s):
        a1, a2, a3 = values[t.left], values[t.right], values[t.apex]
        flip_x = a1 < a2
        O = np.diag([-1.0 if flip_x else 1.0, 1.0 if t.up else -1.0])
        anchor = tri.point(*(t.right if flip_x else t.left))
        bx = -abs(a1 - a2)
        by = (2 / SQRT3) * (a3 - (a1 + a2) / 2)
        c = max(a1, a2)
        maps.append(_assemble(lam, O, bx, by, si, anchor, c))
        orth.append(O)
        heights.append((bx, by))
        records.append(TriangleRecord(t.index, t.up, t.left, t.right, t.apex, a1, a2, a3))
    ifs = SurfaceIFS(
        "massopust",
        tuple(maps),
        s,
        np.full(N * N, lam),
        tuple(orth),
        np.array(heights),
        N=N,
        triangles=tuple(records),
        data=values,
    )
    check_join_up(ifs)
    return ifs


GH_POINTS = {
    (0, 0): (0.0, 0.0),
    (0, 2): (1.0, 0.0),
    (2, 0): (0.5, SQRT3 / 2),
    (0, 1): (0.5, 0.0),
    (1, 0): (0.25, SQRT3 / 4),
    (1, 1): (0.75, SQRT3 / 4),
}


def _gh_point(key):
    return np.array(GH_POINTS[tuple(key)])


def gh_orthogonal() -> list:
    h = 0.5
    r = SQRT3 / 2
    return [
        np.array([[h, r], [r, -h]]),
        np.array([[h, -r], [-r, -h]]),
        np.array([[-1.0, 0.0], [0.0, 1.0]]),
        np.array([[-1.0, 0.0], [0.0, -1.0]]),
    ]


def build_geronimo_hardin(s: float, a: float) -> SurfaceIFS:
    """Four-map surface: zero on the corners, height a on the edge midpoints."""
    if not np.isfinite(a) or a == 0:
        raise SurfaceError("the Geronimo-Hardin construction needs a nonzero height a")
    if not np.isscalar(s) and np.ndim(s) != 0:
        raise SurfaceError("the Geronimo-Hardin construction takes a single scaling factor")
    s = float(s)
    _check_s(s, 1)
    O = gh_orthogonal()
    rows = [(a, a / SQRT3), (-a, a / SQRT3), (0.0, -2 * a / SQRT3), (0.0, 0.0)]
    shifts = [(0.0, 0.0, 0.0), (0.75, SQRT3 / 4, a), (0.75, SQRT3 / 4, a), (0.75, SQRT3 / 4, a)]
    maps = [_assemble(0.5, Oi, bx, by, s, sh[:2], sh[2]) for Oi, (bx, by), sh in zip(O, rows, shifts)]
    data = {k: (a if k in {(0, 1), (1, 0), (1, 1)} else 0.0) for k in GH_POINTS}
    ifs = SurfaceIFS(
        "geronimo-hardin",
        tuple(maps),
        np.full(4, s),
        np.full(4, 0.5),
        tuple(O),
        np.array(rows),
        a=float(a),
        data=data,
    )
    check_join_up(ifs)
    return ifs


# ---------------------------------------------------------------------------
# checks and constants
# ---------------------------------------------------------------------------


def _value_lookup(ifs: SurfaceIFS):
    keys = list(ifs.data)
    pts = np.array([ifs.grid_point(k) for k in keys])
    vals = np.array([ifs.data[k] for k in keys])

    def lookup(p):
        d = np.linalg.norm(pts - p, axis=1)
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise SurfaceError(f"point {p} is not a data point")
        return vals[j]

    return lookup


def check_join_up(ifs: SurfaceIFS, tol: float = JOIN_UP_TOL) -> float:
    """Max |V_i(q,0) - data(U_i(q))| over corners q; raises if above tol."""
    lookup = _value_lookup(ifs)
    worst = 0.0
    for f in ifs.maps:
        for q in CORNERS:
            img = f(np.array([q[0], q[1], 0.0]))
            worst = max(worst, abs(img[2] - lookup(img[:2])))
    if worst > tol:
        raise SurfaceError(f"join-up residual {worst:.3e} exceeds {tol}")
    return worst


def orthogonality_residual(ifs: SurfaceIFS) -> float:
    worst = 0.0
    for f, lam in zip(ifs.maps, ifs.lam):
        O = f.linear[:2, :2] / lam
        worst = max(worst, float(np.max(np.abs(O.T @ O - np.eye(2)))))
    return worst


def tiling_report(ifs: SurfaceIFS) -> dict:
    """Area sum and pairwise interior disjointness of the planar images of the triangle."""
    base = ConvexPolygon(CORNERS)
    imgs = [base.map(f) for f in ifs.planar_maps()]
    area_sum = sum(p.area for p in imgs)
    overlaps = []
    for i in range(len(imgs)):
        for j in range(i + 1, len(imgs)):
            if clip_polygons(imgs[i], imgs[j]) is not None:
                overlaps.append((i + 1, j + 1))
    inside = all(np.all(base.contains_points(p.vertices, 1e-12)) for p in imgs)
    ok = abs(area_sum - base.area) < 1e-12 and not overlaps and inside
    return {"ok": ok, "area_sum": area_sum, "area": base.area, "overlaps": overlaps, "images_inside": inside}


@dataclass(frozen=True)
class Classification:
    A1: tuple
    A2: tuple
    A3: tuple
    B: float | None
    D: float | None


def classify_and_constants(ifs: SurfaceIFS) -> Classification:
    """Split triangles by the sign of a1 - a2 and compute the constants B, D.

    Index sets are 1-based triangle indices.
    """
    if ifs.construction != "massopust":
        raise SurfaceError("classification is defined for the wedding-cake construction")
    A1, A2, A3 = [], [], []
    for t in ifs.triangles:
        (A1 if t.a1 == t.a2 else A2 if t.a1 > t.a2 else A3).append(t.index)
    gap = {t.index: abs(t.a1 - t.a2) for t in ifs.triangles}
    D = B = None
    if A3:
        D = min(gap[k] / gap[i] for k in A3 for i in A3)
        if A2:
            B = 1.0 / (1.0 + max(max(gap[i] / gap[k] for k in A3) for i in A2))
    return Classification(tuple(A1), tuple(A2), tuple(A3), B, D)


@dataclass(frozen=True)
class ParameterRegion:
    N: int
    lower: dict  # class name -> open lower bound

    def bound_for(self, cls: str) -> float:
        return self.lower[cls]


def parameter_region(ifs: SurfaceIFS, cl: Classification | None = None) -> ParameterRegion:
    cl = cl or classify_and_constants(ifs)
    N = ifs.N
    lower = {"A1": 1.0 / N}
    if cl.A2:
        lower["A2"] = 1.0 / (N * cl.B) if cl.B else float("inf")
    if cl.A3:
        lower["A3"] = 1.0 / (N * cl.D)
    return ParameterRegion(N, lower)


def validate_region(ifs: SurfaceIFS, region: ParameterRegion | None = None) -> tuple:
    """(ok, violators) where violators lists (index, class, s_i, lower bound)."""
    cl = classify_and_constants(ifs)
    region = region or parameter_region(ifs, cl)
    bad = []
    for name, members in (("A1", cl.A1), ("A2", cl.A2), ("A3", cl.A3)):
        for i in members:
            si = float(ifs.s[i - 1])
            lo = region.lower[name]
            if not (lo < si < 1.0):
                bad.append((i, name, si, lo))
    return (not bad, bad)


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["construction", "s"],
    "properties": {
        "construction": {"enum": ["massopust", "geronimo-hardin"]},
        "N": {"type": "integer", "minimum": 3},
        "data": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["r", "c", "value"],
                "properties": {
                    "r": {"type": "integer", "minimum": 0},
                    "c": {"type": "integer", "minimum": 0},
                    "value": {"type": "number"},
                },
            },
        },
        "s": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}]},
        "a": {"type": "number"},
        "options": {"type": "object"},
    },
}


def build_from_config(cfg: Mapping) -> SurfaceIFS:
    import jsonschema

    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SurfaceError(f"config: {exc.message}") from None
    if cfg["construction"] == "geronimo-hardin":
        if "a" not in cfg:
            raise SurfaceError("config: geronimo-hardin needs 'a'")
        return build_geronimo_hardin(cfg["s"], cfg["a"])
    if "N" not in cfg:
        raise SurfaceError("config: massopust needs 'N'")
    data = {(d["r"], d["c"]): d["value"] for d in cfg.get("data", [])}
    return build_massopust(cfg["N"], data, cfg["s"])


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def center_peak(a: float = 1.0) -> dict:
    """N=3 data: value a at the single interior lattice point."""
    return {(1, 1): float(a)}


def uniform_massopust(N: int, s: float, data: Mapping | None = None) -> SurfaceIFS:
    return build_massopust(N, data if data is not None else ({} if N != 3 else center_peak()), np.full(N * N, s))


__all__ = [
    "CORNERS",
    "Classification",
    "ParameterRegion",
    "SurfaceError",
    "SurfaceIFS",
    "TriangleRecord",
    "Triangulation",
    "build_from_config",
    "build_geronimo_hardin",
    "build_massopust",
    "center_peak",
    "check_join_up",
    "classify_and_constants",
    "orthogonality_residual",
    "parameter_region",
    "tiling_report",
    "validate_region",
]
