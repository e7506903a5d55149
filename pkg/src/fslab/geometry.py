"""Planar and spatial primitives: affine maps, exact sqrt(3) scalars, convex polygons."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from numbers import Rational

import numpy as np

SQRT3 = np.sqrt(3.0)
ABS_TOL = 1e-9


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact scalars of the form (p + r*sqrt(3)) / 2
# ---------------------------------------------------------------------------


class DihedralScalar:
    """Exact number (p + r*sqrt(3))/2 with rational p, r.

    Integer p, r cover every entry of the order-12 rotation/reflection group.
    Rational coefficients are allowed so that translations such as 1/sqrt(3)
    (p=0, r=2/3) stay exact as well.
    """

    __slots__ = ("p", "r")

    def __init__(self, p=0, r=0):
        self.p = Fraction(p)
        self.r = Fraction(r)

    @classmethod
    def coerce(cls, value) -> "DihedralScalar":
        if isinstance(value, DihedralScalar):
            return value
        if isinstance(value, (int, Rational)):
            return cls(2 * Fraction(value), 0)
        raise TypeError(f"cannot represent {value!r} exactly")

    def __add__(self, other):
        try:
            other = DihedralScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return DihedralScalar(self.p + other.p, self.r + other.r)

    __radd__ = __add__

    def __neg__(self):
        return DihedralScalar(-self.p, -self.r)

    def __sub__(self, other):
        try:
            other = DihedralScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return DihedralScalar.coerce(other) - self

    def __mul__(self, other):
        try:
            other = DihedralScalar.coerce(other)
        except TypeError:
            return NotImplemented
        # (p1 + r1 t)(p2 + r2 t)/4 with t^2 = 3
        p = (self.p * other.p + 3 * self.r * other.r) / 2
        r = (self.p * other.r + self.r * other.p) / 2
        return DihedralScalar(p, r)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = DihedralScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.p == other.p and self.r == other.r

    def __hash__(self):
        return hash((self.p, self.r))

    def __float__(self):
        return (float(self.p) + float(self.r) * float(SQRT3)) / 2.0

    def __repr__(self):
        return f"DihedralScalar({self.p}, {self.r})"

    def is_zero(self) -> bool:
        return self.p == 0 and self.r == 0


def exact_matrix(rows) -> tuple:
    """Tuple-of-tuples matrix with DihedralScalar entries."""
    return tuple(tuple(DihedralScalar.coerce(v) for v in row) for row in rows)


def exact_matmul(a, b) -> tuple:
    n, m, k = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][j] * b[j][c] for j in range(m)), DihedralScalar()) for c in range(k))
        for i in range(n)
    )


def exact_transpose(a) -> tuple:
    return tuple(zip(*a))


def exact_matvec(a, v) -> tuple:
    return tuple(sum((row[j] * v[j] for j in range(len(v))), DihedralScalar()) for row in a)


def exact_dot(u, v) -> DihedralScalar:
    return sum((x * y for x, y in zip(u, v)), DihedralScalar())


def to_float(a) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in a]) if isinstance(a[0], tuple) else np.array(
        [float(x) for x in a]
    )


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> linear @ x + translation in dimension 2 or 3."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear)
        tr = np.asarray(self.translation)
        if lin.ndim != 2 or lin.shape[0] != lin.shape[1] or tr.shape != (lin.shape[0],):
            raise GeometryError(f"shape mismatch: linear {lin.shape}, translation {tr.shape}")
        if lin.dtype != object:
            lin = lin.astype(float)
            tr = tr.astype(float)
            if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(tr))):
                raise GeometryError("non-finite affine map")
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    def __call__(self, point):
        return apply_affine(self, point)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self o inner."""
        return AffineMap(self.linear @ inner.linear, self.linear @ inner.translation + self.translation)

    def fixed_point(self) -> np.ndarray:
        eye = np.eye(self.dim)
        return np.linalg.solve(eye - self.linear.astype(float), self.translation.astype(float))

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.linear.astype(float), 2))


Affine2 = AffineMap
Affine3 = AffineMap


def apply_affine(f: AffineMap, point):
    """linear @ point + translation; exact when entries are DihedralScalar."""
    if f.linear.dtype == object or any(isinstance(x, DihedralScalar) for x in np.ravel(point)):
        lin = f.linear
        tr = f.translation
        pt = list(np.ravel(np.asarray(point, dtype=object)))
        return np.array(
            [sum((lin[i][j] * pt[j] for j in range(len(pt))), tr[i]) for i in range(len(pt))],
            dtype=object,
        )
    pts = np.asarray(point, dtype=float)
    return pts @ f.linear.T + f.translation


def identity_map(dim: int) -> AffineMap:
    return AffineMap(np.eye(dim), np.zeros(dim))


# ---------------------------------------------------------------------------
# convex polygons
# ---------------------------------------------------------------------------


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clean(vertices: np.ndarray, tol: float) -> np.ndarray:
    """Drop repeated and collinear vertices from a closed vertex loop."""
    pts = []
    for v in vertices:
        v = np.asarray(v, dtype=float)
        if not pts or np.linalg.norm(v - pts[-1]) > tol * max(1.0, np.linalg.norm(v)):
            pts.append(v)
    while len(pts) > 1 and np.linalg.norm(pts[0] - pts[-1]) <= tol * max(1.0, np.linalg.norm(pts[0])):
        pts.pop()
    # drop one collinear vertex at a time so a removal never hides its neighbour
    while len(pts) >= 3:
        n = len(pts)
        for i in range(n):
            prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
            scale = max(np.linalg.norm(nxt - prev), 1.0)
            if abs(_cross(prev, cur, nxt)) <= tol * scale * scale:
                del pts[i]
                break
        else:
            break
    return np.asarray(pts).reshape(-1, 2)


class ConvexPolygon:
    """Convex polygon with counter-clockwise vertices."""

    __slots__ = ("vertices",)

    def __init__(self, vertices, tol: float = 1e-12):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(v)):
            raise GeometryError("non-finite polygon vertex")
        if len(v) >= 3 and signed_area(v) < 0:
            v = v[::-1]
        v = _clean(v, tol)
        if len(v) < 3:
            raise GeometryError("degenerate polygon: fewer than 3 non-collinear vertices")
        v.setflags(write=False)
        self.vertices = v

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def bounding_area(self) -> float:
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(span[0] * span[1])

    def map(self, f: AffineMap) -> "ConvexPolygon":
        return ConvexPolygon(apply_affine(f, self.vertices))

    def contains_points(self, pts, tol: float = ABS_TOL) -> np.ndarray:
        """Boolean mask: points within distance tol of the closed polygon."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.ones(len(pts), dtype=bool)
        v = self.vertices
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            edge = b - a
            length = np.hypot(*edge)
            cross = edge[0] * (pts[:, 1] - a[1]) - edge[1] * (pts[:, 0] - a[0])
            inside &= cross >= -tol * length
        return inside

    def same_as(self, other: "ConvexPolygon", tol: float = ABS_TOL) -> bool:
        if len(self.vertices) != len(other.vertices):
            return False
        a, b = self.vertices, other.vertices
        for shift in range(len(b)):
            if np.allclose(a, np.roll(b, shift, axis=0), atol=tol, rtol=0):
                return True
        return False

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()})"


def clip_polygons(a: ConvexPolygon, b: ConvexPolygon, area_tol: float | None = None):
    """Intersection of two convex polygons, or None when it has no interior.

    Half-plane clipping of ``a`` by each edge of ``b``.  Results with area at
    most ``area_tol`` (default 1e-12 times the bounding-box area of a and b)
    count as empty, so boundary contact is not an overlap.
    """
    if area_tol is None:
        both = np.vstack([a.vertices, b.vertices])
        span = both.max(axis=0) - both.min(axis=0)
        area_tol = 1e-12 * float(span[0] * span[1])
    out = [tuple(p) for p in a.vertices]
    cv = b.vertices
    for i in range(len(cv)):
        if not out:
            return None
        c1, c2 = cv[i], cv[(i + 1) % len(cv)]
        inp, out = out, []
        prev = inp[-1]
        prev_side = _cross(c1, c2, prev)
        for cur in inp:
            side = _cross(c1, c2, cur)
            if side >= 0:
                if prev_side < 0:
                    out.append(_intersect(prev, cur, prev_side, side))
                out.append(cur)
            elif prev_side >= 0:
                out.append(_intersect(prev, cur, prev_side, side))
            prev, prev_side = cur, side
    if len(out) < 3:
        return None
    pts = np.asarray(out)
    if signed_area(pts) <= area_tol:
        return None
    try:
        return ConvexPolygon(pts)
    except GeometryError:
        return None


def _intersect(p, q, dp, dq):
    t = dp / (dp - dq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def polygon_contains(outer: ConvexPolygon, inner: ConvexPolygon, tol: float = ABS_TOL) -> bool:
    return bool(np.all(outer.contains_points(inner.vertices, tol)))


def intersect_all(polys) -> ConvexPolygon | None:
    polys = list(polys)
    acc = polys[0]
    for p in polys[1:]:
        acc = clip_polygons(acc, p)
        if acc is None:
            return None
    return acc


def arrangement_max_depth(polys) -> int:
    """Largest k such that some k of the polygons share an interior point."""
    polys = list(polys)
    if len(polys) > 8:
        raise GeometryError("arrangement depth supports at most 8 polygons")
    best = min(len(polys), 1)

    def grow(region, start, size):
        nonlocal best
        best = max(best, size)
        for j in range(start, len(polys)):
            if size + (len(polys) - j) <= best:
                return
            nxt = clip_polygons(region, polys[j])
            if nxt is not None:
                grow(nxt, j + 1, size + 1)

    for i, p in enumerate(polys):
        grow(p, i + 1, 1)
    return best


def arrangement_subsets(polys, k: int):
    """All k-subsets (index tuples) whose intersection has nonempty interior."""
    return [idx for idx in combinations(range(len(polys)), k) if intersect_all([polys[i] for i in idx]) is not None]


def box_max_depth(boxes) -> int:
    """Maximum interior overlap of closed axis-aligned boxes [x0,x1]x[y0,y1].

    Coordinate sweep: the open cells between consecutive sorted endpoints
    are the only places the overlap count can change.
    """
    boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)
    if len(boxes) == 0:
        return 0
    xs = np.unique(boxes[:, [0, 1]])
    ys = np.unique(boxes[:, [2, 3]])
    xm = 0.5 * (xs[:-1] + xs[1:]) if len(xs) > 1 else xs
    ym = 0.5 * (ys[:-1] + ys[1:]) if len(ys) > 1 else ys
    best = 0
    for x in xm:
        col = (boxes[:, 0] < x) & (x < boxes[:, 1])
        if not col.any():
            continue
        for y in ym:
            n = int(np.count_nonzero(col & (boxes[:, 2] < y) & (y < boxes[:, 3])))
            best = max(best, n)
    return best
