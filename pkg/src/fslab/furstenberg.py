"""Furstenberg IFS of a block-triangular surface IFS and the dimension certificates built on it.

For a surface map with linear part ``[[lam*O, 0], [row, s]]`` the induced
planar map is ``h(x) = (lam/s) O^T x - row/s``.  Lower bounds on the
dimension of its stationary measure above ``3 - t0`` pin the Hausdorff
dimension of the surface to the affinity dimension ``t0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attractor import chaos_game
from .dimension import affinity_dimension
from .geometry import SQRT3, AffineMap, ConvexPolygon, arrangement_max_depth, box_max_depth, intersect_all, polygon_contains
from .surface import SurfaceIFS, classify_and_constants, orthogonality_residual, tiling_report

GOLDEN_THRESHOLD = (1 + math.sqrt(5)) / 4
CONTAIN_TOL = 1e-10


class FurstenbergError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FurstenbergIFS:
    maps: tuple
    weights: np.ndarray
    ratios: np.ndarray
    t0: float
    construction: str
    labels: tuple  # 1-based map labels
    canonical: "FurstenbergIFS | None" = None

    def __len__(self):
        return len(self.maps)


def build_furstenberg(ifs: SurfaceIFS, t0: float | None = None) -> FurstenbergIFS:
    s = np.asarray(ifs.s, dtype=float)
    if np.any(s == 0):
        raise FurstenbergError("a zero scaling factor has no Furstenberg map")
    if t0 is None:
        t0 = affinity_dimension(ifs).t0
    lam = np.asarray(ifs.lam, dtype=float)
    maps = tuple(
        AffineMap((l / si) * O.T, -np.asarray(row) / si) for l, si, O, row in zip(lam, s, ifs.orthogonal, ifs.heights)
    )
    weights = np.abs(s) * lam ** (t0 - 1)
    if abs(weights.sum() - 1.0) > 1e-12:
        raise FurstenbergError(f"weights sum to {weights.sum()!r}, not 1")
    canonical = None
    if ifs.construction == "geronimo-hardin":
        canonical = conjugate_by_scaling(maps, -ifs.a / float(s[0]), weights, t0, ifs.construction)
    return FurstenbergIFS(maps, weights, lam / s, float(t0), ifs.construction, tuple(range(1, len(maps) + 1)), canonical)


def conjugate_by_scaling(maps, c: float, weights, t0, construction) -> FurstenbergIFS:
    """Family g^-1 o h o g for g(x) = c x (same linear parts, translations / c)."""
    new = tuple(AffineMap(f.linear, f.translation / c) for f in maps)
    ratios = np.array([np.linalg.norm(f.linear, 2) for f in new])
    return FurstenbergIFS(new, np.asarray(weights), ratios, t0, construction, tuple(range(1, len(new) + 1)))


def gh_canonical(s: float) -> FurstenbergIFS:
    """Canonical Geronimo-Hardin family h_k(x) = O_k x / (2s) + t_k."""
    from .surface import build_geronimo_hardin

    return build_furstenberg(build_geronimo_hardin(s, 1.0)).canonical


GH_TRANSLATIONS = np.array([[1.0, 1 / SQRT3], [-1.0, 1 / SQRT3], [0.0, -2 / SQRT3], [0.0, 0.0]])


# ---------------------------------------------------------------------------
# one-dimensional projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectedSystem:
    axis: str
    signs: np.ndarray
    ratios: np.ndarray
    offsets: np.ndarray
    labels: tuple
    classes: dict = field(default_factory=dict)  # label -> "A1" | "A2" | "A3"
    N: int | None = None
    s: np.ndarray | None = None

    def __call__(self, i: int, x):
        return self.signs[i] * self.ratios[i] * x + self.offsets[i]

    @property
    def fixed_points(self) -> np.ndarray:
        return self.offsets / (1 - self.signs * self.ratios)

    def index(self, label: int) -> int:
        return self.labels.index(label)

    def image(self, i: int, lo: float, hi: float) -> tuple:
        a, b = self(i, lo), self(i, hi)
        return (min(a, b), max(a, b))


def project_1d(fifs: FurstenbergIFS, axis: str, ifs: SurfaceIFS | None = None) -> ProjectedSystem:
    """Coordinate projection of a Furstenberg IFS with diagonal linear parts."""
    k = {"X": 0, "Y": 1}[axis.upper()]
    signs, ratios, offsets = [], [], []
    for f in fifs.maps:
        L = f.linear
        if abs(L[0, 1]) > 1e-15 or abs(L[1, 0]) > 1e-15:
            raise FurstenbergError("projection not self-map: linear parts are not axis aligned")
        signs.append(float(np.sign(L[k, k])))
        ratios.append(abs(float(L[k, k])))
        offsets.append(float(f.translation[k]))
    classes = {}
    if ifs is not None and ifs.construction == "massopust":
        cl = classify_and_constants(ifs)
        classes = {i: name for name, members in (("A1", cl.A1), ("A2", cl.A2), ("A3", cl.A3)) for i in members}
    return ProjectedSystem(
        axis.upper(),
        np.array(signs),
        np.array(ratios),
        np.array(offsets),
        fifs.labels,
        classes,
        N=None if ifs is None else ifs.N,
        s=None if ifs is None else np.asarray(ifs.s, dtype=float),
    )


def attractor_hull(sys: ProjectedSystem, max_iter: int = 100000) -> tuple:
    """Convex hull of the 1D attractor by monotone expansion from the fixed points."""
    fp = sys.fixed_points
    lo, hi = float(fp.min()), float(fp.max())
    for _ in range(max_iter):
        imgs = [sys.image(i, lo, hi) for i in range(len(sys.labels))]
        nlo = min(lo, min(a for a, _ in imgs))
        nhi = max(hi, max(b for _, b in imgs))
        if nlo == lo and nhi == hi:
            break
        lo, hi = nlo, nhi
    return lo, hi


@dataclass(frozen=True)
class IntervalResult:
    lo: float
    hi: float
    contained: bool
    method: str
    worst_excess: float
    note: str = ""


def _lemma_roles(sys: ProjectedSystem) -> bool:
    """True for the nine-map center-peak system with a positive peak."""
    if sys.N != 3 or len(sys.labels) != 9 or not sys.classes:
        return False
    return sys.classes.get(5) == "A2" and sys.classes.get(8) == "A2" and sys.classes.get(4) == "A3"


def invariant_interval(sys: ProjectedSystem) -> IntervalResult:
    """Interval [lo, hi] mapped into itself by every map of the system."""
    fp = sys.fixed_points
    if np.allclose(sys.offsets, 0.0, atol=0.0):
        lo = hi = 0.0
        method = "degenerate"
    elif _lemma_roles(sys):
        f = lambda label, x: sys(sys.index(label), x)  # noqa: E731
        fix = lambda label: fp[sys.index(label)]  # noqa: E731
        if sys.axis == "X":
            lo, hi = 0.0, max(fix(5), fix(8))
            method = "lemma-x"
        else:
            lo = fix(2)
            hi = max(fix(5), fix(4), f(8, lo), f(7, lo))
            method = "lemma-y:" + ("fix" if max(fix(5), fix(4)) >= max(f(8, lo), f(7, lo)) else "image")
    else:
        lo, hi = attractor_hull(sys)
        method = "hull"
    ok, worst = _contains_images(sys, lo, hi)
    note = ""
    if not ok and method.startswith("lemma"):
        # outside the lemma's parameter range; the hull is always invariant
        note = f"{method} interval [{lo:.6g}, {hi:.6g}] not invariant (excess {worst:.3g})"
        lo, hi = attractor_hull(sys)
        method += "+hull"
        ok, worst = _contains_images(sys, lo, hi)
    if not ok:
        note = (note + "; " if note else "") + "containment fails"
    return IntervalResult(float(lo), float(hi), bool(ok), method, float(worst), note)


def _contains_images(sys: ProjectedSystem, lo: float, hi: float) -> tuple:
    worst = 0.0
    for i in range(len(sys.labels)):
        a, b = sys.image(i, lo, hi)
        worst = max(worst, lo - a, b - hi)
    return worst <= CONTAIN_TOL * max(1.0, abs(lo), abs(hi)), worst


def interval_disjointness(sys: ProjectedSystem, interval: IntervalResult | None = None) -> bool:
    """Interiors of the images of the flipped (A3) and unflipped (A2) maps do not meet."""
    iv = interval or invariant_interval(sys)
    left = [sys.image(i, iv.lo, iv.hi) for i, lab in enumerate(sys.labels) if sys.classes.get(lab) == "A3"]
    right = [sys.image(i, iv.lo, iv.hi) for i, lab in enumerate(sys.labels) if sys.classes.get(lab) == "A2"]
    scale = max(1.0, abs(iv.hi))
    for a0, a1 in left:
        for b0, b1 in right:
            if min(a1, b1) - max(a0, b0) > 1e-12 * scale:
                return False
    return True


# ---------------------------------------------------------------------------
# invariant hexagon of the Geronimo-Hardin family
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InvariantHexagon:
    s: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    A1: np.ndarray  # h4(A)
    B1: np.ndarray
    C1: np.ndarray
    polygon: ConvexPolygon
    contained: tuple  # per map i: h_i(hexagon) inside the hexagon
    offending: tuple


def gh_hexagon(s: float) -> InvariantHexagon:
    if not 0.5 < s < 1:
        raise FurstenbergError("s must lie in (1/2, 1)")
    k = 4 * s - 2
    A = np.array([4 * s / k, 4 * s / (SQRT3 * k)])
    B = np.array([-A[0], A[1]])
    C = np.array([0.0, -8 * s / (SQRT3 * k)])
    fam = gh_canonical(s)
    h4 = fam.maps[3]
    A1, B1, C1 = h4(A), h4(B), h4(C)
    verts = np.array([A, C1, B, A1, C, B1])
    ang = np.arctan2(verts[:, 1], verts[:, 0])
    poly = ConvexPolygon(verts[np.argsort(ang)])
    contained, offending = [], []
    for i, h in enumerate(fam.maps):
        img = poly.map(h)
        ok = polygon_contains(poly, img, 1e-9)
        contained.append(ok)
        if not ok:
            bad = img.vertices[~poly.contains_points(img.vertices, 1e-9)]
            offending.append((i + 1, bad.tolist()))
    return InvariantHexagon(s, A, B, C, A1, B1, C1, poly, tuple(contained), tuple(offending))


def gh_coincidence_points(s: float) -> dict:
    """h1(A'), h2(B'), h3(C'): the three image vertices that meet at 0 on the threshold."""
    fam = gh_canonical(s)
    k = 4 * s - 2
    A1 = np.array([-2 / k, -2 / (SQRT3 * k)])
    B1 = np.array([2 / k, -2 / (SQRT3 * k)])
    C1 = np.array([0.0, 4 / (SQRT3 * k)])
    return {"A1'": fam.maps[0](A1), "B2'": fam.maps[1](B1), "C3'": fam.maps[2](C1), "s(4s-2)": s * k}


# ---------------------------------------------------------------------------
# overlap certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapCertificate:
    Q: int
    method: str
    depth: int
    n_maps: int
    certified: bool
    flags: tuple = ()
    detail: dict = field(default_factory=dict)


def overlap_certificate_gh(s: float) -> OverlapCertificate:
    hexagon = gh_hexagon(s)
    fam = gh_canonical(s)
    images = [hexagon.polygon.map(h) for h in fam.maps]
    depth = arrangement_max_depth(images)
    triple_empty = intersect_all(images[:3]) is None
    flags = []
    if s < GOLDEN_THRESHOLD:
        flags.append("below threshold (1+sqrt5)/4")
    if not all(hexagon.contained):
        flags.append("hexagon not invariant")
    Q = 4 - depth
    certified = triple_empty and Q >= 1 and all(hexagon.contained) and s >= GOLDEN_THRESHOLD
    return OverlapCertificate(
        Q,
        "polygon-arrangement",
        depth,
        4,
        certified,
        tuple(flags),
        {"triple_123_empty": triple_empty, "images": [p.vertices.tolist() for p in images]},
    )


def massopust3_hypotheses(ifs: SurfaceIFS) -> list:
    """Violated hypotheses of the every-parameter theorem for N = 3 (empty when all hold)."""
    s = np.asarray(ifs.s, dtype=float)
    bad = []
    if ifs.construction != "massopust" or ifs.N != 3:
        return ["not the N=3 wedding-cake construction"]
    if ifs.data.get((1, 1), 0.0) <= 0:
        bad.append("center value must be positive")
    if not np.all((s > 2 / 3) & (s < 1)):
        bad.append("s_i outside (2/3, 1)")
    if max(s[4], s[7]) > min(s[3], s[6]):
        bad.append("max(s5, s8) > min(s4, s7)")
    if s[1] > s[8]:
        bad.append("s2 > s9")
    return bad


def invariant_rectangle(fifs: FurstenbergIFS, ifs: SurfaceIFS) -> tuple:
    px = project_1d(fifs, "X", ifs)
    py = project_1d(fifs, "Y", ifs)
    return px, py, invariant_interval(px), invariant_interval(py)


def massopust_boxes(px, py, ix, iy) -> np.ndarray:
    out = []
    for i in range(len(px.labels)):
        x0, x1 = px.image(i, ix.lo, ix.hi)
        y0, y1 = py.image(i, iy.lo, iy.hi)
        out.append((x0, x1, y0, y1))
    return np.array(out)


def overlap_certificate_massopust3(ifs: SurfaceIFS, fifs: FurstenbergIFS | None = None) -> OverlapCertificate:
    fifs = fifs or build_furstenberg(ifs)
    flags = []
    bad = massopust3_hypotheses(ifs)
    if bad:
        flags.append("every-parameter hypotheses unmet: " + "; ".join(bad))
    px, py, ix, iy = invariant_rectangle(fifs, ifs)
    if not (ix.contained and iy.contained):
        flags.append("invariant interval containment fails")
    boxes = massopust_boxes(px, py, ix, iy)
    if ix.hi - ix.lo <= 0 or iy.hi - iy.lo <= 0:
        depth = len(boxes)  # every image is the same degenerate region
    else:
        depth = box_max_depth(boxes)
    Q = len(boxes) - depth
    disjoint = interval_disjointness(px, ix)
    certified = not bad and ix.contained and iy.contained and Q >= 3
    return OverlapCertificate(
        Q,
        "box-arrangement",
        depth,
        len(boxes),
        certified,
        tuple(flags),
        {
            "x_interval": (ix.lo, ix.hi, ix.method),
            "y_interval": (iy.lo, iy.hi, iy.method),
            "x_images_disjoint": disjoint,
            "boxes": boxes.tolist(),
        },
    )


def covering_lower_bound(Q: int, p_min: float, lam_max: float) -> float:
    """log(1 - Q p_min) / log(lam_max): lower bound for the stationary measure's dimension."""
    if Q == 0:
        return 0.0
    if not Q * p_min < 1:
        raise FurstenbergError("Q * p_min must be < 1")
    if not 0 < lam_max < 1:
        raise FurstenbergError("largest contraction ratio must lie in (0,1)")
    return math.log(1 - Q * p_min) / math.log(lam_max)


def empirical_overlap(fifs: FurstenbergIFS, regions, samples: int = 10**5, seed: int = 0, workers: int = 1) -> int:
    """n_maps minus the largest number of region images holding one sampled attractor point.

    ``regions`` is a list of ConvexPolygon images or an (n, 4) array of boxes.
    """
    n = len(fifs.maps)
    if n == 1:
        return 0
    pts = chaos_game(fifs.maps, fifs.weights, samples, seed=seed, workers=workers).points
    counts = np.zeros(len(pts), dtype=int)
    if isinstance(regions, np.ndarray):
        for x0, x1, y0, y1 in regions:
            counts += (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
    else:
        for poly in regions:
            counts += poly.contains_points(pts, 0.0)
    return int(n - counts.max())


# ---------------------------------------------------------------------------
# the full pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    status: str  # "Certified" | "Hypotheses-unmet" | "Bound-insufficient"
    t0: float
    trace: dict

    @property
    def certified(self) -> bool:
        return self.status == "Certified"


def rapaport_preconditions(ifs: SurfaceIFS) -> dict:
    tiles = tiling_report(ifs)
    lam = np.asarray(ifs.lam, dtype=float)
    s = np.asarray(ifs.s, dtype=float)
    return {
        "sosc_witness": tiles["ok"],
        "sum_lambda_sq": float(np.sum(lam**2)),
        "sum_lambda_sq_is_1": abs(float(np.sum(lam**2)) - 1) < 1e-12,
        "lambda_below_s": bool(np.all(lam < s)),
        "orthogonality_residual": orthogonality_residual(ifs),
    }


def sufficient_condition(t0: float) -> dict:
    """The closed test 3^t0 > 18 and its quadratic form."""
    u = 3.0**t0
    return {"3^t0": u, "exceeds_18": u > 18, "quadratic": u * u - 27 * u + 162}


def certificate_pipeline(ifs: SurfaceIFS) -> Verdict:
    trace = {"construction": ifs.construction, "preconditions": rapaport_preconditions(ifs)}
    pre = trace["preconditions"]
    sol = affinity_dimension(ifs)
    t0 = sol.t0
    trace["affinity"] = {"t0": t0, "r1": sol.r1, "r2": sol.r2, "branch": sol.branch}
    trace["target"] = 3 - t0
    if not (pre["sosc_witness"] and pre["sum_lambda_sq_is_1"] and pre["lambda_below_s"]):
        return Verdict("Hypotheses-unmet", t0, trace | {"reason": "Rapaport preconditions fail"})
    fifs = build_furstenberg(ifs, t0)
    p_min = float(fifs.weights.min())
    lam_max = float(fifs.ratios.max())
    trace["p_min"], trace["lambda_max"] = p_min, lam_max

    if ifs.construction == "geronimo-hardin":
        s = float(ifs.s[0])
        trace["threshold"] = GOLDEN_THRESHOLD
        if s < GOLDEN_THRESHOLD:
            return Verdict("Hypotheses-unmet", t0, trace | {"reason": "s below (1+sqrt5)/4"})
        cert = overlap_certificate_gh(s)
        trace["overlap"] = {"Q": cert.Q, "depth": cert.depth, "triple_123_empty": cert.detail["triple_123_empty"],
                            "flags": list(cert.flags)}
        if not cert.certified:
            return Verdict("Bound-insufficient", t0, trace | {"reason": "overlap certificate failed"})
        bound = covering_lower_bound(cert.Q, p_min, lam_max)
        trace["covering_bound"] = bound
        trace["margin"] = bound - (3 - t0)
        return Verdict("Certified" if bound > 3 - t0 else "Bound-insufficient", t0, trace)

    if ifs.construction == "massopust" and ifs.N == 3:
        bad = massopust3_hypotheses(ifs)
        trace["sufficient_condition"] = sufficient_condition(t0)
        trace["sum_s"] = float(np.sum(ifs.s))
        if bad:
            return Verdict("Hypotheses-unmet", t0, trace | {"reason": "; ".join(bad)})
        cert = overlap_certificate_massopust3(ifs, fifs)
        trace["overlap"] = {"Q": cert.Q, "depth": cert.depth, "flags": list(cert.flags),
                            "x_interval": cert.detail["x_interval"], "y_interval": cert.detail["y_interval"],
                            "x_images_disjoint": cert.detail["x_images_disjoint"]}
        if not cert.certified:
            return Verdict("Bound-insufficient", t0, trace | {"reason": "overlap certificate failed"})
        bound = covering_lower_bound(cert.Q, p_min, lam_max)
        s_max = float(np.max(ifs.s))
        trace["covering_bound"] = bound
        trace["covering_bound_smax_variant"] = math.log(1 - cert.Q * p_min) / -math.log(3 * s_max)
        trace["margin"] = bound - (3 - t0)
        return Verdict("Certified" if bound > 3 - t0 else "Bound-insufficient", t0, trace)

    return Verdict("Hypotheses-unmet", t0, trace | {"reason": "no every-parameter certificate route for this input"})


def furstdimae_inequality(ifs: SurfaceIFS) -> dict:
    """Left side of the almost-every-parameter sufficient inequality, and the bound behind it."""
    cl = classify_and_constants(ifs)
    if not (cl.A2 or cl.A3):
        raise FurstenbergError("needs at least one map outside the fixed-point class")
    N = ifs.N
    s = np.asarray(ifs.s, dtype=float)
    total = float(s.sum())
    a1 = np.array([i - 1 for i in cl.A1], dtype=int)
    rest = np.array([i - 1 for i in cl.A2 + cl.A3], dtype=int)
    rest_sum = float(s[rest].sum())
    value = float(np.sum(s[a1] * np.log((s[a1] + rest_sum) / (N**2 * s[a1] ** 3) * total)))
    value += float(np.sum(s[rest] * np.log(total**2 / (N**2 * s[rest] ** 3))))
    t0 = 1 + math.log(total) / math.log(N)
    p = s * N ** (1 - t0)
    lam = 1 / (N * s)
    H = float(-np.sum(p * np.log(p)))
    chi = float(-np.sum(p * np.log(lam)))
    phi = float(np.sum(p[a1] * np.log(p[a1] + p[rest].sum())))
    return {"positive": value > 0, "value": value, "entropy": H, "lyapunov": chi, "phi": phi,
            "bound": (H + phi) / chi, "target": 3 - t0}


__all__ = [
    "FurstenbergError",
    "FurstenbergIFS",
    "GOLDEN_THRESHOLD",
    "IntervalResult",
    "InvariantHexagon",
    "OverlapCertificate",
    "ProjectedSystem",
    "Verdict",
    "attractor_hull",
    "build_furstenberg",
    "certificate_pipeline",
    "covering_lower_bound",
    "empirical_overlap",
    "furstdimae_inequality",
    "gh_canonical",
    "gh_coincidence_points",
    "gh_hexagon",
    "interval_disjointness",
    "invariant_interval",
    "invariant_rectangle",
    "massopust_boxes",
    "overlap_certificate_gh",
    "overlap_certificate_massopust3",
    "project_1d",
    "sufficient_condition",
]
