"""Attractor sampling: chaos game, subdivision meshes, box counting and file export."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .surface import CORNERS, SurfaceIFS

DEFAULT_BURN_IN = 100
DEFAULT_STREAMS = 256
MESH_BUDGET = 10**6


class AttractorError(ValueError):
    pass


def _stack(maps):
    maps = list(maps)
    if not maps:
        raise AttractorError("empty IFS")
    lin = np.stack([np.asarray(f.linear, dtype=float) for f in maps])
    tr = np.stack([np.asarray(f.translation, dtype=float) for f in maps])
    return lin, tr


def contraction_factor(maps) -> tuple:
    """(rho, theta): largest operator norm of diag(1,..,1,theta) A diag(1,..,1,1/theta).

    Block lower-triangular surface maps are contractions only after the last
    axis is rescaled, so theta is halved until every rescaled norm drops
    below 1.  Plain planar maps report theta = 1.
    """
    lin, _ = _stack(maps)
    d = lin.shape[1]
    theta = 1.0
    for _ in range(64):
        D = np.ones(d)
        D[-1] = theta
        scaled = lin * D[None, :, None] / D[None, None, :]
        rho = max(float(np.linalg.norm(m, 2)) for m in scaled)
        if rho < 1.0 or d == 2:
            return rho, theta
        theta *= 0.5
    return rho, theta


def check_contractive(maps) -> float:
    rho, _ = contraction_factor(maps)
    if not rho < 1.0:
        raise AttractorError(f"IFS is not contractive (operator norm {rho:.6g} >= 1)")
    return rho


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    seed: int
    burn_in: int
    streams: int

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)


def _run_streams(lin, tr, weights, seqs, steps, burn_in, x0):
    S = len(seqs)
    idx = np.empty((S, steps + burn_in), dtype=np.intp)
    for k, sq in enumerate(seqs):
        rng = np.random.Generator(np.random.Philox(sq))
        idx[k] = rng.choice(len(weights), size=steps + burn_in, p=weights)
    x = np.broadcast_to(x0, (S, len(x0))).copy()
    out = np.empty((S, steps, len(x0)))
    for t in range(steps + burn_in):
        j = idx[:, t]
        x = np.einsum("sij,sj->si", lin[j], x) + tr[j]
        if t >= burn_in:
            out[:, t - burn_in] = x
    return out


def chaos_game(maps, weights=None, count: int = 10**5, seed: int = 0, burn_in: int = DEFAULT_BURN_IN,
               streams: int = DEFAULT_STREAMS, workers: int = 1, x0=None) -> PointCloud:
    """Random-orbit sample of the attractor of ``maps`` under ``weights``.

    ``streams`` independent orbits (one Philox stream each, spawned from
    ``seed``) run side by side; their post-burn-in points are concatenated
    stream by stream.  Output depends only on (maps, weights, count, seed,
    burn_in, streams, x0), never on ``workers``.
    """
    maps = list(maps)
    lin, tr = _stack(maps)
    check_contractive(maps)
    n = len(maps)
    weights = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (n,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise AttractorError("weights must be a probability vector matching the maps")
    weights = weights / weights.sum()
    if count < 1:
        raise AttractorError("count must be positive")
    streams = max(1, min(int(streams), int(count)))
    steps = -(-count // streams)
    x0 = maps[0].fixed_point() if x0 is None else np.asarray(x0, dtype=float)
    seqs = np.random.SeedSequence(int(seed)).spawn(streams)
    workers = max(1, min(int(workers), streams))
    if workers == 1:
        out = _run_streams(lin, tr, weights, seqs, steps, burn_in, x0)
    else:
        shards = np.array_split(np.arange(streams), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = pool.map(lambda sh: _run_streams(lin, tr, weights, [seqs[i] for i in sh], steps, burn_in, x0), shards)
            out = np.concatenate(list(parts), axis=0)
    pts = out.reshape(-1, lin.shape[1])[:count]
    pts.setflags(write=False)
    return PointCloud(pts, int(seed), int(burn_in), streams)


# ---------------------------------------------------------------------------
# deterministic subdivision
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubdivisionMesh:
    depth: int
    triangles: np.ndarray  # (n**depth, 3, 3)

    def __len__(self):
        return len(self.triangles)

    def vertex_table(self, decimals: int = 9):
        """Deduplicated vertices (first occurrence wins) and faces indexing them."""
        flat = self.triangles.reshape(-1, 3)
        keys = np.round(flat[:, :2] * 10**decimals).astype(np.int64)
        _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        verts = flat[first[order]]
        faces = rank[inverse.ravel()].reshape(-1, 3)
        return verts, faces

    def value_at(self, xy, tol: float = 1e-9) -> float:
        flat = self.triangles.reshape(-1, 3)
        d = np.linalg.norm(flat[:, :2] - np.asarray(xy, dtype=float), axis=1)
        j = int(np.argmin(d))
        if d[j] > tol:
            raise AttractorError(f"{xy} is not a mesh vertex")
        return float(flat[j, 2])


def subdivision_mesh(ifs: SurfaceIFS, depth: int, budget: int = MESH_BUDGET) -> SubdivisionMesh:
    """Images of the flat corner triangle under all words of length ``depth``.

    Triangle k corresponds to the word whose base-n digits (most significant
    first) list the maps from outermost to innermost.
    """
    if depth < 0:
        raise AttractorError("depth must be >= 0")
    n = len(ifs.maps)
    if n**depth > budget:
        raise AttractorError(f"{n}^{depth} triangles exceed the budget of {budget}")
    lin, tr = _stack(ifs.maps)
    tris = np.zeros((1, 3, 3))
    tris[0, :, :2] = CORNERS
    for _ in range(depth):
        tris = np.einsum("kij,tvj->ktvi", lin, tris) + tr[:, None, None, :]
        tris = tris.reshape(-1, 3, 3)
    tris.setflags(write=False)
    return SubdivisionMesh(depth, tris)


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OccupancyTable:
    scales: tuple
    counts: tuple

    def rows(self):
        return list(zip(self.scales, self.counts))


def box_count(points, scales) -> OccupancyTable:
    """Number of distinct grid cells floor(p / delta) hit at each scale."""
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise AttractorError("empty point cloud")
    scales = [float(d) for d in scales]
    if any(b >= a for a, b in zip(scales, scales[1:])) or any(d <= 0 for d in scales):
        raise AttractorError("scales must be positive and strictly decreasing")
    counts = []
    for delta in scales:
        cells = np.floor(pts / delta).astype(np.int64)
        cells -= cells.min(axis=0)
        span = cells.max(axis=0) + 1
        if np.prod(span.astype(float)) < 2**62:
            key = np.ravel_multi_index(cells.T, span)
            counts.append(int(np.unique(key).size))
        else:
            counts.append(int(np.unique(cells, axis=0).shape[0]))
    return OccupancyTable(tuple(scales), tuple(counts))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_obj(mesh: SubdivisionMesh, path) -> Path:
    verts, faces = mesh.vertex_table()
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(f"# depth {mesh.depth}, {len(faces)} faces\n")
        for v in verts:
            fh.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for f in faces + 1:
            fh.write(f"f {f[0]} {f[1]} {f[2]}\n")
    return path


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def write_table(table: OccupancyTable, path) -> Path:
    return write_csv(path, ["delta", "count"], table.rows())


def write_cloud(cloud: PointCloud, path) -> Path:
    header = ["x", "y", "z"][: cloud.dimension]
    return write_csv(path, header, (tuple(float(v) for v in p) for p in cloud.points))


def rasterize(mesh: SubdivisionMesh, size: int = 256) -> np.ndarray:
    """Height raster over [0,1]^2 (row 0 at the top); nearest triangle by centroid.

    Pixels outside the base triangle stay at the minimum height.
    """
    from scipy.spatial import cKDTree

    tri = mesh.triangles
    cent = tri[:, :, :2].mean(axis=1)
    height = tri[:, :, 2].mean(axis=1)
    centers = (np.arange(size) + 0.5) / size
    gx, gy = np.meshgrid(centers, centers[::-1])
    pix = np.column_stack([gx.ravel(), gy.ravel()])
    _, nearest = cKDTree(cent).query(pix)
    z = height[nearest]
    inside = (pix[:, 1] >= 0) & (np.sqrt(3.0) * pix[:, 0] >= pix[:, 1]) & (np.sqrt(3.0) * (1 - pix[:, 0]) >= pix[:, 1])
    z = np.where(inside, z, height.min())
    return z.reshape(size, size)


def write_pgm(mesh: SubdivisionMesh, path, size: int = 256) -> Path:
    z = rasterize(mesh, size)
    lo, hi = float(z.min()), float(z.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    grey = np.rint((z - lo) * scale).astype(int)
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(f"P2\n{size} {size}\n255\n")
        for row in grey:
            fh.write(" ".join(str(v) for v in row) + "\n")
    return path


__all__ = [
    "AttractorError",
    "OccupancyTable",
    "PointCloud",
    "SubdivisionMesh",
    "box_count",
    "chaos_game",
    "check_contractive",
    "contraction_factor",
    "rasterize",
    "subdivision_mesh",
    "write_cloud",
    "write_csv",
    "write_obj",
    "write_pgm",
    "write_table",
]
