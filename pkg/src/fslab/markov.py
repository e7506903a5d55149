"""The order-12 orthogonal group of the Geronimo-Hardin maps, its random walk and graph-directed IFS.

All group and chain arithmetic is exact: matrix entries are DihedralScalar
values and probabilities are Fractions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import DihedralScalar, exact_dot, exact_matmul, exact_matrix, exact_matvec, exact_transpose

GROUP_CAP = 1024

# entries written as (p, r) pairs meaning (p + r sqrt3)/2
_H, _R, _O, _I = (1, 0), (0, 1), (0, 0), (2, 0)


def _neg(e):
    return (-e[0], -e[1])


def _m(a, b, c, d):
    return exact_matrix([[DihedralScalar(*a), DihedralScalar(*b)], [DihedralScalar(*c), DihedralScalar(*d)]])


# The twelve matrices in their customary numbering Q1..Q12.
GH_GROUP_ELEMENTS = (
    _m(_H, _R, _R, _neg(_H)),
    _m(_H, _neg(_R), _neg(_R), _neg(_H)),
    _m(_neg(_I), _O, _O, _I),
    _m(_neg(_I), _O, _O, _neg(_I)),
    _m(_I, _O, _O, _I),
    _m(_neg(_H), _neg(_R), _neg(_R), _H),
    _m(_neg(_H), _R, _R, _H),
    _m(_neg(_H), _R, _neg(_R), _neg(_H)),
    _m(_neg(_H), _neg(_R), _R, _neg(_H)),
    _m(_I, _O, _O, _neg(_I)),
    _m(_H, _neg(_R), _R, _H),
    _m(_H, _R, _neg(_R), _H),
)
GH_GENERATORS = GH_GROUP_ELEMENTS[:4]
IDENTITY = GH_GROUP_ELEMENTS[4]
# ordering that makes the two-step chain block diagonal (0-based indices into GH_GROUP_ELEMENTS)
BLOCK_ORDER = (4, 5, 6, 7, 8, 9, 0, 1, 2, 3, 10, 11)

# canonical translations of the four Furstenberg maps: (1, 1/sqrt3), (-1, 1/sqrt3), (0, -2/sqrt3), 0
GH_TRANSLATIONS_EXACT = (
    (DihedralScalar(2, 0), DihedralScalar(0, Fraction(2, 3))),
    (DihedralScalar(-2, 0), DihedralScalar(0, Fraction(2, 3))),
    (DihedralScalar(0, 0), DihedralScalar(0, Fraction(-4, 3))),
    (DihedralScalar(0, 0), DihedralScalar(0, 0)),
)


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class MatrixGroup:
    elements: tuple
    generators: tuple  # indices into elements
    table: tuple  # table[i][j] = index of elements[i] @ elements[j]

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, m) -> int:
        return self.elements.index(m)

    def identity_index(self) -> int:
        n = len(self.elements[0])
        eye = exact_matrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])
        return self.index(eye)


def group_closure(generators, cap: int = GROUP_CAP, identity_first: bool = False) -> MatrixGroup:
    """Breadth-first closure of the generators under right multiplication."""
    gens = [exact_matrix(g) if not isinstance(g[0][0], DihedralScalar) else g for g in generators]
    n = len(gens[0])
    eye = exact_matrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])
    elements = [eye] if identity_first else []
    seen = set(elements)
    queue = deque()
    for g in gens:
        if g not in seen:
            seen.add(g)
            elements.append(g)
            queue.append(g)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = exact_matmul(x, g)
            if y not in seen:
                if len(elements) >= cap:
                    raise GroupError(f"closure exceeds {cap} elements; the generators do not span a finite group")
                seen.add(y)
                elements.append(y)
                queue.append(y)
    if eye not in seen:
        raise GroupError("closure does not contain the identity")
    return _finish(tuple(elements), [elements.index(g) for g in gens])


def _finish(elements, gen_idx) -> MatrixGroup:
    pos = {e: k for k, e in enumerate(elements)}
    table = tuple(tuple(pos[exact_matmul(a, b)] for b in elements) for a in elements)
    return MatrixGroup(tuple(elements), tuple(gen_idx), table)


def gh_group() -> MatrixGroup:
    """GH group closed from its generators, relabeled so element k is Q_{k+1}."""
    closed = group_closure(GH_GENERATORS)
    if set(closed.elements) != set(GH_GROUP_ELEMENTS) or closed.order != 12:
        raise GroupError("closure of the Geronimo-Hardin generators is not the expected order-12 group")
    return _finish(GH_GROUP_ELEMENTS, [0, 1, 2, 3])


def transition_matrix(group: MatrixGroup, order=None) -> list:
    """P[l][m] = (# generators k with Q_l Q_k = Q_m) / (# generators), rows/columns in ``order``."""
    order = list(range(group.order)) if order is None else list(order)
    pos = {g: k for k, g in enumerate(order)}
    w = Fraction(1, len(group.generators))
    P = [[Fraction(0)] * len(order) for _ in order]
    for l in order:
        for k in group.generators:
            P[pos[l]][pos[group.table[l][k]]] += w
    return P


def matmul_q(A, B) -> list:
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))] for i in range(len(A))]


def matpow_q(A, n: int) -> list:
    size = len(A)
    out = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    base = A
    while n:
        if n & 1:
            out = matmul_q(out, base)
        base = matmul_q(base, base)
        n >>= 1
    return out


@dataclass(frozen=True)
class ChainAnalysis:
    period: int
    R: list
    S: list
    block_diagonal: bool
    bipartite: bool
    converged_at: int
    max_deviation: float


def _period(P, state: int, horizon: int) -> int:
    reach = np.array([[x > 0 for x in row] for row in P], dtype=bool)
    cur = reach.copy()
    g = 0
    for n in range(1, horizon + 1):
        if cur[state, state]:
            g = math.gcd(g, n)
        cur = (cur.astype(int) @ reach.astype(int)) > 0
    return g


def chain_analysis(P, tol: float = 1e-12, max_power: int = 200) -> ChainAnalysis:
    """Period, the two diagonal blocks of P^2, and convergence of R^n to the uniform matrix.

    P must be given in block order (even-step class of the first state first).
    """
    size = len(P)
    period = _period(P, 0, 4 * size)
    P2 = matmul_q(P, P)
    h = size // 2
    R = [row[:h] for row in P2[:h]]
    S = [row[h:] for row in P2[h:]]
    block_diag = all(P2[i][j] == 0 for i in range(h) for j in range(h, size)) and all(
        P2[i][j] == 0 for i in range(h, size) for j in range(h)
    )
    bipartite = all(P[i][j] == 0 for i in range(h) for j in range(h)) and all(
        P[i][j] == 0 for i in range(h, size) for j in range(h, size)
    )
    target = Fraction(1, h)
    Rn = R
    dev = float("inf")
    n = 1
    while n <= max_power:
        dev = max(abs(float(x - target)) for row in Rn for x in row)
        if dev < tol:
            break
        Rn = matmul_q(Rn, R)
        n += 1
    return ChainAnalysis(period, R, S, block_diag, bipartite, n, dev)


@dataclass(frozen=True)
class ReturnCounts:
    counts: tuple  # N_1..N_nmax
    brute_force: tuple  # N_1..N_min(nmax,5) by enumeration
    agree: bool
    N0: int | None
    bound_holds: tuple


def brute_force_returns(group: MatrixGroup, length: int) -> int:
    """Words over the generators of the given length whose product is the identity."""
    table = np.asarray(group.table, dtype=np.int64)
    gens = np.asarray(group.generators, dtype=np.int64)
    ident = group.identity_index()
    states = np.array([ident], dtype=np.int64)
    for _ in range(length):
        states = table[states[:, None], gens[None, :]].ravel()
    return int(np.count_nonzero(states == ident))


def return_counts(group: MatrixGroup, n_max: int = 12, brute_max: int = 5) -> ReturnCounts:
    if n_max > 12:
        raise GroupError("exact powers are limited to n_max <= 12")
    P = transition_matrix(group)
    ident = group.identity_index()
    k = len(group.generators)
    P2 = matmul_q(P, P)
    cur = P2
    counts = []
    for n in range(1, n_max + 1):
        val = cur[ident][ident] * k ** (2 * n)
        if val.denominator != 1:
            raise GroupError("non-integral return count")
        counts.append(int(val))
        cur = matmul_q(cur, P2)
    brute = tuple(brute_force_returns(group, 2 * n) for n in range(1, min(n_max, brute_max) + 1))
    holds = tuple(12 * c >= k ** (2 * n) for n, c in enumerate(counts, start=1))
    N0 = None
    for start in range(1, n_max + 1):
        if all(holds[start - 1:]):
            N0 = start
            break
    return ReturnCounts(tuple(counts), brute, brute == tuple(counts[: len(brute)]), N0, holds)


def t_hat(n: int, s: float) -> float:
    return 3 + math.log(s) / math.log(2) - math.log(12) / (2 * n * math.log(2))


# ---------------------------------------------------------------------------
# graph-directed IFS along the orbit of a direction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphEdge:
    source: int  # vertex l (0-based group index)
    target: int  # vertex m
    generator: int  # k (0-based position in the generator list)
    offset: DihedralScalar  # v_l . t_k


@dataclass(frozen=True)
class GraphDirectedIFS:
    vertices: tuple  # exact direction vectors v_l
    edges: tuple
    out_degree: tuple
    in_degree: tuple
    distinct_offsets: bool
    witnesses: tuple  # problems found, empty when all checks pass

    def maps(self, s: float) -> list:
        """(source, target, ratio, offset) for f_e(x) = x/(2s) + offset."""
        return [(e.source, e.target, 1 / (2 * s), float(e.offset)) for e in self.edges]


def build_gd_ifs(group: MatrixGroup, translations=GH_TRANSLATIONS_EXACT, direction=(1, 1)) -> GraphDirectedIFS:
    v = tuple(DihedralScalar.coerce(x) for x in direction)
    verts = tuple(exact_matvec(exact_transpose(Q), v) for Q in group.elements)
    gens = [group.elements[k] for k in group.generators]
    edges = []
    for l, vl in enumerate(verts):
        for k, Qk in enumerate(gens):
            for m, vm in enumerate(verts):
                if exact_matvec(Qk, vm) == vl:
                    edges.append(GraphEdge(l, m, k, exact_dot(vl, translations[k])))
    n = len(verts)
    out_deg = tuple(sum(e.source == l for e in edges) for l in range(n))
    in_deg = tuple(sum(e.target == l for e in edges) for l in range(n))
    witnesses = []
    distinct = True
    for l in range(n):
        offs = [e.offset for e in edges if e.source == l]
        if len(set(offs)) != len(offs):
            distinct = False
            witnesses.append(("repeated offset", l, [str(o) for o in offs]))
        if out_deg[l] != len(gens) or in_deg[l] != len(gens):
            witnesses.append(("degree", l, out_deg[l], in_deg[l]))
    return GraphDirectedIFS(verts, tuple(edges), out_deg, in_deg, distinct, tuple(witnesses))


def gd_projection_check(gd: GraphDirectedIFS, cloud: np.ndarray, s: float) -> dict:
    """Compare each edge map on projected samples with the projection of the mapped samples.

    For a sample x and edge e = (l -> m via generator k),
    f_e(v_m . x) must equal v_l . h_k(x).  Also reports the one-sided
    sample distance from the union of edge images into Proj_{v_l}(cloud).
    """
    from .furstenberg import gh_canonical

    fam = gh_canonical(s)
    V = np.array([[float(c) for c in v] for v in gd.vertices])
    proj = cloud @ V.T
    identity_err = 0.0
    spread = 0.0
    for e in gd.edges:
        lhs = proj[:, e.target] / (2 * s) + float(e.offset)
        rhs = fam.maps[e.generator](cloud) @ V[e.source]
        identity_err = max(identity_err, float(np.max(np.abs(lhs - rhs))))
    for l in range(len(gd.vertices)):
        target = np.sort(proj[:, l])
        imgs = np.concatenate([proj[:, e.target] / (2 * s) + float(e.offset) for e in gd.edges if e.source == l])
        j = np.clip(np.searchsorted(target, imgs), 1, len(target) - 1)
        d = np.minimum(np.abs(imgs - target[j - 1]), np.abs(imgs - target[j]))
        spread = max(spread, float(d.max()))
    return {"identity_error": identity_err, "image_to_sample_distance": spread}


__all__ = [
    "BLOCK_ORDER",
    "ChainAnalysis",
    "GH_GENERATORS",
    "GraphDirectedIFS",
    "GroupError",
    "MatrixGroup",
    "GH_GROUP_ELEMENTS",
    "ReturnCounts",
    "brute_force_returns",
    "build_gd_ifs",
    "chain_analysis",
    "gd_projection_check",
    "group_closure",
    "matpow_q",
    "gh_group",
    "return_counts",
    "t_hat",
    "transition_matrix",
]
