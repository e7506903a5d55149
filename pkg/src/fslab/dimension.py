"""Dimension formulas: singular values, pressure equations, box-count fits, entropy bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .attractor import OccupancyTable
from .surface import SurfaceIFS


class DimensionError(ValueError):
    pass


def singular_value_function(A, t: float) -> float:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise DimensionError("non-finite matrix entries")
    if t < 0:
        raise DimensionError("t must be >= 0")
    d = A.shape[0]
    if t > d:
        return abs(float(np.linalg.det(A))) ** (t / d)
    alpha = np.linalg.svd(A, compute_uv=False)
    k = int(math.floor(t))
    val = float(np.prod(alpha[:k]))
    if t > k:
        val *= float(alpha[k]) ** (t - k)
    return val


def bisect_decreasing(fn, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of a strictly decreasing function; the bracket grows until the sign changes."""
    flo, fhi = fn(lo), fn(hi)
    for _ in range(200):
        if flo >= 0:
            break
        hi, fhi = lo, flo
        lo = lo - max(1.0, abs(lo))
        flo = fn(lo)
    for _ in range(200):
        if fhi <= 0:
            break
        lo, flo = hi, fhi
        hi = hi + max(1.0, abs(hi))
        fhi = fn(hi)
    if not (flo >= 0 >= fhi):
        raise DimensionError(f"no sign change found: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AffinitySolution:
    t0: float
    r1: float
    r2: float
    branch: str
    residual1: float
    residual2: float


def pressure_sums(s, lam):
    s = np.abs(np.asarray(s, dtype=float))
    lam = np.asarray(lam, dtype=float)

    def p1(r):
        return float(np.sum(s**r)) - 1.0

    def p2(r):
        return float(np.sum(s * lam ** (r - 1))) - 1.0

    return p1, p2


def affinity_dimension(ifs: SurfaceIFS) -> AffinitySolution:
    """Solve both pressure equations and take the smaller root."""
    lam = np.asarray(ifs.lam, dtype=float)
    if abs(float(np.sum(lam**2)) - 1.0) > 1e-12:
        raise DimensionError(f"sum of squared planar ratios is {np.sum(lam ** 2)}, expected 1")
    p1, p2 = pressure_sums(ifs.s, lam)
    r1 = bisect_decreasing(p1, 0.0, 3.0)
    r2 = bisect_decreasing(p2, 0.0, 3.0)
    t0 = min(r1, r2)
    if np.all(lam < ifs.s) and not (2.0 - 1e-12 <= t0 <= 3.0 + 1e-12 and t0 == r2):
        raise DimensionError(f"expected t0 = r2 in [2,3], got r1={r1}, r2={r2}")
    return AffinitySolution(t0, r1, r2, "r1" if r1 < r2 else "r2", p1(r1), p2(r2))


def closed_form_dimension(kind: str, s, N: int | None = None) -> float:
    """Box/Hausdorff dimension formulas of the two constructions.

    kind: "massopust" (needs N and all N^2 factors), "massopust-uniform"
    (N and one factor) or "geronimo-hardin" (one factor).
    """
    if kind == "massopust":
        s = np.asarray(s, dtype=float)
        total = float(np.sum(s))
        if not (N < total):
            warnings.warn("sum of scaling factors <= N: formula outside its stated range", stacklevel=2)
        return 1.0 + math.log(total) / math.log(N)
    if kind == "massopust-uniform":
        s = float(s)
        if not (1.0 / N < s < 1.0):
            warnings.warn("s outside (1/N, 1)", stacklevel=2)
        return 3.0 + math.log(s) / math.log(N)
    if kind == "geronimo-hardin":
        s = float(s)
        if not (0.5 < s < 1.0):
            warnings.warn("s outside (1/2, 1)", stacklevel=2)
        return 3.0 + math.log(s) / math.log(2.0)
    raise DimensionError(f"unknown construction {kind!r}")


def box_dimension_fit(table: OccupancyTable, scale_range=None) -> tuple:
    """OLS slope of log N_delta against log(1/delta) and its standard error."""
    sc = np.asarray(table.scales, dtype=float)
    ct = np.asarray(table.counts, dtype=float)
    keep = ct > 0
    if scale_range is not None:
        hi, lo = max(scale_range), min(scale_range)
        keep &= (sc <= hi * (1 + 1e-12)) & (sc >= lo * (1 - 1e-12))
    if keep.sum() < 3:
        raise DimensionError("need at least 3 usable scales")
    fit = stats.linregress(-np.log(sc[keep]), np.log(ct[keep]))
    return float(fit.slope), float(fit.stderr)


@dataclass(frozen=True)
class EntropyBound:
    entropy: float
    lyapunov: float
    ratio: float
    plain: float
    phi: float
    corrected: float


def entropy_lyapunov_bound(p, ratios, fixed_point_class=None) -> EntropyBound:
    """Entropy over Lyapunov exponent, with and without the common-fixed-point term.

    ``fixed_point_class`` marks the maps sharing the fixed point 0; the
    correction is sum over marked i of p_i log(p_i + mass of unmarked maps).
    """
    p = np.asarray(p, dtype=float)
    ratios = np.broadcast_to(np.asarray(ratios, dtype=float), p.shape)
    if abs(p.sum() - 1.0) > 1e-9:
        raise DimensionError("probabilities must sum to 1")
    if np.any((ratios <= 0) | (ratios >= 1)):
        raise DimensionError("contraction ratios must lie in (0,1)")
    mask = p > 0
    if not mask.all():
        warnings.warn("dropping zero-probability maps", stacklevel=2)
    cls = None if fixed_point_class is None else np.asarray(fixed_point_class, dtype=bool)[mask]
    p, ratios = p[mask], ratios[mask]
    H = float(-np.sum(p * np.log(p)))
    chi = float(-np.sum(p * np.log(ratios)))
    phi = 0.0
    if cls is not None and cls.any():
        rest = float(p[~cls].sum())
        phi = float(np.sum(p[cls] * np.log(p[cls] + rest)))
    ratio = H / chi
    return EntropyBound(H, chi, ratio, min(1.0, ratio), phi, min(1.0, max(0.0, (H + phi) / chi)))


# ---------------------------------------------------------------------------
# constant-data profile for large N
# ---------------------------------------------------------------------------

# Distinct Furstenberg maps for data equal to a on every interior lattice
# point: multiplicity as a function of N and whether the map fixes 0.
PROFILE_CLASSES = (
    (lambda N: (N - 3) * (N - 2) // 2 + 3, True),
    (lambda N: (N - 4) * (N - 3) // 2, True),
    (lambda N: N - 2, True),
    (lambda N: N - 2, False),
    (lambda N: N - 2, False),
    (lambda N: N - 2, False),
    (lambda N: N - 3, True),
    (lambda N: N - 2, False),
    (lambda N: 1, True),
)


@dataclass(frozen=True)
class MultiplicityProfile:
    N: int
    m: tuple
    fixes_zero: tuple

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.m, dtype=float) / self.N**2


def multiplicity_profile(N: int) -> MultiplicityProfile:
    m = tuple(max(0, f(N)) for f, _ in PROFILE_CLASSES)
    return MultiplicityProfile(N, m, tuple(c for _, c in PROFILE_CLASSES))


def _profile_entropy(prof: MultiplicityProfile, variant: str) -> float:
    p = prof.p
    keep = p > 0
    H = float(-np.sum(p[keep] * np.log(p[keep])))
    if variant == "plain":
        return H
    if variant == "phi":
        fz = np.asarray(prof.fixes_zero)
        rest = float(p[~fz].sum())
        sel = fz & keep
        return H + float(np.sum(p[sel] * np.log(p[sel] + rest)))
    raise DimensionError(f"unknown variant {variant!r}")


def remark_gap(N: int, s: float, variant: str = "plain") -> float:
    """Entropy bound minus the target 3 - t0 = -log s / log N, for uniform s."""
    H = _profile_entropy(multiplicity_profile(N), variant)
    return H / math.log(N * s) + math.log(s) / math.log(N)


def remark_failure_interval(N: int, variant: str = "plain") -> tuple:
    """Open interval of uniform s where the entropy bound drops below 3 - t0."""
    if N < 5:
        raise DimensionError("the profile needs N >= 5")
    from scipy.optimize import minimize_scalar

    lo_end = 1.0 / N
    res = minimize_scalar(
        lambda s: remark_gap(N, s, variant),
        bounds=(lo_end * (1 + 1e-9), 1 - 1e-12),
        method="bounded",
        options={"xatol": 1e-12},
    )
    s_min = float(res.x)
    if remark_gap(N, s_min, variant) >= 0:
        raise DimensionError(f"entropy bound never falls below 3 - t0 for N={N}")
    # gap -> +inf as s -> 1/N from above, and is positive at s = 1
    left = bisect_decreasing(lambda s: remark_gap(N, s, variant), lo_end * (1 + 1e-12), s_min)
    right = bisect_decreasing(lambda s: -remark_gap(N, s, variant), s_min, 1.0)
    return left, right


__all__ = [
    "AffinitySolution",
    "DimensionError",
    "EntropyBound",
    "MultiplicityProfile",
    "affinity_dimension",
    "bisect_decreasing",
    "box_dimension_fit",
    "closed_form_dimension",
    "entropy_lyapunov_bound",
    "multiplicity_profile",
    "remark_failure_interval",
    "remark_gap",
    "singular_value_function",
]
