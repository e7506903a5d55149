"""Common-fixed-point systems on the line: words, blocks, projections and a separation search.

Maps come in three classes:

    I0:  f(x) =  lam x                (all share the fixed point 0)
    I1:  f(x) =  lam x + gamma lam
    I2:  f(x) = -lam x + gamma lam
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class CFSError(ValueError):
    pass


@dataclass(frozen=True)
class CFSSystem:
    I0: tuple
    I1: tuple
    I2: tuple
    lam: dict
    gamma: dict = field(default_factory=dict)

    def __post_init__(self):
        sets = [set(self.I0), set(self.I1), set(self.I2)]
        if sum(len(x) for x in sets) != len(set().union(*sets)):
            raise CFSError("index classes must be disjoint")
        if set(self.gamma) != sets[1] | sets[2]:
            raise CFSError("gamma must be given exactly on I1 and I2")
        for i, l in self.lam.items():
            if not 0 < l < 1:
                raise CFSError(f"lambda_{i} = {l} outside (0,1)")

    @property
    def symbols(self) -> tuple:
        return tuple(sorted(self.I0 + self.I1 + self.I2))

    def kind(self, i) -> int:
        return 0 if i in self.I0 else 1 if i in self.I1 else 2

    def apply(self, i, x):
        l = self.lam[i]
        k = self.kind(i)
        if k == 0:
            return l * x
        if k == 1:
            return l * x + self.gamma[i] * l
        return -l * x + self.gamma[i] * l

    def exact(self) -> bool:
        vals = list(self.lam.values()) + list(self.gamma.values())
        return all(isinstance(v, (int, Fraction)) for v in vals)


def from_projected_x(sys) -> CFSSystem:
    """CFS view of the X-axis projection of a wedding-cake Furstenberg IFS."""
    I0, I1, I2, lam, gamma = [], [], [], {}, {}
    for i, label in enumerate(sys.labels):
        lam[label] = float(sys.ratios[i])
        if sys.offsets[i] == 0:
            I0.append(label)
            continue
        (I1 if sys.signs[i] > 0 else I2).append(label)
        gamma[label] = float(sys.offsets[i] / sys.ratios[i])
    return CFSSystem(tuple(I0), tuple(I1), tuple(I2), lam, gamma)


def cfs_constants(sys: CFSSystem) -> tuple:
    """(B, D) from gamma ratios; None where a class is empty."""
    D = B = None
    if sys.I2:
        D = min(sys.gamma[k] / sys.gamma[i] for k in sys.I2 for i in sys.I2)
        if sys.I1:
            B = 1 / (1 + max(sys.gamma[i] / sys.gamma[k] for i in sys.I1 for k in sys.I2))
    return B, D


@dataclass(frozen=True)
class LemmaA:
    A: float
    ok: bool
    failures: tuple


def lemma_A_constant(sys: CFSSystem, tol: float = 1e-12) -> LemmaA:
    """Right end A of an interval [0, A] sent into (0, A] by every I1 and I2 map."""
    cands = [sys.gamma[i] * sys.lam[i] for i in sys.I2]
    cands += [sys.gamma[i] * sys.lam[i] / (1 - sys.lam[i]) for i in sys.I1]
    if not cands:
        return LemmaA(0.0, True, ())
    A = max(cands)
    bad = []
    for i in sys.I1 + sys.I2:
        a, b = sorted((sys.apply(i, 0), sys.apply(i, A)))
        if not (a > 0 and b <= A + tol * max(1.0, abs(A))):
            bad.append((i, float(a), float(b)))
    return LemmaA(A, not bad, tuple(bad))


def natural_projection(sys: CFSSystem, word) -> float:
    """f_{w1} o ... o f_{wn}(0)."""
    if len(word) == 0:
        raise CFSError("empty word")
    x = Fraction(0) if sys.exact() else 0.0
    for i in reversed(word):
        x = sys.apply(i, x)
    return x


def block_decompose(word, sys: CFSSystem) -> tuple:
    """Maximal runs of I0 symbols, and maximal constant runs of any other symbol."""
    blocks = []
    for sym in word:
        if blocks:
            last = blocks[-1]
            if (sym in sys.I0 and last[0] in sys.I0) or (sym not in sys.I0 and last[0] == sym):
                last.append(sym)
                continue
        blocks.append([sym])
    return tuple(tuple(b) for b in blocks)


def canonical_blocks(word, sys: CFSSystem) -> tuple:
    return tuple(tuple(sorted(b)) if b[0] in sys.I0 else b for b in block_decompose(word, sys))


def same_block_structure(u, v, sys: CFSSystem) -> bool:
    return canonical_blocks(u, sys) == canonical_blocks(v, sys)


@dataclass(frozen=True)
class ESCResult:
    violations: tuple  # (word_i, word_j, |Pi(i) - Pi(j)|)
    eligible_pairs: int
    checked_pairs: int
    exhaustive: bool
    coverage: float
    threshold: float


def _lam_product(sys, w):
    return math.prod((sys.lam[i] for i in w), start=Fraction(1) if sys.exact() else 1.0)


def _groups_by_lambda(sys, words):
    """Lists of word indices with equal lambda products."""
    prods = [_lam_product(sys, w) for w in words]
    if sys.exact():
        groups = {}
        for k, p in enumerate(prods):
            groups.setdefault(p, []).append(k)
        return [g for g in groups.values() if len(g) > 1]
    logs = np.log(np.asarray(prods, dtype=float))
    order = np.argsort(logs, kind="stable")
    out, cur = [], [int(order[0])]
    for a, b in zip(order, order[1:]):
        # relative 1e-12 on the products is 1e-12 absolute on their logs
        if logs[b] - logs[a] <= 1e-12:
            cur.append(int(b))
        else:
            if len(cur) > 1:
                out.append(sorted(cur))
            cur = [int(b)]
    if len(cur) > 1:
        out.append(sorted(cur))
    return out


def esc_violation_search(sys: CFSSystem, n: int, b: float, budget: int = 9**6, seed: int = 0,
                         samples: int = 10**5) -> ESCResult:
    """Pairs of length-n words with equal contraction, different blocks and close projections.

    Exhaustive while (#symbols)^(2n) fits in ``budget``; otherwise pairs
    are drawn at random by permuting a random word.  An empty result is
    evidence of separation at this depth, never a proof.
    """
    if n < 1:
        raise CFSError("n must be >= 1")
    syms = sys.symbols
    thr = 2.0 ** (-b * n)
    violations = []
    if len(syms) ** (2 * n) <= budget:
        words = list(itertools.product(syms, repeat=n))
        proj = [natural_projection(sys, w) for w in words]
        canon = [canonical_blocks(w, sys) for w in words]
        eligible = checked = 0
        for group in _groups_by_lambda(sys, words):
            for x, y in itertools.combinations(group, 2):
                if canon[x] == canon[y]:
                    continue
                eligible += 1
                checked += 1
                d = abs(proj[x] - proj[y])
                if d <= thr:
                    violations.append((words[x], words[y], float(d)))
        violations.sort()
        return ESCResult(tuple(violations), eligible, checked, True, 1.0, thr)
    rng = np.random.Generator(np.random.Philox(seed))
    seen = set()
    checked = 0
    for _ in range(samples):
        w = tuple(syms[k] for k in rng.integers(len(syms), size=n))
        v = tuple(w[k] for k in rng.permutation(n))
        if canonical_blocks(w, sys) == canonical_blocks(v, sys):
            continue
        key = min((w, v), (v, w))
        if key in seen:
            continue
        seen.add(key)
        checked += 1
        d = abs(natural_projection(sys, w) - natural_projection(sys, v))
        if d <= thr:
            violations.append((key[0], key[1], float(d)))
    violations.sort()
    n_words = len(syms) ** n
    coverage = checked / (n_words * (n_words - 1) / 2)
    return ESCResult(tuple(violations), -1, checked, False, coverage, thr)


def planted_resonance(lam1: Fraction = Fraction(1, 3), lam2: Fraction = Fraction(1, 4),
                      gamma1: Fraction = Fraction(3)) -> CFSSystem:
    """Two I1 maps sharing a fixed point, plus one I0 map.

    gamma2 is chosen so that gamma1 lam1/(1-lam1) = gamma2 lam2/(1-lam2);
    then the two affine maps commute and the words (1,2), (2,1) project to
    the same point while having different block structure.
    """
    gamma2 = gamma1 * lam1 * (1 - lam2) / (lam2 * (1 - lam1))
    return CFSSystem((0,), (1, 2), (), {0: Fraction(1, 2), 1: lam1, 2: lam2}, {1: gamma1, 2: gamma2})


__all__ = [
    "CFSError",
    "CFSSystem",
    "ESCResult",
    "LemmaA",
    "block_decompose",
    "canonical_blocks",
    "cfs_constants",
    "esc_violation_search",
    "from_projected_x",
    "lemma_A_constant",
    "natural_projection",
    "planted_resonance",
    "same_block_structure",
]
