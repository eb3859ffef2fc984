"""Graded Cech cohomology of the punctured affine space Spec R - V(x_1, ..., x_n).

R = Z[x_1, ..., x_n] with positive integer degrees.  The Cech complex of the
cover by the D(x_i) splits over Z^n-multidegrees; in each multidegree every
localization R[x_I^{-1}] is Z or 0, so each block is a small explicit complex
of free groups.  A graded piece of a single localization is infinite, so the
blocks are enumerated over a box of multidegrees that provably contains every
block with nonzero cohomology (all exponents >= 0, or all exponents < 0);
the blocks in the box outside these two families are still computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .errors import WindowUnbounded
from .exactalg import FgAbGroup, IntMatrix, cohomology_at


@dataclass
class GradedCechProblem:
    weights: tuple
    window: tuple = (-6, 2)
    shifts: tuple = (0,)          # the module is the sum of R(s) over s in shifts

    @property
    def n(self):
        return len(self.weights)


@dataclass
class CechDegree:
    degree: int
    groups: list                  # H^0 .. H^{n-1}
    basis: dict = field(default_factory=dict)   # k -> monomial exponent vectors (with shift)


def _localized(e, subset):
    """Is x^e in R[x_I^{-1}]?"""
    return all(x >= 0 for i, x in enumerate(e) if i not in subset)


def _block_complex(e, n):
    """Cech differentials C^0 -> ... -> C^{n-1} in multidegree e."""
    cochains = []
    for k in range(n):
        cochains.append([I for I in combinations(range(n), k + 1) if _localized(e, I)])
    maps = []
    for k in range(n - 1):
        src, tgt = cochains[k], cochains[k + 1]
        pos = {I: a for a, I in enumerate(src)}
        rows = []
        for J in tgt:
            row = [0] * len(src)
            for m in range(len(J)):
                I = J[:m] + J[m + 1:]
                if I in pos:
                    row[pos[I]] += (-1) ** m
            rows.append(row)
        maps.append(IntMatrix(rows, len(tgt), len(src)))
    return cochains, maps


def block_cohomology(e, n):
    cochains, maps = _block_complex(e, n)
    out = []
    for k in range(n):
        f = maps[k - 1] if k else IntMatrix.zeros(len(cochains[0]), 0)
        g = maps[k] if k < n - 1 else IntMatrix.zeros(0, len(cochains[k]))
        out.append(cohomology_at(f, g))
    return out


def _box(weights, degree):
    """Exponent bound covering all-nonnegative and all-negative solutions."""
    return abs(degree) // min(weights) + 2


def multidegrees(weights, degree, bound):
    n = len(weights)
    for head in product(range(-bound, bound + 1), repeat=n - 1):
        rest = degree - sum(w * x for w, x in zip(weights, head))
        if rest % weights[-1] == 0:
            last = rest // weights[-1]
            if -bound <= last <= bound:
                yield head + (last,)


def cech_graded(p):
    """``{degree: CechDegree}`` over the window; H^k for k = 0..n-1."""
    if p.n < 2:
        raise ValueError("need at least two variables")
    if any(w <= 0 for w in p.weights):
        raise WindowUnbounded("variable degrees must be positive for finite graded pieces")
    lo, hi = p.window
    out = {}
    for t in range(lo, hi + 1):
        orders = [[] for _ in range(p.n)]
        basis = {k: [] for k in range(p.n)}
        for s in p.shifts:
            for e in multidegrees(p.weights, t + s, _box(p.weights, t + s)):
                for k, h in enumerate(block_cohomology(e, p.n)):
                    if not h.is_trivial():
                        orders[k].extend(h.invariant_factors)
                        basis[k].append((s, e))
        out[t] = CechDegree(t, [FgAbGroup.from_orders(o) for o in orders], basis)
    return out


def middle_vanishing(result, n):
    """True when H^k = 0 for 0 < k < n-1 in every degree."""
    return all(r.groups[k].is_trivial() for r in result.values() for k in range(1, n - 1))


def expected_ranks(weights, degree, shifts=(0,)):
    """Ranks predicted by the concentration statement: monomials of R and of the dual.

    H^0 in degree t is R_t; H^{n-1} in degree t counts x^e with every e_i < 0.
    """
    h0 = hn = 0
    for s in shifts:
        b = _box(weights, degree + s)
        for e in multidegrees(weights, degree + s, b):
            if all(x >= 0 for x in e):
                h0 += 1
            if all(x < 0 for x in e):
                hn += 1
    return h0, hn


def degree_cokernel_oracle(degree, bound=None):
    """For n = 2 with unit weights: cokernel of Z[x^{+-1},y] + Z[x,y^{+-1}] -> Z[x^{+-1},y^{+-1}].

    The whole degree piece is truncated to exponents in [-bound, bound]; the
    map is a direct sum over monomials, so the truncation is exact as long as
    it contains every monomial with both exponents negative.
    """
    if bound is None:
        bound = abs(degree) + 2
    target = [(a, degree - a) for a in range(-bound, bound + 1) if -bound <= degree - a <= bound]
    src1 = [e for e in target if e[1] >= 0]
    src2 = [e for e in target if e[0] >= 0]
    rows = []
    for e in target:
        rows.append([int(e == f) for f in src1] + [-int(e == f) for f in src2])
    m = IntMatrix(rows, len(target), len(src1) + len(src2))
    from .exactalg import elementary_divisors
    rank, divs = elementary_divisors(m)
    return FgAbGroup.from_orders(divs + [0] * (len(target) - rank))
