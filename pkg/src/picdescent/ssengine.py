"""Bigraded multiplicative spectral sequences in Adams-style bookkeeping.

Bidegrees are ``(s, t)``; a differential d_r moves ``(s, t) -> (s + r, t + r - 1)``,
so in the drawn coordinates ``(t - s, s)`` it goes one left and r up.

The E_2 term is a graded-commutative monomial algebra: generators with a
bidegree and an additive order (0 for Z), invertible generators allowed to
carry negative exponents, coefficient generators in bidegree (0, 0) with an
exponent cap (truncated Z/2[j], Z[[q]] and so on), and monomial rewriting
relations.  A monomial is zero when the gcd of the orders of its torsion
generators is 1; otherwise its order is that gcd.  Explicit classes with no
multiplicative structure can be added at any bidegree.

Pages are kept in E_2 coordinates: at each bidegree we store generators of
the cycles Z_r and of the boundaries B_r, so that E_r = (Z_r + R) / (B_r + R)
with R the order relations.  Every comparison and every homology computation
is exact integer linear algebra.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from math import gcd

import numpy as np

from .errors import (InconsistentRules, NonConfluentRelations, NotCharTwo, RuleNotClosed,
                     UnresolvableProduct, WindowEmpty)
from .exactalg import FgAbGroup, IntMatrix, snf

PROVENANCES = ("supplied-dataset", "imported-comparison", "unstable-formula", "leibniz-derived")


# ---------------------------------------------------------------------------
# algebra


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    s: int
    t: int
    order: int = 0
    invertible: bool = False
    cap: int | None = None          # largest exponent kept (truncated coefficients)
    floor: int | None = None        # smallest exponent kept (Laurent coefficients)
    family: str | None = None       # glyph family tag, e.g. "Z/2[j]"
    enum: tuple | None = None       # exponent range used when listing E_2

    @property
    def stem(self):
        return self.t - self.s


class MonomialAlgebra:
    """Graded-commutative monomial algebra with rewriting relations.

    ``relations`` is a list of ``(lhs, rhs)`` with lhs an exponent tuple and
    rhs a dict exponent tuple -> integer coefficient.
    """

    def __init__(self, generators, relations=()):
        self.gens = list(generators)
        self.names = [g.name for g in self.gens]
        self.pos = {g.name: i for i, g in enumerate(self.gens)}
        self.relations = [(tuple(l), {tuple(k): v for k, v in r.items()}) for l, r in relations]
        self.n = len(self.gens)
        self._odd = [i for i, g in enumerate(self.gens) if g.stem % 2]
        self._supports = [tuple((i, l) for i, l in enumerate(lhs) if l) for lhs, _ in self.relations]
        self._memo = {"bideg": {}, "order": {}, "red": {}}
        for lhs, rhs in self.relations:
            b = self.bidegree(lhs)
            for m in rhs:
                if self.bidegree(m) != b:
                    raise ValueError(f"relation {self.format(lhs)} is not homogeneous")

    # monomials -----------------------------------------------------------

    def unit(self):
        return (0,) * self.n

    def gen(self, name, e=1):
        m = [0] * self.n
        m[self.pos[name]] = e
        return tuple(m)

    def bidegree(self, m):
        memo = self._memo["bideg"]
        if m not in memo:
            memo[m] = (sum(e * g.s for e, g in zip(m, self.gens)),
                       sum(e * g.t for e, g in zip(m, self.gens)))
        return memo[m]

    def stem(self, m):
        s, t = self.bidegree(m)
        return t - s

    def order(self, m):
        """Additive order of the monomial: 0 for Z, 1 means the monomial vanishes."""
        memo = self._memo["order"]
        if m not in memo:
            o = 0
            for e, g in zip(m, self.gens):
                if e and g.order:
                    o = gcd(o, g.order)
            memo[m] = o
        return memo[m]

    def in_range(self, m):
        for e, g in zip(m, self.gens):
            if e < 0 and not g.invertible and g.floor is None:
                return False
            if g.cap is not None and e > g.cap:
                return False
            if g.floor is not None and e < g.floor:
                return False
        return True

    def reducible(self, m):
        memo = self._memo["red"]
        if m not in memo:
            memo[m] = [k for k, sup in enumerate(self._supports)
                       if all(0 < l <= m[i] for i, l in sup)]
        return memo[m]

    def is_basis(self, m):
        return self.in_range(m) and self.order(m) != 1 and not self.reducible(m)

    def mul_sign(self, m1, m2):
        """Sign of reordering ``m1 * m2`` into canonical order."""
        par = 0
        # moving each factor of m2 past the later factors of m1
        for j in self._odd:
            if not m2[j] % 2:
                continue
            for i in self._odd:
                if i > j and m1[i] % 2:
                    par ^= 1
        return -1 if par else 1

    def _rewrite_once(self, m, k):
        lhs, rhs = self.relations[k]
        rest = tuple(e - l for e, l in zip(m, lhs))
        out = {}
        for r, c in rhs.items():
            sign = self.mul_sign(rest, r)
            prod = tuple(a + b for a, b in zip(rest, r))
            out[prod] = out.get(prod, 0) + sign * c
        return out

    def normalize(self, vec, choose=0):
        """Normal form of a linear combination of monomials.

        ``choose`` selects which applicable relation is used first (0 = first,
        -1 = last); confluence means the choice is irrelevant.
        """
        out = defaultdict(int)
        work = deque()
        status = self._memo.setdefault("status", {})
        for m, c in vec.items():
            st = status.get(m)
            if st is None:
                st = status[m] = ("drop" if not self.in_range(m) or self.order(m) == 1
                                  else "rewrite" if self.reducible(m) else "keep")
            if st == "keep":
                out[m] += c
            elif st == "rewrite" and c:
                work.append((m, c))
        steps = 0
        while work:
            m, c = work.popleft()
            steps += 1
            if steps > 200000:
                raise NonConfluentRelations("rewriting does not terminate")
            if not c or not self.in_range(m) or self.order(m) == 1:
                continue
            red = self.reducible(m)
            if red:
                k = red[choose] if choose < len(red) else red[-1]
                for m2, c2 in self._rewrite_once(m, k).items():
                    work.append((m2, c * c2))
                continue
            out[m] += c
        res = {}
        for m, c in out.items():
            o = self.order(m)
            if o:
                c %= o
            if c:
                res[m] = c
        return res

    def multiply(self, v1, v2):
        out = defaultdict(int)
        for m1, c1 in v1.items():
            for m2, c2 in v2.items():
                sign = self.mul_sign(m1, m2)
                out[tuple(a + b for a, b in zip(m1, m2))] += sign * c1 * c2
        return self.normalize(out)

    def check_confluence(self, monomials):
        """Exhaustive check: every first rewriting step leads to the same normal form."""
        for m in monomials:
            red = self.reducible(m)
            if len(red) < 2:
                continue
            forms = []
            for k in red:
                forms.append(self.normalize(self._rewrite_once(m, k)))
            if any(f != forms[0] for f in forms[1:]):
                raise NonConfluentRelations(f"{self.format(m)} has normal forms "
                                            f"{[self.format_vec(f) for f in forms]}")

    # text ----------------------------------------------------------------

    def format(self, m):
        parts = []
        for e, g in zip(m, self.gens):
            if e == 1:
                parts.append(g.name)
            elif e:
                parts.append(f"{g.name}^{e}")
        return " ".join(parts) or "1"

    def format_vec(self, v):
        if not v:
            return "0"
        return " + ".join(f"{c}*{self.format(m)}" if c != 1 else self.format(m)
                          for m, c in sorted(v.items()))

    def parse(self, text):
        """``"h1^3 c4 Delta^-1"`` -> exponent tuple."""
        m = [0] * self.n
        text = text.strip()
        if text in ("", "1"):
            return tuple(m)
        for tok in text.split():
            name, _, e = tok.partition("^")
            if name not in self.pos:
                raise KeyError(f"unknown generator {name!r}")
            m[self.pos[name]] += int(e) if e else 1
        return tuple(m)

    def parse_vec(self, text):
        """``{"a b^2": 1, "b^5": -1}`` or a plain monomial string."""
        if isinstance(text, str):
            text = {text: 1}
        out = defaultdict(int)
        for k, c in text.items():
            out[self.parse(k)] += c
        return self.normalize(out)

    # enumeration -----------------------------------------------------------

    def enumerate(self, window):
        """All basis monomials inside ``window`` (s <= s_max, stem bounds)."""
        s_max, lo, hi = window.s_max, window.stem_min, window.stem_max
        ranges = []
        for g in self.gens:
            if g.enum is not None:
                a, b = g.enum
            elif g.cap is not None or g.floor is not None:
                a = g.floor if g.floor is not None else 0
                b = g.cap if g.cap is not None else 0
            elif g.s > 0:
                a, b = (0, s_max // g.s)
            else:
                raise ValueError(f"generator {g.name} needs an enumeration range")
            if g.s > 0:
                b = min(b, s_max // g.s)
            ranges.append(range(a, b + 1))
        # bounds on the stem still reachable from generator i onwards
        lo_rest = [0] * (self.n + 1)
        hi_rest = [0] * (self.n + 1)
        for i in range(self.n - 1, -1, -1):
            g, r = self.gens[i], ranges[i]
            ends = [e * g.stem for e in (r.start, r.stop - 1)] if len(r) else [0]
            lo_rest[i] = lo_rest[i + 1] + min(ends)
            hi_rest[i] = hi_rest[i + 1] + max(ends)
        out = []

        def rec(i, m, s, t):
            if s > s_max or t - s + hi_rest[i] < lo or t - s + lo_rest[i] > hi:
                return
            if i == self.n:
                if lo <= t - s <= hi and self.is_basis(tuple(m)):
                    out.append(tuple(m))
                return
            g = self.gens[i]
            for e in ranges[i]:
                m.append(e)
                rec(i + 1, m, s + e * g.s, t + e * g.t)
                m.pop()

        rec(0, [], 0, 0)
        return out


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class Window:
    s_max: int
    stem_min: int
    stem_max: int

    def contains(self, s, t):
        return 0 <= s <= self.s_max and self.stem_min <= t - s <= self.stem_max


@dataclass(frozen=True)
class ExplicitClass:
    label: str
    s: int
    t: int
    order: int = 0
    family: str | None = None


def _lcm_order(o1, o2):
    return o1 if o1 == o2 else 0


class Spot:
    """One bidegree: E_2 basis with orders, plus Z_r and B_r in E_2 coordinates."""

    def __init__(self, s, t, keys, orders, families, labels):
        self.s, self.t = s, t
        self.keys = list(keys)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.e2_orders = list(orders)
        self.families = list(families)
        self.labels = list(labels)
        n = len(self.keys)
        self.Z = [[int(i == j) for i in range(n)] for j in range(n)]   # columns
        self.B = []
        self._group = None

    @property
    def rank(self):
        return len(self.keys)

    def copy(self):
        sp = Spot.__new__(Spot)
        sp.__dict__.update(self.__dict__)
        sp.Z = [list(z) for z in self.Z]
        sp.B = [list(b) for b in self.B]
        sp._group = None
        sp._cache = {}
        return sp

    def vector(self, combo):
        """Dense E_2 vector from a dict key -> coefficient (keys must be present)."""
        v = [0] * self.rank
        for k, c in combo.items():
            v[self.index[k]] += c
        return self._reduce(v)

    def _reduce(self, v):
        return [x % o if o else x for x, o in zip(v, self.e2_orders)]

    def relation_columns(self):
        return [[o * int(i == j) for i in range(self.rank)]
                for j, o in enumerate(self.e2_orders) if o]

    def group(self):
        """E_r at this spot, with generators given as E_2 vectors."""
        if self._group is None:
            self._group = _quotient_group(self.Z, self.B + self.relation_columns(), self.rank)
        return self._group

    def order(self):
        return self.group().order()

    def _lattice(self, which):
        cache = self.__dict__.setdefault("_cache", {})
        if which not in cache:
            cols = (self.Z if which == "Z" else []) + self.B + self.relation_columns()
            cache[which] = _Lattice(cols, self.rank)
        return cache[which]

    def in_cycles(self, v):
        return self._lattice("Z").solve(v) is not None

    def in_boundaries(self, v):
        return self._lattice("B").solve(v) is not None


def _matrix_from_columns(cols, n):
    if not cols:
        return IntMatrix.zeros(n, 0)
    return IntMatrix([[c[i] for c in cols] for i in range(n)], n, len(cols))


class _Lattice:
    """Solver for ``sum c_j cols_j = v`` with one Smith form reused for every v."""

    def __init__(self, cols, n):
        self.k = len(cols)
        self.n = n
        if self.k:
            d, self.u, self.w = snf(_matrix_from_columns(cols, n))
            self.diag = d.diagonal()
            self.un = _small_array(self.u)
            self.wn = _small_array(self.w)

    def solve(self, v):
        if not any(v):
            return [0] * self.k
        if not self.k:
            return None
        y = _apply(self.u, self.un, v)
        c = [0] * self.k
        for i, yi in enumerate(y):
            di = self.diag[i] if i < len(self.diag) else 0
            if di:
                if yi % di:
                    return None
                c[i] = yi // di
            elif yi:
                return None
        return _apply(self.w, self.wn, c)


_SAFE = 2 ** 62


def _small_array(m):
    """int64 copy of an IntMatrix when its entries are small, else None."""
    if not m.rows or not m.cols:
        return None
    big = max(abs(x) for row in m.data for x in row)
    if big * m.cols >= 2 ** 40:
        return None
    return np.array(m.data, dtype=np.int64)


def _apply(m, arr, v):
    if arr is not None:
        vmax = max((abs(x) for x in v), default=0)
        if vmax < 2 ** 20:
            return [int(x) for x in arr @ np.array(v, dtype=np.int64)]
    return m.apply(list(v))


def _solve(cols, v, n):
    """Integer c with sum c_j cols_j = v, or None."""
    return _Lattice(cols, n).solve(v)


def _solve_mod(gens, rels, v):
    n = len(v)
    sol = _solve(gens + rels, v, n)
    if sol is None:
        return None
    return sol[:len(gens)]


def _kernel(cols, n):
    """Integer basis (as lists) of the kernel of the n x k matrix with these columns."""
    k = len(cols)
    if k == 0:
        return []
    m = _matrix_from_columns(cols, n)
    d, _, w = snf(m)
    rank = sum(1 for x in d.diagonal() if x)
    return [w.column(j) for j in range(rank, k)]


def _quotient_group(gens, rels, n):
    """``(span gens + span rels) / span rels`` as an FgAbGroup with E_2 generators."""
    k = len(gens)
    if k == 0:
        return FgAbGroup((), [], lambda x: ())
    # K = coefficient vectors c with gens c in span(rels)
    ker = _kernel(gens + [[-x for x in r] for r in rels], n)
    kc = [v[:k] for v in ker]
    kmat = _matrix_from_columns(kc, k) if kc else IntMatrix.zeros(k, 0)
    if kc:
        d, u, _, uinv, _ = snf(kmat, inverses=True)
        diag = d.diagonal() + [0] * (k - min(kmat.rows, kmat.cols))
    else:
        u = uinv = IntMatrix.identity(k)
        diag = [0] * k
    keep = [i for i, x in enumerate(diag) if x != 1]
    factors = [diag[i] for i in keep]
    gen_cols = [uinv.column(i) for i in keep]
    e2_gens = [[sum(g[i] * c[j] for j, g in enumerate(gens)) for i in range(n)]
               for c in gen_cols]
    proj = u.select_rows(keep) if keep else None

    def coords(v):
        c = _solve_mod(gens, rels, list(v))
        if c is None:
            raise ValueError("vector is not a cycle at this page")
        y = proj.apply(c)
        return tuple(x % f if f else x for x, f in zip(y, factors))

    return FgAbGroup(factors, e2_gens, coords)


@dataclass
class DifferentialRule:
    r: int
    source: tuple                 # spot bidegree (s, t)
    source_vec: dict              # key -> coefficient
    target_vec: dict              # key -> coefficient at (s + r, t + r - 1)
    provenance: str = "supplied-dataset"
    certificate: str | None = None

    @property
    def target(self):
        return (self.source[0] + self.r, self.source[1] + self.r - 1)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


class ChartPage:
    """Page E_r of a spectral sequence on a finite window."""

    def __init__(self, r, window, spots, algebra=None, name=""):
        self.r = r
        self.window = window
        self.spots = spots
        self.algebra = algebra
        self.name = name

    def spot(self, s, t):
        return self.spots.get((s, t))

    def bidegrees(self):
        return sorted(self.spots)

    def orders(self):
        return {k: sp.order() for k, sp in self.spots.items()}

    def group(self, s, t):
        sp = self.spots.get((s, t))
        return sp.group() if sp else FgAbGroup.trivial()

    def label(self, key):
        if key[0] == "m" and self.algebra is not None:
            return self.algebra.format(key[1])
        return key[1]

    def describe(self, s, t):
        sp = self.spots.get((s, t))
        if not sp:
            return "0"
        return str(sp.group())

    def copy(self, r=None):
        return ChartPage(self.r if r is None else r, self.window,
                         {k: v.copy() for k, v in self.spots.items()}, self.algebra, self.name)

    def column(self, stem, s_max=None):
        """``{s: group}`` along the column t - s = stem."""
        s_max = self.window.s_max if s_max is None else s_max
        return {s: self.group(s, s + stem) for s in range(s_max + 1)
                if (s, s + stem) in self.spots}


def e2_from_dataset(algebra, window, explicit=(), name="", check_confluence=True):
    """Materialize E_2 on the window from an algebra plus explicit classes."""
    if window.s_max < 0 or window.stem_min > window.stem_max:
        raise WindowEmpty("window contains no bidegrees")
    buckets = defaultdict(list)
    if algebra is not None and algebra.n:
        monos = algebra.enumerate(window)
        if check_confluence:
            near = _reducible_neighbours(algebra, window)
            algebra.check_confluence(near)
        # a monomial belongs to a coefficient family when another power of
        # the family generator times the same cofactor lies in its bidegree
        fam_idx = [i for i, g in enumerate(algebra.gens) if g.family]
        stems = defaultdict(int)
        for m in monos:
            for i in fam_idx:
                stems[(i, m[:i] + (0,) + m[i + 1:])] += 1
        for m in monos:
            s, t = algebra.bidegree(m)
            fam = [algebra.gens[i].family for i in fam_idx
                   if stems[(i, m[:i] + (0,) + m[i + 1:])] > 1]
            buckets[(s, t)].append((("m", m), algebra.order(m), fam[0] if fam else None,
                                    algebra.format(m)))
    for x in explicit:
        if window.contains(x.s, x.t):
            buckets[(x.s, x.t)].append((("x", x.label), x.order, x.family, x.label))
    spots = {}
    for (s, t), items in buckets.items():
        items.sort(key=lambda it: str(it[0]))
        spots[(s, t)] = Spot(s, t, [i[0] for i in items], [i[1] for i in items],
                             [i[2] for i in items], [i[3] for i in items])
    return ChartPage(2, window, spots, algebra, name)


def _reducible_neighbours(algebra, window):
    """Monomials in the window that at least two relations can rewrite."""
    wide = Window(window.s_max, window.stem_min, window.stem_max)
    out = []
    for lhs_a, _ in algebra.relations:
        for lhs_b, _ in algebra.relations:
            if lhs_a >= lhs_b:
                continue
            join = tuple(max(a, b) for a, b in zip(lhs_a, lhs_b))
            s, t = algebra.bidegree(join)
            if s <= wide.s_max:
                out.append(join)
    return out


# ---------------------------------------------------------------------------
# Leibniz closure


def _vec_key(v):
    return {("m", m): c for m, c in v.items()}


def leibniz_close(page, seeds, permanent=(), r=None, margin=None, seed_order=None):
    """Close seed differentials under the Leibniz rule on the page's algebra.

    ``seeds`` maps monomial strings (or exponent tuples) to target
    combinations; ``permanent`` names monomials with d_r = 0.  Products are
    formed one atom at a time, so every derived value is
    ``d(a m) = d(a) m + (-1)^{|a|} a d(m)`` with |a| the stem of a.  Returns
    DifferentialRule objects for every monomial source in the window.
    """
    alg = page.algebra
    r = page.r if r is None else r
    w = page.window

    def as_mono(x):
        return alg.parse(x) if isinstance(x, str) else tuple(x)

    def as_vec(x):
        return alg.parse_vec(x) if isinstance(x, (str, dict)) and not (
            isinstance(x, dict) and x and isinstance(next(iter(x)), tuple)) else dict(x)

    atoms = {}
    for src, tgt in seeds.items():
        atoms[as_mono(src)] = as_vec(tgt)
    for p in permanent:
        atoms.setdefault(as_mono(p), {})
    # inverses of invertible atoms: d(x^-1) = -x^-2 d(x)
    for m, dm in list(atoms.items()):
        if all((e == 0) or alg.gens[i].invertible or alg.gens[i].floor is not None
               for i, e in enumerate(m)) and any(m):
            inv = tuple(-e for e in m)
            if inv not in atoms:
                x2 = alg.normalize({tuple(-2 * e for e in m): -1})
                atoms[inv] = alg.multiply(x2, dm)
    order = list(atoms)
    if seed_order is not None:
        order = [order[i] for i in seed_order(len(order))]
    permanent_set = {as_mono(p) for p in permanent}
    # Any product of atoms can be ordered so that its partial stems stay
    # within one atom stem of the band spanned by 0 and the window, and s
    # only grows; this bounds the search without losing window monomials.
    wide = max((abs(alg.stem(a)) for a in atoms), default=0)
    if margin is None:
        margin = 0
    bound = Window(w.s_max + margin, min(w.stem_min, 0) - wide - margin,
                   max(w.stem_max, 0) + wide + margin)

    known = {alg.unit(): {}}
    queue = deque([alg.unit()])
    pending = []

    def leibniz(a, m):
        sign_a = -1 if alg.stem(a) % 2 else 1
        val = defaultdict(int)
        for k, x in alg.multiply(atoms[a], {m: 1}).items():
            val[k] += x
        for k, x in alg.multiply({a: 1}, known[m]).items():
            val[k] += sign_a * x
        return alg.normalize(val)

    def inside(m):
        s, t = alg.bidegree(m)
        return 0 <= s <= bound.s_max and bound.stem_min <= t - s <= bound.stem_max

    while queue:
        m = queue.popleft()
        dm = known[m]
        for a in order:
            prod = alg.normalize({tuple(x + y for x, y in zip(a, m)): alg.mul_sign(a, m)})
            if not prod:
                continue
            if len(prod) != 1 or not _unit_coefficient(alg, *next(iter(prod.items()))):
                if all(inside(p) for p in prod):
                    pending.append((a, m, prod))
                continue
            (p, c), = prod.items()
            if not inside(p) or not alg.in_range(p):
                continue
            val = leibniz(a, m)
            if c != 1:
                # a m = c p with c = e mod ord(p), e = +-1; d(p) is ord(p)-torsion
                e = c if c in (1, -1) else (1 if c % alg.order(p) == 1 else -1)
                val = alg.normalize({k: x * e for k, x in val.items()})
            if p in known:
                if known[p] != val:
                    raise InconsistentRules(
                        f"d_{r}({alg.format(p)}) derived as {alg.format_vec(known[p])} and as "
                        f"{alg.format_vec(val)}")
                continue
            if p in permanent_set and val:
                raise InconsistentRules(f"{alg.format(p)} declared permanent but "
                                        f"d_{r} = {alg.format_vec(val)}")
            known[p] = val
            queue.append(p)

    # products that normalize to a combination: d of the combination is
    # forced, so every term must be known and the values must agree
    for a, m, prod in pending:
        missing = [p for p in prod if p not in known]
        if missing:
            if any(w.contains(*alg.bidegree(p)) for p in missing):
                raise UnresolvableProduct(
                    f"d_{r} of {alg.format(a)} * {alg.format(m)} = {alg.format_vec(prod)} does "
                    f"not determine d_{r}({alg.format(missing[0])})")
            continue
        total = defaultdict(int)
        for p, c in prod.items():
            for k, x in known[p].items():
                total[k] += c * x
        if alg.normalize(total) != leibniz(a, m):
            raise InconsistentRules(f"d_{r}({alg.format(a)} * {alg.format(m)}) disagrees with "
                                    f"d_{r} of its normal form {alg.format_vec(prod)}")

    rules = []
    seed_keys = {as_mono(s) for s in seeds}
    for m, val in known.items():
        s, t = alg.bidegree(m)
        if not w.contains(s, t) or (s, t) not in page.spots:
            continue
        if ("m", m) not in page.spots[(s, t)].index:
            continue
        prov = "supplied-dataset" if m in seed_keys else "leibniz-derived"
        rules.append(DifferentialRule(r, (s, t), {("m", m): 1}, _vec_key(val), prov))
    rules.sort(key=lambda x: (x.source, str(x.source_vec)))
    return rules


def _unit_coefficient(alg, p, c):
    o = alg.order(p)
    return c in (1, -1) or bool(o and c % o in (1, o - 1))


def rules_as_table(rules):
    return {(ru.r, ru.source, tuple(sorted(ru.source_vec.items()))):
            tuple(sorted(ru.target_vec.items())) for ru in rules}


# ---------------------------------------------------------------------------
# page turning


class _SpotDifferential:
    """d_r on one spot, defined on span(rule sources) + uncovered basis elements."""

    def __init__(self, page, src, rules):
        self.sp = page.spots[src]
        r = rules[0].r
        self.tgt_bideg = (src[0] + r, src[1] + r - 1)
        self.tsp = page.spots.get(self.tgt_bideg)
        n = self.sp.rank
        cols, vals = [], []
        covered = set()
        for ru in rules:
            v = self.sp.vector(ru.source_vec)
            cols.append(v)
            vals.append(self._target(ru))
            covered.update(k for k in ru.source_vec)
        for k in self.sp.keys:
            if k not in covered:
                e = [0] * n
                e[self.sp.index[k]] = 1
                cols.append(e)
                vals.append(None)
        self.cols = cols
        self.vals = vals
        self.rels = self.sp.relation_columns()
        self.lattice = _Lattice(self.cols + self.rels, self.sp.rank)

    def _target(self, ru):
        if self.tsp is None:
            return None
        missing = [k for k in ru.target_vec if k not in self.tsp.index]
        if missing:
            raise RuleNotClosed(f"target class {missing[0]} not present at {self.tgt_bideg}")
        return self.tsp.vector(ru.target_vec)

    def apply(self, v):
        c = self.lattice.solve(list(v))
        if c is None:
            raise RuleNotClosed(f"d is not defined on {v} at {(self.sp.s, self.sp.t)}")
        if self.tsp is None:
            return None
        out = [0] * self.tsp.rank
        for cj, val in zip(c, self.vals):
            if cj and val is not None:
                for i, x in enumerate(val):
                    out[i] += cj * x
        return self.tsp._reduce(out)

    def check_well_defined(self):
        """Relations among the sources must map into B_r + R at the target."""
        if self.tsp is None:
            return
        n = self.sp.rank
        for kv in _kernel(self.cols + self.rels, n):
            out = [0] * self.tsp.rank
            for cj, val in zip(kv[:len(self.cols)], self.vals):
                if cj and val is not None:
                    for i, x in enumerate(val):
                        out[i] += cj * x
            if not self.tsp.in_boundaries(self.tsp._reduce(out)):
                raise InconsistentRules(f"d_r is not well defined at {(self.sp.s, self.sp.t)}")


def _group_rules(rules):
    by = defaultdict(list)
    for ru in rules:
        by[ru.source].append(ru)
    return by


def check_dd_zero(page, rules):
    """d_r d_r = 0 on every spot with a rule (on the page's cycles)."""
    by = _group_rules(rules)
    diffs = {src: _SpotDifferential(page, src, rs) for src, rs in by.items() if src in page.spots}
    for src, dif in diffs.items():
        nxt = diffs.get(dif.tgt_bideg)
        if nxt is None or dif.tsp is None:
            continue
        for z in page.spots[src].Z:
            y = dif.apply(z)
            if y is None or not any(y):
                continue
            yy = nxt.apply(y)
            if yy is not None and not nxt.tsp.in_boundaries(yy):
                raise InconsistentRules(f"d_{page.r} d_{page.r} != 0 starting at {src}")
    return True


def turn_page(page, rules):
    """E_{r+1} from E_r and the rules for d_r (all rules must have r = page.r)."""
    for ru in rules:
        if ru.r != page.r:
            raise RuleNotClosed(f"rule for d_{ru.r} offered on page {page.r}")
        if (ru.target[0] - ru.source[0], ru.target[1] - ru.source[1]) != (ru.r, ru.r - 1):
            raise RuleNotClosed("rule breaks the bidegree law")
    new = page.copy(page.r + 1)
    if not rules:
        return new
    check_dd_zero(page, rules)
    by = _group_rules(rules)
    for src, rs in by.items():
        if src not in page.spots:
            continue
        dif = _SpotDifferential(page, src, rs)
        dif.check_well_defined()
        if dif.tsp is None:
            continue
        tsp = page.spots[dif.tgt_bideg]
        sp = page.spots[src]
        images = []
        for z in sp.Z:
            y = dif.apply(z)
            if not tsp.in_cycles(y):
                raise InconsistentRules(f"d_{page.r} of a class at {src} is not a cycle at "
                                        f"{dif.tgt_bideg}")
            images.append(y)
        # new cycles: combinations whose image is a boundary
        quot = tsp.B + tsp.relation_columns()
        ker = _kernel(images + [[-x for x in q] for q in quot], tsp.rank)
        k = len(sp.Z)
        new_z = []
        for kv in ker:
            c = kv[:k]
            if any(c):
                new_z.append(sp._reduce([sum(cj * z[i] for cj, z in zip(c, sp.Z) if cj)
                                         for i in range(sp.rank)]))
        new.spots[src].Z = _prune(new_z, sp)
        new.spots[src]._group = None
        new.spots[src]._cache = {}
        tnew = new.spots[dif.tgt_bideg]
        tnew.B = _prune(tnew.B + [y for y in images if any(y)], tsp)
        tnew._group = None
        tnew._cache = {}
    return new


def _prune(vectors, sp):
    """Echelon generators of span(vectors) + R (R, the order relations, stays implicit)."""
    orders = sp.e2_orders
    rows = [sp._reduce(list(v)) for v in vectors if any(v)]
    out = []
    for c in range(sp.rank):
        o = orders[c]
        live = [r for r in rows if r[c]]
        rows = [r for r in rows if not r[c]]
        if o:
            rel = [0] * sp.rank
            rel[c] = o
            if live:
                live.append(rel)
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            p = live[0]
            nxt = [p]
            for r in live[1:]:
                q = r[c] // p[c]
                r = sp._reduce([a - q * b for a, b in zip(r, p)])
                if r[c]:
                    nxt.append(r)
                elif any(r):
                    rows.append(r)
            live = nxt
        if live and (not o or live[0][c] % o):
            out.append(live[0])
    return out


def run_pages(page, rules, r_max=None):
    """Turn pages until every rule has been used; returns the list of pages."""
    by_r = defaultdict(list)
    for ru in rules:
        by_r[ru.r].append(ru)
    r_max = max(by_r, default=page.r) if r_max is None else r_max
    pages = [page]
    while pages[-1].r <= r_max:
        p = pages[-1]
        pages.append(turn_page(p, by_r.get(p.r, [])))
    return pages


# ---------------------------------------------------------------------------
# comparison with the ring spectral sequence


def import_comparison(ring_rules, pic_page, shift=1):
    """Move ring rules at (s, t) to the Picard chart at (s, t + shift) when allowed.

    Allowed when 2 <= r <= t - 1 (t the Picard degree of the source) or when
    the source has t - s > 0 and s > 0.  Returns ``(imported, rejected)``
    where each rejection is ``(rule, reason)``.
    """
    imported, rejected = [], []
    for ru in ring_rules:
        s, t = ru.source[0], ru.source[1] + shift
        stem = t - s
        if 2 <= ru.r <= t - 1:
            cert = f"2 <= r = {ru.r} <= t - 1 = {t - 1}"
        elif stem > 0 and s > 0:
            cert = f"t - s = {stem} > 0 and s = {s} > 0"
        else:
            rejected.append((ru, f"r = {ru.r} > t - 1 = {t - 1} and (t - s, s) = ({stem}, {s}) "
                                 f"is outside the stable range"))
            continue
        if (s, t) not in pic_page.spots:
            continue
        imported.append(DifferentialRule(ru.r, (s, t), dict(ru.source_vec), dict(ru.target_vec),
                                         "imported-comparison", cert))
    return imported, rejected


# ---------------------------------------------------------------------------
# the first unstable differential


def _f2_nullspace(a):
    """Basis of the nullspace of a 0/1 numpy matrix over F_2."""
    a = a.copy() % 2
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        hit = np.nonzero(a[r:, c])[0] if r < rows else []
        if len(hit) == 0:
            continue
        p = r + hit[0]
        a[[r, p]] = a[[p, r]]
        for i in np.nonzero(a[:, c])[0]:
            if i != r:
                a[i] ^= a[r]
        piv.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in piv]
    out = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = a[i, f]
        out.append(v)
    return out, len(piv)


@dataclass
class UnstableResult:
    rules: list
    kernel: FgAbGroup
    image_rank: int
    matrix: object


def unstable_first_differential(page, spot, ring_d, square, r=None):
    """Rules for d_r(x) = ring_d(x) + square(x) at ``spot`` of a Picard chart.

    ``ring_d`` and ``square`` take a dense F_2 vector over the spot's basis
    and return one over the target spot's basis.  Both are additive in
    characteristic 2, so the operator is read off on basis vectors.
    """
    sp = page.spots[spot]
    r = page.r if r is None else r
    tgt = (spot[0] + r, spot[1] + r - 1)
    tsp = page.spots.get(tgt)
    if any(o != 2 for o in sp.e2_orders) or (tsp and any(o != 2 for o in tsp.e2_orders)):
        raise NotCharTwo(f"spot {spot} is not an F_2 vector space")
    n = sp.rank
    m = tsp.rank if tsp else 0
    mat = np.zeros((m, n), dtype=np.int64)
    rules = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        col = [(a + b) % 2 for a, b in zip(ring_d(e), square(e))] if m else []
        mat[:, i] = col
        rules.append(DifferentialRule(r, spot, {sp.keys[i]: 1},
                                      {tsp.keys[k]: 1 for k in range(m) if col[k]},
                                      "unstable-formula", "d(x) = d_ring(x) + x^2"))
    null, rank = _f2_nullspace(mat) if n else ([], 0)
    kernel = FgAbGroup.from_orders([2] * len(null))
    return UnstableResult(rules, kernel, rank, mat)


def coefficient_operator(src_exps, tgt_exps, ring_d, multiplier):
    """Matrix of f -> ring_d(f) + multiplier * f^2 on truncated F_2 coefficient spaces.

    ``src_exps``/``tgt_exps`` list the exponents of the coefficient
    variable; ``ring_d`` maps exponent -> list of target exponents and
    ``multiplier`` is a list of exponents (a polynomial over F_2).
    """
    pos = {e: i for i, e in enumerate(tgt_exps)}
    mat = np.zeros((len(tgt_exps), len(src_exps)), dtype=np.int64)
    for j, e in enumerate(src_exps):
        for x in ring_d(e):
            if x in pos:
                mat[pos[x], j] ^= 1
        for k in multiplier:
            if 2 * e + k in pos:
                mat[pos[2 * e + k], j] ^= 1
    return mat


def f2_kernel_dim(mat):
    null, _ = _f2_nullspace(np.asarray(mat, dtype=np.int64))
    return len(null)
