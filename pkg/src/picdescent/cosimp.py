"""Truncated cosimplicial abelian groups and their Moore cohomology.

Level ``n`` is a diagonally presented group (free coordinates have order 0)
with labeled basis.  Cofaces ``d^i: level n -> level n+1`` (0 <= i <= n+1)
and codegeneracies ``s^j: level n+1 -> level n`` (0 <= j <= n) are sparse
integer matrices acting on column vectors, built on demand and cached.  The
cosimplicial identities are checked whenever a level is first touched.

The universal examples are the groups of reduced d-cycles in the normalized
chains of the simplices.  A d-cycle of Delta^n is determined by its
coefficients on the simplices avoiding the vertex 0, so Z_d(Delta^n) is free
on the cones ``e_T = boundary({0} u T)`` for (d+1)-subsets T of {1..n}.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations
from math import comb

from .errors import (DimensionMismatch, HypothesisFailed, NotFree, TruncationTooSmall,
                     WindowExceedsTruncation)
from .exactalg import IntMatrix, SparseIntMatrix, modp_rank, subquotient


class CosimplicialAbGroup:
    """A cosimplicial abelian group truncated at level ``truncation``.

    ``basis(n)`` returns the labels of level n, ``orders(n)`` their orders
    and ``apply(n, phi, label)`` the image of one basis element under the
    monotone map ``phi`` (a tuple of length n+1 with values in [m]) as a
    dict label -> coefficient.  Everything else is derived from these.
    """

    def __init__(self, basis, apply, orders=None, truncation=8, name="", check=True):
        self._basis = basis
        self._apply = apply
        self._orders = orders
        self.truncation = truncation
        self.name = name
        self.check = check
        self._cache = {}
        self._index = {}
        self._checked = set()

    def basis(self, n):
        if n not in self._cache:
            self._cache[n] = list(self._basis(n))
            self._index[n] = {b: i for i, b in enumerate(self._cache[n])}
        return self._cache[n]

    def index(self, n):
        self.basis(n)
        return self._index[n]

    def rank(self, n):
        return len(self.basis(n))

    def orders(self, n):
        if self._orders is None:
            return [0] * self.rank(n)
        return list(self._orders(n))

    def is_free(self, n):
        return not any(self.orders(n))

    def _matrix(self, n, m, phi):
        key = (n, m, tuple(phi))
        if key not in self._cache:
            idx = self.index(m)
            orders = self.orders(m)
            rows = [dict() for _ in range(self.rank(m))]
            for j, b in enumerate(self.basis(n)):
                for lab, x in self._apply(n, m, phi, b).items():
                    i = idx[lab]
                    o = orders[i]
                    v = rows[i].get(j, 0) + x
                    if o:
                        v %= o
                    if v:
                        rows[i][j] = v
                    else:
                        rows[i].pop(j, None)
            self._cache[key] = SparseIntMatrix(rows, self.rank(n))
        return self._cache[key]

    def coface(self, n, i):
        """``d^i``: level n -> level n+1."""
        if not 0 <= i <= n + 1:
            raise DimensionMismatch(f"no coface d^{i} out of level {n}")
        if self.check:
            self.check_identities(n + 1)
        return self._matrix(n, n + 1, coface_map(n, i))

    def codegeneracy(self, n, j):
        """``s^j``: level n+1 -> level n."""
        if not 0 <= j <= n:
            raise DimensionMismatch(f"no codegeneracy s^{j} into level {n}")
        return self._matrix(n + 1, n, codegeneracy_map(n, j))

    def check_identities(self, level):
        """Assert the cosimplicial identities for maps landing in ``level``."""
        if level in self._checked or level < 1:
            return
        self._checked.add(level)
        n = level - 2
        mod = self.orders(level)

        def same(a, b, orders):
            for r, (x, y) in enumerate(zip(a.rows, b.rows)):
                o = orders[r]
                for c in set(x) | set(y):
                    v = x.get(c, 0) - y.get(c, 0)
                    if (o and v % o) or (not o and v):
                        return False
            return True

        if n >= 0:
            for j in range(n + 3):
                for i in range(j):
                    lhs = self._matrix(n + 1, n + 2, coface_map(n + 1, j)) @ \
                        self._matrix(n, n + 1, coface_map(n, i))
                    rhs = self._matrix(n + 1, n + 2, coface_map(n + 1, i)) @ \
                        self._matrix(n, n + 1, coface_map(n, j - 1))
                    if not same(lhs, rhs, mod):
                        raise AssertionError(f"d^{j} d^{i} != d^{i} d^{j - 1} into level {level}")
        # s^j d^i on level level-1
        k = level - 1
        low = self.orders(k)
        for j in range(k + 1):
            for i in range(k + 2):
                lhs = self._matrix(k + 1, k, codegeneracy_map(k, j)) @ \
                    self._matrix(k, k + 1, coface_map(k, i))
                if i == j or i == j + 1:
                    ok = same(lhs, _identity(self.rank(k)), low)
                elif i < j:
                    rhs = self._matrix(k - 1, k, coface_map(k - 1, i)) @ \
                        self._matrix(k, k - 1, codegeneracy_map(k - 1, j - 1))
                    ok = same(lhs, rhs, low)
                else:
                    rhs = self._matrix(k - 1, k, coface_map(k - 1, i - 1)) @ \
                        self._matrix(k, k - 1, codegeneracy_map(k - 1, j))
                    ok = same(lhs, rhs, low)
                if not ok:
                    raise AssertionError(f"s^{j} d^{i} identity fails at level {k}")

    def unnormalized_differential(self, n):
        """``sum (-1)^i d^i`` from level n to level n+1."""
        acc = [defaultdict(int) for _ in range(self.rank(n + 1))]
        for i in range(n + 2):
            sign = -1 if i % 2 else 1
            for r, row in enumerate(self.coface(n, i).rows):
                for c, x in row.items():
                    acc[r][c] += sign * x
        return _reduce_rows(acc, self.orders(n + 1), self.rank(n))


def _identity(n):
    return SparseIntMatrix([{i: 1} for i in range(n)], n)


def _reduce_rows(acc, orders, ncols):
    rows = []
    for r, row in enumerate(acc):
        o = orders[r]
        rows.append({c: (x % o if o else x) for c, x in row.items() if (x % o if o else x)})
    return SparseIntMatrix(rows, ncols)


def coface_map(n, i):
    """``delta^i: [n] -> [n+1]``, skipping i."""
    return tuple(k if k < i else k + 1 for k in range(n + 1))


def codegeneracy_map(n, j):
    """``sigma^j: [n+1] -> [n]``, hitting j twice."""
    return tuple(k if k <= j else k - 1 for k in range(n + 2))


# ---------------------------------------------------------------------------
# the universal examples


def _push_chain(chain, phi):
    """Image of a normalized chain under a monotone map; degenerate simplices die."""
    out = defaultdict(int)
    for simplex, x in chain.items():
        img = tuple(phi[v] for v in simplex)
        if len(set(img)) == len(img):
            out[img] += x
    return {s: x for s, x in out.items() if x}


def _cone(T):
    """The cycle ``boundary({0} u T)`` as a chain."""
    full = (0,) + tuple(T)
    return {full[:k] + full[k + 1:]: (-1) ** k for k in range(len(full))}


def _cone_coordinates(chain):
    """Coordinates of a cycle in the cone basis: its coefficients away from 0."""
    return {s: x for s, x in chain.items() if s[0] != 0}


def cycles_cosimplicial(t, d, truncation=None, check=True):
    """Reduced d-cycles of the normalized chains of Delta^n, n = 0..truncation.

    Models pi_t of the universal cosimplicial space (d = t) and pi_{2t}
    (d = 2t+1).  Default truncation is 2t+4.

    >>> a = cycles_cosimplicial(2, 2)
    >>> [a.rank(n) for n in range(6)]
    [0, 0, 0, 1, 4, 10]
    """
    if t < 2:
        raise ValueError("t must be at least 2")
    if truncation is None:
        truncation = 2 * t + 4
    if truncation < d + 2:
        raise TruncationTooSmall(f"truncation {truncation} cannot see degree {d + 1}; "
                                 f"need at least {d + 2}")

    def basis(n):
        return [T for T in combinations(range(1, n + 1), d + 1)]

    def apply(n, m, phi, T):
        return _cone_coordinates(_push_chain(_cone(T), phi))

    return CosimplicialAbGroup(basis, apply, None, truncation, f"Z_{d}(Delta)", check)


def cycle_rank(n, d):
    """Rank of Z_d(Delta^n), reduced: the number of cones, C(n, d+1)."""
    return comb(n, d + 1)


def constant_cosimplicial(rank=1, truncation=6):
    """The constant cosimplicial free group of the given rank."""
    labels = list(range(rank))
    return CosimplicialAbGroup(lambda n: labels, lambda n, m, phi, b: {b: 1}, None,
                               truncation, f"const Z^{rank}")


def zero_cosimplicial(truncation=6):
    return CosimplicialAbGroup(lambda n: [], lambda n, m, phi, b: {}, None, truncation, "0")


def direct_sum(a, b):
    """Levelwise direct sum, labels tagged 0 and 1."""

    def basis(n):
        return [(0, x) for x in a.basis(n)] + [(1, x) for x in b.basis(n)]

    def orders(n):
        return a.orders(n) + b.orders(n)

    def apply(n, m, phi, lab):
        src = a if lab[0] == 0 else b
        return {(lab[0], y): x for y, x in src._apply(n, m, phi, lab[1]).items()}

    return CosimplicialAbGroup(basis, apply, orders, min(a.truncation, b.truncation),
                               f"{a.name} + {b.name}", a.check and b.check)


# ---------------------------------------------------------------------------
# symmetric squares


def sym2(c, twisted=False):
    """Levelwise swap coinvariants of ``c (x) c``, with the sign twist if asked.

    Basis at level n: pairs ``(i, j)`` of basis positions with i <= j.  In the
    twisted case ``e_j e_i = -e_i e_j`` and the diagonal classes ``e_i e_i``
    have order 2 (the Frobenius classes).
    """
    for n in range(c.truncation + 1):
        if not c.is_free(n):
            raise NotFree(f"level {n} of {c.name} is not free")
    sign = -1 if twisted else 1

    def basis(n):
        r = c.rank(n)
        return [(i, j) for i in range(r) for j in range(i, r)]

    def orders(n):
        return [2 if (twisted and i == j) else 0 for i, j in basis(n)]

    images = {}

    def image(n, m, phi, i):
        key = (n, m, tuple(phi), i)
        if key not in images:
            idx = c.index(m)
            images[key] = {idx[y]: x for y, x in c._apply(n, m, phi, c.basis(n)[i]).items()}
        return images[key]

    def apply(n, m, phi, pair):
        a = image(n, m, phi, pair[0])
        b = image(n, m, phi, pair[1])
        out = defaultdict(int)
        for u, x in a.items():
            for v, y in b.items():
                if u <= v:
                    out[(u, v)] += x * y
                else:
                    out[(v, u)] += sign * x * y
        return {k: x for k, x in out.items() if x}

    return CosimplicialAbGroup(basis, apply, orders, c.truncation,
                               ("Sym2~" if twisted else "Sym2") + f"({c.name})", c.check)


def reduce_mod2(c):
    """The same cosimplicial object with every coordinate of order 2."""
    return CosimplicialAbGroup(c._basis, c._apply, lambda n: [2] * c.rank(n), c.truncation,
                               c.name + " mod 2", c.check)


# ---------------------------------------------------------------------------
# Moore cohomology


class MooreComplex:
    """The conormalized complex ``N^n = A^n / sum_{i>=1} im d^i`` with differential d^0.

    When every coface d^i (i >= 1) sends basis elements to signed basis
    elements, the degenerate part is a coordinate subspace and N^n is
    presented on the remaining coordinates.  Otherwise the unnormalized
    complex is used, which has the same cohomology.
    """

    def __init__(self, c, top):
        self.c = c
        self.top = top
        self.coords = []
        self.normalized = True
        for n in range(top + 1):
            hit = set()
            for i in range(1, n + 1):
                d = c.coface(n - 1, i)
                cols = defaultdict(list)
                for r, row in enumerate(d.rows):
                    for col, x in row.items():
                        cols[col].append((r, x))
                for col, entries in cols.items():
                    if len(entries) != 1 or entries[0][1] not in (1, -1):
                        self.normalized = False
                    hit.add(entries[0][0])
            self.coords.append([k for k in range(c.rank(n)) if k not in hit])
        if not self.normalized:
            self.coords = [list(range(c.rank(n))) for n in range(top + 1)]

    def rank(self, n):
        return len(self.coords[n])

    def orders(self, n):
        o = self.c.orders(n)
        return [o[k] for k in self.coords[n]]

    def differential(self, n):
        """Dense map N^n -> N^{n+1}."""
        if self.normalized:
            d = self.c.coface(n, 0)
        else:
            d = self.c.unnormalized_differential(n)
        src, tgt = self.coords[n], self.coords[n + 1]
        pos = {k: i for i, k in enumerate(src)}
        out = [[0] * len(src) for _ in tgt]
        for a, r in enumerate(tgt):
            for col, x in d.rows[r].items():
                if col in pos:
                    out[a][pos[col]] = x
        return out

    def project(self, n, vec):
        """Coordinates in N^n of an element of level n (given as a dense list)."""
        return [vec[k] for k in self.coords[n]]

    def cohomology(self, s):
        f = self.differential(s - 1) if s else [[] for _ in range(self.rank(0))]
        g = self.differential(s)
        fm = IntMatrix(f, self.rank(s), self.rank(s - 1) if s else 0)
        gm = IntMatrix(g, self.rank(s + 1), self.rank(s))
        return subquotient(fm, gm, self.orders(s), self.orders(s + 1))


def moore_cohomology(c, window):
    """H^0..H^S of the Moore complex for ``window = S`` (or a range)."""
    top = window if isinstance(window, int) else max(window)
    if top > c.truncation - 1:
        raise WindowExceedsTruncation(f"window {top} needs level {top + 1} but truncation "
                                      f"is {c.truncation}")
    mc = MooreComplex(c, top + 1)
    degrees = range(top + 1) if isinstance(window, int) else window
    return [mc.cohomology(s) for s in degrees]


def unnormalized_cohomology(c, window):
    """Same as moore_cohomology, on the full complex; used as an oracle."""
    out = []
    for s in range(window + 1):
        f = c.unnormalized_differential(s - 1).to_dense() if s else \
            IntMatrix.zeros(c.rank(0), 0)
        g = c.unnormalized_differential(s).to_dense()
        out.append(subquotient(f, g, c.orders(s), c.orders(s + 1)))
    return out


def fundamental_class(t, d=None):
    """The generator iota of H^{d+1}: the single cone e_{1..d+1} at level d+1."""
    d = t if d is None else d
    return tuple(range(1, d + 2))


def _iterate(c, n, vec, which, times):
    """Apply d^0 (which='back') or d^last (which='front') ``times`` times."""
    for _ in range(times):
        i = 0 if which == "back" else n + 1
        d = c.coface(n, i)
        vec = [sum(x * vec[col] for col, x in row.items()) for row in d.rows]
        n += 1
    return vec


def cup_square(c, sq, n, vec):
    """Class of ``x (x) x`` in the symmetric square ``sq`` of ``c`` at level 2n.

    ``x`` is given by its coordinates at level n; the cup product uses the
    front face ``(d^last)^n x`` and the back face ``(d^0)^n x``.
    """
    front = _iterate(c, n, vec, "front", n)
    back = _iterate(c, n, vec, "back", n)
    idx = sq.index(2 * n)
    orders = sq.orders(2 * n)
    out = [0] * sq.rank(2 * n)
    twisted = any(orders)
    for u, x in enumerate(front):
        if not x:
            continue
        for v, y in enumerate(back):
            if not y:
                continue
            if u <= v:
                out[idx[(u, v)]] += x * y
            else:
                out[idx[(v, u)]] += (-1 if twisted else 1) * x * y
    return [x % o if o else x for x, o in zip(out, orders)]


def square_class(t, twisted=None, truncation=None):
    """``(H^{2t+2}(Sym2 A), coordinates of iota^2)`` with the parity twist by default."""
    a = cycles_cosimplicial(t, t, truncation)
    if twisted is None:
        twisted = t % 2 == 1
    sq = sym2(a, twisted)
    top = 2 * t + 2
    mc = MooreComplex(sq, top + 1)
    h = mc.cohomology(top)
    iota = [0] * a.rank(t + 1)
    iota[a.index(t + 1)[fundamental_class(t)]] = 1
    vec = cup_square(a, sq, t + 1, iota)
    return h, h.coordinates(mc.project(top, vec))


def priddy_dims(c, t, window):
    """Dimensions of H^i(Sym^2(c (x) F_2)) for i = 0..window.

    Checks first that c mod 2 has cohomology F_2 concentrated in degree t+1,
    or no cohomology at all (then the symmetric square is acyclic too).
    """
    if window > c.truncation - 1:
        raise WindowExceedsTruncation(f"window {window} exceeds truncation {c.truncation}")
    base = _mod2_dims(MooreComplex(c, window + 1), window)
    expected = [1 if i == t + 1 else 0 for i in range(window + 1)]
    if not any(base):
        return [0] * (window + 1)
    if base != expected:
        raise HypothesisFailed(f"mod 2 cohomology {base} is not F_2 in degree {t + 1}")
    return _mod2_dims(MooreComplex(sym2(c, False), window + 1), window)


def _mod2_dims(mc, window):
    ranks = [modp_rank(IntMatrix(mc.differential(s), mc.rank(s + 1), mc.rank(s)), 2)
             for s in range(window + 1)]
    return [mc.rank(s) - ranks[s] - (ranks[s - 1] if s else 0) for s in range(window + 1)]


def assembly_65(t, truncation=None):
    """H^{2t+2} of B (+) Sym2 A (twisted for odd t), as in the E_2^{2t+2,2t} computation."""
    a = cycles_cosimplicial(t, t, truncation)
    b = cycles_cosimplicial(t, 2 * t + 1, truncation)
    total = direct_sum(b, sym2(a, t % 2 == 1))
    top = 2 * t + 2
    return MooreComplex(total, top + 1).cohomology(top)

