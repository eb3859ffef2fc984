"""Exact linear algebra over the integers and over Z/p.

Everything here works with Python integers, so there is no overflow and no
floating point.  The main entry points are

* ``snf``: Smith normal form with unimodular transforms,
* ``cohomology_at`` / ``subquotient``: ker/im of a complex whose groups are
  presented diagonally (each coordinate has an order, 0 meaning free),
* ``presented_h_orders``: the same answer for large sparse complexes, without
  representatives,
* ``modp_rank``: rank over a prime field via sparse elimination,
* ``FgAbGroup``: finitely generated abelian groups in invariant-factor form.

>>> d, u, v = snf(IntMatrix([[2, 4], [6, 8]]))
>>> d.diagonal()
[2, 4]
>>> cohomology_at(IntMatrix([[2]]), IntMatrix.zeros(0, 1))
FgAbGroup([2])
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from math import gcd, prod

from .errors import DimensionMismatch, NotAComplex, NotPrime


# ---------------------------------------------------------------------------
# matrices


class IntMatrix:
    """Dense integer matrix stored as a list of rows."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data, rows=None, cols=None):
        data = [[int(x) for x in row] for row in data]
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise DimensionMismatch(f"ragged matrix data for shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def diagonal_matrix(cls, entries, rows=None, cols=None):
        rows = len(entries) if rows is None else rows
        cols = len(entries) if cols is None else cols
        m = cls.zeros(rows, cols)
        for i, e in enumerate(entries):
            m.data[i][i] = e
        return m

    @classmethod
    def from_columns(cls, columns, rows):
        columns = list(columns)
        return cls([[c[i] for c in columns] for i in range(rows)], rows, len(columns))

    def __repr__(self):
        return f"IntMatrix({self.data!r})"

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.data) == (other.rows, other.cols, other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(map(tuple, self.data))))

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if self.cols != other.rows:
                raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
            out = []
            for row in self.data:
                acc = [0] * other.cols
                for k, a in enumerate(row):
                    if a:
                        orow = other.data[k]
                        for j, b in enumerate(orow):
                            if b:
                                acc[j] += a * b
                out.append(acc)
            return IntMatrix(out, self.rows, other.cols)
        return self.apply(other)

    def apply(self, vec):
        if len(vec) != self.cols:
            raise DimensionMismatch(f"vector of length {len(vec)} for {self.cols} columns")
        return [sum(a * b for a, b in zip(row, vec) if a) for row in self.data]

    def transpose(self):
        return IntMatrix([list(c) for c in zip(*self.data)] if self.rows else [],
                         self.cols, self.rows)

    T = property(transpose)

    def column(self, j):
        return [row[j] for row in self.data]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def diagonal(self):
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]

    def is_zero(self):
        return not any(any(r) for r in self.data)

    def tolist(self):
        return [r[:] for r in self.data]

    def select_columns(self, idx):
        return IntMatrix([[row[j] for j in idx] for row in self.data], self.rows, len(idx))

    def select_rows(self, idx):
        return IntMatrix([self.data[i][:] for i in idx], len(idx), self.cols)

    def hstack(self, other):
        if self.rows != other.rows:
            raise DimensionMismatch("hstack row counts differ")
        return IntMatrix([a + b for a, b in zip(self.data, other.data)],
                         self.rows, self.cols + other.cols)

    def vstack(self, other):
        if self.cols != other.cols:
            raise DimensionMismatch("vstack column counts differ")
        return IntMatrix(self.data + other.data, self.rows + other.rows, self.cols)

    def to_sparse(self):
        return SparseIntMatrix([{j: v for j, v in enumerate(r) if v} for r in self.data],
                               self.cols)


class SparseIntMatrix:
    """Row-major sparse integer matrix: a list of ``{column: value}`` dicts."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows, ncols):
        self.rows = rows
        self.ncols = ncols

    @property
    def nrows(self):
        return len(self.rows)

    def to_dense(self):
        out = [[0] * self.ncols for _ in self.rows]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                out[i][j] = v
        return IntMatrix(out, len(self.rows), self.ncols)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise DimensionMismatch("sparse product shapes do not compose")
        out = []
        for r in self.rows:
            acc = defaultdict(int)
            for k, a in r.items():
                for j, b in other.rows[k].items():
                    acc[j] += a * b
            out.append({j: v for j, v in acc.items() if v})
        return SparseIntMatrix(out, other.ncols)

    def nnz(self):
        return sum(len(r) for r in self.rows)


def as_matrix(m):
    if isinstance(m, IntMatrix):
        return m
    if isinstance(m, SparseIntMatrix):
        return m.to_dense()
    return IntMatrix(m)


# ---------------------------------------------------------------------------
# Smith normal form


def _swap_rows(a, i, j):
    a[i], a[j] = a[j], a[i]


def _swap_cols(a, i, j):
    for row in a:
        row[i], row[j] = row[j], row[i]


def _row_axpy(a, dst, src, q):
    """row[dst] -= q * row[src]"""
    rs, rd = a[src], a[dst]
    for k, v in enumerate(rs):
        if v:
            rd[k] -= q * v


def _col_axpy(a, dst, src, q):
    """col[dst] -= q * col[src]"""
    for row in a:
        v = row[src]
        if v:
            row[dst] -= q * v


def snf(m, inverses=False):
    """Smith normal form ``(d, u, v)`` with ``u @ m @ v == d``.

    With ``inverses=True`` also returns ``u^-1`` and ``v^-1``.  Pivots are the
    smallest nonzero entry in absolute value.
    """
    m = as_matrix(m)
    r, c = m.rows, m.cols
    a = m.tolist()
    u = IntMatrix.identity(r).data
    v = IntMatrix.identity(c).data
    ui = IntMatrix.identity(r).data if inverses else None
    vi = IntMatrix.identity(c).data if inverses else None

    def rswap(i, j):
        _swap_rows(a, i, j)
        _swap_rows(u, i, j)
        if inverses:
            _swap_cols(ui, i, j)

    def cswap(i, j):
        _swap_cols(a, i, j)
        _swap_cols(v, i, j)
        if inverses:
            _swap_rows(vi, i, j)

    def raxpy(dst, src, q):
        _row_axpy(a, dst, src, q)
        _row_axpy(u, dst, src, q)
        if inverses:
            # (E u)^-1 = u^-1 E^-1 and E^-1 adds q*col[dst] to col[src]
            _col_axpy(ui, src, dst, -q)

    def caxpy(dst, src, q):
        _col_axpy(a, dst, src, q)
        _col_axpy(v, dst, src, q)
        if inverses:
            _row_axpy(vi, src, dst, -q)

    t = 0
    while t < min(r, c):
        best = None
        for i in range(t, r):
            row = a[i]
            for j in range(t, c):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            rswap(t, i)
        if j != t:
            cswap(t, j)
        while True:
            p = a[t][t]
            clean = True
            for i in range(t + 1, r):
                if a[i][t]:
                    raxpy(i, t, a[i][t] // p)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, c):
                if a[t][j]:
                    caxpy(j, t, a[t][j] // p)
                    if a[t][j]:
                        clean = False
            if clean:
                bad = None
                for i in range(t + 1, r):
                    row = a[i]
                    for j in range(t + 1, c):
                        if row[j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                raxpy(t, bad, -1)
            # move the smallest entry of row t / column t to the pivot spot
            best = (abs(a[t][t]), t, t)
            for i in range(t + 1, r):
                if a[i][t] and abs(a[i][t]) < best[0]:
                    best = (abs(a[i][t]), i, t)
            for j in range(t + 1, c):
                if a[t][j] and abs(a[t][j]) < best[0]:
                    best = (abs(a[t][j]), t, j)
            _, i, j = best
            if i != t:
                rswap(t, i)
            if j != t:
                cswap(t, j)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
            if inverses:
                for row in ui:
                    row[t] = -row[t]
        t += 1
    out = (IntMatrix(a, r, c), IntMatrix(u, r, r), IntMatrix(v, c, c))
    if inverses:
        out = out + (IntMatrix(ui, r, r), IntMatrix(vi, c, c))
    return out


def _dense_invariants(a):
    """Nonzero diagonal of the SNF of a list-of-rows matrix (destroys ``a``)."""
    r = len(a)
    c = len(a[0]) if a else 0
    out = []
    t = 0
    while t < min(r, c):
        best = None
        for i in range(t, r):
            row = a[i]
            for j in range(t, c):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        _swap_rows(a, t, i)
        _swap_cols(a, t, j)
        while True:
            p = a[t][t]
            clean = True
            for i in range(t + 1, r):
                if a[i][t]:
                    _row_axpy(a, i, t, a[i][t] // p)
                    clean = clean and not a[i][t]
            for j in range(t + 1, c):
                if a[t][j]:
                    _col_axpy(a, j, t, a[t][j] // p)
                    clean = clean and not a[t][j]
            if clean:
                bad = next((i for i in range(t + 1, r)
                            if any(x % p for x in a[i][t + 1:])), None)
                if bad is None:
                    break
                _row_axpy(a, t, bad, -1)
            best = (abs(a[t][t]), t, t)
            for i in range(t + 1, r):
                if a[i][t] and abs(a[i][t]) < best[0]:
                    best = (abs(a[i][t]), i, t)
            for j in range(t + 1, c):
                if a[t][j] and abs(a[t][j]) < best[0]:
                    best = (abs(a[t][j]), t, j)
            _, i, j = best
            _swap_rows(a, t, i)
            _swap_cols(a, t, j)
        out.append(abs(a[t][t]))
        t += 1
    return out


# ---------------------------------------------------------------------------
# sparse elimination


def _eliminate(rows, modulus=None):
    """Sparse elimination on unit pivots, shortest rows first.

    ``rows`` is consumed.  Over Z only +-1 pivots are used; mod p every
    nonzero entry is a unit.  Returns ``(pivots, leftover_rows)`` where the
    leftover rows have no usable pivot.
    """
    rows = [r for r in rows if r]
    cols = defaultdict(set)
    for i, r in enumerate(rows):
        for j in r:
            cols[j].add(i)
    alive = set(range(len(rows)))
    heap = [(len(r), i) for i, r in enumerate(rows)]
    heapq.heapify(heap)
    pivots = 0
    while heap:
        ln, i = heapq.heappop(heap)
        if i not in alive or ln != len(rows[i]):
            continue
        r = rows[i]
        if not r:
            alive.discard(i)
            continue
        best = None
        for j, x in r.items():
            if modulus is not None or x in (1, -1):
                cost = len(cols[j])
                if best is None or cost < best[0]:
                    best = (cost, j)
                    if cost == 1:
                        break
        if best is None:
            continue
        j = best[1]
        pv = r[j]
        inv = pow(pv, -1, modulus) if modulus is not None else pv
        alive.discard(i)
        for j2 in r:
            cols[j2].discard(i)
        for k in list(cols[j]):
            rk = rows[k]
            fac = rk[j] * inv
            if modulus is not None:
                fac %= modulus
            for j2, x in r.items():
                nv = rk.get(j2, 0) - fac * x
                if modulus is not None:
                    nv %= modulus
                if nv:
                    if j2 not in rk:
                        cols[j2].add(k)
                    rk[j2] = nv
                elif j2 in rk:
                    del rk[j2]
                    cols[j2].discard(k)
            heapq.heappush(heap, (len(rk), k))
        del cols[j]
        pivots += 1
    return pivots, [rows[i] for i in sorted(alive) if rows[i]]


def local_divisors(rows, p, k):
    """Valuations ``v < k`` of the elementary divisors ``p^v`` (v >= 1) over Z/p^k.

    Elimination over the local ring Z/p^k always pivots on an entry of minimal
    valuation, which then divides its whole row and column, so only row
    operations are needed.  Divisors of valuation >= k are not reported.
    """
    mod = p ** k
    rows = [{j: x % mod for j, x in r.items() if x % mod} for r in rows]
    out = []
    for v in range(k):
        if not rows:
            break
        n_piv, rows = _eliminate_local(rows, p, v, mod)
        if v:
            out.extend([v] * n_piv)
    return out


def _eliminate_local(rows, p, v, mod):
    """Eliminate pivots of valuation exactly ``v``; every entry has valuation >= v."""
    pv = p ** v
    scaled = [{j: x // pv for j, x in r.items()} for r in rows]
    sub = mod // pv
    # after dividing by p^v the admissible pivots are the units mod p
    cols = defaultdict(set)
    for i, r in enumerate(scaled):
        for j in r:
            cols[j].add(i)
    alive = set(range(len(scaled)))
    heap = [(len(r), i) for i, r in enumerate(scaled)]
    heapq.heapify(heap)
    pivots = 0
    while heap:
        ln, i = heapq.heappop(heap)
        if i not in alive or ln != len(scaled[i]):
            continue
        r = scaled[i]
        if not r:
            alive.discard(i)
            continue
        best = None
        for j, x in r.items():
            if x % p:
                cost = len(cols[j])
                if best is None or cost < best[0]:
                    best = (cost, j)
                    if cost == 1:
                        break
        if best is None:
            continue
        j = best[1]
        inv = pow(r[j], -1, sub)
        alive.discard(i)
        for j2 in r:
            cols[j2].discard(i)
        for kk in list(cols[j]):
            rk = scaled[kk]
            fac = rk[j] * inv % sub
            for j2, x in r.items():
                nv = (rk.get(j2, 0) - fac * x) % sub
                if nv:
                    if j2 not in rk:
                        cols[j2].add(kk)
                    rk[j2] = nv
                elif j2 in rk:
                    del rk[j2]
                    cols[j2].discard(kk)
            heapq.heappush(heap, (len(rk), kk))
        del cols[j]
        pivots += 1
    rest = [{j: x * pv for j, x in scaled[i].items()} for i in sorted(alive) if scaled[i]]
    return pivots, rest


def _compress(rows):
    colset = sorted({j for r in rows for j in r})
    pos = {j: k for k, j in enumerate(colset)}
    out = [[0] * len(colset) for _ in rows]
    for i, r in enumerate(rows):
        for j, x in r.items():
            out[i][pos[j]] = x
    return out


def elementary_divisors(m):
    """``(rank, divisors)`` of an integer matrix; divisors exclude 1.

    Accepts dense or sparse input.  Unit pivots are eliminated sparsely and
    only the remainder is densified.
    """
    if isinstance(m, SparseIntMatrix):
        rows = [dict(r) for r in m.rows]
    else:
        rows = [{j: x for j, x in enumerate(r) if x} for r in as_matrix(m).data]
    pivots, rest = _eliminate(rows)
    ds = _dense_invariants(_compress(rest)) if rest else []
    return pivots + len(ds), sorted(d for d in ds if d != 1)


def invariant_factors(m):
    return elementary_divisors(m)[1]


def matrix_rank(m):
    return elementary_divisors(m)[0]


def is_prime(p):
    if not isinstance(p, int) or p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def modp_rank(m, p):
    """Rank of ``m`` over the field with ``p`` elements.

    >>> modp_rank(IntMatrix([[2, 1], [0, 2]]), 2)
    1
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if isinstance(m, SparseIntMatrix):
        rows = [{j: x % p for j, x in r.items() if x % p} for r in m.rows]
    else:
        rows = [{j: x % p for j, x in enumerate(r) if x % p} for r in as_matrix(m).data]
    pivots, rest = _eliminate(rows, modulus=p)
    assert not rest
    return pivots


# ---------------------------------------------------------------------------
# finitely generated abelian groups


def _normalize_factors(orders):
    """Invariant factors of the diagonal group ``sum Z/o`` (o = 0 for Z)."""
    free = sum(1 for o in orders if o == 0)
    primes = defaultdict(list)
    for o in orders:
        o = abs(o)
        if o <= 1:
            continue
        n, q = o, 2
        while q * q <= n:
            if n % q == 0:
                e = 1
                n //= q
                while n % q == 0:
                    n //= q
                    e *= q
                primes[q].append(e * q)
            q += 1
        if n > 1:
            primes[n].append(n)
    k = max((len(v) for v in primes.values()), default=0)
    factors = [1] * k
    for q, powers in primes.items():
        powers.sort()
        for i, pw in enumerate(reversed(powers)):
            factors[k - 1 - i] *= pw
    return [f for f in factors if f != 1] + [0] * free


class FgAbGroup:
    """A finitely generated abelian group ``Z/d1 + ... + Z/dk``.

    Factors satisfy ``d1 | d2 | ...`` with free summands (written 0) last and
    no factor equal to 1.  When the group arises as a subquotient of some
    ambient lattice, ``generators`` holds ambient representatives and
    ``coordinates`` maps ambient cocycles to normal-form coordinates.
    """

    def __init__(self, invariant_factors=(), generators=None, coordinate_map=None,
                 labels=None):
        facs = [int(d) for d in invariant_factors]
        if facs != _normalize_factors(facs) or any(d == 1 for d in facs):
            raise ValueError(f"not an invariant-factor list: {facs}")
        self.invariant_factors = tuple(facs)
        self.generators = generators
        self.coordinate_map = coordinate_map
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def from_orders(cls, orders):
        return cls(_normalize_factors(list(orders)))

    @classmethod
    def trivial(cls):
        return cls(())

    def __repr__(self):
        return f"FgAbGroup({list(self.invariant_factors)})"

    def __str__(self):
        return format_group(self.invariant_factors)

    def __eq__(self, other):
        if isinstance(other, FgAbGroup):
            return self.invariant_factors == other.invariant_factors
        return NotImplemented

    def __hash__(self):
        return hash(self.invariant_factors)

    @property
    def rank(self):
        return len(self.invariant_factors)

    @property
    def free_rank(self):
        return sum(1 for d in self.invariant_factors if d == 0)

    @property
    def torsion_factors(self):
        return tuple(d for d in self.invariant_factors if d)

    def is_trivial(self):
        return not self.invariant_factors

    def is_finite(self):
        return self.free_rank == 0

    def order(self):
        """Product of the finite factors, or ``None`` when infinite."""
        if self.free_rank:
            return None
        return prod(self.invariant_factors)

    def exponent(self):
        if self.free_rank:
            return 0
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def primary_part(self, p):
        out = []
        for d in self.invariant_factors:
            if d == 0:
                continue
            q = 1
            while d % p == 0:
                d //= p
                q *= p
            out.append(q)
        return FgAbGroup.from_orders(out)

    def primes(self):
        return sorted({q for d in self.torsion_factors for q in _prime_factors(d)})

    def direct_sum(self, other):
        return FgAbGroup.from_orders(list(self.invariant_factors) + list(other.invariant_factors))

    def hom_order_to(self, other):
        """Invariant factors of Hom(self, other) for finite ``self``."""
        out = []
        for a in self.invariant_factors:
            for b in other.invariant_factors:
                if a == 0:
                    raise ValueError("Hom from a free summand is not handled here")
                out.append(gcd(a, b) if b else 1)
        return FgAbGroup.from_orders(out)

    # element arithmetic in normal-form coordinates
    def normalize(self, x):
        if len(x) != self.rank:
            raise DimensionMismatch(f"element of length {len(x)} in group of rank {self.rank}")
        return tuple(v % d if d else v for v, d in zip(x, self.invariant_factors))

    def zero(self):
        return (0,) * self.rank

    def add(self, x, y):
        return self.normalize([a + b for a, b in zip(x, y)])

    def neg(self, x):
        return self.normalize([-a for a in x])

    def scale(self, k, x):
        return self.normalize([k * a for a in x])

    def element_order(self, x):
        x = self.normalize(x)
        o = 1
        for v, d in zip(x, self.invariant_factors):
            if d == 0:
                if v:
                    return 0
                continue
            o = o * (d // gcd(d, v)) // gcd(o, d // gcd(d, v))
        return o

    def coordinates(self, vec):
        if self.coordinate_map is None:
            raise ValueError("group carries no coordinate map")
        return self.normalize(self.coordinate_map(vec))

    def elements(self):
        """All elements (finite groups only)."""
        if self.free_rank:
            raise ValueError("infinite group")
        out = [()]
        for d in self.invariant_factors:
            out = [e + (k,) for e in out for k in range(d)]
        return out


def _prime_factors(n):
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def format_group(factors):
    """Human-readable invariant-factor list, e.g. ``Z/2 + Z``."""
    if not factors:
        return "0"
    return " + ".join("Z" if d == 0 else f"Z/{d}" for d in factors)


# ---------------------------------------------------------------------------
# complexes


def _order_columns(orders, n):
    """Columns ``o * e_k`` for the torsion coordinates of a diagonal group."""
    if orders is None:
        return []
    cols = []
    for k, o in enumerate(orders):
        if o:
            c = [0] * n
            c[k] = o
            cols.append(c)
    return cols


def _kernel_lattice(g, tgt_orders, block=24):
    """Basis (as columns) of ``{x : g x in im diag(tgt_orders)}``.

    Rows are processed in blocks so that only small matrices are ever put
    in Smith form.
    """
    b = g.cols
    k = IntMatrix.identity(b)
    for start in range(0, g.rows, block):
        rows = g.data[start:start + block]
        ords = tgt_orders[start:start + block] if tgt_orders else [0] * len(rows)
        m = IntMatrix(rows, len(rows), b) @ k
        tors = [(i, o) for i, o in enumerate(ords) if o]
        aug = m.hstack(IntMatrix([[(-o if i == r else 0) for i, o in tors]
                                  for r in range(len(rows))], len(rows), len(tors)))
        if aug.is_zero():
            continue
        d, _, v = snf(aug)
        rank = sum(1 for x in d.diagonal() if x)
        kp = v.select_rows(range(k.cols)).select_columns(range(rank, aug.cols))
        k = k @ kp
        if k.cols == 0:
            break
    return k


def subquotient(f, g, mid_orders=None, tgt_orders=None):
    """``ker(g) / im(f)`` for maps of diagonally presented groups.

    The middle group is ``Z^b`` modulo ``diag(mid_orders)`` and ``g`` lands in
    ``Z^c`` modulo ``diag(tgt_orders)``.  Orders of 0 mean free coordinates;
    ``None`` means everything is free.  The result carries ambient
    representatives and a coordinate map defined on cocycles.
    """
    f = as_matrix(f)
    g = as_matrix(g)
    b = g.cols
    if f.rows != b:
        raise DimensionMismatch(f"f has {f.rows} rows but g has {b} columns")
    if mid_orders is not None and len(mid_orders) != b:
        raise DimensionMismatch("mid_orders length differs from the middle rank")
    if tgt_orders is not None and len(tgt_orders) != g.rows:
        raise DimensionMismatch("tgt_orders length differs from the target rank")
    if b == 0:
        return FgAbGroup((), [], lambda x: ())

    zb = _kernel_lattice(g, tgt_orders)
    kdim = zb.cols
    if kdim:
        dz, uz, vz = snf(zb)
        dzd = dz.diagonal()

    def z_coords(x):
        y = uz.apply(list(x))
        if any(y[kdim:]):
            raise ValueError("vector is not a cocycle")
        c = []
        for yi, di in zip(y[:kdim], dzd):
            if yi % di:
                raise ValueError("vector is not a cocycle")
            c.append(yi // di)
        return vz.apply(c)

    if f.cols and g.rows:
        gf = g @ f
        for col in gf.columns():
            for k, x in enumerate(col):
                o = tgt_orders[k] if tgt_orders else 0
                if (o == 0 and x) or (o and x % o):
                    raise NotAComplex("g f does not vanish modulo the target relations")

    if kdim == 0:
        return FgAbGroup((), [], lambda x: ())
    bgens = f.columns() + _order_columns(mid_orders, b)
    coeff = IntMatrix.from_columns([z_coords(col) for col in bgens], kdim) if bgens else \
        IntMatrix.zeros(kdim, 0)
    d2, u2, _, u2inv, _ = snf(coeff, inverses=True)
    diag = d2.diagonal() + [0] * (kdim - min(coeff.rows, coeff.cols))
    keep = [i for i, x in enumerate(diag) if x != 1]
    factors = [diag[i] for i in keep]
    reps_z = u2inv.select_columns(keep)
    gens = (zb @ reps_z).columns() if keep else []
    proj = u2.select_rows(keep)

    def coords(x):
        return tuple(proj.apply(z_coords(x)))

    return FgAbGroup(factors, gens, coords)


def cohomology_at(f, g):
    """``ker(g) / im(f)`` for maps of free modules.

    >>> cohomology_at(IntMatrix([[1]]), IntMatrix.zeros(0, 1))
    FgAbGroup([])
    """
    f = as_matrix(f)
    g = as_matrix(g)
    if f.rows != g.cols:
        raise DimensionMismatch(f"f is {f.rows}x{f.cols}, g is {g.rows}x{g.cols}")
    if f.cols and g.rows and not (g @ f).is_zero():
        raise NotAComplex("g @ f is not zero")
    return subquotient(f, g)


def _lift_quotient(prod_rows, tgt_orders, what):
    """Divide the torsion rows of ``prod_rows`` by their orders.

    ``prod_rows`` is a sparse matrix whose rows are indexed by target
    coordinates.  Returns the rows for the torsion coordinates divided
    exactly; free rows must vanish.
    """
    out = []
    for k, o in enumerate(tgt_orders):
        row = prod_rows.rows[k]
        if o == 0:
            if row:
                raise NotAComplex(f"{what}: free coordinate {k} does not vanish")
            continue
        q = {}
        for j, x in row.items():
            if x % o:
                raise NotAComplex(f"{what}: entry not divisible by order {o}")
            q[j] = x // o
        out.append(q)
    return out


def presented_h_orders(d_prev, d_cur, d_next, orders, exponent=None):
    """Invariant factors of H at the middle spot of a presented complex.

    ``orders`` lists the coordinate orders of the four groups
    ``C^{s-1}, C^s, C^{s+1}, C^{s+2}`` and the maps are sparse integer lifts
    ``C^{s-1} -> C^s -> C^{s+1} -> C^{s+2}`` of the true differentials.  The
    lifts only need to square to zero modulo the relations.  The answer is
    read off a free total complex (each group replaced by its two-term free
    resolution, with a homotopy correcting the failure of d^2 = 0), so only
    elementary divisors of sparse integer matrices are required.

    With ``d_next=None`` only the torsion subgroup is returned.  If moreover
    ``exponent`` is a known multiple of its exponent, the divisors are found
    by elimination over Z/p^k for each prime p of ``exponent``.
    """
    o_prev, o_cur, o_next, o_next2 = orders

    def rel(o):
        # R: Z^r -> Z^n with e_k -> o e_{i_k}
        idx = [i for i, x in enumerate(o) if x]
        return idx

    def rmat(o):
        idx = rel(o)
        rows = [dict() for _ in o]
        for k, i in enumerate(idx):
            rows[i][k] = o[i]
        return SparseIntMatrix(rows, len(idx))

    def lift_l(d, o_src, o_tgt):
        """L with d R_src = R_tgt L."""
        dr = d @ rmat(o_src)
        return SparseIntMatrix(_lift_quotient(dr, o_tgt, "d R"), len(rel(o_src)))

    def homotopy(d_a, d_b, o_c):
        dd = d_b @ d_a
        return SparseIntMatrix(_lift_quotient(dd, o_c, "d d"), d_a.ncols)

    def total(d_a, d_b, o_a, o_b, o_c):
        """Total differential T^a -> T^b with T^a = Z^{n_a} + Z^{r_b}.

        D(x, y) = (d_a x + R_b y, -L_b y - h_a x), where d_b R_b = R_c L_b
        and d_b d_a = R_c h_a.
        """
        n_a = d_a.ncols
        r_b = len(rel(o_b))
        L = lift_l(d_b, o_b, o_c)
        H = homotopy(d_a, d_b, o_c)
        R = rmat(o_b)
        rows = []
        for i in range(d_a.nrows):
            row = dict(d_a.rows[i])
            for k, x in R.rows[i].items():
                row[n_a + k] = row.get(n_a + k, 0) + x
            rows.append({j: x for j, x in row.items() if x})
        for k in range(len(L.rows)):
            row = {}
            for j, x in H.rows[k].items():
                row[j] = -x
            for j, x in L.rows[k].items():
                row[n_a + j] = row.get(n_a + j, 0) - x
            rows.append({j: x for j, x in row.items() if x})
        return SparseIntMatrix(rows, n_a + r_b)

    dprev_tot = total(d_prev, d_cur, o_prev, o_cur, o_next)
    if d_next is None and exponent:
        divs = []
        for p in _prime_factors(exponent):
            e, x = 0, exponent
            while x % p == 0:
                x, e = x // p, e + 1
            divs.extend(p ** v for v in local_divisors(dprev_tot.rows, p, e + 1))
        return FgAbGroup.from_orders(divs)
    rk_prev, divs = elementary_divisors(dprev_tot)
    if d_next is None:
        return FgAbGroup.from_orders(divs)
    dcur_tot = total(d_cur, d_next, o_cur, o_next, o_next2)
    n_tot = len(o_cur) + len(rel(o_next))
    rk_cur, _ = elementary_divisors(dcur_tot)
    free = n_tot - rk_prev - rk_cur
    return FgAbGroup.from_orders(divs + [0] * free)


class CochainComplex:
    """Free cochain complex: ``ranks[s]`` and ``differentials[s]: C^s -> C^{s+1}``."""

    def __init__(self, ranks, differentials, check=True):
        self.ranks = list(ranks)
        self.differentials = [as_matrix(d) for d in differentials]
        if len(self.differentials) != max(len(self.ranks) - 1, 0):
            raise DimensionMismatch("need one differential between consecutive degrees")
        for s, d in enumerate(self.differentials):
            if (d.rows, d.cols) != (self.ranks[s + 1], self.ranks[s]):
                raise DimensionMismatch(f"differential {s} has shape {d.rows}x{d.cols}")
        if check:
            for s in range(len(self.differentials) - 1):
                if not (self.differentials[s + 1] @ self.differentials[s]).is_zero():
                    raise NotAComplex(f"d{s + 1} d{s} is not zero")

    def incoming(self, s):
        if s == 0:
            return IntMatrix.zeros(self.ranks[0], 0)
        return self.differentials[s - 1]

    def outgoing(self, s):
        if s < len(self.differentials):
            return self.differentials[s]
        return IntMatrix.zeros(0, self.ranks[s])

    def cohomology(self, s):
        return cohomology_at(self.incoming(s), self.outgoing(s))
